//! First-order and entropy-viscosity coefficients.

use std::collections::VecDeque;

use crate::error::{MhdError, Result};
use crate::fespace::FeSpace;
use crate::thermo::{entropy_pair, max_coordinate_wave_speed, ConservedState, GasModel, StateVec, NCOMP};

/// Normalization of the entropy residual in the high-order coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNormalization {
    /// `||S - mean(S)||_inf`
    EntropyDeviation,
    /// `||R - mean(R)||_inf`
    ResidualDeviation,
}

impl ResidualNormalization {
    pub fn name(&self) -> &'static str {
        match self {
            ResidualNormalization::EntropyDeviation => "entropy",
            ResidualNormalization::ResidualDeviation => "residual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViscosityModel {
    /// No regularization.
    None,
    /// Spatially uniform coefficient.
    Constant { eps: f64 },
    FirstOrder { c_max: f64 },
    EntropyViscosity { c_max: f64, c_e: f64, normalization: ResidualNormalization },
}

impl ViscosityModel {
    pub fn first_order() -> Self {
        ViscosityModel::FirstOrder { c_max: 0.5 }
    }

    pub fn entropy_viscosity() -> Self {
        ViscosityModel::EntropyViscosity {
            c_max: 0.5,
            c_e: 1.0,
            normalization: ResidualNormalization::EntropyDeviation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ViscosityModel::None => true,
            ViscosityModel::Constant { eps } => eps >= 0.0,
            ViscosityModel::FirstOrder { c_max } => c_max > 0.0,
            ViscosityModel::EntropyViscosity { c_max, c_e, .. } => c_max > 0.0 && c_e > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(MhdError::Config(format!("invalid viscosity parameters {self:?}")))
        }
    }
}

fn node_state(u: &[f64], n: usize, i: usize) -> StateVec {
    let mut s = [0.0; NCOMP];
    for (c, v) in s.iter_mut().enumerate() {
        *v = u[c * n + i];
    }
    s
}

/// Largest coordinate-direction wave speed at every node.
pub fn nodal_max_speed(u: &[f64], n: usize, dim: usize, gas: &GasModel) -> Result<Vec<f64>> {
    (0..n)
        .map(|i| {
            let st = ConservedState::from_array(&node_state(u, n, i));
            max_coordinate_wave_speed(&st, dim, gas).map_err(|e| e.at(format!("node {i}")))
        })
        .collect()
}

/// `eps_L,i = c_max h_i maxspeed_i`
pub fn first_order_viscosity(u: &[f64], h: &[f64], dim: usize, gas: &GasModel, c_max: f64) -> Result<Vec<f64>> {
    let speed = nodal_max_speed(u, h.len(), dim, gas)?;
    Ok(h.iter().zip(&speed).map(|(h, s)| c_max * h * s).collect())
}

/// Nodal entropy `S = rho ln(p / rho^gamma) / (gamma - 1)`.
pub fn nodal_entropy(u: &[f64], n: usize, gas: &GasModel) -> Result<Vec<f64>> {
    (0..n)
        .map(|i| {
            let st = ConservedState::from_array(&node_state(u, n, i));
            entropy_pair(&st, gas).map(|e| e.entropy).map_err(|e| e.at(format!("node {i}")))
        })
        .collect()
}

/// The most recent nodal entropy fields, newest first.
#[derive(Debug, Clone, Default)]
pub struct EntropyHistory {
    levels: VecDeque<(f64, Vec<f64>)>,
}

impl EntropyHistory {
    pub fn new() -> Self {
        EntropyHistory::default()
    }

    pub fn push(&mut self, t: f64, s: Vec<f64>) {
        self.levels.push_front((t, s));
        self.levels.truncate(3);
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn clear(&mut self) {
        self.levels.clear();
    }

    /// Nodal time derivative of the newest level: variable-step BDF2 with three
    /// levels, BDF1 with two.
    pub fn time_derivative(&self) -> Result<Vec<f64>> {
        match self.levels.len() {
            0 | 1 => Err(MhdError::InsufficientHistory),
            2 => {
                let (t0, s0) = &self.levels[0];
                let (t1, s1) = &self.levels[1];
                let dt = t0 - t1;
                Ok(s0.iter().zip(s1).map(|(a, b)| (a - b) / dt).collect())
            }
            _ => {
                let (t0, s0) = &self.levels[0];
                let (t1, s1) = &self.levels[1];
                let (t2, s2) = &self.levels[2];
                let dt = t0 - t1;
                let w = dt / (t1 - t2);
                let a0 = (1.0 + 2.0 * w) / (1.0 + w);
                let a1 = -(1.0 + w);
                let a2 = w * w / (1.0 + w);
                Ok((0..s0.len()).map(|i| (a0 * s0[i] + a1 * s1[i] + a2 * s2[i]) / dt).collect())
            }
        }
    }

    pub fn newest(&self) -> Option<&[f64]> {
        self.levels.front().map(|(_, s)| s.as_slice())
    }
}

/// `R_i = sum_K |K|^-1 int_K |dS/dt + div(u S)| phi_i`, with `dS/dt` taken
/// from the history and `u S` interpolated from nodal values of `u`.
pub fn entropy_residual(space: &FeSpace, u: &[f64], history: &EntropyHistory) -> Result<Vec<f64>> {
    let n = space.n_dofs();
    let dsdt = history.time_derivative()?;
    let s = history.newest().ok_or(MhdError::InsufficientHistory)?;
    let mut flux = [vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let rho = u[i];
        if !(rho > 0.0) {
            return Err(MhdError::NonpositiveDensity { rho }.at(format!("node {i}")));
        }
        flux[0][i] = u[n + i] / rho * s[i];
        flux[1][i] = u[2 * n + i] / rho * s[i];
    }
    let measure: Vec<f64> = (0..space.mesh.n_cells()).map(|c| space.mesh.cell_measure(c)).collect();
    let mut r = vec![0.0; n];
    space.quad_loop(|ctx| {
        let (st, _) = FeSpace::eval_at(ctx, &dsdt);
        let (_, gx) = FeSpace::eval_at(ctx, &flux[0]);
        let (_, gy) = FeSpace::eval_at(ctx, &flux[1]);
        let res = (st + gx[0] + gy[1]).abs() * ctx.jxw / measure[ctx.cell];
        for (i, &d) in ctx.dofs.iter().enumerate() {
            r[d] += res * ctx.phi[i];
        }
    });
    Ok(r)
}

fn weighted_mean(v: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total
}

fn max_deviation(v: &[f64], w: &[f64]) -> f64 {
    let mean = weighted_mean(v, w);
    v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max)
}

/// High-order coefficient `c_E h_i^2 |R_i| / norm`, or zero when the
/// normalization is below `1e-14`.
pub fn high_order_viscosity(
    r: &[f64],
    h: &[f64],
    entropy: &[f64],
    lumped: &[f64],
    c_e: f64,
    normalization: ResidualNormalization,
) -> Vec<f64> {
    let denom = match normalization {
        ResidualNormalization::EntropyDeviation => max_deviation(entropy, lumped),
        ResidualNormalization::ResidualDeviation => max_deviation(r, lumped),
    };
    if denom < 1e-14 {
        return vec![0.0; r.len()];
    }
    r.iter().zip(h).map(|(r, h)| c_e * h * h * r.abs() / denom).collect()
}

/// `eps_i = min(eps_L,i, eps_H,i)`
pub fn entropy_viscosity(eps_h: &[f64], eps_l: &[f64]) -> Vec<f64> {
    eps_h.iter().zip(eps_l).map(|(a, b)| a.min(*b)).collect()
}
