//! Explicit strong-stability-preserving Runge-Kutta schemes in Shu-Osher form
//! and the CFL time-step rule.

use crate::error::{MhdError, Result};
use crate::viscosity::nodal_max_speed;
use crate::thermo::GasModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SspScheme {
    /// Three-stage third-order scheme of Shu and Osher.
    Ssprk33,
    /// Five-stage fourth-order scheme of Spiteri and Ruuth.
    Ssprk54,
}

/// Stage `i` is `sum_k alpha[i][k] u_k + dt beta[i][k] L(u_k)` over earlier
/// stages `k` (stage 0 is the initial state).
struct ShuOsher {
    alpha: &'static [&'static [f64]],
    beta: &'static [&'static [f64]],
}

const SSPRK33: ShuOsher = ShuOsher {
    alpha: &[&[1.0], &[0.75, 0.25], &[1.0 / 3.0, 0.0, 2.0 / 3.0]],
    beta: &[&[1.0], &[0.0, 0.25], &[0.0, 0.0, 2.0 / 3.0]],
};

const SSPRK54: ShuOsher = ShuOsher {
    alpha: &[
        &[1.0],
        &[0.444370493651235, 0.555629506348765],
        &[0.620101851488403, 0.0, 0.379898148511597],
        &[0.178079954393132, 0.0, 0.0, 0.821920045606868],
        &[0.0, 0.0, 0.517231671970585, 0.096059710526147, 0.386708617503269],
    ],
    beta: &[
        &[0.391752226571890],
        &[0.0, 0.368410593050371],
        &[0.0, 0.0, 0.251891774271694],
        &[0.0, 0.0, 0.0, 0.544974750228521],
        &[0.0, 0.0, 0.0, 0.063692468666290, 0.226007483236906],
    ],
};

impl SspScheme {
    /// RK3 for degrees up to two, RK4 for cubics.
    pub fn for_degree(degree: usize) -> Self {
        if degree >= 3 {
            SspScheme::Ssprk54
        } else {
            SspScheme::Ssprk33
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SspScheme::Ssprk33 => "ssprk33",
            SspScheme::Ssprk54 => "ssprk54",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ssprk33" => Ok(SspScheme::Ssprk33),
            "ssprk54" => Ok(SspScheme::Ssprk54),
            other => Err(MhdError::Config(format!("unknown time integrator '{other}'"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.table().alpha.len()
    }

    pub fn order(&self) -> usize {
        match self {
            SspScheme::Ssprk33 => 3,
            SspScheme::Ssprk54 => 4,
        }
    }

    fn table(&self) -> &'static ShuOsher {
        match self {
            SspScheme::Ssprk33 => &SSPRK33,
            SspScheme::Ssprk54 => &SSPRK54,
        }
    }

    /// `(alpha, beta)` rows of the Shu-Osher table.
    pub fn coefficients(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let t = self.table();
        t.alpha.iter().zip(t.beta).map(|(a, b)| (a.to_vec(), b.to_vec())).collect()
    }
}

/// Advances `u` by one step. `post_stage` runs after every stage (constraints,
/// cleaning, consistency updates).
pub fn step<R, P>(scheme: SspScheme, u: &[f64], dt: f64, mut rhs: R, mut post_stage: P) -> Result<Vec<f64>>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    P: FnMut(&mut Vec<f64>) -> Result<()>,
{
    let table = scheme.table();
    let n = u.len();
    let mut stages: Vec<Vec<f64>> = vec![u.to_vec()];
    let mut derivs: Vec<Option<Vec<f64>>> = vec![None];
    for (i, (alpha, beta)) in table.alpha.iter().zip(table.beta).enumerate() {
        let wrap = |e: MhdError| MhdError::StageFailure { stage: i + 1, source: Box::new(e) };
        for k in 0..beta.len() {
            if beta[k] != 0.0 && derivs[k].is_none() {
                derivs[k] = Some(rhs(&stages[k]).map_err(wrap)?);
            }
        }
        let mut next = vec![0.0; n];
        for k in 0..alpha.len() {
            if alpha[k] != 0.0 {
                for (x, s) in next.iter_mut().zip(&stages[k]) {
                    *x += alpha[k] * s;
                }
            }
            if beta[k] != 0.0 {
                let l = derivs[k].as_ref().expect("derivative evaluated above");
                let c = dt * beta[k];
                for (x, d) in next.iter_mut().zip(l) {
                    *x += c * d;
                }
            }
        }
        post_stage(&mut next).map_err(wrap)?;
        stages.push(next);
        derivs.push(None);
    }
    Ok(stages.pop().expect("at least one stage"))
}

/// `dt = cfl min(h) / max(speed)`, clipped so that `t + dt <= t_final`.
pub fn compute_dt(
    u: &[f64],
    h: &[f64],
    dim: usize,
    cfl: f64,
    gas: &GasModel,
    t: f64,
    t_final: f64,
) -> Result<f64> {
    let speed = nodal_max_speed(u, h.len(), dim, gas)?;
    let vmax = speed.iter().copied().fold(0.0, f64::max);
    let hmin = h.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(cfl_dt(hmin, vmax, cfl).min(t_final - t))
}

pub fn cfl_dt(h_min: f64, max_speed: f64, cfl: f64) -> f64 {
    cfl * h_min / max_speed
}

/// Time bookkeeping for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeController {
    pub cfl: f64,
    pub t: f64,
    pub t_final: f64,
    pub dt_history: Vec<f64>,
}

impl TimeController {
    pub fn new(cfl: f64, t_final: f64) -> Result<Self> {
        if !(cfl > 0.0) || !(t_final >= 0.0) {
            return Err(MhdError::Config(format!("invalid cfl {cfl} or final time {t_final}")));
        }
        Ok(TimeController { cfl, t: 0.0, t_final, dt_history: Vec::new() })
    }

    pub fn finished(&self) -> bool {
        self.t >= self.t_final * (1.0 - 1e-14)
    }

    pub fn advance(&mut self, dt: f64) {
        self.t += dt;
        if (self.t_final - self.t).abs() <= 1e-14 * self.t_final.max(1.0) {
            self.t = self.t_final;
        }
        self.dt_history.push(dt);
    }
}
