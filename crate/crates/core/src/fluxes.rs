//! Pointwise inviscid and viscous MHD fluxes and the semi-discrete Galerkin
//! residual.
//!
//! Flux tensors are stored row-major as `[component][direction]`; the
//! divergence acts on the direction index, so the conservation law reads
//! `dU_c/dt + sum_j d_j F[c][j] = sum_j d_j F_V[c][j]`.

use crate::error::{MhdError, Result};
use crate::fespace::{cg_csr, CgOptions, Constraints, FeSpace, MassOperators};
use crate::thermo::{ConservedState, GasModel, StateVec, BX, BY, EN, MX, MY, NCOMP, RHO};

pub type FluxTensor = [[f64; 2]; NCOMP];
/// Spatial gradients of the conserved variables, `grad[c][j] = d_j U_c`.
pub type StateGrad = [[f64; 2]; NCOMP];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxTensors {
    /// Euler part: `(m, m u + p I, u (E + p), 0)`.
    pub euler: FluxTensor,
    /// Magnetic part: `(0, -M, -M u, u B - B u)` with `M` the Maxwell stress.
    pub magnetic: FluxTensor,
}

impl FluxTensors {
    pub fn total(&self) -> FluxTensor {
        let mut f = self.euler;
        for c in 0..NCOMP {
            for j in 0..2 {
                f[c][j] += self.magnetic[c][j];
            }
        }
        f
    }
}

/// `-|B|^2/2 I + B B`
pub fn maxwell_stress(b: [f64; 2]) -> [[f64; 2]; 2] {
    let half = 0.5 * (b[0] * b[0] + b[1] * b[1]);
    [[b[0] * b[0] - half, b[0] * b[1]], [b[1] * b[0], b[1] * b[1] - half]]
}

fn admissible(u: &StateVec, gas: &GasModel) -> Result<(f64, [f64; 2], f64)> {
    let rho = u[RHO];
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    let state = ConservedState::from_array(u);
    let rho_e = state.internal_energy();
    if !(rho_e > 0.0) {
        return Err(MhdError::NonpositiveInternalEnergy { rho, rho_e });
    }
    Ok((rho, [u[MX] / rho, u[MY] / rho], (gas.gamma - 1.0) * rho_e))
}

pub fn inviscid_flux(u: &StateVec, gas: &GasModel) -> Result<FluxTensors> {
    let (_, vel, p) = admissible(u, gas)?;
    let m = [u[MX], u[MY]];
    let b = [u[BX], u[BY]];
    let e = u[EN];
    let mw = maxwell_stress(b);
    let mut euler = [[0.0; 2]; NCOMP];
    let mut magnetic = [[0.0; 2]; NCOMP];
    for j in 0..2 {
        euler[RHO][j] = m[j];
        for i in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            euler[MX + i][j] = m[i] * vel[j] + p * delta;
            magnetic[MX + i][j] = -mw[i][j];
            magnetic[BX + i][j] = vel[j] * b[i] - b[j] * vel[i];
        }
        euler[EN][j] = vel[j] * (e + p);
        magnetic[EN][j] = -(mw[j][0] * vel[0] + mw[j][1] * vel[1]);
    }
    Ok(FluxTensors { euler, magnetic })
}

/// Gradients of velocity, pressure and temperature from conserved gradients.
#[derive(Debug, Clone, Copy)]
pub struct PrimitiveGradients {
    /// `du[i][j] = d_j u_i`
    pub du: [[f64; 2]; 2],
    pub dp: [f64; 2],
    pub dt: [f64; 2],
}

pub fn primitive_gradients(u: &StateVec, g: &StateGrad, gas: &GasModel) -> Result<PrimitiveGradients> {
    let (rho, vel, p) = admissible(u, gas)?;
    let mut du = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            du[i][j] = (g[MX + i][j] - vel[i] * g[RHO][j]) / rho;
        }
    }
    let mut dp = [0.0; 2];
    let mut dt = [0.0; 2];
    let temp = p / rho;
    for j in 0..2 {
        let kinetic = 0.5 * (g[MX][j] * vel[0] + g[MY][j] * vel[1] + u[MX] * du[0][j] + u[MY] * du[1][j]);
        let magnetic = u[BX] * g[BX][j] + u[BY] * g[BY][j];
        dp[j] = (gas.gamma - 1.0) * (g[EN][j] - kinetic - magnetic);
        dt[j] = (dp[j] - temp * g[RHO][j]) / rho;
    }
    Ok(PrimitiveGradients { du, dp, dt })
}

/// Divergence of the total inviscid flux evaluated by the chain rule.
pub fn flux_divergence(u: &StateVec, g: &StateGrad, gas: &GasModel) -> Result<StateVec> {
    let (_, vel, p) = admissible(u, gas)?;
    let pg = primitive_gradients(u, g, gas)?;
    let m = [u[MX], u[MY]];
    let b = [u[BX], u[BY]];
    let e = u[EN];
    let b2 = b[0] * b[0] + b[1] * b[1];
    let ptot = p + 0.5 * b2;
    let dptot = [pg.dp[0] + b[0] * g[BX][0] + b[1] * g[BY][0], pg.dp[1] + b[0] * g[BX][1] + b[1] * g[BY][1]];
    let div_u = pg.du[0][0] + pg.du[1][1];
    let div_b = g[BX][0] + g[BY][1];
    let bu = b[0] * vel[0] + b[1] * vel[1];
    let dbu = [
        g[BX][0] * vel[0] + g[BY][0] * vel[1] + b[0] * pg.du[0][0] + b[1] * pg.du[1][0],
        g[BX][1] * vel[0] + g[BY][1] * vel[1] + b[0] * pg.du[0][1] + b[1] * pg.du[1][1],
    ];
    let mut out = [0.0; NCOMP];
    out[RHO] = g[MX][0] + g[MY][1];
    for i in 0..2 {
        let mut s = dptot[i];
        for j in 0..2 {
            s += g[MX + i][j] * vel[j] + m[i] * pg.du[j][j];
            s -= g[BX + i][j] * b[j];
        }
        s -= b[i] * div_b;
        out[MX + i] = s;
    }
    let mut se = div_u * (e + ptot) - div_b * bu;
    for j in 0..2 {
        se += vel[j] * (g[EN][j] + dptot[j]) - b[j] * dbu[j];
    }
    out[EN] = se;
    for i in 0..2 {
        let mut s = div_u * b[i] - div_b * vel[i];
        for j in 0..2 {
            s += vel[j] * g[BX + i][j] - b[j] * pg.du[i][j];
        }
        out[BX + i] = s;
    }
    Ok(out)
}

/// Viscosity coefficients at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViscousCoefficients {
    None,
    Monolithic { eps: f64 },
    MonolithicNoMass { eps: f64 },
    Resistive { mu: f64, lambda: f64, kappa: f64, eta: f64 },
}

pub fn viscous_flux(
    coeffs: &ViscousCoefficients,
    u: &StateVec,
    g: &StateGrad,
    gas: &GasModel,
) -> Result<FluxTensor> {
    let mut f = [[0.0; 2]; NCOMP];
    match *coeffs {
        ViscousCoefficients::None => {}
        ViscousCoefficients::Monolithic { eps } | ViscousCoefficients::MonolithicNoMass { eps } => {
            let first = if matches!(coeffs, ViscousCoefficients::MonolithicNoMass { .. }) { 1 } else { 0 };
            for c in first..NCOMP {
                f[c] = [eps * g[c][0], eps * g[c][1]];
            }
        }
        ViscousCoefficients::Resistive { mu, lambda, kappa, eta } => {
            let (_, vel, _) = admissible(u, gas)?;
            let pg = primitive_gradients(u, g, gas)?;
            let du = pg.du;
            let div_u = du[0][0] + du[1][1];
            let mut tau = [[0.0; 2]; 2];
            let mut w = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    tau[i][j] = mu * (du[i][j] + du[j][i]) - lambda * div_u * delta;
                    w[i][j] = g[BX + i][j] - g[BX + j][i];
                }
            }
            let b = [u[BX], u[BY]];
            for j in 0..2 {
                f[MX][j] = tau[0][j];
                f[MY][j] = tau[1][j];
                f[EN][j] = vel[0] * tau[0][j]
                    + vel[1] * tau[1][j]
                    + kappa * pg.dt[j]
                    + eta * (b[0] * w[0][j] + b[1] * w[1][j]);
                f[BX][j] = eta * w[0][j];
                f[BY][j] = eta * w[1][j];
            }
        }
    }
    Ok(f)
}

/// Nodal viscosity fields selecting the regularizing flux.
#[derive(Debug, Clone, PartialEq)]
pub enum ViscousFluxChoice {
    None,
    Monolithic { eps: Vec<f64> },
    MonolithicNoMass { eps: Vec<f64> },
    Resistive { mu: Vec<f64>, lambda: Vec<f64>, kappa: Vec<f64>, eta: Vec<f64> },
}

impl ViscousFluxChoice {
    fn coefficients_at(&self, dofs: &[usize], phi: &[f64]) -> ViscousCoefficients {
        let interp = |field: &[f64]| dofs.iter().zip(phi).map(|(&d, &p)| field[d] * p).sum::<f64>();
        match self {
            ViscousFluxChoice::None => ViscousCoefficients::None,
            ViscousFluxChoice::Monolithic { eps } => ViscousCoefficients::Monolithic { eps: interp(eps) },
            ViscousFluxChoice::MonolithicNoMass { eps } => ViscousCoefficients::MonolithicNoMass { eps: interp(eps) },
            ViscousFluxChoice::Resistive { mu, lambda, kappa, eta } => ViscousCoefficients::Resistive {
                mu: interp(mu),
                lambda: interp(lambda),
                kappa: interp(kappa),
                eta: interp(eta),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InviscidForm {
    /// Inviscid flux integrated by parts against test-function gradients.
    Weak,
    /// Pointwise flux divergence tested against the basis functions.
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassTreatment {
    Lumped,
    Consistent,
}

/// Everything needed to evaluate `dU/dt` apart from the state and viscosity.
#[derive(Debug, Clone)]
pub struct SemiDiscrete<'a> {
    pub space: &'a FeSpace,
    pub mass: &'a MassOperators,
    pub gas: GasModel,
    pub form: InviscidForm,
    pub mass_treatment: MassTreatment,
    pub constraints: &'a Constraints,
}

/// Conserved values and gradients at a quadrature point.
pub fn state_at(ctx: &crate::fespace::QpContext, u: &[f64], n: usize) -> (StateVec, StateGrad) {
    let mut val = [0.0; NCOMP];
    let mut grad = [[0.0; 2]; NCOMP];
    for (i, &d) in ctx.dofs.iter().enumerate() {
        let (p, gr) = (ctx.phi[i], ctx.grad[i]);
        for c in 0..NCOMP {
            let x = u[c * n + d];
            val[c] += p * x;
            grad[c][0] += gr[0] * x;
            grad[c][1] += gr[1] * x;
        }
    }
    (val, grad)
}

impl SemiDiscrete<'_> {
    /// Unscaled residual `r_i = (F - F_V, grad phi_i)` (weak) or
    /// `-(div F, phi_i) - (F_V, grad phi_i)` (strong), before inverting the mass.
    pub fn residual(&self, u: &[f64], visc: &ViscousFluxChoice) -> Result<Vec<f64>> {
        let n = self.space.n_dofs();
        let mut r = vec![0.0; NCOMP * n];
        let mut failure: Option<MhdError> = None;
        self.space.quad_loop(|ctx| {
            if failure.is_some() {
                return;
            }
            let (val, grad) = state_at(ctx, u, n);
            let coeffs = visc.coefficients_at(ctx.dofs, ctx.phi);
            let fv = match viscous_flux(&coeffs, &val, &grad, &self.gas) {
                Ok(f) => f,
                Err(e) => {
                    failure = Some(e.at(format!("cell {} at ({:.6}, {:.6})", ctx.cell, ctx.x[0], ctx.x[1])));
                    return;
                }
            };
            match self.form {
                InviscidForm::Weak => {
                    let f = match inviscid_flux(&val, &self.gas) {
                        Ok(f) => f.total(),
                        Err(e) => {
                            failure = Some(e.at(format!("cell {} at ({:.6}, {:.6})", ctx.cell, ctx.x[0], ctx.x[1])));
                            return;
                        }
                    };
                    for (i, &d) in ctx.dofs.iter().enumerate() {
                        let gr = ctx.grad[i];
                        for c in 0..NCOMP {
                            let a = (f[c][0] - fv[c][0]) * gr[0] + (f[c][1] - fv[c][1]) * gr[1];
                            r[c * n + d] += ctx.jxw * a;
                        }
                    }
                }
                InviscidForm::Strong => {
                    let div = match flux_divergence(&val, &grad, &self.gas) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e.at(format!("cell {} at ({:.6}, {:.6})", ctx.cell, ctx.x[0], ctx.x[1])));
                            return;
                        }
                    };
                    for (i, &d) in ctx.dofs.iter().enumerate() {
                        let gr = ctx.grad[i];
                        let ph = ctx.phi[i];
                        for c in 0..NCOMP {
                            let a = -div[c] * ph - fv[c][0] * gr[0] - fv[c][1] * gr[1];
                            r[c * n + d] += ctx.jxw * a;
                        }
                    }
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }

    /// Applies the inverse mass matrix component by component.
    pub fn apply_inverse_mass(&self, r: &mut [f64]) -> Result<()> {
        let n = self.space.n_dofs();
        match self.mass_treatment {
            MassTreatment::Lumped => {
                for c in 0..NCOMP {
                    for (x, m) in r[c * n..(c + 1) * n].iter_mut().zip(&self.mass.lumped) {
                        *x /= m;
                    }
                }
            }
            MassTreatment::Consistent => {
                let diag = self.mass.consistent.diagonal();
                for c in 0..NCOMP {
                    let b = r[c * n..(c + 1) * n].to_vec();
                    let mut x: Vec<f64> = b.iter().zip(&diag).map(|(b, d)| b / d).collect();
                    cg_csr(&self.mass.consistent, &b, &mut x, CgOptions::default())?;
                    r[c * n..(c + 1) * n].copy_from_slice(&x);
                }
            }
        }
        Ok(())
    }

    /// Time derivative of the nodal state; constrained DOFs get zero.
    pub fn rhs(&self, u: &[f64], visc: &ViscousFluxChoice) -> Result<Vec<f64>> {
        let mut r = self.residual(u, visc)?;
        self.apply_inverse_mass(&mut r)?;
        self.constraints.zero(&mut r, self.space.n_dofs());
        Ok(r)
    }
}

pub fn semidiscrete_rhs(sd: &SemiDiscrete, u: &[f64], visc: &ViscousFluxChoice) -> Result<Vec<f64>> {
    sd.rhs(u, visc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::conserved_from_primitive;
    use approx::assert_relative_eq;

    fn gas() -> GasModel {
        GasModel::with_gamma(5.0 / 3.0).unwrap()
    }

    fn sample() -> StateVec {
        conserved_from_primitive(1.3, [0.4, -0.7], 0.9, [0.6, -1.1], &gas()).unwrap().to_array()
    }

    #[test]
    fn maxwell_stress_values() {
        assert_eq!(maxwell_stress([0.0, 0.0]), [[0.0; 2]; 2]);
        assert_eq!(maxwell_stress([1.0, 0.0]), [[0.5, 0.0], [0.0, -0.5]]);
        let m = maxwell_stress([0.3, -2.0]);
        assert!((m[0][0] + m[1][1]).abs() < 1e-15);
        assert_eq!(m[0][1], m[1][0]);
    }

    #[test]
    fn brio_wu_left_flux() {
        let g = GasModel::with_gamma(2.0).unwrap();
        let u = conserved_from_primitive(1.0, [0.0, 0.0], 1.0, [0.75, 1.0], &g).unwrap().to_array();
        let f = inviscid_flux(&u, &g).unwrap().total();
        assert_eq!(f[RHO], [0.0, 0.0]);
        assert_relative_eq!(f[MX][0], 1.21875, max_relative = 1e-15);
        assert_eq!(f[EN], [0.0, 0.0]);
        assert_eq!(f[BX], [0.0, 0.0]);
        assert_eq!(f[BY], [0.0, 0.0]);
    }

    #[test]
    fn zero_field_is_euler() {
        let g = gas();
        let u = conserved_from_primitive(0.8, [1.0, 2.0], 0.5, [0.0, 0.0], &g).unwrap().to_array();
        let f = inviscid_flux(&u, &g).unwrap();
        assert_eq!(f.magnetic, [[0.0; 2]; NCOMP]);
        assert_relative_eq!(f.euler[MX][0], 0.8 + 0.5, max_relative = 1e-15);
    }

    #[test]
    fn divergence_matches_difference_quotients() {
        // U(x, y) = U0 + x a + y b is linear, so div F(U) = dF/dx + dF/dy exactly
        let g = gas();
        let u0 = sample();
        let a = [0.1, -0.3, 0.2, 0.4, 0.05, -0.2];
        let b = [-0.2, 0.1, 0.3, -0.1, 0.15, 0.1];
        let mut grad = [[0.0; 2]; NCOMP];
        for c in 0..NCOMP {
            grad[c] = [a[c], b[c]];
        }
        let div = flux_divergence(&u0, &grad, &g).unwrap();
        let h = 1e-6;
        let shift = |dx: f64, dy: f64| {
            let mut v = u0;
            for c in 0..NCOMP {
                v[c] += dx * a[c] + dy * b[c];
            }
            inviscid_flux(&v, &g).unwrap().total()
        };
        let (fxp, fxm, fyp, fym) = (shift(h, 0.0), shift(-h, 0.0), shift(0.0, h), shift(0.0, -h));
        for c in 0..NCOMP {
            let fd = (fxp[c][0] - fxm[c][0]) / (2.0 * h) + (fyp[c][1] - fym[c][1]) / (2.0 * h);
            assert!((div[c] - fd).abs() < 1e-7 * (1.0 + fd.abs()), "component {c}: {} vs {fd}", div[c]);
        }
    }

    #[test]
    fn viscous_zero_gradient() {
        let g = gas();
        let u = sample();
        let z = [[0.0; 2]; NCOMP];
        for c in [
            ViscousCoefficients::Monolithic { eps: 1.0 },
            ViscousCoefficients::MonolithicNoMass { eps: 1.0 },
            ViscousCoefficients::Resistive { mu: 1.0, lambda: 0.3, kappa: 1.0, eta: 1.0 },
        ] {
            assert_eq!(viscous_flux(&c, &u, &z, &g).unwrap(), [[0.0; 2]; NCOMP]);
        }
    }

    #[test]
    fn monolithic_mass_row() {
        let g = gas();
        let mut grad = [[0.0; 2]; NCOMP];
        grad[RHO] = [1.0, 0.0];
        let f = viscous_flux(&ViscousCoefficients::Monolithic { eps: 1.0 }, &sample(), &grad, &g).unwrap();
        assert_eq!(f[RHO], [1.0, 0.0]);
        let f = viscous_flux(&ViscousCoefficients::MonolithicNoMass { eps: 1.0 }, &sample(), &grad, &g).unwrap();
        assert_eq!(f[RHO], [0.0, 0.0]);
    }

    // Gradient of U when only rho varies while u, p and B stay constant.
    fn contact_gradient(u: &StateVec, drho: [f64; 2]) -> StateGrad {
        let rho = u[RHO];
        let vel = [u[MX] / rho, u[MY] / rho];
        let v2 = vel[0] * vel[0] + vel[1] * vel[1];
        let mut g = [[0.0; 2]; NCOMP];
        g[RHO] = drho;
        g[MX] = [vel[0] * drho[0], vel[0] * drho[1]];
        g[MY] = [vel[1] * drho[0], vel[1] * drho[1]];
        g[EN] = [0.5 * v2 * drho[0], 0.5 * v2 * drho[1]];
        g
    }

    #[test]
    fn resistive_contact_heat_flux() {
        let g = gas();
        let u = sample();
        let grad = contact_gradient(&u, [0.7, -0.2]);
        let k0 = ViscousCoefficients::Resistive { mu: 1.0, lambda: 0.0, kappa: 0.0, eta: 1.0 };
        let f = viscous_flux(&k0, &u, &grad, &g).unwrap();
        for row in f {
            assert!(row[0].abs() < 1e-14 && row[1].abs() < 1e-14);
        }
        let k1 = ViscousCoefficients::Resistive { mu: 1.0, lambda: 0.0, kappa: 1.0, eta: 1.0 };
        let f = viscous_flux(&k1, &u, &grad, &g).unwrap();
        // kappa grad T = -kappa p rho^-2 grad rho
        let p = 0.9;
        assert_relative_eq!(f[EN][0], -p / (1.3 * 1.3) * 0.7, max_relative = 1e-12);
    }

    #[test]
    fn primitive_gradient_chain_rule() {
        let g = gas();
        let u = sample();
        let a = [0.1, -0.3, 0.2, 0.4, 0.05, -0.2];
        let mut grad = [[0.0; 2]; NCOMP];
        for c in 0..NCOMP {
            grad[c] = [a[c], 0.0];
        }
        let pg = primitive_gradients(&u, &grad, &g).unwrap();
        let h = 1e-6;
        let prim = |s: f64| {
            let mut v = u;
            for c in 0..NCOMP {
                v[c] += s * a[c];
            }
            crate::thermo::primitive_from_conserved(&ConservedState::from_array(&v), &g).unwrap()
        };
        let (pp, pm) = (prim(h), prim(-h));
        assert!((pg.dp[0] - (pp.p - pm.p) / (2.0 * h)).abs() < 1e-8);
        assert!((pg.dt[0] - (pp.temperature - pm.temperature) / (2.0 * h)).abs() < 1e-8);
        assert!((pg.du[1][0] - (pp.u[1] - pm.u[1]) / (2.0 * h)).abs() < 1e-8);
    }
}
