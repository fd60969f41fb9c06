//! Ideal-gas thermodynamics for the MHD state: conversions between conserved
//! and primitive variables, entropy functions, characteristic speeds, and
//! numerical checks of the entropy convexity structure.
//!
//! States always carry two-component momentum and magnetic field vectors, so
//! the conserved vector has six entries `(rho, m_x, m_y, E, B_x, B_y)` in both
//! the 1D ("1.5D") and 2D settings.

use nalgebra::{Matrix2, SMatrix, SymmetricEigen};

use crate::error::{MhdError, Result};

/// Number of conserved components.
pub const NCOMP: usize = 6;
pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const EN: usize = 3;
pub const BX: usize = 4;
pub const BY: usize = 5;

pub type StateVec = [f64; NCOMP];
pub type Matrix6 = SMatrix<f64, NCOMP, NCOMP>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
    pub c_v: f64,
}

impl GasModel {
    pub fn new(gamma: f64, c_v: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(MhdError::InvalidGas(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(c_v > 0.0) {
            return Err(MhdError::InvalidGas(format!("c_v must be positive, got {c_v}")));
        }
        Ok(GasModel { gamma, c_v })
    }

    /// Gas with unit specific heat at constant volume.
    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }

    pub fn c_p(&self) -> f64 {
        self.gamma * self.c_v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub m: [f64; 2],
    pub energy: f64,
    pub b: [f64; 2],
}

impl ConservedState {
    pub fn from_array(u: &StateVec) -> Self {
        ConservedState {
            rho: u[RHO],
            m: [u[MX], u[MY]],
            energy: u[EN],
            b: [u[BX], u[BY]],
        }
    }

    pub fn to_array(&self) -> StateVec {
        [self.rho, self.m[0], self.m[1], self.energy, self.b[0], self.b[1]]
    }

    /// Internal energy density `rho e = E - |m|^2/(2 rho) - |B|^2/2`.
    pub fn internal_energy(&self) -> f64 {
        let m2 = self.m[0] * self.m[0] + self.m[1] * self.m[1];
        let b2 = self.b[0] * self.b[0] + self.b[1] * self.b[1];
        self.energy - 0.5 * m2 / self.rho - 0.5 * b2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: [f64; 2],
    pub p: f64,
    /// `p / rho`.
    pub temperature: f64,
    /// Specific internal energy.
    pub e: f64,
    /// Specific entropy `c_v ln(p / rho^gamma)`.
    pub s: f64,
    pub b: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPairValue {
    /// Mathematical entropy `rho s / (gamma - 1)` with `c_v = 1`.
    pub entropy: f64,
    /// Entropy flux `u S`.
    pub flux: [f64; 2],
}

pub fn primitive_from_conserved(state: &ConservedState, gas: &GasModel) -> Result<PrimitiveState> {
    let rho = state.rho;
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    let rho_e = state.internal_energy();
    if !(rho_e > 0.0) {
        return Err(MhdError::NonpositiveInternalEnergy { rho, rho_e });
    }
    let u = [state.m[0] / rho, state.m[1] / rho];
    let e = rho_e / rho;
    let p = (gas.gamma - 1.0) * rho_e;
    Ok(PrimitiveState {
        rho,
        u,
        p,
        temperature: p / rho,
        e,
        s: gas.c_v * (p / rho.powf(gas.gamma)).ln(),
        b: state.b,
    })
}

pub fn conserved_from_primitive(
    rho: f64,
    u: [f64; 2],
    p: f64,
    b: [f64; 2],
    gas: &GasModel,
) -> Result<ConservedState> {
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    let u2 = u[0] * u[0] + u[1] * u[1];
    let b2 = b[0] * b[0] + b[1] * b[1];
    Ok(ConservedState {
        rho,
        m: [rho * u[0], rho * u[1]],
        energy: p / (gas.gamma - 1.0) + 0.5 * rho * u2 + 0.5 * b2,
        b,
    })
}

pub fn specific_entropy(rho: f64, p: f64, gas: &GasModel) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    if !(p > 0.0) {
        return Err(MhdError::NonpositivePressure { p });
    }
    Ok(gas.c_v * (p / rho.powf(gas.gamma)).ln())
}

/// Entropy `S = rho ln(p/rho^gamma)/(gamma-1)` and its flux. Uses `c_v = 1`
/// regardless of the gas model's heat capacity.
pub fn entropy_pair(state: &ConservedState, gas: &GasModel) -> Result<EntropyPairValue> {
    let prim = primitive_from_conserved(state, gas)?;
    let s = (prim.p / prim.rho.powf(gas.gamma)).ln();
    let entropy = prim.rho * s / (gas.gamma - 1.0);
    Ok(EntropyPairValue {
        entropy,
        flux: [prim.u[0] * entropy, prim.u[1] * entropy],
    })
}

/// Fast magnetosonic speed in direction `n` (unit vector).
pub fn fast_speed(rho: f64, p: f64, b: [f64; 2], n: [f64; 2], gas: &GasModel) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    if !(p > 0.0) {
        return Err(MhdError::NonpositivePressure { p });
    }
    let a2 = gas.gamma * p / rho;
    let b2 = (b[0] * b[0] + b[1] * b[1]) / rho;
    let bn = b[0] * n[0] + b[1] * n[1];
    let bn2 = bn * bn / rho;
    let sum = a2 + b2;
    let disc = (sum * sum - 4.0 * a2 * bn2).max(0.0);
    Ok((0.5 * (sum + disc.sqrt())).sqrt())
}

/// Largest characteristic speed magnitude `|u.n| + c_f(n)`.
pub fn max_wave_speed(state: &ConservedState, n: [f64; 2], gas: &GasModel) -> Result<f64> {
    let rho = state.rho;
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    let p = (gas.gamma - 1.0) * state.internal_energy();
    let cf = fast_speed(rho, p, state.b, n, gas)?;
    let un = (state.m[0] * n[0] + state.m[1] * n[1]) / rho;
    Ok(un.abs() + cf)
}

/// Maximum of [`max_wave_speed`] over the coordinate directions of a
/// `dim`-dimensional problem.
pub fn max_coordinate_wave_speed(state: &ConservedState, dim: usize, gas: &GasModel) -> Result<f64> {
    let mut best = max_wave_speed(state, [1.0, 0.0], gas)?;
    if dim > 1 {
        best = best.max(max_wave_speed(state, [0.0, 1.0], gas)?);
    }
    Ok(best)
}

/// Partial derivatives of the ideal-gas specific entropy `s(rho, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDerivatives {
    pub s: f64,
    pub s_rho: f64,
    pub s_e: f64,
    pub s_rho_rho: f64,
    pub s_rho_e: f64,
    pub s_e_e: f64,
}

/// `s = c_v ln((gamma-1) e rho^(1-gamma))`, differentiated symbolically.
pub fn entropy_derivatives(rho: f64, e: f64, gas: &GasModel) -> Result<EntropyDerivatives> {
    if !(rho > 0.0) {
        return Err(MhdError::NonpositiveDensity { rho });
    }
    if !(e > 0.0) {
        return Err(MhdError::NonpositiveInternalEnergy { rho, rho_e: rho * e });
    }
    let g = gas.gamma;
    let cv = gas.c_v;
    Ok(EntropyDerivatives {
        s: cv * ((g - 1.0) * e * rho.powf(1.0 - g)).ln(),
        s_rho: cv * (1.0 - g) / rho,
        s_e: cv / e,
        s_rho_rho: cv * (g - 1.0) / (rho * rho),
        s_rho_e: 0.0,
        s_e_e: -cv / (e * e),
    })
}

/// The 2x2 coefficient matrix of the quadratic form `J_1(grad rho, grad e)`
/// produced by the monolithic regularization in the specific-entropy equation.
pub fn j1_matrix(rho: f64, e: f64, gas: &GasModel, epsilon: f64) -> Result<Matrix2<f64>> {
    let d = entropy_derivatives(rho, e, gas)?;
    // rho^-1 d/drho (rho^2 s_rho) = 2 s_rho + rho s_rho_rho
    let a = epsilon * (2.0 * d.s_rho + rho * d.s_rho_rho);
    let b = epsilon * rho * d.s_rho_e;
    let c = epsilon * rho * d.s_e_e;
    Ok(Matrix2::new(a, b, b, c))
}

/// Scalar function `f` defining the generalized entropy `rho f(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyFunction {
    /// `a s + b`
    Linear { a: f64, b: f64 },
    /// `tanh(a s + b)`
    Tanh { a: f64, b: f64 },
    /// `exp(k s)`
    Exp { k: f64 },
    /// `-exp(-k s)`
    NegExp { k: f64 },
    Constant { c: f64 },
}

impl EntropyFunction {
    /// Returns `(f, f', f'')` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            EntropyFunction::Linear { a, b } => (a * s + b, a, 0.0),
            EntropyFunction::Tanh { a, b } => {
                let t = (a * s + b).tanh();
                let sech2 = 1.0 - t * t;
                (t, a * sech2, -2.0 * a * a * t * sech2)
            }
            EntropyFunction::Exp { k } => {
                let v = (k * s).exp();
                (v, k * v, k * k * v)
            }
            EntropyFunction::NegExp { k } => {
                let v = (-k * s).exp();
                (-v, k * v, -k * k * v)
            }
            EntropyFunction::Constant { c } => (c, 0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    /// `f'(s) > 0`
    pub cond1: bool,
    /// `f'(s)/c_p - f''(s) > 0`
    pub cond2: bool,
    pub hessian_pd: bool,
    /// The two eigenvalues split off by the congruence transform, `f' rho s_e`
    /// and `f' s_e`.
    pub detached: [f64; 2],
    /// Remaining 2x2 block in the (rho, E) directions.
    pub reduced: Matrix2<f64>,
    /// Smallest eigenvalue of the transformed Hessian.
    pub min_eigenvalue: f64,
}

/// Congruence transform `P` mapping the Hessian of `-rho f(s)` to block form.
pub fn congruence_matrix(prim: &PrimitiveState) -> Matrix6 {
    let [u1, u2] = prim.u;
    let rho = prim.rho;
    let mut p = Matrix6::zeros();
    p[(RHO, RHO)] = 1.0;
    p[(RHO, MX)] = u1;
    p[(RHO, MY)] = u2;
    p[(RHO, EN)] = 0.5 * (u1 * u1 + u2 * u2) + prim.e;
    p[(MX, MX)] = rho;
    p[(MY, MY)] = rho;
    p[(MX, EN)] = rho * u1;
    p[(MY, EN)] = rho * u2;
    p[(EN, EN)] = rho;
    p[(BX, EN)] = prim.b[0];
    p[(BY, EN)] = prim.b[1];
    p[(BX, BX)] = 1.0;
    p[(BY, BY)] = 1.0;
    p
}

/// `P S_UU P^T` for `S = -rho f(s)`.
pub fn transformed_entropy_hessian(prim: &PrimitiveState, gas: &GasModel, f: &EntropyFunction) -> Result<Matrix6> {
    let d = entropy_derivatives(prim.rho, prim.e, gas)?;
    let (_, f1, f2) = f.eval(d.s);
    let rho = prim.rho;
    let mut h = Matrix6::zeros();
    h[(RHO, RHO)] = 2.0 * d.s_rho + rho * d.s_rho_rho;
    h[(RHO, EN)] = rho * d.s_rho_e;
    h[(EN, RHO)] = rho * d.s_rho_e;
    h[(EN, EN)] = rho * d.s_e_e;
    h[(MX, MX)] = -rho * d.s_e;
    h[(MY, MY)] = -rho * d.s_e;
    h[(BX, BX)] = -d.s_e;
    h[(BY, BY)] = -d.s_e;
    let mut v = SMatrix::<f64, NCOMP, 1>::zeros();
    v[RHO] = d.s_rho;
    v[EN] = d.s_e;
    Ok(-f1 * h - (f2 * rho) * v * v.transpose())
}

/// Hessian of `-rho f(s)` with respect to the conserved variables, recovered
/// from the block form through the inverse congruence.
pub fn entropy_hessian(state: &ConservedState, gas: &GasModel, f: &EntropyFunction) -> Result<Matrix6> {
    let prim = primitive_from_conserved(state, gas)?;
    let t = transformed_entropy_hessian(&prim, gas, f)?;
    let p = congruence_matrix(&prim);
    let pinv = p
        .try_inverse()
        .ok_or_else(|| MhdError::SolverFailure("singular congruence matrix".into()))?;
    Ok(pinv * t * pinv.transpose())
}

pub fn generalized_entropy_convexity_check(
    state: &ConservedState,
    gas: &GasModel,
    f: &EntropyFunction,
) -> Result<ConvexityReport> {
    let prim = primitive_from_conserved(state, gas)?;
    let d = entropy_derivatives(prim.rho, prim.e, gas)?;
    let (_, f1, f2) = f.eval(d.s);
    let t = transformed_entropy_hessian(&prim, gas, f)?;
    let reduced = Matrix2::new(t[(RHO, RHO)], t[(RHO, EN)], t[(EN, RHO)], t[(EN, EN)]);
    let eig = SymmetricEigen::new(t).eigenvalues;
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport {
        cond1: f1 > 0.0,
        cond2: f1 / gas.c_p() - f2 > 0.0,
        hessian_pd: t.cholesky().is_some(),
        detached: [f1 * prim.rho * d.s_e, f1 * d.s_e],
        reduced,
        min_eigenvalue,
    })
}
