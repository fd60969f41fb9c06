//! Benchmark registry: initial data, boundary treatment, final times and
//! reference solutions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{MhdError, Result};
use crate::fespace::FeSpace;
use crate::thermo::{conserved_from_primitive, GasModel, StateVec, NCOMP};

/// Primitive data `(rho, u, p, B)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 2],
    pub p: f64,
    pub b: [f64; 2],
}

impl Primitive {
    pub const fn new(rho: f64, u: [f64; 2], p: f64, b: [f64; 2]) -> Self {
        Primitive { rho, u, p, b }
    }

    /// Conserved vector; fails on nonpositive density or pressure.
    pub fn to_conserved(&self, gas: &GasModel) -> Result<StateVec> {
        if !(self.p > 0.0) {
            return Err(MhdError::NonpositivePressure { p: self.p });
        }
        Ok(conserved_from_primitive(self.rho, self.u, self.p, self.b, gas)?.to_array())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Boundary nodes keep their initial values.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub rho0: f64,
    pub u0: [f64; 2],
    pub p0: f64,
    pub b0: [f64; 2],
    pub mu: f64,
}

/// The background field defaults to zero: with `b0 != 0` the translating
/// vortex is not an exact solution of the induction equation (the residual
/// is `u_theta (r_hat . b0)`), so errors against it stop converging. Set
/// `b0x`, `b0y` to recover the uniform field.
impl Default for VortexParams {
    fn default() -> Self {
        VortexParams { rho0: 1.0, u0: [1.0, 1.0], p0: 1.0, b0: [0.0, 0.0], mu: 5.389489439 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Left state on `x <= x0`, right state otherwise.
    Riemann { left: Primitive, right: Primitive, x0: f64 },
    Vortex(VortexParams),
    OrszagTang,
    Rotor { r0: f64, r1: f64, p0: f64, b0: [f64; 2] },
    Blast { radius: f64, p_in: f64, p_out: f64, rho0: f64, b0: [f64; 2] },
}

impl InitialCondition {
    pub fn eval(&self, x: [f64; 2]) -> Primitive {
        match self {
            InitialCondition::Riemann { left, right, x0 } => {
                if x[0] <= *x0 {
                    *left
                } else {
                    *right
                }
            }
            InitialCondition::Vortex(p) => vortex_exact(x[0], x[1], 0.0, p),
            InitialCondition::OrszagTang => {
                let s4 = (4.0 * PI).sqrt();
                let sy = (2.0 * PI * x[1]).sin();
                Primitive::new(
                    25.0 / (36.0 * PI),
                    [-sy, (2.0 * PI * x[0]).sin()],
                    5.0 / (12.0 * PI),
                    [-sy / s4, (4.0 * PI * x[0]).sin() / s4],
                )
            }
            InitialCondition::Rotor { r0, r1, p0, b0 } => {
                let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
                let r = (dx * dx + dy * dy).sqrt();
                let (rho, u) = if r < *r0 {
                    (10.0, [-2.0 / r0 * dy, 2.0 / r0 * dx])
                } else if r < *r1 {
                    let f = (r1 - r) / (r1 - r0);
                    (1.0 + 9.0 * f, [-f * 2.0 / r * dy, f * 2.0 / r * dx])
                } else {
                    (1.0, [0.0, 0.0])
                };
                Primitive::new(rho, u, *p0, *b0)
            }
            InitialCondition::Blast { radius, p_in, p_out, rho0, b0 } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let p = if r < *radius { *p_in } else { *p_out };
                Primitive::new(*rho0, [0.0, 0.0], p, *b0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Exact translating vortex.
    Vortex(VortexParams),
    /// Locations of the discontinuities at the final time.
    Discontinuities(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub id: String,
    pub dim: usize,
    /// `[[x_min, x_max], [y_min, y_max]]`; the y range is `[0, 0]` in 1D.
    pub bounds: [[f64; 2]; 2],
    pub gas: GasModel,
    pub boundary: [Boundary; 2],
    pub t_final: f64,
    pub cleaning: bool,
    pub ic: InitialCondition,
    pub reference: Option<Reference>,
}

impl ProblemSpec {
    pub fn periodic(&self) -> [bool; 2] {
        [self.boundary[0] == Boundary::Periodic, self.boundary[1] == Boundary::Periodic]
    }

    /// Nodal interpolant of the initial data in component-major layout.
    pub fn initial_state(&self, space: &FeSpace) -> Result<Vec<f64>> {
        let n = space.n_dofs();
        let mut u = vec![0.0; NCOMP * n];
        for (i, x) in space.dof_coords.iter().enumerate() {
            let s = self
                .ic
                .eval(*x)
                .to_conserved(&self.gas)
                .map_err(|e| MhdError::InadmissibleIc { x: x[0], y: x[1], source: Box::new(e) })?;
            for c in 0..NCOMP {
                u[c * n + i] = s[c];
            }
        }
        Ok(u)
    }

    /// Checks `rho > 0` and `rho e > 0` of the initial data at every
    /// quadrature point of `space` and reports the first failure.
    pub fn validate_ic(&self, space: &FeSpace) -> Result<()> {
        let mut failure = None;
        space.quad_loop(|ctx| {
            if failure.is_some() {
                return;
            }
            if let Err(e) = self.ic.eval(ctx.x).to_conserved(&self.gas) {
                failure = Some(MhdError::InadmissibleIc { x: ctx.x[0], y: ctx.x[1], source: Box::new(e) });
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

pub const PROBLEM_IDS: [&str; 9] = [
    "brio_wu",
    "contact",
    "fast_rarefaction",
    "intermediate_shock",
    "slow_shock",
    "vortex",
    "orszag_tang",
    "rotor",
    "blast",
];

pub const WAVE_NAMES: [&str; 4] = ["contact", "fast_rarefaction", "intermediate_shock", "slow_shock"];

/// Left and right states of one single-wave Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveStates {
    pub left: Primitive,
    pub right: Primitive,
    pub x0: f64,
}

const BX0: f64 = 0.75;

pub fn single_wave_ic(name: &str) -> Result<WaveStates> {
    let p = |rho, ux, uy, pr, by| Primitive::new(rho, [ux, uy], pr, [BX0, by]);
    let (left, right) = match name {
        "contact" => {
            let l = p(0.7156521382, 0.5915470932, -1.5792628803, 0.5122334291, -0.5349102426);
            (l, Primitive { rho: 0.2348529760, ..l })
        }
        "fast_rarefaction" => (
            p(1.0, 0.0, 0.0, 1.0, 1.0),
            p(0.6799272943, 0.6288155014, -0.2295748706, 0.4623011255, 0.5900487481),
        ),
        "intermediate_shock" => (
            p(0.6799272943, 0.6288155014, -0.2295748706, 0.4623011255, 0.5900487481),
            p(0.2348529760, 0.5915470935, -1.5792628801, 0.5122334291, -0.5349102425),
        ),
        "slow_shock" => (
            p(0.2348529760, 0.5915470930, -1.5792628803, 0.5122334291, -0.5349102426),
            p(0.1168051318, -0.2455906431, -0.1711653489, 0.0873180084, -0.9001418247),
        ),
        other => return Err(MhdError::UnknownWave(other.to_string())),
    };
    Ok(WaveStates { left, right, x0: 0.5 })
}

/// Speed of a discontinuity from the mass jump condition.
pub fn mass_jump_speed(left: &Primitive, right: &Primitive) -> f64 {
    (right.rho * right.u[0] - left.rho * left.u[0]) / (right.rho - left.rho)
}

/// Discontinuity positions of the Brio-Wu solution at time `t`: the
/// intermediate shock, the contact and the slow shock, all started at `x = 0.5`.
///
/// The tabulated right state of the intermediate shock carries the density of
/// the contact's right state; the contact's left density is used instead.
pub fn brio_wu_discontinuities(t: f64) -> Vec<f64> {
    let contact = single_wave_ic("contact").expect("known wave");
    let inter = single_wave_ic("intermediate_shock").expect("known wave");
    let slow = single_wave_ic("slow_shock").expect("known wave");
    let inter_right = Primitive { rho: contact.left.rho, ..inter.right };
    vec![
        0.5 + t * mass_jump_speed(&inter.left, &inter_right),
        0.5 + t * contact.left.u[0],
        0.5 + t * mass_jump_speed(&slow.left, &slow.right),
    ]
}

/// `(rho0, u0 + du, p0 + dp, B0 + dB)` with `(r1, r2) = (x, y) - u0 t`.
pub fn vortex_exact(x: f64, y: f64, t: f64, params: &VortexParams) -> Primitive {
    let r1 = x - params.u0[0] * t;
    let r2 = y - params.u0[1] * t;
    let r2sq = r1 * r1 + r2 * r2;
    let mu = params.mu;
    let g = ((1.0 - r2sq) / 2.0).exp();
    let du = mu / (PI * 2f64.sqrt()) * g;
    let db = mu * g / (2.0 * PI);
    let dp = -mu * mu * (1.0 + r2sq) * (1.0 - r2sq).exp() / (8.0 * PI * PI);
    Primitive::new(
        params.rho0,
        [params.u0[0] - du * r2, params.u0[1] + du * r1],
        params.p0 + dp,
        [params.b0[0] - db * r2, params.b0[1] + db * r1],
    )
}

/// Numeric parameter overrides keyed by name.
pub type Overrides = BTreeMap<String, f64>;

fn take(ov: &mut Overrides, key: &str, default: f64) -> f64 {
    ov.remove(key).unwrap_or(default)
}

/// Builds a registered problem. Recognized overrides: `gamma`, `t_final`,
/// `x0` (1D jump), `p0`, `b0x`, `b0y`, `mu` (vortex), `r0`, `r1` (rotor),
/// `radius`, `p_in`, `p_out` (blast).
pub fn make_problem(id: &str, overrides: &Overrides) -> Result<ProblemSpec> {
    let mut ov = overrides.clone();
    let one_d = [[0.0, 1.0], [0.0, 0.0]];
    let unit = [[0.0, 1.0], [0.0, 1.0]];
    let frozen = [Boundary::Frozen, Boundary::Periodic];
    let periodic = [Boundary::Periodic, Boundary::Periodic];
    let s4 = (4.0 * PI).sqrt();
    let spec = match id {
        "brio_wu" | "contact" | "fast_rarefaction" | "intermediate_shock" | "slow_shock" => {
            let (left, right) = if id == "brio_wu" {
                (
                    Primitive::new(1.0, [0.0, 0.0], 1.0, [BX0, 1.0]),
                    Primitive::new(0.125, [0.0, 0.0], 0.1, [BX0, -1.0]),
                )
            } else {
                let w = single_wave_ic(id)?;
                (w.left, w.right)
            };
            let x0 = take(&mut ov, "x0", 0.5);
            let t_final = take(&mut ov, "t_final", 0.1);
            let reference = (id == "brio_wu" && x0 == 0.5).then(|| Reference::Discontinuities(brio_wu_discontinuities(t_final)));
            ProblemSpec {
                id: id.into(),
                dim: 1,
                bounds: one_d,
                gas: GasModel::with_gamma(take(&mut ov, "gamma", 2.0))?,
                boundary: frozen,
                t_final,
                cleaning: false,
                ic: InitialCondition::Riemann { left, right, x0 },
                reference,
            }
        }
        "vortex" => {
            let d = VortexParams::default();
            let params = VortexParams {
                p0: take(&mut ov, "p0", d.p0),
                b0: [take(&mut ov, "b0x", d.b0[0]), take(&mut ov, "b0y", d.b0[1])],
                mu: take(&mut ov, "mu", d.mu),
                ..d
            };
            ProblemSpec {
                id: id.into(),
                dim: 2,
                bounds: [[-10.0, 10.0], [-10.0, 10.0]],
                gas: GasModel::with_gamma(take(&mut ov, "gamma", 5.0 / 3.0))?,
                boundary: periodic,
                t_final: take(&mut ov, "t_final", 0.05),
                cleaning: false,
                ic: InitialCondition::Vortex(params),
                reference: Some(Reference::Vortex(params)),
            }
        }
        "orszag_tang" => ProblemSpec {
            id: id.into(),
            dim: 2,
            bounds: unit,
            gas: GasModel::with_gamma(take(&mut ov, "gamma", 5.0 / 3.0))?,
            boundary: periodic,
            t_final: take(&mut ov, "t_final", 0.5),
            cleaning: true,
            ic: InitialCondition::OrszagTang,
            reference: None,
        },
        "rotor" => ProblemSpec {
            id: id.into(),
            dim: 2,
            bounds: unit,
            gas: GasModel::with_gamma(take(&mut ov, "gamma", 1.4))?,
            boundary: periodic,
            t_final: take(&mut ov, "t_final", 0.15),
            cleaning: true,
            ic: InitialCondition::Rotor {
                r0: take(&mut ov, "r0", 0.1),
                r1: take(&mut ov, "r1", 0.115),
                p0: take(&mut ov, "p0", 1.0),
                b0: [take(&mut ov, "b0x", 5.0 / s4), take(&mut ov, "b0y", 0.0)],
            },
            reference: None,
        },
        "blast" => ProblemSpec {
            id: id.into(),
            dim: 2,
            bounds: [[-0.5, 0.5], [-0.5, 0.5]],
            gas: GasModel::with_gamma(take(&mut ov, "gamma", 1.4))?,
            boundary: periodic,
            t_final: take(&mut ov, "t_final", 0.01),
            cleaning: true,
            ic: InitialCondition::Blast {
                radius: take(&mut ov, "radius", 0.1),
                p_in: take(&mut ov, "p_in", 1000.0),
                p_out: take(&mut ov, "p_out", 0.1),
                rho0: 1.0,
                b0: [take(&mut ov, "b0x", 100.0 / s4), take(&mut ov, "b0y", 0.0)],
            },
            reference: None,
        },
        other => return Err(MhdError::UnknownProblem(other.to_string())),
    };
    if let Some(key) = ov.keys().next() {
        return Err(MhdError::Config(format!("problem '{id}' has no parameter '{key}'")));
    }
    if !(spec.t_final >= 0.0) {
        return Err(MhdError::Config(format!("negative final time {}", spec.t_final)));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{build_triangulated_rectangle, TrianglePattern};

    fn problem(id: &str) -> ProblemSpec {
        make_problem(id, &Overrides::new()).unwrap()
    }

    #[test]
    fn brio_wu_states() {
        let p = problem("brio_wu");
        assert_eq!(p.ic.eval([0.25, 0.0]), Primitive::new(1.0, [0.0, 0.0], 1.0, [0.75, 1.0]));
        assert_eq!(p.ic.eval([0.75, 0.0]), Primitive::new(0.125, [0.0, 0.0], 0.1, [0.75, -1.0]));
        assert_eq!(p.gas.gamma, 2.0);
    }

    #[test]
    fn orszag_tang_point() {
        let v = problem("orszag_tang").ic.eval([0.25, 0.0]);
        assert!(v.u[0].abs() < 1e-15 && (v.u[1] - 1.0).abs() < 1e-15);
        // sin(4 pi x) vanishes at x = 1/4
        assert!(v.b[0].abs() < 1e-15 && v.b[1].abs() < 1e-15);
        let w = problem("orszag_tang").ic.eval([0.125, 0.0]);
        assert!((w.b[1] - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rotor_taper_continuity() {
        let ic = problem("rotor").ic;
        for (r, rho) in [(0.1, 10.0), (0.115, 1.0)] {
            let inner = ic.eval([0.5 + r * (1.0 - 1e-13), 0.5]);
            let outer = ic.eval([0.5 + r, 0.5]);
            assert!((inner.rho - outer.rho).abs() < 1e-10);
            assert!((outer.rho - rho).abs() < 1e-12);
        }
        let at_r0 = ic.eval([0.6, 0.5]);
        assert!((at_r0.u[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wave_table() {
        let c = single_wave_ic("contact").unwrap();
        assert_eq!(c.left.rho, 0.7156521382);
        assert_eq!(c.right.rho, 0.2348529760);
        assert_eq!((c.left.u, c.left.p, c.left.b), (c.right.u, c.right.p, c.right.b));
        let s = single_wave_ic("slow_shock").unwrap();
        assert_eq!(
            [s.right.rho, s.right.u[0], s.right.u[1], s.right.p, s.right.b[1]],
            [0.1168051318, -0.2455906431, -0.1711653489, 0.0873180084, -0.9001418247]
        );
        let f = single_wave_ic("fast_rarefaction").unwrap();
        assert_eq!(f.left, problem("brio_wu").ic.eval([0.1, 0.0]));
        for w in WAVE_NAMES {
            let st = single_wave_ic(w).unwrap();
            assert_eq!((st.left.b[0], st.right.b[0]), (0.75, 0.75));
        }
        assert!(matches!(single_wave_ic("alfven"), Err(MhdError::UnknownWave(_))));
    }

    #[test]
    fn vortex_limits() {
        let p = VortexParams::default();
        let far = vortex_exact(1e3, -1e3, 0.0, &p);
        assert_eq!(far, Primitive::new(p.rho0, p.u0, p.p0, p.b0));
        let at1 = vortex_exact(1.0, 0.0, 0.0, &p);
        let db = ((at1.b[0] - p.b0[0]).powi(2) + (at1.b[1] - p.b0[1]).powi(2)).sqrt();
        assert!((db - p.mu / (2.0 * PI)).abs() < 1e-14);
        let a = vortex_exact(0.3, -0.7, 0.05, &p);
        let b = vortex_exact(0.3 - 0.05, -0.7 - 0.05, 0.0, &p);
        assert_eq!(a, b);
    }

    #[test]
    fn vortex_literal_pressure_is_inadmissible() {
        let mut ov = Overrides::new();
        ov.insert("p0".into(), 0.0);
        let spec = make_problem("vortex", &ov).unwrap();
        let m = build_triangulated_rectangle(8, 8, spec.bounds, TrianglePattern::Right).unwrap();
        let space = FeSpace::new(m, 1, spec.periodic()).unwrap();
        assert!(matches!(spec.validate_ic(&space), Err(MhdError::InadmissibleIc { .. })));
        let ok = problem("vortex");
        assert!(ok.validate_ic(&space).is_ok());
    }

    #[test]
    fn brio_wu_structure() {
        let x = brio_wu_discontinuities(0.1);
        assert!((x[1] - 0.55915470932).abs() < 1e-12);
        assert!((x[2] - 0.642).abs() < 1e-3);
        assert!(x[0] < x[1] && x[1] < x[2]);
    }

    #[test]
    fn unknown_ids_and_keys() {
        assert!(matches!(make_problem("kelvin", &Overrides::new()), Err(MhdError::UnknownProblem(_))));
        let mut ov = Overrides::new();
        ov.insert("r0".into(), 0.2);
        assert!(matches!(make_problem("blast", &ov), Err(MhdError::Config(_))));
    }
}
