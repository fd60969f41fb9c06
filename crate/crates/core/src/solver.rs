//! Time-marching driver tying together the space, fluxes, viscosity,
//! integrator and cleaning.

use crate::diagnostics::{min_entropy_monitor, MonitorRow};
use crate::divclean::{divergence_l2, CleanReport, DivergenceCleaner, EnergyUpdate};
use crate::error::{MhdError, Result};
use crate::fespace::mesh::{MARKER_LEFT, MARKER_RIGHT};
use crate::fespace::{build_interval_mesh, build_triangulated_rectangle, Constraints, FeSpace, MassOperators, TrianglePattern};
use crate::fluxes::{InviscidForm, MassTreatment, SemiDiscrete, ViscousFluxChoice};
use crate::problems::{Boundary, ProblemSpec};
use crate::thermo::{ConservedState, StateVec, BX, BY, NCOMP};
use crate::timeint::{compute_dt, step, SspScheme};
use crate::viscosity::{
    entropy_residual, entropy_viscosity, first_order_viscosity, high_order_viscosity, nodal_entropy, EntropyHistory,
    ViscosityModel,
};

/// Which regularizing flux the viscosity coefficient feeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxKind {
    Monolithic,
    MonolithicNoMass,
    /// Each physical coefficient is its factor times the viscosity coefficient.
    Resistive { mu_factor: f64, lambda_factor: f64, kappa_factor: f64, eta_factor: f64 },
}

impl FluxKind {
    pub fn name(&self) -> &'static str {
        match self {
            FluxKind::Monolithic => "monolithic",
            FluxKind::MonolithicNoMass => "monolithic_no_mass",
            FluxKind::Resistive { .. } => "resistive",
        }
    }

    /// Resistive flux with `mu = eta = eps`, `lambda = 0` and `kappa = kappa_factor eps`.
    pub fn resistive(kappa_factor: f64) -> Self {
        FluxKind::Resistive { mu_factor: 1.0, lambda_factor: 0.0, kappa_factor, eta_factor: 1.0 }
    }

    fn choice(&self, eps: Vec<f64>) -> ViscousFluxChoice {
        match *self {
            FluxKind::Monolithic => ViscousFluxChoice::Monolithic { eps },
            FluxKind::MonolithicNoMass => ViscousFluxChoice::MonolithicNoMass { eps },
            FluxKind::Resistive { mu_factor, lambda_factor, kappa_factor, eta_factor } => {
                let scaled = |f: f64| eps.iter().map(|e| f * e).collect();
                ViscousFluxChoice::Resistive {
                    mu: scaled(mu_factor),
                    lambda: scaled(lambda_factor),
                    kappa: scaled(kappa_factor),
                    eta: scaled(eta_factor),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub degree: usize,
    /// Cells per direction (`cells[1]` ignored in 1D).
    pub cells: [usize; 2],
    pub pattern: TrianglePattern,
    pub flux: FluxKind,
    pub viscosity: ViscosityModel,
    pub cfl: f64,
    pub mass: MassTreatment,
    pub form: InviscidForm,
    pub cleaning: bool,
    pub clean_energy: EnergyUpdate,
    /// Defaults to the scheme matching the degree.
    pub scheme: Option<SspScheme>,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            degree: 1,
            cells: [64, 64],
            pattern: TrianglePattern::Right,
            flux: FluxKind::Monolithic,
            viscosity: ViscosityModel::entropy_viscosity(),
            cfl: 0.3,
            mass: MassTreatment::Lumped,
            form: InviscidForm::Weak,
            cleaning: false,
            clean_energy: EnergyUpdate::KeepTotal,
            scheme: None,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub t: f64,
    pub clean: Option<CleanReport>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub problem: ProblemSpec,
    pub options: SolverOptions,
    pub space: FeSpace,
    pub mass: MassOperators,
    /// Nodal mesh size.
    pub h: Vec<f64>,
    pub constraints: Constraints,
    pub cleaner: Option<DivergenceCleaner>,
    pub u: Vec<f64>,
    pub t: f64,
    pub steps: usize,
    /// Coefficient used in the last step.
    pub eps: Vec<f64>,
    /// First-order coefficient of the last step.
    pub eps_first_order: Vec<f64>,
    /// High-order entropy-viscosity coefficient of the last step (empty
    /// unless entropy viscosity had enough history).
    pub eps_high: Vec<f64>,
    history: EntropyHistory,
}

impl Simulation {
    pub fn new(problem: ProblemSpec, options: SolverOptions) -> Result<Self> {
        options.viscosity.validate()?;
        if !(options.cfl > 0.0) {
            return Err(MhdError::Config(format!("cfl must be positive, got {}", options.cfl)));
        }
        let [nx, ny] = options.cells;
        let mesh = if problem.dim == 1 {
            build_interval_mesh(nx, problem.bounds[0][0], problem.bounds[0][1])?
        } else {
            build_triangulated_rectangle(nx, ny, problem.bounds, options.pattern)?
        };
        let space = FeSpace::new(mesh, options.degree, problem.periodic())?;
        problem.validate_ic(&space)?;
        let mass = space.build_mass_operators();
        if options.mass == MassTreatment::Lumped {
            if let Some(i) = mass.lumped.iter().position(|&m| !(m > 0.0)) {
                return Err(MhdError::Config(format!(
                    "lumped mass entry {i} is {}; use consistent mass for this element",
                    mass.lumped[i]
                )));
            }
        }
        let h = space.mesh_size_field(&mass)?;
        let u = problem.initial_state(&space)?;
        let mut markers = Vec::new();
        if problem.boundary[0] == Boundary::Frozen {
            markers.extend([MARKER_LEFT, MARKER_RIGHT]);
        }
        if problem.dim == 2 && problem.boundary[1] == Boundary::Frozen {
            markers.extend([crate::fespace::mesh::MARKER_BOTTOM, crate::fespace::mesh::MARKER_TOP]);
        }
        let constraints = Constraints::freeze(&space, &markers, &u, NCOMP)?;
        let cleaner = if options.cleaning {
            if problem.dim != 2 {
                return Err(MhdError::Config("divergence cleaning requires a 2D problem".into()));
            }
            let mut c = DivergenceCleaner::new(&space, &mass, true)?;
            c.energy = options.clean_energy;
            Some(c)
        } else {
            None
        };
        let n = space.n_dofs();
        Ok(Simulation {
            problem,
            options,
            space,
            mass,
            h,
            constraints,
            cleaner,
            u,
            t: 0.0,
            steps: 0,
            eps: vec![0.0; n],
            eps_first_order: vec![0.0; n],
            eps_high: Vec::new(),
            history: EntropyHistory::new(),
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn scheme(&self) -> SspScheme {
        self.options.scheme.unwrap_or_else(|| SspScheme::for_degree(self.options.degree))
    }

    pub fn finished(&self) -> bool {
        self.t >= self.problem.t_final * (1.0 - 1e-14)
    }

    /// Nodal field of component `c`.
    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.n_dofs();
        &self.u[c * n..(c + 1) * n]
    }

    pub fn node_state(&self, i: usize) -> StateVec {
        let n = self.n_dofs();
        std::array::from_fn(|c| self.u[c * n + i])
    }

    /// Divergence measure reported by the monitors: the weak divergence norm
    /// when cleaning is active, the broken `L2` norm of `div B_h` otherwise.
    pub fn divergence(&self) -> f64 {
        let n = self.n_dofs();
        let (bx, by) = (&self.u[BX * n..(BX + 1) * n], &self.u[BY * n..(BY + 1) * n]);
        match &self.cleaner {
            Some(c) => c.weak_divergence_norm(bx, by),
            None => divergence_l2(&self.space, bx, by),
        }
    }

    pub fn monitor_row(&self) -> MonitorRow {
        min_entropy_monitor(&self.u, self.n_dofs(), &self.problem.gas, self.t, self.divergence())
    }

    /// Viscosity coefficient for the current state; updates the entropy history.
    fn update_viscosity(&mut self) -> Result<()> {
        let n = self.n_dofs();
        let gas = self.problem.gas;
        let dim = self.problem.dim;
        match self.options.viscosity {
            ViscosityModel::None => {
                self.eps = vec![0.0; n];
                self.eps_first_order = vec![0.0; n];
            }
            ViscosityModel::Constant { eps } => {
                self.eps = vec![eps; n];
                self.eps_first_order = self.eps.clone();
            }
            ViscosityModel::FirstOrder { c_max } => {
                self.eps_first_order = first_order_viscosity(&self.u, &self.h, dim, &gas, c_max)?;
                self.eps = self.eps_first_order.clone();
            }
            ViscosityModel::EntropyViscosity { c_max, c_e, normalization } => {
                self.eps_first_order = first_order_viscosity(&self.u, &self.h, dim, &gas, c_max)?;
                let s = nodal_entropy(&self.u, n, &gas)?;
                self.history.push(self.t, s.clone());
                self.eps = if self.history.len() >= 2 {
                    let r = entropy_residual(&self.space, &self.u, &self.history)?;
                    self.eps_high = high_order_viscosity(&r, &self.h, &s, &self.mass.lumped, c_e, normalization);
                    entropy_viscosity(&self.eps_high, &self.eps_first_order)
                } else {
                    self.eps_high.clear();
                    self.eps_first_order.clone()
                };
            }
        }
        Ok(())
    }

    /// Advances one step of at most `t_final - t`.
    pub fn step(&mut self) -> Result<StepReport> {
        if self.steps >= self.options.max_steps {
            return Err(MhdError::SolverFailure(format!("step limit {} reached", self.options.max_steps)));
        }
        let dim = self.problem.dim;
        let gas = self.problem.gas;
        let dt = compute_dt(&self.u, &self.h, dim, self.options.cfl, &gas, self.t, self.problem.t_final)?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(MhdError::SolverFailure(format!("invalid time step {dt} at t = {}", self.t)));
        }
        self.update_viscosity()?;
        let visc = self.options.flux.choice(self.eps.clone());
        let sd = SemiDiscrete {
            space: &self.space,
            mass: &self.mass,
            gas,
            form: self.options.form,
            mass_treatment: self.options.mass,
            constraints: &self.constraints,
        };
        let n = self.space.n_dofs();
        let constraints = &self.constraints;
        let cleaner = self.cleaner.as_ref();
        let mut last_clean = None;
        let next = step(
            self.scheme(),
            &self.u,
            dt,
            |v| sd.rhs(v, &visc),
            |v| {
                constraints.apply(v, n);
                if let Some(c) = cleaner {
                    last_clean = Some(c.clean_state(v)?);
                }
                check_admissible(v, n)
            },
        )?;
        self.u = next;
        self.t += dt;
        if (self.problem.t_final - self.t).abs() <= 1e-14 * self.problem.t_final.max(1.0) {
            self.t = self.problem.t_final;
        }
        self.steps += 1;
        Ok(StepReport { dt, t: self.t, clean: last_clean })
    }

    /// Steps to the final time, calling `observe` after every step.
    pub fn run<F: FnMut(&Simulation, &StepReport)>(&mut self, mut observe: F) -> Result<()> {
        while !self.finished() {
            let rep = self.step()?;
            observe(self, &rep);
        }
        Ok(())
    }
}

/// Density and internal energy positive at every node.
pub fn check_admissible(u: &[f64], n: usize) -> Result<()> {
    for i in 0..n {
        let st = ConservedState::from_array(&std::array::from_fn(|c| u[c * n + i]));
        if !(st.rho > 0.0) {
            return Err(MhdError::NonpositiveDensity { rho: st.rho }.at(format!("node {i}")));
        }
        let rho_e = st.internal_energy();
        if !(rho_e > 0.0) {
            return Err(MhdError::NonpositiveInternalEnergy { rho: st.rho, rho_e }.at(format!("node {i}")));
        }
    }
    Ok(())
}

/// Lumped-mass integrals of every conserved component.
pub fn totals(sim: &Simulation) -> [f64; NCOMP] {
    let n = sim.n_dofs();
    std::array::from_fn(|c| sim.u[c * n..(c + 1) * n].iter().zip(&sim.mass.lumped).map(|(a, m)| a * m).sum())
}
