//! Canned benchmark suites with one pass/fail verdict per acceptance check.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run, RunOutcome, SimulationConfig};
use crate::divclean::DivergenceCleaner;
use crate::error::{MhdError, Result};
use crate::fespace::{build_triangulated_rectangle, FeSpace, TrianglePattern};
use crate::problems::{single_wave_ic, Overrides, Reference, WAVE_NAMES};
use crate::solver::{totals, Simulation, SolverOptions};
use crate::thermo::{
    conserved_from_primitive, entropy_hessian, generalized_entropy_convexity_check, j1_matrix, primitive_from_conserved,
    specific_entropy, ConservedState, EntropyFunction, GasModel, StateVec, BX, BY, EN, MX, MY, NCOMP, RHO,
};
use crate::timeint::{step, SspScheme};

pub const SUITE_NAMES: [&str; 3] = ["paper_tables", "entropy_principles", "shocks_2d"];

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Criterion { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub criteria: Vec<Criterion>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }
}

fn member(out: &Path, dir: &str, sets: &[&str]) -> Result<RunOutcome> {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    let cfg = SimulationConfig::from_text_and_sets("", &sets)?;
    run(&cfg, &out.join(dir))
}

/// Runs the named suite under `out` and writes `summary.txt` there.
pub fn run_suite(name: &str, out: &Path) -> Result<SuiteReport> {
    fs::create_dir_all(out)?;
    let criteria = match name {
        "paper_tables" => paper_tables(out)?,
        "entropy_principles" => entropy_principles(out)?,
        "shocks_2d" => shocks_2d(out)?,
        other => return Err(MhdError::Config(format!("unknown suite '{other}' (expected one of {SUITE_NAMES:?})"))),
    };
    let report = SuiteReport { name: name.to_string(), criteria };
    fs::write(out.join("summary.txt"), report.summary())?;
    Ok(report)
}

fn failure_detail(o: &RunOutcome) -> Option<String> {
    o.records.iter().find_map(|r| r.failure.clone())
}

fn paper_tables(out: &Path) -> Result<Vec<Criterion>> {
    let mut c = Vec::new();
    let p1 = member(out, "vortex_p1", &["problem=vortex", "sweep=60,120,240", "snapshots=0", "monitor_samples=0"])?;
    c.push(vortex_rates(&p1));
    c.push(eps_high_order(&p1));
    let p2 = member(out, "vortex_p2", &["problem=vortex", "degree=2", "sweep=20,40,80", "snapshots=0", "monitor_samples=0"])?;
    let detail = match (&p2.errors_csv, failure_detail(&p2)) {
        (_, Some(f)) => f,
        (Some(_), None) => format!("P2 table written, {} meshes", p2.records.len()),
        (None, None) => "no error table".into(),
    };
    c.push(Criterion::new("vortex P2 table", p2.passed(), detail));
    c.push(integrator_orders());
    c.push(conservation_check()?);
    Ok(c)
}

/// Every L1 and L2 rate of u and B within [1.85, 2.15].
pub fn vortex_rates(o: &RunOutcome) -> Criterion {
    if let Some(f) = failure_detail(o) {
        return Criterion::new("vortex convergence", false, f);
    }
    let rows = crate::diagnostics::convergence_rows(&o.records.iter().filter_map(|r| r.errors.clone()).collect::<Vec<_>>());
    let rates: Vec<f64> = rows.iter().flat_map(|r| [r.rate_l1, r.rate_l2]).flatten().collect();
    let ok = !rates.is_empty() && rates.iter().all(|r| (1.85..=2.15).contains(r));
    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Criterion::new("vortex convergence", ok, format!("rates in [{lo:.3}, {hi:.3}], required [1.85, 2.15]"))
}

/// `max eps_H` at the final step decreasing with order at least 1.8.
pub fn eps_high_order(o: &RunOutcome) -> Criterion {
    let vals: Vec<(usize, f64)> = o.records.iter().filter_map(|r| r.eps_high_final.map(|e| (r.cells[0], e))).collect();
    if vals.len() < 2 || vals.len() != o.records.len() {
        return Criterion::new("entropy viscosity order", false, "missing high-order viscosity data".into());
    }
    let orders: Vec<f64> =
        vals.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln()).collect();
    let ok = orders.iter().all(|&r| r >= 1.8);
    Criterion::new("entropy viscosity order", ok, format!("observed orders {orders:.3?}, required >= 1.8"))
}

fn ode_rhs(y: &[f64]) -> Result<Vec<f64>> {
    Ok(vec![y[1], -y[0] - 0.5 * y[1] * y[0] * y[0]])
}

fn integrate(scheme: SspScheme, steps: usize) -> Result<Vec<f64>> {
    let dt = 1.0 / steps as f64;
    let mut y = vec![1.0, 0.5];
    for _ in 0..steps {
        y = step(scheme, &y, dt, ode_rhs, |_| Ok(()))?;
    }
    Ok(y)
}

/// Observed orders of the integrators on a nonlinear oscillator.
pub fn observed_ode_order(scheme: SspScheme) -> Result<f64> {
    let reference = integrate(SspScheme::Ssprk54, 4096)?;
    let err = |steps| -> Result<f64> {
        let y = integrate(scheme, steps)?;
        Ok(y.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    };
    let (e1, e2) = (err(20)?, err(40)?);
    Ok((e1 / e2).log2())
}

fn integrator_orders() -> Criterion {
    match (observed_ode_order(SspScheme::Ssprk33), observed_ode_order(SspScheme::Ssprk54)) {
        (Ok(o3), Ok(o4)) => Criterion::new(
            "integrator orders",
            o3 >= 2.9 && o4 >= 3.8,
            format!("ssprk33 {o3:.3} (>= 2.9), ssprk54 {o4:.3} (>= 3.8)"),
        ),
        (a, b) => Criterion::new("integrator orders", false, format!("{:?} {:?}", a.err(), b.err())),
    }
}

/// Largest relative drift of the total conserved quantities over a short
/// periodic run with viscosity.
pub fn conservation_drift(id: &str, cells: usize, steps: usize) -> Result<f64> {
    // long enough that the run does not end inside the measured steps
    let p = crate::problems::make_problem(id, &Overrides::from([("t_final".to_string(), 1e3)]))?;
    let opts = SolverOptions { cells: [cells, cells], ..Default::default() };
    let mut sim = Simulation::new(p, opts)?;
    let before = totals(&sim);
    for _ in 0..steps {
        sim.step()?;
    }
    let after = totals(&sim);
    Ok((0..NCOMP).map(|c| (after[c] - before[c]).abs() / before[c].abs().max(1.0)).fold(0.0, f64::max))
}

fn conservation_check() -> Result<Criterion> {
    let drift = conservation_drift("vortex", 32, 20)?;
    Ok(Criterion::new("conservation", drift <= 1e-10, format!("relative drift {drift:.3e}, required <= 1e-10")))
}

fn entropy_principles(out: &Path) -> Result<Vec<Criterion>> {
    let fo = ["viscosity=first_order", "nx=640", "snapshots=2"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> { fo.iter().chain(extra).copied().collect() };
    let mono = member(out, "brio_wu_monolithic", &with(&["problem=brio_wu"]))?;
    let k0 = member(out, "brio_wu_resistive_k0", &with(&["problem=brio_wu", "flux=resistive", "kappa_factor=0"]))?;
    let k1 = member(out, "brio_wu_resistive_k1", &with(&["problem=brio_wu", "flux=resistive", "kappa_factor=1"]))?;
    let drop = |o: &RunOutcome| o.records[0].monitor.worst_entropy_drop();
    let (d0, dk0, dk1) = (drop(&mono), drop(&k0), drop(&k1));
    let ok = mono.passed() && d0 >= -1e-12 && dk0 < -1e-6 && dk1 < -1e-6;
    let mut c = vec![Criterion::new(
        "minimum entropy principle",
        ok,
        format!("monolithic drop {d0:.3e} (>= -1e-12), resistive kappa=0 {dk0:.3e}, kappa=1 {dk1:.3e} (< -1e-6)"),
    )];

    let contact = member(out, "contact_monolithic", &with(&["problem=contact"]))?;
    let contact_k1 = member(out, "contact_resistive_k1", &with(&["problem=contact", "flux=resistive", "kappa_factor=1"]))?;
    c.push(contact_check(&contact, &contact_k1));

    let mut pos = Vec::new();
    for id in std::iter::once("brio_wu").chain(WAVE_NAMES) {
        let sets = [format!("problem={id}")];
        let o = member(out, &format!("{id}_default"), &sets.iter().map(String::as_str).collect::<Vec<_>>())?;
        pos.push((id.to_string(), o));
    }
    c.push(positivity("positivity 1d", &pos));
    c.push(entropy_property_check(10_000, 1_000, 100, 7));
    c.push(viscosity_locality(&pos[0].1));
    Ok(c)
}

/// Density within the initial bounds and the other primitives constant for
/// the monolithic run; visible density overshoot for the resistive run.
pub fn contact_check(mono: &RunOutcome, resistive: &RunOutcome) -> Criterion {
    if let Some(f) = failure_detail(mono).or_else(|| failure_detail(resistive)) {
        return Criterion::new("contact compatibility", false, f);
    }
    let w = single_wave_ic("contact").expect("known wave");
    let (lo, hi) = (w.right.rho, w.left.rho);
    let density_excess = |o: &RunOutcome| {
        let sim = &o.records[0].sim;
        sim.component(RHO).iter().map(|&r| (r - hi).max(lo - r).max(0.0)).fold(0.0, f64::max)
    };
    let sim = &mono.records[0].sim;
    let gas = sim.problem.gas;
    let mut dev = 0.0f64;
    for i in 0..sim.n_dofs() {
        match primitive_from_conserved(&ConservedState::from_array(&sim.node_state(i)), &gas) {
            Ok(p) => {
                let d = [p.u[0] - w.left.u[0], p.u[1] - w.left.u[1], p.p - w.left.p, p.b[0] - w.left.b[0], p.b[1] - w.left.b[1]];
                dev = d.iter().fold(dev, |m, x| m.max(x.abs()));
            }
            Err(_) => dev = f64::INFINITY,
        }
    }
    let (em, er) = (density_excess(mono), density_excess(resistive));
    Criterion::new(
        "contact compatibility",
        em <= 1e-6 && dev <= 1e-8 && er > 1e-3,
        format!("monolithic density excess {em:.3e} (<= 1e-6), u/p/B deviation {dev:.3e} (<= 1e-8), resistive excess {er:.3e} (> 1e-3)"),
    )
}

/// Positive density and internal energy at every monitor sample of every run.
pub fn positivity(name: &str, runs: &[(String, RunOutcome)]) -> Criterion {
    let mut bad = Vec::new();
    let mut min_rho = f64::INFINITY;
    let mut min_rhoe = f64::INFINITY;
    for (id, o) in runs {
        for r in &o.records {
            if let Some(f) = &r.failure {
                bad.push(format!("{id}: {f}"));
            }
            for row in &r.monitor.rows {
                min_rho = min_rho.min(row.min_rho);
                min_rhoe = min_rhoe.min(row.min_rhoe);
                if !(row.min_rho > 0.0 && row.min_rhoe > 0.0) || row.violations > 0 {
                    bad.push(format!("{id}: inadmissible sample at t = {:.6e}", row.t));
                    break;
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{} runs, min rho {min_rho:.3e}, min rho e {min_rhoe:.3e}", runs.len())
    } else {
        bad.join("; ")
    };
    Criterion::new(name, bad.is_empty(), detail)
}

/// Nodes with `eps > eps_L / 2` on the final step of a Brio-Wu run: at most
/// 15% of them, and one within four cells of every reference discontinuity.
pub fn viscosity_locality(o: &RunOutcome) -> Criterion {
    let rec = &o.records[0];
    if let Some(f) = &rec.failure {
        return Criterion::new("entropy viscosity locality", false, f.clone());
    }
    let sim = &rec.sim;
    let Some(Reference::Discontinuities(xs)) = &sim.problem.reference else {
        return Criterion::new("entropy viscosity locality", false, "no reference structure".into());
    };
    let n = sim.n_dofs();
    let dx = (sim.problem.bounds[0][1] - sim.problem.bounds[0][0]) / sim.options.cells[0] as f64;
    let flagged: Vec<f64> = (0..n)
        .filter(|&i| sim.eps[i] > 0.5 * sim.eps_first_order[i])
        .map(|i| sim.space.dof_coords[i][0])
        .collect();
    let fraction = flagged.len() as f64 / n as f64;
    let missed: Vec<f64> =
        xs.iter().copied().filter(|x| !flagged.iter().any(|f| (f - x).abs() <= 4.0 * dx)).collect();
    let ratio = (0..n).map(|i| sim.eps[i] / sim.eps_first_order[i]).fold(0.0, f64::max);
    Criterion::new(
        "entropy viscosity locality",
        fraction <= 0.15 && missed.is_empty(),
        format!(
            "flagged fraction {fraction:.4} (<= 0.15), uncovered discontinuities {missed:.4?}, max eps/eps_L {ratio:.3}"
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng, gas: &GasModel) -> StateVec {
    let rho = 10f64.powf(rng.random_range(-2.0..1.0));
    let p = 10f64.powf(rng.random_range(-3.0..3.0));
    let u = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
    let b = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
    conserved_from_primitive(rho, u, p, b, gas).expect("positive sample").to_array()
}

fn random_entropy_function(rng: &mut ChaCha8Rng) -> EntropyFunction {
    match rng.random_range(0..4) {
        0 => EntropyFunction::Linear { a: rng.random_range(-2.0..2.0), b: rng.random_range(-1.0..1.0) },
        1 => EntropyFunction::Tanh { a: rng.random_range(-2.0..2.0), b: rng.random_range(-2.0..2.0) },
        2 => EntropyFunction::Exp { k: rng.random_range(-3.0..3.0) },
        _ => EntropyFunction::NegExp { k: rng.random_range(-3.0..3.0) },
    }
}

fn eta(u: &StateVec, gas: &GasModel, f: &EntropyFunction) -> f64 {
    let st = ConservedState::from_array(u);
    let prim = primitive_from_conserved(&st, gas).expect("admissible");
    let s = specific_entropy(prim.rho, prim.p, gas).expect("admissible");
    -prim.rho * f.eval(s).0
}

/// Relative Frobenius distance between the analytic Hessian of `-rho f(s)`
/// and a Richardson-extrapolated central-difference Hessian.
pub fn hessian_fd_error(u: &StateVec, gas: &GasModel, f: &EntropyFunction) -> f64 {
    let h = entropy_hessian(&ConservedState::from_array(u), gas, f).expect("admissible");
    let st = ConservedState::from_array(u);
    let (rho, rho_e) = (st.rho, st.internal_energy());
    let vel = [u[MX] / rho, u[MY] / rho];
    // sensitivity of the internal energy to each conserved variable
    let sens = [0.5 * (vel[0] * vel[0] + vel[1] * vel[1]), vel[0].abs(), vel[1].abs(), 1.0, u[BX].abs(), u[BY].abs()];
    let base: [f64; NCOMP] = std::array::from_fn(|c| 2e-3 * u[c].abs().max(0.1).min(rho_e / sens[c].max(1e-300)));
    let central = |a: usize, b: usize, scale: f64| {
        let at = |sa: f64, sb: f64| {
            let mut v = *u;
            v[a] += sa * scale * base[a];
            v[b] += sb * scale * base[b];
            eta(&v, gas, f)
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * scale * scale * base[a] * base[b])
    };
    let (mut num, mut den) = (0.0, 0.0);
    for a in 0..NCOMP {
        for b in 0..NCOMP {
            let fd = (4.0 * central(a, b, 0.5) - central(a, b, 1.0)) / 3.0;
            num += (fd - h[(a, b)]).powi(2);
            den += h[(a, b)].powi(2);
        }
    }
    (num / den).sqrt()
}

/// Negative `J_1` eigenvalues, the convexity characterization and the
/// Hessian against finite differences, over random admissible states.
pub fn entropy_property_check(states: usize, pairs: usize, fd_states: usize, seed: u64) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut j1_bad, mut conv_bad, mut fd_worst) = (0usize, 0usize, 0.0f64);
    for gamma in [1.4, 5.0 / 3.0, 2.0] {
        let gas = GasModel::with_gamma(gamma).expect("valid gamma");
        for _ in 0..states {
            let u = random_state(&mut rng, &gas);
            let st = ConservedState::from_array(&u);
            let prim = primitive_from_conserved(&st, &gas).expect("admissible");
            let j = j1_matrix(prim.rho, prim.e, &gas, 1.0).expect("admissible");
            let eig = j.symmetric_eigenvalues();
            if !(eig[0] < 0.0 && eig[1] < 0.0) {
                j1_bad += 1;
            }
        }
        for _ in 0..pairs {
            let st = ConservedState::from_array(&random_state(&mut rng, &gas));
            let f = random_entropy_function(&mut rng);
            let r = generalized_entropy_convexity_check(&st, &gas, &f).expect("admissible");
            if r.hessian_pd != (r.cond1 && r.cond2) {
                conv_bad += 1;
            }
        }
        for _ in 0..fd_states {
            let u = random_state(&mut rng, &gas);
            fd_worst = fd_worst.max(hessian_fd_error(&u, &gas, &EntropyFunction::Linear { a: 1.0, b: 0.0 }));
        }
    }
    Criterion::new(
        "entropy properties",
        j1_bad == 0 && conv_bad == 0 && fd_worst <= 1e-4,
        format!("J1 failures {j1_bad}, convexity mismatches {conv_bad}, worst Hessian FD error {fd_worst:.3e} (<= 1e-4)"),
    )
}

fn shocks_2d(out: &Path) -> Result<Vec<Criterion>> {
    let mut runs = Vec::new();
    for (id, nx) in [("vortex", 60), ("orszag_tang", 96), ("rotor", 96), ("blast", 128)] {
        let sets = [format!("problem={id}"), format!("nx={nx}"), "snapshots=3".to_string()];
        let o = member(out, id, &sets.iter().map(String::as_str).collect::<Vec<_>>())?;
        runs.push((id.to_string(), o));
    }
    let mut c = vec![positivity("positivity 2d", &runs)];
    c.push(cleaning_check(64)?);
    Ok(c)
}

/// Cleaning of `B = (x, 0)` on the unit square.
pub fn cleaning_check(cells: usize) -> Result<Criterion> {
    let mesh = build_triangulated_rectangle(cells, cells, [[0.0, 1.0], [0.0, 1.0]], TrianglePattern::Right)?;
    let space = FeSpace::new(mesh, 1, [false, false])?;
    let mass = space.build_mass_operators();
    let cleaner = DivergenceCleaner::new(&space, &mass, true)?;
    let gas = GasModel::with_gamma(5.0 / 3.0)?;
    let n = space.n_dofs();
    let mut u = vec![0.0; NCOMP * n];
    for i in 0..n {
        let x = space.dof_coords[i];
        let st = conserved_from_primitive(1.0 + 0.5 * x[1], [0.3, -0.2], 1.0, [x[0], 0.0], &gas)?.to_array();
        for c in 0..NCOMP {
            u[c * n + i] = st[c];
        }
    }
    let original = u.clone();
    let first = cleaner.clean_state(&mut u)?;
    let once = u.clone();
    cleaner.clean_state(&mut u)?;
    let l2 = |c: usize| -> f64 {
        (0..n).map(|i| mass.lumped[i] * (u[c * n + i] - once[c * n + i]).powi(2)).sum::<f64>()
    };
    let second_change = (l2(BX) + l2(BY)).sqrt();
    let others = [RHO, MX, MY, EN]
        .iter()
        .flat_map(|&c| (0..n).map(move |i| c * n + i))
        .map(|k| (once[k] - original[k]).abs())
        .fold(0.0, f64::max);
    let factor = first.before / first.after;
    Ok(Criterion::new(
        "divergence cleaning",
        factor >= 1e2 && second_change <= 1e-8 && others <= 1e-14,
        format!("reduction {factor:.3e} (>= 1e2), second clean change {second_change:.3e} (<= 1e-8), other fields {others:.1e} (<= 1e-14)"),
    ))
}
