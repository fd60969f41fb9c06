//! Error norms, convergence tables, entropy-principle monitors and overshoot
//! measurements.

use std::fmt::Write as _;

use crate::fespace::FeSpace;
use crate::fluxes::state_at;
use crate::problems::Primitive;
use crate::thermo::{ConservedState, GasModel, BX, BY, EN, MX, MY, NCOMP, RHO};

/// Error of one field in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentError {
    pub component: String,
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub dofs: usize,
    pub degree: usize,
    pub dim: usize,
    pub components: Vec<ComponentError>,
}

impl ErrorReport {
    pub fn get(&self, component: &str) -> Option<&ComponentError> {
        self.components.iter().find(|c| c.component == component)
    }
}

/// Domain-averaged `L1` and root-mean-square `L2` errors of velocity and
/// magnetic field (Euclidean norm of the vector error), integrated with a rule
/// of exactness `2k + 3`. The velocity is `m_h / rho_h` at each point.
pub fn error_norms<F>(space: &FeSpace, u: &[f64], reference: F) -> ErrorReport
where
    F: Fn([f64; 2]) -> Primitive,
{
    let n = space.n_dofs();
    let table = space.table_for_exactness(2 * space.degree + 3);
    let mut acc = [[0.0; 2]; 2];
    let mut area = 0.0;
    space.quad_loop_with(&table, |ctx| {
        let (v, _) = state_at(ctx, u, n);
        let exact = reference(ctx.x);
        let vel = [v[MX] / v[RHO], v[MY] / v[RHO]];
        let eu = ((vel[0] - exact.u[0]).powi(2) + (vel[1] - exact.u[1]).powi(2)).sqrt();
        let eb = ((v[BX] - exact.b[0]).powi(2) + (v[BY] - exact.b[1]).powi(2)).sqrt();
        for (a, e) in acc.iter_mut().zip([eu, eb]) {
            a[0] += ctx.jxw * e;
            a[1] += ctx.jxw * e * e;
        }
        area += ctx.jxw;
    });
    let components = ["u", "B"]
        .iter()
        .zip(acc)
        .map(|(name, a)| ComponentError { component: name.to_string(), l1: a[0] / area, l2: (a[1] / area).sqrt() })
        .collect();
    ErrorReport { dofs: n, degree: space.degree, dim: space.dim(), components }
}

/// `log(e_prev / e_cur) / log((N_cur / N_prev)^(1/dim))`
pub fn observed_rate(e_prev: f64, e_cur: f64, n_prev: usize, n_cur: usize, dim: usize) -> f64 {
    let ratio = (n_cur as f64 / n_prev as f64).powf(1.0 / dim as f64);
    (e_prev / e_cur).ln() / ratio.ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dofs: usize,
    pub degree: usize,
    pub component: String,
    pub l1: f64,
    pub l2: f64,
    pub rate_l1: Option<f64>,
    pub rate_l2: Option<f64>,
}

/// Rows for every component of every run, rates against the previous run.
pub fn convergence_rows(runs: &[ErrorReport]) -> Vec<ConvergenceRow> {
    let mut rows = Vec::new();
    for (k, run) in runs.iter().enumerate() {
        for c in &run.components {
            let prev = k.checked_sub(1).and_then(|p| runs[p].get(&c.component).map(|e| (runs[p].dofs, e)));
            let rate = |f: fn(&ComponentError) -> f64| {
                prev.map(|(np, e)| observed_rate(f(e), f(c), np, run.dofs, run.dim))
            };
            rows.push(ConvergenceRow {
                dofs: run.dofs,
                degree: run.degree,
                component: c.component.clone(),
                l1: c.l1,
                l2: c.l2,
                rate_l1: rate(|e| e.l1),
                rate_l2: rate(|e| e.l2),
            });
        }
    }
    rows
}

/// The table as CSV (`dofs,degree,component,L1,L2,rate`, where `rate` is the
/// L2 rate and `rate_L1` follows) and as aligned text.
pub fn convergence_table(runs: &[ErrorReport]) -> (String, String) {
    let rows = convergence_rows(runs);
    let fmt_rate = |r: Option<f64>| r.map_or("--".to_string(), |v| format!("{v:.2}"));
    let mut csv = String::from("dofs,degree,component,L1,L2,rate,rate_L1\n");
    let mut text = format!("{:>8} {:>6} {:>9} {:>12} {:>6} {:>12} {:>6}\n", "#DOFs", "degree", "component", "L1", "rate", "L2", "rate");
    for r in &rows {
        let csv_rate = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.6}"));
        let _ = writeln!(
            csv,
            "{},{},{},{:.6e},{:.6e},{},{}",
            r.dofs,
            r.degree,
            r.component,
            r.l1,
            r.l2,
            csv_rate(r.rate_l2),
            csv_rate(r.rate_l1)
        );
        let _ = writeln!(
            text,
            "{:>8} {:>6} {:>9} {:>12.2E} {:>6} {:>12.2E} {:>6}",
            r.dofs,
            r.degree,
            r.component,
            r.l1,
            fmt_rate(r.rate_l1),
            r.l2,
            fmt_rate(r.rate_l2)
        );
    }
    (csv, text)
}

/// One monitor sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorRow {
    pub t: f64,
    /// `min_i ln(p_i / rho_i^gamma)` over admissible nodes.
    pub min_s: f64,
    pub min_rho: f64,
    pub min_rhoe: f64,
    pub div_b: f64,
    /// Nodes where `rho` or `rho e` is not positive.
    pub violations: usize,
}

/// Nodal minima of specific entropy, density and internal energy.
pub fn min_entropy_monitor(u: &[f64], n: usize, gas: &GasModel, t: f64, div_b: f64) -> MonitorRow {
    let mut row = MonitorRow {
        t,
        min_s: f64::INFINITY,
        min_rho: f64::INFINITY,
        min_rhoe: f64::INFINITY,
        div_b,
        violations: 0,
    };
    for i in 0..n {
        let st = ConservedState {
            rho: u[RHO * n + i],
            m: [u[MX * n + i], u[MY * n + i]],
            energy: u[EN * n + i],
            b: [u[BX * n + i], u[BY * n + i]],
        };
        let rho_e = st.internal_energy();
        row.min_rho = row.min_rho.min(st.rho);
        row.min_rhoe = row.min_rhoe.min(rho_e);
        if st.rho > 0.0 && rho_e > 0.0 {
            let p = (gas.gamma - 1.0) * rho_e;
            row.min_s = row.min_s.min((p / st.rho.powf(gas.gamma)).ln());
        } else {
            row.violations += 1;
        }
    }
    debug_assert_eq!(u.len(), NCOMP * n);
    row
}

/// Samples a run at `count` uniformly spaced times in `[0, t_final]`,
/// recording for each the completed step nearest to it.
#[derive(Debug, Clone)]
pub struct EntropyMonitor {
    pub t_final: f64,
    pub count: usize,
    pub rows: Vec<MonitorRow>,
    last: Option<MonitorRow>,
}

impl EntropyMonitor {
    pub fn new(t_final: f64, count: usize) -> Self {
        EntropyMonitor { t_final, count: count.max(1), rows: Vec::new(), last: None }
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        if self.count == 1 {
            self.t_final
        } else {
            self.t_final * k as f64 / (self.count - 1) as f64
        }
    }

    /// Feeds the state after a completed step (or the initial state).
    pub fn observe(&mut self, row: MonitorRow) {
        while self.rows.len() < self.count {
            let ts = self.sample_time(self.rows.len());
            if ts > row.t && !(self.rows.len() + 1 == self.count && row.t >= self.t_final) {
                break;
            }
            let pick = match self.last {
                Some(prev) if ts - prev.t < row.t - ts => prev,
                _ => row,
            };
            self.rows.push(pick);
        }
        self.last = Some(row);
    }

    /// Pads with the final state if the run ended before the last sample time.
    pub fn finish(&mut self) {
        if let Some(last) = self.last {
            while self.rows.len() < self.count {
                self.rows.push(last);
            }
        }
    }

    pub fn total_violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }

    /// `min_k (min_s(t_k) - min_s(0))`
    pub fn worst_entropy_drop(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        self.rows.iter().map(|r| r.min_s - first.min_s).fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,min_s,min_rho,min_rhoe,divB\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", r.t, r.min_s, r.min_rho, r.min_rhoe, r.div_b);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overshoot {
    pub max_over: f64,
    pub max_under: f64,
}

/// `max(field - hi)^+` and `max(lo - field)^+` over nodes.
pub fn overshoot_metric(field: &[f64], lo: f64, hi: f64) -> Overshoot {
    let mut o = Overshoot { max_over: 0.0, max_under: 0.0 };
    for &v in field {
        o.max_over = o.max_over.max(v - hi);
        o.max_under = o.max_under.max(lo - v);
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{build_interval_mesh, build_triangulated_rectangle, TrianglePattern};
    use crate::thermo::conserved_from_primitive;

    fn fill(space: &FeSpace, gas: &GasModel, f: impl Fn([f64; 2]) -> Primitive) -> Vec<f64> {
        let n = space.n_dofs();
        let mut u = vec![0.0; NCOMP * n];
        for (i, x) in space.dof_coords.iter().enumerate() {
            let p = f(*x);
            let c = conserved_from_primitive(p.rho, p.u, p.p, p.b, gas).unwrap().to_array();
            for k in 0..NCOMP {
                u[k * n + i] = c[k];
            }
        }
        u
    }

    #[test]
    fn exact_interpolant_of_linear_field() {
        let gas = GasModel::with_gamma(1.4).unwrap();
        let m = build_triangulated_rectangle(5, 5, [[0.0, 2.0], [0.0, 1.0]], TrianglePattern::Right).unwrap();
        let s = FeSpace::new(m, 1, [false, false]).unwrap();
        let f = |x: [f64; 2]| Primitive::new(1.0, [x[0], 0.0], 1.0, [0.3, x[1] - x[0]]);
        let u = fill(&s, &gas, f);
        let rep = error_norms(&s, &u, f);
        for c in &rep.components {
            assert!(c.l1 < 1e-14 && c.l2 < 1e-14, "{c:?}");
        }
    }

    #[test]
    fn constant_offset_error() {
        let gas = GasModel::with_gamma(1.4).unwrap();
        let s = FeSpace::new(build_interval_mesh(7, 0.0, 3.0).unwrap(), 2, [false, false]).unwrap();
        let u = fill(&s, &gas, |_| Primitive::new(2.0, [0.5, 0.0], 1.0, [0.0, 0.0]));
        let rep = error_norms(&s, &u, |_| Primitive::new(2.0, [0.2, 0.4], 1.0, [0.0, 0.0]));
        let e = rep.get("u").unwrap();
        assert!((e.l1 - 0.5).abs() < 1e-14 && (e.l2 - 0.5).abs() < 1e-14);
    }

    fn report(dofs: usize, e: f64) -> ErrorReport {
        ErrorReport { dofs, degree: 1, dim: 2, components: vec![ComponentError { component: "u".into(), l1: e, l2: e }] }
    }

    #[test]
    fn rates() {
        let rows = convergence_rows(&[report(100, 1.0), report(400, 1.0), report(1600, 0.5)]);
        assert_eq!(rows[0].rate_l1, None);
        assert!(rows[1].rate_l1.unwrap().abs() < 1e-15);
        assert!((rows[2].rate_l2.unwrap() - 1.0).abs() < 1e-14);
        let (csv, text) = convergence_table(&[report(100, 1.0), report(400, 0.25)]);
        assert!(csv.starts_with("dofs,degree,component,L1,L2,rate"));
        assert!(csv.lines().nth(2).unwrap().contains(",2.000000,"));
        assert!(text.contains("2.00"));
    }

    #[test]
    fn monitor_values() {
        let gas = GasModel::with_gamma(2.0).unwrap();
        let s = FeSpace::new(build_interval_mesh(4, 0.0, 1.0).unwrap(), 1, [false, false]).unwrap();
        let u = fill(&s, &gas, |x| {
            if x[0] <= 0.5 {
                Primitive::new(1.0, [0.0, 0.0], 1.0, [0.75, 1.0])
            } else {
                Primitive::new(0.125, [0.0, 0.0], 0.1, [0.75, -1.0])
            }
        });
        let row = min_entropy_monitor(&u, s.n_dofs(), &gas, 0.0, 0.0);
        assert_eq!(row.min_s, 0.0f64.min((0.1f64 / 0.015625).ln()));
        assert_eq!(row.min_rho, 0.125);
        assert_eq!(row.violations, 0);
        let mut bad = u.clone();
        bad[0] = -1.0;
        assert_eq!(min_entropy_monitor(&bad, s.n_dofs(), &gas, 0.0, 0.0).violations, 1);
    }

    #[test]
    fn monitor_sampling_picks_nearest_step() {
        let mut m = EntropyMonitor::new(1.0, 5);
        let row = |t: f64| MonitorRow { t, min_s: t, min_rho: 1.0, min_rhoe: 1.0, div_b: 0.0, violations: 0 };
        for t in [0.0, 0.2, 0.35, 0.7, 1.0] {
            m.observe(row(t));
        }
        m.finish();
        let ts: Vec<f64> = m.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0.0, 0.2, 0.35, 0.7, 1.0]);
        assert_eq!(m.worst_entropy_drop(), 0.0);
    }

    #[test]
    fn overshoot() {
        assert_eq!(overshoot_metric(&[0.2, 0.5], 0.0, 1.0), Overshoot { max_over: 0.0, max_under: 0.0 });
        let o = overshoot_metric(&[-0.1, 1.3], 0.0, 1.0);
        assert!((o.max_over - 0.3).abs() < 1e-15 && (o.max_under - 0.1).abs() < 1e-15);
    }
}
