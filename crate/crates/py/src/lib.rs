//! Python bindings.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use mhd_fem::cli::{self, is_config_error, SimulationConfig};
use mhd_fem::error::MhdError;
use mhd_fem::problems::PROBLEM_IDS;
use mhd_fem::thermo::{self, EntropyFunction, NCOMP};

create_exception!(pymhd, SolverError, PyException);
create_exception!(pymhd, ConfigError, PyException);

fn to_py(e: MhdError) -> PyErr {
    if is_config_error(&e) {
        ConfigError::new_err(e.to_string())
    } else {
        SolverError::new_err(e.to_string())
    }
}

fn component_index(name: &str) -> PyResult<usize> {
    const NAMES: [&str; NCOMP] = ["rho", "mx", "my", "E", "Bx", "By"];
    NAMES
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown component '{name}', expected one of {NAMES:?}")))
}

fn sets_from(settings: Option<HashMap<String, String>>) -> Vec<String> {
    let mut sets: Vec<String> = settings.unwrap_or_default().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    sets.sort();
    sets
}

/// Ideal gas with constant specific heats.
#[pyclass(name = "GasModel", frozen)]
struct PyGasModel {
    inner: thermo::GasModel,
}

#[pymethods]
impl PyGasModel {
    #[new]
    #[pyo3(signature = (gamma, c_v = 1.0))]
    fn new(gamma: f64, c_v: f64) -> PyResult<Self> {
        Ok(Self { inner: thermo::GasModel::new(gamma, c_v).map_err(to_py)? })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn c_p(&self) -> f64 {
        self.inner.c_p()
    }

    /// Conserved state `[rho, mx, my, E, Bx, By]` from primitives.
    fn conserved(&self, rho: f64, u: [f64; 2], p: f64, b: [f64; 2]) -> PyResult<[f64; NCOMP]> {
        Ok(thermo::conserved_from_primitive(rho, u, p, b, &self.inner).map_err(to_py)?.to_array())
    }

    /// `(rho, u, p, B)` from a conserved state.
    fn primitive(&self, state: [f64; NCOMP]) -> PyResult<(f64, [f64; 2], f64, [f64; 2])> {
        let p = thermo::primitive_from_conserved(&thermo::ConservedState::from_array(&state), &self.inner).map_err(to_py)?;
        Ok((p.rho, p.u, p.p, p.b))
    }

    fn specific_entropy(&self, rho: f64, p: f64) -> PyResult<f64> {
        thermo::specific_entropy(rho, p, &self.inner).map_err(to_py)
    }

    fn fast_speed(&self, rho: f64, p: f64, b: [f64; 2], n: [f64; 2]) -> PyResult<f64> {
        thermo::fast_speed(rho, p, b, n, &self.inner).map_err(to_py)
    }

    /// Convexity of `-rho f(s)` for `f` given as `("linear", a, b)`,
    /// `("tanh", a, b)`, `("exp", k)` or `("negexp", k)`. Returns
    /// `(cond1, cond2, hessian_pd)`.
    fn convexity(&self, state: [f64; NCOMP], f: (String, f64, Option<f64>)) -> PyResult<(bool, bool, bool)> {
        let func = match (f.0.as_str(), f.2) {
            ("linear", Some(b)) => EntropyFunction::Linear { a: f.1, b },
            ("tanh", Some(b)) => EntropyFunction::Tanh { a: f.1, b },
            ("exp", None) => EntropyFunction::Exp { k: f.1 },
            ("negexp", None) => EntropyFunction::NegExp { k: f.1 },
            _ => return Err(PyValueError::new_err(format!("unsupported entropy function {f:?}"))),
        };
        let r = thermo::generalized_entropy_convexity_check(&thermo::ConservedState::from_array(&state), &self.inner, &func)
            .map_err(to_py)?;
        Ok((r.cond1, r.cond2, r.hessian_pd))
    }
}

/// A single simulation built from configuration settings.
#[pyclass(name = "Simulation", unsendable)]
struct PySimulation {
    inner: mhd_fem::solver::Simulation,
}

#[pymethods]
impl PySimulation {
    /// `settings` uses the same keys as the command line `--set` option,
    /// e.g. `{"problem": "brio_wu", "nx": "200"}`.
    #[new]
    #[pyo3(signature = (settings = None))]
    fn new(settings: Option<HashMap<String, String>>) -> PyResult<Self> {
        let cfg = SimulationConfig::from_text_and_sets("", &sets_from(settings)).map_err(to_py)?;
        let (problem, mut opts) = cfg.solver_options().map_err(to_py)?;
        if opts.len() != 1 {
            return Err(ConfigError::new_err("a Simulation takes a single mesh; use run() for sweeps"));
        }
        let inner = mhd_fem::solver::Simulation::new(problem, opts.remove(0)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.problem.t_final
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn n_dofs(&self) -> usize {
        self.inner.n_dofs()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.inner.finished()
    }

    /// Nodal coordinates as a list of `(x, y)`.
    fn coordinates(&self) -> Vec<[f64; 2]> {
        self.inner.space.dof_coords.clone()
    }

    /// Nodal values of `rho`, `mx`, `my`, `E`, `Bx` or `By`.
    fn component(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.component(component_index(name)?).to_vec())
    }

    /// Nodal artificial viscosity of the last step.
    fn viscosity(&self) -> Vec<f64> {
        self.inner.eps.clone()
    }

    fn divergence(&self) -> f64 {
        self.inner.divergence()
    }

    /// Mass-weighted totals of the six conserved components.
    fn totals(&self) -> [f64; NCOMP] {
        mhd_fem::solver::totals(&self.inner)
    }

    /// `{t, min_s, min_rho, min_rhoe, divB, violations}` for the current state.
    fn monitor(&self) -> HashMap<&'static str, f64> {
        let r = self.inner.monitor_row();
        HashMap::from([
            ("t", r.t),
            ("min_s", r.min_s),
            ("min_rho", r.min_rho),
            ("min_rhoe", r.min_rhoe),
            ("divB", r.div_b),
            ("violations", r.violations as f64),
        ])
    }

    /// Advances one step and returns its size.
    fn step(&mut self) -> PyResult<f64> {
        Ok(self.inner.step().map_err(to_py)?.dt)
    }

    /// Steps until the final time, or for at most `max_steps` steps.
    #[pyo3(signature = (max_steps = None))]
    fn advance(&mut self, max_steps: Option<usize>) -> PyResult<usize> {
        let mut taken = 0;
        while !self.inner.finished() && max_steps.is_none_or(|m| taken < m) {
            self.inner.step().map_err(to_py)?;
            taken += 1;
        }
        Ok(taken)
    }
}

/// Runs a configuration with all file outputs under `out`, as the command
/// line tool does. Returns the exit status (0 pass, 1 numerical failure).
#[pyfunction]
#[pyo3(signature = (out, settings = None, config_text = ""))]
fn run(out: PathBuf, settings: Option<HashMap<String, String>>, config_text: &str) -> PyResult<i32> {
    let cfg = SimulationConfig::from_text_and_sets(config_text, &sets_from(settings)).map_err(to_py)?;
    let outcome = cli::run(&cfg, &out).map_err(to_py)?;
    Ok(outcome.status() as i32)
}

/// Runs a named benchmark suite; returns `(passed, summary)`.
#[pyfunction]
fn run_suite(name: &str, out: PathBuf) -> PyResult<(bool, String)> {
    let report = cli::suite::run_suite(name, &out).map_err(to_py)?;
    Ok((report.passed(), report.summary()))
}

#[pyfunction]
fn problem_ids() -> Vec<&'static str> {
    PROBLEM_IDS.to_vec()
}

#[pymodule]
fn pymhd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGasModel>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(problem_ids, m)?)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    Ok(())
}
