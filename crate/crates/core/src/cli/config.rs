//! Flat `key = value` configuration with optional `[section]` headers.
//!
//! Keys are stored as `section.key`. A bare key is resolved to the unique
//! section that defines it; anything else in the `problem` section is a
//! numeric problem parameter.

use std::fmt::Write as _;

use crate::divclean::EnergyUpdate;
use crate::error::{MhdError, Result};
use crate::fespace::TrianglePattern;
use crate::fluxes::{InviscidForm, MassTreatment};
use crate::problems::{make_problem, Overrides, ProblemSpec};
use crate::solver::{FluxKind, SolverOptions};
use crate::timeint::SspScheme;
use crate::viscosity::{ResidualNormalization, ViscosityModel};

const KEYS: [(&str, &[&str]); 4] = [
    ("problem", &["id"]),
    ("mesh", &["nx", "ny", "degree", "pattern", "sweep"]),
    (
        "solver",
        &[
            "flux",
            "mu_factor",
            "lambda_factor",
            "kappa_factor",
            "eta_factor",
            "viscosity",
            "c_max",
            "c_e",
            "eps",
            "normalization",
            "cfl",
            "mass",
            "form",
            "cleaning",
            "clean_energy",
            "scheme",
            "max_steps",
        ],
    ),
    ("output", &["snapshots", "monitor_samples", "vtk"]),
];

const ALIASES: [(&str, &str); 4] = [
    ("problem", "problem.id"),
    ("n_cells", "mesh.nx"),
    ("k", "mesh.degree"),
    ("n", "mesh.nx"),
];

fn cfg_err(msg: impl Into<String>) -> MhdError {
    MhdError::Config(msg.into())
}

/// Maps a possibly bare or aliased key to `section.key`.
pub fn canonical_key(key: &str) -> Result<String> {
    let key = key.trim();
    if key.is_empty() {
        return Err(cfg_err("empty key"));
    }
    if let Some((_, c)) = ALIASES.iter().find(|(a, _)| *a == key) {
        return Ok(c.to_string());
    }
    if let Some((section, name)) = key.split_once('.') {
        if section == "problem" {
            return Ok(key.to_string());
        }
        return match KEYS.iter().find(|(s, _)| *s == section) {
            Some((_, names)) if names.contains(&name) => Ok(key.to_string()),
            Some(_) => Err(cfg_err(format!("unknown key '{name}' in section [{section}]"))),
            None => Err(cfg_err(format!("unknown section [{section}]"))),
        };
    }
    for (section, names) in KEYS {
        if names.contains(&key) {
            return Ok(format!("{section}.{key}"));
        }
    }
    Ok(format!("problem.{key}"))
}

/// Parses config text into canonical `(key, value)` pairs in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(format!("line {}: unterminated section header", lineno + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|e| cfg_err(format!("line {}: {e}", lineno + 1)))?;
        let full = if section.is_empty() { k } else { format!("{section}.{k}") };
        out.push((canonical_key(&full)?, v));
    }
    Ok(out)
}

/// Parses one `key=value` assignment (as given to `--set`).
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| cfg_err(format!("expected key=value, got '{s}'")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(cfg_err(format!("missing key in '{s}'")));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Cleaning request; `Default` follows the problem's own setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleaningMode {
    Default,
    Off,
    PerStage,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub problem: String,
    pub overrides: Overrides,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Mesh resolutions of a refinement study; empty for a single run.
    pub sweep: Vec<usize>,
    pub degree: usize,
    pub pattern: TrianglePattern,
    pub flux: FluxKind,
    pub viscosity: ViscosityModel,
    pub cfl: f64,
    pub mass: MassTreatment,
    pub form: InviscidForm,
    pub cleaning: CleaningMode,
    pub clean_energy: EnergyUpdate,
    pub scheme: Option<SspScheme>,
    pub max_steps: usize,
    /// Number of uniformly spaced solution snapshots (0 disables them).
    pub snapshots: usize,
    pub monitor_samples: usize,
    pub vtk: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SimulationConfig {
            problem: "brio_wu".into(),
            overrides: Overrides::new(),
            nx: None,
            ny: None,
            sweep: Vec::new(),
            degree: o.degree,
            pattern: o.pattern,
            flux: o.flux,
            viscosity: o.viscosity,
            cfl: o.cfl,
            mass: o.mass,
            form: o.form,
            cleaning: CleaningMode::Default,
            clean_energy: o.clean_energy,
            scheme: None,
            max_steps: o.max_steps,
            snapshots: 2,
            monitor_samples: 1000,
            vtk: true,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| cfg_err(format!("invalid value '{v}' for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(cfg_err(format!("invalid boolean '{v}' for {key}"))),
    }
}

#[derive(Default)]
struct ViscosityKeys {
    kind: Option<String>,
    c_max: Option<f64>,
    c_e: Option<f64>,
    eps: Option<f64>,
    normalization: Option<ResidualNormalization>,
}

#[derive(Default)]
struct FluxKeys {
    kind: Option<String>,
    factors: [Option<f64>; 4],
}

impl SimulationConfig {
    /// Builds a config from canonical pairs; later pairs win.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut cfg = SimulationConfig::default();
        let mut visc = ViscosityKeys::default();
        let mut flux = FluxKeys::default();
        for (key, v) in pairs {
            let key = canonical_key(key)?;
            let v = v.as_str();
            match key.as_str() {
                "problem.id" => cfg.problem = v.to_string(),
                "mesh.nx" => cfg.nx = Some(parse_num(&key, v)?),
                "mesh.ny" => cfg.ny = Some(parse_num(&key, v)?),
                "mesh.degree" => cfg.degree = parse_num(&key, v)?,
                "mesh.pattern" => cfg.pattern = TrianglePattern::parse(v)?,
                "mesh.sweep" => {
                    cfg.sweep = if v.is_empty() {
                        Vec::new()
                    } else {
                        v.split(',').map(|s| parse_num(&key, s.trim())).collect::<Result<_>>()?
                    }
                }
                "solver.flux" => flux.kind = Some(v.to_string()),
                "solver.mu_factor" => flux.factors[0] = Some(parse_num(&key, v)?),
                "solver.lambda_factor" => flux.factors[1] = Some(parse_num(&key, v)?),
                "solver.kappa_factor" => flux.factors[2] = Some(parse_num(&key, v)?),
                "solver.eta_factor" => flux.factors[3] = Some(parse_num(&key, v)?),
                "solver.viscosity" => visc.kind = Some(v.to_string()),
                "solver.c_max" => visc.c_max = Some(parse_num(&key, v)?),
                "solver.c_e" => visc.c_e = Some(parse_num(&key, v)?),
                "solver.eps" => visc.eps = Some(parse_num(&key, v)?),
                "solver.normalization" => {
                    visc.normalization = Some(match v {
                        "entropy" => ResidualNormalization::EntropyDeviation,
                        "residual" => ResidualNormalization::ResidualDeviation,
                        _ => return Err(cfg_err(format!("unknown normalization '{v}'"))),
                    })
                }
                "solver.cfl" => cfg.cfl = parse_num(&key, v)?,
                "solver.mass" => {
                    cfg.mass = match v {
                        "lumped" => MassTreatment::Lumped,
                        "consistent" => MassTreatment::Consistent,
                        _ => return Err(cfg_err(format!("unknown mass treatment '{v}'"))),
                    }
                }
                "solver.form" => {
                    cfg.form = match v {
                        "weak" => InviscidForm::Weak,
                        "strong" => InviscidForm::Strong,
                        _ => return Err(cfg_err(format!("unknown inviscid form '{v}'"))),
                    }
                }
                "solver.cleaning" => {
                    cfg.cleaning = match v {
                        "default" => CleaningMode::Default,
                        "off" => CleaningMode::Off,
                        "per_stage" => CleaningMode::PerStage,
                        _ => return Err(cfg_err(format!("unknown cleaning mode '{v}'"))),
                    }
                }
                "solver.clean_energy" => {
                    cfg.clean_energy = match v {
                        "total" => EnergyUpdate::KeepTotal,
                        "internal" => EnergyUpdate::KeepInternal,
                        _ => return Err(cfg_err(format!("unknown cleaning energy update '{v}'"))),
                    }
                }
                "solver.scheme" => cfg.scheme = if v == "auto" { None } else { Some(SspScheme::parse(v)?) },
                "solver.max_steps" => cfg.max_steps = parse_num(&key, v)?,
                "output.snapshots" => cfg.snapshots = parse_num(&key, v)?,
                "output.monitor_samples" => cfg.monitor_samples = parse_num(&key, v)?,
                "output.vtk" => cfg.vtk = parse_bool(&key, v)?,
                other => {
                    let name = other.strip_prefix("problem.").expect("canonical keys are sectioned");
                    cfg.overrides.insert(name.to_string(), parse_num(&key, v)?);
                }
            }
        }
        cfg.viscosity = resolve_viscosity(&visc)?;
        cfg.flux = resolve_flux(&flux)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses config text then applies `--set` style assignments on top.
    pub fn from_text_and_sets(text: &str, sets: &[String]) -> Result<Self> {
        let mut pairs = parse_config(text)?;
        for s in sets {
            let (k, v) = parse_assignment(s)?;
            pairs.push((canonical_key(&k)?, v));
        }
        Self::from_pairs(&pairs)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.degree) {
            return Err(cfg_err(format!("degree must be 1, 2 or 3, got {}", self.degree)));
        }
        if !(self.cfl > 0.0) {
            return Err(cfg_err(format!("cfl must be positive, got {}", self.cfl)));
        }
        if self.nx == Some(0) || self.ny == Some(0) || self.sweep.contains(&0) {
            return Err(cfg_err("mesh resolution must be positive"));
        }
        if self.sweep.len() == 1 {
            return Err(cfg_err("a sweep needs at least two meshes"));
        }
        if self.monitor_samples == 1 {
            return Err(cfg_err("monitor_samples must be 0 or at least 2"));
        }
        if self.snapshots == 1 {
            return Err(cfg_err("snapshots must be 0 or at least 2"));
        }
        self.viscosity.validate()?;
        self.problem_spec()?;
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        make_problem(&self.problem, &self.overrides)
    }

    /// Cells per direction for a run with `nx` cells along x.
    fn cells(&self, problem: &ProblemSpec, nx: usize) -> [usize; 2] {
        if problem.dim == 1 {
            [nx, 1]
        } else {
            [nx, self.ny.filter(|_| self.sweep.is_empty()).unwrap_or(nx)]
        }
    }

    pub fn default_nx(problem: &ProblemSpec) -> usize {
        if problem.dim == 1 {
            640
        } else {
            64
        }
    }

    /// Solver options for every run: one entry, or one per sweep mesh.
    pub fn solver_options(&self) -> Result<(ProblemSpec, Vec<SolverOptions>)> {
        let problem = self.problem_spec()?;
        let cleaning = match self.cleaning {
            CleaningMode::Default => problem.cleaning,
            CleaningMode::Off => false,
            CleaningMode::PerStage => true,
        };
        if cleaning && problem.dim != 2 {
            return Err(cfg_err(format!("cleaning requested for 1D problem '{}'", problem.id)));
        }
        let meshes = if self.sweep.is_empty() {
            vec![self.nx.unwrap_or_else(|| Self::default_nx(&problem))]
        } else {
            self.sweep.clone()
        };
        let opts = meshes
            .into_iter()
            .map(|nx| SolverOptions {
                degree: self.degree,
                cells: self.cells(&problem, nx),
                pattern: self.pattern,
                flux: self.flux,
                viscosity: self.viscosity,
                cfl: self.cfl,
                mass: self.mass,
                form: self.form,
                cleaning,
                clean_energy: self.clean_energy,
                scheme: self.scheme,
                max_steps: self.max_steps,
            })
            .collect();
        Ok((problem, opts))
    }

    /// Non-fatal diagnostics about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let Ok((p, opts)) = self.solver_options() {
            if p.dim == 2 && matches!(self.flux, FluxKind::Resistive { .. }) && !opts[0].cleaning {
                w.push("resistive flux on a 2D problem without cleaning: divergence growth expected".into());
            }
            if p.dim == 1 && (self.ny.is_some()) {
                w.push("ny is ignored for 1D problems".into());
            }
        }
        w
    }

    /// Canonical text listing every resolved value, parseable by `parse_config`.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let problem = self.problem_spec().ok();
        let _ = writeln!(s, "[problem]");
        let _ = writeln!(s, "id = {}", self.problem);
        if let Some(p) = &problem {
            let _ = writeln!(s, "gamma = {}", p.gas.gamma);
            let _ = writeln!(s, "t_final = {}", p.t_final);
        }
        for (k, v) in &self.overrides {
            if k != "gamma" && k != "t_final" {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        let _ = writeln!(s, "\n[mesh]");
        let nx = match (self.nx, &problem) {
            (Some(n), _) => n,
            (None, Some(p)) => Self::default_nx(p),
            (None, None) => 0,
        };
        let _ = writeln!(s, "nx = {nx}");
        if let Some(ny) = self.ny {
            let _ = writeln!(s, "ny = {ny}");
        }
        let _ = writeln!(s, "degree = {}", self.degree);
        let _ = writeln!(s, "pattern = {}", self.pattern.name());
        let sweep: Vec<String> = self.sweep.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "sweep = {}", sweep.join(","));
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "flux = {}", self.flux.name());
        if let FluxKind::Resistive { mu_factor, lambda_factor, kappa_factor, eta_factor } = self.flux {
            let _ = writeln!(s, "mu_factor = {mu_factor}");
            let _ = writeln!(s, "lambda_factor = {lambda_factor}");
            let _ = writeln!(s, "kappa_factor = {kappa_factor}");
            let _ = writeln!(s, "eta_factor = {eta_factor}");
        }
        match self.viscosity {
            ViscosityModel::None => {
                let _ = writeln!(s, "viscosity = none");
            }
            ViscosityModel::Constant { eps } => {
                let _ = writeln!(s, "viscosity = constant\neps = {eps}");
            }
            ViscosityModel::FirstOrder { c_max } => {
                let _ = writeln!(s, "viscosity = first_order\nc_max = {c_max}");
            }
            ViscosityModel::EntropyViscosity { c_max, c_e, normalization } => {
                let _ = writeln!(
                    s,
                    "viscosity = entropy\nc_max = {c_max}\nc_e = {c_e}\nnormalization = {}",
                    normalization.name()
                );
            }
        }
        let _ = writeln!(s, "cfl = {}", self.cfl);
        let mass = match self.mass {
            MassTreatment::Lumped => "lumped",
            MassTreatment::Consistent => "consistent",
        };
        let form = match self.form {
            InviscidForm::Weak => "weak",
            InviscidForm::Strong => "strong",
        };
        let _ = writeln!(s, "mass = {mass}\nform = {form}");
        let cleaning = match (self.cleaning, &problem) {
            (CleaningMode::Off, _) => "off",
            (CleaningMode::PerStage, _) => "per_stage",
            (CleaningMode::Default, Some(p)) if p.cleaning => "per_stage",
            (CleaningMode::Default, Some(_)) => "off",
            (CleaningMode::Default, None) => "default",
        };
        let _ = writeln!(s, "cleaning = {cleaning}");
        let _ = writeln!(s, "clean_energy = {}", self.clean_energy.name());
        let _ = writeln!(s, "scheme = {}", self.scheme.map_or("auto", |sc| sc.name()));
        let _ = writeln!(s, "max_steps = {}", self.max_steps);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "snapshots = {}", self.snapshots);
        let _ = writeln!(s, "monitor_samples = {}", self.monitor_samples);
        let _ = writeln!(s, "vtk = {}", self.vtk);
        s
    }
}

fn resolve_viscosity(k: &ViscosityKeys) -> Result<ViscosityModel> {
    let d = ViscosityModel::entropy_viscosity();
    let (d_cmax, d_ce, d_norm) = match d {
        ViscosityModel::EntropyViscosity { c_max, c_e, normalization } => (c_max, c_e, normalization),
        _ => unreachable!(),
    };
    let kind = k.kind.as_deref().unwrap_or("entropy");
    let unused = |name: &str, present: bool| {
        if present {
            Err(cfg_err(format!("{name} does not apply to viscosity '{kind}'")))
        } else {
            Ok(())
        }
    };
    let model = match kind {
        "none" => {
            unused("c_max", k.c_max.is_some())?;
            unused("c_e", k.c_e.is_some())?;
            unused("eps", k.eps.is_some())?;
            ViscosityModel::None
        }
        "constant" => {
            unused("c_max", k.c_max.is_some())?;
            unused("c_e", k.c_e.is_some())?;
            ViscosityModel::Constant {
                eps: k.eps.ok_or_else(|| cfg_err("constant viscosity needs eps"))?,
            }
        }
        "first_order" => {
            unused("c_e", k.c_e.is_some())?;
            unused("eps", k.eps.is_some())?;
            ViscosityModel::FirstOrder { c_max: k.c_max.unwrap_or(d_cmax) }
        }
        "entropy" => {
            unused("eps", k.eps.is_some())?;
            ViscosityModel::EntropyViscosity {
                c_max: k.c_max.unwrap_or(d_cmax),
                c_e: k.c_e.unwrap_or(d_ce),
                normalization: k.normalization.unwrap_or(d_norm),
            }
        }
        other => return Err(cfg_err(format!("unknown viscosity model '{other}'"))),
    };
    if k.normalization.is_some() && kind != "entropy" {
        return Err(cfg_err(format!("normalization does not apply to viscosity '{kind}'")));
    }
    Ok(model)
}

fn resolve_flux(k: &FluxKeys) -> Result<FluxKind> {
    let kind = k.kind.as_deref().unwrap_or("monolithic");
    let any_factor = k.factors.iter().any(Option::is_some);
    match kind {
        "monolithic" | "monolithic_no_mass" if any_factor => {
            Err(cfg_err(format!("resistive factors do not apply to flux '{kind}'")))
        }
        "monolithic" => Ok(FluxKind::Monolithic),
        "monolithic_no_mass" => Ok(FluxKind::MonolithicNoMass),
        "resistive" => {
            let [mu, lambda, kappa, eta] = k.factors;
            Ok(FluxKind::Resistive {
                mu_factor: mu.unwrap_or(1.0),
                lambda_factor: lambda.unwrap_or(0.0),
                kappa_factor: kappa.unwrap_or(0.0),
                eta_factor: eta.unwrap_or(1.0),
            })
        }
        other => Err(cfg_err(format!("unknown flux '{other}'"))),
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_bare_keys() {
        let text = "problem = vortex\n[mesh]\nnx = 32 # cells\n[solver]\ncfl=0.2\n[problem]\np0 = 2\n";
        let pairs = parse_config(text).unwrap();
        assert_eq!(pairs[0], ("problem.id".to_string(), "vortex".to_string()));
        assert_eq!(pairs[1], ("mesh.nx".to_string(), "32".to_string()));
        let cfg = SimulationConfig::from_pairs(&pairs).unwrap();
        assert_eq!(cfg.problem, "vortex");
        assert_eq!(cfg.nx, Some(32));
        assert_eq!(cfg.cfl, 0.2);
        assert_eq!(cfg.overrides["p0"], 2.0);
    }

    #[test]
    fn bare_problem_parameter() {
        let cfg = SimulationConfig::from_text_and_sets("", &["gamma=1.4".into(), "t_final = 0.02".into()]).unwrap();
        assert_eq!(cfg.overrides["gamma"], 1.4);
        assert_eq!(cfg.problem_spec().unwrap().t_final, 0.02);
    }

    #[test]
    fn rejects_bad_input() {
        for sets in [
            vec!["problem=nope"],
            vec!["mesh.bogus=1"],
            vec!["[x]"],
            vec!["cfl=-1"],
            vec!["viscosity=first_order", "c_e=2"],
            vec!["flux=monolithic", "kappa_factor=1"],
            vec!["problem=vortex", "wobble=1"],
            vec!["problem=brio_wu", "cleaning=per_stage"],
            vec!["sweep=32"],
        ] {
            let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
            let r = SimulationConfig::from_text_and_sets("", &sets).and_then(|c| c.solver_options().map(|_| c));
            assert!(matches!(r, Err(MhdError::Config(_)) | Err(MhdError::UnknownProblem(_))), "{sets:?}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let cfg = SimulationConfig::from_text_and_sets(
            "[problem]\nid = rotor\nr0 = 0.12\n[solver]\nflux = resistive\nkappa_factor = 1\nviscosity = first_order\n",
            &["nx=24".into(), "clean_energy=internal".into()],
        )
        .unwrap();
        let again = SimulationConfig::from_text_and_sets(&cfg.echo(), &[]).unwrap();
        assert_eq!(again.solver_options().unwrap(), cfg.solver_options().unwrap());
        assert_eq!(again.echo(), cfg.echo());
    }

    #[test]
    fn resistive_warning() {
        let cfg = SimulationConfig::from_text_and_sets("", &["problem=rotor".into(), "flux=resistive".into(), "cleaning=off".into()])
            .unwrap();
        assert_eq!(cfg.warnings().len(), 1);
    }
}
