use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MhdError {
    #[error("nonpositive density {rho}")]
    NonpositiveDensity { rho: f64 },
    #[error("nonpositive internal energy {rho_e} (rho = {rho})")]
    NonpositiveInternalEnergy { rho: f64, rho_e: f64 },
    #[error("nonpositive pressure {p}")]
    NonpositivePressure { p: f64 },
    #[error("invalid gas model: {0}")]
    InvalidGas(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unknown boundary marker {0}")]
    UnknownBoundaryMarker(usize),
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("periodic Poisson problem requires a mean constraint")]
    NullspaceUnpinned,
    #[error("inadmissible state at {location}: {source}")]
    Inadmissible {
        location: String,
        #[source]
        source: Box<MhdError>,
    },
    #[error("stage {stage}: {source}")]
    StageFailure {
        stage: usize,
        #[source]
        source: Box<MhdError>,
    },
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("unknown wave '{0}'")]
    UnknownWave(String),
    #[error("inadmissible initial condition at ({x}, {y}): {source}")]
    InadmissibleIc {
        x: f64,
        y: f64,
        #[source]
        source: Box<MhdError>,
    },
    #[error("missing gradient data: {0}")]
    MissingGradient(String),
    #[error("insufficient entropy history")]
    InsufficientHistory,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl MhdError {
    pub fn at(self, location: impl Into<String>) -> MhdError {
        MhdError::Inadmissible {
            location: location.into(),
            source: Box::new(self),
        }
    }

    /// True for errors that signal loss of admissibility of the discrete state.
    pub fn is_admissibility(&self) -> bool {
        match self {
            MhdError::NonpositiveDensity { .. }
            | MhdError::NonpositiveInternalEnergy { .. }
            | MhdError::NonpositivePressure { .. } => true,
            MhdError::Inadmissible { source, .. } | MhdError::StageFailure { source, .. } => {
                source.is_admissibility()
            }
            _ => false,
        }
    }
}

impl From<std::io::Error> for MhdError {
    fn from(e: std::io::Error) -> Self {
        MhdError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MhdError>;
