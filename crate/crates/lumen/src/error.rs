use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("unsupported schema `{schema}` version {version}")]
    UnsupportedSchema { schema: String, version: u32 },
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("map LED `{0}` has no ground-truth entry")]
    MissingTruth(String),
    #[error("map contains no LEDs to evaluate")]
    EmptyMap,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Top-level failure of a CLI run, categorized for the user-facing message.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] FormatError),
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    NoObservations(String),
    #[error("{0}")]
    Simulation(#[from] lumen_core::SimulationError),
    #[error("{0}")]
    Estimation(#[from] lumen_core::EstimatorError),
    #[error("{0}")]
    Evaluation(#[from] EvalError),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(FormatError::Io(_)) => "io",
            CliError::Parse(_) => "parse",
            CliError::Config(_) => "config",
            CliError::NoObservations(_) => "no observations",
            CliError::Simulation(_) => "simulation",
            CliError::Estimation(_) => "estimation",
            CliError::Evaluation(_) => "evaluation",
        }
    }

    /// 1 for I/O failures, 3 for bad or insufficient input data.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "io" => 1,
            _ => 3,
        }
    }
}
