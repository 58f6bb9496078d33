use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid power-delay profile: {0}")]
    InvalidProfile(String),

    #[error("static channel, constraint vacuous")]
    StaticChannel,

    #[error("spacing exceeds effective bandwidth ({delta_f} Hz > {bw_alpha} Hz)")]
    SpacingExceedsBandwidth { bw_alpha: f64, delta_f: f64 },

    #[error("gap approximation invalid for target BER {0}")]
    GapApproximationInvalid(f64),

    #[error("no modulation: BER undefined for zero bits per symbol")]
    NoModulation,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("no feasible numerology")]
    NoFeasibleNumerology,

    #[error("invalid growth model: {0}")]
    InvalidModel(String),

    #[error("logistic fit did not converge (residual {residual:.6e})")]
    FitDidNotConverge { best: [f64; 4], residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}", fmt_config(*line, message))]
    Config {
        line: Option<usize>,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

fn fmt_config(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}: {message}"),
        None => format!("config: {message}"),
    }
}
