use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A mark or other scalar argument outside its admissible range.
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid parameter `{key}`: {msg}")]
    Parameter { key: &'static str, msg: String },

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("hard-core violation: points {i} and {j} are {distance} apart (hard-core distance {hc})")]
    HardcoreViolation {
        i: usize,
        j: usize,
        distance: f64,
        hc: f64,
    },

    #[error("growth function violates m <= g(m) <= K at m = {m} (g(m) = {gm})")]
    Growth { m: f64, gm: f64 },

    #[error("enumeration did not terminate within {cap} terms")]
    Enumeration { cap: u32 },

    #[error("pattern csv row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("unknown policy `{spec}`; valid forms: french:<d>, french:dstar, french:horizon, german:<d>:<f>, tilde:<n>, keepall, removeall")]
    PolicySpec { spec: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) | Error::Enumeration { .. } => 3,
            _ => 2,
        }
    }
}
