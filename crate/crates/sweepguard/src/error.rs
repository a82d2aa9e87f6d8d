use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sweepguard_core::Error),

    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: String,
    },

    #[error("payload does not fit the constellation: {0}")]
    Payload(String),

    #[error("demodulation failed: {0}")]
    Demodulation(String),

    #[error("config {path}: {message}")]
    Config { path: String, message: String },

    #[error("no compatible sweep frequency for the configured reflections")]
    NoCompatibleFrequency,

    #[error("missing input for `{command}`: {what}")]
    MissingInput { command: &'static str, what: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::MissingInput { .. } => 2,
            Error::Core(_) | Error::InvalidParameter { .. } | Error::Payload(_) => 3,
            Error::NoCompatibleFrequency => 4,
            Error::Demodulation(_) => 5,
            Error::Io(_) => 6,
        }
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64, expected: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: expected.to_string(),
        })
    }
}
