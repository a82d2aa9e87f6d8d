use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Contract violations raised by the planning core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its valid range.
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// An integration interval ends before it starts.
    ReversedInterval { t0: f64, t1: f64 },
    /// The closed form only covers the ideal sawtooth.
    RampNotSupported { ramp_fraction: f64 },
    /// Planning needs at least one reflection.
    NoReflections,
    /// A grid passed to a scan or map is empty.
    EmptyGrid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value, expected } => {
                write!(f, "invalid {name} = {value}, expected {expected}")
            }
            Error::ReversedInterval { t0, t1 } => {
                write!(f, "interval end {t1} precedes start {t0}")
            }
            Error::RampNotSupported { ramp_fraction } => write!(
                f,
                "closed form needs an ideal sawtooth, got ramp fraction {ramp_fraction}"
            ),
            Error::NoReflections => f.write_str("network profile has no reflections"),
            Error::EmptyGrid(which) => write!(f, "empty {which} grid"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, expected })
    }
}
