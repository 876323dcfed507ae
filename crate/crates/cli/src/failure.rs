//! Errors carried to the process exit code.

use std::fmt;

use bayesel::Error;

pub const INPUT: u8 = 2;
pub const INIT: u8 = 3;
pub const NUMERIC: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(e: impl fmt::Display) -> Self {
        Self { code: INPUT, message: e.to_string() }
    }

    pub fn init(e: impl fmt::Display) -> Self {
        Self { code: INIT, message: e.to_string() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self { code: INPUT, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InitInfeasible => INIT,
            Error::RootNotFound { .. } | Error::NonFinite(_) => NUMERIC,
            Error::Dimension(_) | Error::TooShort { .. } | Error::EmptyTrace { .. } | Error::Invalid(_) => INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
