use std::fmt;

use bec_dephasing::Error;

/// Process exit codes.
pub mod code {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const INCONCLUSIVE: i32 = 5;
    pub const VALIDATION: i32 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: code::IO,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: code::CONFIG,
            message: message.into(),
        }
    }

    pub fn inconclusive(message: impl Into<String>) -> Self {
        Self {
            code: code::INCONCLUSIVE,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: code::VALIDATION,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical { .. } | Error::Integration { .. } => code::NUMERICAL,
            Error::Domain(_) | Error::OutOfRange { .. } | Error::Precondition(_) | Error::Config(_) => code::CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
