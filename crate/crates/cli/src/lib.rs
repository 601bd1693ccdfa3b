//! Command implementations and file formats behind the `comb-attack` binary.

pub mod commands;
pub mod formats;

use std::fmt;

use comb_attack::attack::AttackError;

/// Environment variable naming the directory for multiple caches.
pub const CACHE_DIR_ENV: &str = "COMB_ATTACK_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Exhausted,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Validation => 2,
            ErrorKind::Exhausted => 3,
            ErrorKind::Invariant => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        let kind = match e {
            AttackError::Exhausted | AttackError::NoSurvivor | AttackError::Ambiguous(_) => {
                ErrorKind::Exhausted
            }
            AttackError::Invariant(_) => ErrorKind::Invariant,
            _ => ErrorKind::Validation,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::validation(e.to_string())
    }
}
