//! GF(2)[X] arithmetic, LFSR simulation and combination-generator keystreams.

pub mod factor;
mod generator;
mod lfsr;
mod poly;
mod small;

pub use generator::{keystream, keystream_with, GeneratorSpec, Keystream, TapRef};
pub use lfsr::{lfsr_sequence, LfsrSpec, LinearForm};
pub use poly::{poly_is_primitive, x_power_mod, BinaryPolynomial};
pub use small::SmallModulus;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("zero polynomial cannot be used as a modulus")]
    ZeroModulus,
    #[error("constant polynomial has degree 0")]
    ConstantPolynomial,
    #[error("degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("malformed hex polynomial {0:?}")]
    BadHex(String),
    #[error("LFSR {index}: {reason}")]
    InvalidLfsr { index: usize, reason: String },
    #[error("generator: {0}")]
    InvalidGenerator(String),
    #[error("initial state has {got} bits, expected {expected}")]
    InitLength { expected: usize, got: usize },
}
