//! State recovery for LFSR combination generators.
//!
//! The generator is a bank of LFSRs whose tapped bits feed a Boolean
//! function. The attack guesses the state of one group of registers and
//! keeps only keystream relations that a weight-4 multiple of the remaining
//! registers' feedback polynomials makes cancel on their inputs; the right
//! guess shows a measurable bias, and all guesses are scored at once with a
//! Walsh-Hadamard transform.
//!
//! Modules, bottom-up:
//! - [`gf2`]: polynomials over GF(2), LFSRs, generator specs and keystreams.
//! - [`boolfn`] and [`transform`]: Boolean-function spectra and the FWHT.
//! - [`multiples`]: weight-4 multiple search.
//! - [`attack`]: planning, equation harvesting, scoring and staged recovery.

pub mod attack;
pub mod bits;
pub mod boolfn;
pub mod exec;
pub mod gf2;
pub mod multiples;
pub mod transform;

pub use bits::BitSeq;
pub use boolfn::BooleanFunction;
pub use exec::Backend;
pub use gf2::{BinaryPolynomial, GeneratorSpec, Keystream, LfsrSpec};
