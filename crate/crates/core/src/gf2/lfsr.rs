use crate::bits::BitSeq;

use super::poly::{poly_is_primitive, BinaryPolynomial};
use super::small::SmallModulus;
use super::Gf2Error;

/// One LFSR in Fibonacci form: `s_{t+l} = sum_{i<l} c_i s_{t+i}` where
/// `c_i` is the coefficient of `X^i` in the feedback polynomial. The
/// initial state is `(s_0, …, s_{l-1})`, bit `i` of the state word is `s_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrSpec {
    length: usize,
    feedback: BinaryPolynomial,
    taps: Vec<usize>,
    modulus: SmallModulus,
}

impl LfsrSpec {
    /// Validates primitivity of the feedback polynomial and the tap list.
    pub fn new(feedback: BinaryPolynomial, taps: Vec<usize>) -> Result<Self, Gf2Error> {
        Self::build(feedback, taps, true)
    }

    /// Skips the primitivity check. Simulation and the attack only need the
    /// recurrence; primitivity matters for period and multiple-density claims.
    pub fn new_unchecked(feedback: BinaryPolynomial, taps: Vec<usize>) -> Result<Self, Gf2Error> {
        Self::build(feedback, taps, false)
    }

    fn build(feedback: BinaryPolynomial, taps: Vec<usize>, check: bool) -> Result<Self, Gf2Error> {
        let bad = |reason: String| Gf2Error::InvalidLfsr { index: 0, reason };
        let modulus = SmallModulus::new(&feedback)?;
        let length = modulus.degree() as usize;
        if check && !poly_is_primitive(&feedback)? {
            return Err(bad(format!("feedback {feedback} is not primitive")));
        }
        for (k, &p) in taps.iter().enumerate() {
            if p >= length {
                return Err(bad(format!("tap {p} outside [0, {length})")));
            }
            if taps[..k].contains(&p) {
                return Err(bad(format!("duplicate tap {p}")));
            }
        }
        Ok(Self {
            length,
            feedback,
            taps,
            modulus,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn feedback(&self) -> &BinaryPolynomial {
        &self.feedback
    }

    pub fn taps(&self) -> &[usize] {
        &self.taps
    }

    pub fn modulus(&self) -> &SmallModulus {
        &self.modulus
    }

    pub fn state_mask(&self) -> u64 {
        if self.length == 64 {
            u64::MAX
        } else {
            (1u64 << self.length) - 1
        }
    }

    /// First `count` sequence bits from the initial state `init`.
    pub fn sequence(&self, init: u64, count: usize) -> BitSeq {
        let l = self.length as u32;
        let fb = self.modulus.low();
        let mut state = init & self.state_mask();
        let mut raw = Vec::with_capacity(count.div_ceil(64));
        let mut word = 0u64;
        for t in 0..count {
            word |= (state & 1) << (t & 63);
            let next = (state & fb).count_ones() as u64 & 1;
            state = (state >> 1) | (next << (l - 1));
            if t & 63 == 63 {
                raw.push(word);
                word = 0;
            }
        }
        if count & 63 != 0 {
            raw.push(word);
        }
        BitSeq::from_words(raw, count)
    }

    /// `s_t` as a linear form over the initial state: `X^t mod P`.
    pub fn linear_form(&self, t: u64) -> LinearForm {
        LinearForm::new(self.modulus.x_pow(t), self.length as u32)
    }
}

/// First `count` bits of the sequence generated from `init`, which must
/// have exactly `spec.length()` bits.
pub fn lfsr_sequence(spec: &LfsrSpec, init: &BitSeq, count: usize) -> Result<BitSeq, Gf2Error> {
    if init.len() != spec.length() {
        return Err(Gf2Error::InitLength {
            expected: spec.length(),
            got: init.len(),
        });
    }
    Ok(spec.sequence(init.window(0, spec.length()), count))
}

/// A linear combination of state bits, as a mask of width at most 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearForm {
    mask: u64,
    width: u32,
}

impl LinearForm {
    pub fn new(mask: u64, width: u32) -> Self {
        assert!(width <= 64);
        debug_assert!(width == 64 || mask >> width == 0);
        Self { mask, width }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn eval(&self, state: u64) -> bool {
        (self.mask & state).count_ones() & 1 == 1
    }
}
