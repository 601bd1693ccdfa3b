//! Fixed-width arithmetic modulo a polynomial of degree `1..=64`.
//!
//! Residues are `u64` coefficient words. This is the fast path used for
//! LFSR linear forms, where every modulus is a feedback polynomial.

use super::poly::{clmul64_wide, BinaryPolynomial};
use super::Gf2Error;

/// The modulus `X^degree + low`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SmallModulus {
    low: u64,
    degree: u32,
}

impl SmallModulus {
    pub fn new(p: &BinaryPolynomial) -> Result<Self, Gf2Error> {
        match p.degree() {
            None => Err(Gf2Error::ZeroModulus),
            Some(0) => Err(Gf2Error::ConstantPolynomial),
            Some(d) if d > 64 => Err(Gf2Error::DegreeTooLarge { degree: d, max: 64 }),
            Some(d) => {
                let low = if d == 64 {
                    p.low_u64()
                } else {
                    p.low_u64() & ((1u64 << d) - 1)
                };
                Ok(Self {
                    low,
                    degree: d as u32,
                })
            }
        }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Coefficients below the leading term.
    #[inline]
    pub fn low(&self) -> u64 {
        self.low
    }

    #[inline]
    fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    /// `r * X mod P`.
    #[inline]
    pub fn mul_x(&self, r: u64) -> u64 {
        let top = (r >> (self.degree - 1)) & 1;
        let shifted = if self.degree == 64 {
            r << 1
        } else {
            (r << 1) & self.mask()
        };
        shifted ^ (self.low & top.wrapping_neg())
    }

    /// Reduces a 128-bit product.
    #[inline]
    pub fn reduce(&self, mut v: u128) -> u64 {
        let d = self.degree;
        let low = self.low as u128;
        while v >> d != 0 {
            let top = 127 - v.leading_zeros();
            let shift = top - d;
            v ^= 1u128 << top;
            v ^= low << shift;
        }
        v as u64
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(clmul64_wide(a, b))
    }

    /// `X^t mod P`.
    pub fn x_pow(&self, t: u64) -> u64 {
        let mut acc = 1u64;
        let x = self.mul_x(1);
        for bit in (0..64 - t.leading_zeros()).rev() {
            acc = self.mul(acc, acc);
            if (t >> bit) & 1 == 1 {
                acc = self.mul(acc, x);
            }
        }
        acc
    }

    pub fn to_poly(&self) -> BinaryPolynomial {
        BinaryPolynomial::from_u64(self.low).add(&BinaryPolynomial::monomial(self.degree as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::x_power_mod;
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn agrees_with_generic_route(low in any::<u64>(), d in 1u32..=64, t in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
            let mask = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
            let p = BinaryPolynomial::from_u64(low & mask).add(&BinaryPolynomial::monomial(d as usize));
            let m = SmallModulus::new(&p).unwrap();
            prop_assert_eq!(m.to_poly(), p.clone());
            let t = t >> 20;
            prop_assert_eq!(BinaryPolynomial::from_u64(m.x_pow(t)), x_power_mod(t, &p).unwrap());
            let (a, b) = (a & mask, b & mask);
            let prod = BinaryPolynomial::from_u64(a).mul(&BinaryPolynomial::from_u64(b)).rem(&p).unwrap();
            prop_assert_eq!(BinaryPolynomial::from_u64(m.mul(a, b)), prod);
            let ax = BinaryPolynomial::from_u64(a).mul(&BinaryPolynomial::monomial(1)).rem(&p).unwrap();
            prop_assert_eq!(BinaryPolynomial::from_u64(m.mul_x(a)), ax);
        }
    }
}
