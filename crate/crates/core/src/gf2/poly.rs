//! Arbitrary-degree polynomials over GF(2).

use std::fmt;

use super::factor::prime_factors;
use super::Gf2Error;

/// A polynomial over GF(2). Bit `i` of the coefficient words is the
/// coefficient of `X^i`. The word vector never has trailing zero words, so
/// the zero polynomial is the empty vector and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinaryPolynomial {
    words: Vec<u64>,
}

impl BinaryPolynomial {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self { words: vec![1] }
    }

    /// `X^k`.
    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0; k / 64 + 1];
        words[k / 64] = 1 << (k % 64);
        Self { words }
    }

    pub fn from_u64(bits: u64) -> Self {
        Self::from_words(vec![bits])
    }

    pub fn from_u128(bits: u128) -> Self {
        Self::from_words(vec![bits as u64, (bits >> 64) as u64])
    }

    pub fn from_words(mut words: Vec<u64>) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        Self { words }
    }

    /// Sum of `X^e` over the given exponents (repeated exponents cancel).
    pub fn from_exponents<I: IntoIterator<Item = usize>>(exps: I) -> Self {
        let mut words = Vec::new();
        for e in exps {
            if words.len() <= e / 64 {
                words.resize(e / 64 + 1, 0);
            }
            words[e / 64] ^= 1 << (e % 64);
        }
        Self::from_words(words)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words == [1]
    }

    /// Index of the highest set coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Exponents with a nonzero coefficient, ascending.
    pub fn exponents(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (k, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(k * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    /// Low 64 coefficients. Callers must check the degree first.
    pub fn low_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Coefficients as a `u128`, or `None` if the degree exceeds 127.
    pub fn to_u128(&self) -> Option<u128> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0] as u128),
            2 => Some(self.words[0] as u128 | (self.words[1] as u128) << 64),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w ^= s;
        }
        Self::from_words(words)
    }

    /// Carry-less product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u64; self.words.len() + other.words.len()];
        for (i, &a) in self.words.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.words.iter().enumerate() {
                let (lo, hi) = clmul64(a, b);
                out[i + j] ^= lo;
                out[i + j + 1] ^= hi;
            }
        }
        Self::from_words(out)
    }

    pub fn square(&self) -> Self {
        let mut out = vec![0u64; 2 * self.words.len()];
        for (i, &w) in self.words.iter().enumerate() {
            out[2 * i] = spread_bits(w as u32);
            out[2 * i + 1] = spread_bits((w >> 32) as u32);
        }
        Self::from_words(out)
    }

    /// Quotient and remainder of division by `modulus`.
    pub fn div_rem(&self, modulus: &Self) -> Result<(Self, Self), Gf2Error> {
        let md = modulus.degree().ok_or(Gf2Error::ZeroModulus)?;
        let mut rem = self.words.clone();
        let Some(ad) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if ad < md {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![0u64; (ad - md) / 64 + 1];
        for i in (md..=ad).rev() {
            if (rem[i / 64] >> (i % 64)) & 1 == 1 {
                let shift = i - md;
                quot[shift / 64] |= 1 << (shift % 64);
                xor_shifted(&mut rem, &modulus.words, shift);
            }
        }
        Ok((Self::from_words(quot), Self::from_words(rem)))
    }

    /// Remainder modulo `modulus`; degree of the result is below the modulus degree.
    pub fn rem(&self, modulus: &Self) -> Result<Self, Gf2Error> {
        let md = modulus.degree().ok_or(Gf2Error::ZeroModulus)?;
        let Some(ad) = self.degree() else {
            return Ok(Self::zero());
        };
        if ad < md {
            return Ok(self.clone());
        }
        let mut rem = self.words.clone();
        for i in (md..=ad).rev() {
            if (rem[i / 64] >> (i % 64)) & 1 == 1 {
                xor_shifted(&mut rem, &modulus.words, i - md);
            }
        }
        Ok(Self::from_words(rem))
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Result<Self, Gf2Error> {
        self.mul(other).rem(modulus)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a
    }

    /// Parses `0x`-prefixed or bare hexadecimal; bit `i` of the number is the
    /// coefficient of `X^i`.
    pub fn from_hex(s: &str) -> Result<Self, Gf2Error> {
        let s = s.trim();
        let digits = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        if digits.is_empty() {
            return Err(Gf2Error::BadHex(s.to_string()));
        }
        let mut words = vec![0u64; digits.len().div_ceil(16)];
        for (k, c) in digits.chars().rev().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Gf2Error::BadHex(s.to_string()))? as u64;
            words[k / 16] |= v << (4 * (k % 16));
        }
        Ok(Self::from_words(words))
    }

    /// Lowercase `0x`-prefixed hex, no leading zeros (`0x0` for zero).
    pub fn to_hex(&self) -> String {
        let Some(top) = self.words.last() else {
            return "0x0".to_string();
        };
        let mut s = format!("0x{top:x}");
        for w in self.words.iter().rev().skip(1) {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }
}

/// `X^t mod modulus` by square-and-multiply.
///
/// Its coefficient vector expresses bit `s_t` of any sequence satisfying the
/// recurrence with this characteristic polynomial as a linear combination of
/// the initial bits `s_0, …, s_{l-1}`.
pub fn x_power_mod(t: u64, modulus: &BinaryPolynomial) -> Result<BinaryPolynomial, Gf2Error> {
    let md = modulus.degree().ok_or(Gf2Error::ZeroModulus)?;
    if md == 0 {
        return Ok(BinaryPolynomial::zero());
    }
    let x = BinaryPolynomial::monomial(1).rem(modulus)?;
    let mut acc = BinaryPolynomial::one();
    for bit in (0..64 - t.leading_zeros()).rev() {
        acc = acc.square().rem(modulus)?;
        if (t >> bit) & 1 == 1 {
            acc = acc.mul(&x).rem(modulus)?;
        }
    }
    Ok(acc)
}

/// Primitivity test for degrees `1..=64`: `X` must have multiplicative
/// order exactly `2^l - 1` modulo `p`, which also forces irreducibility.
pub fn poly_is_primitive(p: &BinaryPolynomial) -> Result<bool, Gf2Error> {
    let l = match p.degree() {
        None => return Err(Gf2Error::ZeroModulus),
        Some(0) => return Err(Gf2Error::ConstantPolynomial),
        Some(l) if l > 64 => return Err(Gf2Error::DegreeTooLarge { degree: l, max: 64 }),
        Some(l) => l,
    };
    if !p.coeff(0) {
        return Ok(false);
    }
    let order = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
    if !x_power_mod(order, p)?.is_one() {
        return Ok(false);
    }
    for q in prime_factors(order) {
        if x_power_mod(order / q, p)?.is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

impl fmt::Debug for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryPolynomial({self})")
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps = self.exponents();
        if exps.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = exps
            .iter()
            .rev()
            .map(|&e| match e {
                0 => "1".to_string(),
                1 => "X".to_string(),
                e => format!("X^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// 64x64 -> 128 carry-less multiply, returned as (low, high).
#[inline]
pub(crate) fn clmul64(a: u64, b: u64) -> (u64, u64) {
    let r = clmul64_wide(a, b);
    (r as u64, (r >> 64) as u64)
}

#[inline]
pub(crate) fn clmul64_wide(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let wide = a as u128;
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= wide << i;
        b &= b - 1;
    }
    acc
}

/// Interleaves zeros between the bits of `x`: bit i moves to bit 2i.
fn spread_bits(x: u32) -> u64 {
    let mut x = x as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

/// `dst ^= src << shift`, treating both as little-endian word vectors.
fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let ws = shift / 64;
    let bs = shift % 64;
    for (k, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let i = k + ws;
        if i < dst.len() {
            dst[i] ^= w << bs;
        }
        if bs != 0 && i + 1 < dst.len() {
            dst[i + 1] ^= w >> (64 - bs);
        }
    }
}
