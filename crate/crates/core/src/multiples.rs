//! Weight-4 multiples `1 + X^t1 + X^t2 + X^t3` of a product of feedback
//! polynomials.
//!
//! The search tabulates `r_a = X^a mod M` for `a ≤ D`, sorted by residue,
//! and for each pair `a < b` looks up every `c > b` with
//! `r_c = 1 + r_a + r_b`. Time is `O(D²)` lookups and memory `O(D)`
//! residues. A discrete-logarithm search would reach larger degrees, but
//! collision search is exact and plenty fast at desk scale.

use std::fmt;

use thiserror::Error;

use crate::exec::Backend;
use crate::gf2::{BinaryPolynomial, LfsrSpec};

/// Largest modulus degree the `u128` residue table handles.
pub const MAX_MODULUS_DEGREE: usize = 127;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultipleError {
    #[error("empty LFSR group")]
    EmptyGroup,
    #[error("feedback polynomials {0} and {1} of the group are not coprime")]
    NotCoprime(usize, usize),
    #[error("modulus degree {0} outside the supported range 1..={MAX_MODULUS_DEGREE}")]
    ModulusDegree(usize),
    #[error("degree bound {0} is below 3")]
    DegreeBound(u64),
    #[error("exponents must satisfy 0 < t1 < t2 < t3, got ({0}, {1}, {2})")]
    BadExponents(u64, u64, u64),
}

/// `1 + X^t1 + X^t2 + X^t3` with `0 < t1 < t2 < t3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight4Multiple {
    t1: u64,
    t2: u64,
    t3: u64,
}

impl Weight4Multiple {
    pub fn new(t1: u64, t2: u64, t3: u64) -> Result<Self, MultipleError> {
        if 0 < t1 && t1 < t2 && t2 < t3 {
            Ok(Self { t1, t2, t3 })
        } else {
            Err(MultipleError::BadExponents(t1, t2, t3))
        }
    }

    pub fn t1(&self) -> u64 {
        self.t1
    }

    pub fn t2(&self) -> u64 {
        self.t2
    }

    /// Degree, and the span of keystream one relation covers.
    pub fn t3(&self) -> u64 {
        self.t3
    }

    /// The four offsets `0, t1, t2, t3`.
    pub fn offsets(&self) -> [u64; 4] {
        [0, self.t1, self.t2, self.t3]
    }

    pub fn polynomial(&self) -> BinaryPolynomial {
        BinaryPolynomial::from_exponents(self.offsets().map(|e| e as usize))
    }

    fn sort_key(&self) -> (u64, u64, u64) {
        (self.t3, self.t1, self.t2)
    }
}

impl fmt::Display for Weight4Multiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.t1, self.t2, self.t3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleSearchReport {
    pub modulus: BinaryPolynomial,
    pub degree_bound: u64,
    /// Sorted by `t3`, then `t1`, then `t2`.
    pub found: Vec<Weight4Multiple>,
    pub expected_count: f64,
}

/// Product of the group's feedback polynomials; its weight-4 multiples are
/// the common multiples of every member.
pub fn product_modulus(group: &[&LfsrSpec]) -> Result<BinaryPolynomial, MultipleError> {
    if group.is_empty() {
        return Err(MultipleError::EmptyGroup);
    }
    for i in 0..group.len() {
        for k in 0..i {
            if !group[i].feedback().gcd(group[k].feedback()).is_one() {
                return Err(MultipleError::NotCoprime(k, i));
            }
        }
    }
    Ok(group
        .iter()
        .fold(BinaryPolynomial::one(), |acc, l| acc.mul(l.feedback())))
}

/// Heuristic count of weight-4 multiples of degree `≤ D` of a degree-`m2`
/// modulus: `D³ / (6·2^{m2})`.
pub fn expected_count(m2: u32, degree_bound: f64) -> f64 {
    degree_bound.powi(3) / (6.0 * 2f64.powi(m2 as i32))
}

/// Degree at which one multiple is expected: `(6·2^{m2})^{1/3}`.
pub fn min_degree_estimate(m2: u32) -> f64 {
    (6.0 * 2f64.powi(m2 as i32)).cbrt()
}

/// All weight-4 multiples of `modulus` with `t3 ≤ degree_bound`, keeping the
/// first `limit` in sorted order.
pub fn find_weight4(
    modulus: &BinaryPolynomial,
    degree_bound: u64,
    limit: usize,
) -> Result<MultipleSearchReport, MultipleError> {
    find_weight4_with(Backend::default(), modulus, degree_bound, limit)
}

pub fn find_weight4_with(
    backend: Backend,
    modulus: &BinaryPolynomial,
    degree_bound: u64,
    limit: usize,
) -> Result<MultipleSearchReport, MultipleError> {
    let deg = modulus.degree().unwrap_or(0);
    if deg == 0 || deg > MAX_MODULUS_DEGREE {
        return Err(MultipleError::ModulusDegree(deg));
    }
    if degree_bound < 3 {
        return Err(MultipleError::DegreeBound(degree_bound));
    }
    let m = modulus.to_u128().expect("degree checked");
    let top = 1u128 << deg;
    let d = degree_bound as usize;

    let mut residues = Vec::with_capacity(d + 1);
    let mut r = 1u128;
    for _ in 0..=d {
        residues.push(r);
        r <<= 1;
        if r & top != 0 {
            r ^= m;
        }
    }
    let mut index: Vec<(u128, u32)> = residues
        .iter()
        .enumerate()
        .skip(1)
        .map(|(a, &r)| (r, a as u32))
        .collect();
    index.sort_unstable();

    let chunks = backend.map_chunks(d + 1, 64, |range| {
        let mut out = Vec::new();
        for a in range.filter(|&a| a >= 1) {
            let ra = residues[a] ^ 1;
            for b in a + 1..=d {
                let target = ra ^ residues[b];
                let lo = index.partition_point(|&(r, _)| r < target);
                for &(r, c) in &index[lo..] {
                    if r != target {
                        break;
                    }
                    if c as usize > b {
                        out.push(Weight4Multiple {
                            t1: a as u64,
                            t2: b as u64,
                            t3: c as u64,
                        });
                    }
                }
            }
        }
        out
    });
    let mut found: Vec<Weight4Multiple> = chunks.into_iter().flatten().collect();
    found.sort_unstable_by_key(Weight4Multiple::sort_key);
    found.truncate(limit);

    Ok(MultipleSearchReport {
        modulus: modulus.clone(),
        degree_bound,
        found,
        expected_count: expected_count(deg as u32, degree_bound as f64),
    })
}

/// True iff every feedback polynomial in `group` divides the multiple.
pub fn verify_multiple(mult: &Weight4Multiple, group: &[&LfsrSpec]) -> bool {
    group.iter().all(|l| {
        let m = l.modulus();
        let r = mult.offsets().iter().fold(0u64, |acc, &t| acc ^ m.x_pow(t));
        r == 0
    })
}

/// Same check against an arbitrary modulus.
pub fn divides(mult: &Weight4Multiple, modulus: &BinaryPolynomial) -> bool {
    mult.polynomial()
        .rem(modulus)
        .map(|r| r.is_zero())
        .unwrap_or(false)
}
