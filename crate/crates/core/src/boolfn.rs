//! Boolean functions and the spectral quantities the attack depends on.
//!
//! Truth tables are indexed LSB-first: entry `x` is `f(x)` where bit `i` of
//! `x` is input variable `i`.

use log::warn;
use thiserror::Error;

use crate::bits::BitSeq;
use crate::transform::fwht;

/// Largest arity accepted anywhere (truth table of 2^24 bits).
pub const MAX_ARITY: usize = 24;
/// Largest arity for the exhaustive quadruple enumeration.
pub const MAX_BRUTEFORCE_ARITY: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolFnError {
    #[error("arity {0} is outside the supported range")]
    Arity(usize),
    #[error("truth table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("malformed truth table: {0}")]
    BadHex(String),
    #[error("arity {got} too large for brute force (max {max})")]
    TooLargeForBruteForce { got: usize, max: usize },
    #[error("internal invariant breach: {0}")]
    Invariant(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    table: BitSeq,
}

impl BooleanFunction {
    pub fn from_table(arity: usize, table: BitSeq) -> Result<Self, BoolFnError> {
        if arity > MAX_ARITY {
            return Err(BoolFnError::Arity(arity));
        }
        if table.len() != 1 << arity {
            return Err(BoolFnError::TableLength {
                expected: 1 << arity,
                got: table.len(),
            });
        }
        Ok(Self { arity, table })
    }

    pub fn from_fn<F: FnMut(usize) -> bool>(arity: usize, f: F) -> Result<Self, BoolFnError> {
        if arity > MAX_ARITY {
            return Err(BoolFnError::Arity(arity));
        }
        Self::from_table(arity, (0..1usize << arity).map(f).collect())
    }

    /// Linear function `x ↦ a·x`.
    pub fn linear(arity: usize, a: usize) -> Result<Self, BoolFnError> {
        Self::from_fn(arity, |x| (x & a).count_ones() & 1 == 1)
    }

    /// Parses a hexadecimal truth table; bit `x` of the number is `f(x)`.
    pub fn from_hex(arity: usize, s: &str) -> Result<Self, BoolFnError> {
        if arity > MAX_ARITY {
            return Err(BoolFnError::Arity(arity));
        }
        let s = s.trim();
        let digits = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        if digits.is_empty() {
            return Err(BoolFnError::BadHex(s.to_string()));
        }
        let size = 1usize << arity;
        let mut table = BitSeq::zeros(size);
        for (k, c) in digits.chars().rev().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| BoolFnError::BadHex(format!("invalid digit {c:?}")))?;
            for b in 0..4 {
                if (v >> b) & 1 == 1 {
                    let x = 4 * k + b;
                    if x >= size {
                        return Err(BoolFnError::BadHex(format!(
                            "value does not fit in {size} entries"
                        )));
                    }
                    table.set(x, true);
                }
            }
        }
        Ok(Self { arity, table })
    }

    /// Parses a truth-table file body: hex of exactly `2^n / 4` digits
    /// (so `n ≥ 2`), optional `0x`, surrounding whitespace ignored.
    pub fn from_hex_infer(s: &str) -> Result<Self, BoolFnError> {
        let t = s.trim();
        let digits = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .unwrap_or(t);
        let bits = 4 * digits.len();
        if !bits.is_power_of_two() || bits < 4 {
            return Err(BoolFnError::BadHex(format!(
                "{} hex digits is not a power-of-two table",
                digits.len()
            )));
        }
        Self::from_hex(bits.trailing_zeros() as usize, t)
    }

    /// `0x` followed by `max(1, 2^n / 4)` lowercase digits.
    pub fn to_hex(&self) -> String {
        let ndigits = (self.table.len() / 4).max(1);
        let mut s = String::with_capacity(ndigits + 2);
        s.push_str("0x");
        for k in (0..ndigits).rev() {
            let v = self.table.window(4 * k, 4.min(self.table.len()));
            s.push(char::from_digit(v as u32, 16).unwrap());
        }
        s
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &BitSeq {
        &self.table
    }

    #[inline]
    pub fn eval(&self, x: usize) -> bool {
        self.table.get(x)
    }

    pub fn weight(&self) -> usize {
        self.table.count_ones()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.weight() == self.table.len()
    }

    /// `(-1)^{f(x)}` for every `x`.
    pub fn signs(&self) -> Vec<i64> {
        self.table.iter().map(|b| if b { -1 } else { 1 }).collect()
    }
}

impl std::fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BooleanFunction(n={}, {})", self.arity, self.to_hex())
    }
}

/// `W_f(y) = Σ_x (-1)^{f(x) + x·y}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshSpectrum {
    pub values: Vec<i64>,
}

impl WalshSpectrum {
    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// Autocorrelation `AC(y) = Σ_x (-1)^{f(x) + f(x+y)}` and `Δ_f = max_{y≠0} |AC(y)|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutocorrSpectrum {
    pub values: Vec<i64>,
    pub delta: i64,
}

/// `P_x = Pr[f(u1)+f(u2)+f(u3)+f(u4) = 0 | Σ u_i = x]` for every `x`,
/// held exactly as numerators over `2^{3n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSpectrum {
    pub arity: usize,
    pub numerators: Vec<u64>,
}

impl PSpectrum {
    pub fn log2_denominator(&self) -> u32 {
        3 * self.arity as u32
    }

    pub fn p0_numerator(&self) -> u64 {
        self.numerators[0]
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.numerators[x] as f64 / 2f64.powi(self.log2_denominator() as i32)
    }

    /// `2·(P_0 - 1/2)`, the correlation the attack observes for the right state.
    pub fn p0_bias(&self) -> f64 {
        2.0 * self.prob(0) - 1.0
    }
}

pub fn walsh_spectrum(f: &BooleanFunction) -> WalshSpectrum {
    let mut values = f.signs();
    fwht(&mut values).expect("table length is a power of two");
    WalshSpectrum { values }
}

/// Via `AC = fwht(W_f²) / 2^n`.
pub fn autocorrelation(f: &BooleanFunction) -> AutocorrSpectrum {
    let w = walsh_spectrum(f);
    let mut sq: Vec<i64> = w.values.iter().map(|v| v * v).collect();
    fwht(&mut sq).expect("power of two");
    let n = f.arity();
    let values: Vec<i64> = sq.into_iter().map(|v| v >> n).collect();
    let delta = values.iter().skip(1).map(|v| v.abs()).max().unwrap_or(0);
    AutocorrSpectrum { values, delta }
}

/// Exact `P_x` from the fourth powers of the Walsh spectrum:
/// `P_x·2^{3n} = 2^{3n-1} + (Σ_y (-1)^{x·y} W_f(y)^4) / 2^{n+1}`.
pub fn p_spectrum(f: &BooleanFunction) -> Result<PSpectrum, BoolFnError> {
    let n = f.arity();
    if n > 16 {
        return Err(BoolFnError::Arity(n));
    }
    if !f.is_balanced() {
        warn!("P-spectrum of an unbalanced function: Theorem-1 style bounds do not apply");
    }
    let w = walsh_spectrum(f);
    let mut fourth: Vec<i128> = w.values.iter().map(|&v| (v as i128).pow(4)).collect();
    fwht(&mut fourth).expect("power of two");
    let half = 1i128 << (3 * n).saturating_sub(1);
    let div = 1i128 << (n + 1);
    let numerators = fourth
        .into_iter()
        .enumerate()
        .map(|(x, s)| {
            if s % div != 0 {
                return Err(BoolFnError::Invariant(format!(
                    "fourth-power sum at {x} not divisible by 2^{}",
                    n + 1
                )));
            }
            let num = if n == 0 { (1 + s) / 2 } else { half + s / div };
            u64::try_from(num)
                .map_err(|_| BoolFnError::Invariant(format!("P numerator {num} out of range")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PSpectrum {
        arity: n,
        numerators,
    })
}

/// Ground truth by enumerating all `(u1, u2, u3)` with `u4 = x + u1 + u2 + u3`.
pub fn p_spectrum_bruteforce(f: &BooleanFunction) -> Result<PSpectrum, BoolFnError> {
    let n = f.arity();
    if n > MAX_BRUTEFORCE_ARITY {
        return Err(BoolFnError::TooLargeForBruteForce {
            got: n,
            max: MAX_BRUTEFORCE_ARITY,
        });
    }
    let size = 1usize << n;
    let table: Vec<bool> = f.table().iter().collect();
    let mut numerators = vec![0u64; size];
    for (x, slot) in numerators.iter_mut().enumerate() {
        let mut count = 0u64;
        for u1 in 0..size {
            for u2 in 0..size {
                let a = table[u1] ^ table[u2];
                let s = x ^ u1 ^ u2;
                for u3 in 0..size {
                    if a ^ table[u3] == table[s ^ u3] {
                        count += 1;
                    }
                }
            }
        }
        *slot = count;
    }
    Ok(PSpectrum {
        arity: n,
        numerators,
    })
}

/// Margins achieved against the two bounds on `P_0`. All quantities are
/// integers over the common denominator `2^{3n}` (bound 2 is doubled to
/// stay integral).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem1Report {
    pub arity: usize,
    pub balanced: bool,
    pub p0_numerator: u64,
    pub delta_f: i64,
    /// `P_0·2^{3n} - (2^{3n-1} + 2^{2n-1})`.
    pub bound1_margin: i128,
    /// `min_{u≠0} (P_0 - P_u)·2^{3n}`.
    pub min_gap_numerator: i128,
    /// `2·min_gap - (2^n - Δ_f)^2`; the bound holds iff this is `≥ 0`.
    pub bound2_margin: i128,
}

impl Theorem1Report {
    pub fn bound1_holds(&self) -> bool {
        self.bound1_margin >= 0
    }

    pub fn bound2_holds(&self) -> bool {
        self.bound2_margin >= 0
    }

    pub fn holds(&self) -> bool {
        self.bound1_holds() && self.bound2_holds()
    }

    pub fn p0(&self) -> f64 {
        self.p0_numerator as f64 / 2f64.powi(3 * self.arity as i32)
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap_numerator as f64 / 2f64.powi(3 * self.arity as i32)
    }

    /// `2^{-(n+1)} (1 - Δ_f / 2^n)^2`.
    pub fn gap_lower_bound(&self) -> f64 {
        let n = self.arity as i32;
        let r = 1.0 - self.delta_f as f64 / 2f64.powi(n);
        r * r / 2f64.powi(n + 1)
    }
}

/// Evaluates both bounds on `P_0` exactly. Bound 2 is vacuous for `n = 0`.
pub fn theorem1_check(f: &BooleanFunction) -> Result<Theorem1Report, BoolFnError> {
    let n = f.arity();
    let p = p_spectrum(f)?;
    let ac = autocorrelation(f);
    let p0 = p.p0_numerator() as i128;
    let base = if n == 0 {
        1
    } else {
        (1i128 << (3 * n - 1)) + (1i128 << (2 * n - 1))
    };
    let min_gap = p
        .numerators
        .iter()
        .skip(1)
        .map(|&pu| p0 - pu as i128)
        .min()
        .unwrap_or(i128::MAX / 4);
    let side = (1i128 << n) - ac.delta as i128;
    let bound2_margin = if n == 0 { 0 } else { 2 * min_gap - side * side };
    Ok(Theorem1Report {
        arity: n,
        balanced: f.is_balanced(),
        p0_numerator: p.p0_numerator(),
        delta_f: ac.delta,
        bound1_margin: p0 - base,
        min_gap_numerator: min_gap,
        bound2_margin,
    })
}

/// Largest `t` with `W_f(y) = 0` for every `y` of weight `≤ t`; `-1` when
/// `f` is unbalanced.
pub fn resiliency_order(f: &BooleanFunction) -> i32 {
    let w = walsh_spectrum(f);
    if w.values[0] != 0 {
        return -1;
    }
    let n = f.arity();
    let mut min_bad_weight = n as u32 + 1;
    for (y, &v) in w.values.iter().enumerate() {
        if v != 0 {
            min_bad_weight = min_bad_weight.min(y.count_ones());
        }
    }
    min_bad_weight as i32 - 1
}

/// Distance to the nearest affine function: `2^{n-1} - max |W_f| / 2`.
pub fn nonlinearity(f: &BooleanFunction) -> u64 {
    let w = walsh_spectrum(f);
    ((1i64 << f.arity()) / 2 - w.max_abs() / 2) as u64
}
