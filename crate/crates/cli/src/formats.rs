//! On-disk formats: generator specs (JSON), keystream files, multiple
//! caches, keys and truth tables.

use comb_attack::gf2::{BinaryPolynomial, GeneratorSpec, LfsrSpec, TapRef};
use comb_attack::multiples::{expected_count, MultipleSearchReport, Weight4Multiple};
use comb_attack::{BitSeq, BooleanFunction, Keystream};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const KEYSTREAM_MAGIC: &[u8; 4] = b"CGKS";
pub const KEYSTREAM_VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfsrDoc {
    pub length: usize,
    /// Coefficient bit-vector as hex, bit i = coefficient of X^i.
    pub feedback: String,
    pub taps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub n: usize,
    pub truth_table: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub lfsrs: Vec<LfsrDoc>,
    pub function: FunctionDoc,
    /// `[lfsr, tap]` per function input.
    pub wiring: Vec<[usize; 2]>,
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn to_spec(&self) -> Result<GeneratorSpec, CliError> {
        let mut lfsrs = Vec::with_capacity(self.lfsrs.len());
        for (r, doc) in self.lfsrs.iter().enumerate() {
            let fb = BinaryPolynomial::from_hex(&doc.feedback)
                .map_err(|e| CliError::validation(format!("LFSR {r}: {e}")))?;
            if fb.degree() != Some(doc.length) {
                return Err(CliError::validation(format!(
                    "LFSR {r}: feedback {} has degree {:?}, length is {}",
                    doc.feedback,
                    fb.degree(),
                    doc.length
                )));
            }
            let l = LfsrSpec::new(fb, doc.taps.clone())
                .map_err(|e| CliError::validation(format!("LFSR {r}: {e}")))?;
            lfsrs.push(l);
        }
        let f = BooleanFunction::from_hex(self.function.n, &self.function.truth_table)
            .map_err(|e| CliError::validation(format!("function: {e}")))?;
        let wiring = self
            .wiring
            .iter()
            .map(|&[lfsr, tap]| TapRef { lfsr, tap })
            .collect();
        GeneratorSpec::new(lfsrs, f, wiring).map_err(|e| CliError::validation(e.to_string()))
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Self {
        Self {
            lfsrs: spec
                .lfsrs()
                .iter()
                .map(|l| LfsrDoc {
                    length: l.length(),
                    feedback: l.feedback().to_hex(),
                    taps: l.taps().to_vec(),
                })
                .collect(),
            function: FunctionDoc {
                n: spec.n(),
                truth_table: spec.function().to_hex(),
            },
            wiring: spec.wiring().iter().map(|w| [w.lfsr, w.tap]).collect(),
        }
    }
}

pub fn encode_keystream(ks: &Keystream) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + ks.len().div_ceil(8));
    out.extend_from_slice(KEYSTREAM_MAGIC);
    out.push(KEYSTREAM_VERSION);
    out.extend_from_slice(&(ks.len() as u64).to_le_bytes());
    out.extend_from_slice(&ks.bits().to_bytes());
    out
}

pub fn decode_keystream(bytes: &[u8]) -> Result<Keystream, CliError> {
    let bad = |m: &str| Err(CliError::validation(format!("keystream file: {m}")));
    if bytes.len() < 13 || &bytes[..4] != KEYSTREAM_MAGIC {
        return bad("missing CGKS header");
    }
    if bytes[4] != KEYSTREAM_VERSION {
        return bad(&format!("unsupported version {:#04x}", bytes[4]));
    }
    let count = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes"));
    let Ok(count) = usize::try_from(count) else {
        return bad("bit count does not fit in memory");
    };
    match BitSeq::from_bytes(&bytes[13..], count) {
        Some(bits) => Ok(Keystream::new(bits)),
        None => bad(&format!(
            "payload of {} bytes does not hold exactly {count} bits",
            bytes.len() - 13
        )),
    }
}

pub fn encode_cache(report: &MultipleSearchReport) -> String {
    let mut s = format!(
        "# modulus {} max-degree {}\n",
        report.modulus.to_hex(),
        report.degree_bound
    );
    for m in &report.found {
        s.push_str(&format!("{m}\n"));
    }
    s
}

pub fn decode_cache(text: &str) -> Result<MultipleSearchReport, CliError> {
    let bad = |line: usize, m: String| CliError::validation(format!("cache line {line}: {m}"));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let ["#", "modulus", hex, "max-degree", d] = fields.as_slice() else {
        return Err(bad(1, format!("bad header {header:?}")));
    };
    let modulus = BinaryPolynomial::from_hex(hex).map_err(|e| bad(1, e.to_string()))?;
    let degree_bound: u64 = d.parse().map_err(|e| bad(1, format!("{e}")))?;
    let mut found = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let t: Vec<u64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| bad(i + 1, format!("{e}")))?;
        let &[t1, t2, t3] = t.as_slice() else {
            return Err(bad(
                i + 1,
                format!("expected three exponents, got {line:?}"),
            ));
        };
        let m = Weight4Multiple::new(t1, t2, t3).map_err(|e| bad(i + 1, e.to_string()))?;
        if t3 > degree_bound {
            return Err(bad(
                i + 1,
                format!("t3 = {t3} exceeds max-degree {degree_bound}"),
            ));
        }
        found.push(m);
    }
    if found.windows(2).any(|w| w[0].t3() > w[1].t3()) {
        return Err(CliError::validation("cache lines are not sorted by t3"));
    }
    let m2 = modulus.degree().unwrap_or(0) as u32;
    Ok(MultipleSearchReport {
        expected_count: expected_count(m2, degree_bound as f64),
        modulus,
        degree_bound,
        found,
    })
}

/// Full state as a hex integer; bit `offset(r) + i` is bit `i` of LFSR `r`.
pub fn parse_key(spec: &GeneratorSpec, hex: &str) -> Result<Vec<u64>, CliError> {
    let p = BinaryPolynomial::from_hex(hex.trim())
        .map_err(|e| CliError::validation(format!("key: {e}")))?;
    if let Some(d) = p.degree() {
        if d >= spec.m() {
            return Err(CliError::validation(format!(
                "key has bit {d} set but the state is {} bits",
                spec.m()
            )));
        }
    }
    let bits: BitSeq = (0..spec.m()).map(|i| p.coeff(i)).collect();
    spec.unpack_state(&bits)
        .map_err(|e| CliError::validation(e.to_string()))
}

pub fn format_key(spec: &GeneratorSpec, state: &[u64]) -> String {
    let bits = spec.pack_state(state);
    BinaryPolynomial::from_exponents((0..bits.len()).filter(|&i| bits.get(i))).to_hex()
}

/// Truth-table file: hex with optional `0x`, arity from the digit count.
pub fn parse_truth_table(text: &str) -> Result<BooleanFunction, CliError> {
    BooleanFunction::from_hex_infer(text.trim())
        .map_err(|e| CliError::validation(format!("truth table: {e}")))
}
