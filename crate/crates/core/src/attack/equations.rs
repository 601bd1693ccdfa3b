use crate::bits::BitSeq;
use crate::gf2::{GeneratorSpec, Keystream};
use crate::multiples::Weight4Multiple;

use super::AttackError;

/// Relation `i`: positions `t + τ` for `τ` in the offsets of `multiples[multiple]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Equation {
    pub multiple: u32,
    pub t: u64,
}

/// Harvested relations and their keystream parities
/// `z(i) = z_t + z_{t+t1} + z_{t+t2} + z_{t+t3}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSet {
    pub multiples: Vec<Weight4Multiple>,
    pub equations: Vec<Equation>,
    pub classes: BitSeq,
}

impl EquationSet {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    #[inline]
    pub fn class(&self, i: usize) -> bool {
        self.classes.get(i)
    }

    /// `(|class 0|, |class 1|)`.
    pub fn class_counts(&self) -> (u64, u64) {
        let ones = self.classes.count_ones() as u64;
        (self.len() as u64 - ones, ones)
    }

    /// The four keystream positions of relation `i`.
    pub fn positions(&self, i: usize) -> [u64; 4] {
        let e = self.equations[i];
        self.multiples[e.multiple as usize]
            .offsets()
            .map(|o| e.t + o)
    }

    fn select(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut equations = Vec::new();
        let mut classes = BitSeq::new();
        for (i, e) in self.equations.iter().enumerate() {
            if keep(i) {
                equations.push(*e);
                classes.push(self.class(i));
            }
        }
        Self {
            multiples: self.multiples.clone(),
            equations,
            classes,
        }
    }
}

/// Every shift `t ∈ [0, len - t3)` of every multiple, in order, until
/// `max_equations` relations are collected.
pub fn harvest_equations(
    ks: &Keystream,
    multiples: &[Weight4Multiple],
    max_equations: usize,
) -> Result<EquationSet, AttackError> {
    let len = ks.len() as u64;
    let bits = ks.bits();
    let mut equations = Vec::new();
    let mut classes = BitSeq::new();
    'outer: for (k, m) in multiples.iter().enumerate() {
        if m.t3() >= len {
            continue;
        }
        let shifts = len - m.t3();
        let [_, a, b, c] = m.offsets().map(|o| o as usize);
        let mut t = 0u64;
        while t < shifts {
            if equations.len() >= max_equations {
                break 'outer;
            }
            let width = (shifts - t)
                .min(64)
                .min((max_equations - equations.len()) as u64) as usize;
            let ts = t as usize;
            let word = bits.window(ts, width)
                ^ bits.window(ts + a, width)
                ^ bits.window(ts + b, width)
                ^ bits.window(ts + c, width);
            for bit in 0..width {
                equations.push(Equation {
                    multiple: k as u32,
                    t: t + bit as u64,
                });
                classes.push((word >> bit) & 1 == 1);
            }
            t += width as u64;
        }
    }
    if equations.is_empty() {
        return Err(AttackError::NoEquations {
            max_degree: multiples.iter().map(|m| m.t3()).min().unwrap_or(0),
            len: ks.len(),
        });
    }
    Ok(EquationSet {
        multiples: multiples.to_vec(),
        equations,
        classes,
    })
}

/// Keeps relations whose inputs from the known LFSRs cancel over the four
/// positions. `known[r]` is `Some(state)` for each recovered LFSR `r`.
pub fn filter_known(
    spec: &GeneratorSpec,
    eqs: &EquationSet,
    known: &[Option<u64>],
    stage: usize,
) -> Result<EquationSet, AttackError> {
    let inputs: Vec<(usize, usize)> = (0..spec.n())
        .map(|j| spec.input_source(j))
        .filter(|&(r, _)| known.get(r).is_some_and(|k| k.is_some()))
        .collect();
    if inputs.is_empty() {
        return Ok(eqs.clone());
    }
    let horizon = (0..eqs.len())
        .map(|i| eqs.positions(i)[3])
        .max()
        .unwrap_or(0) as usize
        + 1;
    let seqs: Vec<Option<BitSeq>> = spec
        .lfsrs()
        .iter()
        .enumerate()
        .map(|(r, l)| {
            known.get(r).copied().flatten().map(|s| {
                let reach = l.taps().iter().copied().max().unwrap_or(0);
                l.sequence(s, horizon + reach)
            })
        })
        .collect();
    let out = eqs.select(|i| {
        let pos = eqs.positions(i);
        inputs.iter().all(|&(r, p)| {
            let s = seqs[r].as_ref().expect("known");
            !pos.iter()
                .fold(false, |acc, &t| acc ^ s.get(t as usize + p))
        })
    });
    if out.is_empty() {
        return Err(AttackError::AllFiltered { stage });
    }
    Ok(out)
}
