use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::exec::{add_into, Backend};
use crate::transform::fwht_with;

use super::columns::GColumns;
use super::equations::EquationSet;
use super::AttackError;

/// Largest `m1` for the per-candidate oracle.
pub const MAX_NAIVE_M1: usize = 20;
/// Largest table handled in one piece (two `i64` tables of `2^{m1}` entries).
pub const MAX_TABLE_M1: usize = 28;

const EQ_CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub candidate: u64,
    pub n0: u64,
    pub n1_count: u64,
    pub bias: f64,
    pub zscore: f64,
}

impl CandidateScore {
    pub fn new(candidate: u64, n0: u64, n1_count: u64) -> Self {
        let total = (n0 + n1_count) as f64;
        let diff = n0 as f64 - n1_count as f64;
        let (bias, zscore) = if total > 0.0 {
            (diff / total, diff / total.sqrt())
        } else {
            (0.0, 0.0)
        };
        Self {
            candidate,
            n0,
            n1_count,
            bias,
            zscore,
        }
    }

    pub fn total(&self) -> u64 {
        self.n0 + self.n1_count
    }

    /// Ranking order: higher zscore first, then smaller candidate.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .zscore
            .total_cmp(&self.zscore)
            .then(self.candidate.cmp(&other.candidate))
    }
}

/// `(n0, n1_count)` for every candidate of a stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable {
    pub m1: usize,
    pub n0: Vec<u64>,
    pub n1_count: Vec<u64>,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.n0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n0.is_empty()
    }

    pub fn get(&self, u: u64) -> CandidateScore {
        CandidateScore::new(u, self.n0[u as usize], self.n1_count[u as usize])
    }

    /// Best `k` candidates; `u = 0` is dropped when `exclude_zero`.
    pub fn top_k(&self, k: usize, exclude_zero: bool) -> Vec<CandidateScore> {
        let mut top = TopK::new(k);
        for u in 0..self.len() as u64 {
            if exclude_zero && u == 0 {
                continue;
            }
            top.offer(self.get(u));
        }
        top.into_sorted()
    }

    /// Rank of `u` among all nonzero candidates (0 = best).
    pub fn rank_of(&self, u: u64) -> usize {
        let target = self.get(u);
        (1..self.len() as u64)
            .filter(|&v| v != u)
            .filter(|&v| {
                let s = self.get(v);
                s.total() > 0 && s.rank_cmp(&target) == Ordering::Less
            })
            .count()
    }
}

struct Ranked(CandidateScore);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// Bounded selection; the heap top is the worst kept entry.
struct TopK {
    k: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, s: CandidateScore) {
        if self.k == 0 || s.total() == 0 {
            return;
        }
        if self.heap.len() == self.k {
            if let Some(worst) = self.heap.peek() {
                if s.rank_cmp(&worst.0) != Ordering::Less {
                    return;
                }
            }
            self.heap.pop();
        }
        self.heap.push(Ranked(s));
    }

    fn merge(&mut self, other: TopK) {
        for r in other.heap {
            self.offer(r.0);
        }
    }

    fn into_sorted(self) -> Vec<CandidateScore> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|r| r.0)
            .collect()
    }
}

fn check_m1(what: &'static str, m1: usize, max: usize) -> Result<(), AttackError> {
    if m1 > max {
        Err(AttackError::TooLarge { what, m1, max })
    } else {
        Ok(())
    }
}

fn check_sizes(g: &GColumns, eqs: &EquationSet) -> Result<(), AttackError> {
    if g.len() != eqs.len() {
        return Err(AttackError::Invariant(format!(
            "{} column rows for {} relations",
            g.len(),
            eqs.len()
        )));
    }
    Ok(())
}

/// Adds `sign(v_high)` at `v_low` for every subset sum `v` of row `i`.
/// With `low_bits = m1` and `prefix = 0` this is the plain count.
fn accumulate_range(
    g: &GColumns,
    eqs: &EquationSet,
    range: std::ops::Range<usize>,
    low_bits: usize,
    prefix: u64,
    w: &mut [[i64; 2]],
) {
    let low_mask = if low_bits == 64 {
        u64::MAX
    } else {
        (1u64 << low_bits) - 1
    };
    let subsets = 1usize << g.n1;
    for i in range {
        let row = g.row(i);
        let b = eqs.class(i) as usize;
        let mut v = 0u64;
        for k in 0..subsets {
            if k > 0 {
                v ^= row[k.trailing_zeros() as usize];
            }
            let high = if low_bits == 64 { 0 } else { v >> low_bits };
            let sign = if (high & prefix).count_ones() & 1 == 0 {
                1
            } else {
                -1
            };
            w[(v & low_mask) as usize][b] += sign;
        }
    }
}

fn signed_tables(
    backend: Backend,
    g: &GColumns,
    eqs: &EquationSet,
    low_bits: usize,
    prefix: u64,
) -> (Vec<i64>, Vec<i64>) {
    let size = 1usize << low_bits;
    let chunk = eqs.len().div_ceil(backend.workers()).max(EQ_CHUNK);
    let parts = backend.map_chunks(eqs.len(), chunk, |range| {
        let mut w = vec![[0i64; 2]; size];
        accumulate_range(g, eqs, range, low_bits, prefix, &mut w);
        w
    });
    let mut w0 = vec![0i64; size];
    let mut w1 = vec![0i64; size];
    let mut split0 = vec![0i64; size];
    let mut split1 = vec![0i64; size];
    for part in parts {
        for (v, c) in part.iter().enumerate() {
            split0[v] = c[0];
            split1[v] = c[1];
        }
        add_into(&mut w0, &split0);
        add_into(&mut w1, &split1);
    }
    (w0, w1)
}

/// Count tables `w_b[v] = #{(i, y) : class(i) = b, Σ_{j∈y} G_j(i) = v}` over
/// all `y ∈ {0,1}^{n1}`, including `y = 0`.
pub fn accumulate_tables(
    g: &GColumns,
    eqs: &EquationSet,
) -> Result<(Vec<i64>, Vec<i64>), AttackError> {
    accumulate_tables_with(Backend::default(), g, eqs)
}

pub fn accumulate_tables_with(
    backend: Backend,
    g: &GColumns,
    eqs: &EquationSet,
) -> Result<(Vec<i64>, Vec<i64>), AttackError> {
    check_m1("count table", g.m1, MAX_TABLE_M1)?;
    check_sizes(g, eqs)?;
    Ok(signed_tables(backend, g, eqs, g.m1, 0))
}

/// Transforms and divides by `2^{n1}`, checking the divisibility and range
/// invariants.
fn extract(
    backend: Backend,
    mut w0: Vec<i64>,
    mut w1: Vec<i64>,
    n1: usize,
    class_sizes: (u64, u64),
) -> Result<(Vec<u64>, Vec<u64>), AttackError> {
    let (r0, r1) = backend.join(
        || fwht_with(backend, &mut w0),
        || fwht_with(backend, &mut w1),
    );
    r0.map_err(|e| AttackError::Invariant(e.to_string()))?;
    r1.map_err(|e| AttackError::Invariant(e.to_string()))?;
    let shift = n1 as u32;
    let convert = |w: Vec<i64>, size: u64| -> Result<Vec<u64>, AttackError> {
        w.into_iter()
            .enumerate()
            .map(|(u, x)| {
                if x & ((1i64 << shift) - 1) != 0 || x < 0 || (x >> shift) as u64 > size {
                    Err(AttackError::Invariant(format!(
                        "transformed count {x} at candidate {u:#x} is not 2^{shift} times a value in 0..={size}"
                    )))
                } else {
                    Ok((x >> shift) as u64)
                }
            })
            .collect()
    };
    Ok((convert(w0, class_sizes.0)?, convert(w1, class_sizes.1)?))
}

/// Scores every candidate from the count tables.
pub fn score_candidates(
    w0: Vec<i64>,
    w1: Vec<i64>,
    n1: usize,
    class_sizes: (u64, u64),
) -> Result<ScoreTable, AttackError> {
    score_candidates_with(Backend::default(), w0, w1, n1, class_sizes)
}

pub fn score_candidates_with(
    backend: Backend,
    w0: Vec<i64>,
    w1: Vec<i64>,
    n1: usize,
    class_sizes: (u64, u64),
) -> Result<ScoreTable, AttackError> {
    let m1 = w0.len().trailing_zeros() as usize;
    let (n0, n1_count) = extract(backend, w0, w1, n1, class_sizes)?;
    Ok(ScoreTable { m1, n0, n1_count })
}

/// Per-candidate recount, `2^{m1}·N` work.
pub fn score_candidates_naive(g: &GColumns, eqs: &EquationSet) -> Result<ScoreTable, AttackError> {
    check_m1("naive scoring", g.m1, MAX_NAIVE_M1)?;
    check_sizes(g, eqs)?;
    let size = 1usize << g.m1;
    let parts = Backend::default().map_chunks(size, 256, |range| {
        range
            .map(|u| {
                let mut c = [0u64; 2];
                for i in 0..eqs.len() {
                    if g.hypothesis(i, u as u64) == 0 {
                        c[eqs.class(i) as usize] += 1;
                    }
                }
                c
            })
            .collect::<Vec<_>>()
    });
    let (n0, n1_count) = parts.into_iter().flatten().map(|c| (c[0], c[1])).unzip();
    Ok(ScoreTable {
        m1: g.m1,
        n0,
        n1_count,
    })
}

pub fn score_candidates_tradeoff(
    g: &GColumns,
    eqs: &EquationSet,
    split_bits: usize,
) -> Result<ScoreTable, AttackError> {
    score_candidates_tradeoff_with(Backend::default(), g, eqs, split_bits)
}

/// Same table as [`score_candidates`], built one `2^{m1-s}` slice per prefix.
pub fn score_candidates_tradeoff_with(
    backend: Backend,
    g: &GColumns,
    eqs: &EquationSet,
    split_bits: usize,
) -> Result<ScoreTable, AttackError> {
    check_m1("candidate table", g.m1, MAX_TABLE_M1)?;
    let mut n0 = vec![0u64; 1 << g.m1];
    let mut n1_count = vec![0u64; 1 << g.m1];
    for_each_prefix(backend, g, eqs, split_bits, |prefix, low_bits, a, b| {
        let base = (prefix << low_bits) as usize;
        (base, a, b)
    })?
    .into_iter()
    .for_each(|(base, a, b)| {
        n0[base..base + a.len()].copy_from_slice(&a);
        n1_count[base..base + b.len()].copy_from_slice(&b);
    });
    Ok(ScoreTable {
        m1: g.m1,
        n0,
        n1_count,
    })
}

/// Best `k` candidates while holding only `2·2^{m1-s}` counters per worker.
pub fn top_k_tradeoff(
    backend: Backend,
    g: &GColumns,
    eqs: &EquationSet,
    split_bits: usize,
    k: usize,
    exclude_zero: bool,
) -> Result<Vec<CandidateScore>, AttackError> {
    let parts = for_each_prefix(backend, g, eqs, split_bits, |prefix, low_bits, a, b| {
        let mut top = TopK::new(k);
        for (l, (&c0, &c1)) in a.iter().zip(&b).enumerate() {
            let u = (prefix << low_bits) | l as u64;
            if exclude_zero && u == 0 {
                continue;
            }
            top.offer(CandidateScore::new(u, c0, c1));
        }
        top
    })?;
    let mut top = TopK::new(k);
    for p in parts {
        top.merge(p);
    }
    Ok(top.into_sorted())
}

/// Runs `visit(prefix, low_bits, n0_slice, n1_slice)` for every prefix of
/// `split_bits` high candidate bits. Prefixes run in parallel when there
/// are enough of them; otherwise each slice is built in parallel.
fn for_each_prefix<R, F>(
    backend: Backend,
    g: &GColumns,
    eqs: &EquationSet,
    split_bits: usize,
    visit: F,
) -> Result<Vec<R>, AttackError>
where
    R: Send,
    F: Fn(u64, usize, Vec<u64>, Vec<u64>) -> R + Send + Sync,
{
    if split_bits > g.m1 {
        return Err(AttackError::Plan(format!(
            "split_bits {split_bits} exceeds m1 = {}",
            g.m1
        )));
    }
    check_sizes(g, eqs)?;
    let low_bits = g.m1 - split_bits;
    check_m1("tradeoff slice", low_bits, MAX_TABLE_M1)?;
    if split_bits >= 63 {
        return Err(AttackError::TooLarge {
            what: "prefix count",
            m1: split_bits,
            max: 62,
        });
    }
    let prefixes = 1usize << split_bits;
    let sizes = eqs.class_counts();
    let one = |prefix: u64, inner: Backend| -> Result<R, AttackError> {
        let (w0, w1) = signed_tables(inner, g, eqs, low_bits, prefix);
        let (a, b) = extract(inner, w0, w1, g.n1, sizes)?;
        Ok(visit(prefix, low_bits, a, b))
    };
    if prefixes >= backend.workers() && backend != Backend::Sequential {
        backend
            .map_chunks(prefixes, 1, |r| one(r.start as u64, Backend::Sequential))
            .into_iter()
            .collect()
    } else {
        (0..prefixes as u64).map(|p| one(p, backend)).collect()
    }
}
