use crate::exec::Backend;
use crate::gf2::{GeneratorSpec, SmallModulus};

use super::equations::EquationSet;
use super::plan::StagePlan;
use super::AttackError;

/// Generator-matrix columns: for relation `i` and target input `j`, the
/// `m1`-bit linear form `G_j(i)` whose dot product with a candidate target
/// state is that input's sum over the four positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GColumns {
    pub m1: usize,
    pub n1: usize,
    /// Function-input indices wired to the target LFSRs, ascending.
    pub inputs: Vec<usize>,
    /// `(lfsr, bit offset)` of each target LFSR inside the candidate word.
    pub layout: Vec<(usize, usize)>,
    /// Row-major: `cols[i * n1 + j]`.
    pub cols: Vec<u64>,
}

impl GColumns {
    pub fn len(&self) -> usize {
        if self.n1 == 0 {
            0
        } else {
            self.cols.len() / self.n1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.cols[i * self.n1..(i + 1) * self.n1]
    }

    /// Hypothesized target-input sums `y(i)` under candidate `u`, bit `j` per input.
    #[inline]
    pub fn hypothesis(&self, i: usize, u: u64) -> u32 {
        self.row(i)
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &g)| acc | (((g & u).count_ones() & 1) << j))
    }

    /// Packs per-LFSR states of the targets into a candidate word.
    pub fn pack_candidate(&self, states: &[u64]) -> u64 {
        self.layout
            .iter()
            .fold(0, |acc, &(r, off)| acc | states[r] << off)
    }

    /// Splits a candidate word into `(lfsr, state)` pairs.
    pub fn unpack_candidate(&self, spec: &GeneratorSpec, u: u64) -> Vec<(usize, u64)> {
        self.layout
            .iter()
            .map(|&(r, off)| (r, (u >> off) & spec.lfsrs()[r].state_mask()))
            .collect()
    }
}

pub fn build_g_columns(
    spec: &GeneratorSpec,
    stage: &StagePlan,
    eqs: &EquationSet,
) -> Result<GColumns, AttackError> {
    build_g_columns_with(Backend::default(), spec, stage, eqs)
}

/// Columns are `X^t·(1 + X^{t1} + X^{t2} + X^{t3})·X^{p_j} mod P_r`, placed
/// at LFSR `r`'s offset. Consecutive shifts of one multiple advance by a
/// single multiplication by `X`.
pub fn build_g_columns_with(
    backend: Backend,
    spec: &GeneratorSpec,
    stage: &StagePlan,
    eqs: &EquationSet,
) -> Result<GColumns, AttackError> {
    let mut layout = Vec::new();
    let mut off = 0usize;
    for &r in &stage.target_lfsrs {
        layout.push((r, off));
        off += spec.lfsrs()[r].length();
    }
    let m1 = off;
    if m1 > 64 {
        return Err(AttackError::TooLarge {
            what: "candidate word",
            m1,
            max: 64,
        });
    }
    let inputs: Vec<usize> = (0..spec.n())
        .filter(|&j| stage.target_lfsrs.contains(&spec.input_source(j).0))
        .collect();
    if inputs.is_empty() {
        return Err(AttackError::NoTargetInputs { stage: stage.index });
    }
    let n1 = inputs.len();

    // per input: modulus, placement, and the constant factor per multiple
    struct InputCtx {
        modulus: SmallModulus,
        shift: usize,
        per_multiple: Vec<u64>,
    }
    let ctx: Vec<InputCtx> = inputs
        .iter()
        .map(|&j| {
            let (r, p) = spec.input_source(j);
            let modulus = *spec.lfsrs()[r].modulus();
            let shift = layout.iter().find(|&&(lr, _)| lr == r).unwrap().1;
            let per_multiple = eqs
                .multiples
                .iter()
                .map(|m| {
                    m.offsets()
                        .iter()
                        .fold(0u64, |acc, &o| acc ^ modulus.x_pow(o + p as u64))
                })
                .collect();
            InputCtx {
                modulus,
                shift,
                per_multiple,
            }
        })
        .collect();

    let chunks = backend.map_chunks(eqs.len(), 1 << 14, |range| {
        let mut out = Vec::with_capacity(range.len() * n1);
        let mut cur = vec![0u64; n1];
        let mut prev: Option<(u32, u64)> = None;
        for i in range {
            let e = eqs.equations[i];
            match prev {
                Some((pm, pt)) if pm == e.multiple && e.t >= pt && e.t - pt <= 8 => {
                    for (g, c) in cur.iter_mut().zip(&ctx) {
                        for _ in 0..e.t - pt {
                            *g = c.modulus.mul_x(*g);
                        }
                    }
                }
                Some((pm, pt)) if pm == e.multiple && e.t >= pt => {
                    for (g, c) in cur.iter_mut().zip(&ctx) {
                        *g = c.modulus.mul(*g, c.modulus.x_pow(e.t - pt));
                    }
                }
                _ => {
                    for (g, c) in cur.iter_mut().zip(&ctx) {
                        *g = c
                            .modulus
                            .mul(c.modulus.x_pow(e.t), c.per_multiple[e.multiple as usize]);
                    }
                }
            }
            prev = Some((e.multiple, e.t));
            out.extend(cur.iter().zip(&ctx).map(|(&g, c)| g << c.shift));
        }
        out
    });
    Ok(GColumns {
        m1,
        n1,
        inputs,
        layout,
        cols: chunks.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{plan, Equation};
    use crate::bits::BitSeq;
    use crate::boolfn::BooleanFunction;
    use crate::gf2::{BinaryPolynomial, LfsrSpec, TapRef};
    use crate::multiples::Weight4Multiple;

    fn two_register_spec() -> GeneratorSpec {
        let a = LfsrSpec::new(BinaryPolynomial::from_u64(0b1011), vec![0]).unwrap();
        let b = LfsrSpec::new(BinaryPolynomial::from_u64(0b10011), vec![0]).unwrap();
        let f = BooleanFunction::from_fn(2, |x| (x ^ (x >> 1)) & 1 == 1).unwrap();
        let wiring = vec![TapRef { lfsr: 0, tap: 0 }, TapRef { lfsr: 1, tap: 0 }];
        GeneratorSpec::new(vec![a, b], f, wiring).unwrap()
    }

    fn eqs(multiples: Vec<Weight4Multiple>, equations: Vec<Equation>) -> EquationSet {
        let n = equations.len();
        EquationSet {
            multiples,
            equations,
            classes: BitSeq::zeros(n),
        }
    }

    #[test]
    fn hand_computed_column() {
        // (1 + X + X^2 + X^4) mod (X^3 + X + 1) = 1
        let spec = two_register_spec();
        let p = plan(&spec, &[0, 1]).unwrap();
        let set = eqs(
            vec![Weight4Multiple::new(1, 2, 4).unwrap()],
            vec![Equation { multiple: 0, t: 0 }],
        );
        let g = build_g_columns(&spec, &p.stages[0], &set).unwrap();
        assert_eq!((g.m1, g.n1), (3, 1));
        assert_eq!(g.cols, vec![1]);
    }

    #[test]
    fn stepping_matches_direct_powers() {
        let spec = two_register_spec();
        let p = plan(&spec, &[0, 1]).unwrap();
        let ms = vec![
            Weight4Multiple::new(2, 4, 5).unwrap(),
            Weight4Multiple::new(1, 3, 9).unwrap(),
        ];
        let mut list = Vec::new();
        for t in [0u64, 1, 2, 3, 20, 21, 100] {
            list.push(Equation { multiple: 0, t });
        }
        for t in [5u64, 4, 6] {
            list.push(Equation { multiple: 1, t });
        }
        let set = eqs(ms.clone(), list.clone());
        let m = *spec.lfsrs()[0].modulus();
        for backend in [Backend::Sequential, Backend::default()] {
            let g = build_g_columns_with(backend, &spec, &p.stages[0], &set).unwrap();
            for (i, e) in list.iter().enumerate() {
                let want = ms[e.multiple as usize]
                    .offsets()
                    .iter()
                    .fold(0, |acc, &o| acc ^ m.x_pow(e.t + o));
                assert_eq!(g.row(i), &[want]);
            }
        }
    }

    #[test]
    fn zero_candidate_hypothesizes_zero() {
        let spec = two_register_spec();
        let p = plan(&spec, &[1, 0]).unwrap();
        let set = eqs(
            vec![Weight4Multiple::new(2, 3, 4).unwrap()],
            (0..50).map(|t| Equation { multiple: 0, t }).collect(),
        );
        let g = build_g_columns(&spec, &p.stages[0], &set).unwrap();
        assert_eq!(g.m1, 4);
        assert!((0..g.len()).all(|i| g.hypothesis(i, 0) == 0));
    }
}
