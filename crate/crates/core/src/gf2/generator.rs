use crate::bits::BitSeq;
use crate::boolfn::BooleanFunction;
use crate::exec::Backend;

use super::lfsr::LfsrSpec;
use super::Gf2Error;

/// Function input `j` reads `lfsrs[lfsr].taps()[tap]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TapRef {
    pub lfsr: usize,
    pub tap: usize,
}

/// A combination generator: LFSRs whose tapped bits feed a Boolean function.
///
/// Input `j` of the function at time `t` is `s^{(r_j)}_{t + p_j}` where
/// `wiring[j] = (r_j, tap index)` and `p_j` is that tap's state position.
/// Full initial states are one `u64` per LFSR, in declaration order; the
/// packed `m`-bit form puts LFSR 0 in the lowest bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    lfsrs: Vec<LfsrSpec>,
    function: BooleanFunction,
    wiring: Vec<TapRef>,
}

impl GeneratorSpec {
    pub fn new(
        lfsrs: Vec<LfsrSpec>,
        function: BooleanFunction,
        wiring: Vec<TapRef>,
    ) -> Result<Self, Gf2Error> {
        let bad = |msg: String| Err(Gf2Error::InvalidGenerator(msg));
        if lfsrs.is_empty() {
            return bad("no LFSRs".into());
        }
        let total_taps: usize = lfsrs.iter().map(|l| l.taps().len()).sum();
        if wiring.len() != function.arity() {
            return bad(format!(
                "wiring has {} entries but the function has {} inputs",
                wiring.len(),
                function.arity()
            ));
        }
        if total_taps != wiring.len() {
            return bad(format!(
                "{} taps declared but {} function inputs",
                total_taps,
                wiring.len()
            ));
        }
        for (j, w) in wiring.iter().enumerate() {
            let Some(l) = lfsrs.get(w.lfsr) else {
                return bad(format!("input {j} references missing LFSR {}", w.lfsr));
            };
            if w.tap >= l.taps().len() {
                return bad(format!(
                    "input {j} references missing tap {} of LFSR {}",
                    w.tap, w.lfsr
                ));
            }
            if wiring[..j].contains(w) {
                return bad(format!("tap {} of LFSR {} wired twice", w.tap, w.lfsr));
            }
        }
        for i in 0..lfsrs.len() {
            for k in 0..i {
                let (a, b) = (lfsrs[i].feedback(), lfsrs[k].feedback());
                if a == b || !a.gcd(b).is_one() {
                    return bad(format!(
                        "feedback polynomials of LFSRs {k} and {i} share a factor"
                    ));
                }
            }
        }
        Ok(Self {
            lfsrs,
            function,
            wiring,
        })
    }

    pub fn lfsrs(&self) -> &[LfsrSpec] {
        &self.lfsrs
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn wiring(&self) -> &[TapRef] {
        &self.wiring
    }

    /// Total state size.
    pub fn m(&self) -> usize {
        self.lfsrs.iter().map(|l| l.length()).sum()
    }

    /// Function arity.
    pub fn n(&self) -> usize {
        self.function.arity()
    }

    /// `(lfsr index, state position)` read by input `j`.
    pub fn input_source(&self, j: usize) -> (usize, usize) {
        let w = self.wiring[j];
        (w.lfsr, self.lfsrs[w.lfsr].taps()[w.tap])
    }

    /// Function inputs fed by LFSR `r`, ascending.
    pub fn inputs_of(&self, r: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&j| self.wiring[j].lfsr == r)
            .collect()
    }

    /// Bit mask over function inputs fed by any LFSR in `group`.
    pub fn input_mask(&self, group: &[usize]) -> usize {
        (0..self.n())
            .filter(|&j| group.contains(&self.wiring[j].lfsr))
            .fold(0, |m, j| m | 1 << j)
    }

    /// Bit offset of LFSR `r` inside the packed `m`-bit state.
    pub fn offset(&self, r: usize) -> usize {
        self.lfsrs[..r].iter().map(|l| l.length()).sum()
    }

    pub fn check_state(&self, init: &[u64]) -> Result<(), Gf2Error> {
        if init.len() != self.lfsrs.len() {
            return Err(Gf2Error::InvalidGenerator(format!(
                "{} LFSR states given for {} LFSRs",
                init.len(),
                self.lfsrs.len()
            )));
        }
        for (r, (l, &s)) in self.lfsrs.iter().zip(init).enumerate() {
            if s & !l.state_mask() != 0 {
                return Err(Gf2Error::InvalidGenerator(format!(
                    "state {s:#x} of LFSR {r} does not fit in {} bits",
                    l.length()
                )));
            }
        }
        Ok(())
    }

    /// Splits a packed `m`-bit state into per-LFSR words.
    pub fn unpack_state(&self, packed: &BitSeq) -> Result<Vec<u64>, Gf2Error> {
        if packed.len() != self.m() {
            return Err(Gf2Error::InitLength {
                expected: self.m(),
                got: packed.len(),
            });
        }
        Ok((0..self.lfsrs.len())
            .map(|r| packed.window(self.offset(r), self.lfsrs[r].length()))
            .collect())
    }

    pub fn pack_state(&self, init: &[u64]) -> BitSeq {
        let mut out = BitSeq::with_capacity(self.m());
        for (l, &s) in self.lfsrs.iter().zip(init) {
            for i in 0..l.length() {
                out.push((s >> i) & 1 == 1);
            }
        }
        out
    }

    /// Sequences of every LFSR, long enough to feed `count` outputs.
    pub fn lfsr_sequences(&self, init: &[u64], count: usize) -> Vec<BitSeq> {
        self.lfsrs
            .iter()
            .zip(init)
            .map(|(l, &s)| {
                let reach = l.taps().iter().copied().max().unwrap_or(0);
                l.sequence(s, count + reach)
            })
            .collect()
    }

    /// Function inputs at time `t`, given per-LFSR sequences.
    #[inline]
    pub fn inputs_at(&self, seqs: &[BitSeq], t: usize) -> usize {
        let mut x = 0usize;
        for j in 0..self.n() {
            let (r, p) = self.input_source(j);
            x |= (seqs[r].get(t + p) as usize) << j;
        }
        x
    }
}

/// Packed keystream bits `z_0, z_1, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keystream {
    bits: BitSeq,
}

impl Keystream {
    pub fn new(bits: BitSeq) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &BitSeq {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, t: usize) -> bool {
        self.bits.get(t)
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self::new(self.bits.slice(0, len.min(self.len())))
    }
}

/// `z_t = f(x_t)` for `t < count`.
pub fn keystream(spec: &GeneratorSpec, init: &[u64], count: usize) -> Result<Keystream, Gf2Error> {
    keystream_with(Backend::default(), spec, init, count)
}

pub fn keystream_with(
    backend: Backend,
    spec: &GeneratorSpec,
    init: &[u64],
    count: usize,
) -> Result<Keystream, Gf2Error> {
    spec.check_state(init)?;
    let seqs = spec.lfsr_sequences(init, count);
    let sources: Vec<(usize, usize)> = (0..spec.n()).map(|j| spec.input_source(j)).collect();
    let f = spec.function();
    let nwords = count.div_ceil(64);
    let words: Vec<u64> = backend
        .map_chunks(nwords, 1 << 10, |range| {
            let mut out = Vec::with_capacity(range.len());
            let mut lanes = vec![0u64; sources.len()];
            for w in range {
                let t0 = 64 * w;
                for (lane, &(r, p)) in lanes.iter_mut().zip(&sources) {
                    *lane = seqs[r].window(t0 + p, 64);
                }
                let mut z = 0u64;
                for k in 0..64.min(count - t0) {
                    let mut x = 0usize;
                    for (j, lane) in lanes.iter().enumerate() {
                        x |= (((lane >> k) & 1) as usize) << j;
                    }
                    z |= (f.eval(x) as u64) << k;
                }
                out.push(z);
            }
            out
        })
        .into_iter()
        .flatten()
        .collect();
    Ok(Keystream::new(BitSeq::from_words(words, count)))
}
