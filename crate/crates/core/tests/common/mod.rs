#![allow(dead_code)]

use comb_attack::gf2::{BinaryPolynomial, GeneratorSpec, LfsrSpec, TapRef};
use comb_attack::BooleanFunction;
use rand::Rng;

pub const TOY_FEEDBACK: [u64; 3] = [0x2129, 0x863, 0x313];
pub const TOY_TAPS: [&[usize]; 3] = [&[0, 5], &[1, 7], &[2, 6]];
pub const TOY_FUNCTION: &str = "0xe41b33cc693c6969";

pub fn build_spec(feedbacks: &[u64], taps: &[&[usize]], f: BooleanFunction) -> GeneratorSpec {
    let lfsrs: Vec<LfsrSpec> = feedbacks
        .iter()
        .zip(taps)
        .map(|(&p, t)| LfsrSpec::new(BinaryPolynomial::from_u64(p), t.to_vec()).unwrap())
        .collect();
    let wiring = lfsrs
        .iter()
        .enumerate()
        .flat_map(|(r, l)| (0..l.taps().len()).map(move |tap| TapRef { lfsr: r, tap }))
        .collect();
    GeneratorSpec::new(lfsrs, f, wiring).unwrap()
}

pub fn toy_spec() -> GeneratorSpec {
    build_spec(
        &TOY_FEEDBACK,
        &TOY_TAPS,
        BooleanFunction::from_hex(6, TOY_FUNCTION).unwrap(),
    )
}

pub fn toy_spec_with(f: BooleanFunction) -> GeneratorSpec {
    build_spec(&TOY_FEEDBACK, &TOY_TAPS, f)
}

/// Nonzero state for every register.
pub fn random_state<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> Vec<u64> {
    spec.lfsrs()
        .iter()
        .map(|l| loop {
            let s = rng.gen::<u64>() & l.state_mask();
            if s != 0 {
                break s;
            }
        })
        .collect()
}

/// Bit-by-bit reference simulator over `Vec<bool>`.
pub fn naive_lfsr(feedback: u64, length: usize, init: u64, count: usize) -> Vec<bool> {
    let mut s: Vec<bool> = (0..length).map(|i| (init >> i) & 1 == 1).collect();
    while s.len() < count {
        let t = s.len() - length;
        let next = (0..length).fold(false, |acc, i| acc ^ ((feedback >> i) & 1 == 1 && s[t + i]));
        s.push(next);
    }
    s.truncate(count);
    s
}

pub fn naive_inputs(spec: &GeneratorSpec, init: &[u64], count: usize) -> Vec<usize> {
    let seqs: Vec<Vec<bool>> = spec
        .lfsrs()
        .iter()
        .zip(init)
        .map(|(l, &s)| {
            naive_lfsr(
                l.feedback().low_u64(),
                l.length(),
                s,
                count + l.length() + 64,
            )
        })
        .collect();
    (0..count)
        .map(|t| {
            spec.wiring().iter().enumerate().fold(0, |x, (j, w)| {
                let p = spec.lfsrs()[w.lfsr].taps()[w.tap];
                x | (seqs[w.lfsr][t + p] as usize) << j
            })
        })
        .collect()
}

pub fn naive_keystream(spec: &GeneratorSpec, init: &[u64], count: usize) -> Vec<bool> {
    naive_inputs(spec, init, count)
        .into_iter()
        .map(|x| spec.function().eval(x))
        .collect()
}
