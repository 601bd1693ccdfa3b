//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 10 is long-running and only runs with `--long`; it needs a
//! multiple cache for the group-2 product named by `COMB_ATTACK_PAPER_CACHE`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use comb_attack::attack::{
    self, accumulate_tables, build_g_columns, harvest_equations, precompute_multiples, run_attack,
    score_candidates, score_candidates_naive, score_candidates_tradeoff, AttackConfig,
};
use comb_attack::boolfn::{p_spectrum, p_spectrum_bruteforce, resiliency_order, theorem1_check};
use comb_attack::gf2::{
    keystream, poly_is_primitive, BinaryPolynomial, GeneratorSpec, LfsrSpec, TapRef,
};
use comb_attack::multiples::{
    expected_count, find_weight4, product_modulus, verify_multiple, Weight4Multiple,
};
use comb_attack::transform::fwht;
use comb_attack::{Backend, BooleanFunction};
use comb_attack_cli::commands::{
    cmd_attack, load_cache, load_spec, random_balanced, AttackOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn build_spec(feedbacks: &[u64], taps: &[&[usize]], f: BooleanFunction) -> GeneratorSpec {
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

fn random_state<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> Vec<u64> {
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

/// Function inputs by direct bit-level recurrence stepping.
fn naive_inputs(spec: &GeneratorSpec, init: &[u64], count: usize) -> Vec<usize> {
    let seqs: Vec<Vec<bool>> = spec
        .lfsrs()
        .iter()
        .zip(init)
        .map(|(l, &s0)| {
            let len = l.length();
            let fb = l.feedback().low_u64();
            let mut s: Vec<bool> = (0..len).map(|i| (s0 >> i) & 1 == 1).collect();
            while s.len() < count + len + 64 {
                let t = s.len() - len;
                let next = (0..len).fold(false, |acc, i| acc ^ ((fb >> i) & 1 == 1 && s[t + i]));
                s.push(next);
            }
            s
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

fn random_primitive<R: Rng>(degree: usize, rng: &mut R) -> BinaryPolynomial {
    loop {
        let low = rng.gen::<u64>() & ((1u64 << degree) - 1) | 1;
        let p = BinaryPolynomial::from_u64(low | 1u64 << degree);
        if poly_is_primitive(&p).unwrap() {
            return p;
        }
    }
}

fn function_set() -> Vec<BooleanFunction> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for n in [3, 4, 5] {
        for _ in 0..100 {
            out.push(random_balanced(n, &mut rng));
        }
    }
    for mask in 0u32..256 {
        if mask.count_ones() == 4 {
            out.push(BooleanFunction::from_fn(3, |x| (mask >> x) & 1 == 1).unwrap());
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let set = function_set();
    let exact = set
        .iter()
        .filter(|f| p_spectrum(f).unwrap() == p_spectrum_bruteforce(f).unwrap())
        .count();
    let t = start.elapsed();
    verdict(
        exact == set.len() && set.len() == 370 && t < Duration::from_secs(30),
        format!("{exact}/{} spectra exact, {t:.2?}", set.len()),
    )
}

fn criterion_2() -> Verdict {
    let set = function_set();
    let violations = set
        .iter()
        .filter(|f| !theorem1_check(f).unwrap().holds())
        .count();
    verdict(
        violations == 0,
        format!("{violations} violations over {} functions", set.len()),
    )
}

fn naive_transform(w: &[i64], parity: &[i64]) -> Vec<i64> {
    (0..w.len())
        .map(|u| w.iter().enumerate().map(|(v, &x)| x * parity[u & v]).sum())
        .collect()
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let parity: Vec<i64> = (0..1usize << 14)
        .map(|x| if x.count_ones() % 2 == 0 { 1 } else { -1 })
        .collect();
    let mut bad = 0;
    for k in 1..=14 {
        for _ in 0..20 {
            let w: Vec<i64> = (0..1usize << k)
                .map(|_| rng.gen_range(-1000..=1000))
                .collect();
            let mut fast = w.clone();
            fwht(&mut fast).unwrap();
            if fast != naive_transform(&w, &parity) {
                bad += 1;
            }
        }
    }
    let t = start.elapsed();
    verdict(
        bad == 0 && t < Duration::from_secs(10),
        format!("280 tables, {bad} mismatches, {t:.2?}"),
    )
}

fn exhaustive_multiples(modulus: &BinaryPolynomial, d: u64) -> Vec<Weight4Multiple> {
    let mut out = Vec::new();
    for t3 in 3..=d {
        for t2 in 2..t3 {
            for t1 in 1..t2 {
                let m = Weight4Multiple::new(t1, t2, t3).unwrap();
                if m.polynomial().rem(modulus).unwrap().is_zero() {
                    out.push(m);
                }
            }
        }
    }
    out
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let (mut equal, mut sound, mut total) = (0, true, 0);
    for k in 0..10 {
        let a = 3 + k % 4;
        let b = 7 + k % 2;
        let group = [
            LfsrSpec::new(random_primitive(a, &mut rng), vec![0]).unwrap(),
            LfsrSpec::new(random_primitive(b, &mut rng), vec![0]).unwrap(),
        ];
        let refs: Vec<_> = group.iter().collect();
        let m = product_modulus(&refs).unwrap();
        let mut fast = find_weight4(&m, 128, usize::MAX).unwrap().found;
        sound &= fast.iter().all(|x| verify_multiple(x, &refs));
        total += fast.len();
        fast.sort_by_key(|x| (x.t3(), x.t2(), x.t1()));
        if fast == exhaustive_multiples(&m, 128) {
            equal += 1;
        }
    }
    verdict(
        equal == 10 && sound,
        format!("{equal}/10 moduli match enumeration, {total} multiples, all verified: {sound}"),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let (mut observed, mut expected) = (0.0, 0.0);
    let trials = 24;
    for k in 0..trials {
        let m2 = 14 + k % 7;
        let a = 4 + k % 5;
        let b = m2 - a;
        let group = [
            LfsrSpec::new(random_primitive(a, &mut rng), vec![0]).unwrap(),
            LfsrSpec::new(random_primitive(b, &mut rng), vec![0]).unwrap(),
        ];
        let refs: Vec<_> = group.iter().collect();
        let m = product_modulus(&refs).unwrap();
        let d = (48.0 * 2f64.powi(m2 as i32)).cbrt().round() as u64;
        observed += find_weight4(&m, d, usize::MAX).unwrap().found.len() as f64;
        expected += expected_count(m2 as u32, d as f64);
    }
    let (mo, me) = (observed / trials as f64, expected / trials as f64);
    verdict(
        (0.5..=2.0).contains(&(mo / me)),
        format!(
            "{trials} products, mean observed {mo:.2}, mean heuristic {me:.2}, ratio {:.3}",
            mo / me
        ),
    )
}

fn criterion_6() -> Verdict {
    let toy_f = BooleanFunction::from_hex(6, "0xe41b33cc693c6969").unwrap();
    let spec = build_spec(&[0x18ef, 0x64f, 0x313], &[&[0, 5], &[1, 7], &[2, 6]], toy_f);
    let p = attack::plan(&spec, &[0, 1, 2]).unwrap();
    let stage = &p.stages[0];
    let group: Vec<_> = stage
        .group2_lfsrs
        .iter()
        .map(|&r| &spec.lfsrs()[r])
        .collect();
    let report = find_weight4(&product_modulus(&group).unwrap(), 400, usize::MAX).unwrap();
    let ks = keystream(&spec, &[0x9a5, 0x2c3, 0x0f1], 20_000).unwrap();
    let eqs = harvest_equations(&ks, &report.found, 12_000).unwrap();
    let g = build_g_columns(&spec, stage, &eqs).unwrap();
    let naive = score_candidates_naive(&g, &eqs).unwrap();
    let (w0, w1) = accumulate_tables(&g, &eqs).unwrap();
    let divisible = [&w0, &w1].iter().all(|w| {
        let mut t = (*w).clone();
        fwht(&mut t).unwrap();
        t.iter().all(|x| x % (1 << g.n1) == 0)
    });
    let fast = score_candidates(w0, w1, g.n1, eqs.class_counts()).unwrap() == naive;
    let tradeoff: Vec<bool> = [0, 4, 12]
        .iter()
        .map(|&s| score_candidates_tradeoff(&g, &eqs, s).unwrap() == naive)
        .collect();
    verdict(
        g.m1 == 12 && g.n1 == 2 && eqs.len() >= 10_000 && divisible && fast && tradeoff.iter().all(|&x| x),
        format!(
            "m1 = {}, n1 = {}, {} relations, fast exact {fast}, tradeoff s=0/4/12 exact {tradeoff:?}, divisible {divisible}",
            g.m1,
            g.n1,
            eqs.len()
        ),
    )
}

fn criterion_7() -> Verdict {
    let spec = load_spec(&specs_dir().join("toy.json")).unwrap();
    let f = spec.function();
    let resilient = f.is_balanced() && resiliency_order(f) >= 1;
    let bias = p_spectrum(f).unwrap().p0_bias();
    let p0 = p_spectrum(f).unwrap().prob(0);
    let p = attack::plan(&spec, &[0, 1, 2]).unwrap();
    let bits = 1usize << 19;
    let reports = precompute_multiples(&spec, &p, bits, Backend::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let (mut ok, mut within, mut slowest) = (0, 0, Duration::ZERO);
    for _ in 0..10 {
        let key = random_state(&spec, &mut rng);
        let ks = keystream(&spec, &key, bits).unwrap();
        let start = Instant::now();
        let res = run_attack(&spec, &ks, &p, &reports, &AttackConfig::default());
        slowest = slowest.max(start.elapsed());
        let Ok(out) = res else { continue };
        if out.state == key && keystream(&spec, &out.state, bits).unwrap() == ks {
            ok += 1;
        }
        if let Some(c) = out.attempts[0]
            .candidates
            .iter()
            .find(|c| c.candidate == key[0])
        {
            let m = c.total() as f64;
            let sigma = 2.0 * (p0 * (1.0 - p0) / m).sqrt();
            if (c.bias - bias).abs() < 4.0 * sigma {
                within += 1;
            }
        }
    }
    verdict(
        resilient && ok >= 9 && within == 10 && slowest < Duration::from_secs(120),
        format!(
            "{ok}/10 keys recovered, slowest run {slowest:.2?}, stage-1 bias within 4 sigma of {bias:.5} in {within}/10"
        ),
    )
}

fn criterion_8() -> Verdict {
    let path = specs_dir().join("paper_29_31_37.json");
    let spec = load_spec(&path).unwrap();
    let a1 = attack::plan(&spec, &[0, 1, 2]).unwrap();
    let a2 = attack::plan(&spec, &[2, 0, 1]).unwrap();
    let n1 = format!("{:.2}", a1.stages[0].log2_equations());
    let n2 = a2.stages[0].log2_equations();
    let bytes1 = a1.keystream_required as f64 / 8.0;
    let bytes2 = a2.keystream_required as f64 / 8.0;
    let (r1, r2) = (bytes1 / 3.06e6, bytes2 / 985e3);
    let text = cmd_attack(&AttackOptions {
        spec: path,
        keystream: None,
        order: Some(vec![0, 1, 2]),
        caches: vec![],
        cache_dir: None,
        top_k: 8,
        split_bits: 0,
        plan_only: true,
        backend: Backend::default(),
    })
    .unwrap();
    println!(
        "    Attack 2 stage 1 (m1 = 37): formula N = 37*2^22 = 2^{n2:.2}; the reference figure 2^26.86 is 0.35 lower in the exponent"
    );
    verdict(
        n1 == "26.86"
            && text.contains("(2^26.86)")
            && (0.5..=2.0).contains(&r1)
            && (0.5..=2.0).contains(&r2),
        format!(
            "Attack 1 N = 2^{n1}, keystream {:.2} MB (x{r1:.2} of 3.06 MB); Attack 2 keystream {:.0} KB (x{r2:.2} of 985 KB)",
            bytes1 / 1e6,
            bytes2 / 1e3
        ),
    )
}

fn criterion_9() -> Verdict {
    let spec = load_spec(&specs_dir().join("toy.json")).unwrap();
    let all: Vec<_> = spec.lfsrs().iter().collect();
    let report = find_weight4(&product_modulus(&all).unwrap(), 6000, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let key = random_state(&spec, &mut rng);
    let ks = keystream(&spec, &key, 12_000).unwrap();
    let eqs = harvest_equations(&ks, &report.found, usize::MAX).unwrap();
    let x = naive_inputs(&spec, &key, ks.len());
    let zero = (0..eqs.len())
        .filter(|&i| {
            eqs.positions(i)
                .iter()
                .fold(0, |acc, &t| acc ^ x[t as usize])
                == 0
        })
        .count();
    verdict(
        !report.found.is_empty() && zero == eqs.len(),
        format!(
            "{} multiples of the degree-33 product, {zero}/{} relations with zero input sum",
            report.found.len(),
            eqs.len()
        ),
    )
}

fn criterion_10() -> Verdict {
    let Some(cache) = std::env::var_os("COMB_ATTACK_PAPER_CACHE") else {
        return verdict(
            false,
            "not run: needs weight-4 multiples of the degree-68 group-2 product up to degree ~2^24.8 in COMB_ATTACK_PAPER_CACHE; the collision search is O(D^2) ~ 2^49.5 residue steps there",
        );
    };
    let spec = load_spec(&specs_dir().join("paper_29_31_37.json")).unwrap();
    let p = attack::plan(&spec, &[0, 1, 2]).unwrap();
    let report = load_cache(Path::new(&cache)).unwrap();
    let stage = &p.stages[0];
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let key = random_state(&spec, &mut rng);
    let ks = keystream(&spec, &key, p.keystream_required as usize).unwrap();
    let start = Instant::now();
    let eqs = harvest_equations(&ks, &report.found, 2 * stage.equations_required as usize).unwrap();
    let g = build_g_columns(&spec, stage, &eqs).unwrap();
    let top = attack::top_k_tradeoff(Backend::default(), &g, &eqs, 3, 8, true).unwrap();
    let rank = top.iter().position(|c| c.candidate == key[0]);
    verdict(
        rank.is_some(),
        format!(
            "{} relations, true stage-1 state rank {rank:?}, {:.1?}",
            eqs.len(),
            start.elapsed()
        ),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let long = args.iter().any(|a| a == "--long");
    let criteria: [(u32, fn() -> Verdict); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (n, run) in criteria {
        let v = run();
        println!(
            "criterion {n}: {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    if long {
        let v = criterion_10();
        println!(
            "criterion 10: {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    } else {
        println!("criterion 10: SKIPPED - long-running, pass --long to run");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
