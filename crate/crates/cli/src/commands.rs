use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use comb_attack::attack::{self, AttackConfig, AttackError, AttackOutcome, AttackPlan};
use comb_attack::boolfn::{
    autocorrelation, nonlinearity, p_spectrum, p_spectrum_bruteforce, resiliency_order,
    theorem1_check, walsh_spectrum,
};
use comb_attack::gf2::{keystream_with, GeneratorSpec};
use comb_attack::multiples::{
    find_weight4_with, product_modulus, verify_multiple, MultipleSearchReport,
};
use comb_attack::{Backend, BooleanFunction, Keystream};
use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formats::{
    decode_cache, decode_keystream, encode_cache, encode_keystream, format_key, parse_key,
    parse_truth_table, SpecDocument,
};
use crate::{CliError, ErrorKind, CACHE_DIR_ENV};

/// Largest arity accepted by `verify` (brute force costs `2^{3n}` per function).
pub const MAX_VERIFY_ARITY: usize = 6;
/// Largest arity for the exhaustive sweep over balanced functions.
pub const MAX_EXHAUSTIVE_ARITY: usize = 4;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), CliError> {
    fs::write(path, data).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn load_spec(path: &Path) -> Result<GeneratorSpec, CliError> {
    SpecDocument::parse(&read_text(path)?)?.to_spec()
}

pub fn load_keystream(path: &Path) -> Result<Keystream, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    decode_keystream(&bytes)
}

pub fn load_cache(path: &Path) -> Result<MultipleSearchReport, CliError> {
    decode_cache(&read_text(path)?)
}

/// Cache directory from the environment, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
}

pub fn cache_file_name(report: &MultipleSearchReport) -> String {
    format!("{}.w4", report.modulus.to_hex())
}

pub fn cmd_gen(
    spec_path: &Path,
    key: &str,
    nbits: usize,
    out: &Path,
    backend: Backend,
) -> Result<String, CliError> {
    let spec = load_spec(spec_path)?;
    let state = parse_key(&spec, key)?;
    let ks = keystream_with(backend, &spec, &state, nbits)
        .map_err(|e| CliError::validation(e.to_string()))?;
    write_file(out, &encode_keystream(&ks))?;
    Ok(format!(
        "wrote {nbits} keystream bits to {} (key {})\n",
        out.display(),
        format_key(&spec, &state)
    ))
}

pub fn cmd_multiples(
    spec_path: &Path,
    group: &[usize],
    max_degree: u64,
    out: Option<&Path>,
    backend: Backend,
) -> Result<String, CliError> {
    let spec = load_spec(spec_path)?;
    if group.is_empty() {
        return Err(CliError::validation("empty LFSR group"));
    }
    let members = group
        .iter()
        .map(|&r| {
            spec.lfsrs()
                .get(r)
                .ok_or_else(|| CliError::validation(format!("no LFSR {r}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let modulus = product_modulus(&members).map_err(|e| CliError::validation(e.to_string()))?;
    let start = Instant::now();
    let report = find_weight4_with(backend, &modulus, max_degree, usize::MAX)
        .map_err(|e| CliError::validation(e.to_string()))?;
    if let Some(bad) = report.found.iter().find(|m| !verify_multiple(m, &members)) {
        return Err(CliError {
            kind: ErrorKind::Invariant,
            message: format!("search emitted {bad}, which is not a multiple of the group"),
        });
    }
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => cache_dir_from_env()
            .ok_or_else(|| {
                CliError::validation(format!("no --out given and {CACHE_DIR_ENV} unset"))
            })?
            .join(cache_file_name(&report)),
    };
    write_file(&path, encode_cache(&report).as_bytes())?;
    let mut s = format!(
        "modulus {} (degree {}), max degree {}: {} multiples, {:.4} expected, {:.2?}\n",
        modulus.to_hex(),
        modulus.degree().unwrap_or(0),
        max_degree,
        report.found.len(),
        report.expected_count,
        start.elapsed()
    );
    if report.found.is_empty() {
        let w = format!(
            "warning: no weight-4 multiple of degree <= {max_degree} (expected count {:.4})\n",
            report.expected_count
        );
        warn!("{}", w.trim_end());
        s.push_str(&w);
    }
    writeln!(s, "wrote {}", path.display()).unwrap();
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct AttackOptions {
    pub spec: PathBuf,
    pub keystream: Option<PathBuf>,
    pub order: Option<Vec<usize>>,
    pub caches: Vec<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub top_k: usize,
    pub split_bits: usize,
    pub plan_only: bool,
    pub backend: Backend,
}

/// Plans for `order` and, as a comparison, every rotation of it.
pub fn plan_report(
    spec: &GeneratorSpec,
    order: &[usize],
) -> Result<(AttackPlan, String), CliError> {
    let p = attack::plan(spec, order)?;
    let mut s = p.to_string();
    let k = order.len();
    if k > 1 {
        s.push_str("orderings:\n");
        for rot in 0..k {
            let o: Vec<usize> = (0..k).map(|i| order[(i + rot) % k]).collect();
            let q = attack::plan(spec, &o)?;
            let worst = q
                .stages
                .iter()
                .filter(|st| !st.is_final)
                .map(|st| st.log2_time)
                .fold(0.0f64, f64::max);
            writeln!(
                s,
                "  {:?}: stage-1 N = 2^{:.2}, keystream {} bits ({:.0} bytes), max stage time 2^{:.2}",
                o,
                q.stages[0].log2_equations(),
                q.keystream_required,
                q.keystream_required as f64 / 8.0,
                worst
            )
            .unwrap();
        }
    }
    Ok((p, s))
}

fn gather_multiples(
    spec: &GeneratorSpec,
    plan: &AttackPlan,
    opts: &AttackOptions,
    ks_len: usize,
) -> Result<Vec<MultipleSearchReport>, CliError> {
    let mut reports = opts
        .caches
        .iter()
        .map(|p| load_cache(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut missing = false;
    for stage in plan.stages.iter().filter(|s| !s.is_final) {
        let group: Vec<_> = stage
            .group2_lfsrs
            .iter()
            .map(|&r| &spec.lfsrs()[r])
            .collect();
        let modulus = product_modulus(&group).map_err(|e| CliError::validation(e.to_string()))?;
        if let Some(r) = reports.iter().find(|r| r.modulus == modulus) {
            if let Some(bad) = r.found.iter().find(|m| !verify_multiple(m, &group)) {
                return Err(CliError::validation(format!(
                    "cache for {}: {bad} is not a multiple",
                    modulus.to_hex()
                )));
            }
            continue;
        }
        let cached = opts
            .cache_dir
            .as_ref()
            .map(|d| d.join(format!("{}.w4", modulus.to_hex())))
            .filter(|p| p.exists());
        match cached {
            Some(p) => {
                info!("using cached multiples {}", p.display());
                reports.push(load_cache(&p)?);
            }
            None => missing = true,
        }
    }
    if missing {
        let fresh = attack::precompute_multiples(spec, plan, ks_len, opts.backend)?;
        for r in fresh {
            if reports.iter().any(|x| x.modulus == r.modulus) {
                continue;
            }
            if let Some(dir) = &opts.cache_dir {
                fs::create_dir_all(dir)?;
                write_file(&dir.join(cache_file_name(&r)), encode_cache(&r).as_bytes())?;
            }
            reports.push(r);
        }
    }
    Ok(reports)
}

fn outcome_report(
    spec: &GeneratorSpec,
    ks: &Keystream,
    out: &AttackOutcome,
    backend: Backend,
) -> Result<String, CliError> {
    let mut s = String::new();
    for (stage, n) in out.harvested.iter().enumerate() {
        writeln!(s, "stage {stage}: harvested {n} relations").unwrap();
    }
    for a in &out.attempts {
        let assumed: Vec<String> = a
            .assumed
            .iter()
            .map(|(r, v)| format!("L{r}={v:#x}"))
            .collect();
        writeln!(
            s,
            "attempt: stage {} target {:?} given [{}] relations {} time {:.3?}",
            a.stage,
            a.target_lfsrs,
            assumed.join(" "),
            a.equations,
            a.elapsed
        )
        .unwrap();
        if let Some(f) = a.final_state {
            writeln!(s, "  final state {f:#x}").unwrap();
        } else if a.candidates.is_empty() && a.equations == 0 {
            writeln!(s, "  final search: no consistent state").unwrap();
        }
        if !a.candidates.is_empty() {
            s.push_str("  candidate\tn0\tn1_count\tbias\tzscore\n");
            for c in &a.candidates {
                writeln!(
                    s,
                    "  {:#x}\t{}\t{}\t{:.6}\t{:.3}",
                    c.candidate, c.n0, c.n1_count, c.bias, c.zscore
                )
                .unwrap();
            }
        }
    }
    for w in &out.warnings {
        writeln!(s, "warning: {w}").unwrap();
    }
    writeln!(s, "recovered key {}", format_key(spec, &out.state)).unwrap();
    let regen = keystream_with(backend, spec, &out.state, ks.len())
        .map_err(|e| CliError::validation(e.to_string()))?;
    if regen.bits() != ks.bits() {
        return Err(CliError {
            kind: ErrorKind::Invariant,
            message: "recovered state does not regenerate the keystream".into(),
        });
    }
    writeln!(s, "regeneration check: ok ({} bits)", ks.len()).unwrap();
    writeln!(s, "total time {:.3?}", out.elapsed).unwrap();
    Ok(s)
}

pub fn cmd_attack(opts: &AttackOptions) -> Result<String, CliError> {
    let spec = load_spec(&opts.spec)?;
    let order = opts
        .order
        .clone()
        .unwrap_or_else(|| (0..spec.lfsrs().len()).collect());
    let (plan, mut s) = plan_report(&spec, &order)?;
    if opts.plan_only {
        return Ok(s);
    }
    let Some(ks_path) = &opts.keystream else {
        return Err(CliError::validation(
            "a keystream file is required unless --plan-only is given",
        ));
    };
    let ks = load_keystream(ks_path)?;
    if (ks.len() as u64) < plan.keystream_required {
        writeln!(
            s,
            "warning: keystream has {} bits, below the plan estimate of {}; confidence is reduced",
            ks.len(),
            plan.keystream_required
        )
        .unwrap();
    }
    let reports = gather_multiples(&spec, &plan, opts, ks.len())?;
    let config = AttackConfig {
        top_k: opts.top_k,
        split_bits: opts.split_bits,
        backend: opts.backend,
        ..AttackConfig::default()
    };
    match attack::run_attack(&spec, &ks, &plan, &reports, &config) {
        Ok(out) => {
            s.push_str(&outcome_report(&spec, &ks, &out, opts.backend)?);
            Ok(s)
        }
        Err(e @ AttackError::Exhausted) => Err(CliError {
            kind: ErrorKind::Exhausted,
            message: format!("{s}{e}"),
        }),
        Err(e) => Err(e.into()),
    }
}

fn analyze_function(f: &BooleanFunction) -> Result<String, CliError> {
    let n = f.arity();
    let mut s = String::new();
    writeln!(s, "n = {n}").unwrap();
    writeln!(s, "weight = {} of {}", f.weight(), 1usize << n).unwrap();
    writeln!(s, "balanced = {}", f.is_balanced()).unwrap();
    writeln!(s, "nonlinearity = {}", nonlinearity(f)).unwrap();
    writeln!(s, "resiliency order = {}", resiliency_order(f)).unwrap();
    writeln!(s, "max |W_f| = {}", walsh_spectrum(f).max_abs()).unwrap();
    let delta = autocorrelation(f).delta;
    writeln!(s, "delta_f = {delta}").unwrap();
    let r = theorem1_check(f).map_err(|e| CliError::validation(e.to_string()))?;
    writeln!(
        s,
        "P_0 = {}/2^{} = {:.8} (bias 2(P_0 - 1/2) = {:.8})",
        r.p0_numerator,
        3 * n,
        r.p0(),
        2.0 * r.p0() - 1.0
    )
    .unwrap();
    writeln!(
        s,
        "bound P_0 >= 1/2 + 2^-{}: {} (margin {}/2^{})",
        n + 1,
        if r.bound1_holds() {
            "holds"
        } else {
            "VIOLATED"
        },
        r.bound1_margin,
        3 * n
    )
    .unwrap();
    writeln!(
        s,
        "min gap P_0 - P_u = {}/2^{} = 2^{:.3}; bound 2^-{}(1 - delta_f/2^{})^2 = 2^{:.3}: {}",
        r.min_gap_numerator,
        3 * n,
        r.min_gap().log2(),
        n + 1,
        n,
        r.gap_lower_bound().log2(),
        if r.bound2_holds() {
            "holds"
        } else {
            "VIOLATED"
        }
    )
    .unwrap();
    writeln!(
        s,
        "attack-relevant gap: 2^-{} for an ideal autocorrelation",
        n + 1
    )
    .unwrap();
    if !f.is_balanced() {
        writeln!(
            s,
            "warning: the function is unbalanced, so the bias bounds do not apply"
        )
        .unwrap();
    }
    Ok(s)
}

pub fn cmd_analyze(path: &Path) -> Result<String, CliError> {
    analyze_function(&parse_truth_table(&read_text(path)?)?)
}

/// Balanced functions on `n` variables, in lexicographic order of their
/// support.
fn all_balanced(n: usize) -> Vec<BooleanFunction> {
    let size = 1usize << n;
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(size / 2);
    fn rec(
        start: usize,
        size: usize,
        n: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<BooleanFunction>,
    ) {
        if pick.len() == size / 2 {
            let mut table = vec![false; size];
            for &x in pick.iter() {
                table[x] = true;
            }
            out.push(BooleanFunction::from_fn(n, |x| table[x]).expect("arity in range"));
            return;
        }
        for x in start..size {
            if size - x < size / 2 - pick.len() {
                break;
            }
            pick.push(x);
            rec(x + 1, size, n, pick, out);
            pick.pop();
        }
    }
    rec(0, size, n, &mut pick, &mut out);
    out
}

pub fn random_balanced(n: usize, rng: &mut ChaCha8Rng) -> BooleanFunction {
    let size = 1usize << n;
    let mut table: Vec<bool> = (0..size).map(|x| x < size / 2).collect();
    table.shuffle(rng);
    BooleanFunction::from_fn(n, |x| table[x]).expect("arity in range")
}

/// Returns the report and whether every check passed.
pub fn cmd_verify(
    n: usize,
    trials: usize,
    seed: u64,
    exhaustive: bool,
) -> Result<(String, bool), CliError> {
    if n == 0 || n > MAX_VERIFY_ARITY {
        return Err(CliError::validation(format!(
            "n must be in 1..={MAX_VERIFY_ARITY}"
        )));
    }
    let functions = if exhaustive {
        if n > MAX_EXHAUSTIVE_ARITY {
            return Err(CliError::validation(format!(
                "exhaustive sweep supports n <= {MAX_EXHAUSTIVE_ARITY}"
            )));
        }
        all_balanced(n)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials).map(|_| random_balanced(n, &mut rng)).collect()
    };
    let mut s = String::new();
    if exhaustive {
        writeln!(
            s,
            "verify n = {n}, exhaustive over {} balanced functions",
            functions.len()
        )
        .unwrap();
    } else {
        writeln!(
            s,
            "verify n = {n}, {trials} random balanced functions, seed {seed}"
        )
        .unwrap();
    }
    let (mut spectrum_ok, mut parseval_ok, mut theorem_ok) = (0usize, 0usize, 0usize);
    let mut min_margin1 = i128::MAX;
    let mut min_margin2 = i128::MAX;
    for (i, f) in functions.iter().enumerate() {
        let fast = p_spectrum(f).map_err(|e| CliError::validation(e.to_string()))?;
        let slow = p_spectrum_bruteforce(f).map_err(|e| CliError::validation(e.to_string()))?;
        if fast == slow {
            spectrum_ok += 1;
        } else {
            writeln!(s, "MISMATCH p_spectrum, function {i} {}", f.to_hex()).unwrap();
        }
        let w = walsh_spectrum(f);
        if w.values.iter().map(|v| v * v).sum::<i64>() == 1i64 << (2 * n) {
            parseval_ok += 1;
        } else {
            writeln!(s, "MISMATCH Parseval, function {i} {}", f.to_hex()).unwrap();
        }
        let r = theorem1_check(f).map_err(|e| CliError::validation(e.to_string()))?;
        if r.holds() {
            theorem_ok += 1;
        } else {
            writeln!(s, "VIOLATION theorem bounds, function {i} {}", f.to_hex()).unwrap();
        }
        min_margin1 = min_margin1.min(r.bound1_margin);
        min_margin2 = min_margin2.min(r.bound2_margin);
    }
    let total = functions.len();
    writeln!(s, "p_spectrum exact: {spectrum_ok}/{total}").unwrap();
    writeln!(s, "Parseval: {parseval_ok}/{total}").unwrap();
    writeln!(s, "bounds: {theorem_ok}/{total}").unwrap();
    if total > 0 {
        writeln!(s, "smallest P_0 margin: {min_margin1}/2^{}", 3 * n).unwrap();
        writeln!(s, "smallest gap-bound margin: {min_margin2}").unwrap();
    }
    let ok = spectrum_ok == total && parseval_ok == total && theorem_ok == total;
    writeln!(s, "{}", if ok { "all checks passed" } else { "FAILED" }).unwrap();
    Ok((s, ok))
}
