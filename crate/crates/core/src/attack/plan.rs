use std::fmt;

use crate::boolfn::autocorrelation;
use crate::gf2::GeneratorSpec;
use crate::multiples::{expected_count, min_degree_estimate};

use super::AttackError;

/// Accumulators are 64-bit; this keeps every count far from overflow.
pub const MAX_EQUATIONS: u64 = 1 << 40;

/// Parameters for one stage of the staged recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan {
    pub index: usize,
    pub target_lfsrs: Vec<usize>,
    pub known_lfsrs: Vec<usize>,
    pub group2_lfsrs: Vec<usize>,
    pub m1: usize,
    pub m2: usize,
    pub n1: usize,
    pub n2: usize,
    pub n_known: usize,
    /// Last stage: exhaustive search against the keystream, no multiples.
    pub is_final: bool,
    /// `S = m1·2^{2n+1}`.
    pub samples_required: u64,
    /// `N = 2^{n1}·S = m1·2^{2n+n1+1}` relations whose target sum vanishes.
    pub equations_required: u64,
    /// `N / (1 - Δ_f/2^n)^4`, the count the worst-case gap calls for.
    pub equations_required_worst_case: f64,
    /// Relations to harvest before the known-register filter: `N·2^{n_known}`.
    pub equations_to_harvest: u64,
    /// `2^{m1}·2^{-S/2^{2n+1}}`.
    pub expected_false_survivors: f64,
    /// `(6·2^{m2})^{1/3}`.
    pub min_multiple_degree: f64,
    /// Degree bound balancing multiple count against shifts per multiple.
    pub multiple_degree_bound: f64,
    pub expected_multiples: f64,
    /// `min_degree + N·2^{n_known}` bits: a single multiple, shifted.
    pub keystream_single_multiple: f64,
    /// `D + N·2^{n_known} / K(D)` bits at the balancing degree bound.
    pub keystream_bits: f64,
    /// `log2(m1·2^{n1}·2^{m1})`.
    pub log2_time: f64,
    /// `log2(2^{m1})` counters.
    pub log2_memory: f64,
    /// `log2(m1·2^{2n+n1}·2^{m1})`, the far end of the time-memory tradeoff.
    pub log2_time_tradeoff_max: f64,
    /// `log2(m1·2^{2n+n1})`.
    pub log2_memory_tradeoff_min: f64,
}

impl StagePlan {
    pub fn log2_equations(&self) -> f64 {
        (self.equations_required as f64).log2()
    }

    /// Positions past `t` read by the final search window.
    pub fn final_window(&self, spec: &GeneratorSpec, extra: usize) -> usize {
        self.target_lfsrs
            .iter()
            .map(|&r| spec.lfsrs()[r].length())
            .sum::<usize>()
            + extra
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackPlan {
    pub stages: Vec<StagePlan>,
    pub n: usize,
    pub m: usize,
    pub delta_f: i64,
    /// Keystream bits for the most demanding stage, several multiples per stage.
    pub keystream_required: u64,
    /// Same with one multiple per stage.
    pub keystream_single_multiple: u64,
    pub warnings: Vec<String>,
}

impl AttackPlan {
    pub fn order(&self) -> Vec<usize> {
        self.stages
            .iter()
            .flat_map(|s| s.target_lfsrs.iter().copied())
            .collect()
    }
}

/// Stage-by-stage parameters for attacking the LFSRs one at a time in `order`.
pub fn plan(spec: &GeneratorSpec, order: &[usize]) -> Result<AttackPlan, AttackError> {
    let k = spec.lfsrs().len();
    let mut seen = vec![false; k];
    if order.len() != k {
        return Err(AttackError::Order(format!(
            "order has {} entries for {k} LFSRs",
            order.len()
        )));
    }
    for &r in order {
        if r >= k || seen[r] {
            return Err(AttackError::Order(format!(
                "{order:?} is not a permutation of 0..{k}"
            )));
        }
        seen[r] = true;
    }

    let n = spec.n();
    let delta_f = autocorrelation(spec.function()).delta;
    let worst_factor = {
        let r = 1.0 - delta_f as f64 / 2f64.powi(n as i32);
        1.0 / r.powi(4)
    };
    let final_extra = 40usize;

    let mut stages = Vec::with_capacity(k);
    let mut warnings = vec![
        "the all-zero target state matches every relation and is excluded from ranking; a stage whose true state is zero cannot be recovered by the bias statistic".to_string(),
    ];
    if !spec.function().is_balanced() {
        warnings.push(
            "filtering function is unbalanced; the bias bounds assume a balanced function".into(),
        );
    }
    for (idx, &target) in order.iter().enumerate() {
        let targets = vec![target];
        let known: Vec<usize> = order[..idx].to_vec();
        let group2: Vec<usize> = order[idx + 1..].to_vec();
        let lens = |g: &[usize]| g.iter().map(|&r| spec.lfsrs()[r].length()).sum::<usize>();
        let count_inputs = |g: &[usize]| spec.input_mask(g).count_ones() as usize;
        let (m1, m2) = (lens(&targets), lens(&group2));
        let (n1, n2, n_known) = (
            count_inputs(&targets),
            count_inputs(&group2),
            count_inputs(&known),
        );
        if n1 == 0 {
            warnings.push(format!(
                "stage {idx}: LFSR {target} feeds no function input"
            ));
        }
        let is_final = group2.is_empty();

        let (samples, equations, harvest) = if is_final {
            (0, 0, 0)
        } else {
            let shift = 2 * n + 1;
            let samples = (m1 as u64)
                .checked_shl(shift as u32)
                .filter(|s| s >> shift == m1 as u64)
                .ok_or_else(|| AttackError::Plan(format!("S overflows at n = {n}")))?;
            let equations = samples
                .checked_shl(n1 as u32)
                .filter(|&e| e <= MAX_EQUATIONS)
                .ok_or_else(|| {
                    AttackError::Plan(format!("stage {idx}: N = m1·2^{{2n+n1+1}} exceeds 2^40"))
                })?;
            (samples, equations, equations << n_known)
        };
        let sample_scale = 2f64.powi(2 * n as i32 + 1);
        let false_survivors = if is_final {
            0.0
        } else {
            2f64.powi(m1 as i32) * 2f64.powf(-(samples as f64) / sample_scale)
        };

        let (dmin, dbound, kcount, ks_single, ks_multi) = if is_final {
            let reach = targets
                .iter()
                .flat_map(|&r| spec.lfsrs()[r].taps().iter().copied())
                .max()
                .unwrap_or(0);
            let w = (m1 + final_extra + reach) as f64;
            (0.0, 0.0, 0.0, w, w)
        } else {
            let need = harvest as f64;
            let dmin = min_degree_estimate(m2 as u32);
            let balance = (18.0 * need * 2f64.powi(m2 as i32)).powf(0.25);
            let d = dmin.max(balance);
            let kc = expected_count(m2 as u32, d);
            (dmin, d, kc, dmin + need, d + need / kc)
        };

        let lm1 = (m1 as f64).log2();
        stages.push(StagePlan {
            index: idx,
            target_lfsrs: targets,
            known_lfsrs: known,
            group2_lfsrs: group2,
            m1,
            m2,
            n1,
            n2,
            n_known,
            is_final,
            samples_required: samples,
            equations_required: equations,
            equations_required_worst_case: equations as f64 * worst_factor,
            equations_to_harvest: harvest,
            expected_false_survivors: false_survivors,
            min_multiple_degree: dmin,
            multiple_degree_bound: dbound,
            expected_multiples: kcount,
            keystream_single_multiple: ks_single,
            keystream_bits: ks_multi,
            log2_time: lm1 + n1 as f64 + m1 as f64,
            log2_memory: m1 as f64,
            log2_time_tradeoff_max: lm1 + (2 * n + n1) as f64 + m1 as f64,
            log2_memory_tradeoff_min: lm1 + (2 * n + n1) as f64,
        });
    }

    let max_of =
        |f: fn(&StagePlan) -> f64| stages.iter().map(f).fold(0.0f64, f64::max).ceil() as u64;
    Ok(AttackPlan {
        n,
        m: spec.m(),
        delta_f,
        keystream_required: max_of(|s| s.keystream_bits),
        keystream_single_multiple: max_of(|s| s.keystream_single_multiple),
        stages,
        warnings,
    })
}

impl fmt::Display for AttackPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "plan: m = {}, n = {}, Δ_f = {}, order = {:?}",
            self.m,
            self.n,
            self.delta_f,
            self.order()
        )?;
        for s in &self.stages {
            if s.is_final {
                writeln!(
                    f,
                    "  stage {}: LFSR {:?} by direct search (m1 = {}, window {} bits, 2^{} candidates)",
                    s.index, s.target_lfsrs, s.m1, s.keystream_bits as u64, s.m1
                )?;
                continue;
            }
            writeln!(
                f,
                "  stage {}: target {:?} known {:?} group2 {:?}",
                s.index, s.target_lfsrs, s.known_lfsrs, s.group2_lfsrs
            )?;
            writeln!(
                f,
                "    m1 = {}, m2 = {}, n1 = {}, n2 = {}, n_known = {}",
                s.m1, s.m2, s.n1, s.n2, s.n_known
            )?;
            writeln!(
                f,
                "    S = {} (2^{:.2}), N = {} (2^{:.2}), worst-case N = 2^{:.2}, harvest {} (2^{:.2})",
                s.samples_required,
                (s.samples_required as f64).log2(),
                s.equations_required,
                s.log2_equations(),
                s.equations_required_worst_case.log2(),
                s.equations_to_harvest,
                (s.equations_to_harvest as f64).log2()
            )?;
            writeln!(
                f,
                "    multiples: min degree 2^{:.2}, bound D = 2^{:.2} (~{:.1} expected)",
                s.min_multiple_degree.log2(),
                s.multiple_degree_bound.log2(),
                s.expected_multiples
            )?;
            writeln!(
                f,
                "    keystream: 2^{:.2} bits ({:.0} bytes); single multiple 2^{:.2} bits",
                s.keystream_bits.log2(),
                s.keystream_bits / 8.0,
                s.keystream_single_multiple.log2()
            )?;
            writeln!(
                f,
                "    time 2^{:.2}, memory 2^{:.2}; tradeoff down to memory 2^{:.2} at time 2^{:.2}; expected false survivors {:.2}",
                s.log2_time,
                s.log2_memory,
                s.log2_memory_tradeoff_min,
                s.log2_time_tradeoff_max,
                s.expected_false_survivors
            )?;
        }
        writeln!(
            f,
            "keystream required: {} bits ({:.0} bytes); with a single multiple per stage: {} bits",
            self.keystream_required,
            self.keystream_required as f64 / 8.0,
            self.keystream_single_multiple
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
