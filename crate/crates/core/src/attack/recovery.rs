use std::time::{Duration, Instant};

use log::{debug, info, warn};

use crate::exec::Backend;
use crate::gf2::{keystream_with, GeneratorSpec, Keystream};
use crate::multiples::{find_weight4_with, product_modulus, MultipleSearchReport};

use super::columns::build_g_columns_with;
use super::equations::{filter_known, harvest_equations, EquationSet};
use super::plan::{AttackPlan, StagePlan};
use super::scoring::{
    accumulate_tables_with, score_candidates_with, top_k_tradeoff, CandidateScore, MAX_TABLE_M1,
};
use super::AttackError;

/// Most survivors listed in an [`AttackError::Ambiguous`] report.
const MAX_REPORTED_SURVIVORS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    /// Candidates kept per stage for backtracking.
    pub top_k: usize,
    /// High candidate bits enumerated outside the transform.
    pub split_bits: usize,
    /// Relations harvested per stage, as a multiple of the plan's figure.
    pub equation_factor: f64,
    /// Hard cap on harvested relations per stage.
    pub max_equations: Option<u64>,
    /// Keystream bits checked by the final search beyond the register length.
    pub final_window_extra: usize,
    pub backend: Backend,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            top_k: 8,
            split_bits: 0,
            equation_factor: 2.0,
            max_equations: None,
            final_window_extra: 40,
            backend: Backend::default(),
        }
    }
}

/// One visit of a stage during the search.
#[derive(Debug, Clone, PartialEq)]
pub struct StageAttempt {
    pub stage: usize,
    pub target_lfsrs: Vec<usize>,
    /// States assumed for earlier stages on this path.
    pub assumed: Vec<(usize, u64)>,
    pub equations: usize,
    pub candidates: Vec<CandidateScore>,
    /// Final stage only: the state found, if any.
    pub final_state: Option<u64>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    /// Recovered initial state, one word per LFSR.
    pub state: Vec<u64>,
    pub attempts: Vec<StageAttempt>,
    pub warnings: Vec<String>,
    /// Harvested relation count per non-final stage.
    pub harvested: Vec<usize>,
    pub elapsed: Duration,
}

/// Searches weight-4 multiples for every non-final stage's group-2
/// product, with degree bound `D* ` from the plan clamped to `[3, ks_len-1]`.
pub fn precompute_multiples(
    spec: &GeneratorSpec,
    plan: &AttackPlan,
    ks_len: usize,
    backend: Backend,
) -> Result<Vec<MultipleSearchReport>, AttackError> {
    let mut out = Vec::new();
    for stage in plan.stages.iter().filter(|s| !s.is_final) {
        let group: Vec<_> = stage
            .group2_lfsrs
            .iter()
            .map(|&r| &spec.lfsrs()[r])
            .collect();
        let modulus = product_modulus(&group)?;
        let hi = (ks_len as u64).saturating_sub(1).max(3);
        let d = (stage.multiple_degree_bound.ceil() as u64).clamp(3, hi);
        info!("stage {}: searching multiples of degree ≤ {d}", stage.index);
        out.push(find_weight4_with(backend, &modulus, d, usize::MAX)?);
    }
    Ok(out)
}

/// The unique state of the one unknown LFSR that reproduces `window`
/// keystream bits, exhaustively over all `2^l` states.
pub fn final_direct_search(
    spec: &GeneratorSpec,
    ks: &Keystream,
    known: &[Option<u64>],
    window: usize,
) -> Result<u64, AttackError> {
    final_direct_search_with(Backend::default(), spec, ks, known, window)
}

pub fn final_direct_search_with(
    backend: Backend,
    spec: &GeneratorSpec,
    ks: &Keystream,
    known: &[Option<u64>],
    window: usize,
) -> Result<u64, AttackError> {
    let unknown: Vec<usize> = (0..spec.lfsrs().len())
        .filter(|&r| known.get(r).copied().flatten().is_none())
        .collect();
    let &[r] = unknown.as_slice() else {
        return Err(AttackError::Plan(format!(
            "final search needs exactly one unknown LFSR, got {unknown:?}"
        )));
    };
    let lfsr = &spec.lfsrs()[r];
    let l = lfsr.length();
    if l > 40 {
        return Err(AttackError::TooLarge {
            what: "final search register",
            m1: l,
            max: 40,
        });
    }
    let window = window.min(ks.len());
    let reach = lfsr.taps().iter().copied().max().unwrap_or(0);

    let known_seqs: Vec<_> = spec
        .lfsrs()
        .iter()
        .enumerate()
        .map(|(k, lk)| {
            let s = known.get(k).copied().flatten().unwrap_or(0);
            let reach = lk.taps().iter().copied().max().unwrap_or(0);
            lk.sequence(s, window + reach)
        })
        .collect();
    let mut fixed = Vec::with_capacity(window);
    for t in 0..window {
        fixed.push(spec.inputs_at(&known_seqs, t) & !spec.input_mask(&[r]));
    }
    let own: Vec<(usize, usize)> = spec
        .inputs_of(r)
        .into_iter()
        .map(|j| (j, spec.input_source(j).1))
        .collect();
    let forms: Vec<u64> = (0..(window + reach) as u64)
        .map(|t| lfsr.modulus().x_pow(t))
        .collect();
    let f = spec.function();

    let survivors: Vec<u64> = backend
        .map_chunks(1usize << l, 1 << 12, |range| {
            let mut found = Vec::new();
            for c in range.map(|c| c as u64) {
                let ok = (0..window).all(|t| {
                    let x = own.iter().fold(fixed[t], |x, &(j, p)| {
                        x | ((((forms[t + p] & c).count_ones() & 1) as usize) << j)
                    });
                    f.eval(x) == ks.get(t)
                });
                if ok {
                    found.push(c);
                    if found.len() > MAX_REPORTED_SURVIVORS {
                        break;
                    }
                }
            }
            found
        })
        .into_iter()
        .flatten()
        .take(MAX_REPORTED_SURVIVORS + 1)
        .collect();
    match survivors.as_slice() {
        [] => Err(AttackError::NoSurvivor),
        [c] => Ok(*c),
        _ => Err(AttackError::Ambiguous(survivors)),
    }
}

struct Search<'a> {
    spec: &'a GeneratorSpec,
    ks: &'a Keystream,
    plan: &'a AttackPlan,
    config: &'a AttackConfig,
    stage_eqs: Vec<Option<EquationSet>>,
    attempts: Vec<StageAttempt>,
}

impl Search<'_> {
    fn matches_keystream(&self, state: &[u64]) -> Result<bool, AttackError> {
        let regen = keystream_with(self.config.backend, self.spec, state, self.ks.len())?;
        Ok(regen.bits() == self.ks.bits())
    }

    fn assumed(known: &[Option<u64>]) -> Vec<(usize, u64)> {
        known
            .iter()
            .enumerate()
            .filter_map(|(r, s)| s.map(|s| (r, s)))
            .collect()
    }

    fn run_final(
        &mut self,
        stage: &StagePlan,
        known: &mut [Option<u64>],
    ) -> Result<(), AttackError> {
        let start = Instant::now();
        let r = stage.target_lfsrs[0];
        let window = stage.final_window(self.spec, self.config.final_window_extra);
        let result =
            final_direct_search_with(self.config.backend, self.spec, self.ks, known, window);
        let candidates = match result {
            Ok(c) => vec![c],
            Err(AttackError::Ambiguous(list)) => {
                debug!("final stage: {} survivors, checking each", list.len());
                list
            }
            Err(AttackError::NoSurvivor) => Vec::new(),
            Err(e) => return Err(e),
        };
        let mut hit = None;
        for c in candidates {
            known[r] = Some(c);
            let state: Vec<u64> = known.iter().map(|s| s.unwrap_or(0)).collect();
            if self.matches_keystream(&state)? {
                hit = Some(c);
                break;
            }
        }
        known[r] = None;
        self.attempts.push(StageAttempt {
            stage: stage.index,
            target_lfsrs: stage.target_lfsrs.clone(),
            assumed: Self::assumed(known),
            equations: 0,
            candidates: Vec::new(),
            final_state: hit,
            elapsed: start.elapsed(),
        });
        match hit {
            Some(c) => {
                known[r] = Some(c);
                Ok(())
            }
            None => Err(AttackError::NoSurvivor),
        }
    }

    fn score(
        &self,
        stage: &StagePlan,
        eqs: &EquationSet,
    ) -> Result<Vec<CandidateScore>, AttackError> {
        let backend = self.config.backend;
        let g = build_g_columns_with(backend, self.spec, stage, eqs)?;
        let k = self.config.top_k;
        if self.config.split_bits == 0 && g.m1 <= MAX_TABLE_M1 {
            let (w0, w1) = accumulate_tables_with(backend, &g, eqs)?;
            let table = score_candidates_with(backend, w0, w1, g.n1, eqs.class_counts())?;
            Ok(table.top_k(k, true))
        } else {
            let s = self
                .config
                .split_bits
                .max(g.m1.saturating_sub(MAX_TABLE_M1));
            top_k_tradeoff(backend, &g, eqs, s, k, true)
        }
    }

    /// Depth-first over the ranked candidates of each stage.
    fn descend(&mut self, idx: usize, known: &mut Vec<Option<u64>>) -> Result<(), AttackError> {
        let stage = &self.plan.stages[idx];
        if stage.is_final {
            return self.run_final(stage, known);
        }
        let start = Instant::now();
        let base = self.stage_eqs[idx].as_ref().expect("harvested");
        let eqs = match filter_known(self.spec, base, known, idx) {
            Ok(e) => e,
            Err(e @ AttackError::AllFiltered { .. }) => {
                warn!("{e}");
                return Err(AttackError::Exhausted);
            }
            Err(e) => return Err(e),
        };
        let candidates = self.score(stage, &eqs)?;
        debug!(
            "stage {idx}: {} relations, best {:?}",
            eqs.len(),
            candidates.first().map(|c| (c.candidate, c.zscore))
        );
        let g_layout: Vec<(usize, usize)> = {
            let mut off = 0;
            stage
                .target_lfsrs
                .iter()
                .map(|&r| {
                    let e = (r, off);
                    off += self.spec.lfsrs()[r].length();
                    e
                })
                .collect()
        };
        self.attempts.push(StageAttempt {
            stage: idx,
            target_lfsrs: stage.target_lfsrs.clone(),
            assumed: Self::assumed(known),
            equations: eqs.len(),
            candidates: candidates.clone(),
            final_state: None,
            elapsed: start.elapsed(),
        });
        for cand in &candidates {
            for &(r, off) in &g_layout {
                known[r] = Some((cand.candidate >> off) & self.spec.lfsrs()[r].state_mask());
            }
            match self.descend(idx + 1, known) {
                Ok(()) => return Ok(()),
                Err(AttackError::NoSurvivor | AttackError::Exhausted) => {}
                Err(e) => return Err(e),
            }
        }
        for &(r, _) in &g_layout {
            known[r] = None;
        }
        Err(AttackError::Exhausted)
    }
}

/// Recovers the full initial state stage by stage, backtracking through
/// the top-ranked candidates of each stage. `multiples` must hold a report
/// for the group-2 product of every non-final stage.
pub fn run_attack(
    spec: &GeneratorSpec,
    ks: &Keystream,
    plan: &AttackPlan,
    multiples: &[MultipleSearchReport],
    config: &AttackConfig,
) -> Result<AttackOutcome, AttackError> {
    let start = Instant::now();
    let mut warnings = plan.warnings.clone();
    if (ks.len() as u64) < plan.keystream_required {
        let w = format!(
            "keystream has {} bits, plan estimate is {}; candidate ranking may degrade",
            ks.len(),
            plan.keystream_required
        );
        warn!("{w}");
        warnings.push(w);
    }

    let mut stage_eqs = Vec::with_capacity(plan.stages.len());
    let mut harvested = Vec::new();
    for stage in &plan.stages {
        if stage.is_final {
            stage_eqs.push(None);
            continue;
        }
        let group: Vec<_> = stage
            .group2_lfsrs
            .iter()
            .map(|&r| &spec.lfsrs()[r])
            .collect();
        let modulus = product_modulus(&group)?;
        let report = multiples
            .iter()
            .find(|m| m.modulus == modulus)
            .ok_or_else(|| AttackError::MissingMultiples {
                stage: stage.index,
                modulus: modulus.to_hex(),
            })?;
        if report.found.is_empty() {
            return Err(AttackError::MissingMultiples {
                stage: stage.index,
                modulus: modulus.to_hex(),
            });
        }
        let limit = config
            .max_equations
            .unwrap_or((stage.equations_to_harvest as f64 * config.equation_factor).ceil() as u64);
        let eqs = harvest_equations(ks, &report.found, limit.min(usize::MAX as u64) as usize)?;
        if (eqs.len() as u64) < stage.equations_to_harvest {
            let w = format!(
                "stage {}: harvested {} relations, plan asks for {}",
                stage.index,
                eqs.len(),
                stage.equations_to_harvest
            );
            warn!("{w}");
            warnings.push(w);
        }
        info!("stage {}: harvested {} relations", stage.index, eqs.len());
        harvested.push(eqs.len());
        stage_eqs.push(Some(eqs));
    }

    let mut search = Search {
        spec,
        ks,
        plan,
        config,
        stage_eqs,
        attempts: Vec::new(),
    };
    let mut known = vec![None; spec.lfsrs().len()];
    search.descend(0, &mut known)?;
    let state: Vec<u64> = known
        .into_iter()
        .map(|s| s.expect("all stages set"))
        .collect();
    Ok(AttackOutcome {
        state,
        attempts: search.attempts,
        warnings,
        harvested,
        elapsed: start.elapsed(),
    })
}
