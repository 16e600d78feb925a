use super::{argmin, ids, HyperedgeDecision, Question, SubsetResult, TestConfig};
use crate::probcore::{clamp, cmi_from_table, DataMatrix, GroupCodes, MAX_TABLE_SIZE};
use crate::{OcteError, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Null replicates count as "at least as large" within this margin, so that
/// relabelings of the observed table are not lost to rounding.
const TIE_MARGIN: f64 = 1e-12;

/// Plug-in CMI over precomputed group codes. A table cell is
/// `base[t] + tail[t] * nb` with `base[t] = s[t] * na * nb + y[t]`.
struct Counter {
    base: Vec<u32>,
    na: usize,
    nb: usize,
    ns: usize,
}

impl Counter {
    fn new(tail: &GroupCodes, target: &GroupCodes, cond: &GroupCodes) -> Result<Self> {
        let (na, nb, ns) = (tail.card, target.card, cond.card);
        match na.checked_mul(nb).and_then(|x| x.checked_mul(ns)) {
            Some(size) if size <= MAX_TABLE_SIZE => {}
            _ => {
                return Err(OcteError::Capacity(format!(
                    "contingency table of {na}x{nb}x{ns} cells exceeds {MAX_TABLE_SIZE}"
                )))
            }
        }
        let base = cond
            .codes
            .iter()
            .zip(&target.codes)
            .map(|(&s, &y)| s * (na * nb) as u32 + y)
            .collect();
        Ok(Self { base, na, nb, ns })
    }

    fn estimate(&self, tail: &[u32], counts: &mut Vec<u32>, table: &mut Vec<f64>) -> f64 {
        counts.clear();
        counts.resize(self.na * self.nb * self.ns, 0);
        let nb = self.nb as u32;
        for (&base, &a) in self.base.iter().zip(tail) {
            counts[(base + a * nb) as usize] += 1;
        }
        self.finish(counts, table)
    }

    /// Estimate after a uniformly random permutation of `tail` (Fisher–Yates,
    /// counting each position as it is fixed). `tail` is scrambled in place.
    fn permuted_estimate<R: RngCore>(
        &self,
        tail: &mut [u32],
        rng: &mut R,
        counts: &mut Vec<u32>,
        table: &mut Vec<f64>,
    ) -> f64 {
        counts.clear();
        counts.resize(self.na * self.nb * self.ns, 0);
        let nb = self.nb as u32;
        for i in (1..tail.len()).rev() {
            let j = bounded(rng, i as u32 + 1) as usize;
            tail.swap(i, j);
            counts[(self.base[i] + tail[i] * nb) as usize] += 1;
        }
        counts[(self.base[0] + tail[0] * nb) as usize] += 1;
        self.finish(counts, table)
    }

    fn finish(&self, counts: &[u32], table: &mut Vec<f64>) -> f64 {
        let total = self.base.len() as f64;
        table.clear();
        table.extend(counts.iter().map(|&c| c as f64 / total));
        clamp(cmi_from_table(table, self.na, self.nb, self.ns))
    }
}

/// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
fn bounded<R: RngCore>(rng: &mut R, bound: u32) -> u32 {
    let mut m = u64::from(rng.next_u32()) * u64::from(bound);
    if (m as u32) < bound {
        let threshold = bound.wrapping_neg() % bound;
        while (m as u32) < threshold {
            m = u64::from(rng.next_u32()) * u64::from(bound);
        }
    }
    (m >> 32) as u32
}

fn replicate_rng(seed: u64, subset_index: usize, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((subset_index as u64) << 32) | replicate as u64);
    rng
}

/// Permutation test of `I(tail; target | condition) = 0`.
///
/// Each null replicate applies one shared row permutation to all tail
/// columns, which keeps the tail's internal structure and the
/// target–condition dependence while destroying tail ↔ (target, condition)
/// dependence. `p = (1 + #{null ≥ estimate}) / (N + 1)`.
pub fn permutation_test(
    data: &DataMatrix,
    tail: &[usize],
    target: usize,
    condition: &[usize],
    config: &TestConfig,
) -> Result<SubsetResult> {
    let q = Question::new(tail, target, &[tail, condition].concat())?;
    if condition.iter().any(|c| tail.contains(c)) {
        return Err(OcteError::arg("tail and condition overlap"));
    }
    let condition: Vec<usize> = q.rest.clone();
    test_condition(data, &q.tail, target, &condition, config, 0)
}

pub(crate) fn test_condition(
    data: &DataMatrix,
    tail: &[usize],
    target: usize,
    condition: &[usize],
    config: &TestConfig,
    subset_index: usize,
) -> Result<SubsetResult> {
    config.validate()?;
    if data.sample_count() < 2 {
        return Err(OcteError::arg("a permutation test needs at least two samples"));
    }
    let tail_codes = GroupCodes::new(data, tail)?;
    let counter = Counter::new(
        &tail_codes,
        &GroupCodes::new(data, &[target])?,
        &GroupCodes::new(data, condition)?,
    )?;
    let estimate = counter.estimate(&tail_codes.codes, &mut Vec::new(), &mut Vec::new());
    let exceed = (0..config.permutations)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new(), Vec::new()),
            |(perm, counts, table), r| {
                perm.clone_from(&tail_codes.codes);
                let mut rng = replicate_rng(config.seed, subset_index, r);
                counter.permuted_estimate(perm, &mut rng, counts, table)
            },
        )
        .filter(|&null| null >= estimate - TIE_MARGIN)
        .count();
    Ok(SubsetResult {
        condition: ids(data, condition)?,
        estimate,
        p_value: Some((1 + exceed) as f64 / (config.permutations + 1) as f64),
    })
}

/// Empirical causal decision for `tail → target`.
///
/// Conditions are visited in increasing size (lexicographic within a size)
/// and each is permutation-tested. The tail is causal only if every
/// condition rejects at `config.significance`; the decision p-value is the
/// largest subset p-value. With `early_stop`, the first non-rejection ends
/// the loop.
pub fn decide_causal(
    data: &DataMatrix,
    tail: &[usize],
    target: usize,
    candidates: &[usize],
    config: &TestConfig,
) -> Result<HyperedgeDecision> {
    config.validate()?;
    let q = Question::new(tail, target, candidates)?;
    let conditions = q.conditions(config.max_condition_size)?;
    let mut trace = Vec::with_capacity(conditions.len());
    let mut causal = true;
    for (i, s) in conditions.iter().enumerate() {
        let r = test_condition(data, &q.tail, q.head, s, config, i)?;
        let rejected = r.p_value.is_some_and(|p| p < config.significance);
        trace.push(r);
        if !rejected {
            causal = false;
            if config.early_stop {
                break;
            }
        }
    }
    let best = argmin(&trace).expect("the empty condition is always visited");
    let max_p = trace.iter().filter_map(|r| r.p_value).fold(0.0, f64::max);
    Ok(HyperedgeDecision {
        tail: ids(data, &q.tail)?,
        head: data.variable(q.head)?.clone(),
        octe: trace[best].estimate,
        argmin: trace[best].condition.clone(),
        max_p: Some(max_p),
        causal,
        unique: causal && q.tail.len() == 1,
        inherited: false,
        evaluated: true,
        subset_trace: trace,
    })
}
