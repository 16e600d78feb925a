//! Set-level causal decisions.
//!
//! A tail set `X_I` causes `Y` when `I(X_I; Y | S) > 0` for every
//! `S ⊆ X \ X_I`, where `X` is the candidate source set. The optimally
//! conditioned transfer entropy (OCTE) is the minimum of that quantity over
//! all such `S`. Exact mode evaluates it on a known pmf; empirical mode
//! replaces the positivity check by a permutation test per condition and
//! declares causality only when every condition rejects.

mod discover;
mod exact;
mod permutation;

use crate::probcore::{cmi, plugin_cmi, DataMatrix, JointDistribution, VariableId};
use crate::{OcteError, Result};
use itertools::Itertools;
use serde::{Deserialize, Serialize};

pub use discover::{classify_unique, discover, DiscoverOptions, Evidence};
pub use exact::{octe_exact, octe_exact_capped, EXACT_TOLERANCE};
pub use permutation::{decide_causal, permutation_test};

/// Largest number of conditioning subsets a single decision may visit.
pub const MAX_CONDITION_SUBSETS: usize = 1 << 20;

/// Permutation-test settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Null replicates per test.
    pub permutations: usize,
    /// Rejection level θ.
    pub significance: f64,
    pub seed: u64,
    /// Upper bound on `|S|`; `None` visits the full powerset.
    pub max_condition_size: Option<usize>,
    /// Stop a decision at the first condition that fails to reject.
    pub early_stop: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            permutations: 1000,
            significance: 0.01,
            seed: 0,
            max_condition_size: None,
            early_stop: true,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.permutations == 0 {
            return Err(OcteError::arg("at least one permutation is required"));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(OcteError::arg(format!(
                "significance {} outside (0, 1)",
                self.significance
            )));
        }
        Ok(())
    }
}

/// Estimate of `I(X_I; Y | S)` for one condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult {
    pub condition: Vec<VariableId>,
    /// Bits.
    pub estimate: f64,
    /// Permutation p-value; absent in exact mode.
    pub p_value: Option<f64>,
}

/// Verdict for one candidate tail → head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperedgeDecision {
    pub tail: Vec<VariableId>,
    pub head: VariableId,
    /// Minimum estimate over the evaluated conditions, in bits. For an
    /// unevaluated inherited decision this is the largest OCTE among its
    /// causal subsets, a lower bound.
    pub octe: f64,
    /// Condition attaining `octe` (smallest, then lexicographically first).
    pub argmin: Vec<VariableId>,
    /// Worst p-value over the evaluated conditions (empirical mode).
    pub max_p: Option<f64>,
    pub causal: bool,
    /// Causal with no causal proper subset.
    pub unique: bool,
    /// Causal because some proper subset is causal.
    pub inherited: bool,
    /// False when the decision was inferred from a causal subset without testing.
    pub evaluated: bool,
    pub subset_trace: Vec<SubsetResult>,
}

/// Anything the information functionals can be evaluated on.
pub trait InformationSource {
    fn cmi(&self, a: &[usize], b: &[usize], s: &[usize]) -> Result<f64>;
    fn variable_id(&self, index: usize) -> Result<VariableId>;
}

impl InformationSource for JointDistribution {
    fn cmi(&self, a: &[usize], b: &[usize], s: &[usize]) -> Result<f64> {
        cmi(self, a, b, s)
    }

    fn variable_id(&self, index: usize) -> Result<VariableId> {
        self.variable(index).cloned()
    }
}

impl InformationSource for DataMatrix {
    fn cmi(&self, a: &[usize], b: &[usize], s: &[usize]) -> Result<f64> {
        plugin_cmi(self, a, b, s)
    }

    fn variable_id(&self, index: usize) -> Result<VariableId> {
        self.variable(index).cloned()
    }
}

/// `I(X_i; Y | X \ {X_i})`, the fully conditioned transfer entropy.
pub fn transfer_entropy<S: InformationSource + ?Sized>(
    source: &S,
    x: usize,
    y: usize,
    all_sources: &[usize],
) -> Result<f64> {
    if !all_sources.contains(&x) {
        return Err(OcteError::arg(format!(
            "source #{x} is not among the candidate sources"
        )));
    }
    if all_sources.contains(&y) {
        return Err(OcteError::arg(format!("target #{y} is among the candidate sources")));
    }
    let rest: Vec<usize> = all_sources.iter().copied().filter(|&v| v != x).unique().collect();
    source.cmi(&[x], &[y], &rest)
}

/// Validated, sorted index sets of one tail → head question.
#[derive(Debug)]
pub(crate) struct Question {
    pub tail: Vec<usize>,
    pub head: usize,
    pub rest: Vec<usize>,
}

impl Question {
    pub fn new(tail: &[usize], head: usize, candidates: &[usize]) -> Result<Self> {
        let tail: Vec<usize> = tail.iter().copied().sorted().dedup().collect();
        let candidates: Vec<usize> = candidates.iter().copied().sorted().dedup().collect();
        if tail.is_empty() {
            return Err(OcteError::arg("the tail set must be nonempty"));
        }
        if let Some(v) = tail.iter().find(|v| !candidates.contains(v)) {
            return Err(OcteError::arg(format!("tail variable #{v} is not a candidate source")));
        }
        if candidates.contains(&head) {
            return Err(OcteError::arg(format!("target #{head} is among the candidate sources")));
        }
        let rest = candidates.into_iter().filter(|v| !tail.contains(v)).collect();
        Ok(Self { tail, head, rest })
    }

    /// Conditions in increasing size, lexicographic within a size.
    pub fn conditions(&self, max_size: Option<usize>) -> Result<Vec<Vec<usize>>> {
        let top = max_size.unwrap_or(self.rest.len()).min(self.rest.len());
        let count = (0..=top).try_fold(0usize, |acc, k| acc.checked_add(binomial(self.rest.len(), k)));
        match count {
            Some(c) if c <= MAX_CONDITION_SUBSETS => {}
            _ => {
                return Err(OcteError::Capacity(format!(
                    "{} remaining candidates give more than {MAX_CONDITION_SUBSETS} conditioning subsets; \
                     set max_condition_size to bound |S|",
                    self.rest.len()
                )))
            }
        }
        Ok((0..=top)
            .flat_map(|k| self.rest.iter().copied().combinations(k))
            .collect())
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = match r.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return usize::MAX,
        };
    }
    r
}

pub(crate) fn ids<S: InformationSource + ?Sized>(source: &S, set: &[usize]) -> Result<Vec<VariableId>> {
    set.iter().map(|&i| source.variable_id(i)).collect()
}

/// Index of the smallest estimate; earlier entries win ties.
pub(crate) fn argmin(trace: &[SubsetResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in trace.iter().enumerate() {
        if best.is_none_or(|b| r.estimate < trace[b].estimate) {
            best = Some(i);
        }
    }
    best
}
