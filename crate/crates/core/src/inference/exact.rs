use super::{argmin, ids, HyperedgeDecision, InformationSource, Question, SubsetResult};
use crate::probcore::JointDistribution;
use crate::Result;

/// An exact conditional information above this many bits counts as positive.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// OCTE of `tail → target` on an exact pmf, visiting every condition
/// `S ⊆ candidates \ tail` (including the empty set).
pub fn octe_exact(
    dist: &JointDistribution,
    tail: &[usize],
    target: usize,
    candidates: &[usize],
) -> Result<HyperedgeDecision> {
    octe_exact_capped(dist, tail, target, candidates, None)
}

/// As [`octe_exact`], restricted to conditions of at most `max_condition_size` variables.
pub fn octe_exact_capped(
    dist: &JointDistribution,
    tail: &[usize],
    target: usize,
    candidates: &[usize],
    max_condition_size: Option<usize>,
) -> Result<HyperedgeDecision> {
    let q = Question::new(tail, target, candidates)?;
    min_over_conditions(dist, &q, max_condition_size)
}

pub(crate) fn min_over_conditions<S: InformationSource + ?Sized>(
    source: &S,
    q: &Question,
    max_condition_size: Option<usize>,
) -> Result<HyperedgeDecision> {
    let mut trace = Vec::new();
    for s in q.conditions(max_condition_size)? {
        trace.push(SubsetResult {
            estimate: source.cmi(&q.tail, &[q.head], &s)?,
            condition: ids(source, &s)?,
            p_value: None,
        });
    }
    let best = argmin(&trace).expect("the empty condition is always visited");
    let octe = trace[best].estimate;
    let causal = octe > EXACT_TOLERANCE;
    Ok(HyperedgeDecision {
        tail: ids(source, &q.tail)?,
        head: source.variable_id(q.head)?,
        octe,
        argmin: trace[best].condition.clone(),
        max_p: None,
        causal,
        unique: causal && q.tail.len() == 1,
        inherited: false,
        evaluated: true,
        subset_trace: trace,
    })
}
