use super::exact::min_over_conditions;
use super::{decide_causal, HyperedgeDecision, Question, TestConfig};
use crate::probcore::{DataMatrix, JointDistribution};
use crate::{OcteError, Result};
use itertools::Itertools;

/// What a discovery run evaluates on.
#[derive(Clone, Copy, Debug)]
pub enum Evidence<'a> {
    Exact {
        dist: &'a JointDistribution,
        max_condition_size: Option<usize>,
    },
    Sampled {
        data: &'a DataMatrix,
        config: &'a TestConfig,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscoverOptions {
    /// Largest tail size considered.
    pub k_max: usize,
    /// Evaluate supersets of causal tails instead of inheriting their verdict.
    pub all: bool,
}

impl Default for DiscoverOptions {
    fn default() -> Self {
        Self { k_max: 3, all: false }
    }
}

/// Searches candidate tails for `target` in increasing size up to `k_max`.
///
/// Every tail of the search appears in the output. Strict supersets of a
/// causal tail are causal by inheritance; unless `all` is set they are
/// recorded without being evaluated.
pub fn discover(
    evidence: Evidence<'_>,
    target: usize,
    candidates: &[usize],
    options: DiscoverOptions,
) -> Result<Vec<HyperedgeDecision>> {
    let candidates: Vec<usize> = candidates.iter().copied().sorted().dedup().collect();
    if options.k_max == 0 || options.k_max > candidates.len() {
        return Err(OcteError::arg(format!(
            "k_max = {} must lie in 1..={}",
            options.k_max,
            candidates.len()
        )));
    }
    let mut decisions: Vec<HyperedgeDecision> = Vec::new();
    let mut causal_tails: Vec<(Vec<usize>, usize)> = Vec::new();
    for k in 1..=options.k_max {
        for tail in candidates.iter().copied().combinations(k) {
            let causal_subsets: Vec<usize> = causal_tails
                .iter()
                .filter(|(c, _)| c.len() < tail.len() && c.iter().all(|v| tail.contains(v)))
                .map(|&(_, i)| i)
                .collect();
            let decision = if !causal_subsets.is_empty() && !options.all {
                inherit(&decisions, &causal_subsets, &tail, target, evidence)?
            } else {
                let mut d = evaluate(evidence, &tail, target, &candidates)?;
                d.inherited = d.causal && !causal_subsets.is_empty();
                d
            };
            if decision.causal {
                causal_tails.push((tail, decisions.len()));
            }
            decisions.push(decision);
        }
    }
    Ok(classify_unique(decisions))
}

fn evaluate(evidence: Evidence<'_>, tail: &[usize], target: usize, candidates: &[usize]) -> Result<HyperedgeDecision> {
    match evidence {
        Evidence::Exact {
            dist,
            max_condition_size,
        } => min_over_conditions(dist, &Question::new(tail, target, candidates)?, max_condition_size),
        Evidence::Sampled { data, config } => decide_causal(data, tail, target, candidates, config),
    }
}

fn inherit(
    decisions: &[HyperedgeDecision],
    causal_subsets: &[usize],
    tail: &[usize],
    target: usize,
    evidence: Evidence<'_>,
) -> Result<HyperedgeDecision> {
    let lookup = |i: usize| match evidence {
        Evidence::Exact { dist, .. } => dist.variable(i).cloned(),
        Evidence::Sampled { data, .. } => data.variable(i).cloned(),
    };
    let bound = causal_subsets.iter().map(|&i| decisions[i].octe).fold(0.0, f64::max);
    Ok(HyperedgeDecision {
        tail: tail.iter().map(|&i| lookup(i)).collect::<Result<_>>()?,
        head: lookup(target)?,
        octe: bound,
        argmin: Vec::new(),
        max_p: None,
        causal: true,
        unique: false,
        inherited: true,
        evaluated: false,
        subset_trace: Vec::new(),
    })
}

/// Marks each causal decision unique when none of its proper nonempty
/// subsets (with the same head) is causal, and inherited otherwise.
pub fn classify_unique(mut decisions: Vec<HyperedgeDecision>) -> Vec<HyperedgeDecision> {
    let causal: Vec<(Vec<usize>, usize)> = decisions
        .iter()
        .filter(|d| d.causal)
        .map(|d| (d.tail.iter().map(|v| v.index).collect(), d.head.index))
        .collect();
    for d in &mut decisions {
        if !d.causal {
            d.unique = false;
            d.inherited = false;
            continue;
        }
        let tail: Vec<usize> = d.tail.iter().map(|v| v.index).collect();
        let has_causal_subset = causal
            .iter()
            .any(|(c, head)| *head == d.head.index && c.len() < tail.len() && c.iter().all(|v| tail.contains(v)));
        d.unique = !has_causal_subset;
        d.inherited = has_causal_subset;
    }
    decisions
}
