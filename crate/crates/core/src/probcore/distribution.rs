use super::{checked_table_size, validate_variables, VariableId, MAX_TABLE_SIZE};
use crate::{OcteError, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Exact probability mass function over a tuple of categorical variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    variables: Vec<VariableId>,
    cardinalities: Vec<usize>,
    probabilities: Vec<f64>,
}

impl JointDistribution {
    /// Builds a distribution from a dense row-major table (first variable most
    /// significant). Entries must be non-negative and sum to one within 1e-12.
    pub fn new(variables: Vec<VariableId>, cardinalities: Vec<usize>, probabilities: Vec<f64>) -> Result<Self> {
        if variables.is_empty() {
            return Err(OcteError::arg("a distribution needs at least one variable"));
        }
        if variables.len() != cardinalities.len() {
            return Err(OcteError::arg(format!(
                "{} variables but {} cardinalities",
                variables.len(),
                cardinalities.len()
            )));
        }
        validate_variables(&variables)?;
        if let Some((v, _)) = variables.iter().zip(&cardinalities).find(|(_, &c)| c == 0) {
            return Err(OcteError::Domain(format!("variable {v} has an empty alphabet")));
        }
        let size = checked_table_size(cardinalities.iter().copied()).ok_or_else(|| {
            OcteError::Capacity(format!(
                "joint alphabet of {} variables exceeds {MAX_TABLE_SIZE} configurations",
                variables.len()
            ))
        })?;
        if probabilities.len() != size {
            return Err(OcteError::arg(format!(
                "table has {} entries, expected {size}",
                probabilities.len()
            )));
        }
        if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(OcteError::Domain(format!("invalid probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(OcteError::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            variables,
            cardinalities,
            probabilities,
        })
    }

    /// Distribution of independent variables with the given marginals.
    pub fn independent(variables: Vec<VariableId>, marginals: &[Vec<f64>]) -> Result<Self> {
        let cards: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let size = checked_table_size(cards.iter().copied())
            .ok_or_else(|| OcteError::Capacity("product alphabet too large".into()))?;
        let mut probs = vec![1.0; size];
        let mut stride = size;
        for m in marginals {
            let card = m.len().max(1);
            stride /= card;
            for (i, p) in probs.iter_mut().enumerate() {
                *p *= m[(i / stride) % card];
            }
        }
        Self::new(variables, cards, probs)
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.variables
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Probability of one joint configuration, given in variable order.
    pub fn prob(&self, config: &[usize]) -> Option<f64> {
        if config.len() != self.cardinalities.len() {
            return None;
        }
        let mut idx = 0;
        for (&v, &c) in config.iter().zip(&self.cardinalities) {
            if v >= c {
                return None;
            }
            idx = idx * c + v;
        }
        Some(self.probabilities[idx])
    }

    /// Looks up a variable by its index.
    pub fn variable(&self, index: usize) -> Result<&VariableId> {
        self.position(index).map(|p| &self.variables[p])
    }

    pub(crate) fn position(&self, index: usize) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.index == index)
            .ok_or_else(|| OcteError::UnknownVariable(format!("#{index}")))
    }

    /// Sums out every variable not in `keep`. The result keeps the original
    /// variable order.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(OcteError::arg("marginalize needs a nonempty set of variables"));
        }
        for &k in keep {
            self.position(k)?;
        }
        let kept: Vec<usize> = self
            .variables
            .iter()
            .filter(|v| keep.contains(&v.index))
            .map(|v| v.index)
            .collect();
        let (table, _) = self.project(&[&kept])?;
        let positions: Vec<usize> = kept.iter().map(|&k| self.position(k)).collect::<Result<_>>()?;
        Ok(Self {
            variables: positions.iter().map(|&p| self.variables[p].clone()).collect(),
            cardinalities: positions.iter().map(|&p| self.cardinalities[p]).collect(),
            probabilities: table,
        })
    }

    /// Projects the table onto a sequence of variable groups. Each group is
    /// coded mixed-radix in the order given; the first group is the most
    /// significant. Returns the projected table and each group's cardinality.
    pub(crate) fn project(&self, groups: &[&[usize]]) -> Result<(Vec<f64>, Vec<usize>)> {
        let n = self.variables.len();
        let mut group_cards = Vec::with_capacity(groups.len());
        // Output-index increment for one step of each variable's digit.
        let mut weight = vec![0usize; n];
        let mut seen = vec![false; n];
        for g in groups {
            let mut card = 1usize;
            for &index in g.iter().rev() {
                let p = self.position(index)?;
                if seen[p] {
                    return Err(OcteError::arg(format!(
                        "variable {} appears in more than one group",
                        self.variables[p]
                    )));
                }
                seen[p] = true;
                weight[p] = card;
                card *= self.cardinalities[p];
            }
            group_cards.push(card);
        }
        let mut scale = 1usize;
        for (g, &card) in groups.iter().zip(&group_cards).rev() {
            for &index in g.iter() {
                let p = self.position(index)?;
                weight[p] *= scale;
            }
            scale = scale
                .checked_mul(card)
                .filter(|&s| s <= MAX_TABLE_SIZE)
                .ok_or_else(|| OcteError::Capacity("projected table too large".into()))?;
        }
        let mut out = vec![0.0; scale];
        let mut digits = vec![0usize; n];
        let mut target = 0usize;
        for &p in &self.probabilities {
            out[target] += p;
            // odometer increment, last variable fastest
            for i in (0..n).rev() {
                digits[i] += 1;
                if digits[i] < self.cardinalities[i] {
                    target += weight[i];
                    break;
                }
                target -= weight[i] * (self.cardinalities[i] - 1);
                digits[i] = 0;
            }
        }
        Ok((out, group_cards))
    }

    /// Total-variation distance to another distribution over the same variables.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.variables != other.variables || self.cardinalities != other.cardinalities {
            return Err(OcteError::arg(
                "total variation needs distributions over identical variables",
            ));
        }
        Ok(0.5
            * self
                .probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}
