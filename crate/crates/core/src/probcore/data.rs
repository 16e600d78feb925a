use super::{checked_table_size, validate_variables, JointDistribution, VariableId, MAX_TABLE_SIZE};
use crate::{OcteError, Result};
use serde::{Deserialize, Serialize};

/// Per-variable category counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub cardinalities: Vec<usize>,
}

/// `T` samples of `V` categorical variables, stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataMatrix {
    variables: Vec<VariableId>,
    alphabet: Alphabet,
    columns: Vec<Vec<u32>>,
    sample_count: usize,
}

impl DataMatrix {
    pub fn new(variables: Vec<VariableId>, columns: Vec<Vec<u32>>, cardinalities: Vec<usize>) -> Result<Self> {
        if variables.is_empty() {
            return Err(OcteError::arg("a data matrix needs at least one variable"));
        }
        if variables.len() != columns.len() || variables.len() != cardinalities.len() {
            return Err(OcteError::arg(format!(
                "{} variables, {} columns, {} cardinalities",
                variables.len(),
                columns.len(),
                cardinalities.len()
            )));
        }
        validate_variables(&variables)?;
        let sample_count = columns[0].len();
        if sample_count == 0 {
            return Err(OcteError::arg("a data matrix needs at least one sample"));
        }
        for ((v, col), &card) in variables.iter().zip(&columns).zip(&cardinalities) {
            if col.len() != sample_count {
                return Err(OcteError::arg(format!(
                    "column {v} has {} samples, expected {sample_count}",
                    col.len()
                )));
            }
            if card == 0 || card > MAX_TABLE_SIZE {
                return Err(OcteError::Domain(format!("cardinality {card} of {v} out of range")));
            }
            if let Some(row) = col.iter().position(|&x| x as usize >= card) {
                return Err(OcteError::Domain(format!(
                    "value {} of {v} at row {row} outside alphabet of size {card}",
                    col[row]
                )));
            }
        }
        Ok(Self {
            variables,
            alphabet: Alphabet { cardinalities },
            columns,
            sample_count,
        })
    }

    /// Builds a matrix whose alphabet is `max code + 1` per column.
    pub fn with_inferred_alphabet(variables: Vec<VariableId>, columns: Vec<Vec<u32>>) -> Result<Self> {
        let cards = columns
            .iter()
            .map(|c| c.iter().copied().max().map_or(1, |m| m as usize + 1))
            .collect();
        Self::new(variables, columns, cards)
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.variables
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    /// Column of the variable with the given index.
    pub fn column(&self, index: usize) -> Result<&[u32]> {
        Ok(&self.columns[self.position(index)?])
    }

    pub fn variable(&self, index: usize) -> Result<&VariableId> {
        Ok(&self.variables[self.position(index)?])
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&VariableId> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn row(&self, t: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[t]).collect()
    }

    /// Keeps samples `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.sample_count {
            return Err(OcteError::arg(format!(
                "row range {start}..{end} invalid for {} samples",
                self.sample_count
            )));
        }
        Ok(Self {
            variables: self.variables.clone(),
            alphabet: self.alphabet.clone(),
            columns: self.columns.iter().map(|c| c[start..end].to_vec()).collect(),
            sample_count: end - start,
        })
    }

    pub(crate) fn position(&self, index: usize) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.index == index)
            .ok_or_else(|| OcteError::UnknownVariable(format!("#{index}")))
    }
}

/// Mixed-radix code of a variable group for every sample.
#[derive(Clone, Debug)]
pub(crate) struct GroupCodes {
    pub codes: Vec<u32>,
    pub card: usize,
}

impl GroupCodes {
    pub fn new(data: &DataMatrix, vars: &[usize]) -> Result<Self> {
        let mut positions = Vec::with_capacity(vars.len());
        for &v in vars {
            positions.push(data.position(v)?);
        }
        let card = checked_table_size(positions.iter().map(|&p| data.alphabet.cardinalities[p])).ok_or_else(|| {
            OcteError::Capacity(format!(
                "joint alphabet of {} variables exceeds {MAX_TABLE_SIZE} configurations",
                vars.len()
            ))
        })?;
        let mut codes = vec![0u32; data.sample_count];
        for &p in &positions {
            let radix = data.alphabet.cardinalities[p] as u32;
            for (code, &x) in codes.iter_mut().zip(&data.columns[p]) {
                *code = *code * radix + x;
            }
        }
        Ok(Self { codes, card })
    }
}

/// Relative frequencies of the joint configurations of `vars` (in the given order).
pub fn empirical_distribution(data: &DataMatrix, vars: &[usize]) -> Result<JointDistribution> {
    if vars.is_empty() {
        return Err(OcteError::arg("empirical distribution needs at least one variable"));
    }
    let mut variables = Vec::with_capacity(vars.len());
    let mut cards = Vec::with_capacity(vars.len());
    for &v in vars {
        let p = data.position(v)?;
        variables.push(data.variables[p].clone());
        cards.push(data.alphabet.cardinalities[p]);
    }
    let group = GroupCodes::new(data, vars)?;
    let mut counts = vec![0u64; group.card];
    for &c in &group.codes {
        counts[c as usize] += 1;
    }
    let total = data.sample_count as f64;
    let probs = counts.into_iter().map(|n| n as f64 / total).collect();
    JointDistribution::new(variables, cards, probs)
}
