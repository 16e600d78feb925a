//! Exact and plug-in information functionals over categorical variables.
//!
//! Every quantity is reported in bits. Probability tables are dense and
//! indexed by a mixed-radix configuration code in which the first variable
//! is the most significant digit.

mod data;
mod distribution;
mod measures;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use data::{empirical_distribution, Alphabet, DataMatrix};
pub use distribution::JointDistribution;
pub use measures::{cmi, entropy, mutual_information, plugin_cmi, NEGATIVE_TOLERANCE, NOISE_FLOOR};

pub(crate) use data::GroupCodes;
pub(crate) use measures::{clamp, cmi_from_table};

/// Largest dense table (product of cardinalities) any component will allocate.
pub const MAX_TABLE_SIZE: usize = 1 << 24;

/// A column / random variable. Ordering is by index first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariableId {
    #[serde(rename = "id")]
    pub index: usize,
    pub name: String,
}

impl VariableId {
    pub fn new(index: usize, name: impl Into<String>) -> Self {
        Self {
            index,
            name: name.into(),
        }
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Product of cardinalities, or `None` once it passes [`MAX_TABLE_SIZE`].
pub(crate) fn checked_table_size(cards: impl IntoIterator<Item = usize>) -> Option<usize> {
    let mut size = 1usize;
    for c in cards {
        size = size.checked_mul(c)?;
        if size > MAX_TABLE_SIZE {
            return None;
        }
    }
    Some(size)
}

pub(crate) fn validate_variables(vars: &[VariableId]) -> crate::Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if v.name.is_empty() {
            return Err(crate::OcteError::Domain(format!(
                "variable with index {} has an empty name",
                v.index
            )));
        }
        if vars[..i].iter().any(|w| w.index == v.index) {
            return Err(crate::OcteError::Domain(format!(
                "duplicate variable index {}",
                v.index
            )));
        }
    }
    Ok(())
}

/// Formats a set of variables as `{A,B}`.
pub fn format_set(vars: &[VariableId]) -> String {
    let names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    format!("{{{}}}", names.join(","))
}
