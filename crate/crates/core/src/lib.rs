//! Causal hypergraph inference for categorical data via optimally
//! conditioned transfer entropy (OCTE).
//!
//! A source set is causal for a target only if its conditional mutual
//! information with the target stays positive under every subset of the
//! remaining candidate sources as condition. The crate provides the exact
//! information functionals ([`probcore`]), ground-truth generators
//! ([`systems`]), the decision procedures ([`inference`]), the output model
//! ([`hypergraph`]) and data ingestion ([`io`]).
//!
//! ```
//! use octe_core::inference::{discover, DiscoverOptions, Evidence, TestConfig};
//! use octe_core::systems::{sample, Builtin};
//!
//! # fn main() -> octe_core::Result<()> {
//! let (spec, _truth) = Builtin::Xor { p1: 0.5, p2: 0.5 }.build()?;
//! let data = sample(&spec, 20_000, 42)?;
//! let config = TestConfig { permutations: 200, ..TestConfig::default() };
//! let decisions = discover(
//!     Evidence::Sampled { data: &data, config: &config },
//!     2,
//!     &[0, 1],
//!     DiscoverOptions { k_max: 2, all: false },
//! )?;
//! let causal: Vec<_> = decisions.iter().filter(|d| d.causal).collect();
//! assert_eq!(causal.len(), 1);
//! assert_eq!(causal[0].tail.len(), 2);
//! # Ok(())
//! # }
//! ```

mod error;
pub mod hypergraph;
pub mod inference;
pub mod io;
pub mod probcore;
pub mod systems;

pub use error::{OcteError, Result};
