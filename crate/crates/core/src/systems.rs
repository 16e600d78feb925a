//! Ground-truth synthetic systems.
//!
//! A [`SystemSpec`] is a list of exogenous categorical variables followed by
//! structural equations evaluated in declaration order. The same spec can be
//! enumerated into an exact [`JointDistribution`] over its observed variables
//! or sampled into a [`DataMatrix`].
//!
//! Sampling uses ChaCha8 in blocks of [`SAMPLE_BLOCK`] rows; block `b` draws
//! from stream `b` of the generator seeded with the user seed, so the output
//! does not depend on how many threads sample the blocks.

use crate::probcore::{checked_table_size, DataMatrix, JointDistribution, VariableId, MAX_TABLE_SIZE};
use crate::{OcteError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Rows drawn from one generator stream.
pub const SAMPLE_BLOCK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    /// `P(X = 1) = p`.
    Bernoulli {
        p: f64,
    },
    Categorical {
        probs: Vec<f64>,
    },
}

impl Distribution {
    fn probs(&self) -> Vec<f64> {
        match self {
            Distribution::Bernoulli { p } => vec![1.0 - p, *p],
            Distribution::Categorical { probs } => probs.clone(),
        }
    }
}

/// Deterministic (or noisy-copy) structural function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "function", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Function {
    /// Exclusive or of two binary inputs.
    Xor,
    /// Sum of binary inputs modulo 2.
    Parity,
    /// Arithmetic sum; the output alphabet widens to hold every sum.
    Sum,
    SumMod {
        modulus: u32,
    },
    Identity,
    /// Copy of the single input, replaced with probability `flip` by a
    /// uniformly chosen different category.
    NoisyCopy {
        flip: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exogenous {
    pub name: String,
    pub distribution: Distribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub target: String,
    #[serde(flatten)]
    pub function: Function,
    pub inputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub exogenous: Vec<Exogenous>,
    pub equations: Vec<Equation>,
    pub observed: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Direct,
    Synergistic,
    /// Influence that flows entirely through other observed variables.
    /// Never expected in inferred output.
    Mediated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueEdge {
    pub tail: Vec<VariableId>,
    pub head: VariableId,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub hyperedges: Vec<TrueEdge>,
}

impl GroundTruth {
    /// Edges an inference run should recover (everything but mediated links).
    pub fn expected(&self) -> impl Iterator<Item = &TrueEdge> {
        self.hyperedges.iter().filter(|e| e.kind != EdgeKind::Mediated)
    }
}

#[derive(Debug)]
struct CompiledEquation {
    target: usize,
    function: Function,
    inputs: Vec<usize>,
}

/// Validated, index-resolved form of a spec. Exogenous variables come first.
#[derive(Debug)]
struct Compiled {
    names: Vec<String>,
    cards: Vec<usize>,
    exogenous: Vec<Vec<f64>>,
    equations: Vec<CompiledEquation>,
    observed: Vec<usize>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| OcteError::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        spec.compile()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system spec serializes")
    }

    /// Observed variables, indexed by their position in `observed`.
    pub fn observed_variables(&self) -> Vec<VariableId> {
        self.observed
            .iter()
            .enumerate()
            .map(|(i, n)| VariableId::new(i, n.clone()))
            .collect()
    }

    /// Alphabet sizes of the observed variables.
    pub fn observed_cardinalities(&self) -> Result<Vec<usize>> {
        let c = self.compile()?;
        Ok(c.observed.iter().map(|&i| c.cards[i]).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Compiled> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut cards = Vec::new();
        let mut exogenous = Vec::new();
        let mut define = |name: &str, index: &mut HashMap<_, _>| -> Result<usize> {
            if name.is_empty() {
                return Err(OcteError::arg("variable names must be nonempty"));
            }
            if index.contains_key(name) {
                return Err(OcteError::arg(format!("variable {name} defined twice")));
            }
            let i = names.len();
            names.push(name.to_string());
            Ok(i)
        };
        for ex in &self.exogenous {
            let i = define(&ex.name, &mut index)?;
            index.insert(ex.name.as_str(), i);
            let probs = ex.distribution.probs();
            if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(OcteError::arg(format!("invalid distribution for {}", ex.name)));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(OcteError::arg(format!("distribution of {} sums to {total}", ex.name)));
            }
            cards.push(probs.len());
            exogenous.push(probs);
        }
        let mut equations = Vec::new();
        for eq in &self.equations {
            let inputs = eq
                .inputs
                .iter()
                .map(|n| {
                    index.get(n.as_str()).copied().ok_or_else(|| {
                        OcteError::arg(format!("equation for {} uses {n} before it is defined", eq.target))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let in_cards: Vec<usize> = inputs.iter().map(|&i| cards[i]).collect();
            let card = output_cardinality(&eq.function, &in_cards)
                .map_err(|m| OcteError::arg(format!("equation for {}: {m}", eq.target)))?;
            let target = define(&eq.target, &mut index)?;
            index.insert(eq.target.as_str(), target);
            cards.push(card);
            equations.push(CompiledEquation {
                target,
                function: eq.function.clone(),
                inputs,
            });
        }
        if self.observed.is_empty() {
            return Err(OcteError::arg("no observed variables"));
        }
        let mut observed = Vec::new();
        for n in &self.observed {
            let i = *index
                .get(n.as_str())
                .ok_or_else(|| OcteError::arg(format!("observed variable {n} is not defined")))?;
            if observed.contains(&i) {
                return Err(OcteError::arg(format!("{n} observed twice")));
            }
            observed.push(i);
        }
        Ok(Compiled {
            names,
            cards,
            exogenous,
            equations,
            observed,
        })
    }
}

fn output_cardinality(f: &Function, inputs: &[usize]) -> std::result::Result<usize, String> {
    let binary = || {
        if inputs.iter().all(|&c| c <= 2) {
            Ok(())
        } else {
            Err("inputs must be binary".to_string())
        }
    };
    match f {
        Function::Xor => {
            if inputs.len() != 2 {
                return Err("XOR takes exactly two inputs".into());
            }
            binary()?;
            Ok(2)
        }
        Function::Parity => {
            if inputs.is_empty() {
                return Err("PARITY needs at least one input".into());
            }
            binary()?;
            Ok(2)
        }
        Function::Sum => {
            if inputs.is_empty() {
                return Err("SUM needs at least one input".into());
            }
            let card = inputs.iter().map(|c| c - 1).sum::<usize>() + 1;
            if card > MAX_TABLE_SIZE {
                return Err("SUM output alphabet too large".into());
            }
            Ok(card)
        }
        Function::SumMod { modulus } => {
            if inputs.is_empty() || *modulus < 2 {
                return Err("SUM_MOD needs inputs and a modulus of at least 2".into());
            }
            Ok(*modulus as usize)
        }
        Function::Identity => match inputs {
            [c] => Ok(*c),
            _ => Err("IDENTITY takes exactly one input".into()),
        },
        Function::NoisyCopy { flip } => {
            if !(0.0..=1.0).contains(flip) {
                return Err(format!("flip probability {flip} outside [0, 1]"));
            }
            match inputs {
                [c] => Ok(*c),
                _ => Err("NOISY_COPY takes exactly one input".into()),
            }
        }
    }
}

impl CompiledEquation {
    /// Value of a deterministic equation, or the clean input for a noisy copy.
    fn eval(&self, values: &[u32]) -> u32 {
        let inputs = self.inputs.iter().map(|&i| values[i]);
        match &self.function {
            Function::Xor | Function::Parity => inputs.fold(0, |acc, x| acc ^ (x & 1)),
            Function::Sum => inputs.sum(),
            Function::SumMod { modulus } => inputs.fold(0, |acc, x| (acc + x) % modulus),
            Function::Identity | Function::NoisyCopy { .. } => values[self.inputs[0]],
        }
    }

    fn flip(&self) -> f64 {
        match self.function {
            Function::NoisyCopy { flip } => flip,
            _ => 0.0,
        }
    }
}

/// Exact pmf over the observed variables of `spec`.
pub fn enumerate_joint(spec: &SystemSpec) -> Result<JointDistribution> {
    let c = spec.compile()?;
    let branches = c
        .exogenous
        .iter()
        .map(Vec::len)
        .chain(c.equations.iter().filter(|e| e.flip() > 0.0).map(|e| c.cards[e.target]));
    if checked_table_size(branches).is_none() {
        return Err(OcteError::Capacity(format!(
            "enumerating this system needs more than {MAX_TABLE_SIZE} configurations"
        )));
    }
    let obs_cards: Vec<usize> = c.observed.iter().map(|&i| c.cards[i]).collect();
    let size = checked_table_size(obs_cards.iter().copied())
        .ok_or_else(|| OcteError::Capacity("observed alphabet too large".into()))?;
    let mut table = vec![0.0; size];
    let mut values = vec![0u32; c.names.len()];
    enumerate_exogenous(&c, 0, 1.0, &mut values, &mut table);
    // renormalize away summation drift
    let total: f64 = table.iter().sum();
    table.iter_mut().for_each(|p| *p /= total);
    JointDistribution::new(spec.observed_variables(), obs_cards, table)
}

fn enumerate_exogenous(c: &Compiled, var: usize, prob: f64, values: &mut [u32], table: &mut [f64]) {
    if var == c.exogenous.len() {
        enumerate_equations(c, 0, prob, values, table);
        return;
    }
    for (x, &p) in c.exogenous[var].iter().enumerate() {
        if p > 0.0 {
            values[var] = x as u32;
            enumerate_exogenous(c, var + 1, prob * p, values, table);
        }
    }
}

fn enumerate_equations(c: &Compiled, eq: usize, prob: f64, values: &mut [u32], table: &mut [f64]) {
    let Some(e) = c.equations.get(eq) else {
        let mut idx = 0usize;
        for &o in &c.observed {
            idx = idx * c.cards[o] + values[o] as usize;
        }
        table[idx] += prob;
        return;
    };
    let clean = e.eval(values);
    let flip = e.flip();
    let card = c.cards[e.target] as u32;
    if flip > 0.0 && card > 1 {
        let other = flip / (card - 1) as f64;
        for x in 0..card {
            let p = if x == clean { 1.0 - flip } else { other };
            if p > 0.0 {
                values[e.target] = x;
                enumerate_equations(c, eq + 1, prob * p, values, table);
            }
        }
    } else {
        values[e.target] = clean;
        enumerate_equations(c, eq + 1, prob, values, table);
    }
}

/// `samples` i.i.d. draws of the observed variables. Deterministic in `seed`.
pub fn sample(spec: &SystemSpec, samples: usize, seed: u64) -> Result<DataMatrix> {
    if samples == 0 {
        return Err(OcteError::arg("sample count must be at least 1"));
    }
    let c = spec.compile()?;
    let cdfs: Vec<Vec<f64>> = c
        .exogenous
        .iter()
        .map(|p| {
            p.iter()
                .scan(0.0, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let parts: Vec<Vec<Vec<u32>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let rows = SAMPLE_BLOCK.min(samples - b * SAMPLE_BLOCK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut cols = vec![Vec::with_capacity(rows); c.observed.len()];
            let mut values = vec![0u32; c.names.len()];
            for _ in 0..rows {
                draw_row(&c, &cdfs, &mut rng, &mut values);
                for (col, &o) in cols.iter_mut().zip(&c.observed) {
                    col.push(values[o]);
                }
            }
            cols
        })
        .collect();
    let mut columns = vec![Vec::with_capacity(samples); c.observed.len()];
    for part in parts {
        for (col, chunk) in columns.iter_mut().zip(part) {
            col.extend(chunk);
        }
    }
    let cards = c.observed.iter().map(|&o| c.cards[o]).collect();
    DataMatrix::new(spec.observed_variables(), columns, cards)
}

fn draw_row(c: &Compiled, cdfs: &[Vec<f64>], rng: &mut ChaCha8Rng, values: &mut [u32]) {
    for (v, cdf) in cdfs.iter().enumerate() {
        let u: f64 = rng.gen();
        values[v] = cdf.iter().position(|&f| u < f).unwrap_or(cdf.len() - 1) as u32;
    }
    for e in &c.equations {
        let mut x = e.eval(values);
        let flip = e.flip();
        let card = c.cards[e.target] as u32;
        if flip > 0.0 && card > 1 && rng.gen::<f64>() < flip {
            let other = if card == 2 { 0 } else { rng.gen_range(0..card - 1) };
            x = if card == 2 {
                1 - x
            } else if other >= x {
                other + 1
            } else {
                other
            };
        }
        values[e.target] = x;
    }
}

/// Named ground-truth systems.
#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    /// `Y = XOR(X1, X2)` with `X1 ~ Be(p1)`, `X2 ~ Be(p2)` independent.
    Xor { p1: f64, p2: f64 },
    /// `Y` = parity of `k` fair coins.
    Parity { k: usize },
    /// `Y = X1 + X2` over fair coins.
    Additive,
    /// `p` fair sources and `n - p` mediators `X_k = X1 + E_k`;
    /// `Y = Σ_{k=2..p} XOR(X1, X_k) + Σ_{k=p+1..n} X_k`.
    MediatedXor { p: usize, n: usize },
    /// `Y` = XOR of two fair coins flipped with probability `eps_y`, and
    /// `Z` a copy of `Y` flipped with probability `eps_z`.
    NeuronXor { eps_y: f64, eps_z: f64 },
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Xor { .. } => "xor",
            Builtin::Parity { .. } => "parity",
            Builtin::Additive => "additive",
            Builtin::MediatedXor { .. } => "mediated-xor",
            Builtin::NeuronXor { .. } => "neuron-xor",
        }
    }

    /// Builds the spec and its true hypergraph.
    pub fn build(&self) -> Result<(SystemSpec, GroundTruth)> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(OcteError::arg(format!("{name} = {p} is not a probability")))
            }
        };
        let fair = |name: String| Exogenous {
            name,
            distribution: Distribution::Bernoulli { p: 0.5 },
        };
        let eq = |target: &str, function: Function, inputs: &[&str]| Equation {
            target: target.to_string(),
            function,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        };
        let (spec, edges) = match *self {
            Builtin::Xor { p1, p2 } => {
                let spec = SystemSpec {
                    exogenous: vec![
                        Exogenous {
                            name: "X1".into(),
                            distribution: Distribution::Bernoulli { p: prob("p1", p1)? },
                        },
                        Exogenous {
                            name: "X2".into(),
                            distribution: Distribution::Bernoulli { p: prob("p2", p2)? },
                        },
                    ],
                    equations: vec![eq("Y", Function::Xor, &["X1", "X2"])],
                    observed: names(&["X1", "X2", "Y"]),
                };
                (spec, vec![(vec!["X1", "X2"], "Y", EdgeKind::Synergistic)])
            }
            Builtin::Parity { k } => {
                if k < 2 {
                    return Err(OcteError::arg("parity needs at least two sources"));
                }
                let sources: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
                let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
                let mut observed = sources.clone();
                observed.push("Y".into());
                let spec = SystemSpec {
                    exogenous: sources.iter().cloned().map(fair).collect(),
                    equations: vec![eq("Y", Function::Parity, &refs)],
                    observed,
                };
                let tail: Vec<String> = sources.clone();
                return Ok((
                    spec.clone(),
                    truth(&spec, vec![(tail, "Y".into(), EdgeKind::Synergistic)]),
                ));
            }
            Builtin::Additive => {
                let spec = SystemSpec {
                    exogenous: vec![fair("X1".into()), fair("X2".into())],
                    equations: vec![eq("Y", Function::Sum, &["X1", "X2"])],
                    observed: names(&["X1", "X2", "Y"]),
                };
                (
                    spec,
                    vec![(vec!["X1"], "Y", EdgeKind::Direct), (vec!["X2"], "Y", EdgeKind::Direct)],
                )
            }
            Builtin::MediatedXor { p, n } => return mediated_xor(p, n),
            Builtin::NeuronXor { eps_y, eps_z } => {
                let spec = SystemSpec {
                    exogenous: vec![fair("X1".into()), fair("X2".into())],
                    equations: vec![
                        eq("Y_clean", Function::Xor, &["X1", "X2"]),
                        eq(
                            "Y",
                            Function::NoisyCopy {
                                flip: prob("eps_y", eps_y)?,
                            },
                            &["Y_clean"],
                        ),
                        eq(
                            "Z",
                            Function::NoisyCopy {
                                flip: prob("eps_z", eps_z)?,
                            },
                            &["Y"],
                        ),
                    ],
                    observed: names(&["X1", "X2", "Y", "Z"]),
                };
                (
                    spec,
                    vec![
                        (vec!["X1", "X2"], "Y", EdgeKind::Synergistic),
                        (vec!["Y"], "Z", EdgeKind::Direct),
                        (vec!["X1", "X2"], "Z", EdgeKind::Mediated),
                    ],
                )
            }
        };
        let edges = edges
            .into_iter()
            .map(|(t, h, k)| (t.into_iter().map(String::from).collect(), h.to_string(), k))
            .collect();
        Ok((spec.clone(), truth(&spec, edges)))
    }
}

fn mediated_xor(p: usize, n: usize) -> Result<(SystemSpec, GroundTruth)> {
    if p < 1 || n < p || n < 2 {
        return Err(OcteError::arg(format!(
            "mediated-xor needs 1 <= p <= n and n >= 2 (got p={p}, n={n})"
        )));
    }
    let x = |k: usize| format!("X{k}");
    let mut exogenous: Vec<Exogenous> = (1..=p)
        .map(|k| Exogenous {
            name: x(k),
            distribution: Distribution::Bernoulli { p: 0.5 },
        })
        .collect();
    let mut equations = Vec::new();
    let mut edges = Vec::new();
    for k in p + 1..=n {
        exogenous.push(Exogenous {
            name: format!("E{k}"),
            distribution: Distribution::Bernoulli { p: 0.5 },
        });
        equations.push(Equation {
            target: x(k),
            function: Function::Sum,
            inputs: vec![x(1), format!("E{k}")],
        });
        edges.push((vec![x(1)], x(k), EdgeKind::Direct));
    }
    let mut y_inputs = Vec::new();
    for k in 2..=p {
        let term = format!("XOR_1_{k}");
        equations.push(Equation {
            target: term.clone(),
            function: Function::Xor,
            inputs: vec![x(1), x(k)],
        });
        y_inputs.push(term);
        edges.push((vec![x(1), x(k)], "Y".to_string(), EdgeKind::Synergistic));
    }
    for k in p + 1..=n {
        y_inputs.push(x(k));
        edges.push((vec![x(k)], "Y".to_string(), EdgeKind::Direct));
    }
    if p < n {
        edges.push((vec![x(1)], "Y".to_string(), EdgeKind::Mediated));
    }
    equations.push(Equation {
        target: "Y".into(),
        function: Function::Sum,
        inputs: y_inputs,
    });
    let mut observed: Vec<String> = (1..=n).map(x).collect();
    observed.push("Y".into());
    let spec = SystemSpec {
        exogenous,
        equations,
        observed,
    };
    let gt = truth(&spec, edges);
    Ok((spec, gt))
}

fn names(n: &[&str]) -> Vec<String> {
    n.iter().map(|s| s.to_string()).collect()
}

fn truth(spec: &SystemSpec, edges: Vec<(Vec<String>, String, EdgeKind)>) -> GroundTruth {
    let vars = spec.observed_variables();
    let id = |n: &str| {
        vars.iter()
            .find(|v| v.name == n)
            .cloned()
            .expect("builtin edge names are observed")
    };
    GroundTruth {
        hyperedges: edges
            .into_iter()
            .map(|(tail, head, kind)| TrueEdge {
                tail: tail.iter().map(|t| id(t)).collect(),
                head: id(&head),
                kind,
            })
            .collect(),
    }
}
