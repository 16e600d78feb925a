use std::io::Write;

use clap::Args;
use octe_core::inference::{discover, octe_exact, transfer_entropy, DiscoverOptions, Evidence, HyperedgeDecision};
use octe_core::probcore::{cmi, format_set, mutual_information, JointDistribution, VariableId};
use octe_core::systems::{enumerate_joint, Builtin};
use octe_core::{OcteError, Result};
use serde::Serialize;

use crate::{CliResult, SystemName, SystemParams};

/// Row labels of the two-source information table.
pub const FUNCTIONAL_LABELS: [&str; 5] = ["I(X1;Y)", "I(X2;Y)", "I(X1;Y|X2)", "I(X2;Y|X1)", "I({X1,X2};Y)"];

/// `(case, P(X1=1), P(X2=1), published values)` of the XOR table.
pub const TABLE1_EXPECTED: [(&str, f64, f64, [f64; 5]); 3] = [
    ("a", 0.5, 0.5, [0.00, 0.00, 1.00, 1.00, 1.00]),
    ("b", 0.5, 0.8, [0.28, 0.00, 1.00, 0.72, 1.00]),
    ("c", 0.7, 0.8, [0.24, 0.08, 0.88, 0.72, 0.96]),
];

/// Largest deviation from a published two-decimal figure that still matches.
pub const TABLE1_TOLERANCE: f64 = 0.005;

#[derive(Clone, Debug, Args)]
pub struct ExactArgs {
    #[arg(value_enum)]
    pub system: SystemName,

    #[command(flatten)]
    pub params: SystemParams,

    /// Largest tail size (default: all candidates).
    #[arg(long)]
    pub k_max: Option<usize>,

    /// Evaluate supersets of causal tails too.
    #[arg(long)]
    pub all: bool,

    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Debug, Args)]
pub struct Table1Args {
    /// Decimal places printed.
    #[arg(long, default_value_t = 2)]
    pub precision: usize,

    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SourceSummary {
    pub source: VariableId,
    pub mutual_information: f64,
    pub transfer_entropy: f64,
    pub octe: f64,
    pub argmin: Vec<VariableId>,
    pub causal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MediatedInformation {
    pub source: VariableId,
    pub condition: Vec<VariableId>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetAnalysis {
    pub target: VariableId,
    pub candidates: Vec<VariableId>,
    pub sources: Vec<SourceSummary>,
    pub mediated: Option<MediatedInformation>,
    pub decisions: Vec<HyperedgeDecision>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub system: String,
    pub params: serde_json::Value,
    /// The five two-source functionals, for systems with two sources of `Y`.
    pub functionals: Option<[f64; 5]>,
    pub analyses: Vec<TargetAnalysis>,
}

fn index_of(dist: &JointDistribution, name: &str) -> Result<usize> {
    dist.variables()
        .iter()
        .position(|v| v.name == name)
        .ok_or_else(|| OcteError::UnknownVariable(name.to_string()))
}

fn indices(dist: &JointDistribution, names: &[String]) -> Result<Vec<usize>> {
    names.iter().map(|n| index_of(dist, n)).collect()
}

/// `I(X1;Y)`, `I(X2;Y)`, `I(X1;Y|X2)`, `I(X2;Y|X1)`, `I({X1,X2};Y)`.
pub fn two_source_functionals(dist: &JointDistribution, x1: usize, x2: usize, y: usize) -> Result<[f64; 5]> {
    Ok([
        mutual_information(dist, &[x1], &[y])?,
        mutual_information(dist, &[x2], &[y])?,
        cmi(dist, &[x1], &[y], &[x2])?,
        cmi(dist, &[x2], &[y], &[x1])?,
        mutual_information(dist, &[x1, x2], &[y])?,
    ])
}

/// `(target, candidates)` pairs analysed for a builtin.
fn targets(builtin: &Builtin, dist: &JointDistribution) -> Vec<(String, Vec<String>)> {
    let others = |target: &str| -> Vec<String> {
        dist.variables()
            .iter()
            .filter(|v| v.name != target)
            .map(|v| v.name.clone())
            .collect()
    };
    match builtin {
        Builtin::NeuronXor { .. } => vec![
            ("Y".into(), vec!["X1".into(), "X2".into()]),
            ("Z".into(), vec!["X1".into(), "X2".into(), "Y".into()]),
        ],
        _ => vec![("Y".into(), others("Y"))],
    }
}

pub fn exact_report(args: &ExactArgs) -> Result<ExactReport> {
    let builtin = args.params.builtin(args.system);
    let (spec, _) = builtin.build()?;
    let dist = enumerate_joint(&spec)?;
    let mut analyses = Vec::new();
    for (target, candidate_names) in targets(&builtin, &dist) {
        let y = index_of(&dist, &target)?;
        let cands = indices(&dist, &candidate_names)?;
        let mut sources = Vec::new();
        for &x in &cands {
            let d = octe_exact(&dist, &[x], y, &cands)?;
            sources.push(SourceSummary {
                source: dist.variable(x)?.clone(),
                mutual_information: mutual_information(&dist, &[x], &[y])?,
                transfer_entropy: transfer_entropy(&dist, x, y, &cands)?,
                octe: d.octe,
                argmin: d.argmin,
                causal: d.causal,
            });
        }
        let mediated = match builtin {
            Builtin::MediatedXor { p, n } if p < n => {
                let names: Vec<String> = (p + 1..=n).map(|k| format!("X{k}")).collect();
                let s = indices(&dist, &names)?;
                let x1 = index_of(&dist, "X1")?;
                Some(MediatedInformation {
                    source: dist.variable(x1)?.clone(),
                    condition: s.iter().map(|&i| dist.variable(i).cloned()).collect::<Result<_>>()?,
                    value: cmi(&dist, &[x1], &[y], &s)?,
                })
            }
            _ => None,
        };
        let k_max = args.k_max.unwrap_or(cands.len()).min(cands.len());
        let decisions = discover(
            Evidence::Exact {
                dist: &dist,
                max_condition_size: None,
            },
            y,
            &cands,
            DiscoverOptions { k_max, all: args.all },
        )?;
        analyses.push(TargetAnalysis {
            target: dist.variable(y)?.clone(),
            candidates: cands
                .iter()
                .map(|&i| dist.variable(i).cloned())
                .collect::<Result<_>>()?,
            sources,
            mediated,
            decisions,
        });
    }
    let functionals = match &analyses[..] {
        [only] if only.candidates.len() == 2 && only.target.name == "Y" => Some(two_source_functionals(
            &dist,
            only.candidates[0].index,
            only.candidates[1].index,
            only.target.index,
        )?),
        _ => None,
    };
    Ok(ExactReport {
        system: builtin.name().to_string(),
        params: args.params.describe(args.system),
        functionals,
        analyses,
    })
}

/// Prints the exact functionals and OCTE decisions of a builtin system.
pub fn cmd_exact(args: &ExactArgs, out: &mut dyn Write) -> CliResult<()> {
    let report = exact_report(args)?;
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        )?;
        return Ok(());
    }
    writeln!(out, "system {} {}", report.system, report.params)?;
    if let Some(f) = report.functionals {
        for (label, v) in FUNCTIONAL_LABELS.iter().zip(f) {
            writeln!(out, "  {label:<14} {v:.4}")?;
        }
    }
    for a in &report.analyses {
        writeln!(out, "\ntarget {}  candidates {}", a.target, format_set(&a.candidates))?;
        writeln!(
            out,
            "  {:<8} {:>10} {:>10} {:>10}  argmin",
            "source", "MI", "TE", "OCTE"
        )?;
        for s in &a.sources {
            writeln!(
                out,
                "  {:<8} {:>10.6} {:>10.6} {:>10.6}  {}",
                s.source.name,
                s.mutual_information,
                s.transfer_entropy,
                s.octe,
                format_set(&s.argmin)
            )?;
        }
        if let Some(m) = &a.mediated {
            writeln!(
                out,
                "  I({};{}|{}) = {:.6}",
                m.source,
                a.target,
                format_set(&m.condition),
                m.value
            )?;
        }
        writeln!(
            out,
            "  {:<20} {:>6} {:>6} {:>9} {:>10}  argmin",
            "tail", "causal", "unique", "inherited", "OCTE"
        )?;
        for d in &a.decisions {
            let flag = |b: bool| if b { "yes" } else { "no" };
            writeln!(
                out,
                "  {:<20} {:>6} {:>6} {:>9} {:>10.6}  {}",
                format_set(&d.tail),
                flag(d.causal),
                flag(d.unique),
                flag(d.inherited),
                d.octe,
                if d.evaluated { format_set(&d.argmin) } else { "-".into() }
            )?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Case {
    pub case: String,
    pub p1: f64,
    pub p2: f64,
    pub values: [f64; 5],
    pub expected: [f64; 5],
    pub matches: [bool; 5],
}

/// Exact values of the three XOR parameterizations next to the published ones.
pub fn table1() -> Result<Vec<Table1Case>> {
    TABLE1_EXPECTED
        .iter()
        .map(|&(case, p1, p2, expected)| {
            let (spec, _) = Builtin::Xor { p1, p2 }.build()?;
            let dist = enumerate_joint(&spec)?;
            let values = two_source_functionals(&dist, 0, 1, 2)?;
            let matches = std::array::from_fn(|i| (values[i] - expected[i]).abs() <= TABLE1_TOLERANCE);
            Ok(Table1Case {
                case: case.to_string(),
                p1,
                p2,
                values,
                expected,
                matches,
            })
        })
        .collect()
}

pub fn cmd_table1(args: &Table1Args, out: &mut dyn Write) -> CliResult<Vec<Table1Case>> {
    let cases = table1()?;
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&cases).expect("table serializes")
        )?;
        return Ok(cases);
    }
    let width = args.precision + 4;
    write!(out, "{:<14}", "")?;
    for c in &cases {
        write!(out, " {:>width$} ", c.case)?;
    }
    writeln!(out)?;
    write!(out, "{:<14}", "p1, p2")?;
    for c in &cases {
        write!(out, " {:>width$} ", format!("{},{}", c.p1, c.p2))?;
    }
    writeln!(out)?;
    for (row, label) in FUNCTIONAL_LABELS.iter().enumerate() {
        write!(out, "{label:<14}")?;
        for c in &cases {
            let mark = if c.matches[row] { ' ' } else { '*' };
            write!(out, " {:>width$.prec$}{mark}", c.values[row], prec = args.precision)?;
        }
        writeln!(out)?;
    }
    let mismatches = cases.iter().flat_map(|c| c.matches).filter(|m| !m).count();
    if mismatches == 0 {
        writeln!(out, "all 15 values match the published table")?;
    } else {
        writeln!(out, "{mismatches} value(s) differ from the published table (*)")?;
    }
    Ok(cases)
}
