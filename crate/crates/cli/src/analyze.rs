use std::borrow::Cow;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::Args;
use octe_core::hypergraph::CausalHypergraph;
use octe_core::inference::{discover, DiscoverOptions, Evidence, HyperedgeDecision, TestConfig};
use octe_core::io::{lag_embed, load_csv, LagSpec};
use octe_core::probcore::{format_set, DataMatrix};
use octe_core::OcteError;
use serde::Serialize;
use serde_json::json;

use crate::{ensure_parent, CliError, CliResult, RunManifest};

/// `NAME` or `NAME:SRC1,SRC2,...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetSpec {
    pub target: String,
    /// Explicit candidate sources; all other columns when absent.
    pub candidates: Option<Vec<String>>,
}

impl FromStr for TargetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (target, rest) = match s.split_once(':') {
            Some((t, r)) => (t.trim(), Some(r)),
            None => (s.trim(), None),
        };
        if target.is_empty() {
            return Err(format!("empty target name in {s:?}"));
        }
        let candidates = match rest {
            None => None,
            Some(r) => {
                let names: Vec<String> = r.split(',').map(|n| n.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    return Err(format!("empty candidate name in {s:?}"));
                }
                Some(names)
            }
        };
        Ok(Self {
            target: target.to_string(),
            candidates,
        })
    }
}

#[derive(Clone, Debug, Args)]
pub struct AnalyzeArgs {
    /// Input CSV of integer codes with a header row.
    #[arg(short, long)]
    pub input: PathBuf,

    /// Target column, optionally with its candidate sources (`Y:X1,X2`). Repeatable.
    #[arg(long = "target", required = true)]
    pub targets: Vec<TargetSpec>,

    /// Largest tail size, clamped to the number of candidates.
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,

    /// Significance level of every permutation test.
    #[arg(long, default_value_t = 0.01)]
    pub theta: f64,

    /// Permutations per test.
    #[arg(short = 'N', long = "permutations", default_value_t = 1000)]
    pub permutations: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also evaluate supersets of causal tails and keep them in the graph.
    #[arg(long)]
    pub all: bool,

    /// Pair sources at t - LAG with the target at t.
    #[arg(long)]
    pub lag: Option<usize>,

    /// Largest conditioning set visited.
    #[arg(long)]
    pub max_condition_size: Option<usize>,

    /// Output prefix (default: the input path with its extension replaced by `analysis`).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct AnalyzeOutcome {
    pub decisions: Vec<HyperedgeDecision>,
    pub hypergraph: CausalHypergraph,
    pub report: String,
    pub manifest: RunManifest,
}

struct Resolved {
    target: usize,
    candidates: Vec<usize>,
    k_max: usize,
}

fn resolve(data: &DataMatrix, spec: &TargetSpec, k_max: usize) -> CliResult<Resolved> {
    let lookup = |name: &str| {
        data.variable_by_name(name)
            .map(|v| v.index)
            .ok_or_else(|| OcteError::UnknownVariable(name.to_string()))
    };
    let target = lookup(&spec.target)?;
    let mut candidates = match &spec.candidates {
        Some(names) => names.iter().map(|n| lookup(n)).collect::<Result<Vec<_>, _>>()?,
        None => (0..data.variables().len()).filter(|&i| i != target).collect(),
    };
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.contains(&target) {
        return Err(CliError::Usage(format!(
            "target {} listed among its own sources",
            spec.target
        )));
    }
    if candidates.is_empty() {
        return Err(CliError::Usage(format!(
            "target {} has no candidate sources",
            spec.target
        )));
    }
    if k_max == 0 {
        return Err(CliError::Usage("--k-max must be at least 1".into()));
    }
    Ok(Resolved {
        target,
        k_max: k_max.min(candidates.len()),
        candidates,
    })
}

/// Runs discovery for every target and writes `<prefix>.json`,
/// `<prefix>.dot`, `<prefix>.report.txt` and `<prefix>.manifest.json`.
pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> CliResult<AnalyzeOutcome> {
    let started = Instant::now();
    let data = load_csv(&args.input)?;
    let config = TestConfig {
        permutations: args.permutations,
        significance: args.theta,
        seed: args.seed,
        max_condition_size: args.max_condition_size,
        early_stop: true,
    };
    config.validate()?;
    let resolved: Vec<Resolved> = args
        .targets
        .iter()
        .map(|t| resolve(&data, t, args.k_max))
        .collect::<CliResult<_>>()?;

    let mut decisions = Vec::new();
    let mut report = String::new();
    for r in &resolved {
        let series = match args.lag {
            Some(lag) => Cow::Owned(lag_embed(&data, &LagSpec::new(r.target, lag))?),
            None => Cow::Borrowed(&data),
        };
        let found = discover(
            Evidence::Sampled {
                data: &series,
                config: &config,
            },
            r.target,
            &r.candidates,
            DiscoverOptions {
                k_max: r.k_max,
                all: args.all,
            },
        )?;
        render_target(&mut report, &series, r, &found);
        decisions.extend(found);
    }
    let graph = CausalHypergraph::from_decisions(data.variables(), &decisions)?;
    let graph = if args.all { graph } else { graph.minimal_frontier() };
    render_edges(&mut report, &graph);

    let prefix = args
        .output
        .clone()
        .unwrap_or_else(|| args.input.with_extension("analysis"));
    let with_suffix = |s: &str| {
        let mut p = prefix.clone().into_os_string();
        p.push(s);
        PathBuf::from(p)
    };
    let json_path = with_suffix(".json");
    let dot_path = with_suffix(".dot");
    let report_path = with_suffix(".report.txt");
    ensure_parent(&json_path)?;
    std::fs::write(&json_path, graph.to_json() + "\n")?;
    std::fs::write(&dot_path, graph.to_dot())?;
    std::fs::write(&report_path, &report)?;
    let manifest = RunManifest::finish(
        "analyze",
        json!({
            "input": args.input,
            "targets": args.targets,
            "k_max": args.k_max,
            "test": config,
            "all": args.all,
            "lag": args.lag,
        }),
        &[args.input.as_path()],
        &[json_path.as_path(), dot_path.as_path(), report_path.as_path()],
        started,
    )?;
    manifest.save(&with_suffix(".manifest.json"))?;
    out.write_all(report.as_bytes())?;
    writeln!(out, "wrote {}", display_paths(&[&json_path, &dot_path, &report_path]))?;
    Ok(AnalyzeOutcome {
        decisions,
        hypergraph: graph,
        report,
        manifest,
    })
}

fn display_paths(paths: &[&Path]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn render_target(report: &mut String, data: &DataMatrix, r: &Resolved, decisions: &[HyperedgeDecision]) {
    let names: Vec<_> = r.candidates.iter().map(|&i| data.variables()[i].clone()).collect();
    let _ = writeln!(
        report,
        "target {}  candidates {}  k_max {}  samples {}",
        data.variables()[r.target],
        format_set(&names),
        r.k_max,
        data.sample_count()
    );
    let _ = writeln!(
        report,
        "  {:<24} {:>6} {:>6} {:>9} {:>12} {:>10}  argmin",
        "tail", "causal", "unique", "inherited", "octe[bits]", "max_p"
    );
    for d in decisions {
        let p = d.max_p.map_or("-".to_string(), |p| format!("{p:.6}"));
        let argmin = if d.evaluated { format_set(&d.argmin) } else { "-".into() };
        let _ = writeln!(
            report,
            "  {:<24} {:>6} {:>6} {:>9} {:>12.6} {:>10}  {}",
            format_set(&d.tail),
            yes(d.causal),
            yes(d.unique),
            yes(d.inherited),
            d.octe,
            p,
            argmin
        );
        if !d.evaluated {
            let _ = writeln!(
                report,
                "      not evaluated; octe is the largest value of a causal subset"
            );
        }
        for s in &d.subset_trace {
            let p = s.p_value.map_or("-".to_string(), |p| format!("{p:.6}"));
            let _ = writeln!(
                report,
                "      S={:<18} I={:.6}  p={}",
                format_set(&s.condition),
                s.estimate,
                p
            );
        }
    }
    report.push('\n');
}

fn render_edges(report: &mut String, graph: &CausalHypergraph) {
    let nodes = graph.nodes();
    let _ = writeln!(report, "hyperedges: {}", graph.edges().len());
    for e in graph.edges() {
        let tail: Vec<_> = e.tail.iter().map(|&i| nodes[i].clone()).collect();
        let mut tags = Vec::new();
        if e.unique {
            tags.push("unique");
        }
        if e.inherited {
            tags.push("inherited");
        }
        let p = e.p_value.map_or("-".to_string(), |p| format!("{p:.6}"));
        let _ = writeln!(
            report,
            "  {} -> {}  octe {:.6} bits  p {}  {}",
            format_set(&tail),
            nodes[e.head],
            e.weight,
            p,
            tags.join(",")
        );
    }
}
