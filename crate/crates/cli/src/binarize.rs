use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use octe_core::io::{binarize_events, save_csv, EventSeries};
use octe_core::probcore::{DataMatrix, VariableId};
use serde_json::json;

use crate::{ensure_parent, sibling, CliError, CliResult, RunManifest};

#[derive(Clone, Debug, Args)]
pub struct BinarizeArgs {
    /// Event file, as `PATH` or `NAME=PATH`; the column is named after the file stem by default. Repeatable.
    #[arg(long = "events", required = true)]
    pub events: Vec<String>,

    /// Window length in seconds.
    #[arg(long, default_value_t = 0.25)]
    pub window: f64,

    /// A window is 1 when its event rate exceeds this many events per second.
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,

    #[arg(short, long)]
    pub output: PathBuf,
}

fn split(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(arg);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, path)
        }
    }
}

/// Writes one binary column per event file.
pub fn cmd_binarize(args: &BinarizeArgs, out: &mut dyn Write) -> CliResult<RunManifest> {
    let started = Instant::now();
    let sources: Vec<(String, PathBuf)> = args.events.iter().map(|a| split(a)).collect();
    let mut columns = Vec::new();
    for (_, path) in &sources {
        columns.push(binarize_events(&EventSeries::load(path)?, args.window, args.threshold)?);
    }
    if columns.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(CliError::Usage("event files cover different durations".into()));
    }
    let variables = sources
        .iter()
        .enumerate()
        .map(|(i, (name, _))| VariableId::new(i, name.clone()))
        .collect();
    let data = DataMatrix::new(variables, columns, vec![2; sources.len()])?;
    ensure_parent(&args.output)?;
    save_csv(&data, &args.output)?;
    let inputs: Vec<&Path> = sources.iter().map(|(_, p)| p.as_path()).collect();
    let manifest = RunManifest::finish(
        "binarize",
        json!({ "events": args.events, "window": args.window, "threshold": args.threshold }),
        &inputs,
        &[args.output.as_path()],
        started,
    )?;
    manifest.save(&sibling(&args.output, "manifest.json"))?;
    writeln!(
        out,
        "wrote {} windows to {}",
        data.sample_count(),
        args.output.display()
    )?;
    Ok(manifest)
}
