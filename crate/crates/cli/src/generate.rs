use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use octe_core::io::save_csv;
use octe_core::systems::{sample, SystemSpec};
use serde_json::json;

use crate::{ensure_parent, sibling, CliError, CliResult, RunManifest, SystemName, SystemParams};

#[derive(Clone, Debug, Args)]
pub struct GenerateArgs {
    /// Builtin system to sample.
    #[arg(value_enum, required_unless_present = "spec")]
    pub system: Option<SystemName>,

    /// JSON system specification instead of a builtin.
    #[arg(long, conflicts_with = "system")]
    pub spec: Option<PathBuf>,

    #[command(flatten)]
    pub params: SystemParams,

    /// Number of samples.
    #[arg(short = 'T', long = "samples")]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV; the ground truth and manifest are written beside it.
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Samples the system to `output`, plus `<stem>.truth.json` for builtins and
/// `<stem>.manifest.json`.
pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> CliResult<RunManifest> {
    let started = Instant::now();
    let (spec, truth, system) = match (&args.system, &args.spec) {
        (Some(name), _) => {
            let builtin = args.params.builtin(*name);
            let (spec, truth) = builtin.build()?;
            let system = json!({ "name": builtin.name(), "params": args.params.describe(*name) });
            (spec, Some(truth), system)
        }
        (None, Some(path)) => {
            let spec = SystemSpec::from_json(&std::fs::read_to_string(path)?)?;
            (spec, None, json!({ "spec": path }))
        }
        (None, None) => return Err(CliError::Usage("give a system name or --spec".into())),
    };
    let data = sample(&spec, args.samples, args.seed)?;
    ensure_parent(&args.output)?;
    save_csv(&data, &args.output)?;
    let mut outputs = vec![args.output.clone()];
    if let Some(truth) = truth {
        let path = sibling(&args.output, "truth.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n",
        )?;
        outputs.push(path);
    }
    let inputs: Vec<&std::path::Path> = args.spec.iter().map(|p| p.as_path()).collect();
    let output_refs: Vec<&std::path::Path> = outputs.iter().map(|p| p.as_path()).collect();
    let manifest = RunManifest::finish(
        "generate",
        json!({ "system": system, "samples": args.samples, "seed": args.seed }),
        &inputs,
        &output_refs,
        started,
    )?;
    manifest.save(&sibling(&args.output, "manifest.json"))?;
    writeln!(
        out,
        "wrote {} samples of {} variables to {}",
        data.sample_count(),
        data.variables().len(),
        args.output.display()
    )?;
    Ok(manifest)
}
