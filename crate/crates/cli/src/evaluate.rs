use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::Args;

use sentinel_core::ingest::{load_detection_stream, FrameRecord};
use sentinel_core::violation::{compliance_metrics, Metrics};
use sentinel_core::FrameAssessment;

use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// `assessments.jsonl` written by `run`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Detection stream carrying truth labels.
    #[arg(long)]
    pub truth: PathBuf,
    /// Whether a missing or misworn mask counts as a violation.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub mask_required: bool,
}

fn open_input(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn load_assessments(path: &Path) -> Result<Vec<FrameAssessment>, CliError> {
    let reader = BufReader::new(open_input(path)?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let a =
            serde_json::from_str(&line).map_err(|e| CliError::Runtime(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(a);
    }
    Ok(out)
}

pub fn load_truth(path: &Path) -> Result<Vec<FrameRecord>, CliError> {
    open_input(path)?;
    load_detection_stream(path)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn format_metrics(m: &Metrics) -> String {
    let c = &m.counts;
    let mut line = format!(
        "tp={} fp={} fn={} tn={} precision={:.6} recall={:.6} f1={:.6}",
        c.true_positives, c.false_positives, c.false_negatives, c.true_negatives, m.precision, m.recall, m.f1
    );
    if m.degenerate_denominators {
        line.push_str(" degenerate_denominators=true");
    }
    line
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pred = load_assessments(&args.pred)?;
    let truth = load_truth(&args.truth)?;
    let metrics =
        compliance_metrics(&pred, &truth, args.mask_required).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out, "{}", format_metrics(&metrics))?;
    Ok(())
}
