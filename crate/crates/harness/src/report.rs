//! Per-cell summaries, convergence verdicts and plot data.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use parsgd::simnet::RunOutcome;
use serde::Serialize;

use crate::trace::Trace;

/// Window used for the loss-fluctuation column.
pub const FLUCTUATION_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    Diverged,
    /// No Byzantine-free trace of the same rule to compare against.
    NoBaseline,
    Stalled,
    StarvedAbort,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
            Verdict::NoBaseline => "no-baseline",
            Verdict::Stalled => "stalled",
            Verdict::StarvedAbort => "starved-abort",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: String,
    pub rule: String,
    pub attack: String,
    pub f: usize,
    pub epochs_run: usize,
    pub outcome: RunOutcome,
    pub final_test_loss: f64,
    pub best_test_loss: f64,
    pub final_top1: Option<f64>,
    pub best_top1: Option<f64>,
    pub baseline_loss: Option<f64>,
    pub ratio: Option<f64>,
    pub fluctuation: f64,
    pub verdict: Verdict,
}

/// Variance of the epoch-to-epoch change in test loss over the last
/// `window` epochs.
pub fn loss_fluctuation(trace: &Trace, window: usize) -> f64 {
    let losses: Vec<f64> = trace.records.iter().map(|r| r.test_loss).collect();
    let tail = &losses[losses.len().saturating_sub(window)..];
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.len() < 2 {
        return 0.0;
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64
}

/// Final-loss verdict against a Byzantine-free baseline.
pub fn verdict(final_loss: f64, baseline: Option<f64>, factor: f64, outcome: RunOutcome) -> Verdict {
    match outcome {
        RunOutcome::Stalled => return Verdict::Stalled,
        RunOutcome::StarvedAbort => return Verdict::StarvedAbort,
        RunOutcome::Completed => {}
    }
    match baseline {
        None => Verdict::NoBaseline,
        Some(b) if final_loss.is_finite() && final_loss <= factor * b => Verdict::Converged,
        Some(_) => Verdict::Diverged,
    }
}

/// Summaries in input order. Each rule is judged against the final test
/// loss of its own `attack = none` trace.
pub fn summarize(traces: &[Trace]) -> Vec<CellSummary> {
    let baselines: BTreeMap<&str, f64> = traces
        .iter()
        .filter(|t| t.header.attack == "none" && t.header.outcome == RunOutcome::Completed)
        .filter_map(|t| Some((t.header.rule.as_str(), t.final_test_loss()?)))
        .collect();
    traces
        .iter()
        .map(|t| {
            let final_test_loss = t.final_test_loss().unwrap_or(f64::NAN);
            let best_test_loss = t.records.iter().map(|r| r.test_loss).fold(f64::INFINITY, f64::min);
            let final_top1 = t.records.last().and_then(|r| r.top1);
            let best_top1 = t.records.iter().filter_map(|r| r.top1).reduce(f64::max);
            let baseline_loss = baselines.get(t.header.rule.as_str()).copied();
            CellSummary {
                cell: t.header.cell.clone(),
                rule: t.header.rule.clone(),
                attack: t.header.attack.clone(),
                f: t.header.f,
                epochs_run: t.records.len(),
                outcome: t.header.outcome,
                final_test_loss,
                best_test_loss,
                final_top1,
                best_top1,
                baseline_loss,
                ratio: baseline_loss.map(|b| final_test_loss / b),
                fluctuation: loss_fluctuation(t, FLUCTUATION_WINDOW),
                verdict: verdict(final_test_loss, baseline_loss, t.header.converged_factor, t.header.outcome),
            }
        })
        .collect()
}

/// Every `*.csv` trace in `dir`, sorted by file name.
pub fn load_traces(dir: &Path) -> anyhow::Result<Vec<Trace>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no trace files in {}", dir.display());
    }
    paths.iter().map(|p| Trace::read(p).map_err(Into::into)).collect()
}

/// Plot series: for each (attack, f) and metric, one column per rule.
pub fn plot_data(traces: &[Trace]) -> BTreeMap<String, String> {
    let mut groups: BTreeMap<(String, usize), Vec<&Trace>> = BTreeMap::new();
    for t in traces {
        groups.entry((t.header.attack.clone(), t.header.f)).or_default().push(t);
    }
    let mut files = BTreeMap::new();
    for ((attack, f), group) in groups {
        let epochs = group.iter().map(|t| t.records.len()).max().unwrap_or(0);
        for metric in ["test_loss", "top1"] {
            let mut text = String::from("epoch");
            for t in &group {
                text.push(',');
                text.push_str(&t.header.rule);
            }
            text.push('\n');
            for e in 0..epochs {
                text.push_str(&(e + 1).to_string());
                for t in &group {
                    text.push(',');
                    let value = t.records.get(e).and_then(|r| match metric {
                        "test_loss" => Some(r.test_loss),
                        _ => r.top1,
                    });
                    if let Some(v) = value {
                        text.push_str(&v.to_string());
                    }
                }
                text.push('\n');
            }
            files.insert(format!("{attack}-f{f}-{metric}.csv"), text);
        }
    }
    files
}

pub fn format_table(summaries: &[CellSummary]) -> String {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    let mut out = format!(
        "{:<44} {:>8} {:>10} {:>10} {:>8} {:>8} {:>8}  {}\n",
        "cell", "epochs", "final", "best", "top1", "best1", "ratio", "verdict"
    );
    for s in summaries {
        out.push_str(&format!(
            "{:<44} {:>8} {:>10.4} {:>10.4} {:>8} {:>8} {:>8}  {}\n",
            s.cell,
            s.epochs_run,
            s.final_test_loss,
            s.best_test_loss,
            opt(s.final_top1),
            opt(s.best_top1),
            opt(s.ratio),
            s.verdict
        ));
    }
    out
}

/// Write `summary.csv` and `plot-data/*.csv` into `out_dir`.
pub fn write_report(traces: &[Trace], out_dir: &Path) -> anyhow::Result<Vec<CellSummary>> {
    let summaries = summarize(traces);
    fs::create_dir_all(out_dir.join("plot-data"))?;
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    for s in &summaries {
        w.serialize(s)?;
    }
    w.flush()?;
    for (name, text) in plot_data(traces) {
        fs::write(out_dir.join("plot-data").join(name), text)?;
    }
    Ok(summaries)
}
