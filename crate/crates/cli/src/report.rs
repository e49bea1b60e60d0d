//! Aggregation of trajectory logs into metrics, error histograms, and
//! efficiency statistics.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use egoharness_core::dialogue::TrajectoryLog;
use egoharness_core::metrics::{
    compute_metrics, ErrorLabel, MetricsError, TaskEvaluation, TrajectoryView,
};
use egoharness_core::tools::ToolRegistry;
use egoharness_core::user::InteractionMode;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no parsable trajectory logs under the run directory")]
    EmptyDataset,
    #[error("run directory is missing toolset '{0}'")]
    MissingToolset(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Means over the trajectory logs of one group.
#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyStats {
    pub mean_input_tokens: f64,
    pub mean_output_tokens: f64,
    pub mean_rounds: f64,
    pub mean_tool_calls: f64,
}

/// Metrics for one (model, scenario, mode) group.
#[derive(Debug, Serialize)]
pub struct GroupReport {
    pub model: String,
    pub scenario_id: String,
    pub mode: InteractionMode,
    pub tasks: usize,
    pub micro_acc: f64,
    pub tool_succ: f64,
    pub result_succ: f64,
    pub joint_succ: f64,
    pub error_histogram: BTreeMap<String, usize>,
    pub efficiency: EfficiencyStats,
    pub task_rows: Vec<egoharness_core::metrics::TaskRow>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub groups: Vec<GroupReport>,
    /// Logs that failed to parse and were skipped.
    pub corrupt_logs: usize,
}

impl RunReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table: one row per (model, scenario), the four metrics per
    /// mode as percentages.
    pub fn summary_table(&self) -> String {
        let mut keys: Vec<(String, String)> = self
            .groups
            .iter()
            .map(|g| (g.model.clone(), g.scenario_id.clone()))
            .collect();
        keys.sort();
        keys.dedup();
        let modes = [
            InteractionMode::DynamicEasy,
            InteractionMode::DynamicHard,
            InteractionMode::Static,
        ];
        let mut out = String::new();
        out.push_str(&format!("{:<24} {:<14}", "model", "scenario"));
        for mode in &modes {
            out.push_str(&format!(
                " | {:>6} {:>6} {:>6} {:>6}",
                format!("{}:Mi", mode.as_str()),
                "Tool",
                "Res",
                "Joint"
            ));
        }
        out.push('\n');
        for (model, scenario) in keys {
            out.push_str(&format!("{model:<24} {scenario:<14}"));
            for mode in &modes {
                match self
                    .groups
                    .iter()
                    .find(|g| g.model == model && g.scenario_id == scenario && g.mode == *mode)
                {
                    Some(g) => out.push_str(&format!(
                        " | {:>6.2} {:>6.2} {:>6.2} {:>6.2}",
                        100.0 * g.micro_acc,
                        100.0 * g.tool_succ,
                        100.0 * g.result_succ,
                        100.0 * g.joint_succ
                    )),
                    None => out.push_str(&format!(
                        " | {:>6} {:>6} {:>6} {:>6}",
                        "-", "-", "-", "-"
                    )),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn load_toolsets(run_dir: &Path) -> Result<BTreeMap<String, ToolRegistry>, ReportError> {
    let dir = run_dir.join("toolsets");
    let mut registries = BTreeMap::new();
    if dir.is_dir() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                let scenario_id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_default();
                if let Ok(registry) = ToolRegistry::load_toolset_file(&path) {
                    registries.insert(scenario_id, registry);
                }
            }
        }
    }
    Ok(registries)
}

/// Builds the full report from a run directory. Pure over the directory
/// contents: re-running it yields identical output.
pub fn report(run_dir: &Path) -> Result<RunReport, ReportError> {
    let registries = load_toolsets(run_dir)?;
    let mut corrupt = 0usize;
    // (model, scenario, mode) -> evaluations + per-log stats
    let mut grouped: BTreeMap<(String, String, String), Vec<(TaskEvaluation, TrajectoryLog)>> =
        BTreeMap::new();

    for mode_dir in std::fs::read_dir(run_dir)? {
        let mode_dir = mode_dir?.path();
        if !mode_dir.is_dir() {
            continue;
        }
        let dir_name = mode_dir
            .file_name()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_default();
        if InteractionMode::parse(&dir_name).is_none() {
            continue;
        }
        let mut paths: Vec<_> = std::fs::read_dir(&mode_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            let log = match TrajectoryLog::from_json(&text) {
                Ok(log) => log,
                Err(err) => {
                    eprintln!("warning: skipping corrupt log {}: {err}", path.display());
                    corrupt += 1;
                    continue;
                }
            };
            let Some(ground_truth) = log.ground_truth.clone() else {
                eprintln!(
                    "warning: skipping log without ground truth: {}",
                    path.display()
                );
                corrupt += 1;
                continue;
            };
            let Some(gt_digest) = log.gt_replay_digest.clone() else {
                eprintln!(
                    "warning: skipping log without ground-truth digest: {}",
                    path.display()
                );
                corrupt += 1;
                continue;
            };
            let evaluation = TaskEvaluation {
                ground_truth,
                view: TrajectoryView::from(&log),
                gt_replay_digest: gt_digest,
            };
            grouped
                .entry((
                    log.model.clone(),
                    log.scenario_id.clone(),
                    log.mode.as_str().to_string(),
                ))
                .or_default()
                .push((evaluation, log));
        }
    }

    if grouped.is_empty() {
        return Err(ReportError::EmptyDataset);
    }

    let mut groups = Vec::new();
    for ((model, scenario_id, mode_name), entries) in grouped {
        let mode = InteractionMode::parse(&mode_name).expect("mode directories are valid");
        let registry = registries
            .get(&scenario_id)
            .ok_or_else(|| ReportError::MissingToolset(scenario_id.clone()))?;
        let evaluations: Vec<TaskEvaluation> =
            entries.iter().map(|(e, _)| e.clone()).collect();
        let metrics = compute_metrics(&evaluations, registry)?;
        let mut histogram: BTreeMap<String, usize> = ErrorLabel::ALL
            .iter()
            .map(|l| (l.as_str().to_string(), 0))
            .collect();
        for row in &metrics.rows {
            *histogram.entry(row.error.as_str().to_string()).or_insert(0) += 1;
        }
        let n = entries.len() as f64;
        let efficiency = EfficiencyStats {
            mean_input_tokens: entries.iter().map(|(_, l)| l.input_tokens as f64).sum::<f64>() / n,
            mean_output_tokens: entries.iter().map(|(_, l)| l.output_tokens as f64).sum::<f64>()
                / n,
            mean_rounds: entries.iter().map(|(_, l)| l.rounds_count as f64).sum::<f64>() / n,
            mean_tool_calls: entries
                .iter()
                .map(|(_, l)| l.tool_calls_count as f64)
                .sum::<f64>()
                / n,
        };
        groups.push(GroupReport {
            model,
            scenario_id,
            mode,
            tasks: entries.len(),
            micro_acc: metrics.micro_acc,
            tool_succ: metrics.tool_succ,
            result_succ: metrics.result_succ,
            joint_succ: metrics.joint_succ,
            error_histogram: histogram,
            efficiency,
            task_rows: metrics.rows,
        });
    }
    Ok(RunReport {
        groups,
        corrupt_logs: corrupt,
    })
}

/// Writes `report.json` into the run directory and returns the report.
pub fn report_and_write(run_dir: &Path) -> Result<RunReport, ReportError> {
    let result = report(run_dir)?;
    std::fs::write(run_dir.join("report.json"), result.to_json_pretty())?;
    Ok(result)
}
