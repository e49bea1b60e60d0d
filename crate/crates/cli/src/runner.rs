//! Batch episode runner: fans episodes across worker threads, one log per
//! (task, mode), with per-task failure isolation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use egoharness_core::agent::AgentAdapter;
use egoharness_core::dialogue::{run_episode, EpisodeConfig, HaltReason, TrajectoryLog};
use egoharness_core::metrics::replay_ground_truth;
use egoharness_core::scenario::{load_database, ScenarioDatabase};
use egoharness_core::task::{load_tasks, TaskSpec};
use egoharness_core::tools::ToolRegistry;
use egoharness_core::user::{InteractionMode, UserSimulator};

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario '{0}' not found in pack")]
    UnknownScenario(String),
    #[error("scenario pack error: {0}")]
    Pack(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("task file error: {0}")]
    Task(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Manifest written alongside the logs; everything a report needs and
/// nothing volatile, so identical runs produce identical bytes.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub model: String,
    pub modes: Vec<InteractionMode>,
    pub scenario_ids: Vec<String>,
    pub task_ids: Vec<String>,
    pub episodes_total: usize,
    pub episodes_failed: usize,
    /// Per-task setup errors that prevented an episode from running.
    pub task_errors: Vec<String>,
}

/// A loaded scenario: pristine database plus its registry.
struct Scenario {
    pristine: ScenarioDatabase,
    registry: ToolRegistry,
}

fn load_pack(pack_dir: &Path) -> Result<BTreeMap<String, Scenario>, RunError> {
    let mut scenarios = BTreeMap::new();
    for entry in std::fs::read_dir(pack_dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let dir = entry.path();
        let db_path = dir.join("database.json");
        let tools_path = dir.join("tools.json");
        if !db_path.exists() {
            continue;
        }
        let pristine = load_database(&db_path).map_err(|e| RunError::Pack(e.to_string()))?;
        let registry = ToolRegistry::load_toolset_file(&tools_path)
            .map_err(|e| RunError::Pack(format!("{}: {e}", tools_path.display())))?;
        scenarios.insert(pristine.scenario_id.clone(), Scenario { pristine, registry });
    }
    if scenarios.is_empty() {
        return Err(RunError::Pack(format!(
            "no scenarios under {}",
            pack_dir.display()
        )));
    }
    Ok(scenarios)
}

/// Stable per-episode seed: mixes the run seed with mode and task id so
/// episodes are independent of scheduling order.
fn episode_seed(run_seed: u64, mode: InteractionMode, task_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(run_seed.to_le_bytes());
    hasher.update(mode.as_str().as_bytes());
    hasher.update(task_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[0..8].try_into().expect("sha256 is long enough"))
}

struct EpisodeJob {
    mode: InteractionMode,
    task_index: usize,
}

struct EpisodeOutcome {
    mode: InteractionMode,
    task_id: String,
    log_json: Option<String>,
    failed: bool,
    error: Option<String>,
}

fn run_one(
    config: &RunConfig,
    scenarios: &BTreeMap<String, Scenario>,
    task: &TaskSpec,
    mode: InteractionMode,
) -> EpisodeOutcome {
    let scenario = match scenarios.get(&task.scenario_id) {
        Some(s) => s,
        None => {
            return EpisodeOutcome {
                mode,
                task_id: task.task_id.clone(),
                log_json: None,
                failed: true,
                error: Some(format!(
                    "task '{}': scenario '{}' not in pack",
                    task.task_id, task.scenario_id
                )),
            }
        }
    };
    let backends = &config.backends;
    let build = |profile: &crate::config::BackendProfile| profile.build(task);
    let (agent_backend, actor, evaluator, summarizer) = match (
        build(&backends.agent),
        build(&backends.actor),
        build(&backends.evaluator),
        build(&backends.summarizer),
    ) {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
        (a, b, c, d) => {
            let message = [a.err(), b.err(), c.err(), d.err()]
                .into_iter()
                .flatten()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return EpisodeOutcome {
                mode,
                task_id: task.task_id.clone(),
                log_json: None,
                failed: true,
                error: Some(format!("task '{}': backend setup: {message}", task.task_id)),
            };
        }
    };
    let adapter = AgentAdapter::new(agent_backend)
        .with_media_support(backends.agent.supports_media());
    let user = UserSimulator::new(actor, evaluator, summarizer);
    let mut cfg = EpisodeConfig::new(mode);
    cfg.max_user_turns = config.episode.max_user_turns;
    cfg.max_tool_calls = config.episode.max_tool_calls;
    cfg.max_inner_iterations = config.episode.max_inner_iterations;
    cfg.terminate_after_complaints = config.episode.terminate_after_complaints;
    let seed = episode_seed(config.seed, mode, &task.task_id);
    cfg.noise_seed = seed;

    let mut db = scenario.pristine.clone();
    let traj = run_episode(task, &adapter, &user, &mut db, &scenario.registry, &cfg);
    let failed = traj.halted_reason == HaltReason::AgentError;

    let mut log = TrajectoryLog::from_trajectory(task, &traj, &backends.agent.model_name(), seed);
    log.ground_truth = Some(task.ground_truth.clone());
    // An unexecutable ground truth is an annotation bug: the log is still
    // written, and the manifest carries the error.
    let mut error = None;
    match replay_ground_truth(&task.ground_truth, &scenario.pristine, &scenario.registry) {
        Ok(digest) => log.gt_replay_digest = Some(digest.digest),
        Err(e) => error = Some(e.to_string()),
    }
    EpisodeOutcome {
        mode,
        task_id: task.task_id.clone(),
        log_json: Some(log.to_json_pretty()),
        failed: failed || error.is_some(),
        error,
    }
}

/// Runs every (task, mode) episode and writes the run directory. Episode
/// failures are isolated: they produce logs (or manifest entries) and the
/// run continues.
pub fn run(config: &RunConfig) -> Result<PathBuf, RunError> {
    config.validate()?;
    let scenarios = load_pack(&config.scenario_pack)?;
    let mut tasks: Vec<TaskSpec> = Vec::new();
    for file in &config.task_files {
        let batch = load_tasks(file).map_err(|e| RunError::Task(e.to_string()))?;
        tasks.extend(batch);
    }
    if tasks.is_empty() {
        return Err(RunError::Task("no tasks loaded".into()));
    }

    let run_id = config
        .run_id
        .clone()
        .unwrap_or_else(|| format!("{}", std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)));
    let run_dir = config.output_dir.join(run_id);
    std::fs::create_dir_all(&run_dir)?;

    // Jobs over (mode, task) pairs, drained by a small thread pool.
    let jobs: Vec<EpisodeJob> = config
        .modes
        .iter()
        .flat_map(|mode| {
            (0..tasks.len()).map(move |task_index| EpisodeJob {
                mode: *mode,
                task_index,
            })
        })
        .collect();
    let queue = Mutex::new(jobs.into_iter().collect::<std::collections::VecDeque<_>>());
    let outcomes = Mutex::new(Vec::<EpisodeOutcome>::new());
    let workers = config.parallelism.min(config.modes.len() * tasks.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = match queue.lock().expect("queue lock").pop_front() {
                    Some(job) => job,
                    None => break,
                };
                let outcome = run_one(config, &scenarios, &tasks[job.task_index], job.mode);
                outcomes.lock().expect("outcomes lock").push(outcome);
            });
        }
    });
    let mut outcomes = outcomes.into_inner().expect("outcomes");
    outcomes.sort_by(|a, b| {
        (a.mode.as_str(), &a.task_id).cmp(&(b.mode.as_str(), &b.task_id))
    });

    let mut failed = 0usize;
    let mut task_errors = Vec::new();
    for outcome in &outcomes {
        if outcome.failed {
            failed += 1;
        }
        if let Some(error) = &outcome.error {
            task_errors.push(format!("[{}] {}", outcome.mode.as_str(), error));
        }
        let Some(log_json) = &outcome.log_json else {
            continue;
        };
        let mode_dir = run_dir.join(outcome.mode.as_str());
        std::fs::create_dir_all(&mode_dir)?;
        std::fs::write(
            mode_dir.join(format!("{}.json", outcome.task_id)),
            log_json,
        )?;
    }

    // Toolsets are copied into the run so reports need nothing else.
    let toolset_dir = run_dir.join("toolsets");
    std::fs::create_dir_all(&toolset_dir)?;
    for (scenario_id, scenario) in &scenarios {
        let docs = serde_json::Value::Array(scenario.registry.schema_documents());
        std::fs::write(
            toolset_dir.join(format!("{scenario_id}.json")),
            serde_json::to_string_pretty(&docs)?,
        )?;
    }

    let mut task_ids: Vec<String> = tasks.iter().map(|t| t.task_id.clone()).collect();
    task_ids.sort();
    let manifest = RunManifest {
        config_hash: config.config_hash(),
        seed: config.seed,
        model: config.backends.agent.model_name(),
        modes: config.modes.clone(),
        scenario_ids: scenarios.keys().cloned().collect(),
        task_ids,
        episodes_total: outcomes.len(),
        episodes_failed: failed,
        task_errors,
    };
    std::fs::write(
        run_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(run_dir)
}

/// Loads and validates one scenario file, returning its statistics and the
/// dangling references.
pub fn validate_scenario(path: &Path) -> Result<String, RunError> {
    let db = load_database(path).map_err(|e| RunError::Scenario(e.to_string()))?;
    let dangling = db.dangling_references();
    let mut out = String::new();
    out.push_str(&format!("scenario '{}' is valid\n", db.scenario_id));
    out.push_str(&format!("  catalog records: {}\n", db.catalog.len()));
    for (kind, ledgers) in &db.ledgers {
        out.push_str(&format!("  {}: {} user(s)\n", kind.key(), ledgers.len()));
    }
    if dangling.is_empty() {
        out.push_str("  dangling references: none\n");
    } else {
        out.push_str(&format!("  dangling references: {}\n", dangling.len()));
        for d in &dangling {
            out.push_str(&format!(
                "    {} / {}: '{}'\n",
                d.kind.key(),
                d.user_id,
                d.item_name
            ));
        }
    }
    Ok(out)
}

/// Replays each task's ground truth on a pristine copy and prints digests.
pub fn replay_gt(task_file: &Path, pack_dir: &Path) -> Result<String, RunError> {
    let scenarios = load_pack(pack_dir)?;
    let tasks = load_tasks(task_file).map_err(|e| RunError::Task(e.to_string()))?;
    let mut out = String::new();
    for task in &tasks {
        let scenario = scenarios
            .get(&task.scenario_id)
            .ok_or_else(|| RunError::UnknownScenario(task.scenario_id.clone()))?;
        match replay_ground_truth(&task.ground_truth, &scenario.pristine, &scenario.registry) {
            Ok(digest) => {
                out.push_str(&format!("{}: {}\n", task.task_id, digest.digest));
            }
            Err(e) => {
                out.push_str(&format!("{}: INVALID ({e})\n", task.task_id));
            }
        }
    }
    Ok(out)
}
