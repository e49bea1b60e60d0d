//! Run configuration and backend profiles.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use egoharness_core::agent::{oracle_agent, ChatBackend, HttpBackend, HttpBackendProfile, ScriptedBackend};
use egoharness_core::task::TaskSpec;
use egoharness_core::user::InteractionMode;

pub const PASS_EVAL_JSON: &str = r#"{"scores": {"role_consistency": 1, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""}"#;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// One chat backend, by kind. Scripted and built-in kinds keep the whole
/// harness runnable offline; `http` points at a provider endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendProfile {
    /// Replays a fixed playbook; the last entry repeats.
    Scripted { name: String, playbook: Vec<String> },
    /// Generic HTTP chat endpoint with a field-mapping profile.
    Http(HttpBackendProfile),
    /// Agent that replays the task's ground-truth calls, then converses.
    Oracle,
    /// Actor that sends the full instruction once, then STOP.
    InstructionUser,
    /// Evaluator that passes every criterion.
    ApproveAll,
    /// Summarizer that returns a fixed line.
    FixedSummary {
        #[serde(default)]
        text: String,
    },
}

impl BackendProfile {
    /// Instantiates the backend for one episode of one task.
    pub fn build(&self, task: &TaskSpec) -> Result<Arc<dyn ChatBackend>, ConfigError> {
        match self {
            BackendProfile::Scripted { name, playbook } => {
                Ok(Arc::new(ScriptedBackend::new(name, playbook.clone())))
            }
            BackendProfile::Http(profile) => Ok(Arc::new(
                HttpBackend::new(profile.clone())
                    .map_err(|e| ConfigError::Invalid(format!("http backend: {e}")))?,
            )),
            BackendProfile::Oracle => Ok(Arc::new(oracle_agent(&task.ground_truth))),
            BackendProfile::InstructionUser => {
                let first = format!(
                    "My user_id is {}. {}",
                    task.ground_truth.user_id, task.instruction
                );
                Ok(Arc::new(ScriptedBackend::new(
                    "instruction_user",
                    vec![first, "STOP".into()],
                )))
            }
            BackendProfile::ApproveAll => Ok(Arc::new(ScriptedBackend::new(
                "approve_all",
                vec![PASS_EVAL_JSON.into()],
            ))),
            BackendProfile::FixedSummary { text } => {
                let line = if text.is_empty() {
                    "The user stated the request and the agent acted on it.".to_string()
                } else {
                    text.clone()
                };
                Ok(Arc::new(ScriptedBackend::new("fixed_summary", vec![line])))
            }
        }
    }

    /// Model identifier for reports.
    pub fn model_name(&self) -> String {
        match self {
            BackendProfile::Scripted { name, .. } => name.clone(),
            BackendProfile::Http(profile) => profile.model.clone(),
            BackendProfile::Oracle => "oracle".into(),
            BackendProfile::InstructionUser => "instruction_user".into(),
            BackendProfile::ApproveAll => "approve_all".into(),
            BackendProfile::FixedSummary { .. } => "fixed_summary".into(),
        }
    }

    pub fn supports_media(&self) -> bool {
        matches!(self, BackendProfile::Http(profile) if profile.supports_media)
    }
}

/// The four roles a run needs backends for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendProfiles {
    pub agent: BackendProfile,
    pub actor: BackendProfile,
    pub evaluator: BackendProfile,
    pub summarizer: BackendProfile,
}

/// Episode budget overrides; defaults mirror the benchmark limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeSettings {
    #[serde(default = "default_user_turns")]
    pub max_user_turns: u32,
    #[serde(default = "default_tool_calls")]
    pub max_tool_calls: u32,
    #[serde(default = "default_inner_iterations")]
    pub max_inner_iterations: u32,
    #[serde(default)]
    pub terminate_after_complaints: Option<u32>,
}

fn default_user_turns() -> u32 {
    10
}

fn default_tool_calls() -> u32 {
    200
}

fn default_inner_iterations() -> u32 {
    25
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        EpisodeSettings {
            max_user_turns: default_user_turns(),
            max_tool_calls: default_tool_calls(),
            max_inner_iterations: default_inner_iterations(),
            terminate_after_complaints: None,
        }
    }
}

/// A full batch-run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Directory holding one subdirectory per scenario with `database.json`
    /// and `tools.json`.
    pub scenario_pack: PathBuf,
    pub task_files: Vec<PathBuf>,
    /// Interaction modes to run; one episode per (task, mode).
    pub modes: Vec<InteractionMode>,
    #[serde(default)]
    pub episode: EpisodeSettings,
    pub backends: BackendProfiles,
    pub output_dir: PathBuf,
    /// Run directory name; a timestamp when absent.
    #[serde(default)]
    pub run_id: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_parallelism() -> usize {
    4
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut config: RunConfig = serde_json::from_str(&text)?;
        // Relative paths resolve against the config file's directory.
        if let Some(base) = path.parent() {
            config.scenario_pack = resolve(base, &config.scenario_pack);
            config.task_files = config
                .task_files
                .iter()
                .map(|p| resolve(base, p))
                .collect();
            config.output_dir = resolve(base, &config.output_dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes.is_empty() {
            return Err(ConfigError::Invalid("at least one mode is required".into()));
        }
        if self.task_files.is_empty() {
            return Err(ConfigError::Invalid("at least one task file is required".into()));
        }
        if self.parallelism == 0 {
            return Err(ConfigError::Invalid("parallelism must be positive".into()));
        }
        if self.episode.max_user_turns == 0
            || self.episode.max_tool_calls == 0
            || self.episode.max_inner_iterations == 0
        {
            return Err(ConfigError::Invalid("episode bounds must be positive".into()));
        }
        Ok(())
    }

    /// Stable hash of the behavior-relevant configuration: output location
    /// and run naming are excluded so reruns of the same experiment hash
    /// identically.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut redacted = self.clone();
        redacted.output_dir = PathBuf::new();
        redacted.run_id = None;
        let canonical = serde_json::to_string(&redacted).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
