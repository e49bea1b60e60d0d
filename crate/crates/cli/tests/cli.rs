//! Runner and reporter integration tests over the fixture pack.

use std::path::PathBuf;

use egoharness_cli::config::{BackendProfile, BackendProfiles, EpisodeSettings, RunConfig};
use egoharness_cli::report::{report, report_and_write, ReportError};
use egoharness_cli::runner::{run, RunManifest};
use egoharness_core::dialogue::TrajectoryLog;
use egoharness_core::user::InteractionMode;

fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(path)
}

fn oracle_backends() -> BackendProfiles {
    BackendProfiles {
        agent: BackendProfile::Oracle,
        actor: BackendProfile::InstructionUser,
        evaluator: BackendProfile::ApproveAll,
        summarizer: BackendProfile::FixedSummary { text: String::new() },
    }
}

fn base_config(output_dir: PathBuf, run_id: &str) -> RunConfig {
    RunConfig {
        scenario_pack: fixture("packs"),
        task_files: vec![fixture("tasks/retail_demo_tasks.json")],
        modes: vec![InteractionMode::DynamicEasy],
        episode: EpisodeSettings::default(),
        backends: oracle_backends(),
        output_dir,
        run_id: Some(run_id.to_string()),
        seed: 3,
        parallelism: 2,
    }
}

#[test]
fn run_writes_logs_manifest_and_toolsets() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = base_config(tmp.path().into(), "smoke");
    config.modes = vec![
        InteractionMode::DynamicEasy,
        InteractionMode::DynamicHard,
        InteractionMode::Static,
    ];
    let run_dir = run(&config).unwrap();
    for mode in ["easy", "hard", "static"] {
        let count = std::fs::read_dir(run_dir.join(mode)).unwrap().count();
        assert_eq!(count, 6, "{mode} holds one log per task");
    }
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.episodes_total, 18);
    assert_eq!(manifest.episodes_failed, 0);
    assert_eq!(manifest.task_ids.len(), 6);
    assert!(run_dir.join("toolsets/retail_demo.json").exists());

    // Every log respects the call-budget invariant.
    for mode in ["easy", "hard", "static"] {
        for entry in std::fs::read_dir(run_dir.join(mode)).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            let log = TrajectoryLog::from_json(&text).unwrap();
            assert_eq!(log.tool_calls_count as usize, log.flat_tool_calls().len());
            assert!(log.tool_calls_count <= 200);
        }
    }

    // Reporting twice over the same directory is idempotent.
    let first = report_and_write(&run_dir).unwrap().to_json_pretty();
    let second = report_and_write(&run_dir).unwrap().to_json_pretty();
    assert_eq!(first, second);

    // Efficiency statistics and the error histogram come out of the logs.
    let result = report(&run_dir).unwrap();
    assert_eq!(result.groups.len(), 3, "one group per mode");
    for group in &result.groups {
        assert_eq!(group.error_histogram["CORRECT"], 6);
        assert_eq!(group.error_histogram["LOGICAL"], 0);
        assert!(group.efficiency.mean_tool_calls > 0.0);
        assert!(group.efficiency.mean_rounds >= 1.0);
    }
}

#[test]
fn mixed_oracle_and_noop_halves_joint_success() {
    // Split the six tasks in two files; run the oracle on one half and a
    // conversational no-op (reported under the same model name) on the
    // other, into the same run directory.
    let tmp = tempfile::tempdir().unwrap();
    let tasks: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixture("tasks/retail_demo_tasks.json")).unwrap(),
    )
    .unwrap();
    let tasks = tasks.as_array().unwrap();
    let first_half_path = tmp.path().join("tasks_a.json");
    let second_half_path = tmp.path().join("tasks_b.json");
    std::fs::write(
        &first_half_path,
        serde_json::to_string(&tasks[0..3].to_vec()).unwrap(),
    )
    .unwrap();
    std::fs::write(
        &second_half_path,
        serde_json::to_string(&tasks[3..6].to_vec()).unwrap(),
    )
    .unwrap();

    let mut oracle_half = base_config(tmp.path().into(), "mixed");
    oracle_half.task_files = vec![first_half_path];
    let run_dir = run(&oracle_half).unwrap();

    let mut noop_half = base_config(tmp.path().into(), "mixed");
    noop_half.task_files = vec![second_half_path];
    noop_half.backends.agent = BackendProfile::Scripted {
        name: "oracle".into(),
        playbook: vec!["I am afraid I cannot act on that.".into()],
    };
    run(&noop_half).unwrap();

    let result = report(&run_dir).unwrap();
    assert_eq!(result.groups.len(), 1);
    let group = &result.groups[0];
    assert_eq!(group.tasks, 6);
    assert_eq!(group.joint_succ, 0.5, "half oracle, half no-op");
    assert_eq!(group.tool_succ, 0.5);
}

#[test]
fn unreachable_backend_fails_tasks_without_crashing() {
    let tmp = tempfile::tempdir().unwrap();
    let tasks: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixture("tasks/retail_demo_tasks.json")).unwrap(),
    )
    .unwrap();
    let two_tasks = tmp.path().join("two.json");
    std::fs::write(
        &two_tasks,
        serde_json::to_string(&tasks.as_array().unwrap()[0..2].to_vec()).unwrap(),
    )
    .unwrap();
    let mut config = base_config(tmp.path().into(), "downed");
    config.task_files = vec![two_tasks];
    config.backends.agent = BackendProfile::Http(
        serde_json::from_value(serde_json::json!({
            "base_url": "http://127.0.0.1:9/unreachable",
            "model": "downed-model",
            "timeout_s": 1
        }))
        .unwrap(),
    );
    let run_dir = run(&config).unwrap();
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.episodes_total, 2);
    assert_eq!(manifest.episodes_failed, 2, "every episode failed");
    for entry in std::fs::read_dir(run_dir.join("easy")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let log = TrajectoryLog::from_json(&text).unwrap();
        assert_eq!(
            log.halted_reason,
            egoharness_core::dialogue::HaltReason::AgentError
        );
        assert!(!log.error_notes.is_empty());
    }
}

#[test]
fn empty_run_directory_is_empty_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    match report(tmp.path()) {
        Err(ReportError::EmptyDataset) => {}
        other => panic!("expected EmptyDataset, got {other:?}"),
    }
}

#[test]
fn corrupt_logs_are_skipped_and_counted() {
    let tmp = tempfile::tempdir().unwrap();
    let config = base_config(tmp.path().into(), "corrupt");
    let run_dir = run(&config).unwrap();
    std::fs::write(run_dir.join("easy/broken.json"), "{ not json").unwrap();
    let result = report(&run_dir).unwrap();
    assert_eq!(result.corrupt_logs, 1);
    assert_eq!(result.groups[0].tasks, 6);
}

#[test]
fn summary_table_has_mode_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = base_config(tmp.path().into(), "table");
    config.modes = vec![InteractionMode::DynamicEasy, InteractionMode::Static];
    let run_dir = run(&config).unwrap();
    let result = report(&run_dir).unwrap();
    let table = result.summary_table();
    assert!(table.contains("oracle"));
    assert!(table.contains("retail_demo"));
    assert!(table.contains("100.00"));
    // The hard-mode columns exist but hold placeholders for this run.
    assert!(table.contains('-'));
}
