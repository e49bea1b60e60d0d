//! Deterministic evaluation environment for interactive tool-using agents.
//!
//! The crate is organized around the lifecycle of one evaluation episode:
//!
//! - [`scenario`] loads and hashes the mutable world state (catalog plus
//!   per-user carts/orders/lists/menus).
//! - [`tools`] registers scenario toolsets and executes read/write/calculation
//!   tool calls against that state.
//! - [`agent`] connects the agent under test over a generic chat backend and
//!   provides scripted agents for deterministic runs.
//! - [`user`] implements the Actor/Evaluator/Summarizer simulated user with
//!   its three interaction modes.
//! - [`dialogue`] runs one episode: alternates user and agent turns, executes
//!   tool batches, enforces budgets, and records the trajectory.
//! - [`metrics`] scores trajectories with process-based and result-based
//!   validation and classifies failures with the cascading error taxonomy.

pub mod agent;
pub mod dialogue;
pub mod metrics;
pub mod scenario;
pub mod task;
pub mod tools;
pub mod user;

pub use scenario::{ScenarioDatabase, ScenarioError, StateDigest};

pub use tools::{ToolCall, ToolRegistry, ToolResult};
