//! Deterministic discrete-event core and Monte-Carlo orchestration.

pub mod event;
pub mod results;
pub mod rng;
pub mod run;
pub mod scenario;

pub use run::{run_batch, run_single, EngineError, MeasurementNote, RunResult, SeedRow};
pub use scenario::{build_deployment, CaseId, Deployment, ScenarioKind};
