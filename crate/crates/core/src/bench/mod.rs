//! Benchmark orchestration: validation, Gantt export, solver runs, the
//! dynamic batch scenario and ablations.

mod ablation;
mod dynamic;
mod gantt;
mod run;
mod validate;

pub use ablation::{
    evaluate, lookahead_ablation, masking_ablation, reward_shaping_ablation, train_on, AblationError, AblationRow,
    AblationTable, CurveStats, MaskingAblation, RewardShaping,
};
pub use dynamic::{dynamic_scenario, Checkpoint, DynamicReport, SolverSeries};
pub use gantt::{export_gantt, parse_gantt, GanttError, GANTT_HEADER};
pub use run::{config_hash, gap, run, run_all, sha256_hex, RunError, RunOutcome, RunReport, SolverSpec};
pub use validate::{validate, Constraint, Violation};
