//! Classification metrics, repeated hold-out evaluation, and pairwise
//! rank tests of predicted scores grouped by clinical phase.

mod classify;
mod eval;
mod mww;
mod phase;

pub use classify::{auroc, bonferroni, class_imbalance, f1, midranks};
pub use eval::{
    evaluate_once, fit_predict, mean_sd, repeated_eval, EvalConfig, EvalReport, FitConfig,
    RepeatScore, OUTCOME_LAYER_INDEX,
};
pub use mww::{mann_whitney_u, mww_exact_p, mww_normal_p, MwwResult, EXACT_MAX_POOLED};
pub use phase::{
    join_phases, phase_analysis, write_phase_tsv, PhaseAnalysis, PhaseComparison, MIN_GROUP_SIZE,
};
