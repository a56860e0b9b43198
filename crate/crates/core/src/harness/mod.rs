//! Ensemble runs, parameter scans, persisted statistics tables and the
//! acceptance verifier.

mod config;
mod ensemble;
mod experiments;
mod seeding;
mod stats;
mod table;
mod verify;

pub use config::RunConfig;
pub use ensemble::{
    run_ensemble, write_run_record, EnsembleSpec, Sampler, Statistic, WeightPolicy,
};
pub use experiments::{
    experiment_degree_law, experiment_dust_scan, experiment_joint, DustScanSpec, JointExperiment,
};
pub use seeding::{derive_substream, fmix64, Purpose};
pub use stats::{kolmogorov_sf, ks_two_sample, mean_se, relative_sd, KsResult};
pub use table::{write_atomic, Cell, Column, ColumnKind, StatTable};
pub use verify::{
    run_criterion, verify, CriterionResult, VerifyLevel, VerifyOptions, VerifyReport, CRITERIA,
    REPORT_SCHEMA, VERIFY_SEED,
};
