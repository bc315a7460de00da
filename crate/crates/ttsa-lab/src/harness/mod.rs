//! Experiment harness: statistics over trial records, normality checks,
//! efficiency-ordering verdicts, and the config-driven runner behind the
//! `ttsa-lab` binary.

mod experiment;
mod ks;
mod report;

pub use experiment::{
    build_experiment, check_report_dir, output_dir, run_experiment, Application, BuiltExperiment,
    CheckSummary, CheckpointsConfig, ExperimentConfig, ExperimentOutputs, ModelReport,
    ProblemConfig, Provenance, SamplerConfig, ScheduleConfig,
};
pub use ks::{ks_p_value, ks_statistic, normal_cdf};
pub use report::{
    clt_check, mse_curve, ordering_report, CltReport, CovMethod, Histogram, MseReport, MseRow,
    OrderingOptions, OrderingReport, SamplerCovReport,
};
