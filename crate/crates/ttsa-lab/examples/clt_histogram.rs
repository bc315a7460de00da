//! Normality of the standardized slow iterates: run many trials, rescale the
//! final errors by the square root of the step size, and compare the
//! empirical distribution against the theoretical Gaussian through a
//! Kolmogorov-Smirnov test and a terminal histogram.
//!
//! ```bash
//! cargo run --release --example clt_histogram
//! ```

use std::sync::Arc;

use nalgebra::DVector;
use ttsa_lab::apps::{gtd_drift, gtd_theory, FiveStateTask, GtdAlgorithm, ValueFamily};
use ttsa_lab::chains::SamplerSpec;
use ttsa_lab::harness::clt_check;
use ttsa_lab::ttsa::{run_trials, RunSpec, StepSchedule};

fn main() -> ttsa_lab::Result<()> {
    let schedule = StepSchedule::new(0.501, 0.6)?;
    let task = Arc::new(FiveStateTask::new(ValueFamily::Exp));
    let theory = gtd_theory(&task, &schedule, GtdAlgorithm::Gtd2)?;
    let drift = gtd_drift(&task, GtdAlgorithm::Gtd2);
    let sampler = SamplerSpec::Chain {
        chain: Arc::new(task.aug.chain.clone()),
    };

    let n_steps = 2_000_000;
    let n_trials = 200;
    println!("running {n_trials} GTD2 trials to n = {n_steps}...");
    let run = RunSpec {
        drift: &drift,
        sampler: &sampler,
        schedule,
        x0: DVector::zeros(1),
        y0: DVector::zeros(1),
        start_state: None,
        n_steps,
        checkpoints: vec![n_steps],
        projection_radius: None,
    };
    let records = run_trials(&run, 3141, n_trials)?;

    let v_x = nalgebra::DMatrix::from_element(1, 1, theory.v_x);
    let report = clt_check(&records, &DVector::zeros(1), &schedule, &v_x)?;
    println!(
        "KS against N(0, {:.4}): D = {:.4}, p = {:.4} -> {}",
        theory.v_x,
        report.ks_statistic[0],
        report.ks_p_value[0],
        if report.passes { "consistent with the CLT" } else { "rejected" }
    );
    println!(
        "empirical variance of the standardized samples: {:.4}",
        report.empirical_cov[0][0]
    );

    let hist = &report.histograms[0];
    let max = *hist.counts.iter().max().unwrap() as f64;
    println!("\nhistogram of beta_n^(-1/2) x_n over [{:.2}, {:.2}]:", hist.lo, hist.hi);
    for (b, &c) in hist.counts.iter().enumerate() {
        let lo = hist.lo + (hist.hi - hist.lo) * b as f64 / hist.counts.len() as f64;
        let bar = "#".repeat(((c as f64 / max) * 50.0).round() as usize);
        println!("{lo:>6.2} | {bar} {c}");
    }
    Ok(())
}
