//! The file-based experiment pipeline end to end: write a config, run it,
//! inspect the reports, and re-validate the directory, the same path the
//! `ttsa-lab` binary drives.
//!
//! ```bash
//! cargo run --example experiment_files
//! ```

use ttsa_lab::harness::{
    check_report_dir, run_experiment, Application, CheckpointsConfig, ExperimentConfig,
    ProblemConfig, SamplerConfig, ScheduleConfig,
};

fn main() -> ttsa_lab::Result<()> {
    let dir = std::env::temp_dir().join(format!("ttsa-lab-example-{}", std::process::id()));
    let cfg = ExperimentConfig {
        application: Application::Gtd2,
        family: Some(ttsa_lab::apps::ValueFamily::Exp),
        sampler: SamplerConfig::TaskChain,
        sampler_b: None,
        schedule: ScheduleConfig { a: 0.501, b: 0.6 },
        n_steps: 100_000,
        n_trials: 60,
        master_seed: 7,
        checkpoints: CheckpointsConfig::Geometric { per_decade: 5 },
        output_dir: Some(dir.clone()),
        projection_radius: None,
        problem: ProblemConfig::default(),
    };

    // the same structure round-trips through JSON and TOML config files
    println!("config as JSON:\n{}\n", serde_json::to_string_pretty(&cfg)?);

    let out = run_experiment(&cfg)?;
    println!("wrote to {}:", out.dir.display());
    for f in &out.files {
        println!("  {f}");
    }
    if let Some(last) = out.mse.rows.last() {
        println!(
            "\nfinal checkpoint n = {}: rescaled_x = {:.4} (theory trace V_x = {:.4})",
            last.n,
            last.rescaled_x,
            out.mse.theory_trace_v_x.unwrap_or(f64::NAN)
        );
    }
    if let Some(clt) = &out.clt {
        println!("normality check: p = {:.3} on {} trials", clt.ks_p_value[0], clt.n_trials);
    }

    let summary = check_report_dir(&out.dir)?;
    println!(
        "\nre-validation: {} files checked, max mse deviation {:.2e}",
        summary.files_checked.len(),
        summary.max_mse_deviation
    );

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
