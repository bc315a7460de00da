//! Command-line front end: run experiments from config files, print the
//! closed-form asymptotic model of an application, compare two samplers, or
//! re-validate a report directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ttsa_lab::harness::{
    build_experiment, check_report_dir, run_experiment, Application, CheckpointsConfig,
    ExperimentConfig, ModelReport, ProblemConfig, SamplerConfig, ScheduleConfig,
};

#[derive(Parser)]
#[command(name = "ttsa-lab", version, about = "Two-timescale stochastic approximation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON or TOML config file.
    Run {
        /// Path to the config file (.json or .toml).
        config: PathBuf,
    },
    /// Print the closed-form asymptotic model for a named application.
    Theory {
        /// One of: momentum-sgd, sgda, gtd2, tdc, custom-linear.
        application: String,
        /// Value family for gtd2/tdc: exp or sin.
        #[arg(long, default_value = "exp")]
        family: String,
        /// Fast step-size exponent.
        #[arg(long, default_value_t = 0.501)]
        a: f64,
        /// Slow step-size exponent.
        #[arg(long, default_value_t = 0.6)]
        b: f64,
        /// Problem seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compare two samplers on the same drift (config must set sampler_b).
    Order {
        /// Path to the config file (.json or .toml).
        config: PathBuf,
    },
    /// Re-validate a previously written report directory.
    Check {
        /// Directory containing provenance.json and the report files.
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> ttsa_lab::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let out = run_experiment(&cfg)?;
            println!("wrote {} files to {}", out.files.len(), out.dir.display());
            for f in &out.files {
                println!("  {f}");
            }
            if let Some(last) = out.mse.rows.last() {
                println!(
                    "final checkpoint n = {}: mse_x = {:.6e}, rescaled_x = {:.6e}",
                    last.n, last.mse_x, last.rescaled_x
                );
            }
            if let Some(trace) = out.mse.theory_trace_v_x {
                println!("theory trace V_x = {trace:.6e}");
            }
            Ok(())
        }
        Command::Theory {
            application,
            family,
            a,
            b,
            seed,
        } => {
            let cfg = theory_config(&application, &family, a, b, seed)?;
            let built = build_experiment(&cfg)?;
            match built.theory {
                Some(model) => {
                    let report = ModelReport::from_model(&model);
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    Ok(())
                }
                None => Err(ttsa_lab::Error::InvalidConfig(format!(
                    "no closed-form model: {}",
                    built.theory_note.unwrap_or_default()
                ))),
            }
        }
        Command::Order { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            if cfg.sampler_b.is_none() {
                return Err(ttsa_lab::Error::InvalidConfig(
                    "order needs sampler_b in the config".into(),
                ));
            }
            let out = run_experiment(&cfg)?;
            let ordering = out.ordering.expect("sampler_b was configured");
            println!("{}", serde_json::to_string_pretty(&ordering)?);
            Ok(())
        }
        Command::Check { dir } => {
            let summary = check_report_dir(&dir)?;
            println!(
                "ok: {} files validated in {} ({} trials, max mse deviation {:.3e})",
                summary.files_checked.len(),
                summary.dir.display(),
                summary.n_trials,
                summary.max_mse_deviation
            );
            Ok(())
        }
    }
}

fn theory_config(
    application: &str,
    family: &str,
    a: f64,
    b: f64,
    seed: u64,
) -> ttsa_lab::Result<ExperimentConfig> {
    let bad_app = || {
        ttsa_lab::Error::InvalidConfig(format!(
            "unknown application {application:?}; expected momentum-sgd, sgda, gtd2, tdc, or custom-linear"
        ))
    };
    let app = match application {
        "momentum-sgd" => Application::MomentumSgd,
        "sgda" => Application::Sgda,
        "gtd2" => Application::Gtd2,
        "tdc" => Application::Tdc,
        "custom-linear" => Application::CustomLinear,
        _ => return Err(bad_app()),
    };
    let is_gtd = matches!(app, Application::Gtd2 | Application::Tdc);
    let fam = match family {
        "exp" => ttsa_lab::apps::ValueFamily::Exp,
        "sin" => ttsa_lab::apps::ValueFamily::Sin,
        _ => {
            return Err(ttsa_lab::Error::InvalidConfig(
                "family must be exp or sin".into(),
            ))
        }
    };
    Ok(ExperimentConfig {
        application: app,
        family: if is_gtd { Some(fam) } else { None },
        sampler: if is_gtd {
            SamplerConfig::TaskChain
        } else {
            SamplerConfig::Iid
        },
        sampler_b: None,
        schedule: ScheduleConfig { a, b },
        n_steps: 1,
        n_trials: 1,
        master_seed: seed,
        checkpoints: CheckpointsConfig::default(),
        output_dir: None,
        projection_radius: None,
        problem: ProblemConfig::default(),
    })
}
