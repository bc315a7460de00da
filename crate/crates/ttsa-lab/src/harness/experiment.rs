//! Config-driven experiment runner: builds a drift + sampler instance from a
//! JSON or TOML file, runs the trials, and writes machine-readable reports
//! (trajectories, MSE curves, normality check, asymptotic model, ordering
//! verdict, provenance) into an output directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::report::{
    clt_check, matrix_rows, mse_curve, ordering_report, CltReport, MseReport, OrderingOptions,
    OrderingReport,
};
use crate::apps::{
    custom_linear_drift, gtd_drift, gtd_theory, load_libsvm, minimax_datagen,
    momentum_equilibrium, momentum_sgd_drift, sgda_drift, sgda_equilibrium, FiveStateTask,
    GtdAlgorithm, LogisticProblem, ValueFamily,
};
use crate::asymptotics::{
    cov_blocks_closed, jacobian_blocks, AsymptoticModel, JacobianBlocks, McOptions,
};
use crate::chains::{chain_of_sampler, load_edge_list, Graph, SamplerSpec};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::ttsa::{geometric_checkpoints, run_trials, DriftPair, RunSpec, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Application {
    MomentumSgd,
    Sgda,
    Gtd2,
    Tdc,
    CustomLinear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerConfig {
    /// Uniform independent draws over the data indices.
    Iid,
    /// One fixed random permutation cycled forever.
    SingleShuffle,
    /// A fresh permutation every pass.
    RandomShuffle,
    /// Simple random walk on the problem graph.
    Srw,
    /// Non-backtracking random walk on the problem graph.
    Nbrw,
    /// The application's own transition chain (GTD tasks).
    TaskChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CheckpointsConfig {
    Geometric { per_decade: usize },
    Explicit { values: Vec<u64> },
}

impl Default for CheckpointsConfig {
    fn default() -> Self {
        CheckpointsConfig::Geometric { per_decade: 20 }
    }
}

/// Per-application problem knobs; all optional with desk-scale defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub libsvm: Option<PathBuf>,
    #[serde(default)]
    pub edge_list: Option<PathBuf>,
    #[serde(default)]
    pub extra_edges: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub application: Application,
    #[serde(default)]
    pub family: Option<ValueFamily>,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub sampler_b: Option<SamplerConfig>,
    pub schedule: ScheduleConfig,
    pub n_steps: u64,
    pub n_trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub checkpoints: CheckpointsConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub projection_radius: Option<f64>,
    #[serde(default)]
    pub problem: ProblemConfig,
}

impl ExperimentConfig {
    /// Read a config from a `.json` or `.toml` file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let cfg: ExperimentConfig = match ext {
            "json" => serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?,
            "toml" => toml::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unsupported config extension {other:?} (use .json or .toml)"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        StepSchedule::new(self.schedule.a, self.schedule.b)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if self.n_trials < 1 {
            return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidConfig("n_steps must be >= 1".into()));
        }
        let is_gtd = matches!(self.application, Application::Gtd2 | Application::Tdc);
        if is_gtd && self.sampler != SamplerConfig::TaskChain {
            return Err(Error::InvalidConfig(
                "gtd applications are driven by their own transition chain; use sampler kind \"task-chain\"".into(),
            ));
        }
        if !is_gtd && self.sampler == SamplerConfig::TaskChain {
            return Err(Error::InvalidConfig(
                "sampler kind \"task-chain\" only applies to gtd2/tdc".into(),
            ));
        }
        if is_gtd && self.sampler_b.is_some() {
            return Err(Error::InvalidConfig(
                "ordering comparisons do not apply to the gtd task chain".into(),
            ));
        }
        if self.family.is_some() && !is_gtd {
            return Err(Error::InvalidConfig(
                "family only applies to gtd2/tdc".into(),
            ));
        }
        Ok(())
    }

    pub fn step_schedule(&self) -> StepSchedule {
        StepSchedule::new(self.schedule.a, self.schedule.b).expect("validated")
    }

    pub fn checkpoint_grid(&self) -> Vec<u64> {
        match &self.checkpoints {
            CheckpointsConfig::Geometric { per_decade } => {
                geometric_checkpoints(self.n_steps, *per_decade)
            }
            CheckpointsConfig::Explicit { values } => {
                let mut v: Vec<u64> = values.iter().copied().filter(|&c| c <= self.n_steps).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// A fully built experiment: drift, samplers, equilibrium, and whatever
/// closed-form theory the sampler admits.
pub struct BuiltExperiment {
    pub drift: DriftPair,
    pub sampler: SamplerSpec,
    pub sampler_b: Option<SamplerSpec>,
    pub x_star: DVector<f64>,
    pub y_star: DVector<f64>,
    pub blocks: JacobianBlocks,
    pub theory: Option<AsymptoticModel>,
    pub theory_note: Option<String>,
}

fn sampler_from_config(
    kind: &SamplerConfig,
    n_data: usize,
    graph: Option<&Arc<Graph>>,
) -> Result<SamplerSpec> {
    Ok(match kind {
        SamplerConfig::Iid => SamplerSpec::iid_uniform(n_data),
        SamplerConfig::SingleShuffle => SamplerSpec::SingleShuffle { n: n_data },
        SamplerConfig::RandomShuffle => SamplerSpec::RandomShuffle { n: n_data },
        SamplerConfig::Srw => SamplerSpec::Srw {
            graph: graph
                .ok_or_else(|| Error::InvalidConfig("walk sampler needs a graph".into()))?
                .clone(),
        },
        SamplerConfig::Nbrw => SamplerSpec::Nbrw {
            graph: graph
                .ok_or_else(|| Error::InvalidConfig("walk sampler needs a graph".into()))?
                .clone(),
        },
        SamplerConfig::TaskChain => {
            return Err(Error::InvalidConfig(
                "task-chain is resolved by the gtd builder".into(),
            ))
        }
    })
}

fn needs_graph(cfg: &ExperimentConfig) -> bool {
    let walk = |s: &SamplerConfig| matches!(s, SamplerConfig::Srw | SamplerConfig::Nbrw);
    walk(&cfg.sampler) || cfg.sampler_b.as_ref().map(walk).unwrap_or(false)
}

fn problem_graph(cfg: &ExperimentConfig, n_data: usize, seed: u64) -> Result<Option<Arc<Graph>>> {
    if !needs_graph(cfg) {
        return Ok(None);
    }
    let graph = match &cfg.problem.edge_list {
        Some(path) => {
            let (g, _report) = load_edge_list(path)?;
            if g.n_nodes() != n_data {
                return Err(Error::InvalidConfig(format!(
                    "edge list has {} nodes but the problem has {} data points",
                    g.n_nodes(),
                    n_data
                )));
            }
            g
        }
        None => Graph::random_connected(
            n_data,
            cfg.problem.extra_edges.unwrap_or(n_data / 4),
            derive_seed(seed, 0x6772_6170),
        ),
    };
    Ok(Some(Arc::new(graph)))
}

/// Degree reweighting for walk samplers, nothing otherwise.
fn walk_reweight(kind: &SamplerConfig, graph: Option<&Arc<Graph>>) -> Option<Vec<f64>> {
    match kind {
        SamplerConfig::Srw | SamplerConfig::Nbrw => graph.map(|g| {
            (0..g.n_nodes()).map(|i| 1.0 / g.degree(i) as f64).collect()
        }),
        _ => None,
    }
}

/// Build the drift, samplers, equilibrium, and closed-form theory for a
/// validated config.
pub fn build_experiment(cfg: &ExperimentConfig) -> Result<BuiltExperiment> {
    cfg.validate()?;
    let schedule = cfg.step_schedule();
    let seed = cfg.problem.seed.unwrap_or(cfg.master_seed);

    match cfg.application {
        Application::Gtd2 | Application::Tdc => {
            let family = cfg.family.unwrap_or(ValueFamily::Exp);
            let algo = if cfg.application == Application::Gtd2 {
                GtdAlgorithm::Gtd2
            } else {
                GtdAlgorithm::Tdc
            };
            let task = Arc::new(FiveStateTask::new(family));
            let drift = gtd_drift(&task, algo);
            let theory = gtd_theory(&task, &schedule, algo)?;
            let sampler = SamplerSpec::Chain {
                chain: Arc::new(task.aug.chain.clone()),
            };
            Ok(BuiltExperiment {
                drift,
                sampler,
                sampler_b: None,
                x_star: DVector::zeros(1),
                y_star: DVector::zeros(1),
                blocks: theory.model.blocks.clone(),
                theory: Some(theory.model),
                theory_note: None,
            })
        }
        Application::MomentumSgd => {
            let kappa = cfg.problem.kappa.unwrap_or(1.0);
            let problem = Arc::new(match &cfg.problem.libsvm {
                Some(path) => load_libsvm(path, cfg.problem.d, kappa)?,
                None => LogisticProblem::synthetic(
                    seed,
                    cfg.problem.n.unwrap_or(200),
                    cfg.problem.d.unwrap_or(20),
                    kappa,
                ),
            });
            let n_data = problem.n_samples();
            let graph = problem_graph(cfg, n_data, seed)?;
            let sampler = sampler_from_config(&cfg.sampler, n_data, graph.as_ref())?;
            let sampler_b = cfg
                .sampler_b
                .as_ref()
                .map(|s| sampler_from_config(s, n_data, graph.as_ref()))
                .transpose()?;
            let target = sampler
                .target_distribution()
                .expect("data samplers have targets");
            let reweight = walk_reweight(&cfg.sampler, graph.as_ref());
            let drift = momentum_sgd_drift(&problem, reweight.clone(), &target)?;
            let (x_star, y_star) =
                momentum_equilibrium(&problem, &target, reweight.as_deref())?;
            let blocks = jacobian_blocks(&drift, &target, &x_star, &y_star, None)?;
            let (theory, theory_note) =
                closed_form_theory(&drift, &blocks, &sampler, &x_star, &y_star, &schedule);
            Ok(BuiltExperiment {
                drift,
                sampler,
                sampler_b,
                x_star,
                y_star,
                blocks,
                theory,
                theory_note,
            })
        }
        Application::Sgda => {
            let problem = Arc::new(minimax_datagen(
                seed,
                cfg.problem.n.unwrap_or(100),
                cfg.problem.d.unwrap_or(10),
                cfg.problem.kappa.unwrap_or(10.0),
            ));
            let n_data = problem.n_samples();
            let graph = problem_graph(cfg, n_data, seed)?;
            let sampler = sampler_from_config(&cfg.sampler, n_data, graph.as_ref())?;
            let sampler_b = cfg
                .sampler_b
                .as_ref()
                .map(|s| sampler_from_config(s, n_data, graph.as_ref()))
                .transpose()?;
            let target = sampler
                .target_distribution()
                .expect("data samplers have targets");
            let reweight = walk_reweight(&cfg.sampler, graph.as_ref());
            let drift = sgda_drift(&problem, reweight)?;
            let (x_star, y_star) = sgda_equilibrium(&problem);
            let blocks = jacobian_blocks(&drift, &target, &x_star, &y_star, None)?;
            let (theory, theory_note) =
                closed_form_theory(&drift, &blocks, &sampler, &x_star, &y_star, &schedule);
            Ok(BuiltExperiment {
                drift,
                sampler,
                sampler_b,
                x_star,
                y_star,
                blocks,
                theory,
                theory_note,
            })
        }
        Application::CustomLinear => {
            let n_data = cfg.problem.n.unwrap_or(10);
            let d = cfg.problem.d.unwrap_or(2);
            let sampler = sampler_from_config(&cfg.sampler, n_data, None)?;
            let sampler_b = cfg
                .sampler_b
                .as_ref()
                .map(|s| sampler_from_config(s, n_data, None))
                .transpose()?;
            let target = sampler
                .target_distribution()
                .expect("data samplers have targets");
            let drift = custom_linear_drift(d, d, &target, seed)?;
            let x_star = DVector::zeros(d);
            let y_star = DVector::zeros(d);
            let blocks = jacobian_blocks(&drift, &target, &x_star, &y_star, None)?;
            let (theory, theory_note) =
                closed_form_theory(&drift, &blocks, &sampler, &x_star, &y_star, &schedule);
            Ok(BuiltExperiment {
                drift,
                sampler,
                sampler_b,
                x_star,
                y_star,
                blocks,
                theory,
                theory_note,
            })
        }
    }
}

fn closed_form_theory(
    drift: &DriftPair,
    blocks: &JacobianBlocks,
    sampler: &SamplerSpec,
    x_star: &DVector<f64>,
    y_star: &DVector<f64>,
    schedule: &StepSchedule,
) -> (Option<AsymptoticModel>, Option<String>) {
    let sc = match chain_of_sampler(sampler) {
        Ok(sc) => sc,
        Err(e) => return (None, Some(e.to_string())),
    };
    let covs = match cov_blocks_closed(&sc.chain, &sc.observe, drift, x_star, y_star) {
        Ok(c) => c,
        Err(e) => return (None, Some(e.to_string())),
    };
    match AsymptoticModel::assemble(blocks.clone(), covs, schedule) {
        Ok(model) => (Some(model), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// JSON view of an asymptotic model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelReport {
    pub q11: Vec<Vec<f64>>,
    pub q12: Vec<Vec<f64>>,
    pub q21: Vec<Vec<f64>>,
    pub q22: Vec<Vec<f64>>,
    pub u11: Vec<Vec<f64>>,
    pub u12: Vec<Vec<f64>>,
    pub u21: Vec<Vec<f64>>,
    pub u22: Vec<Vec<f64>>,
    pub k_x: Vec<Vec<f64>>,
    pub u_x: Vec<Vec<f64>>,
    pub v_x: Vec<Vec<f64>>,
    pub v_y: Vec<Vec<f64>>,
    pub trace_v_x: f64,
    pub trace_v_y: f64,
    pub b: f64,
}

impl ModelReport {
    pub fn from_model(m: &AsymptoticModel) -> Self {
        ModelReport {
            q11: matrix_rows(&m.blocks.q11),
            q12: matrix_rows(&m.blocks.q12),
            q21: matrix_rows(&m.blocks.q21),
            q22: matrix_rows(&m.blocks.q22),
            u11: matrix_rows(&m.covs.u11),
            u12: matrix_rows(&m.covs.u12),
            u21: matrix_rows(&m.covs.u21),
            u22: matrix_rows(&m.covs.u22),
            k_x: matrix_rows(&m.k_x),
            u_x: matrix_rows(&m.u_x),
            v_x: matrix_rows(&m.v_x),
            v_y: matrix_rows(&m.v_y),
            trace_v_x: m.trace_v_x(),
            trace_v_y: m.trace_v_y(),
            b: m.b,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub trial_seeds: Vec<u64>,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutputs {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub mse: MseReport,
    pub clt: Option<CltReport>,
    pub ordering: Option<OrderingReport>,
}

/// Resolve the output directory: explicit config, then `TTSA_LAB_OUTPUT`,
/// then `./ttsa-lab-out`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(d) = &cfg.output_dir {
        return d.clone();
    }
    if let Ok(root) = std::env::var("TTSA_LAB_OUTPUT") {
        if !root.is_empty() {
            return PathBuf::from(root);
        }
    }
    PathBuf::from("ttsa-lab-out")
}

/// Run the full experiment and write the report files. On any failure the
/// files written so far are removed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutputs> {
    let dir = output_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    match run_experiment_inner(cfg, &dir, &mut written) {
        Ok(out) => Ok(out),
        Err(e) => {
            for f in written {
                let _ = std::fs::remove_file(f);
            }
            Err(e)
        }
    }
}

fn write_file(
    dir: &Path,
    written: &mut Vec<PathBuf>,
    name: &str,
    content: &str,
) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    written.push(path);
    Ok(())
}

fn run_experiment_inner(
    cfg: &ExperimentConfig,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<ExperimentOutputs> {
    if cfg.n_trials < 2 {
        return Err(Error::InvalidConfig(
            "n_trials must be >= 2 to produce reports".into(),
        ));
    }
    let built = build_experiment(cfg)?;
    let schedule = cfg.step_schedule();
    let run_spec = RunSpec {
        drift: &built.drift,
        sampler: &built.sampler,
        schedule,
        x0: DVector::zeros(built.drift.d1),
        y0: DVector::zeros(built.drift.d2),
        start_state: None,
        n_steps: cfg.n_steps,
        checkpoints: cfg.checkpoint_grid(),
        projection_radius: cfg.projection_radius,
    };
    let records = run_trials(&run_spec, cfg.master_seed, cfg.n_trials)?;

    let mut files = Vec::new();

    // trajectories.csv
    {
        let d1 = built.drift.d1;
        let d2 = built.drift.d2;
        let mut csv = String::from("trial,n");
        for k in 0..d1 {
            csv.push_str(&format!(",x_{k}"));
        }
        for k in 0..d2 {
            csv.push_str(&format!(",y_{k}"));
        }
        csv.push('\n');
        for (t, rec) in records.iter().enumerate() {
            for (c, &n) in rec.checkpoints.iter().enumerate() {
                csv.push_str(&format!("{t},{n}"));
                for v in &rec.x_snapshots[c] {
                    csv.push_str(&format!(",{v:.16e}"));
                }
                for v in &rec.y_snapshots[c] {
                    csv.push_str(&format!(",{v:.16e}"));
                }
                csv.push('\n');
            }
        }
        write_file(dir, written, "trajectories.csv", &csv)?;
        files.push("trajectories.csv".to_string());
    }

    // mse.csv
    let theory_traces = built.theory.as_ref().map(|m| (m.trace_v_x(), m.trace_v_y()));
    let mse = mse_curve(&records, &built.x_star, &built.y_star, &schedule, theory_traces)?;
    write_file(dir, written, "mse.csv", &mse.to_csv())?;
    files.push("mse.csv".to_string());

    // clt.json
    let clt = match &built.theory {
        Some(model) if model.v_x.diagonal().iter().all(|&v| v > 0.0) => {
            let report = clt_check(&records, &built.x_star, &schedule, &model.v_x)?;
            write_file(
                dir,
                written,
                "clt.json",
                &serde_json::to_string_pretty(&report)?,
            )?;
            files.push("clt.json".to_string());
            Some(report)
        }
        _ => {
            let reason = built
                .theory_note
                .clone()
                .unwrap_or_else(|| "theoretical V_x degenerate or unavailable".into());
            let stub = serde_json::json!({ "status": "unavailable", "reason": reason });
            write_file(dir, written, "clt.json", &serde_json::to_string_pretty(&stub)?)?;
            files.push("clt.json".to_string());
            None
        }
    };

    // model.json
    {
        let content = match &built.theory {
            Some(model) => serde_json::to_string_pretty(&ModelReport::from_model(model))?,
            None => serde_json::to_string_pretty(&serde_json::json!({
                "status": "unavailable",
                "reason": built.theory_note.clone().unwrap_or_default(),
            }))?,
        };
        write_file(dir, written, "model.json", &content)?;
        files.push("model.json".to_string());
    }

    // ordering.json
    let ordering = if let Some(spec_b) = &built.sampler_b {
        let report = ordering_report(
            &built.drift,
            &built.x_star,
            &built.y_star,
            &built.blocks,
            &schedule,
            (sampler_label(&cfg.sampler), &built.sampler),
            (sampler_label(cfg.sampler_b.as_ref().unwrap()), spec_b),
            &OrderingOptions {
                mc: McOptions {
                    horizon: 100_000,
                    trials: 64,
                    burn_in: 1000,
                    seed: derive_seed(cfg.master_seed, 0x6f72_6465),
                },
                force_mc: false,
                tol: 1e-9,
            },
        )?;
        write_file(
            dir,
            written,
            "ordering.json",
            &serde_json::to_string_pretty(&report)?,
        )?;
        files.push("ordering.json".to_string());
        Some(report)
    } else {
        None
    };

    // provenance.json
    {
        let prov = Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            master_seed: cfg.master_seed,
            trial_seeds: (0..cfg.n_trials)
                .map(|k| derive_seed(cfg.master_seed, k as u64))
                .collect(),
            x_star: built.x_star.as_slice().to_vec(),
            y_star: built.y_star.as_slice().to_vec(),
            outputs: {
                let mut o = files.clone();
                o.push("provenance.json".to_string());
                o
            },
        };
        write_file(
            dir,
            written,
            "provenance.json",
            &serde_json::to_string_pretty(&prov)?,
        )?;
        files.push("provenance.json".to_string());
    }

    Ok(ExperimentOutputs {
        dir: dir.to_path_buf(),
        files,
        mse,
        clt,
        ordering,
    })
}

fn sampler_label(s: &SamplerConfig) -> &'static str {
    match s {
        SamplerConfig::Iid => "iid",
        SamplerConfig::SingleShuffle => "single-shuffle",
        SamplerConfig::RandomShuffle => "random-shuffle",
        SamplerConfig::Srw => "srw",
        SamplerConfig::Nbrw => "nbrw",
        SamplerConfig::TaskChain => "task-chain",
    }
}

/// Re-validate a report directory: provenance parses, the trajectory file is
/// consistent with it, and the MSE rows reproduce from the trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub dir: PathBuf,
    pub files_checked: Vec<String>,
    pub n_trials: usize,
    pub max_mse_deviation: f64,
}

pub fn check_report_dir(dir: &Path) -> Result<CheckSummary> {
    let mut checked = Vec::new();
    let prov_path = dir.join("provenance.json");
    let prov: Provenance = serde_json::from_str(&std::fs::read_to_string(&prov_path)?)?;
    prov.config.validate()?;
    if prov.trial_seeds.len() != prov.config.n_trials {
        return Err(Error::InvalidConfig(format!(
            "provenance lists {} trial seeds for {} trials",
            prov.trial_seeds.len(),
            prov.config.n_trials
        )));
    }
    checked.push("provenance.json".to_string());

    // trajectories
    let traj_path = dir.join("trajectories.csv");
    let text = std::fs::read_to_string(&traj_path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        path: traj_path.display().to_string(),
        line: 0,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    let d1 = cols.iter().filter(|c| c.starts_with("x_")).count();
    let d2 = cols.iter().filter(|c| c.starts_with("y_")).count();
    if d1 != prov.x_star.len() || d2 != prov.y_star.len() {
        return Err(Error::InvalidConfig(
            "trajectory dimensions disagree with provenance".into(),
        ));
    }
    // per-(trial, n): squared errors
    let mut per_checkpoint: std::collections::BTreeMap<u64, Vec<(f64, f64)>> =
        std::collections::BTreeMap::new();
    let mut trials_seen = std::collections::BTreeSet::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 + d1 + d2 {
            return Err(Error::Parse {
                path: traj_path.display().to_string(),
                line: lineno + 2,
                msg: "wrong column count".into(),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Parse {
                path: traj_path.display().to_string(),
                line: lineno + 2,
                msg: e.to_string(),
            })
        };
        let trial: usize = parts[0].parse().map_err(|_| Error::Parse {
            path: traj_path.display().to_string(),
            line: lineno + 2,
            msg: "bad trial index".into(),
        })?;
        trials_seen.insert(trial);
        let n: u64 = parts[1].parse().map_err(|_| Error::Parse {
            path: traj_path.display().to_string(),
            line: lineno + 2,
            msg: "bad iteration index".into(),
        })?;
        let mut sq_x = 0.0;
        for k in 0..d1 {
            let v = parse_f(parts[2 + k])?;
            sq_x += (v - prov.x_star[k]) * (v - prov.x_star[k]);
        }
        let mut sq_y = 0.0;
        for k in 0..d2 {
            let v = parse_f(parts[2 + d1 + k])?;
            sq_y += (v - prov.y_star[k]) * (v - prov.y_star[k]);
        }
        per_checkpoint.entry(n).or_default().push((sq_x, sq_y));
    }
    if trials_seen.len() != prov.config.n_trials {
        return Err(Error::InvalidConfig(format!(
            "trajectories cover {} trials, expected {}",
            trials_seen.len(),
            prov.config.n_trials
        )));
    }
    checked.push("trajectories.csv".to_string());

    // mse.csv reproduces from trajectories
    let mse_path = dir.join("mse.csv");
    let mse_text = std::fs::read_to_string(&mse_path)?;
    let mut max_dev: f64 = 0.0;
    for (lineno, line) in mse_text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let n: u64 = parts[0].parse().map_err(|_| Error::Parse {
            path: mse_path.display().to_string(),
            line: lineno + 1,
            msg: "bad n".into(),
        })?;
        let mse_x: f64 = parts[3].parse().unwrap_or(f64::NAN);
        let mse_y: f64 = parts[5].parse().unwrap_or(f64::NAN);
        let samples = per_checkpoint.get(&n).ok_or_else(|| Error::Parse {
            path: mse_path.display().to_string(),
            line: lineno + 1,
            msg: format!("checkpoint {n} missing from trajectories"),
        })?;
        let t = samples.len() as f64;
        let rx = samples.iter().map(|s| s.0).sum::<f64>() / t;
        let ry = samples.iter().map(|s| s.1).sum::<f64>() / t;
        max_dev = max_dev
            .max((rx - mse_x).abs() / (1.0 + mse_x.abs()))
            .max((ry - mse_y).abs() / (1.0 + mse_y.abs()));
    }
    if max_dev > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "mse.csv deviates from trajectories by {max_dev:.3e}"
        )));
    }
    checked.push("mse.csv".to_string());

    // schema checks on the JSON reports
    for name in ["clt.json", "model.json", "ordering.json"] {
        let path = dir.join(name);
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let unavailable = value.get("status").map(|s| s == "unavailable").unwrap_or(false);
        if !unavailable {
            match name {
                "clt.json" => {
                    let _: CltReport = serde_json::from_value(value)?;
                }
                "model.json" => {
                    let _: ModelReport = serde_json::from_value(value)?;
                }
                "ordering.json" => {
                    let _: OrderingReport = serde_json::from_value(value)?;
                }
                _ => unreachable!(),
            }
        }
        checked.push(name.to_string());
    }

    Ok(CheckSummary {
        dir: dir.to_path_buf(),
        files_checked: checked,
        n_trials: prov.config.n_trials,
        max_mse_deviation: max_dev,
    })
}
