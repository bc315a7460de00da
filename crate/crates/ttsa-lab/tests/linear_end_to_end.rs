//! End-to-end agreement between simulation and closed form on a linear
//! instance: the empirical rescaled MSE of the runner must land on the
//! trace of the Lyapunov-solved limiting covariance, both for independent
//! draws and for a strongly autocorrelated chain where the long-run
//! covariance is far from the marginal one.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ttsa_lab::apps::custom_linear_drift;
use ttsa_lab::asymptotics::{
    cov_blocks_closed, jacobian_blocks, sampling_cov_closed, AsymptoticModel,
};
use ttsa_lab::chains::{chain_of_sampler, FiniteChain, SamplerSpec};
use ttsa_lab::harness::mse_curve;
use ttsa_lab::ttsa::{run_trials, RunSpec, StepSchedule};

fn sticky_chain(m: usize, stay: f64) -> FiniteChain {
    let off = (1.0 - stay) / (m - 1) as f64;
    let p = DMatrix::from_fn(m, m, |i, j| if i == j { stay } else { off });
    FiniteChain::new(p).unwrap()
}

fn empirical_vs_theory(spec: &SamplerSpec, seed: u64) -> (f64, f64, f64, f64) {
    let target = spec.target_distribution().unwrap();
    let d = 2;
    let drift = custom_linear_drift(d, d, &target, 31).unwrap();
    let schedule = StepSchedule::new(0.6, 0.9).unwrap();
    let x_star = DVector::zeros(d);
    let y_star = DVector::zeros(d);
    let blocks = jacobian_blocks(&drift, &target, &x_star, &y_star, None).unwrap();
    let sc = chain_of_sampler(spec).unwrap();
    let covs = cov_blocks_closed(&sc.chain, &sc.observe, &drift, &x_star, &y_star).unwrap();
    let model = AsymptoticModel::assemble(blocks, covs, &schedule).unwrap();

    let n_steps = 200_000u64;
    let run = RunSpec {
        drift: &drift,
        sampler: spec,
        schedule,
        x0: DVector::zeros(d),
        y0: DVector::zeros(d),
        start_state: None,
        n_steps,
        checkpoints: vec![n_steps],
        projection_radius: None,
    };
    let records = run_trials(&run, seed, 256).unwrap();
    let report = mse_curve(&records, &x_star, &y_star, &schedule, None).unwrap();
    let row = report.rows.last().unwrap();
    (
        row.rescaled_x,
        model.trace_v_x(),
        row.rescaled_y,
        model.trace_v_y(),
    )
}

#[test]
fn iid_noise_lands_on_the_lyapunov_traces() {
    let spec = SamplerSpec::iid_uniform(6);
    let (emp_x, th_x, emp_y, th_y) = empirical_vs_theory(&spec, 0xAA);
    let rel_x = (emp_x - th_x).abs() / th_x;
    let rel_y = (emp_y - th_y).abs() / th_y;
    assert!(rel_x < 0.25, "x: empirical {emp_x:.4} vs theory {th_x:.4}");
    assert!(rel_y < 0.25, "y: empirical {emp_y:.4} vs theory {th_y:.4}");
}

#[test]
fn sticky_chain_noise_lands_on_the_lyapunov_traces() {
    // strong autocorrelation: the long-run covariance is several times the
    // marginal one, so this only passes if the chain-aware machinery is used
    let chain = Arc::new(sticky_chain(6, 0.85));
    let spec = SamplerSpec::Chain { chain: chain.clone() };
    let (emp_x, th_x, emp_y, th_y) = empirical_vs_theory(&spec, 0xBB);
    let rel_x = (emp_x - th_x).abs() / th_x;
    let rel_y = (emp_y - th_y).abs() / th_y;
    assert!(rel_x < 0.25, "x: empirical {emp_x:.4} vs theory {th_x:.4}");
    assert!(rel_y < 0.25, "y: empirical {emp_y:.4} vs theory {th_y:.4}");

    // sanity: the chain really does inflate the covariance well beyond the
    // marginal (iid) one for the same state function
    let target = spec.target_distribution().unwrap();
    let g = ttsa_lab::synth::random_state_function(6, 1, 7);
    let u_chain = sampling_cov_closed(&chain, &g).unwrap()[(0, 0)];
    let iid = chain_of_sampler(&SamplerSpec::Iid { mu: target }).unwrap();
    let u_iid = sampling_cov_closed(&iid.chain, &g).unwrap()[(0, 0)];
    assert!(
        u_chain > 3.0 * u_iid,
        "sticky chain U {u_chain:.4} vs marginal {u_iid:.4}"
    );
}

#[test]
fn controlled_kernel_frozen_at_equilibrium_matches_simulation() {
    use ttsa_lab::chains::{controlled_chain_at, ControlledKernel};

    // kernel rows drift with the slow iterate; at the equilibrium x* = 0 it
    // freezes to a fixed sticky chain
    let m = 4usize;
    let kernel: ControlledKernel = Arc::new(move |x: &DVector<f64>, _y, i| {
        let stay = (0.7 + 0.2 * (x[0].tanh())).clamp(0.05, 0.95);
        let off = (1.0 - stay) / (m - 1) as f64;
        (0..m).map(|j| if j == i { stay } else { off }).collect()
    });
    let spec = SamplerSpec::Controlled {
        n_states: m,
        kernel: kernel.clone(),
    };

    let d = 1;
    let target = vec![1.0 / m as f64; m]; // the frozen kernel is doubly stochastic
    let drift = custom_linear_drift(d, d, &target, 5).unwrap();
    let schedule = StepSchedule::new(0.6, 0.9).unwrap();
    let x_star = DVector::zeros(d);
    let y_star = DVector::zeros(d);

    // asymptotics on the kernel frozen at the equilibrium
    let frozen = controlled_chain_at(m, &kernel, &x_star, &y_star).unwrap();
    let blocks = jacobian_blocks(&drift, &target, &x_star, &y_star, None).unwrap();
    let observe: Vec<usize> = (0..m).collect();
    let covs = cov_blocks_closed(&frozen, &observe, &drift, &x_star, &y_star).unwrap();
    let model = AsymptoticModel::assemble(blocks, covs, &schedule).unwrap();

    // simulate with the live controlled kernel
    let n_steps = 200_000u64;
    let run = RunSpec {
        drift: &drift,
        sampler: &spec,
        schedule,
        x0: DVector::zeros(d),
        y0: DVector::zeros(d),
        start_state: Some(0),
        n_steps,
        checkpoints: vec![n_steps],
        projection_radius: None,
    };
    let records = run_trials(&run, 0xCC, 256).unwrap();
    let report = mse_curve(&records, &x_star, &y_star, &schedule, None).unwrap();
    let row = report.rows.last().unwrap();
    let rel = (row.rescaled_x - model.trace_v_x()).abs() / model.trace_v_x();
    assert!(
        rel < 0.25,
        "empirical {:.4} vs frozen-kernel theory {:.4}",
        row.rescaled_x,
        model.trace_v_x()
    );
}
