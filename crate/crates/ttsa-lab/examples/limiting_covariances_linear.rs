//! From drift to CLT quantities on a fully linear instance: Jacobian blocks,
//! the reduced matrices K_x and U_x, the Lyapunov solves for V_x and V_y,
//! and a simulation whose rescaled errors land on those values.
//!
//! ```bash
//! cargo run --example limiting_covariances_linear
//! ```

use nalgebra::DVector;
use ttsa_lab::apps::custom_linear_drift;
use ttsa_lab::asymptotics::{
    cov_blocks_closed, hurwitz_check, jacobian_blocks, write_matrix_csv, AsymptoticModel,
};
use ttsa_lab::chains::{chain_of_sampler, SamplerSpec};
use ttsa_lab::harness::mse_curve;
use ttsa_lab::ttsa::{geometric_checkpoints, run_trials, RunSpec, StepSchedule};

fn main() -> ttsa_lab::Result<()> {
    let n_states = 6;
    let d = 2;
    let spec = SamplerSpec::iid_uniform(n_states);
    let target = spec.target_distribution().unwrap();
    let drift = custom_linear_drift(d, d, &target, 11)?;
    let schedule = StepSchedule::new(0.6, 0.9)?;

    let x_star = DVector::zeros(d);
    let y_star = DVector::zeros(d);
    let blocks = jacobian_blocks(&drift, &target, &x_star, &y_star, None)?;
    println!("Q11 (identity contraction expected):\n{:.3}", blocks.q11);
    let (hurwitz, max_re) = hurwitz_check(&blocks.q22)?;
    println!("Q22 Hurwitz: {hurwitz} (max real part {max_re:.3})");

    let sc = chain_of_sampler(&spec)?;
    let covs = cov_blocks_closed(&sc.chain, &sc.observe, &drift, &x_star, &y_star)?;
    let model = AsymptoticModel::assemble(blocks, covs, &schedule)?;
    println!("\nK_x:\n{:.4}", model.k_x);
    println!("U_x:\n{:.4}", model.u_x);
    println!("V_x (slow limiting covariance):\n{:.4}", model.v_x);
    println!("V_y (fast limiting covariance):\n{:.4}", model.v_y);

    // matrices serialize to plain CSV for cross-checking in other tools
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &model.v_x)?;
    println!("V_x as CSV:\n{}", String::from_utf8_lossy(&buf));

    // simulate and compare the rescaled MSE with the traces
    let n_steps = 200_000;
    let run = RunSpec {
        drift: &drift,
        sampler: &spec,
        schedule,
        x0: DVector::from_element(d, 1.0),
        y0: DVector::zeros(d),
        start_state: None,
        n_steps,
        checkpoints: geometric_checkpoints(n_steps, 5),
        projection_radius: None,
    };
    let records = run_trials(&run, 2024, 64)?;
    let report = mse_curve(
        &records,
        &x_star,
        &y_star,
        &schedule,
        Some((model.trace_v_x(), model.trace_v_y())),
    )?;
    println!("rescaled MSE against the theory traces:");
    println!(
        "  theory: trace V_x = {:.4}, trace V_y = {:.4}",
        model.trace_v_x(),
        model.trace_v_y()
    );
    for row in report.rows.iter().rev().take(4).collect::<Vec<_>>().iter().rev() {
        println!(
            "  n = {:>7}: rescaled_x = {:.4}, rescaled_y = {:.4}",
            row.n, row.rescaled_x, row.rescaled_y
        );
    }
    Ok(())
}
