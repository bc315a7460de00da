//! Finite chains from scratch: validation, stationary distributions, the
//! Poisson equation, and the directed-transition augmentation.
//!
//! ```bash
//! cargo run --example stationary_and_poisson
//! ```

use nalgebra::DMatrix;
use ttsa_lab::asymptotics::{poisson_residual, poisson_solve_vec};
use ttsa_lab::chains::{augment_chain, FiniteChain};
use ttsa_lab::synth;

fn main() -> ttsa_lab::Result<()> {
    // a small ergodic chain
    let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
    let chain = FiniteChain::new(p)?;
    println!("two-state chain stationary distribution: {:?}", chain.stationary());

    // the Poisson equation m - Pm = h - h̄ solved through the fundamental matrix
    let h = vec![1.0, -1.0];
    let m = poisson_solve_vec(&chain, &h)?;
    println!("poisson solution for h = (1, -1): {m:?}");
    let hm = DMatrix::from_fn(2, 1, |i, _| h[i]);
    let mm = DMatrix::from_fn(2, 1, |i, _| m[i]);
    println!("residual of the identity: {:.3e}", poisson_residual(&chain, &hm, &mm));

    // ergodicity violations are named
    let periodic = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    println!("periodic kernel rejected: {}", FiniteChain::new(periodic).unwrap_err());
    let reducible = DMatrix::identity(2, 2);
    println!("reducible kernel rejected: {}", FiniteChain::new(reducible).unwrap_err());

    // augmentation onto consecutive transitions: pi'(e_ij) = pi_i P(i, j)
    let aug = augment_chain(&chain)?;
    println!("\naugmented chain over {} transitions:", aug.edges.len());
    for (k, &(i, j)) in aug.edges.iter().enumerate() {
        println!("  edge ({i} -> {j}): pi' = {:.6}", aug.chain.stationary()[k]);
    }

    // residuals stay at solver precision across random ergodic chains
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let chain = synth::random_ergodic_chain(12, seed);
        let g = synth::random_state_function(12, 2, seed);
        let sol = ttsa_lab::asymptotics::poisson_solve(&chain, &g)?;
        worst = worst.max(poisson_residual(&chain, &g, &sol));
    }
    println!("\nworst poisson residual over 50 random chains: {worst:.3e}");
    Ok(())
}
