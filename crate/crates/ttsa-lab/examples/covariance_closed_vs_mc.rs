//! The long-run covariance of partial sums, twice: exactly through the
//! Poisson fundamental matrix, and empirically from independent streams.
//!
//! ```bash
//! cargo run --example covariance_closed_vs_mc
//! ```

use std::sync::Arc;

use nalgebra::DVector;
use ttsa_lab::asymptotics::{sampling_cov_closed, sampling_cov_mc, McOptions};
use ttsa_lab::chains::{chain_of_sampler, Graph, SamplerSpec};
use ttsa_lab::synth;

fn main() -> ttsa_lab::Result<()> {
    let graph = Arc::new(Graph::random_connected(12, 8, 3));
    let spec = SamplerSpec::Srw { graph };
    let sc = chain_of_sampler(&spec)?;

    let gvals = synth::random_state_function(12, 2, 99);
    let exact = sampling_cov_closed(&sc.chain, &gvals)?;
    println!("closed-form U:\n{exact:.5}");

    let g = |i: usize| gvals.row(i).transpose();
    let est = sampling_cov_mc(
        &spec,
        &g,
        None,
        &McOptions {
            horizon: 50_000,
            trials: 200,
            burn_in: 500,
            seed: 17,
        },
    )?;
    println!("monte-carlo U (200 trials at horizon 5e4):\n{:.5}", est.mean);
    println!("per-entry standard errors:\n{:.5}", est.std_err);

    let mut max_z: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            max_z = max_z.max((est.mean[(a, b)] - exact[(a, b)]).abs() / est.std_err[(a, b)]);
        }
    }
    println!("largest |closed - MC| in standard errors: {max_z:.2}");

    // a deterministic pass has vanishing covariance: single shuffling
    let shuffle = SamplerSpec::SingleShuffle { n: 12 };
    for s in [1_000usize, 10_000, 100_000] {
        let est = sampling_cov_mc(
            &shuffle,
            &|i: usize| DVector::from_element(1, i as f64),
            None,
            &McOptions {
                horizon: s + 1, // off the epoch boundary
                trials: 32,
                burn_in: 0,
                seed: 5,
            },
        )?;
        println!("single shuffle, horizon {s}: U_hat = {:.5e}", est.mean[(0, 0)]);
    }
    println!("the shuffle estimate decays like 1/s toward zero covariance");
    Ok(())
}
