//! The sampling strategies driving the recursions: iid draws, single and
//! random shuffling, simple and non-backtracking random walks, explicit
//! finite chains, and iterate-controlled kernels.

use std::sync::Arc;

use nalgebra::DVector;

use super::{validate_probability, FiniteChain, Graph};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Mutable per-stream sampler state. All draws are deterministic functions of
/// the seed and the number of draws taken so far.
#[derive(Debug, Clone)]
pub struct SamplerState {
    pub current: usize,
    pub previous: Option<usize>,
    pub permutation: Option<Vec<usize>>,
    pub epoch_pos: usize,
    pub rng: SplitMix64,
}

impl SamplerState {
    pub fn new(seed: u64, start: usize) -> Self {
        SamplerState {
            current: start,
            previous: None,
            permutation: None,
            epoch_pos: 0,
            rng: SplitMix64::new(seed),
        }
    }
}

/// One simple-random-walk step: uniform over the neighbors of the current
/// node.
pub fn srw_next(graph: &Graph, state: &mut SamplerState) -> Result<usize> {
    let nbrs = graph.neighbors(state.current);
    if nbrs.is_empty() {
        return Err(Error::IsolatedNode {
            node: state.current,
        });
    }
    let next = nbrs[state.rng.next_below(nbrs.len())];
    state.previous = Some(state.current);
    state.current = next;
    Ok(next)
}

/// One non-backtracking step: uniform over neighbors excluding the previous
/// node; a degree-1 node forces the backtrack. The first step (no previous
/// node recorded) behaves as SRW.
pub fn nbrw_next(graph: &Graph, state: &mut SamplerState) -> Result<usize> {
    let prev = match state.previous {
        None => return srw_next(graph, state),
        Some(p) => p,
    };
    let nbrs = graph.neighbors(state.current);
    if nbrs.is_empty() {
        return Err(Error::IsolatedNode {
            node: state.current,
        });
    }
    let next = if nbrs.len() == 1 {
        prev
    } else {
        // neighbors are sorted; index the allowed set without allocating
        let k = state.rng.next_below(nbrs.len() - 1);
        let picked = nbrs
            .iter()
            .filter(|&&v| v != prev)
            .nth(k)
            .copied()
            .unwrap_or(prev);
        picked
    };
    state.previous = Some(state.current);
    state.current = next;
    Ok(next)
}

/// One step of the fixed-permutation cyclic pass: the k-th call returns
/// `sigma((k+1) mod n)`.
pub fn single_shuffle_next(state: &mut SamplerState, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("shuffle over zero items".into()));
    }
    let perm = state
        .permutation
        .get_or_insert_with(|| state.rng.permutation(n));
    state.epoch_pos = (state.epoch_pos + 1) % n;
    let next = perm[state.epoch_pos];
    state.previous = Some(state.current);
    state.current = next;
    Ok(next)
}

/// One independent draw from `mu`.
pub fn iid_next(mu: &[f64], state: &mut SamplerState) -> Result<usize> {
    validate_probability(mu)?;
    let next = state.rng.next_categorical(mu);
    state.previous = Some(state.current);
    state.current = next;
    Ok(next)
}

/// Row of an iterate-dependent kernel: state index -> probability row.
pub type ControlledKernel =
    Arc<dyn Fn(&DVector<f64>, &DVector<f64>, usize) -> Vec<f64> + Send + Sync>;

/// Immutable sampler configuration, shared across trials.
#[derive(Clone)]
pub enum SamplerSpec {
    Iid { mu: Vec<f64> },
    SingleShuffle { n: usize },
    RandomShuffle { n: usize },
    Srw { graph: Arc<Graph> },
    Nbrw { graph: Arc<Graph> },
    Chain { chain: Arc<FiniteChain> },
    Controlled { n_states: usize, kernel: ControlledKernel },
}

impl std::fmt::Debug for SamplerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerSpec::Iid { mu } => write!(f, "Iid({} states)", mu.len()),
            SamplerSpec::SingleShuffle { n } => write!(f, "SingleShuffle({n})"),
            SamplerSpec::RandomShuffle { n } => write!(f, "RandomShuffle({n})"),
            SamplerSpec::Srw { graph } => write!(f, "Srw({} nodes)", graph.n_nodes()),
            SamplerSpec::Nbrw { graph } => write!(f, "Nbrw({} nodes)", graph.n_nodes()),
            SamplerSpec::Chain { chain } => write!(f, "Chain({} states)", chain.n_states()),
            SamplerSpec::Controlled { n_states, .. } => write!(f, "Controlled({n_states})"),
        }
    }
}

impl SamplerSpec {
    pub fn iid(mu: Vec<f64>) -> Result<Self> {
        validate_probability(&mu)?;
        Ok(SamplerSpec::Iid { mu })
    }

    pub fn iid_uniform(n: usize) -> Self {
        SamplerSpec::Iid {
            mu: vec![1.0 / n as f64; n],
        }
    }

    /// Number of distinct values the sampler emits.
    pub fn n_states(&self) -> usize {
        match self {
            SamplerSpec::Iid { mu } => mu.len(),
            SamplerSpec::SingleShuffle { n } | SamplerSpec::RandomShuffle { n } => *n,
            SamplerSpec::Srw { graph } | SamplerSpec::Nbrw { graph } => graph.n_nodes(),
            SamplerSpec::Chain { chain } => chain.n_states(),
            SamplerSpec::Controlled { n_states, .. } => *n_states,
        }
    }

    /// Long-run occupancy over emitted values: `mu` for iid, uniform for the
    /// shuffling passes, degree-proportional for the walks, `pi` for explicit
    /// chains. Controlled kernels have no fixed target.
    pub fn target_distribution(&self) -> Option<Vec<f64>> {
        match self {
            SamplerSpec::Iid { mu } => Some(mu.clone()),
            SamplerSpec::SingleShuffle { n } | SamplerSpec::RandomShuffle { n } => {
                Some(vec![1.0 / *n as f64; *n])
            }
            SamplerSpec::Srw { graph } | SamplerSpec::Nbrw { graph } => {
                Some(graph.degree_distribution())
            }
            SamplerSpec::Chain { chain } => Some(chain.stationary().to_vec()),
            SamplerSpec::Controlled { .. } => None,
        }
    }

    /// Instantiate a stream. Without an explicit start state, walks and
    /// chains draw one from the target distribution using the stream's own
    /// generator.
    pub fn instantiate(&self, seed: u64, start: Option<usize>) -> Sampler {
        let mut state = SamplerState::new(seed, 0);
        let start = start.unwrap_or_else(|| match self.target_distribution() {
            Some(t) => state.rng.next_categorical(&t),
            None => 0,
        });
        state.current = start;
        // pull the kernel rows out once so stepping a chain does not touch
        // the matrix storage
        let chain_rows = match self {
            SamplerSpec::Chain { chain } => Some(
                (0..chain.n_states())
                    .map(|i| (0..chain.n_states()).map(|j| chain.transition(i, j)).collect())
                    .collect(),
            ),
            _ => None,
        };
        Sampler {
            spec: self.clone(),
            state,
            chain_rows,
        }
    }
}

/// A live sampler stream: spec plus mutable state.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SamplerSpec,
    state: SamplerState,
    chain_rows: Option<Vec<Vec<f64>>>,
}

impl Sampler {
    pub fn current(&self) -> usize {
        self.state.current
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    /// Draw the next state. Only controlled kernels look at the iterates.
    pub fn step(&mut self, x: &DVector<f64>, y: &DVector<f64>) -> Result<usize> {
        match &self.spec {
            SamplerSpec::Iid { mu } => {
                let next = self.state.rng.next_categorical(mu);
                self.state.previous = Some(self.state.current);
                self.state.current = next;
                Ok(next)
            }
            SamplerSpec::SingleShuffle { n } => single_shuffle_next(&mut self.state, *n),
            SamplerSpec::RandomShuffle { n } => {
                let n = *n;
                if n == 0 {
                    return Err(Error::InvalidArgument("shuffle over zero items".into()));
                }
                let rng = &mut self.state.rng;
                let perm = self.state.permutation.get_or_insert_with(|| rng.permutation(n));
                self.state.epoch_pos = (self.state.epoch_pos + 1) % n;
                if self.state.epoch_pos == 0 {
                    // fresh pass, fresh permutation
                    *perm = self.state.rng.permutation(n);
                }
                let next = perm[self.state.epoch_pos];
                self.state.previous = Some(self.state.current);
                self.state.current = next;
                Ok(next)
            }
            SamplerSpec::Srw { graph } => srw_next(graph, &mut self.state),
            SamplerSpec::Nbrw { graph } => nbrw_next(graph, &mut self.state),
            SamplerSpec::Chain { .. } => {
                let row = &self.chain_rows.as_ref().expect("built at instantiate")
                    [self.state.current];
                let next = self.state.rng.next_categorical(row);
                self.state.previous = Some(self.state.current);
                self.state.current = next;
                Ok(next)
            }
            SamplerSpec::Controlled { kernel, n_states } => {
                let row = kernel(x, y, self.state.current);
                if row.len() != *n_states {
                    return Err(Error::DimensionMismatch {
                        expected: *n_states,
                        found: row.len(),
                    });
                }
                let next = self.state.rng.next_categorical(&row);
                self.state.previous = Some(self.state.current);
                self.state.current = next;
                Ok(next)
            }
        }
    }

    /// Step a sampler that does not depend on the iterates.
    pub fn step_plain(&mut self) -> Result<usize> {
        let zero = DVector::zeros(0);
        self.step(&zero, &zero)
    }
}

/// Materialize a controlled kernel at frozen iterates as a `FiniteChain`.
pub fn controlled_chain_at(
    n_states: usize,
    kernel: &ControlledKernel,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<FiniteChain> {
    let mut p = nalgebra::DMatrix::zeros(n_states, n_states);
    for i in 0..n_states {
        let row = kernel(x, y, i);
        if row.len() != n_states {
            return Err(Error::DimensionMismatch {
                expected: n_states,
                found: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            p[(i, j)] = v;
        }
    }
    FiniteChain::new(p)
}
