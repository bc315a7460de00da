//! Finite-state Markov chains: validation, stationary distributions, the
//! directed-edge augmentation, and finite-chain views of the samplers.

mod graph;
mod sampler;

pub use graph::{load_edge_list, EdgeListReport, Graph};
pub use sampler::{
    controlled_chain_at, iid_next, nbrw_next, single_shuffle_next, srw_next, ControlledKernel,
    Sampler, SamplerSpec, SamplerState,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// An ergodicity-checked finite-state chain together with its stationary
/// distribution.
///
/// [`FiniteChain::new`] insists on an ergodic kernel (strongly connected and
/// aperiodic on the positive-entry digraph). Some chains this crate builds
/// internally are irreducible-but-periodic (simple random walk on a bipartite
/// graph) or even reducible with equal-behaving closed classes
/// (non-backtracking walk on a cycle); those come in through
/// [`FiniteChain::with_stationary`], which validates invariance of the
/// supplied distribution instead.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    p: DMatrix<f64>,
    pi: DVector<f64>,
}

impl FiniteChain {
    /// Validate `p` as an ergodic row-stochastic kernel and compute its
    /// stationary distribution.
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(&p)?;
        check_strongly_connected(&p)?;
        let period = digraph_period(&p);
        if period != 1 {
            return Err(Error::PeriodicChain { period });
        }
        let pi = stationary_of(&p)?;
        Ok(FiniteChain { p, pi })
    }

    /// Build a chain whose stationary distribution is already known.
    /// Requires `pi P = pi` within 1e-10 but does not require ergodicity.
    pub fn with_stationary(p: DMatrix<f64>, pi: Vec<f64>) -> Result<Self> {
        validate_stochastic(&p)?;
        let pi = DVector::from_vec(pi);
        validate_probability(pi.as_slice())?;
        let residual = (p.transpose() * &pi - &pi).amax();
        if residual > STATIONARY_TOL {
            return Err(Error::StationaryMismatch { residual });
        }
        Ok(FiniteChain { p, pi })
    }

    /// Irreducible (but possibly periodic) kernel; the stationary
    /// distribution is computed.
    pub fn new_irreducible(p: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(&p)?;
        check_strongly_connected(&p)?;
        let pi = stationary_of(&p)?;
        Ok(FiniteChain { p, pi })
    }

    pub fn n_states(&self) -> usize {
        self.p.nrows()
    }

    pub fn transition_matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// The stationary distribution `pi` with `pi P = pi`.
    pub fn stationary(&self) -> &[f64] {
        self.pi.as_slice()
    }

    pub fn stationary_vector(&self) -> &DVector<f64> {
        &self.pi
    }

    /// Strongly connected components of the positive-entry digraph that have
    /// no outgoing edges, i.e. the closed communicating classes.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let sccs = tarjan_sccs(&self.p);
        let mut closed = Vec::new();
        for scc in &sccs {
            let inside: std::collections::HashSet<usize> = scc.iter().copied().collect();
            let mut is_closed = true;
            'outer: for &i in scc {
                for j in 0..self.p.ncols() {
                    if self.p[(i, j)] > 0.0 && !inside.contains(&j) {
                        is_closed = false;
                        break 'outer;
                    }
                }
            }
            if is_closed {
                let mut c = scc.clone();
                c.sort_unstable();
                closed.push(c);
            }
        }
        closed.sort();
        closed
    }

    pub fn is_irreducible(&self) -> bool {
        check_strongly_connected(&self.p).is_ok()
    }

    /// Restriction of the chain to a closed class, with the stationary
    /// distribution renormalized on the class. The second return value is the
    /// class weight under the full chain's `pi`.
    pub(crate) fn restrict(&self, class: &[usize]) -> Result<(FiniteChain, f64)> {
        let k = class.len();
        let mut p = DMatrix::zeros(k, k);
        for (a, &i) in class.iter().enumerate() {
            for (b, &j) in class.iter().enumerate() {
                p[(a, b)] = self.p[(i, j)];
            }
        }
        let weight: f64 = class.iter().map(|&i| self.pi[i]).sum();
        if weight <= 0.0 {
            return Err(Error::InvalidProbability {
                reason: "closed class carries zero stationary mass".into(),
            });
        }
        let pi: Vec<f64> = class.iter().map(|&i| self.pi[i] / weight).collect();
        Ok((FiniteChain::with_stationary(p, pi)?, weight))
    }
}

/// Chain on consecutive transitions: states are the ordered pairs (i, j)
/// with `P(i, j) > 0`, stepping by `P'(e_ij, e_jk) = P(j, k)`, stationary
/// `pi'(e_ij) = pi_i P(i, j)`.
#[derive(Debug, Clone)]
pub struct AugmentedChain {
    pub edges: Vec<(usize, usize)>,
    pub chain: FiniteChain,
}

impl AugmentedChain {
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == (i, j))
    }
}

/// Build the transition-pair augmentation of `chain`.
pub fn augment_chain(chain: &FiniteChain) -> Result<AugmentedChain> {
    let m = chain.n_states();
    let p = chain.transition_matrix();
    let pi = chain.stationary();
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if p[(i, j)] > 0.0 {
                edges.push((i, j));
            }
        }
    }
    let ne = edges.len();
    let mut pp = DMatrix::zeros(ne, ne);
    for (a, &(_, j)) in edges.iter().enumerate() {
        for (b, &(l, k)) in edges.iter().enumerate() {
            if l == j {
                pp[(a, b)] = p[(j, k)];
            }
        }
    }
    let pi_aug: Vec<f64> = edges.iter().map(|&(i, j)| pi[i] * p[(i, j)]).collect();
    let chain = FiniteChain::with_stationary(pp, pi_aug)?;
    Ok(AugmentedChain { edges, chain })
}

/// A finite-chain view of a sampler: `chain` is distributionally identical to
/// stepping the sampler, and `observe[state]` maps a chain state back to the
/// node (or data index) the sampler reports at that state.
#[derive(Debug, Clone)]
pub struct SamplerChain {
    pub chain: FiniteChain,
    pub observe: Vec<usize>,
}

/// Materialize the transition matrix of an iid / SRW / NBRW sampler.
///
/// The NBRW chain lives on the directed-edge space; `observe` projects an
/// edge (u, v) to the current node v. Shuffling samplers have no
/// time-homogeneous finite-chain representation and are rejected.
pub fn chain_of_sampler(spec: &SamplerSpec) -> Result<SamplerChain> {
    match spec {
        SamplerSpec::Iid { mu } => {
            validate_probability(mu)?;
            let m = mu.len();
            let p = DMatrix::from_fn(m, m, |_, j| mu[j]);
            let chain = FiniteChain::with_stationary(p, mu.clone())?;
            Ok(SamplerChain {
                chain,
                observe: (0..m).collect(),
            })
        }
        SamplerSpec::Srw { graph } => {
            let n = graph.n_nodes();
            let mut p = DMatrix::zeros(n, n);
            for u in 0..n {
                let nbrs = graph.neighbors(u);
                for &v in nbrs {
                    p[(u, v)] = 1.0 / nbrs.len() as f64;
                }
            }
            let chain = FiniteChain::with_stationary(p, graph.degree_distribution())?;
            Ok(SamplerChain {
                chain,
                observe: (0..n).collect(),
            })
        }
        SamplerSpec::Nbrw { graph } => {
            let edges = graph.directed_edges();
            let ne = edges.len();
            let mut index = std::collections::HashMap::new();
            for (k, &e) in edges.iter().enumerate() {
                index.insert(e, k);
            }
            let mut p = DMatrix::zeros(ne, ne);
            for (a, &(u, v)) in edges.iter().enumerate() {
                let nbrs = graph.neighbors(v);
                if nbrs.len() == 1 {
                    // degree-1 node: forced backtrack
                    p[(a, index[&(v, u)])] = 1.0;
                } else {
                    let w = 1.0 / (nbrs.len() - 1) as f64;
                    for &t in nbrs {
                        if t != u {
                            p[(a, index[&(v, t)])] = w;
                        }
                    }
                }
            }
            let pi = vec![1.0 / ne as f64; ne];
            let chain = FiniteChain::with_stationary(p, pi)?;
            Ok(SamplerChain {
                chain,
                observe: edges.iter().map(|&(_, v)| v).collect(),
            })
        }
        SamplerSpec::Chain { chain } => Ok(SamplerChain {
            chain: (**chain).clone(),
            observe: (0..chain.n_states()).collect(),
        }),
        SamplerSpec::SingleShuffle { .. } => Err(Error::NoChainRepresentation(
            "single shuffling is deterministic after initialization; use Monte Carlo",
        )),
        SamplerSpec::RandomShuffle { .. } => Err(Error::NoChainRepresentation(
            "random shuffling is not a time-homogeneous chain on data indices; use Monte Carlo",
        )),
        SamplerSpec::Controlled { .. } => Err(Error::NoChainRepresentation(
            "controlled kernel depends on the iterates; evaluate it at the equilibrium first",
        )),
    }
}

/// Stationary distribution of an ergodicity-checked chain.
pub fn stationary_distribution(chain: &FiniteChain) -> &[f64] {
    chain.stationary()
}

pub(crate) fn validate_probability(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidProbability {
            reason: "empty vector".into(),
        });
    }
    if v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidProbability {
            reason: "negative or non-finite entry".into(),
        });
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidProbability {
            reason: format!("sums to {sum}, expected 1 within 1e-12"),
        });
    }
    Ok(())
}

fn validate_stochastic(p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare {
            rows: p.nrows(),
            cols: p.ncols(),
        });
    }
    for i in 0..p.nrows() {
        let mut sum = 0.0;
        for j in 0..p.ncols() {
            let v = p[(i, j)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NotRowStochastic { row: i, sum });
        }
    }
    Ok(())
}

fn check_strongly_connected(p: &DMatrix<f64>) -> Result<()> {
    let m = p.nrows();
    let reach = |transpose: bool| -> usize {
        let mut visited = vec![false; m];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..m {
                let w = if transpose { p[(v, u)] } else { p[(u, v)] };
                if w > 0.0 && !visited[v] {
                    visited[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count
    };
    if reach(false) != m || reach(true) != m {
        return Err(Error::ReducibleChain);
    }
    Ok(())
}

/// Period of a strongly connected digraph: gcd of `level(u) + 1 - level(v)`
/// over all edges u -> v, with levels from a breadth-first search at state 0.
/// Equivalently the gcd of all closed-walk lengths through state 0.
fn digraph_period(p: &DMatrix<f64>) -> usize {
    let m = p.nrows();
    let mut level = vec![usize::MAX; m];
    let mut queue = std::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0usize);
    while let Some(u) = queue.pop_front() {
        for v in 0..m {
            if p[(u, v)] > 0.0 && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g: i64 = 0;
    for u in 0..m {
        for v in 0..m {
            if p[(u, v)] > 0.0 {
                let diff = level[u] as i64 + 1 - level[v] as i64;
                g = gcd(g, diff.abs());
            }
        }
    }
    g.max(1) as usize
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn tarjan_sccs(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    // iterative Tarjan on the positive-entry digraph
    let m = p.nrows();
    let mut index = vec![usize::MAX; m];
    let mut lowlink = vec![0usize; m];
    let mut on_stack = vec![false; m];
    let mut stack: Vec<usize> = Vec::new();
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    for root in 0..m {
        if index[root] != usize::MAX {
            continue;
        }
        // frames: (node, next-successor-to-try)
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        lowlink[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (u, ref mut next)) = frames.last_mut() {
            let mut advanced = false;
            while *next < m {
                let v = *next;
                *next += 1;
                if p[(u, v)] <= 0.0 {
                    continue;
                }
                if index[v] == usize::MAX {
                    index[v] = counter;
                    lowlink[v] = counter;
                    counter += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    frames.push((v, 0));
                    advanced = true;
                    break;
                } else if on_stack[v] {
                    lowlink[u] = lowlink[u].min(index[v]);
                }
            }
            if advanced {
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[u]);
            }
            if lowlink[u] == index[u] {
                let mut scc = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    scc.push(w);
                    if w == u {
                        break;
                    }
                }
                sccs.push(scc);
            }
        }
    }
    sccs
}

/// Solve `pi P = pi` for an irreducible kernel: dense LU with a
/// normalization row for m <= 500, power iteration on the lazy kernel
/// otherwise.
fn stationary_of(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let m = p.nrows();
    if m <= 500 {
        let mut a = p.transpose() - DMatrix::identity(m, m);
        for j in 0..m {
            a[(m - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(m);
        b[m - 1] = 1.0;
        let lu = a.lu();
        let pi = lu.solve(&b).ok_or(Error::IllConditioned {
            context: "stationary linear system",
            cond: f64::INFINITY,
        })?;
        let pi = pi.map(|x| x.max(0.0));
        let sum = pi.sum();
        Ok(pi / sum)
    } else {
        // lazy kernel (P + I)/2 has the same stationary vector and is
        // aperiodic, so the iteration converges even for periodic P
        let mut pi = DVector::from_element(m, 1.0 / m as f64);
        for _ in 0..200_000 {
            let mut next = 0.5 * (p.transpose() * &pi) + 0.5 * &pi;
            next /= next.sum();
            let delta = (&next - &pi).amax();
            pi = next;
            if delta < 1e-14 {
                break;
            }
        }
        let residual = (p.transpose() * &pi - &pi).amax();
        if residual > 1e-12 {
            return Err(Error::StationaryMismatch { residual });
        }
        Ok(pi)
    }
}
