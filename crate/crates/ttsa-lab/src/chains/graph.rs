//! Undirected graphs for token-style random-walk sampling.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// Simple undirected graph: sorted adjacency lists, no self-loops, connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

/// What `load_edge_list` dropped while reading a file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListReport {
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
    /// True when indices were detected as 1-based and shifted down.
    pub one_based: bool,
}

impl Graph {
    /// Build from an undirected edge list over nodes `0..n_nodes`.
    /// Self-loops and duplicate edges are rejected here; use
    /// [`Graph::from_edges_lossy`] to drop them instead.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let (g, report) = Self::from_edges_lossy(n_nodes, edges)?;
        if report.dropped_self_loops > 0 || report.dropped_duplicates > 0 {
            return Err(Error::InvalidArgument(format!(
                "edge list contains {} self-loops and {} duplicates",
                report.dropped_self_loops, report.dropped_duplicates
            )));
        }
        Ok(g)
    }

    /// Build from an edge list, dropping self-loops and duplicates and
    /// reporting how many were dropped.
    pub fn from_edges_lossy(
        n_nodes: usize,
        edges: &[(usize, usize)],
    ) -> Result<(Self, EdgeListReport)> {
        let mut report = EdgeListReport::default();
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if u == v {
                report.dropped_self_loops += 1;
                continue;
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                report.dropped_duplicates += 1;
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Graph { adjacency };
        graph.check_connected()?;
        Ok((graph, report))
    }

    /// Path graph 0-1-...-(n-1).
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).expect("path graph is valid")
    }

    /// Cycle graph on n >= 3 nodes.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).expect("cycle graph is valid")
    }

    /// Star graph: node 0 is the hub, 1..=leaves are leaves.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_edges(leaves + 1, &edges).expect("star graph is valid")
    }

    /// Seeded random connected graph: a uniform random spanning tree plus
    /// `extra_edges` additional distinct random edges.
    pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Self {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(seed);
        let order = rng.permutation(n);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut seen = HashSet::new();
        for i in 1..n {
            let j = rng.next_below(i);
            let e = (order[i].min(order[j]), order[i].max(order[j]));
            seen.insert(e);
            edges.push(e);
        }
        let mut added = 0;
        while added < extra_edges && seen.len() < n * (n - 1) / 2 {
            let u = rng.next_below(n);
            let v = rng.next_below(n);
            if u == v {
                continue;
            }
            let e = (u.min(v), u.max(v));
            if seen.insert(e) {
                edges.push(e);
                added += 1;
            }
        }
        Graph::from_edges(n, &edges).expect("tree plus extra edges is connected and simple")
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(|a| a.len()).collect()
    }

    /// Degree-proportional distribution: the common stationary occupancy of
    /// SRW and NBRW on this graph.
    pub fn degree_distribution(&self) -> Vec<f64> {
        let total = 2.0 * self.n_edges() as f64;
        self.adjacency.iter().map(|a| a.len() as f64 / total).collect()
    }

    /// Directed edges (u, v) with u adjacent to v, in sorted order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(2 * self.n_edges());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                out.push((u, v));
            }
        }
        out
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.n_nodes();
        if n == 0 {
            return Err(Error::InvalidArgument("graph has no nodes".into()));
        }
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != n {
            // count components for the error message
            let mut comp = 0;
            let mut visited = vec![false; n];
            for s in 0..n {
                if visited[s] {
                    continue;
                }
                comp += 1;
                let mut stack = vec![s];
                visited[s] = true;
                while let Some(u) = stack.pop() {
                    for &v in &self.adjacency[u] {
                        if !visited[v] {
                            visited[v] = true;
                            stack.push(v);
                        }
                    }
                }
            }
            return Err(Error::DisconnectedGraph { components: comp });
        }
        if n > 1 {
            for (u, nbrs) in self.adjacency.iter().enumerate() {
                if nbrs.is_empty() {
                    return Err(Error::IsolatedNode { node: u });
                }
            }
        }
        Ok(())
    }
}

/// Read a whitespace-separated "u v" edge list. Lines starting with `#` are
/// comments. 0- vs 1-based indexing is auto-detected from the minimum index;
/// self-loops and duplicate edges are dropped and counted in the report.
pub fn load_edge_list(path: &Path) -> Result<(Graph, EdgeListReport)> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string())
}

pub(crate) fn parse_edge_list(text: &str, path: &str) -> Result<(Graph, EdgeListReport)> {
    let mut raw: Vec<(usize, usize)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: "expected two node indices".into(),
            })?
            .parse::<usize>()
            .map_err(|e| Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: format!("bad node index: {e}"),
            })
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: "expected exactly two node indices".into(),
            });
        }
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "no edges in file".into(),
        });
    }
    let min_idx = raw.iter().map(|&(u, v)| u.min(v)).min().unwrap();
    let one_based = min_idx >= 1;
    if one_based {
        for e in &mut raw {
            e.0 -= 1;
            e.1 -= 1;
        }
    }
    let n_nodes = raw.iter().map(|&(u, v)| u.max(v)).max().unwrap() + 1;
    let (graph, mut report) = Graph::from_edges_lossy(n_nodes, &raw)?;
    report.one_based = one_based;
    Ok((graph, report))
}
