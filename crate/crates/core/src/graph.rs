//! Undirected unweighted communication graphs and their spectral/cut invariants.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest node count for which [`minimum_density`] enumerates bipartitions.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Validated undirected graph. Edges are stored as `(lo, hi)` with `lo < hi`,
/// sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

/// `L = D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(pub DMatrix<f64>);

/// `N × |E|` incidence matrix, one column per edge: `+1` at the lower index,
/// `-1` at the higher one.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence(pub DMatrix<f64>);

/// Builds a graph, rejecting self-loops, duplicates (in either orientation)
/// and out-of-range endpoints.
pub fn build_graph(node_count: usize, edges: &[(usize, usize)]) -> Result<Graph> {
    if node_count == 0 {
        return Err(Error::InvalidGraph("node_count must be at least 1".into()));
    }
    let mut seen = BTreeSet::new();
    for &(i, j) in edges {
        if i == j {
            return Err(Error::InvalidEdge { edge: (i, j), reason: "self-loop" });
        }
        if i >= node_count || j >= node_count {
            return Err(Error::InvalidEdge { edge: (i, j), reason: "endpoint out of range" });
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::InvalidEdge { edge: (i, j), reason: "duplicate edge" });
        }
    }
    Ok(Graph { node_count, edges: seen.into_iter().collect() })
}

impl Graph {
    /// Complete graph `K_n`.
    pub fn complete(node_count: usize) -> Result<Graph> {
        let edges: Vec<_> = (0..node_count).flat_map(|i| (i + 1..node_count).map(move |j| (i, j))).collect();
        build_graph(node_count, &edges)
    }

    /// Path `0 - 1 - … - (n-1)`.
    pub fn path(node_count: usize) -> Result<Graph> {
        let edges: Vec<_> = (1..node_count).map(|j| (j - 1, j)).collect();
        build_graph(node_count, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbor bitmasks, valid for `node_count <= 64`.
    fn adjacency_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.node_count];
        for &(i, j) in &self.edges {
            masks[i] |= 1 << j;
            masks[j] |= 1 << i;
        }
        masks
    }
}

pub fn laplacian(g: &Graph) -> Laplacian {
    let n = g.node_count;
    let mut l = DMatrix::zeros(n, n);
    for &(i, j) in &g.edges {
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    }
    Laplacian(l)
}

pub fn incidence(g: &Graph) -> Incidence {
    let mut b = DMatrix::zeros(g.node_count, g.edges.len());
    for (k, &(i, j)) in g.edges.iter().enumerate() {
        b[(i, k)] = 1.0;
        b[(j, k)] = -1.0;
    }
    Incidence(b)
}

/// Second-smallest Laplacian eigenvalue (`λ₂`); zero for one node or a
/// disconnected graph.
pub fn algebraic_connectivity(g: &Graph) -> f64 {
    if g.node_count < 2 {
        return 0.0;
    }
    let mut eig = SymmetricEigen::new(laplacian(g).0).eigenvalues.as_slice().to_vec();
    eig.sort_by(f64::total_cmp);
    // PSD; clamp round-off below zero
    eig[1].max(0.0)
}

pub fn is_connected(g: &Graph) -> bool {
    let mut adj = vec![Vec::new(); g.node_count];
    for &(i, j) in &g.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut visited = vec![false; g.node_count];
    let mut stack = vec![0];
    visited[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == g.node_count
}

/// Minimum density `δ_G`: the minimum over nonempty proper vertex subsets `S`
/// of `N·cut(S, V∖S) / (2·|S|·(N−|S|))`, found by exhaustive enumeration of
/// bipartitions. Equals `N/2` for complete graphs.
pub fn minimum_density(g: &Graph) -> Result<f64> {
    minimum_density_with_limit(g, DEFAULT_ENUMERATION_LIMIT)
}

pub fn minimum_density_with_limit(g: &Graph, limit: usize) -> Result<f64> {
    let n = g.node_count;
    if n > limit || n > 63 {
        return Err(Error::EnumerationLimit { nodes: n, limit: limit.min(63) });
    }
    if n < 2 {
        return Err(Error::InvalidGraph("minimum density needs at least two nodes".into()));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let masks = g.adjacency_masks();
    let full: u64 = (1u64 << n) - 1;
    let nf = n as f64;
    let mut best = f64::INFINITY;
    // S and its complement give the same value; fix node 0 inside S.
    let free = n - 1;
    for bits in 0..(1u64 << free) {
        let set = (bits << 1) | 1;
        if set == full {
            continue;
        }
        let size = set.count_ones() as usize;
        let mut cut = 0u32;
        let mut rest = set;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            cut += (masks[i] & !set & full).count_ones();
        }
        let value = nf * f64::from(cut) / (2.0 * size as f64 * (n - size) as f64);
        best = best.min(value);
    }
    Ok(best)
}
