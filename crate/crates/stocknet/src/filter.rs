//! Network filters: minimum spanning tree, planar maximally filtered graph,
//! and winner-take-all thresholding.
//!
//! Edge ordering is kind-aware: distance matrices rank ascending, similarity
//! matrices (correlation, information) rank descending. Ties are broken by
//! lexicographic index order so every filter is deterministic.

use crate::error::{Error, Result};
use crate::graph::UnweightedGraph;
use crate::matrix::{DependenceKind, DependenceMatrix};
use crate::planarity;

/// Edges of `m` ordered strongest first under the matrix kind's convention,
/// ties broken by `(i, j)`.
fn edges_by_strength(m: &DependenceMatrix) -> Vec<(u32, u32, f64)> {
    let mut edges: Vec<(u32, u32, f64)> =
        m.off_diagonal().map(|(i, j, v)| (i as u32, j as u32, v)).collect();
    if m.kind().is_similarity() {
        edges.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| (a.0, a.1).cmp(&(b.0, b.1))));
    } else {
        edges.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| (a.0, a.1).cmp(&(b.0, b.1))));
    }
    edges
}

fn check_finite(m: &DependenceMatrix) -> Result<()> {
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::data("matrix has non-finite entries"));
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
        true
    }
}

fn kruskal(m: &DependenceMatrix) -> Result<UnweightedGraph> {
    let n = m.n();
    if n < 2 {
        return Err(Error::validation("spanning tree needs at least 2 nodes"));
    }
    check_finite(m)?;
    let mut uf = UnionFind::new(n);
    let mut kept = Vec::with_capacity(n - 1);
    for (i, j, _) in edges_by_strength(m) {
        if uf.union(i, j) {
            kept.push((i, j));
            if kept.len() == n - 1 {
                break;
            }
        }
    }
    UnweightedGraph::from_edges(m.tickers().to_vec(), &kept)
}

/// Minimum spanning tree of a distance matrix (Kruskal).
pub fn mst(m: &DependenceMatrix) -> Result<UnweightedGraph> {
    if m.kind() != DependenceKind::Distance {
        return Err(Error::validation(format!(
            "mst needs a distance matrix, got {}",
            m.kind().label()
        )));
    }
    kruskal(m)
}

/// Spanning tree over a similarity matrix: the maximum spanning tree,
/// equivalent to [`mst`] on the corresponding distance matrix.
pub fn mst_by_similarity(m: &DependenceMatrix) -> Result<UnweightedGraph> {
    if !m.kind().is_similarity() {
        return Err(Error::validation("mst_by_similarity needs a similarity matrix"));
    }
    kruskal(m)
}

/// Planar maximally filtered graph: greedy insertion in descending strength,
/// keeping an edge iff the graph stays planar. The result is a maximal
/// planar graph with exactly `3 (N - 2)` edges.
pub fn pmfg(m: &DependenceMatrix) -> Result<UnweightedGraph> {
    let n = m.n();
    if n < 3 {
        return Err(Error::validation("pmfg needs at least 3 nodes"));
    }
    check_finite(m)?;
    let target = 3 * (n - 2);
    let mut kept: Vec<(u32, u32)> = Vec::with_capacity(target);
    for (i, j, _) in edges_by_strength(m) {
        kept.push((i, j));
        if !planarity::is_planar(n, &kept) {
            kept.pop();
        } else if kept.len() == target {
            break;
        }
    }
    debug_assert_eq!(kept.len(), target);
    UnweightedGraph::from_edges(m.tickers().to_vec(), &kept)
}

/// Winner-take-all filter at a target density: keeps exactly
/// `floor(density * N (N-1) / 2)` strongest edges. The result may be
/// disconnected.
pub fn wta(m: &DependenceMatrix, density: f64) -> Result<UnweightedGraph> {
    if !(0.0..1.0).contains(&density) {
        return Err(Error::validation(format!("density {density} outside [0, 1)")));
    }
    check_finite(m)?;
    let n = m.n();
    let keep = (density * (n * (n - 1) / 2) as f64).floor() as usize;
    let edges: Vec<(u32, u32)> = edges_by_strength(m)
        .into_iter()
        .take(keep)
        .map(|(i, j, _)| (i, j))
        .collect();
    UnweightedGraph::from_edges(m.tickers().to_vec(), &edges)
}

/// Winner-take-all filter at a raw threshold: for similarity matrices keeps
/// edges with value `>= threshold`, for distance matrices `<= threshold`.
pub fn wta_threshold(m: &DependenceMatrix, threshold: f64) -> Result<UnweightedGraph> {
    check_finite(m)?;
    let sim = m.kind().is_similarity();
    let edges: Vec<(u32, u32)> = m
        .off_diagonal()
        .filter(|&(_, _, v)| if sim { v >= threshold } else { v <= threshold })
        .map(|(i, j, _)| (i as u32, j as u32))
        .collect();
    UnweightedGraph::from_edges(m.tickers().to_vec(), &edges)
}
