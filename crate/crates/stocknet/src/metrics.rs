//! Local and global graph characteristics on unweighted graphs.
//!
//! Conventions for disconnected graphs (recorded in every report):
//! path-based averages run over existing paths only; closeness uses the
//! reachable set, with 0 for isolated nodes; eccentricity is undefined for
//! isolated nodes; nodes of degree < 2 contribute clustering 0 to the
//! average; undefined values stay undefined and never turn into silent
//! zeros.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UnweightedGraph;

/// Global metric selector used by tests, sweeps and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum MetricName {
    AvgDegree,
    CharPathLength,
    AvgClustering,
    AvgCloseness,
    AvgEccentricity,
    AvgBetweenness,
    AvgEigenvector,
    Assortativity,
}

impl MetricName {
    pub const ALL: [MetricName; 8] = [
        MetricName::AvgDegree,
        MetricName::CharPathLength,
        MetricName::AvgClustering,
        MetricName::AvgCloseness,
        MetricName::AvgEccentricity,
        MetricName::AvgBetweenness,
        MetricName::AvgEigenvector,
        MetricName::Assortativity,
    ];

    /// The seven characteristics tested against surrogates by default.
    pub fn default_test_set() -> Vec<MetricName> {
        vec![
            MetricName::CharPathLength,
            MetricName::AvgClustering,
            MetricName::AvgCloseness,
            MetricName::AvgEccentricity,
            MetricName::AvgBetweenness,
            MetricName::AvgEigenvector,
            MetricName::Assortativity,
        ]
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricName::AvgDegree => "avg_degree",
            MetricName::CharPathLength => "char_path_length",
            MetricName::AvgClustering => "avg_clustering",
            MetricName::AvgCloseness => "avg_closeness",
            MetricName::AvgEccentricity => "avg_eccentricity",
            MetricName::AvgBetweenness => "avg_betweenness",
            MetricName::AvgEigenvector => "avg_eigenvector",
            MetricName::Assortativity => "assortativity",
        }
    }
}

impl std::fmt::Display for MetricName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Hop distances from every node. Unreachable pairs are `None` and never
/// enter any arithmetic.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<u32>, // u32::MAX marks unreachable
}

impl DistanceTable {
    pub fn get(&self, u: usize, v: usize) -> Option<u32> {
        let d = self.dist[u * self.n + v];
        (d != u32::MAX).then_some(d)
    }
}

/// BFS hop distances for all ordered pairs.
pub fn all_pairs_distances(g: &UnweightedGraph) -> DistanceTable {
    let n = g.n();
    let mut dist = vec![u32::MAX; n * n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s as u32);
        while let Some(u) = queue.pop_front() {
            let du = row[u as usize];
            for &v in g.neighbors(u as usize) {
                if row[v as usize] == u32::MAX {
                    row[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceTable { n, dist }
}

/// Mean shortest-path length over existing (reachable, ordered) pairs, or
/// `None` when no pair is reachable.
pub fn char_path_length(g: &UnweightedGraph) -> Option<f64> {
    let table = all_pairs_distances(g);
    let mut sum = 0u64;
    let mut count = 0u64;
    for u in 0..g.n() {
        for v in 0..g.n() {
            if u != v {
                if let Some(d) = table.get(u, v) {
                    sum += d as u64;
                    count += 1;
                }
            }
        }
    }
    (count > 0).then(|| sum as f64 / count as f64)
}

/// Per-node mean distance to reachable peers (`None` for isolated nodes).
pub fn node_shortest_path(g: &UnweightedGraph) -> Vec<Option<f64>> {
    let table = all_pairs_distances(g);
    (0..g.n())
        .map(|u| {
            let mut sum = 0u64;
            let mut count = 0u64;
            for v in 0..g.n() {
                if v != u {
                    if let Some(d) = table.get(u, v) {
                        sum += d as u64;
                        count += 1;
                    }
                }
            }
            (count > 0).then(|| sum as f64 / count as f64)
        })
        .collect()
}

/// Per-node clustering coefficients; nodes of degree < 2 get 0.
pub fn clustering(g: &UnweightedGraph) -> Vec<f64> {
    (0..g.n())
        .map(|v| {
            let k = g.degree(v);
            if k < 2 {
                0.0
            } else {
                2.0 * g.edges_among_neighbors(v) as f64 / (k * (k - 1)) as f64
            }
        })
        .collect()
}

/// Unnormalized betweenness centrality (Brandes): for each node the sum over
/// unordered pairs of the fraction of shortest paths passing through it.
pub fn betweenness(g: &UnweightedGraph) -> Vec<f64> {
    let n = g.n();
    let mut central = vec![0.0; n];
    let mut stack: Vec<u32> = Vec::with_capacity(n);
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![i64::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = std::collections::VecDeque::new();

    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = i64::MAX;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.clear();
        queue.push_back(s as u32);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v as usize) {
                let w = w as usize;
                if dist[w] == i64::MAX {
                    dist[w] = dist[v as usize] + 1;
                    queue.push_back(w as u32);
                }
                if dist[w] == dist[v as usize] + 1 {
                    sigma[w] += sigma[v as usize];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            let w = w as usize;
            for &v in &preds[w] {
                let v = v as usize;
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                central[w] += delta[w];
            }
        }
    }
    // each unordered pair was counted from both endpoints
    for c in &mut central {
        *c /= 2.0;
    }
    central
}

/// Reachable-set closeness: `|R(v)| / sum of distances to R(v)`, 0 for
/// isolated nodes. Coincides with `(n-1)/sum` on connected graphs.
pub fn closeness(g: &UnweightedGraph) -> Vec<f64> {
    let table = all_pairs_distances(g);
    (0..g.n())
        .map(|v| {
            let mut sum = 0u64;
            let mut count = 0u64;
            for u in 0..g.n() {
                if u != v {
                    if let Some(d) = table.get(v, u) {
                        sum += d as u64;
                        count += 1;
                    }
                }
            }
            if count == 0 {
                0.0
            } else {
                count as f64 / sum as f64
            }
        })
        .collect()
}

/// Maximum distance to any reachable node; `None` for isolated nodes.
pub fn eccentricity(g: &UnweightedGraph) -> Vec<Option<u32>> {
    let table = all_pairs_distances(g);
    (0..g.n())
        .map(|v| {
            (0..g.n())
                .filter(|&u| u != v)
                .filter_map(|u| table.get(v, u))
                .max()
        })
        .collect()
}

const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 100_000;

/// Leading eigenvector of the adjacency matrix: nonnegative, unit Euclidean
/// norm. Power iteration on `A + I` from a uniform start; on disconnected
/// graphs the mass settles on the component with the largest leading
/// eigenvalue. `None` marks the edgeless graph (undefined).
pub fn eigenvector_centrality(g: &UnweightedGraph) -> Result<Option<Vec<f64>>> {
    let n = g.n();
    if g.edge_count() == 0 {
        return Ok(None);
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..EIGEN_MAX_ITER {
        for v in 0..n {
            // (A + I) x keeps the iteration aperiodic on bipartite components
            let mut acc = x[v];
            for &u in g.neighbors(v) {
                acc += x[u as usize];
            }
            next[v] = acc;
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::numeric("eigenvector iteration collapsed to zero"));
        }
        for v in &mut next {
            *v /= norm;
        }
        let diff = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut x, &mut next);
        if diff <= EIGEN_TOL {
            return Ok(Some(x));
        }
    }
    Err(Error::numeric(format!(
        "eigenvector centrality did not converge within {EIGEN_MAX_ITER} iterations"
    )))
}

/// Degree assortativity: Pearson correlation of degrees across edge
/// endpoints (Newman's normalized form, evaluated in exact integer
/// arithmetic). `None` when the endpoint degree variance is zero.
pub fn assortativity(g: &UnweightedGraph) -> Option<f64> {
    let m = g.edge_count() as i128;
    if m < 2 {
        return None;
    }
    let mut s1: i128 = 0; // sum of k_u k_v
    let mut s2: i128 = 0; // sum of (k_u + k_v)
    let mut s3: i128 = 0; // sum of (k_u^2 + k_v^2)
    for (u, v) in g.edges() {
        let ku = g.degree(u as usize) as i128;
        let kv = g.degree(v as usize) as i128;
        s1 += ku * kv;
        s2 += ku + kv;
        s3 += ku * ku + kv * kv;
    }
    let num = 4 * m * s1 - s2 * s2;
    let den = 2 * m * s3 - s2 * s2;
    if den == 0 {
        return None;
    }
    Some(num as f64 / den as f64)
}

/// Per-node values and global reductions of all characteristics, plus the
/// conventions they were computed under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tickers: Vec<String>,
    pub degree: Vec<usize>,
    pub clustering: Vec<f64>,
    pub node_shortest_path: Vec<Option<f64>>,
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub eccentricity: Vec<Option<u32>>,
    pub eigenvector: Option<Vec<f64>>,
    pub avg_degree: f64,
    pub char_path_length: Option<f64>,
    pub avg_clustering: f64,
    pub avg_closeness: f64,
    pub avg_eccentricity: Option<f64>,
    pub avg_betweenness: f64,
    pub avg_eigenvector: Option<f64>,
    pub assortativity: Option<f64>,
    pub conventions: &'static str,
}

const CONVENTIONS: &str = "path averages over existing paths only; closeness by reachable set \
(0 for isolated nodes); eccentricity undefined for isolated nodes; clustering 0 for degree < 2, \
included in the average; betweenness unnormalized over unordered pairs; eigenvector centrality \
nonnegative with unit Euclidean norm; assortativity in Newman's normalized form; undefined \
values reported as null";

/// Computes every characteristic of the graph.
pub fn compute_metrics(g: &UnweightedGraph) -> Result<MetricsReport> {
    let n = g.n();
    if n == 0 {
        return Err(Error::validation("empty graph"));
    }
    let degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let clustering_v = clustering(g);
    let nsp = node_shortest_path(g);
    let betweenness_v = betweenness(g);
    let closeness_v = closeness(g);
    let eccentricity_v = eccentricity(g);
    let eigenvector_v = eigenvector_centrality(g)?;

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let ecc_defined: Vec<f64> = eccentricity_v.iter().flatten().map(|&e| e as f64).collect();

    Ok(MetricsReport {
        tickers: g.tickers().to_vec(),
        avg_degree: degree.iter().sum::<usize>() as f64 / n as f64,
        char_path_length: char_path_length(g),
        avg_clustering: mean(&clustering_v),
        avg_closeness: mean(&closeness_v),
        avg_eccentricity: (!ecc_defined.is_empty()).then(|| mean(&ecc_defined)),
        avg_betweenness: mean(&betweenness_v),
        avg_eigenvector: eigenvector_v.as_ref().map(|v| mean(v)),
        assortativity: assortativity(g),
        degree,
        clustering: clustering_v,
        node_shortest_path: nsp,
        betweenness: betweenness_v,
        closeness: closeness_v,
        eccentricity: eccentricity_v,
        eigenvector: eigenvector_v,
        conventions: CONVENTIONS,
    })
}

impl MetricsReport {
    /// Global value for a named metric; `None` when undefined.
    pub fn global(&self, metric: MetricName) -> Option<f64> {
        match metric {
            MetricName::AvgDegree => Some(self.avg_degree),
            MetricName::CharPathLength => self.char_path_length,
            MetricName::AvgClustering => Some(self.avg_clustering),
            MetricName::AvgCloseness => Some(self.avg_closeness),
            MetricName::AvgEccentricity => self.avg_eccentricity,
            MetricName::AvgBetweenness => Some(self.avg_betweenness),
            MetricName::AvgEigenvector => self.avg_eigenvector,
            MetricName::Assortativity => self.assortativity,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::index_tickers;
    use approx::assert_abs_diff_eq;

    fn graph(n: usize, edges: &[(u32, u32)]) -> UnweightedGraph {
        UnweightedGraph::from_edges(index_tickers(n), edges).unwrap()
    }

    #[test]
    fn distances_on_path_and_components() {
        let g = graph(4, &[(0, 1), (1, 2)]);
        let t = all_pairs_distances(&g);
        assert_eq!(t.get(0, 2), Some(2));
        assert_eq!(t.get(0, 3), None);
        assert_eq!(t.get(3, 3), Some(0));
        let complete = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let tc = all_pairs_distances(&complete);
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(tc.get(u, v), Some(u32::from(u != v)));
            }
        }
    }

    #[test]
    fn path_length_conventions() {
        let complete = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(char_path_length(&complete), Some(1.0));
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_abs_diff_eq!(char_path_length(&path).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        // triangle plus isolated node: unreachable pairs excluded
        let tri = graph(4, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(char_path_length(&tri), Some(1.0));
        let empty = graph(3, &[]);
        assert_eq!(char_path_length(&empty), None);
    }

    #[test]
    fn char_path_length_equals_mean_node_value_when_connected() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]);
        let l = char_path_length(&g).unwrap();
        let nsp = node_shortest_path(&g);
        let mean = nsp.iter().map(|v| v.unwrap()).sum::<f64>() / 6.0;
        assert_abs_diff_eq!(l, mean, epsilon = 1e-12);
    }

    #[test]
    fn clustering_known_values() {
        let tri = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(clustering(&tri), vec![1.0, 1.0, 1.0]);
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(clustering(&path), vec![0.0, 0.0, 0.0]);
        // K4 minus edge (2,3): degree-3 nodes get 2/3, degree-2 nodes get 1
        let k4m = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        let c = clustering(&k4m);
        assert_abs_diff_eq!(c[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(c[2], 1.0);
        assert_eq!(c[3], 1.0);
        let report = compute_metrics(&k4m).unwrap();
        assert_abs_diff_eq!(report.avg_clustering, 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn betweenness_known_values() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(betweenness(&path), vec![0.0, 1.0, 0.0]);
        // star with 4 leaves: hub carries all C(4,2) = 6 pairs
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let b = betweenness(&star);
        assert_eq!(b[0], 6.0);
        assert_eq!(&b[1..], &[0.0, 0.0, 0.0, 0.0]);
        // unreachable pairs contribute nothing
        let two = graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(betweenness(&two), vec![0.0; 4]);
    }

    #[test]
    fn closeness_conventions() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let c = closeness(&path);
        assert_abs_diff_eq!(c[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[0], 2.0 / 3.0, epsilon = 1e-15);
        let tri = graph(4, &[(0, 1), (0, 2), (1, 2)]);
        let c2 = closeness(&tri);
        assert_eq!(c2[3], 0.0);
        assert_eq!(&c2[..3], &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn eccentricity_conventions() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(eccentricity(&path), vec![Some(2), Some(1), Some(2)]);
        let cycle6 = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        assert!(eccentricity(&cycle6).iter().all(|&e| e == Some(3)));
        let tri = graph(4, &[(0, 1), (0, 2), (1, 2)]);
        let e = eccentricity(&tri);
        assert_eq!(e[3], None);
        let report = compute_metrics(&tri).unwrap();
        assert_eq!(report.avg_eccentricity, Some(1.0));
    }

    #[test]
    fn eigenvector_known_values() {
        // cycle: all entries equal 1/sqrt(n)
        let cycle = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let x = eigenvector_centrality(&cycle).unwrap().unwrap();
        for v in &x {
            assert_abs_diff_eq!(*v, 1.0 / 5.0_f64.sqrt(), epsilon = 1e-9);
        }
        // star with 3 leaves: hub sqrt(3)/sqrt(6), leaves 1/sqrt(6)
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let x = eigenvector_centrality(&star).unwrap().unwrap();
        assert_abs_diff_eq!(x[0], 3.0_f64.sqrt() / 6.0_f64.sqrt(), epsilon = 1e-9);
        for leaf in &x[1..] {
            assert_abs_diff_eq!(*leaf, 1.0 / 6.0_f64.sqrt(), epsilon = 1e-9);
        }
        // edgeless graph is undefined
        assert!(eigenvector_centrality(&graph(3, &[])).unwrap().is_none());
    }

    #[test]
    fn assortativity_known_values() {
        let path4 = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_abs_diff_eq!(assortativity(&path4).unwrap(), -0.5, epsilon = 1e-15);
        // complete graph: all degrees equal, undefined
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(assortativity(&k4), None);
        // star: perfectly disassortative
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_abs_diff_eq!(assortativity(&star).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tree_invariants() {
        // MST-shaped graph: no triangles, leaf betweenness zero
        let tree = graph(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6)]);
        let report = compute_metrics(&tree).unwrap();
        assert_eq!(report.avg_clustering, 0.0);
        for v in 0..7 {
            if tree.degree(v) == 1 {
                assert_eq!(report.betweenness[v], 0.0);
            }
        }
        // betweenness sum identity on trees: sum over pairs of (d(u,w) - 1)
        let total: f64 = report.betweenness.iter().sum();
        let t = all_pairs_distances(&tree);
        let mut expect = 0.0;
        for u in 0..7 {
            for w in (u + 1)..7 {
                expect += (t.get(u, w).unwrap() - 1) as f64;
            }
        }
        assert_abs_diff_eq!(total, expect, epsilon = 1e-12);
    }

    #[test]
    fn permutation_equivariance() {
        let edges = [(0u32, 1u32), (1, 2), (2, 3), (3, 0), (0, 2)];
        let g = graph(4, &edges);
        // relabel via the permutation v -> (v + 1) % 4
        let perm = |v: u32| (v + 1) % 4;
        let edges2: Vec<(u32, u32)> = edges.iter().map(|&(u, v)| (perm(u), perm(v))).collect();
        let g2 = graph(4, &edges2);
        let r1 = compute_metrics(&g).unwrap();
        let r2 = compute_metrics(&g2).unwrap();
        for v in 0..4usize {
            let w = perm(v as u32) as usize;
            assert_eq!(r1.degree[v], r2.degree[w]);
            assert_abs_diff_eq!(r1.betweenness[v], r2.betweenness[w], epsilon = 1e-12);
            assert_abs_diff_eq!(r1.closeness[v], r2.closeness[w], epsilon = 1e-12);
            assert_eq!(r1.eccentricity[v], r2.eccentricity[w]);
        }
        assert_eq!(r1.assortativity, r2.assortativity);
        assert_abs_diff_eq!(
            r1.char_path_length.unwrap(),
            r2.char_path_length.unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_graph_reductions() {
        let g = graph(3, &[]);
        let r = compute_metrics(&g).unwrap();
        assert_eq!(r.avg_degree, 0.0);
        assert_eq!(r.char_path_length, None);
        assert_eq!(r.avg_eccentricity, None);
        assert_eq!(r.avg_eigenvector, None);
        assert_eq!(r.assortativity, None);
        assert_eq!(r.avg_closeness, 0.0);
    }
}
