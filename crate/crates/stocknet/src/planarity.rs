//! Planarity testing with witnesses.
//!
//! The decision procedure is the left-right planarity test (Brandes'
//! formulation, following the networkx reference implementation) running in
//! O(V + E) per call after adjacency sorting. A positive answer carries a
//! combinatorial embedding (clockwise neighbor rotations); a negative answer
//! carries an edge-minimal non-planar subgraph, which is always a K5 or
//! K3,3 subdivision.

use std::collections::HashMap;

use crate::graph::UnweightedGraph;

const NONE: u32 = u32::MAX;
const UNSET: u32 = u32::MAX;

/// Combinatorial embedding: for each node, its neighbors in clockwise order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub rotations: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KuratowskiKind {
    K5,
    K33,
}

/// Edge-minimal non-planar subgraph: a subdivision of K5 or K3,3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KuratowskiWitness {
    pub kind: KuratowskiKind,
    pub edges: Vec<(u32, u32)>,
    /// The five (K5) or six (K3,3) subdivision branch vertices.
    pub branch_vertices: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanarityWitness {
    Embedding(Embedding),
    Kuratowski(KuratowskiWitness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarityReport {
    pub planar: bool,
    pub witness: PlanarityWitness,
}

/// True iff the simple graph is planar. No witness is constructed.
pub fn is_planar(n: usize, edges: &[(u32, u32)]) -> bool {
    Lr::new(n, edges).run(false).is_some()
}

/// Planarity decision plus witness for the given simple graph.
pub fn check(n: usize, edges: &[(u32, u32)]) -> PlanarityReport {
    match Lr::new(n, edges).run(true) {
        Some(Some(embedding)) => PlanarityReport {
            planar: true,
            witness: PlanarityWitness::Embedding(embedding),
        },
        Some(None) => unreachable!("embedding requested"),
        None => PlanarityReport {
            planar: false,
            witness: PlanarityWitness::Kuratowski(kuratowski_witness(n, edges)),
        },
    }
}

/// Planarity report for an [`UnweightedGraph`].
pub fn check_graph(g: &UnweightedGraph) -> PlanarityReport {
    check(g.n(), &g.edges())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Interval {
    low: u32,
    high: u32,
}

impl Interval {
    const EMPTY: Interval = Interval { low: NONE, high: NONE };

    fn is_empty(&self) -> bool {
        self.low == NONE && self.high == NONE
    }
}

#[derive(Debug, Clone, Copy)]
struct ConflictPair {
    l: Interval,
    r: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.l, &mut self.r);
    }
}

/// State of the left-right test. Edge attributes are indexed by undirected
/// edge id; each edge is oriented at most once during the DFS.
struct Lr {
    n: usize,
    m: usize,
    adj: Vec<Vec<(u32, u32)>>,
    src: Vec<u32>,
    dst: Vec<u32>,
    out_edges: Vec<Vec<u32>>,
    height: Vec<u32>,
    parent_edge: Vec<u32>,
    roots: Vec<u32>,
    lowpt: Vec<u32>,
    lowpt2: Vec<u32>,
    nesting: Vec<i64>,
    ordered: Vec<Vec<u32>>,
    stack: Vec<ConflictPair>,
    stack_bottom: Vec<usize>,
    lowpt_edge: Vec<u32>,
    ref_: Vec<u32>,
    side: Vec<i8>,
}

impl Lr {
    fn new(n: usize, edges: &[(u32, u32)]) -> Self {
        let m = edges.len();
        let mut adj = vec![Vec::new(); n];
        for (eid, &(u, v)) in edges.iter().enumerate() {
            debug_assert!(u != v, "self-loop");
            adj[u as usize].push((v, eid as u32));
            adj[v as usize].push((u, eid as u32));
        }
        Lr {
            n,
            m,
            adj,
            src: vec![NONE; m],
            dst: vec![NONE; m],
            out_edges: vec![Vec::new(); n],
            height: vec![UNSET; n],
            parent_edge: vec![NONE; n],
            roots: Vec::new(),
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting: vec![0; m],
            ordered: Vec::new(),
            stack: Vec::new(),
            stack_bottom: vec![0; m],
            lowpt_edge: vec![NONE; m],
            ref_: vec![NONE; m],
            side: vec![1; m],
        }
    }

    /// `None` if non-planar; `Some(None)` if planar without embedding;
    /// `Some(Some(embedding))` if planar and an embedding was requested.
    fn run(mut self, build_embedding: bool) -> Option<Option<Embedding>> {
        if self.n > 2 && self.m > 3 * self.n - 6 {
            return None;
        }

        for v in 0..self.n as u32 {
            if self.height[v as usize] == UNSET {
                self.height[v as usize] = 0;
                self.roots.push(v);
                self.dfs_orientation(v);
            }
        }

        self.ordered = (0..self.n)
            .map(|v| {
                let mut eids = self.out_edges[v].clone();
                eids.sort_by_key(|&e| self.nesting[e as usize]);
                eids
            })
            .collect();
        for root in self.roots.clone() {
            if !self.dfs_testing(root) {
                return None;
            }
        }
        if !build_embedding {
            return Some(None);
        }

        let mut old_ref = vec![NONE; self.m];
        for e in 0..self.m as u32 {
            if self.src[e as usize] != NONE {
                let s = self.resolve_sign(e, &mut old_ref);
                self.nesting[e as usize] *= s as i64;
            }
        }
        for v in 0..self.n {
            self.ordered[v] = self.out_edges[v].clone();
            self.ordered[v].sort_by_key(|&e| self.nesting[e as usize]);
        }

        let mut emb = HalfEdges::new(self.n);
        for v in 0..self.n as u32 {
            let mut prev = NONE;
            for &eid in &self.ordered[v as usize] {
                let w = self.dst[eid as usize];
                if prev == NONE {
                    emb.add_first_out(v, w);
                } else {
                    emb.insert_cw_next(v, w, prev);
                }
                prev = w;
            }
        }
        let mut left_ref = vec![NONE; self.n];
        let mut right_ref = vec![NONE; self.n];
        for root in self.roots.clone() {
            self.dfs_embedding(root, &mut emb, &mut left_ref, &mut right_ref);
        }
        Some(Some(emb.into_embedding()))
    }

    fn dfs_orientation(&mut self, root: u32) {
        let mut ind = vec![0usize; self.n];
        let mut skip_init = vec![false; self.m];
        let mut dfs_stack = vec![root];

        while let Some(v) = dfs_stack.pop() {
            let e = self.parent_edge[v as usize];
            let mut descended = false;

            while ind[v as usize] < self.adj[v as usize].len() {
                let (w, eid) = self.adj[v as usize][ind[v as usize]];
                let (w, eid) = (w, eid as usize);

                if !skip_init[eid] {
                    if self.src[eid] != NONE {
                        ind[v as usize] += 1;
                        continue; // already oriented from the other side
                    }
                    self.src[eid] = v;
                    self.dst[eid] = w;
                    self.out_edges[v as usize].push(eid as u32);
                    self.lowpt[eid] = self.height[v as usize];
                    self.lowpt2[eid] = self.height[v as usize];
                    if self.height[w as usize] == UNSET {
                        // tree edge
                        self.parent_edge[w as usize] = eid as u32;
                        self.height[w as usize] = self.height[v as usize] + 1;
                        dfs_stack.push(v);
                        dfs_stack.push(w);
                        skip_init[eid] = true;
                        descended = true;
                        break;
                    }
                    // back edge
                    self.lowpt[eid] = self.height[w as usize];
                }

                self.nesting[eid] = 2 * self.lowpt[eid] as i64;
                if self.lowpt2[eid] < self.height[v as usize] {
                    self.nesting[eid] += 1; // chordal
                }

                if e != NONE {
                    let e = e as usize;
                    if self.lowpt[eid] < self.lowpt[e] {
                        self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[eid]);
                        self.lowpt[e] = self.lowpt[eid];
                    } else if self.lowpt[eid] > self.lowpt[e] {
                        self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[eid]);
                    } else {
                        self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[eid]);
                    }
                }
                ind[v as usize] += 1;
            }
            let _ = descended;
        }
    }

    fn conflicting(&self, i: &Interval, b: u32) -> bool {
        if i.is_empty() {
            return false;
        }
        debug_assert!(i.high != NONE);
        self.lowpt[i.high as usize] > self.lowpt[b as usize]
    }

    fn pair_lowest(&self, p: &ConflictPair) -> u32 {
        match (p.l.is_empty(), p.r.is_empty()) {
            (true, true) => UNSET,
            (true, false) => self.lowpt[p.r.low as usize],
            (false, true) => self.lowpt[p.l.low as usize],
            (false, false) => self.lowpt[p.l.low as usize].min(self.lowpt[p.r.low as usize]),
        }
    }

    fn dfs_testing(&mut self, root: u32) -> bool {
        let mut ind = vec![0usize; self.n];
        let mut skip_init = vec![false; self.m];
        let mut dfs_stack = vec![root];

        while let Some(v) = dfs_stack.pop() {
            let e = self.parent_edge[v as usize];
            let mut skip_final = false;

            while ind[v as usize] < self.ordered[v as usize].len() {
                let i = ind[v as usize];
                let eid = self.ordered[v as usize][i];
                let w = self.dst[eid as usize];

                if !skip_init[eid as usize] {
                    self.stack_bottom[eid as usize] = self.stack.len();
                    if eid == self.parent_edge[w as usize] {
                        // tree edge: process the subtree first
                        dfs_stack.push(v);
                        dfs_stack.push(w);
                        skip_init[eid as usize] = true;
                        skip_final = true;
                        break;
                    }
                    // back edge
                    self.lowpt_edge[eid as usize] = eid;
                    self.stack.push(ConflictPair {
                        l: Interval::EMPTY,
                        r: Interval { low: eid, high: eid },
                    });
                }

                if self.lowpt[eid as usize] < self.height[v as usize] {
                    // eid has a return edge
                    if i == 0 {
                        debug_assert!(e != NONE);
                        self.lowpt_edge[e as usize] = self.lowpt_edge[eid as usize];
                    } else if !self.add_constraints(eid, e) {
                        return false;
                    }
                }
                ind[v as usize] += 1;
            }

            if !skip_final && e != NONE {
                self.remove_back_edges(e);
            }
        }
        true
    }

    fn add_constraints(&mut self, ei: u32, e: u32) -> bool {
        let e = e as usize;
        let mut p = ConflictPair { l: Interval::EMPTY, r: Interval::EMPTY };

        // merge return edges of ei into p.r
        loop {
            let mut q = self.stack.pop().expect("conflict stack underflow");
            if !q.l.is_empty() {
                q.swap();
            }
            if !q.l.is_empty() {
                return false; // not planar
            }
            debug_assert!(q.r.low != NONE);
            if self.lowpt[q.r.low as usize] > self.lowpt[e] {
                if p.r.is_empty() {
                    p.r = q.r;
                } else {
                    self.ref_[p.r.low as usize] = q.r.high;
                    p.r.low = q.r.low;
                }
            } else {
                // align
                self.ref_[q.r.low as usize] = self.lowpt_edge[e];
            }
            if self.stack.len() == self.stack_bottom[ei as usize] {
                break;
            }
        }

        // merge conflicting return edges of earlier siblings into p.l
        while let Some(top) = self.stack.last() {
            let (cl, cr) = (self.conflicting(&top.l, ei), self.conflicting(&top.r, ei));
            if !cl && !cr {
                break;
            }
            let mut q = self.stack.pop().unwrap();
            if self.conflicting(&q.r, ei) {
                q.swap();
            }
            if self.conflicting(&q.r, ei) {
                return false; // not planar
            }
            if p.r.low != NONE {
                self.ref_[p.r.low as usize] = q.r.high;
            }
            if q.r.low != NONE {
                p.r.low = q.r.low;
            }
            if p.l.is_empty() {
                p.l.high = q.l.high;
            } else if p.l.low != NONE {
                self.ref_[p.l.low as usize] = q.l.high;
            }
            p.l.low = q.l.low;
        }

        if !(p.l.is_empty() && p.r.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: u32) {
        let u = self.src[e as usize];

        // drop entire conflict pairs returning to the parent
        while let Some(top) = self.stack.last() {
            if self.pair_lowest(top) != self.height[u as usize] {
                break;
            }
            let p = self.stack.pop().unwrap();
            if p.l.low != NONE {
                self.side[p.l.low as usize] = -1;
            }
        }

        if let Some(mut p) = self.stack.pop() {
            // trim left interval
            while p.l.high != NONE && self.dst[p.l.high as usize] == u {
                p.l.high = self.ref_[p.l.high as usize];
            }
            if p.l.high == NONE && p.l.low != NONE {
                self.ref_[p.l.low as usize] = p.r.low;
                self.side[p.l.low as usize] = -1;
                p.l.low = NONE;
            }
            // trim right interval
            while p.r.high != NONE && self.dst[p.r.high as usize] == u {
                p.r.high = self.ref_[p.r.high as usize];
            }
            if p.r.high == NONE && p.r.low != NONE {
                self.ref_[p.r.low as usize] = p.l.low;
                self.side[p.r.low as usize] = -1;
                p.r.low = NONE;
            }
            self.stack.push(p);
        }

        // side of e is the side of a highest return edge
        if self.lowpt[e as usize] < self.height[u as usize] {
            if let Some(top) = self.stack.last() {
                let hl = top.l.high;
                let hr = top.r.high;
                self.ref_[e as usize] =
                    if hl != NONE && (hr == NONE || self.lowpt[hl as usize] > self.lowpt[hr as usize]) {
                        hl
                    } else {
                        hr
                    };
            }
        }
    }

    fn resolve_sign(&mut self, e: u32, old_ref: &mut [u32]) -> i8 {
        let mut dfs_stack = vec![e];
        while let Some(x) = dfs_stack.pop() {
            let x = x as usize;
            if self.ref_[x] != NONE {
                dfs_stack.push(x as u32);
                dfs_stack.push(self.ref_[x]);
                old_ref[x] = self.ref_[x];
                self.ref_[x] = NONE;
            } else if old_ref[x] != NONE {
                self.side[x] *= self.side[old_ref[x] as usize];
                old_ref[x] = NONE;
            }
        }
        self.side[e as usize]
    }

    fn dfs_embedding(
        &mut self,
        root: u32,
        emb: &mut HalfEdges,
        left_ref: &mut [u32],
        right_ref: &mut [u32],
    ) {
        let mut ind = vec![0usize; self.n];
        let mut dfs_stack = vec![root];

        while let Some(v) = dfs_stack.pop() {
            while ind[v as usize] < self.ordered[v as usize].len() {
                let eid = self.ordered[v as usize][ind[v as usize]];
                ind[v as usize] += 1;
                let w = self.dst[eid as usize];

                if eid == self.parent_edge[w as usize] {
                    // tree edge
                    emb.add_first(w, v);
                    left_ref[v as usize] = w;
                    right_ref[v as usize] = w;
                    dfs_stack.push(v);
                    dfs_stack.push(w);
                    break;
                }
                // back edge
                if self.side[eid as usize] == 1 {
                    emb.insert_cw_next(w, v, right_ref[w as usize]);
                } else {
                    emb.insert_ccw_next(w, v, left_ref[w as usize]);
                    left_ref[w as usize] = v;
                }
            }
        }
    }
}

/// Circular rotations under construction, as cw/ccw successor maps over
/// half-edges.
struct HalfEdges {
    cw: HashMap<(u32, u32), u32>,
    ccw: HashMap<(u32, u32), u32>,
    leftmost: Vec<u32>,
}

impl HalfEdges {
    fn new(n: usize) -> Self {
        HalfEdges { cw: HashMap::new(), ccw: HashMap::new(), leftmost: vec![NONE; n] }
    }

    fn add_first_out(&mut self, v: u32, w: u32) {
        self.cw.insert((v, w), w);
        self.ccw.insert((v, w), w);
        self.leftmost[v as usize] = w;
    }

    /// Insert `w` as the clockwise successor of `(v, reference)`.
    fn insert_cw_next(&mut self, v: u32, w: u32, reference: u32) {
        let ref_cw = self.cw[&(v, reference)];
        self.cw.insert((v, reference), w);
        self.cw.insert((v, w), ref_cw);
        self.ccw.insert((v, w), reference);
        self.ccw.insert((v, ref_cw), w);
    }

    /// Insert `w` as the counterclockwise successor of `(v, reference)`.
    fn insert_ccw_next(&mut self, v: u32, w: u32, reference: u32) {
        let ref_ccw = self.ccw[&(v, reference)];
        self.ccw.insert((v, reference), w);
        self.ccw.insert((v, w), ref_ccw);
        self.cw.insert((v, w), reference);
        self.cw.insert((v, ref_ccw), w);
        if self.leftmost[v as usize] == reference {
            self.leftmost[v as usize] = w;
        }
    }

    /// Insert `w` as the new leftmost neighbor of `v`.
    fn add_first(&mut self, v: u32, w: u32) {
        if self.leftmost[v as usize] == NONE {
            self.add_first_out(v, w);
        } else {
            self.insert_ccw_next(v, w, self.leftmost[v as usize]);
        }
    }

    fn into_embedding(self) -> Embedding {
        let n = self.leftmost.len();
        let mut rotations = Vec::with_capacity(n);
        for v in 0..n as u32 {
            let mut rot = Vec::new();
            let start = self.leftmost[v as usize];
            if start != NONE {
                let mut cur = start;
                loop {
                    rot.push(cur);
                    cur = self.cw[&(v, cur)];
                    if cur == start {
                        break;
                    }
                }
            }
            rotations.push(rot);
        }
        Embedding { rotations }
    }
}

/// Validates a rotation system: every rotation is a permutation of the
/// node's neighbors and the face count satisfies Euler's formula on every
/// connected component. Returns the total face count.
pub fn validate_embedding(n: usize, edges: &[(u32, u32)], emb: &Embedding) -> Result<usize, String> {
    if emb.rotations.len() != n {
        return Err("rotation count != node count".into());
    }
    let mut neighbors = vec![Vec::new(); n];
    for &(u, v) in edges {
        neighbors[u as usize].push(v);
        neighbors[v as usize].push(u);
    }
    for v in 0..n {
        let mut a = neighbors[v].clone();
        let mut b = emb.rotations[v].clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(format!("rotation of node {v} is not a permutation of its neighbors"));
        }
    }

    // ccw successor map
    let mut ccw = HashMap::new();
    for (v, rot) in emb.rotations.iter().enumerate() {
        let k = rot.len();
        for i in 0..k {
            ccw.insert((v as u32, rot[i]), rot[(i + k - 1) % k]);
        }
    }

    // connected components
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(u) = stack.pop() {
            for &w in &neighbors[u] {
                if comp[w as usize] == usize::MAX {
                    comp[w as usize] = ncomp;
                    stack.push(w as usize);
                }
            }
        }
        ncomp += 1;
    }

    // face orbits under (v, w) -> (w, ccw[w][v])
    let mut visited: HashMap<(u32, u32), bool> = HashMap::new();
    let mut faces_per_comp = vec![0usize; ncomp];
    for &(a, b) in edges {
        for (u, w) in [(a, b), (b, a)] {
            if visited.contains_key(&(u, w)) {
                continue;
            }
            faces_per_comp[comp[u as usize]] += 1;
            let (mut cu, mut cv) = (u, w);
            loop {
                visited.insert((cu, cv), true);
                let next = ccw[&(cv, cu)];
                cu = cv;
                cv = next;
                if (cu, cv) == (u, w) {
                    break;
                }
            }
        }
    }

    let mut nodes_per_comp = vec![0usize; ncomp];
    for v in 0..n {
        nodes_per_comp[comp[v]] += 1;
    }
    let mut edges_per_comp = vec![0usize; ncomp];
    for &(u, _) in edges {
        edges_per_comp[comp[u as usize]] += 1;
    }
    for c in 0..ncomp {
        if nodes_per_comp[c] < 2 {
            continue;
        }
        let (v, e, f) = (nodes_per_comp[c], edges_per_comp[c], faces_per_comp[c]);
        if v + f != e + 2 {
            return Err(format!(
                "component {c}: V={v} E={e} F={f} violates Euler's formula"
            ));
        }
    }
    Ok(faces_per_comp.iter().sum())
}

/// Extracts an edge-minimal non-planar subgraph by deleting every edge whose
/// removal keeps the graph non-planar. The result is a Kuratowski
/// subdivision; smoothing its degree-2 chains classifies it.
fn kuratowski_witness(n: usize, edges: &[(u32, u32)]) -> KuratowskiWitness {
    let mut h = edges.to_vec();
    debug_assert!(!is_planar(n, &h));

    // while the edge count alone proves non-planarity, deletion needs no test
    if n >= 3 {
        while h.len() > 3 * n - 5 {
            h.pop();
        }
    }
    let mut i = 0;
    while i < h.len() {
        let mut trial = h.clone();
        trial.remove(i);
        if !is_planar(n, &trial) {
            h = trial;
        } else {
            i += 1;
        }
    }

    let mut degree = vec![0usize; n];
    for &(u, v) in &h {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let branch_vertices: Vec<u32> =
        (0..n as u32).filter(|&v| degree[v as usize] >= 3).collect();
    let kind = match branch_vertices.len() {
        5 => {
            debug_assert!(branch_vertices.iter().all(|&v| degree[v as usize] == 4));
            KuratowskiKind::K5
        }
        6 => {
            debug_assert!(branch_vertices.iter().all(|&v| degree[v as usize] == 3));
            KuratowskiKind::K33
        }
        k => unreachable!("minimal non-planar subgraph with {k} branch vertices"),
    };
    KuratowskiWitness { kind, edges: h, branch_vertices }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> Vec<(u32, u32)> {
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
    }

    fn k33() -> Vec<(u32, u32)> {
        let mut e = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                e.push((a, b));
            }
        }
        e
    }

    #[test]
    fn small_complete_graphs() {
        assert!(is_planar(1, &[]));
        assert!(is_planar(2, &complete(2)));
        assert!(is_planar(4, &complete(4)));
        assert!(!is_planar(5, &complete(5)));
        assert!(!is_planar(6, &complete(6)));
    }

    #[test]
    fn k33_and_k5_witnesses() {
        let r = check(6, &k33());
        assert!(!r.planar);
        match r.witness {
            PlanarityWitness::Kuratowski(w) => {
                assert_eq!(w.kind, KuratowskiKind::K33);
                assert_eq!(w.edges.len(), 9);
                assert_eq!(w.branch_vertices.len(), 6);
            }
            _ => panic!("expected a Kuratowski witness"),
        }
        let r = check(5, &complete(5));
        match r.witness {
            PlanarityWitness::Kuratowski(w) => {
                assert_eq!(w.kind, KuratowskiKind::K5);
                assert_eq!(w.edges.len(), 10);
                assert_eq!(w.branch_vertices, vec![0, 1, 2, 3, 4]);
            }
            _ => panic!("expected a Kuratowski witness"),
        }
    }

    #[test]
    fn subdivided_k5_is_recognized() {
        // K5 with edge (0,1) subdivided through node 5
        let mut e: Vec<(u32, u32)> = complete(5).into_iter().filter(|&p| p != (0, 1)).collect();
        e.push((0, 5));
        e.push((5, 1));
        let r = check(6, &e);
        assert!(!r.planar);
        match r.witness {
            PlanarityWitness::Kuratowski(w) => {
                assert_eq!(w.kind, KuratowskiKind::K5);
                assert_eq!(w.edges.len(), 11);
                assert_eq!(w.branch_vertices, vec![0, 1, 2, 3, 4]);
            }
            _ => panic!("expected a Kuratowski witness"),
        }
    }

    #[test]
    fn k4_embedding_is_valid() {
        let edges = complete(4);
        let r = check(4, &edges);
        assert!(r.planar);
        match r.witness {
            PlanarityWitness::Embedding(emb) => {
                let faces = validate_embedding(4, &edges, &emb).unwrap();
                assert_eq!(faces, 4); // tetrahedron
            }
            _ => panic!("expected an embedding"),
        }
    }

    #[test]
    fn petersen_graph_is_non_planar() {
        let outer: Vec<(u32, u32)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let spokes: Vec<(u32, u32)> = (0..5).map(|i| (i, i + 5)).collect();
        let inner: Vec<(u32, u32)> = (0..5).map(|i| (i + 5, (i + 2) % 5 + 5)).collect();
        let edges: Vec<_> = outer.into_iter().chain(spokes).chain(inner).collect();
        let r = check(10, &edges);
        assert!(!r.planar);
        match r.witness {
            PlanarityWitness::Kuratowski(w) => assert_eq!(w.kind, KuratowskiKind::K33),
            _ => panic!("expected a Kuratowski witness"),
        }
    }

    #[test]
    fn grid_and_disconnected_graphs() {
        // 3x3 grid
        let mut e = Vec::new();
        for r in 0..3u32 {
            for c in 0..3u32 {
                let v = r * 3 + c;
                if c + 1 < 3 {
                    e.push((v, v + 1));
                }
                if r + 1 < 3 {
                    e.push((v, v + 3));
                }
            }
        }
        let rep = check(9, &e);
        assert!(rep.planar);
        if let PlanarityWitness::Embedding(emb) = rep.witness {
            validate_embedding(9, &e, &emb).unwrap();
        }
        // two disjoint triangles plus an isolated node
        let e2 = vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
        let rep2 = check(7, &e2);
        assert!(rep2.planar);
        if let PlanarityWitness::Embedding(emb) = rep2.witness {
            validate_embedding(7, &e2, &emb).unwrap();
        }
        // K5 plus a separate triangle is still non-planar
        let mut e3 = complete(5);
        e3.extend_from_slice(&[(5, 6), (6, 7), (7, 5)]);
        assert!(!is_planar(8, &e3));
    }

    #[test]
    fn maximal_planar_bound() {
        // triangulation on 6 nodes: octahedron, 3n-6 = 12 edges
        let octa = vec![
            (0, 1), (0, 2), (0, 3), (0, 4),
            (5, 1), (5, 2), (5, 3), (5, 4),
            (1, 2), (2, 3), (3, 4), (4, 1),
        ];
        let rep = check(6, &octa);
        assert!(rep.planar);
        if let PlanarityWitness::Embedding(emb) = rep.witness {
            let faces = validate_embedding(6, &octa, &emb).unwrap();
            assert_eq!(faces, 8);
        }
        // adding any edge to a triangulation breaks planarity
        let mut e = octa.clone();
        e.push((1, 3));
        assert!(!is_planar(6, &e));
    }
}
