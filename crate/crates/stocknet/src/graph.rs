//! Unweighted graphs produced by the network filters.

use std::io::Write;

use crate::error::{Error, Result};

/// Simple undirected graph over labelled nodes. Adjacency is kept both as a
/// bitset (fast membership and neighborhood intersection) and as sorted
/// neighbor lists (fast traversal).
#[derive(Debug, Clone, PartialEq)]
pub struct UnweightedGraph {
    tickers: Vec<String>,
    n: usize,
    words: usize,
    bits: Vec<u64>,
    neighbors: Vec<Vec<u32>>,
    m: usize,
}

impl UnweightedGraph {
    pub fn from_edges(tickers: Vec<String>, edges: &[(u32, u32)]) -> Result<Self> {
        let n = tickers.len();
        let words = n.div_ceil(64);
        let mut g = UnweightedGraph {
            tickers,
            n,
            words,
            bits: vec![0; n * words],
            neighbors: vec![Vec::new(); n],
            m: 0,
        };
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::validation("edge endpoint out of range"));
            }
            if u == v {
                return Err(Error::validation("self-loops are not allowed"));
            }
            if g.has_edge(u, v) {
                return Err(Error::validation(format!("duplicate edge ({u},{v})")));
            }
            g.bits[u * words + v / 64] |= 1 << (v % 64);
            g.bits[v * words + u / 64] |= 1 << (u % 64);
            g.neighbors[u].push(v as u32);
            g.neighbors[v].push(u as u32);
            g.m += 1;
        }
        for nb in &mut g.neighbors {
            nb.sort_unstable();
        }
        Ok(g)
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        2.0 * self.m as f64 / (self.n as f64 * (self.n as f64 - 1.0))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    /// Number of edges among the neighbors of `v` (triangle count at `v`).
    pub fn edges_among_neighbors(&self, v: usize) -> usize {
        let row = |x: usize| &self.bits[x * self.words..(x + 1) * self.words];
        let rv = row(v);
        let mut twice = 0u32;
        for &u in &self.neighbors[v] {
            let ru = row(u as usize);
            for w in 0..self.words {
                twice += (rv[w] & ru[w]).count_ones();
            }
        }
        twice as usize / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.neighbors[u] {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    /// Edge list CSV: `ticker_i,ticker_j` per edge.
    pub fn write_edge_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "ticker_i,ticker_j")?;
        for (u, v) in self.edges() {
            writeln!(w, "{},{}", self.tickers[u as usize], self.tickers[v as usize])?;
        }
        Ok(())
    }

    /// Dense 0/1 adjacency CSV with ticker header row and column.
    pub fn write_adjacency_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        write!(w, "adjacency")?;
        for t in &self.tickers {
            write!(w, ",{t}")?;
        }
        writeln!(w)?;
        for u in 0..self.n {
            write!(w, "{}", self.tickers[u])?;
            for v in 0..self.n {
                write!(w, ",{}", u8::from(self.has_edge(u, v)))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// True if every node can reach every other.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.neighbors[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v as usize);
                }
            }
        }
        count == self.n
    }
}

/// Placeholder tickers `N00..` for graphs built in tests and benchmarks.
pub fn index_tickers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i:02}")).collect()
}
