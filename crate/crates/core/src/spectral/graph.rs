//! Undirected simple graphs and the `N M` / `u v` edge-list text format.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest node count accepted from edge-list text.
pub const MAX_PARSED_NODES: usize = 1 << 20;

/// An undirected simple graph on nodes `0..n`.
///
/// Edges are stored once, as `(u, v)` with `u < v`, sorted lexicographically.
/// The position of an edge in [`Graph::edges`] is its *edge index*, which the
/// random models use to key per-link draws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints and
    /// duplicate unordered pairs.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            out.push(e);
        }
        out.sort_unstable();
        Ok(Self { n, edges: out })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|b| (b - 1, b)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|a| (a, (a + 1) % n)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Neighbour lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Number of connected components, by breadth-first search.
    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Parses the edge-list format: a header line `N M` followed by exactly
    /// `M` lines `u v`. Blank lines and lines starting with `#` are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "missing `N M` header".into() })?;
        let (n, m) = parse_pair(hline, header)?;
        if n == 0 || n > MAX_PARSED_NODES {
            return Err(Error::Parse { line: hline, msg: format!("N must be in 1..={MAX_PARSED_NODES}") });
        }
        let max_edges = n.saturating_mul(n - 1) / 2;
        if m > max_edges {
            return Err(Error::Parse { line: hline, msg: format!("M = {m} exceeds N(N-1)/2 = {max_edges}") });
        }

        let mut edges = Vec::with_capacity(m);
        for (lineno, line) in lines {
            if edges.len() == m {
                return Err(Error::Parse { line: lineno, msg: "more edges than declared".into() });
            }
            edges.push(parse_pair(lineno, line)?);
        }
        if edges.len() != m {
            return Err(Error::Parse { line: 0, msg: format!("header declares {m} edges, found {}", edges.len()) });
        }
        Self::new(n, edges).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }

    /// Serializes to the edge-list format, LF line endings.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(8 * (self.edges.len() + 1));
        let _ = writeln!(s, "{} {}", self.n, self.edges.len());
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?;
        tok.parse::<usize>().map_err(|e| Error::Parse { line, msg: format!("bad {what} `{tok}`: {e}") })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(Error::Parse { line, msg: "trailing fields".into() });
    }
    Ok((a, b))
}
