//! Seeded random graph generators.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spectral::graph::Graph;

/// Restarts allowed in the random regular pairing procedure.
pub const PAIRING_RESTARTS: usize = 100;

/// `G(N, M)`: exactly `m` distinct edges drawn uniformly without replacement.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let total = n * (n - 1) / 2;
    if m > total {
        return Err(Error::InvalidArgument(format!("M = {m} exceeds N(N-1)/2 = {total}")));
    }
    let mut rng = RngStream::new(seed, 0);
    let mut picks = index::sample(&mut rng, total, m).into_vec();
    picks.sort_unstable();

    // Map the linear index of the strict upper triangle back to (row, col).
    let mut edges = Vec::with_capacity(m);
    let mut row = 0;
    let mut row_start = 0;
    for k in picks {
        while k >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        edges.push((row, row + 1 + (k - row_start)));
    }
    Graph::new(n, edges)
}

/// Random `d`-regular graph by the pairing model: stubs are shuffled and
/// paired, pairs that would form a loop or a repeated edge are returned to
/// the pool and reshuffled, and the whole attempt restarts if the pool can
/// no longer be completed.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n {
        return Err(Error::InvalidArgument(format!("degree {d} must be below N = {n}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("N * d = {} must be even", n * d)));
    }
    let mut rng = RngStream::new(seed, 0);
    for _ in 0..PAIRING_RESTARTS {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            return Graph::new(n, edges);
        }
    }
    Err(Error::PairingFailed { attempts: PAIRING_RESTARTS })
}

fn try_pairing(n: usize, d: usize, rng: &mut RngStream) -> Option<Vec<(usize, usize)>> {
    let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(n * d / 2);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut order = Vec::with_capacity(n * d / 2);
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                order.push((a, b));
            } else {
                leftover.push(a);
                leftover.push(b);
            }
        }
        if !leftover.is_empty() && !completable(&edges, &leftover) {
            return None;
        }
        stubs = leftover;
    }
    Some(order)
}

/// True when some pair of distinct leftover nodes is not yet adjacent.
fn completable(edges: &HashSet<(usize, usize)>, leftover: &[usize]) -> bool {
    let mut nodes: Vec<usize> = leftover.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if !edges.contains(&(a, b)) {
                return true;
            }
        }
    }
    false
}
