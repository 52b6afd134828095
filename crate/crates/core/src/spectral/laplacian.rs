use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::spectral::graph::Graph;
use crate::spectral::jacobi::{self, SymmetricEigen};

/// Relative tolerance for "positive" eigenvalues: `lambda > TOL * max(1, lambda_N)`.
pub const CONNECTIVITY_TOL: f64 = 1e-8;

/// Dense symmetric graph Laplacian with a lazily computed, cached spectrum.
#[derive(Debug)]
pub struct Laplacian {
    n: usize,
    data: Vec<f64>,
    spectrum: OnceLock<Result<Vec<f64>>>,
}

impl Clone for Laplacian {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self { n: self.n, data: self.data.clone(), spectrum }
    }
}

impl PartialEq for Laplacian {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.data == other.data
    }
}

impl Laplacian {
    /// `L = D - A`. Entries are small integers, so row sums are exactly zero.
    pub fn from_graph(graph: &Graph) -> Self {
        let n = graph.node_count();
        let mut data = vec![0.0; n * n];
        for &(a, b) in graph.edges() {
            data[a * n + b] = -1.0;
            data[b * n + a] = -1.0;
            data[a * n + a] += 1.0;
            data[b * n + b] += 1.0;
        }
        Self::from_raw(n, data)
    }

    /// `sum_e w_e L_e` over single-edge Laplacians `L_e`.
    pub fn from_weighted_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut data = vec![0.0; n * n];
        for (a, b, w) in edges {
            data[a * n + b] -= w;
            data[b * n + a] -= w;
            data[a * n + a] += w;
            data[b * n + b] += w;
        }
        Self::from_raw(n, data)
    }

    /// Accepts an arbitrary dense matrix, checking symmetry and zero row sums
    /// to `1e-9` relative to the largest entry.
    pub fn from_matrix(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!("matrix has {} entries, expected {}", data.len(), n * n)));
        }
        let scale = data.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let row = &data[i * n..(i + 1) * n];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite entry in row {i}")));
            }
            if row.iter().sum::<f64>().abs() > 1e-9 * scale * n as f64 {
                return Err(Error::InvalidArgument(format!("row {i} does not sum to zero")));
            }
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-9 * scale {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_raw(n, data))
    }

    fn from_raw(n: usize, data: Vec<f64>) -> Self {
        Self { n, data, spectrum: OnceLock::new() }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_raw(n, vec![0.0; n * n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.n, self.data.iter().map(|v| v * factor).collect())
    }

    /// `L x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Live edges `(u, v, w)` with `u < v`, read off the negative off-diagonal.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let w = -self.data[i * self.n + j];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Eigenvalues `lambda_1 <= ... <= lambda_N`, computed once.
    pub fn eigenvalues(&self) -> Result<&[f64]> {
        self.spectrum
            .get_or_init(|| jacobi::eigenvalues(&self.data, self.n))
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }

    pub fn eigen_decomposition(&self) -> Result<SymmetricEigen> {
        jacobi::eigen_decomposition(&self.data, self.n)
    }

    /// Fiedler value `lambda_2` (0 for a single node).
    pub fn algebraic_connectivity(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.get(1).copied().unwrap_or(0.0))
    }

    /// `lambda_N`.
    pub fn spectral_radius(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.last().copied().unwrap_or(0.0))
    }

    fn zero_tol(&self) -> Result<f64> {
        Ok(CONNECTIVITY_TOL * self.spectral_radius()?.max(1.0))
    }

    pub fn is_connected(&self) -> Result<bool> {
        Ok(self.algebraic_connectivity()? > self.zero_tol()?)
    }

    /// Eigenvalues at or below the connectivity tolerance.
    pub fn zero_eigenvalue_count(&self) -> Result<usize> {
        let tol = self.zero_tol()?;
        Ok(self.eigenvalues()?.iter().filter(|&&l| l <= tol).count())
    }

    /// `alpha_opt = 2 / (lambda_2 + lambda_N)`, the weight minimising the
    /// disagreement contraction of `I - alpha L`.
    pub fn optimal_constant_weight(&self) -> Result<f64> {
        let l2 = self.algebraic_connectivity()?;
        if l2 <= self.zero_tol()? {
            return Err(Error::Disconnected { lambda2: l2 });
        }
        Ok(2.0 / (l2 + self.spectral_radius()?))
    }
}

/// `(1/N) 1^T x`.
pub fn average(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Euclidean distance from `x` to the consensus line `span{1}`.
pub fn distance_to_consensus(x: &[f64]) -> f64 {
    let m = average(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>().sqrt()
}
