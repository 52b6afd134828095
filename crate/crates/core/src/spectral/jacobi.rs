//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use crate::error::{Error, Result};

/// Sweep limit before giving up.
pub const MAX_SWEEPS: usize = 100;
/// Convergence when `off(A) <= REL_TOL * ||A||_F`.
pub const REL_TOL: f64 = 1e-12;

/// Eigenvalues in nondecreasing order, with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Eigenvalues only, nondecreasing.
pub fn eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let (values, _) = jacobi(a, n, false)?;
    Ok(values)
}

pub fn eigen_decomposition(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    let (values, v) = jacobi(a, n, true)?;
    let v = v.expect("vectors requested");
    // Column k of V holds the eigenvector of the k-th diagonal entry.
    let mut order: Vec<usize> = (0..n).collect();
    let diag = values;
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|r| v[r * n + k]).collect()).collect();
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Returns the diagonal after convergence (unsorted unless `vectors` is false,
/// in which case it is sorted) and optionally the accumulated rotations.
fn jacobi(input: &[f64], n: usize, vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if input.len() != n * n {
        return Err(Error::InvalidArgument(format!("matrix has {} entries, expected {}", input.len(), n * n)));
    }
    let mut a = input.to_vec();
    let mut v = if vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };

    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = REL_TOL * frob;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual: off });
        }
        sweeps += 1;

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[r * n + p];
                    let h = a[r * n + q];
                    let rp = g - s * (h + g * tau);
                    let rq = h + s * (g - h * tau);
                    a[r * n + p] = rp;
                    a[p * n + r] = rp;
                    a[r * n + q] = rq;
                    a[q * n + r] = rq;
                }

                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let g = v[r * n + p];
                        let h = v[r * n + q];
                        v[r * n + p] = g - s * (h + g * tau);
                        v[r * n + q] = h + s * (g - h * tau);
                    }
                }
            }
        }
    }

    let mut diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    if v.is_none() {
        diag.sort_by(f64::total_cmp);
    }
    Ok((diag, v))
}
