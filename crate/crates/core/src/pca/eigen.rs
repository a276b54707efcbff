//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Each rotation annihilates one off-diagonal element; sweeps repeat until
//! the total off-diagonal magnitude falls below the tolerance. Accumulating
//! the rotations yields the eigenvector matrix. Robust for every real
//! symmetric matrix, and fast at the matrix orders used here (tens of
//! attributes).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("matrix entry ({i}, {j}) is not finite")]
    NotFinite { i: usize, j: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence within {0} sweeps")]
    NoConvergence(usize),
}

/// Input symmetry slack and the sweep budget.
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 50;

/// Eigenvalues and eigenvectors of a symmetric matrix, sorted by descending
/// eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the unit eigenvector paired with `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Full decomposition of a symmetric matrix (symmetric within 1e-12).
///
/// Pairs are sorted by descending eigenvalue, ties keeping the pre-sort
/// order. Sign convention: the first largest-magnitude entry of each
/// eigenvector is non-negative, so reports are byte-stable.
pub fn eigen_sym(matrix: &[Vec<f64>], tol: f64) -> Result<EigenDecomposition, EigenError> {
    if tol <= 0.0 || tol.is_nan() {
        return Err(EigenError::InvalidTolerance(tol));
    }
    let n = matrix.len();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(EigenError::NotSquare {
                row,
                got: r.len(),
                expected: n,
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !matrix[i][j].is_finite() {
                return Err(EigenError::NotFinite { i, j });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (matrix[i][j] - matrix[j][i]).abs() > SYMMETRY_TOLERANCE {
                return Err(EigenError::NotSymmetric {
                    i,
                    j,
                    a: matrix[i][j],
                    b: matrix[j][i],
                });
            }
        }
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: Vec::new(),
        });
    }

    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    // v[i][j]: component i of the j-th accumulated rotation column.
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].abs())
            .sum();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                // t = sign(theta) / (|theta| + sqrt(1 + theta^2)), the smaller
                // root of t^2 + 2t*theta - 1 = 0.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0f64).hypot(theta))
                } else {
                    -1.0 / (-theta + (1.0f64).hypot(theta))
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = aip - s * (aiq + tau * aip);
                    a[p][i] = a[i][p];
                    a[i][q] = aiq + s * (aip - tau * aiq);
                    a[q][i] = a[i][q];
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = vip - s * (viq + tau * vip);
                    row[q] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].abs())
            .sum();
        if off > tol {
            return Err(EigenError::NoConvergence(MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&j| a[j][j]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| {
            let mut column: Vec<f64> = (0..n).map(|i| v[i][j]).collect();
            fix_sign(&mut column);
            column
        })
        .collect();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Flips a vector so its first largest-magnitude entry is non-negative.
fn fix_sign(column: &mut [f64]) {
    let mut lead = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (i, &value) in column.iter().enumerate() {
        if value.abs() > best {
            best = value.abs();
            lead = i;
        }
    }
    if column[lead] < 0.0 {
        for value in column.iter_mut() {
            *value = -*value;
        }
    }
}
