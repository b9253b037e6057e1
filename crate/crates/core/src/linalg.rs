//! Dense complex matrix helpers shared by every module.
//!
//! `CMatrix` is the universal carrier for operators, channels and states.
//! Everything here is a thin layer over `faer`; the sparse type at the bottom
//! exists because the cooling Kraus operators have a handful of nonzeros per
//! row and are applied hundreds of times per trajectory.

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

pub type CMatrix = Mat<c64>;

pub const I: c64 = c64 { re: 0.0, im: 1.0 };

#[inline]
pub fn cr(re: f64) -> c64 {
    c64::new(re, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    Mat::from_fn(n, n, |i, j| if i == j { cr(1.0) } else { cr(0.0) })
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { cr(d[i]) } else { cr(0.0) })
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint().to_owned()
}

pub fn scale(a: &CMatrix, s: c64) -> CMatrix {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// Kronecker product `a ⊗ b` with `a` as the slow (most significant) index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    let mut out = zeros(ar * br, ac * bc);
    for ja in 0..ac {
        for ia in 0..ar {
            let x = a[(ia, ja)];
            if x == cr(0.0) {
                continue;
            }
            for jb in 0..bc {
                for ib in 0..br {
                    out[(ia * br + ib, ja * bc + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry magnitude.
pub fn max_abs(a: &CMatrix) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// `max |A - A†|`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    let n = a.nrows();
    if n != a.ncols() {
        return f64::INFINITY;
    }
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

/// `max |U†U - 1|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    max_abs_diff(&g, &identity(u.ncols()))
}

pub fn trace(a: &CMatrix) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|x| x.re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn eigvalsh(a: &CMatrix) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigenvalue computation failed: {e:?}")))
}

/// True when a + shift·1 admits a Cholesky factor, i.e. λ_min(a) > −shift
/// up to rounding. Much cheaper than a full eigensolve.
pub fn cholesky_certifies(a: &CMatrix, shift: f64) -> bool {
    let n = a.nrows();
    let shifted = CMatrix::from_fn(n, n, |r, c| if r == c { a[(r, c)] + cr(shift) } else { a[(r, c)] });
    shifted.llt(Side::Lower).is_ok()
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::NumericalFailure(format!("svd failed: {e:?}")))
}

/// Row-major copy of a dense matrix, for row-wise access.
#[derive(Clone, Debug)]
pub struct RowMajor {
    nrows: usize,
    ncols: usize,
    data: Vec<c64>,
}

impl RowMajor {
    pub fn new(a: &CMatrix) -> Self {
        let (nrows, ncols) = (a.nrows(), a.ncols());
        let mut data = vec![cr(0.0); nrows * ncols];
        for c in 0..ncols {
            for (r, x) in a.col(c).iter().enumerate() {
                data[r * ncols + c] = *x;
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn row(&self, r: usize) -> &[c64] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }
}

/// Row-compressed sparse complex matrix. Only what the Kraus paths need.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<(usize, Vec<(usize, c64)>)>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, c64)]) -> Self {
        let mut dense_rows: std::collections::BTreeMap<usize, std::collections::BTreeMap<usize, c64>> =
            Default::default();
        for &(r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            *dense_rows.entry(r).or_default().entry(c).or_insert(cr(0.0)) += v;
        }
        let rows = dense_rows
            .into_iter()
            .map(|(r, cols)| (r, cols.into_iter().filter(|(_, v)| *v != cr(0.0)).collect::<Vec<_>>()))
            .filter(|(_, cols)| !cols.is_empty())
            .collect();
        Self { nrows, ncols, rows }
    }

    pub fn from_dense(a: &CMatrix) -> Self {
        let mut trip = Vec::new();
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                if a[(i, j)] != cr(0.0) {
                    trip.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &trip)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|(_, c)| c.len()).sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = zeros(self.nrows, self.ncols);
        for (r, cols) in &self.rows {
            for &(c, v) in cols {
                out[(*r, c)] = v;
            }
        }
        out
    }

    /// `out += S A S†` for square `A`.
    pub fn sandwich_add(&self, a: &CMatrix, out: &mut CMatrix) {
        self.sandwich_add_rows(&RowMajor::new(a), out);
    }

    /// As `sandwich_add`, with `a` already copied row-major so several
    /// operators can share one copy.
    pub fn sandwich_add_rows(&self, a: &RowMajor, out: &mut CMatrix) {
        let n = a.ncols;
        debug_assert_eq!(self.ncols, a.nrows);
        // tmp[k] = row r_k of S·A
        let tmp: Vec<Vec<c64>> = self
            .rows
            .iter()
            .map(|(_, cols)| {
                let mut row = vec![cr(0.0); n];
                for &(k, s) in cols {
                    for (x, y) in row.iter_mut().zip(a.row(k)) {
                        *x += s * y;
                    }
                }
                row
            })
            .collect();
        for (c, cols) in &self.rows {
            let mut col = out.col_mut(*c);
            for (ti, (r, _)) in self.rows.iter().enumerate() {
                let row = &tmp[ti];
                let mut acc = cr(0.0);
                for &(k, s) in cols {
                    acc += row[k] * s.conj();
                }
                col[*r] += acc;
            }
        }
    }

    /// `out += s·S`.
    pub fn add_scaled_to(&self, out: &mut CMatrix, s: c64) {
        for (r, cols) in &self.rows {
            for &(c, v) in cols {
                out[(*r, c)] += s * v;
            }
        }
    }

    /// `S† S`, dense.
    pub fn gram(&self) -> CMatrix {
        let mut out = zeros(self.ncols, self.ncols);
        for (_, cols) in &self.rows {
            for &(i, a) in cols {
                for &(j, b) in cols {
                    out[(i, j)] += a.conj() * b;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: f64) -> CMatrix {
        Mat::from_fn(n, n, |i, j| {
            c64::new(((i * 7 + j) as f64 * seed).sin(), ((i + 3 * j) as f64 * seed).cos())
        })
    }

    #[test]
    fn cholesky_certificate_tracks_min_eigenvalue() {
        let a = diag_real(&[1.0, 0.5, -1e-6]);
        assert!(!cholesky_certifies(&a, 1e-8));
        assert!(cholesky_certifies(&a, 1e-5));
        assert!(cholesky_certifies(&identity(4), 0.0));
    }

    #[test]
    fn kron_matches_index_formula() {
        let a = sample(2, 0.3);
        let b = sample(3, 0.7);
        let k = kron(&a, &b);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(k[(i, j)], a[(i / 3, j / 3)] * b[(i % 3, j % 3)]);
            }
        }
    }

    #[test]
    fn sparse_sandwich_matches_dense() {
        let s_dense = Mat::from_fn(6, 6, |i, j| {
            if (i + 2 * j) % 4 == 0 {
                c64::new(i as f64 + 1.0, j as f64 - 2.0)
            } else {
                cr(0.0)
            }
        });
        let s = SparseMatrix::from_dense(&s_dense);
        let a = sample(6, 0.41);
        let mut out = zeros(6, 6);
        s.sandwich_add(&a, &mut out);
        let expect = &s_dense * &a * s_dense.adjoint();
        assert!(max_abs_diff(&out, &expect) < 1e-12);
        assert!(max_abs_diff(&s.gram(), &(s_dense.adjoint() * &s_dense)) < 1e-12);
        assert_eq!(s.to_dense(), s_dense);
    }

    #[test]
    fn eigh_reconstructs() {
        let a = sample(5, 0.9);
        let h = &a + a.adjoint();
        let (w, v) = eigh(&h).unwrap();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        let d = diag_real(&w);
        let back = &v * d * v.adjoint();
        assert!(max_abs_diff(&back, &h) < 1e-12);
    }
}
