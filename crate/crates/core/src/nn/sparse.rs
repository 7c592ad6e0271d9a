use ndarray::{Array2, ArrayView2};

use super::Real;

/// Compressed sparse row matrix used for neighbourhood propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> Csr<T> {
    /// Entries must be sorted by row.
    pub fn from_sorted_entries(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Self {
        let mut indptr = vec![0usize; n_rows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (r, c, v) in entries {
            debug_assert!(r < n_rows && c < n_cols);
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for r in 0..n_rows {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, r: usize) -> std::ops::Range<usize> {
        self.indptr[r]..self.indptr[r + 1]
    }

    /// `self * x`
    pub fn spmm(&self, x: &ArrayView2<T>) -> Array2<T> {
        let mut out = Array2::zeros((self.n_rows, x.ncols()));
        for r in 0..self.n_rows {
            let mut row = out.row_mut(r);
            for p in self.row(r) {
                row.scaled_add(self.values[p], &x.row(self.indices[p]));
            }
        }
        out
    }

    /// `self^T * x`, skipping zero rows of `x`.
    pub fn spmm_t(&self, x: &ArrayView2<T>) -> Array2<T> {
        let mut out = Array2::zeros((self.n_cols, x.ncols()));
        for r in 0..self.n_rows {
            let xr = x.row(r);
            if xr.iter().all(|v| v.is_zero()) {
                continue;
            }
            for p in self.row(r) {
                out.row_mut(self.indices[p]).scaled_add(self.values[p], &xr);
            }
        }
        out
    }
}

/// Indices of rows that contain a nonzero entry.
pub(crate) fn nonzero_rows<T: Real>(a: &ArrayView2<T>) -> Vec<usize> {
    a.rows()
        .into_iter()
        .enumerate()
        .filter(|(_, r)| r.iter().any(|v| !v.is_zero()))
        .map(|(i, _)| i)
        .collect()
}

/// Copies the listed rows of `a` into a compact matrix.
fn gather_rows<T: Real>(a: &ArrayView2<T>, rows: &[usize]) -> Array2<T> {
    let mut out = Array2::zeros((rows.len(), a.ncols()));
    for (k, &r) in rows.iter().enumerate() {
        out.row_mut(k).assign(&a.row(r));
    }
    out
}

/// `a * b`, exploiting zero rows of `a` when they dominate.
pub(crate) fn matmul<T: Real>(a: &ArrayView2<T>, b: &ArrayView2<T>) -> Array2<T> {
    let rows = nonzero_rows(a);
    if rows.len() * 2 >= a.nrows() {
        return a.dot(b);
    }
    let compact = gather_rows(a, &rows).dot(b);
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for (k, &r) in rows.iter().enumerate() {
        out.row_mut(r).assign(&compact.row(k));
    }
    out
}

/// `a^T * b`, summing only over rows where `b` is nonzero.
pub(crate) fn matmul_tn<T: Real>(a: &ArrayView2<T>, b: &ArrayView2<T>) -> Array2<T> {
    let rows = nonzero_rows(b);
    if rows.len() * 2 >= b.nrows() {
        return a.t().dot(b);
    }
    gather_rows(a, &rows).t().dot(&gather_rows(b, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn products_match_dense() {
        let dense = array![[0.0, 2.0, 0.0], [1.0, 0.0, 3.0]];
        let csr = Csr::from_sorted_entries(
            2,
            3,
            [(0, 1, 2.0), (1, 0, 1.0), (1, 2, 3.0)],
        );
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        assert_eq!(csr.spmm(&x.view()), dense.dot(&x));
        let y = array![[1.0, -1.0], [0.0, 0.0]];
        assert_eq!(csr.spmm_t(&y.view()), dense.t().dot(&y));
    }

    #[test]
    fn row_sparse_matmuls_match_dense() {
        let mut a = Array2::<f64>::zeros((6, 3));
        a[[4, 1]] = 2.0;
        a[[4, 2]] = -1.0;
        let b = Array2::from_shape_fn((3, 2), |(i, j)| (i * 2 + j) as f64);
        assert_eq!(matmul(&a.view(), &b.view()), a.dot(&b));
        let h = Array2::from_shape_fn((6, 4), |(i, j)| (i + j) as f64);
        assert_eq!(matmul_tn(&h.view(), &a.view()), h.t().dot(&a));
    }
}
