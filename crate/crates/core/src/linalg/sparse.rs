use crate::error::{Error, Result};

/// Square sparse matrix in compressed sparse row layout.
///
/// Column indices inside each row are strictly increasing, which fixes the
/// summation order of [`SparseMatrix::spmv`] and makes products
/// bit-reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the layout invariants.
    pub fn from_csr(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 {
            return Err(Error::usage(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::usage("row_offsets[0] must be 0"));
        }
        if col_indices.len() != values.len() || row_offsets[n] != values.len() {
            return Err(Error::usage(format!(
                "row_offsets[n] = {}, but {} column indices and {} values given",
                row_offsets[n],
                col_indices.len(),
                values.len()
            )));
        }
        for i in 0..n {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if end < start {
                return Err(Error::usage(format!("row_offsets decreases at row {i}")));
            }
            let cols = &col_indices[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= n) {
                return Err(Error::usage(format!("column index {c} out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::usage(format!(
                    "column indices in row {i} are not strictly increasing"
                )));
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!("non-finite value at entry {k}")));
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed; explicit zeros are kept in the pattern.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        if let Some(&(i, j, _)) = sorted.iter().find(|t| t.0 >= n || t.1 >= n) {
            return Err(Error::usage(format!("entry ({i}, {j}) outside a {n}x{n} matrix")));
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::from_csr(n, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from a dense row-major array, keeping nonzeros only.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &triplets)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    /// Largest number of stored entries in a row.
    pub fn max_row_nnz(&self) -> usize {
        self.row_offsets
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// Entry `(i, j)`, zero when outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    /// Position of the diagonal entry of each row in the value array.
    pub fn diagonal_positions(&self) -> Vec<Option<usize>> {
        (0..self.n)
            .map(|i| {
                let (cols, _) = self.row(i);
                cols.binary_search(&i).ok().map(|k| self.row_offsets[i] + k)
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    /// `y = A x`, rows summed in ascending column order.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// Unchecked-length variant of [`SparseMatrix::spmv`] writing into `y`.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }
}

/// Free-function form of [`SparseMatrix::spmv`].
pub fn spmv(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.spmv(x)
}
