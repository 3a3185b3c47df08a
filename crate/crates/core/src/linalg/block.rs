use crate::error::{Error, Result};

/// Dense `n x m` block of column vectors stored column-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColumnBlock {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl ColumnBlock {
    /// An empty block (zero columns) for vectors of length `n`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            m: 0,
            data: Vec::new(),
        }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![0.0; n * m],
        }
    }

    pub fn from_columns(n: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let mut block = Self::new(n);
        for c in columns {
            block.push_column(&c)?;
        }
        Ok(block)
    }

    /// The first `m` columns of the `n x n` identity.
    pub fn identity_columns(n: usize, m: usize) -> Self {
        let mut block = Self::zeros(n, m);
        for j in 0..m.min(n) {
            block.col_mut(j)[j] = 1.0;
        }
        block
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.m).map(move |j| self.col(j))
    }

    pub fn push_column(&mut self, c: &[f64]) -> Result<()> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: c.len(),
            });
        }
        self.data.extend_from_slice(c);
        self.m += 1;
        Ok(())
    }

    pub fn append(&mut self, other: &ColumnBlock) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        self.data.extend_from_slice(&other.data);
        self.m += other.m;
        Ok(())
    }

    /// Copy of columns `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> ColumnBlock {
        ColumnBlock {
            n: self.n,
            m: range.len(),
            data: self.data[range.start * self.n..range.end * self.n].to_vec(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    /// `self * coeffs`, where `coeffs` has `ncols()` entries.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.m);
        let mut out = vec![0.0; self.n];
        for (c, col) in coeffs.iter().zip(self.columns()) {
            if *c != 0.0 {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += c * v;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `max |(Q^T Q - I)_ij|` for this block.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..=i {
                let d = dot(self.col(i), self.col(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_combine() {
        let mut b = ColumnBlock::new(2);
        b.push_column(&[1.0, 0.0]).unwrap();
        b.push_column(&[0.0, 2.0]).unwrap();
        assert_eq!(b.ncols(), 2);
        assert_eq!(b.combine(&[3.0, 0.5]), vec![3.0, 1.0]);
        assert!(b.push_column(&[1.0]).is_err());
    }

    #[test]
    fn orthonormality_of_identity() {
        let b = ColumnBlock::identity_columns(4, 3);
        assert_eq!(b.orthonormality_error(), 0.0);
        assert_eq!(b.slice(1..3).col(0), &[0.0, 1.0, 0.0, 0.0]);
    }
}
