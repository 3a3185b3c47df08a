use super::block::{dot, norm2};
use crate::error::{Error, Result};

/// Relative size below which a transformed column is treated as dependent
/// on the columns already factored.
const RANK_TOL: f64 = 1e-12;

/// Dense, column-major coefficient matrix of the Arnoldi-type decomposition.
///
/// Columns are stored at the length the basis had when they were produced;
/// entries below that are structural zeros, which keeps the block upper
/// Hessenberg shape without a packed format.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HessenbergStore {
    rows: usize,
    columns: Vec<Vec<f64>>,
}

impl HessenbergStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a store from dense rows (row-major input, handy in tests).
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let columns = (0..ncols).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self { rows: nrows, columns }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j].get(i).copied().unwrap_or(0.0)
    }

    /// Stored (unpadded) part of column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn set_rows(&mut self, rows: usize) {
        self.rows = self.rows.max(rows);
    }

    pub fn push_column(&mut self, col: Vec<f64>) {
        self.rows = self.rows.max(col.len());
        self.columns.push(col);
    }

    /// `H y`, of length `rows()`.
    pub fn matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (col, &yj) in self.columns.iter().zip(y) {
            for (o, h) in out.iter_mut().zip(col) {
                *o += h * yj;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Reflector {
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    /// Applies `I - tau v v^T` to `x[start..start + v.len()]`.
    #[inline]
    fn apply(&self, start: usize, x: &mut [f64]) {
        let seg = &mut x[start..start + self.v.len()];
        let s = self.tau * dot(&self.v, seg);
        if s != 0.0 {
            for (xi, vi) in seg.iter_mut().zip(&self.v) {
                *xi -= s * vi;
            }
        }
    }
}

/// Least-squares result for `min ||beta e1 - H y||`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    pub y: Vec<f64>,
    pub resnorm: f64,
    /// Some column of `H` was numerically dependent on earlier ones.
    pub rank_deficient: bool,
}

/// Householder QR of a growing coefficient matrix, updated one column at a
/// time.
///
/// New rows only ever appear below existing ones and earlier columns are zero
/// there, so previously computed reflectors stay valid. Columns that are
/// dependent on those already factored get no reflector and a zero
/// coefficient in [`LsqUpdater::solve`]; that still yields a minimizer.
#[derive(Debug, Clone)]
pub struct LsqUpdater {
    rows: usize,
    ncols: usize,
    reflectors: Vec<Reflector>,
    /// Upper-triangular factor, one entry per reflector: (H column, R column).
    r_cols: Vec<(usize, Vec<f64>)>,
    /// `Q^T beta e1`.
    g: Vec<f64>,
}

impl LsqUpdater {
    pub fn new(beta: f64) -> Self {
        Self {
            rows: 1,
            ncols: 0,
            reflectors: Vec::new(),
            r_cols: Vec::new(),
            g: vec![beta],
        }
    }

    pub fn rank(&self) -> usize {
        self.reflectors.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn grow_rows(&mut self, rows: usize) {
        if rows > self.rows {
            self.rows = rows;
            self.g.resize(rows, 0.0);
        }
    }

    fn transform(&self, col: &[f64]) -> Vec<f64> {
        let mut c = col.to_vec();
        c.resize(self.rows, 0.0);
        for (k, refl) in self.reflectors.iter().enumerate() {
            refl.apply(k, &mut c);
        }
        c
    }

    /// Adds a column; returns `false` when it was found dependent.
    pub fn push_column(&mut self, col: &[f64]) -> bool {
        self.grow_rows(col.len());
        let cnorm = norm2(col);
        let mut c = self.transform(col);
        let r = self.rank();
        self.ncols += 1;

        let tail_norm = norm2(&c[r..]);
        if cnorm == 0.0 || tail_norm <= RANK_TOL * cnorm {
            return false;
        }
        let alpha = if c[r] >= 0.0 { -tail_norm } else { tail_norm };
        let mut v = c[r..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        let refl = Reflector { v, tau: 2.0 / vnorm2 };
        refl.apply(r, &mut self.g);
        c.truncate(r);
        c.push(alpha);
        self.r_cols.push((self.ncols - 1, c));
        self.reflectors.push(refl);
        true
    }

    /// Adds a column whose coefficient is held at zero. Used for directions
    /// whose `H` column is only approximate.
    pub fn push_inactive_column(&mut self, rows: usize) {
        self.grow_rows(rows);
        self.ncols += 1;
    }

    /// Current minimum of `||beta e1 - H y||`.
    pub fn residual(&self) -> f64 {
        norm2(&self.g[self.rank()..])
    }

    /// A minimizer with zeros at dependent columns.
    pub fn solve(&self) -> Vec<f64> {
        let z = self.back_substitute(&self.g);
        let mut y = vec![0.0; self.ncols];
        for ((col, _), zk) in self.r_cols.iter().zip(z) {
            y[*col] = zk;
        }
        y
    }

    /// Solves `R z = rhs[..rank]`.
    fn back_substitute(&self, rhs: &[f64]) -> Vec<f64> {
        let r = self.rank();
        let mut z = rhs[..r].to_vec();
        for k in (0..r).rev() {
            let (_, rc) = &self.r_cols[k];
            z[k] /= rc[k];
            let zk = z[k];
            for (zi, &rik) in z[..k].iter_mut().zip(&rc[..k]) {
                *zi -= rik * zk;
            }
        }
        z
    }
}

/// Solves `min_y ||beta e1 - H y||_2` by Householder QR of the dense store.
///
/// When `H` is rank deficient the minimum-norm minimizer is returned and
/// `rank_deficient` is set.
pub fn hessenberg_lsq(h: &HessenbergStore, beta: f64) -> Result<LsqSolution> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::usage("beta must be non-negative"));
    }
    if h.rows() == 0 {
        return Err(Error::usage("coefficient matrix has no rows"));
    }
    let mut lsq = LsqUpdater::new(beta);
    lsq.grow_rows(h.rows());
    let mut skipped = Vec::new();
    for j in 0..h.cols() {
        if !lsq.push_column(h.column(j)) {
            skipped.push(j);
        }
    }
    let mut y = lsq.solve();
    let resnorm = lsq.residual();
    if skipped.is_empty() {
        return Ok(LsqSolution {
            y,
            resnorm,
            rank_deficient: false,
        });
    }

    // Null vectors e_j - (coefficients expressing column j through the
    // factored columns); projecting them out of y gives the minimum-norm
    // minimizer.
    let mut null_basis: Vec<Vec<f64>> = Vec::with_capacity(skipped.len());
    for &j in &skipped {
        let qh = lsq.transform(h.column(j));
        let c = lsq.back_substitute(&qh);
        let mut nv = vec![0.0; h.cols()];
        nv[j] = 1.0;
        for ((col, _), ck) in lsq.r_cols.iter().zip(c) {
            nv[*col] -= ck;
        }
        for _ in 0..2 {
            for q in &null_basis {
                let s = dot(q, &nv);
                nv.iter_mut().zip(q).for_each(|(a, b)| *a -= s * b);
            }
        }
        let nn = norm2(&nv);
        if nn > 0.0 {
            nv.iter_mut().for_each(|a| *a /= nn);
            null_basis.push(nv);
        }
    }
    for q in &null_basis {
        let s = dot(q, &y);
        y.iter_mut().zip(q).for_each(|(a, b)| *a -= s * b);
    }
    Ok(LsqSolution {
        y,
        resnorm,
        rank_deficient: true,
    })
}
