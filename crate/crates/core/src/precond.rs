//! Preconditioners exposing a uniform "apply the inverse" action.
//!
//! Every kind is set up once from the system matrix and is read-only
//! afterwards, so a single instance may be applied from several threads.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Default multiple of `max |diag(A)|` used by `badscale`.
pub const DEFAULT_BADSCALE_FACTOR: f64 = 100.0;

/// Relative pivot size below which ILU(0) aborts.
const ILU_PIVOT_TOL: f64 = 1e-14;

/// Description of a preconditioner, parsed from CLI strings such as
/// `ssor:omega=1.0` or `combo:0.5*ilu0+0.5*jacobi`.
#[derive(Debug, Clone, PartialEq)]
pub enum PrecondSpec {
    Identity,
    Jacobi,
    Ssor {
        omega: f64,
    },
    Ilu0,
    /// `gamma * I` with `gamma = factor * max |diag(A)|`; a deliberately poor choice.
    BadScale {
        factor: f64,
    },
    /// `gamma * I` with an absolute `gamma`.
    ScaledIdentity {
        gamma: f64,
    },
    Combination(Vec<(f64, PrecondSpec)>),
}

impl PrecondSpec {
    /// Sets up the preconditioner for `a`.
    pub fn build(&self, a: &SparseMatrix) -> Result<Preconditioner> {
        let n = a.n();
        Ok(match self {
            PrecondSpec::Identity => Preconditioner::Identity { n },
            PrecondSpec::Jacobi => Preconditioner::Jacobi(Jacobi::new(a)?),
            PrecondSpec::Ssor { omega } => Preconditioner::Ssor(Ssor::new(a, *omega)?),
            PrecondSpec::Ilu0 => Preconditioner::Ilu0(Ilu0::new(a)?),
            PrecondSpec::BadScale { factor } => {
                let gamma = factor * a.max_abs_diagonal();
                Preconditioner::scaled_identity(n, gamma)?
            }
            PrecondSpec::ScaledIdentity { gamma } => Preconditioner::scaled_identity(n, *gamma)?,
            PrecondSpec::Combination(terms) => {
                let children = terms
                    .iter()
                    .map(|(w, s)| Ok((*w, s.build(a)?)))
                    .collect::<Result<Vec<_>>>()?;
                Preconditioner::combination(children)?
            }
        })
    }

    /// Parses a comma-separated list, e.g. `ilu0,jacobi`.
    pub fn parse_list(s: &str) -> Result<Vec<PrecondSpec>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

fn parse_param(kind: &str, params: Option<&str>, key: &str) -> Result<Option<f64>> {
    let Some(params) = params else {
        return Ok(None);
    };
    let (k, v) = params
        .split_once('=')
        .ok_or_else(|| Error::usage(format!("{kind}: expected {key}=<value>, got '{params}'")))?;
    if k.trim() != key {
        return Err(Error::usage(format!("{kind}: unknown parameter '{}'", k.trim())));
    }
    v.trim()
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::usage(format!("{kind}: '{v}' is not a number")))
}

impl FromStr for PrecondSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (s, None),
        };
        let no_params = |spec: PrecondSpec| match params {
            Some(p) => Err(Error::usage(format!("{kind} takes no parameters, got '{p}'"))),
            None => Ok(spec),
        };
        match kind {
            "identity" | "none" => no_params(PrecondSpec::Identity),
            "jacobi" => no_params(PrecondSpec::Jacobi),
            "ilu0" => no_params(PrecondSpec::Ilu0),
            "ssor" => Ok(PrecondSpec::Ssor {
                omega: parse_param(kind, params, "omega")?.unwrap_or(1.0),
            }),
            "badscale" => Ok(PrecondSpec::BadScale {
                factor: parse_param(kind, params, "gamma")?.unwrap_or(DEFAULT_BADSCALE_FACTOR),
            }),
            "scaled" => Ok(PrecondSpec::ScaledIdentity {
                gamma: parse_param(kind, params, "gamma")?
                    .ok_or_else(|| Error::usage("scaled requires gamma=<value>"))?,
            }),
            "combo" => {
                let body = params.ok_or_else(|| Error::usage("combo requires terms"))?;
                let terms = body
                    .split('+')
                    .map(|term| {
                        let (w, child) = term.split_once('*').ok_or_else(|| {
                            Error::usage(format!("combo term '{term}' must look like w*kind"))
                        })?;
                        let w: f64 = w
                            .trim()
                            .parse()
                            .map_err(|_| Error::usage(format!("combo weight '{w}' is not a number")))?;
                        let child: PrecondSpec = child.parse()?;
                        if matches!(child, PrecondSpec::Combination(_)) {
                            return Err(Error::usage("nested combo is not supported"));
                        }
                        Ok((w, child))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PrecondSpec::Combination(terms))
            }
            other => Err(Error::usage(format!("unknown preconditioner '{other}'"))),
        }
    }
}

impl fmt::Display for PrecondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecondSpec::Identity => write!(f, "identity"),
            PrecondSpec::Jacobi => write!(f, "jacobi"),
            PrecondSpec::Ssor { omega } => write!(f, "ssor:omega={omega}"),
            PrecondSpec::Ilu0 => write!(f, "ilu0"),
            PrecondSpec::BadScale { factor } => write!(f, "badscale:gamma={factor}"),
            PrecondSpec::ScaledIdentity { gamma } => write!(f, "scaled:gamma={gamma}"),
            PrecondSpec::Combination(terms) => {
                write!(f, "combo:")?;
                for (k, (w, s)) in terms.iter().enumerate() {
                    if k > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*{s}")?;
                }
                Ok(())
            }
        }
    }
}

/// A set-up preconditioner. [`Preconditioner::apply`] returns `P^{-1} v`.
#[derive(Debug, Clone)]
pub enum Preconditioner {
    Identity { n: usize },
    Jacobi(Jacobi),
    Ssor(Ssor),
    Ilu0(Ilu0),
    ScaledIdentity { n: usize, gamma: f64 },
    Combination { terms: Vec<(f64, Preconditioner)> },
}

impl Preconditioner {
    pub fn identity(n: usize) -> Self {
        Preconditioner::Identity { n }
    }

    pub fn scaled_identity(n: usize, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma != 0.0) {
            return Err(Error::usage(format!(
                "scaled identity needs a finite nonzero gamma, got {gamma}"
            )));
        }
        Ok(Preconditioner::ScaledIdentity { n, gamma })
    }

    /// `sum_i w_i P_i^{-1}`.
    pub fn combination(terms: Vec<(f64, Preconditioner)>) -> Result<Self> {
        let Some(n) = terms.first().map(|(_, p)| p.dim()) else {
            return Err(Error::usage("combination needs at least one term"));
        };
        if let Some((_, p)) = terms.iter().find(|(_, p)| p.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
        if terms.iter().map(|(w, _)| w.abs()).sum::<f64>() <= 0.0 {
            return Err(Error::usage("combination weights must not all be zero"));
        }
        Ok(Preconditioner::Combination { terms })
    }

    pub fn dim(&self) -> usize {
        match self {
            Preconditioner::Identity { n } | Preconditioner::ScaledIdentity { n, .. } => *n,
            Preconditioner::Jacobi(p) => p.inv_diag.len(),
            Preconditioner::Ssor(p) => p.a.n(),
            Preconditioner::Ilu0(p) => p.lu.n(),
            Preconditioner::Combination { terms } => terms[0].1.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Preconditioner::Identity { .. } => "identity",
            Preconditioner::Jacobi(_) => "jacobi",
            Preconditioner::Ssor(_) => "ssor",
            Preconditioner::Ilu0(_) => "ilu0",
            Preconditioner::ScaledIdentity { .. } => "scaled_identity",
            Preconditioner::Combination { .. } => "combination",
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// Writes `P^{-1} v` into `out`; lengths must equal [`Preconditioner::dim`].
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        match self {
            Preconditioner::Identity { .. } => out.copy_from_slice(v),
            Preconditioner::ScaledIdentity { gamma, .. } => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o = x / gamma;
                }
            }
            Preconditioner::Jacobi(p) => {
                for ((o, x), d) in out.iter_mut().zip(v).zip(&p.inv_diag) {
                    *o = x * d;
                }
            }
            Preconditioner::Ssor(p) => p.apply_into(v, out),
            Preconditioner::Ilu0(p) => p.apply_into(v, out),
            Preconditioner::Combination { terms } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut tmp = vec![0.0; v.len()];
                for (w, child) in terms {
                    child.apply_into(v, &mut tmp);
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += w * t;
                    }
                }
            }
        }
    }
}

/// Diagonal scaling.
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let inv_diag = a
            .diagonal()
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if d == 0.0 {
                    Err(Error::Setup {
                        kind: "jacobi",
                        row: i,
                        reason: "zero diagonal entry".into(),
                    })
                } else {
                    Ok(1.0 / d)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { inv_diag })
    }
}

fn require_diagonal(a: &SparseMatrix, kind: &'static str) -> Result<Vec<usize>> {
    a.diagonal_positions()
        .into_iter()
        .enumerate()
        .map(|(i, p)| match p {
            Some(p) if a.values()[p] != 0.0 => Ok(p),
            _ => Err(Error::Setup {
                kind,
                row: i,
                reason: "zero diagonal entry".into(),
            }),
        })
        .collect()
}

/// Symmetric successive over-relaxation,
/// `M = (D + wL) D^{-1} (D + wU) / (w (2 - w))`.
#[derive(Debug, Clone)]
pub struct Ssor {
    a: SparseMatrix,
    diag_pos: Vec<usize>,
    omega: f64,
}

impl Ssor {
    pub fn new(a: &SparseMatrix, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 2.0) {
            return Err(Error::usage(format!("ssor omega must lie in (0,2), got {omega}")));
        }
        let diag_pos = require_diagonal(a, "ssor")?;
        Ok(Self {
            a: a.clone(),
            diag_pos,
            omega,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let a = &self.a;
        let vals = a.values();
        let w = self.omega;
        let n = a.n();
        // (D + wL) y = v
        for i in 0..n {
            let (cols, rv) = a.row(i);
            let mut s = v[i];
            for (&j, &aij) in cols.iter().zip(rv) {
                if j >= i {
                    break;
                }
                s -= w * aij * out[j];
            }
            out[i] = s / vals[self.diag_pos[i]];
        }
        // z = D y, then (D + wU) x = z in place
        for i in (0..n).rev() {
            let d = vals[self.diag_pos[i]];
            let (cols, rv) = a.row(i);
            let mut s = d * out[i];
            for (&j, &aij) in cols.iter().zip(rv).rev() {
                if j <= i {
                    break;
                }
                s -= w * aij * out[j];
            }
            out[i] = s / d;
        }
        let scale = w * (2.0 - w);
        if scale != 1.0 {
            out.iter_mut().for_each(|o| *o *= scale);
        }
    }
}

/// Incomplete LU factorization with zero fill-in on the pattern of `A`.
///
/// `L` (unit diagonal) is stored strictly below the diagonal and `U` on and
/// above it, sharing `A`'s CSR layout.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: SparseMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.n();
        let offsets = a.row_offsets();
        let cols = a.col_indices();
        let mut lu = a.values().to_vec();
        let pivot_floor = ILU_PIVOT_TOL * a.max_abs_value();
        let diag_pos = a.diagonal_positions();
        let mut marker: Vec<usize> = vec![usize::MAX; n];

        for i in 0..n {
            let Some(di) = diag_pos[i] else {
                return Err(Error::Setup {
                    kind: "ilu0",
                    row: i,
                    reason: "diagonal entry missing from the sparsity pattern".into(),
                });
            };
            let (start, end) = (offsets[i], offsets[i + 1]);
            for p in start..end {
                marker[cols[p]] = p;
            }
            for p in start..di {
                let k = cols[p];
                let dk = diag_pos[k].expect("checked when row k was factored");
                let lik = lu[p] / lu[dk];
                lu[p] = lik;
                for q in dk + 1..offsets[k + 1] {
                    let pos = marker[cols[q]];
                    if pos != usize::MAX {
                        lu[pos] -= lik * lu[q];
                    }
                }
            }
            for p in start..end {
                marker[cols[p]] = usize::MAX;
            }
            if lu[di].is_nan() || lu[di].abs() < pivot_floor || lu[di] == 0.0 {
                return Err(Error::Setup {
                    kind: "ilu0",
                    row: i,
                    reason: format!("pivot {:e} below tolerance", lu[di]),
                });
            }
        }
        let diag_pos = diag_pos.into_iter().map(Option::unwrap).collect();
        let lu = SparseMatrix::from_csr(n, offsets.to_vec(), cols.to_vec(), lu)?;
        Ok(Self { lu, diag_pos })
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.lu.n();
        let vals = self.lu.values();
        for i in 0..n {
            let (cols, rv) = self.lu.row(i);
            let mut s = v[i];
            for (&j, &lij) in cols.iter().zip(rv) {
                if j >= i {
                    break;
                }
                s -= lij * out[j];
            }
            out[i] = s;
        }
        for i in (0..n).rev() {
            let (cols, rv) = self.lu.row(i);
            let mut s = out[i];
            for (&j, &uij) in cols.iter().zip(rv).rev() {
                if j <= i {
                    break;
                }
                s -= uij * out[j];
            }
            out[i] = s / vals[self.diag_pos[i]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_2d(m: usize) -> SparseMatrix {
        let n = m * m;
        let mut t = Vec::new();
        for r in 0..m {
            for c in 0..m {
                let i = r * m + c;
                t.push((i, i, 4.0));
                if c > 0 {
                    t.push((i, i - 1, -1.0));
                }
                if c + 1 < m {
                    t.push((i, i + 1, -1.0));
                }
                if r > 0 {
                    t.push((i, i - m, -1.0));
                }
                if r + 1 < m {
                    t.push((i, i + m, -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(n, &t).unwrap()
    }

    fn random_nonsymmetric(rng: &mut ChaCha8Rng, n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 6.0 + rng.gen_range(0.0..1.0)));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j != i {
                    t.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        SparseMatrix::from_triplets(n, &t).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    /// Dense ILU(0): Gaussian elimination in (i, k, j) order that ignores
    /// updates outside the original pattern, then dense triangular solves.
    fn dense_ilu0_apply(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = a.len();
        let pattern: Vec<Vec<bool>> = a.iter().map(|r| r.iter().map(|&v| v != 0.0).collect()).collect();
        let mut m = a.to_vec();
        for i in 1..n {
            for k in 0..i {
                if !pattern[i][k] {
                    continue;
                }
                m[i][k] /= m[k][k];
                for j in k + 1..n {
                    if pattern[i][j] {
                        m[i][j] -= m[i][k] * m[k][j];
                    }
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[i] - (0..i).map(|j| m[i][j] * y[j]).sum::<f64>();
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            x[i] = (y[i] - (i + 1..n).map(|j| m[i][j] * x[j]).sum::<f64>()) / m[i][i];
        }
        x
    }

    #[test]
    fn jacobi_inverts_diagonal() {
        let a = SparseMatrix::from_diagonal(&[2.0, 4.0]);
        let p = PrecondSpec::Jacobi.build(&a).unwrap();
        assert_eq!(p.apply(&[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn jacobi_zero_diagonal_names_row() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        match PrecondSpec::Jacobi.build(&a) {
            Err(Error::Setup { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected setup error, got {other:?}"),
        }
        assert!(matches!(
            PrecondSpec::Ssor { omega: 1.0 }.build(&a),
            Err(Error::Setup { row: 1, .. })
        ));
        assert!(matches!(
            PrecondSpec::Ilu0.build(&a),
            Err(Error::Setup { row: 1, .. })
        ));
    }

    #[test]
    fn ilu0_zero_pivot() {
        // Pivot of row 1 becomes 1 - 1*1 = 0.
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            PrecondSpec::Ilu0.build(&a),
            Err(Error::Setup { row: 1, .. })
        ));
    }

    #[test]
    fn ilu0_exact_on_triangular_and_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 15;
        let mut lower = vec![vec![0.0; n]; n];
        for i in 0..n {
            lower[i][i] = 2.0 + rng.gen_range(0.0..1.0);
            for j in 0..i {
                if rng.gen_bool(0.3) {
                    lower[i][j] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let upper: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| lower[j][i]).collect()).collect();
        let diag = SparseMatrix::from_diagonal(&(1..=n).map(|v| v as f64).collect::<Vec<_>>());
        for a in [
            SparseMatrix::from_dense(&lower).unwrap(),
            SparseMatrix::from_dense(&upper).unwrap(),
            diag,
        ] {
            let p = PrecondSpec::Ilu0.build(&a).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ax = a.spmv(&x).unwrap();
            assert!(close(&p.apply(&ax).unwrap(), &x, 1e-12));
        }
    }

    #[test]
    fn ilu0_matches_dense_oracle_on_laplacian() {
        let a = laplacian_2d(4);
        let dense = a.to_dense();
        let p = PrecondSpec::Ilu0.build(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let b: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(close(&p.apply(&b).unwrap(), &dense_ilu0_apply(&dense, &b), 1e-12));
        }
    }

    #[test]
    fn ilu0_matches_dense_oracle_nonsymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_nonsymmetric(&mut rng, 20);
        let dense = a.to_dense();
        let p = PrecondSpec::Ilu0.build(&a).unwrap();
        let b: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(close(&p.apply(&b).unwrap(), &dense_ilu0_apply(&dense, &b), 1e-12));
    }

    /// Symmetric Gauss-Seidel on a dense array: forward sweep, diagonal
    /// rescale, backward sweep.
    fn dense_sgs(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (b[i] - (0..i).map(|j| a[i][j] * y[j]).sum::<f64>()) / a[i][i];
        }
        let z: Vec<f64> = (0..n).map(|i| a[i][i] * y[i]).collect();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            x[i] = (z[i] - (i + 1..n).map(|j| a[i][j] * x[j]).sum::<f64>()) / a[i][i];
        }
        x
    }

    #[test]
    fn ssor_unit_omega_is_symmetric_gauss_seidel() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in [2, 3, 4] {
            let a = laplacian_2d(m);
            let p = PrecondSpec::Ssor { omega: 1.0 }.build(&a).unwrap();
            let b: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(close(&p.apply(&b).unwrap(), &dense_sgs(&a.to_dense(), &b), 1e-12));
        }
    }

    #[test]
    fn ssor_rejects_bad_omega() {
        let a = SparseMatrix::identity(2);
        assert!(PrecondSpec::Ssor { omega: 2.0 }.build(&a).is_err());
    }

    #[test]
    fn identity_scaled_and_combination() {
        let a = SparseMatrix::identity(3);
        let v = [1.0, -2.0, 3.0];
        assert_eq!(PrecondSpec::Identity.build(&a).unwrap().apply(&v).unwrap(), v);
        let s = PrecondSpec::ScaledIdentity { gamma: 100.0 }.build(&a).unwrap();
        assert_eq!(s.apply(&v).unwrap(), vec![0.01, -0.02, 0.03]);
        let c: PrecondSpec = "combo:0.5*identity+0.5*identity".parse().unwrap();
        assert_eq!(c.build(&a).unwrap().apply(&v).unwrap(), v);
    }

    #[test]
    fn badscale_uses_diagonal_maximum() {
        let a = SparseMatrix::from_diagonal(&[1.0, -3.0]);
        let p: PrecondSpec = "badscale:gamma=100".parse().unwrap();
        match p.build(&a).unwrap() {
            Preconditioner::ScaledIdentity { gamma, .. } => assert_eq!(gamma, 300.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn combination_rejects_zero_weights() {
        let a = SparseMatrix::identity(2);
        let c: PrecondSpec = "combo:0*identity+0*jacobi".parse().unwrap();
        assert!(c.build(&a).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "identity",
            "jacobi",
            "ssor:omega=1.2",
            "ilu0",
            "badscale:gamma=100",
            "scaled:gamma=5",
            "combo:0.5*ilu0+0.5*jacobi",
        ] {
            let spec: PrecondSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!(
            "ssor".parse::<PrecondSpec>().unwrap(),
            PrecondSpec::Ssor { omega: 1.0 }
        );
        assert_eq!(PrecondSpec::parse_list("ilu0, jacobi").unwrap().len(), 2);
        assert!("ilu1".parse::<PrecondSpec>().is_err());
        assert!("jacobi:omega=1".parse::<PrecondSpec>().is_err());
        assert!("ssor:gamma=1".parse::<PrecondSpec>().is_err());
    }

    #[test]
    fn apply_dimension_mismatch() {
        let p = Preconditioner::identity(3);
        assert!(matches!(p.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn every_kind_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_nonsymmetric(&mut rng, 40);
        let specs: Vec<PrecondSpec> = [
            "identity",
            "jacobi",
            "ssor:omega=1.3",
            "ilu0",
            "badscale",
            "combo:0.5*ilu0+0.5*jacobi",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
        for spec in specs {
            let p = spec.build(&a).unwrap();
            for _ in 0..200 {
                let v: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let w: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let alpha: f64 = rng.gen_range(-2.0..2.0);
                let mix: Vec<f64> = v.iter().zip(&w).map(|(a, b)| alpha * a + b).collect();
                let lhs = p.apply(&mix).unwrap();
                let pv = p.apply(&v).unwrap();
                let pw = p.apply(&w).unwrap();
                let err: f64 = lhs
                    .iter()
                    .zip(pv.iter().zip(&pw))
                    .map(|(l, (a, b))| (l - alpha * a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let nv = crate::linalg::norm2(&v);
                let nw = crate::linalg::norm2(&w);
                assert!(err <= 1e-12 * (nv + nw), "{spec}: {err:e}");
            }
        }
    }
}
