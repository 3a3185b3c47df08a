//! Model problems and Matrix Market I/O.
//!
//! The generators discretize scalar convection-diffusion and anisotropic
//! diffusion on the unit square with homogeneous Dirichlet boundaries
//! eliminated, giving nonsymmetric (or symmetric) systems of tunable
//! difficulty. Problem strings look like
//! `convdiff:grid=32,eps=1e-2.5,wind=recirc` or `file:matrix.mtx`.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wind {
    Constant(f64, f64),
    /// `w = (2y(1 - x^2), -2x(1 - y^2))`.
    Recirculating,
}

impl Wind {
    pub fn at(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Wind::Constant(wx, wy) => (wx, wy),
            Wind::Recirculating => (2.0 * y * (1.0 - x * x), -2.0 * x * (1.0 - y * y)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// First-order upwinding; yields an M-matrix.
    Upwind,
    Centered,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    ConvDiff,
    AnisoDiff,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Ones,
    Random { seed: u64 },
    File(PathBuf),
}

impl FromStr for Rhs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ones" {
            return Ok(Rhs::Ones);
        }
        if s == "random" {
            return Ok(Rhs::Random { seed: 0 });
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .trim_start_matches("seed=")
                .parse()
                .map_err(|_| Error::usage(format!("bad rhs seed in '{s}'")))?;
            return Ok(Rhs::Random { seed });
        }
        let path = s.strip_prefix("file:").unwrap_or(s);
        Ok(Rhs::File(PathBuf::from(path)))
    }
}

/// Parameters of a test problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Interior points per side.
    pub grid: usize,
    pub wind: Wind,
    /// Diffusion coefficient.
    pub eps: f64,
    pub scheme: Scheme,
    pub rhs: Rhs,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            kind: ProblemKind::ConvDiff,
            grid: 32,
            wind: Wind::Recirculating,
            eps: 0.1,
            scheme: Scheme::Upwind,
            rhs: Rhs::Ones,
        }
    }
}

/// Parses reals, also accepting fractional decimal exponents such as
/// `1e-1.5` (= 10^-1.5).
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        if let (Ok(m), Ok(e)) = (mant.parse::<f64>(), exp.parse::<f64>()) {
            return Ok(m * 10f64.powf(e));
        }
    }
    Err(Error::usage(format!("'{s}' is not a number")))
}

/// Formats `eps` as `1e-1.5` when it is a half-integer power of ten.
pub fn format_eps(eps: f64) -> String {
    let e = eps.log10();
    let half = (e * 2.0).round() / 2.0;
    if eps > 0.0 && (e - half).abs() < 1e-9 {
        if half == half.trunc() {
            format!("1e{}", half as i64)
        } else {
            format!("1e{half}")
        }
    } else {
        format!("{eps}")
    }
}

impl ProblemSpec {
    pub fn convdiff(grid: usize, eps: f64, wind: Wind) -> Self {
        Self {
            grid,
            eps,
            wind,
            ..Self::default()
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    /// Row label used by the sweep tables.
    pub fn label(&self) -> String {
        match &self.kind {
            ProblemKind::File(p) => p.display().to_string(),
            _ => format!("eps={} grid={}", format_eps(self.eps), self.grid),
        }
    }

    fn validate(&self) -> Result<()> {
        if !matches!(self.kind, ProblemKind::File(_)) {
            if self.grid < 2 {
                return Err(Error::usage("grid must be at least 2"));
            }
            if self.eps.is_nan() || self.eps <= 0.0 {
                return Err(Error::usage("eps must be positive"));
            }
        }
        Ok(())
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let mut spec = ProblemSpec::default();
        match kind {
            "convdiff" => {}
            "anisodiff" => {
                spec.kind = ProblemKind::AnisoDiff;
                spec.eps = 0.01;
            }
            "file" => {
                spec.kind = ProblemKind::File(PathBuf::from(params));
                return Ok(spec);
            }
            other => return Err(Error::usage(format!("unknown problem kind '{other}'"))),
        }
        let (mut wx, mut wy) = (None, None);
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("expected key=value, got '{kv}'")))?;
            match k.trim() {
                "grid" | "n" => {
                    spec.grid = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::usage(format!("bad grid '{v}'")))?
                }
                "eps" => spec.eps = parse_real(v)?,
                "wind" => match v.trim() {
                    "recirc" | "recirculating" => spec.wind = Wind::Recirculating,
                    "constant" | "const" => spec.wind = Wind::Constant(1.0, 0.0),
                    "none" | "zero" => spec.wind = Wind::Constant(0.0, 0.0),
                    other => return Err(Error::usage(format!("unknown wind '{other}'"))),
                },
                "wx" => wx = Some(parse_real(v)?),
                "wy" => wy = Some(parse_real(v)?),
                "scheme" => {
                    spec.scheme = match v.trim() {
                        "upwind" => Scheme::Upwind,
                        "centered" | "central" => Scheme::Centered,
                        other => return Err(Error::usage(format!("unknown scheme '{other}'"))),
                    }
                }
                other => return Err(Error::usage(format!("unknown problem parameter '{other}'"))),
            }
        }
        if wx.is_some() || wy.is_some() {
            spec.wind = Wind::Constant(wx.unwrap_or(0.0), wy.unwrap_or(0.0));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ProblemKind::File(p) => return write!(f, "file:{}", p.display()),
            ProblemKind::ConvDiff => "convdiff",
            ProblemKind::AnisoDiff => "anisodiff",
        };
        write!(f, "{kind}:grid={},eps={}", self.grid, format_eps(self.eps))?;
        if self.kind == ProblemKind::ConvDiff {
            match self.wind {
                Wind::Recirculating => write!(f, ",wind=recirc")?,
                Wind::Constant(wx, wy) => write!(f, ",wx={wx},wy={wy}")?,
            }
            if self.scheme == Scheme::Centered {
                write!(f, ",scheme=centered")?;
            }
        }
        Ok(())
    }
}

/// Five-point stencil assembly over the `grid x grid` interior nodes.
/// `stencil(x, y)` returns (center, west, east, south, north) coefficients.
fn assemble(grid: usize, stencil: impl Fn(f64, f64) -> [f64; 5]) -> SparseMatrix {
    let h = 1.0 / (grid as f64 + 1.0);
    let idx = |i: usize, j: usize| j * grid + i;
    let mut t = Vec::with_capacity(5 * grid * grid);
    for j in 0..grid {
        for i in 0..grid {
            let (x, y) = ((i + 1) as f64 * h, (j + 1) as f64 * h);
            let [c, w, e, s, nn] = stencil(x, y);
            let row = idx(i, j);
            if j > 0 {
                t.push((row, idx(i, j - 1), s));
            }
            if i > 0 {
                t.push((row, idx(i - 1, j), w));
            }
            t.push((row, row, c));
            if i + 1 < grid {
                t.push((row, idx(i + 1, j), e));
            }
            if j + 1 < grid {
                t.push((row, idx(i, j + 1), nn));
            }
        }
    }
    SparseMatrix::from_triplets(grid * grid, &t).expect("stencil indices are in range")
}

/// `-eps Lap(u) + w . grad(u)` with five-point differences.
pub fn gen_convdiff_matrix(spec: &ProblemSpec) -> SparseMatrix {
    let h = 1.0 / (spec.grid as f64 + 1.0);
    let d = spec.eps / (h * h);
    let (wind, scheme) = (spec.wind, spec.scheme);
    assemble(spec.grid, move |x, y| {
        let (wx, wy) = wind.at(x, y);
        let mut st = [4.0 * d, -d, -d, -d, -d];
        match scheme {
            Scheme::Upwind => {
                // wx > 0 differences backward (west), wx < 0 forward (east).
                st[0] += (wx.abs() + wy.abs()) / h;
                if wx > 0.0 {
                    st[1] -= wx / h;
                } else {
                    st[2] += wx / h;
                }
                if wy > 0.0 {
                    st[3] -= wy / h;
                } else {
                    st[4] += wy / h;
                }
            }
            Scheme::Centered => {
                st[1] -= wx / (2.0 * h);
                st[2] += wx / (2.0 * h);
                st[3] -= wy / (2.0 * h);
                st[4] += wy / (2.0 * h);
            }
        }
        st
    })
}

/// `-eps u_xx - u_yy`.
pub fn gen_anisodiff_matrix(spec: &ProblemSpec) -> SparseMatrix {
    let h2 = {
        let h = 1.0 / (spec.grid as f64 + 1.0);
        h * h
    };
    let ex = spec.eps / h2;
    let ey = 1.0 / h2;
    assemble(spec.grid, move |_, _| [2.0 * (ex + ey), -ex, -ex, -ey, -ey])
}

pub fn build_rhs(rhs: &Rhs, n: usize) -> Result<Vec<f64>> {
    match rhs {
        Rhs::Ones => Ok(vec![1.0; n]),
        Rhs::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        }
        Rhs::File(path) => {
            let v = read_vector(path)?;
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            Ok(v)
        }
    }
}

/// Convection-diffusion system `(A, b)` for a `convdiff` spec.
pub fn gen_convdiff(spec: &ProblemSpec) -> Result<(SparseMatrix, Vec<f64>)> {
    spec.validate()?;
    let a = gen_convdiff_matrix(spec);
    let b = build_rhs(&spec.rhs, a.n())?;
    Ok((a, b))
}

/// Builds `(A, b)` for any problem kind.
pub fn generate(spec: &ProblemSpec) -> Result<(SparseMatrix, Vec<f64>)> {
    spec.validate()?;
    let a = match &spec.kind {
        ProblemKind::ConvDiff => gen_convdiff_matrix(spec),
        ProblemKind::AnisoDiff => gen_anisodiff_matrix(spec),
        ProblemKind::File(path) => read_matrix_market(path)?,
    };
    let b = build_rhs(&spec.rhs, a.n())?;
    Ok((a, b))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Reads a square real Matrix Market coordinate file. Symmetric storage is
/// expanded, duplicates are summed and indices become zero-based.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("malformed header '{header}'")));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut content = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = content.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(size_line, format!("bad size line '{size}'")))?;
    if dims.len() != 3 {
        return Err(parse_err(size_line, "size line needs rows, cols and entries"));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    if rows != cols {
        return Err(parse_err(
            size_line,
            format!("matrix is {rows}x{cols}, not square"),
        ));
    }

    let mut triplets = Vec::with_capacity(if symmetry == Symmetry::General {
        nnz
    } else {
        2 * nnz
    });
    let mut count = 0usize;
    for (ln, line) in content {
        let mut it = line.split_whitespace();
        let (Some(i), Some(j), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(parse_err(ln, format!("expected 'row col value', got '{line}'")));
        };
        let i: usize = i
            .parse()
            .map_err(|_| parse_err(ln, format!("bad row index '{i}'")))?;
        let j: usize = j
            .parse()
            .map_err(|_| parse_err(ln, format!("bad column index '{j}'")))?;
        let v: f64 = v.parse().map_err(|_| parse_err(ln, format!("bad value '{v}'")))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
        }
        let (i, j) = (i - 1, j - 1);
        triplets.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            }
        }
        count += 1;
    }
    if count != nnz {
        return Err(parse_err(
            size_line,
            format!("size line announces {nnz} entries, found {count}"),
        ));
    }
    SparseMatrix::from_triplets(rows, &triplets)
}

/// Writes `a` as a general real coordinate file with round-trip exact values.
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", a.n(), a.n(), a.nnz())?;
        for i in 0..a.n() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Reads a vector stored either as a Matrix Market `array` file or as plain
/// whitespace-separated numbers.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut skip_size = text
        .lines()
        .next()
        .is_some_and(|l| l.to_ascii_lowercase().starts_with("%%matrixmarket"));
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if skip_size {
            skip_size = false;
            continue;
        }
        for tok in t.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| parse_err(ln + 1, format!("bad value '{tok}'")))?,
            );
        }
    }
    Ok(values)
}

pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("%%MatrixMarket matrix array real general\n{} 1\n", v.len());
    for x in v {
        out.push_str(&format!("{x:e}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_structure() {
        for wind in [Wind::Recirculating, Wind::Constant(1.0, -0.5)] {
            let a = gen_convdiff_matrix(&ProblemSpec::convdiff(4, 0.1, wind));
            assert_eq!(a.n(), 16);
            for i in 0..16 {
                assert!(a.row(i).0.len() <= 5);
            }
        }
    }

    #[test]
    fn pure_diffusion_is_scaled_laplacian() {
        let a = gen_convdiff_matrix(&ProblemSpec::convdiff(3, 1.0, Wind::Constant(0.0, 0.0)));
        let h2inv = 16.0;
        // Center node (1,1) -> row 4 has the full stencil.
        let (cols, vals) = a.row(4);
        assert_eq!(cols, &[1, 3, 4, 5, 7]);
        assert_eq!(vals, &[-h2inv, -h2inv, 4.0 * h2inv, -h2inv, -h2inv]);
    }

    #[test]
    fn upwind_gives_m_matrix_rows() {
        let a = gen_convdiff_matrix(&ProblemSpec::convdiff(8, 0.01, Wind::Constant(1.0, 0.0)));
        let dense = a.to_dense();
        assert_eq!(dense.len(), 64);
        for (i, row) in dense.iter().enumerate() {
            let mut sum = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    assert!(v <= 0.0, "row {i} col {j}");
                }
                sum += v;
            }
            assert!(sum >= -1e-9, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn windless_matrix_is_exactly_symmetric() {
        let a = gen_convdiff_matrix(&ProblemSpec::convdiff(7, 0.3, Wind::Constant(0.0, 0.0)));
        let d = a.to_dense();
        for i in 0..d.len() {
            for j in 0..d.len() {
                assert_eq!(d[i][j], d[j][i]);
            }
        }
        let an = gen_anisodiff_matrix(&"anisodiff:grid=5,eps=0.01".parse().unwrap());
        let d = an.to_dense();
        for i in 0..d.len() {
            for j in 0..d.len() {
                assert_eq!(d[i][j], d[j][i]);
            }
        }
    }

    #[test]
    fn recirculating_is_nonsymmetric_with_nonzero_diagonal() {
        for scheme in ["upwind", "centered"] {
            let spec: ProblemSpec = format!("convdiff:grid=6,eps=0.01,scheme={scheme}")
                .parse()
                .unwrap();
            let a = gen_convdiff_matrix(&spec);
            assert!(a.diagonal().iter().all(|&d| d != 0.0));
            let d = a.to_dense();
            assert!((0..36).any(|i| (0..36).any(|j| d[i][j] != d[j][i])));
        }
    }

    #[test]
    fn parse_problem_strings() {
        let s: ProblemSpec = "convdiff:grid=32,eps=1e-1.5".parse().unwrap();
        assert_eq!(s.grid, 32);
        assert!((s.eps - 10f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(s.wind, Wind::Recirculating);
        assert_eq!(s.label(), "eps=1e-1.5 grid=32");
        let c: ProblemSpec = "convdiff:grid=8,eps=0.01,wx=1,wy=0".parse().unwrap();
        assert_eq!(c.wind, Wind::Constant(1.0, 0.0));
        assert_eq!(c.to_string().parse::<ProblemSpec>().unwrap(), c);
        assert!("convdiff:grid=1".parse::<ProblemSpec>().is_err());
        assert!("convdiff:eps=0".parse::<ProblemSpec>().is_err());
        assert!("heat:grid=3".parse::<ProblemSpec>().is_err());
        assert_eq!(format_eps(0.01), "1e-2");
        assert_eq!(format_eps(0.5), "0.5");
    }

    #[test]
    fn mm_general_two_entries() {
        let a = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 3.0\n2 2 4.0\n",
        )
        .unwrap();
        assert_eq!(a, SparseMatrix::from_diagonal(&[3.0, 4.0]));
    }

    #[test]
    fn mm_symmetric_expansion() {
        let a = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1.0\n2 1 5.0\n2 2 1.0\n",
        )
        .unwrap();
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.get(1, 0), 5.0);
    }

    #[test]
    fn mm_duplicates_are_summed() {
        let a =
            parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n1 1 2.0\n")
                .unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn mm_errors_carry_line_numbers() {
        let cases = [
            (
                "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n",
                1,
            ),
            (
                "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
                1,
            ),
            ("%%MatrixMarket matrix coordinate real general\n2 3 0\n", 2),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n",
                3,
            ),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
                3,
            ),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
                2,
            ),
            ("%%NotMatrixMarket\n", 1),
        ];
        for (text, expected) in cases {
            match parse_matrix_market(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expected, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn mm_round_trip_is_exact() {
        let spec: ProblemSpec = "convdiff:grid=6,eps=1e-2.5".parse().unwrap();
        let a = gen_convdiff_matrix(&spec);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&a, &path).unwrap();
        assert_eq!(read_matrix_market(&path).unwrap(), a);

        let v = vec![0.1, -1.0 / 3.0, 1e-300];
        let vp = dir.path().join("b.mtx");
        write_vector(&v, &vp).unwrap();
        assert_eq!(read_vector(&vp).unwrap(), v);
    }

    #[test]
    fn rhs_kinds() {
        assert_eq!(build_rhs(&Rhs::Ones, 3).unwrap(), vec![1.0; 3]);
        let r1 = build_rhs(&Rhs::Random { seed: 4 }, 5).unwrap();
        assert_eq!(r1, build_rhs(&Rhs::Random { seed: 4 }, 5).unwrap());
        assert!(r1.iter().all(|v| (-1.0..1.0).contains(v)));
        assert_eq!("random:7".parse::<Rhs>().unwrap(), Rhs::Random { seed: 7 });
    }
}
