use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use super::sampling::SamplingScheme;
use super::sparsifier::Sparsifier;
use crate::error::{arg_err, size_err, Error, Result};
use crate::linalg::{
    dft_forward, dft_inverse, fwht_sequency_forward, fwht_sequency_inverse, pinv_apply_svd,
    svd_small, CMatrix, CVector, Svd, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    /// Unitary DFT with rows ordered by frequency magnitude:
    /// row `0` is frequency 0, row `2j-1` is `+j`, row `2j` is `-j`.
    Fourier,
    /// Sequency-ordered Walsh-Hadamard.
    Walsh,
    Identity,
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Fourier => "fourier",
            Transform::Walsh => "walsh",
            Transform::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Transform> {
        match s {
            "fourier" => Some(Transform::Fourier),
            "walsh" => Some(Transform::Walsh),
            "identity" => Some(Transform::Identity),
            _ => None,
        }
    }

    pub fn forward(&self, x: &[C64]) -> Result<CVector> {
        match self {
            Transform::Fourier => {
                let y = dft_forward(x)?;
                let n = y.len();
                Ok((0..n).map(|i| y[fourier_bin(i, n)]).collect())
            }
            Transform::Walsh => fwht_sequency_forward(x),
            Transform::Identity => Ok(CVector(x.to_vec())),
        }
    }

    pub fn inverse(&self, y: &[C64]) -> Result<CVector> {
        match self {
            Transform::Fourier => {
                let n = y.len();
                let mut nat = CVector::zeros(n);
                for (i, v) in y.iter().enumerate() {
                    nat[fourier_bin(i, n)] = *v;
                }
                dft_inverse(&nat)
            }
            Transform::Walsh => fwht_sequency_inverse(y),
            Transform::Identity => Ok(CVector(y.to_vec())),
        }
    }
}

/// Natural DFT bin of row `i` in frequency-magnitude order.
pub fn fourier_bin(i: usize, n: usize) -> usize {
    if i == 0 {
        0
    } else if i % 2 == 1 {
        i.div_ceil(2)
    } else {
        n - i / 2
    }
}

/// Signed frequency of row `i` in frequency-magnitude order.
pub fn fourier_frequency(i: usize) -> i64 {
    if i == 0 {
        0
    } else if i % 2 == 1 {
        i.div_ceil(2) as i64
    } else {
        -((i / 2) as i64)
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Structured {
        transform: Transform,
        omega: Vec<usize>,
        d: Vec<f64>,
    },
    Dense {
        matrix: CMatrix,
        svd: OnceLock<Svd>,
    },
}

/// Measurement operator `A = P_Omega D U` (structured) or an explicit matrix.
#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    n: usize,
    kind: Kind,
}

impl MeasurementOperator {
    /// Rows `omega` of `D U` with per-row scaling `d`.
    pub fn structured(
        transform: Transform,
        n: usize,
        omega: Vec<usize>,
        d: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return size_err(format!("N = {n} is not a power of two"));
        }
        if omega.len() != d.len() {
            return arg_err("one scaling per sampled row is required");
        }
        if omega.iter().any(|&i| i >= n) {
            return arg_err("sampled index out of range");
        }
        if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return arg_err("row scalings must be positive");
        }
        Ok(MeasurementOperator {
            n,
            kind: Kind::Structured {
                transform,
                omega,
                d,
            },
        })
    }

    /// `P_Omega U` without rescaling.
    pub fn unscaled(transform: Transform, n: usize, omega: Vec<usize>) -> Result<Self> {
        let d = vec![1.0; omega.len()];
        Self::structured(transform, n, omega, d)
    }

    /// `P_Omega D U` with the multilevel scaling of the scheme.
    pub fn from_scheme(transform: Transform, scheme: &SamplingScheme) -> Result<Self> {
        Self::structured(
            transform,
            scheme.n,
            scheme.omega.clone(),
            scheme.row_scaling(),
        )
    }

    pub fn dense(matrix: CMatrix) -> Result<Self> {
        if matrix.rows == 0 || matrix.cols == 0 {
            return arg_err("empty matrix");
        }
        Ok(MeasurementOperator {
            n: matrix.cols,
            kind: Kind::Dense {
                matrix,
                svd: OnceLock::new(),
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        match &self.kind {
            Kind::Structured { omega, .. } => omega.len(),
            Kind::Dense { matrix, .. } => matrix.rows,
        }
    }

    pub fn transform(&self) -> Option<Transform> {
        match &self.kind {
            Kind::Structured { transform, .. } => Some(*transform),
            Kind::Dense { .. } => None,
        }
    }

    pub fn omega(&self) -> Option<&[usize]> {
        match &self.kind {
            Kind::Structured { omega, .. } => Some(omega),
            Kind::Dense { .. } => None,
        }
    }

    pub fn row_scaling(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Structured { d, .. } => Some(d),
            Kind::Dense { .. } => None,
        }
    }

    fn check_n(&self, x: &[C64]) -> Result<()> {
        if x.len() != self.n {
            return size_err(format!("expected length {}, got {}", self.n, x.len()));
        }
        Ok(())
    }

    fn check_m(&self, y: &[C64]) -> Result<()> {
        if y.len() != self.m() {
            return size_err(format!(
                "expected {} measurements, got {}",
                self.m(),
                y.len()
            ));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[C64]) -> Result<CVector> {
        self.check_n(x)?;
        match &self.kind {
            Kind::Structured {
                transform,
                omega,
                d,
            } => {
                let full = transform.forward(x)?;
                Ok(omega.iter().zip(d).map(|(&i, &di)| full[i] * di).collect())
            }
            Kind::Dense { matrix, .. } => Ok(matrix.matvec(x)),
        }
    }

    pub fn adjoint(&self, y: &[C64]) -> Result<CVector> {
        self.check_m(y)?;
        match &self.kind {
            Kind::Structured {
                transform,
                omega,
                d,
            } => {
                let mut full = CVector::zeros(self.n);
                for ((&i, &di), v) in omega.iter().zip(d).zip(y) {
                    full[i] += v * di;
                }
                transform.inverse(&full)
            }
            Kind::Dense { matrix, .. } => Ok(matrix.matvec_adjoint(y)),
        }
    }

    fn dense_svd(&self) -> Result<&Svd> {
        match &self.kind {
            Kind::Dense { matrix, svd } => {
                if let Some(s) = svd.get() {
                    return Ok(s);
                }
                let s = svd_small(matrix)?;
                Ok(svd.get_or_init(|| s))
            }
            Kind::Structured { .. } => unreachable!(),
        }
    }

    /// Distinct sampled indices with multiplicity and row scaling.
    fn grouped_rows(omega: &[usize], d: &[f64]) -> BTreeMap<usize, (usize, f64)> {
        let mut g = BTreeMap::new();
        for (&i, &di) in omega.iter().zip(d) {
            let e = g.entry(i).or_insert((0usize, di));
            e.0 += 1;
        }
        g
    }

    /// Moore-Penrose pseudoinverse `A^dagger y`.
    pub fn pinv_apply(&self, y: &[C64]) -> Result<CVector> {
        self.check_m(y)?;
        match &self.kind {
            Kind::Structured {
                transform,
                omega,
                d,
            } => {
                let mut sums: BTreeMap<usize, C64> = BTreeMap::new();
                for (&i, v) in omega.iter().zip(y) {
                    *sums.entry(i).or_insert(C64::new(0.0, 0.0)) += v;
                }
                let groups = Self::grouped_rows(omega, d);
                let mut full = CVector::zeros(self.n);
                for (i, (c, di)) in groups {
                    full[i] = sums[&i] / (c as f64 * di);
                }
                transform.inverse(&full)
            }
            Kind::Dense { .. } => Ok(pinv_apply_svd(self.dense_svd()?, y)),
        }
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        match &self.kind {
            Kind::Structured { omega, d, .. } => {
                let mut s: Vec<f64> = Self::grouped_rows(omega, d)
                    .values()
                    .map(|&(c, di)| di * (c as f64).sqrt())
                    .collect();
                if s.len() < omega.len().min(self.n) {
                    s.resize(omega.len().min(self.n), 0.0);
                }
                s.sort_by(|a, b| b.total_cmp(a));
                Ok(s)
            }
            Kind::Dense { .. } => Ok(self.dense_svd()?.sigma.clone()),
        }
    }

    pub fn sigma_min(&self) -> Result<f64> {
        Ok(self.singular_values()?.last().copied().unwrap_or(0.0))
    }

    /// Operator norm `||A||`.
    pub fn norm(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    /// Orthogonal projection onto `N(A)^perp`.
    pub fn project_cokernel(&self, x: &[C64]) -> Result<CVector> {
        self.check_n(x)?;
        match &self.kind {
            Kind::Structured {
                transform, omega, ..
            } => {
                let full = transform.forward(x)?;
                let mut kept = CVector::zeros(self.n);
                for &i in omega {
                    kept[i] = full[i];
                }
                transform.inverse(&kept)
            }
            Kind::Dense { .. } => {
                let svd = self.dense_svd()?;
                let tol = svd.tolerance();
                let mut out = CVector::zeros(self.n);
                for (l, &s) in svd.sigma.iter().enumerate() {
                    if s <= tol {
                        continue;
                    }
                    let v = svd.v.column(l);
                    let c = v.dot(&CVector(x.to_vec()));
                    out.axpy(c, &v);
                }
                Ok(out)
            }
        }
    }

    /// Orthogonal projection onto `N(A)`.
    pub fn project_kernel(&self, x: &[C64]) -> Result<CVector> {
        let p = self.project_cokernel(x)?;
        Ok(CVector(x.to_vec()).sub(&p))
    }

    /// Dense `m x N` matrix of the operator.
    pub fn matrix(&self) -> Result<CMatrix> {
        match &self.kind {
            Kind::Dense { matrix, .. } => Ok(matrix.clone()),
            Kind::Structured { .. } => {
                let cols = (0..self.n)
                    .map(|j| self.apply(&CVector::basis(self.n, j)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CMatrix::from_columns(&cols))
            }
        }
    }

    /// Dense matrix of `A H^*`.
    pub fn matrix_with(&self, h: &Sparsifier) -> Result<CMatrix> {
        let cols = (0..self.n)
            .map(|j| self.apply(&h.inverse(&CVector::basis(self.n, j))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_columns(&cols))
    }

    /// Dense `N x m` matrix of the pseudoinverse.
    pub fn pinv_matrix(&self) -> Result<CMatrix> {
        let m = self.m();
        let cols = (0..m)
            .map(|j| self.pinv_apply(&CVector::basis(m, j)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_columns(&cols))
    }

    /// Restriction to a subset of rows (positions into the row list).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&r| r >= self.m()) {
            return arg_err("row out of range");
        }
        match &self.kind {
            Kind::Structured {
                transform,
                omega,
                d,
            } => Self::structured(
                *transform,
                self.n,
                rows.iter().map(|&r| omega[r]).collect(),
                rows.iter().map(|&r| d[r]).collect(),
            ),
            Kind::Dense { matrix, .. } => {
                Self::dense(CMatrix::from_fn(rows.len(), matrix.cols, |i, j| {
                    matrix.get(rows[i], j)
                }))
            }
        }
    }

    /// Text form: `OPERATOR kind=<k> n=<N> m=<m>` then `index scale` rows
    /// (1-based), or `re im` entries in row-major order for dense matrices.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.kind {
            Kind::Structured {
                transform,
                omega,
                d,
            } => {
                writeln!(
                    s,
                    "OPERATOR kind={} n={} m={}",
                    transform.name(),
                    self.n,
                    omega.len()
                )
                .unwrap();
                for (&i, &di) in omega.iter().zip(d) {
                    writeln!(s, "{} {}", i + 1, di).unwrap();
                }
            }
            Kind::Dense { matrix, .. } => {
                writeln!(s, "OPERATOR kind=dense n={} m={}", self.n, matrix.rows).unwrap();
                for z in &matrix.data {
                    writeln!(s, "{} {}", z.re, z.im).unwrap();
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| perr(1, "empty operator file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("OPERATOR") {
            return Err(perr(hl, "expected OPERATOR header".into()));
        }
        let (mut kind, mut n, mut m) = (None, None, None);
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| perr(hl, format!("bad field '{p}'")))?;
            match k {
                "kind" => kind = Some(v.to_string()),
                "n" => n = Some(v.parse::<usize>().map_err(|_| perr(hl, "bad n".into()))?),
                "m" => m = Some(v.parse::<usize>().map_err(|_| perr(hl, "bad m".into()))?),
                _ => return Err(perr(hl, format!("unknown field '{k}'"))),
            }
        }
        let kind = kind.ok_or_else(|| perr(hl, "missing kind".into()))?;
        let n = n.ok_or_else(|| perr(hl, "missing n".into()))?;
        let m = m.ok_or_else(|| perr(hl, "missing m".into()))?;
        let pairs: Vec<(usize, f64, f64)> = lines
            .map(|(no, l)| {
                let v: Vec<&str> = l.split_whitespace().collect();
                if v.len() != 2 {
                    return Err(perr(no, "expected two fields".into()));
                }
                let a: f64 = v[0]
                    .parse()
                    .map_err(|_| perr(no, format!("bad number '{}'", v[0])))?;
                let b: f64 = v[1]
                    .parse()
                    .map_err(|_| perr(no, format!("bad number '{}'", v[1])))?;
                Ok((no, a, b))
            })
            .collect::<Result<_>>()?;
        if kind == "dense" {
            if pairs.len() != m * n {
                return Err(perr(
                    0,
                    format!("expected {} entries, found {}", m * n, pairs.len()),
                ));
            }
            let data = pairs.iter().map(|&(_, a, b)| C64::new(a, b)).collect();
            return Self::dense(CMatrix {
                rows: m,
                cols: n,
                data,
            });
        }
        let transform =
            Transform::parse(&kind).ok_or_else(|| perr(hl, format!("unknown kind '{kind}'")))?;
        if pairs.len() != m {
            return Err(perr(0, format!("expected {m} rows, found {}", pairs.len())));
        }
        let mut omega = Vec::with_capacity(m);
        let mut d = Vec::with_capacity(m);
        for &(no, i, di) in &pairs {
            if i < 1.0 || i.fract() != 0.0 {
                return Err(perr(no, "row indices are positive integers".into()));
            }
            omega.push(i as usize - 1);
            d.push(di);
        }
        Self::structured(transform, n, omega, d)
    }
}
