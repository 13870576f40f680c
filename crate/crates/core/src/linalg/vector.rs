use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CVector(pub Vec<C64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_real(xs: &[f64]) -> Self {
        xs.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inner product `<self, other> = sum conj(self_i) other_i`.
    pub fn dot(&self, other: &CVector) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, a: f64) -> CVector {
        self.0.iter().map(|z| z * a).collect()
    }

    pub fn scale_c(&self, a: C64) -> CVector {
        self.0.iter().map(|z| z * a).collect()
    }

    pub fn add(&self, other: &CVector) -> CVector {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: C64, x: &CVector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    pub fn dist(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real/imaginary stacking `[re_0..re_{n-1}, im_0..im_{n-1}]`.
    pub fn to_stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.len());
        out.extend(self.0.iter().map(|z| z.re));
        out.extend(self.0.iter().map(|z| z.im));
        out
    }

    pub fn from_stacked(v: &[f64]) -> CVector {
        let n = v.len() / 2;
        (0..n).map(|i| C64::new(v[i], v[n + i])).collect()
    }
}

impl Deref for CVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for CVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<Vec<C64>> for CVector {
    fn from(v: Vec<C64>) -> Self {
        CVector(v)
    }
}

impl FromIterator<C64> for CVector {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        CVector(iter.into_iter().collect())
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[CVector]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> CVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> CVector {
        CVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn matvec(&self, x: &[C64]) -> CVector {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `M^* y`
    pub fn matvec_adjoint(&self, y: &[C64]) -> CVector {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = CVector::zeros(self.cols);
        for i in 0..self.rows {
            let yi = y[i];
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.0.iter_mut().zip(row) {
                *o += a.conj() * yi;
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Columns selected by index.
    pub fn select_columns(&self, idx: &[usize]) -> CMatrix {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real form `[[Re, -Im], [Im, Re]]` acting on stacked vectors.
    pub fn realify(&self) -> Vec<Vec<f64>> {
        let (m, n) = (self.rows, self.cols);
        let mut out = vec![vec![0.0; 2 * n]; 2 * m];
        for i in 0..m {
            for j in 0..n {
                let z = self.get(i, j);
                out[i][j] = z.re;
                out[i][n + j] = -z.im;
                out[m + i][j] = z.im;
                out[m + i][n + j] = z.re;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stacking_round_trip() {
        let v: CVector = vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.5)].into();
        assert_eq!(v.to_stacked(), vec![1.0, -3.0, 2.0, 0.5]);
        assert_eq!(CVector::from_stacked(&v.to_stacked()), v);
    }

    #[test]
    fn realify_matches_complex_product() {
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64 + 1.0, j as f64 - 1.0));
        let x: CVector = vec![C64::new(0.5, -1.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0)].into();
        let y = m.matvec(&x);
        let r = m.realify();
        let xs = x.to_stacked();
        let ys: Vec<f64> = r
            .iter()
            .map(|row| row.iter().zip(&xs).map(|(a, b)| a * b).sum())
            .collect();
        let back = CVector::from_stacked(&ys);
        assert!(back.dist(&y) < 1e-14);
    }

    #[test]
    fn adjoint_matvec_consistent() {
        let m = CMatrix::from_fn(3, 2, |i, j| C64::new((i * 2 + j) as f64, 1.0));
        let y: CVector = vec![C64::new(1.0, 1.0), C64::new(0.0, -2.0), C64::new(3.0, 0.0)].into();
        let a = m.matvec_adjoint(&y);
        let b = m.adjoint().matvec(&y);
        assert!(a.dist(&b) < 1e-14);
    }
}
