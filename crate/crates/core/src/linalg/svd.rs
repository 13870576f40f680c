//! One-sided Jacobi SVD for small complex matrices.

use super::{CMatrix, CVector, C64};
use crate::error::{size_err, Result};

pub const MAX_DIM: usize = 256;
const OFF_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

/// Thin SVD `M = U diag(sigma) V^*` with `k = min(rows, cols)` and
/// singular values sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Numerical rank with the usual `max(m, n) * eps * sigma_max` cutoff.
    pub fn rank(&self) -> usize {
        let tol = self.tolerance();
        self.sigma.iter().filter(|&&s| s > tol).count()
    }

    pub fn tolerance(&self) -> f64 {
        let dim = self.u.rows.max(self.v.rows) as f64;
        dim * f64::EPSILON * self.sigma_max().max(f64::MIN_POSITIVE) * 4.0
    }

    pub fn reconstruct(&self) -> CMatrix {
        let k = self.sigma.len();
        CMatrix::from_fn(self.u.rows, self.v.rows, |i, j| {
            (0..k)
                .map(|l| self.u.get(i, l) * self.sigma[l] * self.v.get(j, l).conj())
                .sum()
        })
    }
}

/// Columns-only Jacobi on `a` (rows >= cols). Returns `(a * V, V)`.
fn jacobi_columns(mut a: CMatrix) -> (CMatrix, CMatrix) {
    let (m, n) = (a.rows, a.cols);
    let mut v = CMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = a.data[i * n + p];
                    let aq = a.data[i * n + q];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let rel = g / (alpha * beta).sqrt();
                off = off.max(rel);
                if rel < OFF_TOL {
                    continue;
                }
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let rot = |mat: &mut CMatrix| {
                    let cols = mat.cols;
                    for i in 0..mat.rows {
                        let xp = mat.data[i * cols + p];
                        let xq = mat.data[i * cols + q] * phase.conj();
                        mat.data[i * cols + p] = xp * c - xq * s;
                        mat.data[i * cols + q] = xp * s + xq * c;
                    }
                };
                rot(&mut a);
                rot(&mut v);
            }
        }
        if off < OFF_TOL {
            break;
        }
    }
    (a, v)
}

fn complete_orthonormal(u: &mut CMatrix, filled: &[bool]) {
    let m = u.rows;
    let mut next_basis = 0;
    for j in 0..u.cols {
        if filled[j] {
            continue;
        }
        loop {
            let mut cand = CVector::basis(m, next_basis % m);
            next_basis += 1;
            for _ in 0..2 {
                for l in (0..u.cols).filter(|&l| l != j) {
                    let col = u.column(l);
                    let proj = col.dot(&cand);
                    cand.axpy(-proj, &col);
                }
            }
            let nrm = cand.norm();
            if nrm > 1e-8 {
                for i in 0..m {
                    u.set(i, j, cand[i] / nrm);
                }
                break;
            }
            if next_basis > 4 * m + u.cols {
                break;
            }
        }
    }
}

fn svd_tall(a: &CMatrix) -> Svd {
    let (m, n) = (a.rows, a.cols);
    let (av, v) = jacobi_columns(a.clone());
    let norms: Vec<f64> = (0..n).map(|j| av.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let tiny = (m.max(n) as f64) * f64::EPSILON * smax * 4.0;
    let mut u = CMatrix::zeros(m, n);
    let mut vs = CMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let mut filled = vec![false; n];
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        for i in 0..n {
            vs.set(i, k, v.get(i, j));
        }
        if s > tiny && s > 0.0 {
            for i in 0..m {
                u.set(i, k, av.get(i, j) / s);
            }
            filled[k] = true;
        }
    }
    complete_orthonormal(&mut u, &filled);
    Svd { u, sigma, v: vs }
}

/// Thin SVD of a matrix with both dimensions at most 256.
pub fn svd_small(a: &CMatrix) -> Result<Svd> {
    if a.rows > MAX_DIM || a.cols > MAX_DIM {
        return size_err(format!(
            "svd_small supports at most {MAX_DIM}x{MAX_DIM}, got {}x{}",
            a.rows, a.cols
        ));
    }
    if a.rows == 0 || a.cols == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(a.rows, 0),
            sigma: vec![],
            v: CMatrix::zeros(a.cols, 0),
        });
    }
    if a.rows >= a.cols {
        Ok(svd_tall(a))
    } else {
        let t = svd_tall(&a.adjoint());
        Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

/// Moore-Penrose pseudoinverse applied to `y`, from a precomputed SVD.
pub fn pinv_apply_svd(svd: &Svd, y: &[C64]) -> CVector {
    let tol = svd.tolerance();
    let mut out = CVector::zeros(svd.v.rows);
    for (l, &s) in svd.sigma.iter().enumerate() {
        if s <= tol {
            continue;
        }
        let ul = svd.u.column(l);
        let coef: C64 = ul.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>() / s;
        for i in 0..svd.v.rows {
            out[i] += svd.v.get(i, l) * coef;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_matrix(r: &mut rng::Rng, m: usize, n: usize) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| C64::new(rng::gaussian(r), rng::gaussian(r)))
    }

    #[test]
    fn diagonal_example() {
        let mut a = CMatrix::zeros(2, 2);
        a.set(0, 0, C64::new(3.0, 0.0));
        a.set(1, 1, C64::new(4.0, 0.0));
        let s = svd_small(&a).unwrap();
        assert!((s.sigma[0] - 4.0).abs() < 1e-14);
        assert!((s.sigma[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_and_is_orthonormal() {
        let mut r = rng::seeded(5);
        for &(m, n) in &[(8, 12), (12, 8), (5, 5), (1, 7), (30, 3)] {
            let a = random_matrix(&mut r, m, n);
            let s = svd_small(&a).unwrap();
            let rec = s.reconstruct();
            let err: f64 = rec
                .data
                .iter()
                .zip(&a.data)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-12 * a.frobenius_norm(), "{m}x{n}");
            let k = m.min(n);
            for i in 0..k {
                for j in 0..k {
                    let uij = s.u.column(i).dot(&s.u.column(j));
                    let vij = s.v.column(i).dot(&s.v.column(j));
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((uij - e).norm() < 1e-12);
                    assert!((vij - e).norm() < 1e-12);
                }
            }
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_completion() {
        let col: CVector = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(1.0, 1.0)].into();
        let a = CMatrix::from_columns(&[col.clone(), col.scale(2.0)]);
        let s = svd_small(&a).unwrap();
        assert_eq!(s.rank(), 1);
        let d = s.u.column(0).dot(&s.u.column(1));
        assert!(d.norm() < 1e-12);
        assert!((s.u.column(1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(svd_small(&CMatrix::zeros(257, 2)).is_err());
    }

    #[test]
    fn pinv_solves_least_squares() {
        let mut r = rng::seeded(9);
        let a = random_matrix(&mut r, 4, 9);
        let s = svd_small(&a).unwrap();
        let y = rng::gaussian_cvector(&mut r, 4, 1.0);
        let x = pinv_apply_svd(&s, &y);
        assert!(a.matvec(&x).dist(&y) < 1e-12);
    }
}
