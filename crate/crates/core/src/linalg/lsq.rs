use super::CVector;
use crate::error::{size_err, Error, Result};

/// Orthonormal basis of the span of `cols` (modified Gram-Schmidt with
/// re-orthogonalisation). Columns with relative norm below `tol` are dropped.
pub fn orthonormal_basis(cols: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.clone();
        let start = v.norm();
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v.axpy(-p, q);
            }
        }
        let nrm = v.norm();
        if nrm > tol * start.max(f64::MIN_POSITIVE) && nrm > 0.0 {
            basis.push(v.scale(1.0 / nrm));
        }
    }
    basis
}

/// `min_c ||sum_j c_j cols_j - y||`.
pub fn least_squares_residual(cols: &[CVector], y: &CVector) -> f64 {
    let basis = orthonormal_basis(cols, 1e-12);
    let mut r = y.clone();
    for q in &basis {
        let p = q.dot(&r);
        r.axpy(-p, q);
    }
    r.norm()
}

/// Solves the square real system `a x = b` by partial pivoting.
pub fn solve_real(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return size_err("system is not square");
    }
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &v)| r.iter().copied().chain([v]).collect())
        .collect();
    super::ball::solve_dense(aug, scale * 1e-14)
        .ok_or_else(|| Error::Argument("singular system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn residual_of_span_member_is_zero() {
        let a = CVector::from_real(&[1.0, 0.0, 1.0]);
        let b = CVector(vec![
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let y = a.scale(2.0).add(&b.scale_c(C64::new(0.0, -3.0)));
        assert!(least_squares_residual(&[a.clone(), b], &y) < 1e-14);
        let e = CVector::from_real(&[1.0, 0.0, -1.0]);
        assert!((least_squares_residual(&[a], &e) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn small_system() {
        // 2x + y = 3, x - y = 0 -> x = y = 1
        let x = solve_real(&[vec![2.0, 1.0], vec![1.0, -1.0]], &[3.0, 0.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(solve_real(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 2.0]).is_err());
    }
}
