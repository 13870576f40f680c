//! Minimum enclosing ball of finitely many points in C^n.

use super::CVector;
use crate::error::{arg_err, Result};

const FW_MAX_STEPS: usize = 100_000;
const FW_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Ball {
    pub center: CVector,
    pub radius: f64,
}

fn real_points(points: &[CVector]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.to_stacked()).collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Center of the smallest sphere through `pts[idx]` inside their affine hull,
/// with barycentric weights. `None` if the points are affinely dependent.
fn circumcenter(pts: &[Vec<f64>], idx: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = idx.len();
    let p0 = &pts[idx[0]];
    let d = p0.len();
    if k == 1 {
        return Some((p0.clone(), vec![1.0]));
    }
    // c = p0 + sum_j t_j (p_j - p0), with 2 <q_i, q_j> t_j = |q_i|^2.
    let q: Vec<Vec<f64>> = idx[1..]
        .iter()
        .map(|&i| pts[i].iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let m = k - 1;
    let mut g = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = 2.0 * q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum::<f64>();
        }
        g[i][m] = q[i].iter().map(|a| a * a).sum::<f64>();
    }
    let scale = (0..m).map(|i| g[i][i]).fold(0.0, f64::max);
    let t = solve_dense(g, scale * 1e-12)?;
    let mut c = p0.clone();
    for (j, tj) in t.iter().enumerate() {
        for l in 0..d {
            c[l] += tj * q[j][l];
        }
    }
    let mut w = Vec::with_capacity(k);
    w.push(1.0 - t.iter().sum::<f64>());
    w.extend(t);
    Some((c, w))
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub(super) fn solve_dense(mut a: Vec<Vec<f64>>, pivot_tol: f64) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= pivot_tol {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    Some(x)
}

fn to_complex(c: &[f64]) -> CVector {
    CVector::from_stacked(c)
}

/// Smallest ball containing all points (radius minimal to about 1e-7).
///
/// One or two points are handled in closed form. Otherwise a Frank-Wolfe
/// iteration with away steps runs on the dual simplex problem, followed by
/// an exact circumcenter solve on the detected support.
pub fn min_enclosing_ball(points: &[CVector]) -> Result<Ball> {
    if points.is_empty() {
        return arg_err("min_enclosing_ball needs at least one point");
    }
    let n = points[0].len();
    if points.iter().any(|p| p.len() != n) {
        return arg_err("points have different dimensions");
    }
    if points.len() == 1 {
        return Ok(Ball {
            center: points[0].clone(),
            radius: 0.0,
        });
    }
    if points.len() == 2 {
        let center: CVector = points[0]
            .iter()
            .zip(points[1].iter())
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        return Ok(Ball {
            radius: points[0].dist(&points[1]) / 2.0,
            center,
        });
    }
    let pts = real_points(points);
    let k = pts.len();
    let d = pts[0].len();
    let mut lam = vec![0.0; k];
    // start from the two mutually far points
    let far_from = |p: &[f64]| {
        (0..k)
            .max_by(|&i, &j| sq_dist(&pts[i], p).total_cmp(&sq_dist(&pts[j], p)))
            .unwrap()
    };
    let a = far_from(&pts[0]);
    let b = far_from(&pts[a]);
    lam[a] += 0.5;
    lam[b] += 0.5;
    let mut c: Vec<f64> = (0..d).map(|l| 0.5 * (pts[a][l] + pts[b][l])).collect();
    for _ in 0..FW_MAX_STEPS {
        let dists: Vec<f64> = pts.iter().map(|p| sq_dist(p, &c)).collect();
        let g: f64 = lam.iter().zip(&dists).map(|(l, d)| l * d).sum();
        let j = (0..k)
            .max_by(|&i, &l| dists[i].total_cmp(&dists[l]))
            .unwrap();
        let far = dists[j];
        if g <= 0.0 {
            // all mass on coincident points
            lam.iter_mut().for_each(|l| *l = 0.0);
            lam[j] = 1.0;
            c = pts[j].clone();
            continue;
        }
        if far <= g * (1.0 + FW_TOL) {
            break;
        }
        let away = (0..k)
            .filter(|&i| lam[i] > 0.0)
            .min_by(|&i, &l| dists[i].total_cmp(&dists[l]))
            .unwrap();
        let fw_gap = far - g;
        let away_gap = g - dists[away];
        if fw_gap >= away_gap {
            let tau = (fw_gap / (2.0 * far)).clamp(0.0, 1.0);
            for l in lam.iter_mut() {
                *l *= 1.0 - tau;
            }
            lam[j] += tau;
            for l in 0..d {
                c[l] = (1.0 - tau) * c[l] + tau * pts[j][l];
            }
        } else {
            let tmax = lam[away] / (1.0 - lam[away]);
            let da = dists[away];
            let tau = if da > 0.0 {
                (away_gap / (2.0 * da)).min(tmax)
            } else {
                tmax
            };
            for l in lam.iter_mut() {
                *l *= 1.0 + tau;
            }
            lam[away] -= tau;
            if lam[away] < 1e-15 {
                lam[away] = 0.0;
            }
            for l in 0..d {
                c[l] = (1.0 + tau) * c[l] - tau * pts[away][l];
            }
        }
    }
    let mut radius = pts
        .iter()
        .map(|p| sq_dist(p, &c))
        .fold(0.0, f64::max)
        .sqrt();
    // polish on the support
    let support: Vec<usize> = (0..k).filter(|&i| lam[i] > 1e-10).collect();
    if let Some((pc, w)) = circumcenter(&pts, &support) {
        if w.iter().all(|&x| x >= -1e-9) {
            let pr = pts
                .iter()
                .map(|p| sq_dist(p, &pc))
                .fold(0.0, f64::max)
                .sqrt();
            if pr <= radius {
                radius = pr;
                c = pc;
            }
        }
    }
    Ok(Ball {
        center: to_complex(&c),
        radius,
    })
}

/// Largest distance from `center` to any point.
pub fn covering_radius(center: &CVector, points: &[CVector]) -> f64 {
    points.iter().map(|p| p.dist(center)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::rng;

    fn exhaustive_meb(points: &[CVector]) -> f64 {
        // smallest circumscribed sphere over support subsets that contains all points
        let pts = real_points(points);
        let k = pts.len();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            if let Some((c, w)) = circumcenter(&pts, &idx) {
                if w.iter().any(|&x| x < -1e-12) {
                    continue;
                }
                let r = pts
                    .iter()
                    .map(|p| sq_dist(p, &c))
                    .fold(0.0, f64::max)
                    .sqrt();
                let on = idx
                    .iter()
                    .all(|&i| (sq_dist(&pts[i], &c).sqrt() - r).abs() < 1e-9);
                if on {
                    best = best.min(r);
                }
            }
        }
        best
    }

    #[test]
    fn two_points() {
        let p = vec![CVector::from_real(&[0.0]), CVector::from_real(&[1.0])];
        let b = min_enclosing_ball(&p).unwrap();
        assert!((b.radius - 0.5).abs() < 1e-15);
        assert!((b.center[0].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_in_plane() {
        let p: Vec<CVector> = [(0.0, 0.0), (2.0, 0.0), (1.0, 3.0f64.sqrt())]
            .iter()
            .map(|&(a, b)| CVector(vec![C64::new(a, b)]))
            .collect();
        let b = min_enclosing_ball(&p).unwrap();
        assert!((b.radius - 2.0 / 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn matches_support_enumeration() {
        let mut r = rng::seeded(21);
        for trial in 0..40 {
            let k = 3 + trial % 6;
            let dim = 1 + trial % 3;
            let pts: Vec<CVector> = (0..k)
                .map(|_| rng::gaussian_cvector(&mut r, dim, 1.0))
                .collect();
            let b = min_enclosing_ball(&pts).unwrap();
            let oracle = exhaustive_meb(&pts);
            assert!(covering_radius(&b.center, &pts) <= b.radius + 1e-12);
            assert!(
                (b.radius - oracle).abs() < 1e-7,
                "trial {trial}: {} vs {}",
                b.radius,
                oracle
            );
        }
    }

    #[test]
    fn coincident_points() {
        let p = vec![CVector::from_real(&[1.0, 2.0]); 4];
        let b = min_enclosing_ball(&p).unwrap();
        assert!(b.radius < 1e-12);
    }
}
