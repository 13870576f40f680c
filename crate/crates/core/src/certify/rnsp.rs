use rand::seq::index::sample;

use crate::error::{arg_err, Result};
use crate::linalg::{svd_small, CVector, C64};
use crate::operators::MeasurementOperator;
use crate::rng;
use crate::solver::binomial;

#[derive(Clone, Copy, Debug)]
pub struct RnspParams {
    pub s: usize,
    pub rho: f64,
    pub gamma: f64,
    /// Ascent iterations per support.
    pub iterations: usize,
    /// Largest number of supports examined.
    pub support_budget: usize,
    pub seed: u64,
}

impl RnspParams {
    pub fn new(s: usize, rho: f64, gamma: f64) -> Self {
        RnspParams {
            s,
            rho,
            gamma,
            iterations: 10_000,
            support_budget: 2_000,
            seed: 0,
        }
    }
}

/// Vector violating `||P_S x|| <= rho/sqrt(s) ||P_S^perp x||_1 + gamma ||Ax||`.
#[derive(Clone, Debug)]
pub struct RnspWitness {
    pub x: CVector,
    pub support: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Both sides of the robust null space inequality at `x` on support `s`.
pub fn rnsp_sides(
    a: &MeasurementOperator,
    x: &CVector,
    support: &[usize],
    rho: f64,
    gamma: f64,
) -> Result<(f64, f64)> {
    let s = support.len().max(1) as f64;
    let mut inside = vec![false; x.len()];
    support.iter().for_each(|&i| inside[i] = true);
    let lhs = (0..x.len())
        .filter(|&i| inside[i])
        .map(|i| x[i].norm_sqr())
        .sum::<f64>()
        .sqrt();
    let off: f64 = (0..x.len())
        .filter(|&i| !inside[i])
        .map(|i| x[i].norm())
        .sum();
    let rhs = rho / s.sqrt() * off + gamma * a.apply(x)?.norm();
    Ok((lhs, rhs))
}

fn top_s(x: &CVector, s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].norm().total_cmp(&x[i].norm()).then(i.cmp(&j)));
    let mut t = idx[..s].to_vec();
    t.sort_unstable();
    t
}

fn unit_sign(z: C64) -> C64 {
    let m = z.norm();
    if m > 0.0 {
        z / m
    } else {
        C64::new(0.0, 0.0)
    }
}

struct Search<'a> {
    a: &'a MeasurementOperator,
    p: RnspParams,
}

impl Search<'_> {
    fn value(&self, x: &CVector, support: &[usize]) -> Result<f64> {
        let (l, r) = rnsp_sides(self.a, x, support, self.p.rho, self.p.gamma)?;
        Ok(l - r)
    }

    /// Projected subgradient ascent of `lhs - rhs` on the unit sphere.
    fn ascend(&self, start: &CVector, support: &[usize]) -> Result<(f64, CVector)> {
        let n = start.len();
        let s = self.p.s as f64;
        let mut inside = vec![false; n];
        support.iter().for_each(|&i| inside[i] = true);
        let mut x = start.scale(1.0 / start.norm());
        let mut best = (self.value(&x, support)?, x.clone());
        for t in 0..self.p.iterations {
            if best.0 > 0.0 {
                break;
            }
            let ax = self.a.apply(&x)?;
            let axn = ax.norm();
            let in_norm = (0..n)
                .filter(|&i| inside[i])
                .map(|i| x[i].norm_sqr())
                .sum::<f64>()
                .sqrt();
            let mut g = CVector::zeros(n);
            for i in 0..n {
                g[i] = if inside[i] {
                    if in_norm > 0.0 {
                        x[i] / in_norm
                    } else {
                        C64::new(0.0, 0.0)
                    }
                } else {
                    -unit_sign(x[i]) * (self.p.rho / s.sqrt())
                };
            }
            if axn > 0.0 {
                g.axpy(C64::new(-self.p.gamma / axn, 0.0), &self.a.adjoint(&ax)?);
            }
            let step = 0.2 / ((t + 1) as f64).sqrt();
            x.axpy(C64::new(step, 0.0), &g);
            let nrm = x.norm();
            if nrm == 0.0 {
                break;
            }
            x = x.scale(1.0 / nrm);
            let v = self.value(&x, support)?;
            if v > best.0 {
                best = (v, x.clone());
            }
        }
        Ok(best)
    }
}

/// Searches for a violation of the robust null space property of order `s`.
///
/// Supports are enumerated exhaustively when their number is within the
/// budget; otherwise supports suggested by near-kernel vectors are tried
/// first, followed by random ones. `None` means no witness was found.
pub fn rnsp_falsify(a: &MeasurementOperator, p: RnspParams) -> Result<Option<RnspWitness>> {
    let n = a.n();
    if p.s == 0 || p.s > n {
        return arg_err("order s must lie in 1..=N");
    }
    if !(p.rho > 0.0) || !(p.gamma > 0.0) {
        return arg_err("rho and gamma must be positive");
    }
    let search = Search { a, p };
    // near-kernel directions: right singular vectors with the smallest
    // singular values, plus the kernel component of each basis vector
    let mat = a.matrix()?;
    let svd = svd_small(&mat.adjoint())?;
    let mut directions: Vec<CVector> = Vec::new();
    for j in 0..n {
        let k = a.project_kernel(&CVector::basis(n, j))?;
        if k.norm() > 1e-9 {
            directions.push(k);
        }
    }
    let k = svd.sigma.len();
    for l in (0..k).rev().take(3) {
        directions.push(svd.u.column(l));
    }
    let total = binomial(n, p.s);
    let mut supports: Vec<Vec<usize>> = Vec::new();
    if total <= p.support_budget as u64 {
        supports = crate::solver::level_supports(
            &crate::operators::LevelStructure::new(n, vec![n], vec![p.s])?,
            &[p.s],
            total,
        )?;
    } else {
        for d in &directions {
            let s = top_s(d, p.s);
            if !supports.contains(&s) {
                supports.push(s);
            }
        }
        let mut r = rng::seeded(p.seed);
        while supports.len() < p.support_budget {
            let mut s: Vec<usize> = sample(&mut r, n, p.s).into_iter().collect();
            s.sort_unstable();
            supports.push(s);
        }
        supports.truncate(p.support_budget);
    }
    let mut r = rng::seeded(p.seed ^ 0x5eed);
    for support in &supports {
        let mut starts: Vec<CVector> = Vec::new();
        // kernel vector most concentrated on the support
        let mut v = CVector::zeros(n);
        for &i in support {
            v[i] = C64::new(1.0, 0.0);
        }
        let mut kv = a.project_kernel(&v)?;
        for _ in 0..50 {
            if kv.norm() < 1e-12 {
                break;
            }
            let mut restricted = CVector::zeros(n);
            for &i in support {
                restricted[i] = kv[i];
            }
            let next = a.project_kernel(&restricted)?;
            let nn = next.norm();
            if nn < 1e-12 {
                break;
            }
            kv = next.scale(1.0 / nn);
        }
        if kv.norm() > 1e-12 {
            starts.push(kv);
        }
        let mut local = CVector::zeros(n);
        for &i in support {
            local[i] = C64::new(rng::gaussian(&mut r), rng::gaussian(&mut r));
        }
        starts.push(local);
        for st in starts {
            let (val, x) = search.ascend(&st, support)?;
            if val > 0.0 {
                // re-evaluate on the best support of the final point
                let best_support = top_s(&x, p.s);
                let (lhs, rhs) = rnsp_sides(a, &x, &best_support, p.rho, p.gamma)?;
                let (lhs, rhs, sup) = if lhs - rhs >= val {
                    (lhs, rhs, best_support)
                } else {
                    let (l, r) = rnsp_sides(a, &x, support, p.rho, p.gamma)?;
                    (l, r, support.clone())
                };
                return Ok(Some(RnspWitness {
                    x,
                    support: sup,
                    lhs,
                    rhs,
                }));
            }
        }
    }
    Ok(None)
}

/// Restricted isometry constant of order `2s` to robust null space
/// constants `(rho, gamma)`, valid for `delta < 4/sqrt(41)`.
pub fn rip_to_rnsp(delta: f64) -> Option<(f64, f64)> {
    if !(0.0..4.0 / 41f64.sqrt()).contains(&delta) {
        return None;
    }
    let den = (1.0 - delta * delta).sqrt() - delta / 4.0;
    Some((delta / den, (1.0 + delta).sqrt() / den))
}

/// `(||A(x - x')||, ||x - x'||, ratio)` with ratio 0 when the points coincide.
pub fn kernel_proximity(
    a: &MeasurementOperator,
    x: &CVector,
    x2: &CVector,
) -> Result<(f64, f64, f64)> {
    if x.len() != x2.len() {
        return crate::error::size_err("points differ in dimension");
    }
    let d = x.sub(x2);
    let dn = d.norm();
    let an = a.apply(&d)?.norm();
    Ok((an, dn, if dn == 0.0 { 0.0 } else { an / dn }))
}
