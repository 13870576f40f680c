use super::map::{Metric, ReconstructionMap};
use crate::error::{arg_err, Result};
use crate::linalg::{CVector, C64};
use crate::operators::{LevelStructure, MeasurementOperator, Sparsifier};
use crate::rng;
use crate::solver::cs_lipschitz_cap;

/// Image-space shift `z = x' - x` and its measurement `e = A z`.
#[derive(Clone, Debug)]
pub struct FalseWitness {
    pub x: CVector,
    pub z: CVector,
    pub e: CVector,
}

pub fn falsewitness(x: &CVector, x2: &CVector, a: &MeasurementOperator) -> Result<FalseWitness> {
    if x.len() != x2.len() || x.len() != a.n() {
        return crate::error::size_err("witness vectors do not match the operator");
    }
    let z = x2.sub(x);
    let e = a.apply(&z)?;
    Ok(FalseWitness { x: x.clone(), z, e })
}

#[derive(Clone, Copy, Debug)]
pub struct WitnessCheck {
    /// `d(R(Ax + e), x + z)`.
    pub false_positive: f64,
    /// `d(R(A(x + z) - e), x)`.
    pub false_negative: f64,
    pub eta: f64,
}

impl WitnessCheck {
    pub fn positive_holds(&self) -> bool {
        self.false_positive <= self.eta
    }
    pub fn negative_holds(&self) -> bool {
        self.false_negative <= self.eta
    }
}

impl FalseWitness {
    /// Evaluates both inequalities at the centres of the witness balls.
    pub fn check(
        &self,
        map: &dyn ReconstructionMap,
        a: &MeasurementOperator,
        eta: f64,
        metric: Metric,
    ) -> Result<WitnessCheck> {
        let y = a.apply(&self.x)?;
        let x2 = self.x.add(&self.z);
        let pos = metric.dist(&map.eval(&y.add(&self.e))?, &x2);
        let y2 = a.apply(&x2)?;
        let neg = metric.dist(&map.eval(&y2.sub(&self.e))?, &self.x);
        Ok(WitnessCheck {
            false_positive: pos,
            false_negative: neg,
            eta,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BallCertificate {
    /// Radius of the measurement ball, `sigma_min(A) r_1`.
    pub r2: f64,
    /// `(dist(x', B_x) - 2 eta) / epsilon`.
    pub bound: f64,
}

/// Measurement-ball radius for `x` in the orthogonal complement of the kernel.
pub fn ball_certificate(
    a: &MeasurementOperator,
    x: &CVector,
    x2: &CVector,
    r1: f64,
    eta: f64,
    epsilon: f64,
) -> Result<BallCertificate> {
    if !(r1 > 0.0) {
        return arg_err("r1 must be positive");
    }
    let k = a.project_kernel(x)?.norm();
    if k > 1e-8 * x.norm() {
        return arg_err(format!("x has kernel component of norm {k:e}"));
    }
    let dist = (x2.dist(x) - r1).max(0.0);
    Ok(BallCertificate {
        r2: a.sigma_min()? * r1,
        bound: super::lipschitz_lower_bound(dist, eta, epsilon)?,
    })
}

/// `max_x ||A R(Ax) - Ax||`.
pub fn consistency_residual(
    map: &dyn ReconstructionMap,
    a: &MeasurementOperator,
    xs: &[CVector],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in xs {
        let y = a.apply(x)?;
        worst = worst.max(a.apply(&map.eval(&y)?)?.dist(&y));
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct DestabilizingPair {
    /// `x_1 + z_1` with `||z_1|| = gamma` and `0 < ||A z_1|| <= gamma^2 / 2`.
    pub first: CVector,
    /// `x_2 + z_2` with `z_2` in the kernel and `||z_2|| = gamma / 4`.
    pub second: CVector,
    pub z1: CVector,
    pub z2: CVector,
    pub beta: f64,
}

fn unit(v: CVector, what: &str) -> Result<CVector> {
    let n = v.norm();
    if n < 1e-10 {
        return arg_err(format!("{what} is trivial"));
    }
    Ok(v.scale(1.0 / n))
}

/// Two extra training points next to `xs[0]` and `xs[1]`.
pub fn destabilizing_pair(
    a: &MeasurementOperator,
    xs: &[CVector],
    gamma: f64,
    seed: u64,
) -> Result<DestabilizingPair> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return arg_err("gamma must lie in (0, 1)");
    }
    if xs.len() < 2 {
        return arg_err("two training points are required");
    }
    let n = a.n();
    let mut r = rng::seeded(seed);
    let u = unit(
        a.project_kernel(&rng::gaussian_real_cvector(&mut r, n, 1.0))?,
        "kernel",
    )?;
    let v = unit(
        a.project_cokernel(&rng::gaussian_real_cvector(&mut r, n, 1.0))?,
        "range of the adjoint",
    )?;
    let w = unit(
        a.project_kernel(&rng::gaussian_real_cvector(&mut r, n, 1.0))?,
        "kernel",
    )?;
    let beta = gamma * gamma / (2.0 * a.norm()?);
    let mut z1 = u.scale((gamma * gamma - beta * beta).sqrt());
    z1.axpy(C64::new(beta, 0.0), &v);
    let z2 = w.scale(gamma / 4.0);
    let az1 = a.apply(&z1)?.norm();
    if (z1.norm() - gamma).abs() > 1e-10 || !(az1 > 0.0 && az1 <= gamma * gamma / 2.0 + 1e-10) {
        return arg_err("constructed perturbation fails its norm checks");
    }
    if a.apply(&z2)?.norm() > 1e-10 || (z2.norm() - gamma / 4.0).abs() > 1e-10 {
        return arg_err("kernel perturbation fails its norm checks");
    }
    Ok(DestabilizingPair {
        first: xs[0].add(&z1),
        second: xs[1].add(&z2),
        z1,
        z2,
        beta,
    })
}

#[derive(Clone, Debug)]
pub struct OverperformanceDomain {
    /// `M_1` followed by `0` and `z`.
    pub elements: Vec<CVector>,
    pub z: CVector,
    pub z1: CVector,
    pub kappa: f64,
    pub p: f64,
    /// Predicted lower bound `1 / epsilon` holds for every `epsilon >= 1 / p`.
    pub min_epsilon: f64,
    pub cs_cap: f64,
}

/// `M_1 u {0, z}` with `z = z_1 + kappa z_2 / ||z_2||`, where `z_1 = H^* c` is a
/// unit vector supported in the vanishing level `k` and `kappa = (1 - 2/p)/(2p)`.
pub fn overperformance_domain(
    levels: &LevelStructure,
    k: usize,
    p: f64,
    base: &[CVector],
) -> Result<OverperformanceDomain> {
    if k >= levels.r() {
        return arg_err("level index out of range");
    }
    if levels.sparsities[k] != 0 {
        return arg_err(format!("level {} is not vanishing", k + 1));
    }
    if !(p > 2.0) {
        return arg_err("p must exceed 2");
    }
    let z2 = base
        .iter()
        .find(|x| x.norm() > 0.0)
        .ok_or_else(|| crate::Error::Argument("base domain has no nonzero element".into()))?;
    let kappa = (1.0 - 2.0 / p) / (2.0 * p);
    let c = CVector::basis(levels.n, levels.ranges()[k].start);
    let z1 = Sparsifier::Haar.inverse(&c)?;
    let mut z = z1.clone();
    z.axpy(C64::new(kappa / z2.norm(), 0.0), z2);
    let mut elements = base.to_vec();
    elements.push(CVector::zeros(levels.n));
    elements.push(z.clone());
    Ok(OverperformanceDomain {
        elements,
        z,
        z1,
        kappa,
        p,
        min_epsilon: 1.0 / p,
        cs_cap: cs_lipschitz_cap(levels.r()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Transform;

    #[test]
    fn coincident_points_give_zero_witness() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 4, vec![0, 1]).unwrap();
        let x = CVector::from_real(&[1.0, 2.0, 3.0, 4.0]);
        let w = falsewitness(&x, &x, &a).unwrap();
        assert_eq!(w.z.norm(), 0.0);
        assert_eq!(w.e.norm(), 0.0);
    }

    #[test]
    fn kappa_at_four() {
        let levels = LevelStructure::dyadic(4, vec![1, 0, 1, 1]).unwrap();
        let base = vec![CVector::basis(8, 0)];
        let d = overperformance_domain(&levels, 1, 4.0, &base).unwrap();
        assert_eq!(d.kappa, 1.0 / 16.0);
        assert!((d.z1.norm() - 1.0).abs() < 1e-14);
        assert_eq!(d.elements.len(), 3);
        assert!(overperformance_domain(&levels, 0, 4.0, &base).is_err());
    }

    #[test]
    fn ball_radius_scales_with_operator() {
        let omega = vec![0, 1, 2];
        let a = MeasurementOperator::unscaled(Transform::Fourier, 8, omega.clone()).unwrap();
        let a2 =
            MeasurementOperator::structured(Transform::Fourier, 8, omega, vec![2.0; 3]).unwrap();
        let mut r = rng::seeded(1);
        let x = a
            .project_cokernel(&rng::gaussian_cvector(&mut r, 8, 1.0))
            .unwrap();
        let x2 = x.add(&rng::gaussian_cvector(&mut r, 8, 1.0));
        let c1 = ball_certificate(&a, &x, &x2, 0.1, 0.01, 0.02).unwrap();
        let c2 = ball_certificate(&a2, &x, &x2, 0.1, 0.01, 0.02).unwrap();
        assert!((c1.r2 - 0.1).abs() < 1e-12);
        assert!((c2.r2 - 0.2).abs() < 1e-12);
        assert!(ball_certificate(&a, &x2, &x, 0.1, 0.01, 0.02).is_err());
    }
}
