use crate::error::{arg_err, size_err, Result};
use crate::instability::Metric;
use crate::linalg::{covering_radius, min_enclosing_ball, CVector};
use crate::operators::MeasurementOperator;

/// Largest domain handled by [`optimality_constant`].
pub const MAX_EXACT_DOMAIN: usize = 64;

/// Default grouping tolerance for measurements.
pub const FIBER_TOL: f64 = 1e-10;

/// Finite domain `M_1` with the metric used for reconstruction errors.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDomain {
    pub elements: Vec<CVector>,
    pub metric: Metric,
}

impl FiniteDomain {
    pub fn new(elements: Vec<CVector>, metric: Metric) -> Result<Self> {
        if elements.is_empty() {
            return arg_err("domain is empty");
        }
        let n = elements[0].len();
        if elements.iter().any(|x| x.len() != n) {
            return size_err("domain elements have different lengths");
        }
        for i in 0..elements.len() {
            if elements[..i].contains(&elements[i]) {
                return arg_err(format!("element {i} repeats an earlier element"));
            }
        }
        Ok(FiniteDomain { elements, metric })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `max { sup_z inf_x d(z, x), sup_x inf_z d(z, x) }`.
pub fn hausdorff(x: &[CVector], z: &[CVector], metric: Metric) -> Result<f64> {
    if x.is_empty() || z.is_empty() {
        return arg_err("hausdorff distance of an empty set");
    }
    let directed = |a: &[CVector], b: &[CVector]| {
        a.iter()
            .map(|p| {
                b.iter()
                    .map(|q| metric.dist(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(x, z).max(directed(z, x)))
}

/// Domain indices grouped by equal measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberPartition {
    pub groups: Vec<Vec<usize>>,
    /// Measurement of the first member of each group.
    pub measurements: Vec<CVector>,
    pub tau: f64,
}

impl FiberPartition {
    /// Group whose measurement lies within `tau` of `y`.
    pub fn locate(&self, y: &CVector) -> Option<usize> {
        self.measurements.iter().position(|m| m.dist(y) <= self.tau)
    }
}

/// Transitive closure of `||A x - A x'|| <= tau`.
pub fn fibers(a: &MeasurementOperator, domain: &FiniteDomain, tau: f64) -> Result<FiberPartition> {
    let ys = domain
        .elements
        .iter()
        .map(|x| a.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let n = ys.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if ys[i].dist(&ys[j]) <= tau {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if index_of_root[r] == usize::MAX {
            index_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of_root[r]].push(i);
    }
    let measurements = groups.iter().map(|g| ys[g[0]].clone()).collect();
    Ok(FiberPartition {
        groups,
        measurements,
        tau,
    })
}

/// Target set of the reconstruction maps in the optimality constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Codomain {
    /// Any point of `C^N`; the best output on a fiber is its enclosing-ball center.
    #[default]
    Ambient,
    /// Outputs restricted to elements of the domain.
    Restricted,
}

impl Codomain {
    pub fn parse(s: &str) -> Option<Codomain> {
        match s {
            "ambient" => Some(Codomain::Ambient),
            "restricted" => Some(Codomain::Restricted),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Codomain::Ambient => "ambient",
            Codomain::Restricted => "restricted",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimalityResult {
    pub c_opt: f64,
    pub partition: FiberPartition,
    /// Output of the witness map on each fiber.
    pub outputs: Vec<CVector>,
    /// Worst error of the witness output on each fiber.
    pub radii: Vec<f64>,
    pub codomain: Codomain,
}

impl OptimalityResult {
    /// Witness map as a lookup on measurements.
    pub fn witness(&self, y: &CVector) -> Option<&CVector> {
        self.partition.locate(y).map(|g| &self.outputs[g])
    }

    /// `sup_x d(phi(A x), x)` of the witness map, recomputed from scratch.
    pub fn sup_error(&self, a: &MeasurementOperator, domain: &FiniteDomain) -> Result<f64> {
        let mut worst = 0.0f64;
        for x in &domain.elements {
            let out = self
                .witness(&a.apply(x)?)
                .ok_or_else(|| crate::Error::Argument("measurement outside every fiber".into()))?;
            worst = worst.max(domain.metric.dist(out, x));
        }
        Ok(worst)
    }
}

/// `inf_phi sup_x d^H(phi(A x), x)` over maps on `A(M_1)`, fiber by fiber.
///
/// Singleton outputs suffice since `d^H(Z, {x}) = max_z d(z, x)`. In the
/// ambient codomain the value on a fiber is its minimum enclosing ball radius
/// (Euclidean metric only); in the restricted codomain it is the best
/// one-center among domain elements.
pub fn optimality_constant(
    a: &MeasurementOperator,
    domain: &FiniteDomain,
    codomain: Codomain,
) -> Result<OptimalityResult> {
    if domain.len() > MAX_EXACT_DOMAIN {
        return size_err(format!(
            "domain of {} elements exceeds {MAX_EXACT_DOMAIN}",
            domain.len()
        ));
    }
    if domain.elements[0].len() != a.n() {
        return size_err("domain does not match the operator");
    }
    if codomain == Codomain::Ambient && domain.metric != Metric::L2 {
        return arg_err("the ambient codomain is supported for the l2 metric only");
    }
    let partition = fibers(a, domain, FIBER_TOL)?;
    let mut outputs = Vec::with_capacity(partition.groups.len());
    let mut radii = Vec::with_capacity(partition.groups.len());
    for g in &partition.groups {
        let pts: Vec<CVector> = g.iter().map(|&i| domain.elements[i].clone()).collect();
        let center = match codomain {
            Codomain::Ambient => {
                if pts.len() == 1 {
                    pts[0].clone()
                } else if pts.len() == 2 {
                    pts[0].add(&pts[1]).scale(0.5)
                } else {
                    min_enclosing_ball(&pts)?.center
                }
            }
            Codomain::Restricted => {
                let worst = |c: &CVector| {
                    pts.iter()
                        .map(|p| domain.metric.dist(c, p))
                        .fold(0.0, f64::max)
                };
                let mut best = (f64::INFINITY, 0usize);
                for (i, c) in domain.elements.iter().enumerate() {
                    let w = worst(c);
                    if w < best.0 {
                        best = (w, i);
                    }
                }
                domain.elements[best.1].clone()
            }
        };
        let r = match codomain {
            Codomain::Ambient => covering_radius(&center, &pts),
            Codomain::Restricted => pts
                .iter()
                .map(|p| domain.metric.dist(&center, p))
                .fold(0.0, f64::max),
        };
        outputs.push(center);
        radii.push(r);
    }
    let c_opt = radii.iter().copied().fold(0.0, f64::max);
    Ok(OptimalityResult {
        c_opt,
        partition,
        outputs,
        radii,
        codomain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Transform;
    use crate::rng;

    #[test]
    fn hausdorff_reductions() {
        let a = CVector::from_real(&[1.0, 2.0]);
        let z = CVector::from_real(&[3.0, -4.0]);
        let zero = CVector::zeros(2);
        assert_eq!(
            hausdorff(
                std::slice::from_ref(&a),
                std::slice::from_ref(&a),
                Metric::L2
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            hausdorff(&[zero.clone(), z.clone()], &[zero], Metric::L2).unwrap(),
            5.0
        );
        assert!(hausdorff(&[], &[a], Metric::L2).is_err());
    }

    #[test]
    fn hausdorff_triangle_inequality() {
        let mut r = rng::seeded(5);
        let mut set = |k: usize| -> Vec<CVector> {
            (0..k)
                .map(|_| rng::gaussian_cvector(&mut r, 3, 1.0))
                .collect()
        };
        for _ in 0..20 {
            let (x, y, z) = (set(3), set(2), set(4));
            let d = |p: &[CVector], q: &[CVector]| hausdorff(p, q, Metric::L2).unwrap();
            assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        }
    }

    #[test]
    fn kernel_pair_gives_a_quarter() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 8, vec![0, 1, 2, 7]).unwrap();
        let mut r = rng::seeded(2);
        let x1 = a
            .project_cokernel(&rng::gaussian_cvector(&mut r, 8, 1.0))
            .unwrap();
        let x1 = x1.scale(0.5 / x1.norm());
        let z1 = a
            .project_kernel(&rng::gaussian_cvector(&mut r, 8, 1.0))
            .unwrap();
        let z1 = z1.scale(0.5 / z1.norm());
        let x2 = a
            .project_cokernel(&rng::gaussian_cvector(&mut r, 8, 1.0))
            .unwrap();
        let d = FiniteDomain::new(
            vec![x1.add(&z1), x1.clone(), x2.scale(0.3 / x2.norm())],
            Metric::L2,
        )
        .unwrap();
        let res = optimality_constant(&a, &d, Codomain::Ambient).unwrap();
        assert!((res.c_opt - 0.25).abs() < 1e-12);
        assert_eq!(res.partition.groups.len(), 2);
        assert!(res.sup_error(&a, &d).unwrap() <= res.c_opt + 1e-8);
        let restricted = optimality_constant(&a, &d, Codomain::Restricted).unwrap();
        assert!((restricted.c_opt - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cokernel_domain_is_recovered_exactly() {
        let a = MeasurementOperator::unscaled(Transform::Walsh, 8, vec![0, 3, 5]).unwrap();
        let mut r = rng::seeded(3);
        let xs = (0..6)
            .map(|_| {
                a.project_cokernel(&rng::gaussian_cvector(&mut r, 8, 1.0))
                    .unwrap()
            })
            .collect();
        let d = FiniteDomain::new(xs, Metric::L2).unwrap();
        assert_eq!(
            optimality_constant(&a, &d, Codomain::Ambient)
                .unwrap()
                .c_opt,
            0.0
        );
    }

    #[test]
    fn ambient_never_exceeds_restricted() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 8, vec![0, 1]).unwrap();
        let mut r = rng::seeded(4);
        for _ in 0..10 {
            let base = rng::gaussian_cvector(&mut r, 8, 1.0);
            let xs: Vec<CVector> = (0..5)
                .map(|_| {
                    base.add(
                        &a.project_kernel(&rng::gaussian_cvector(&mut r, 8, 1.0))
                            .unwrap(),
                    )
                })
                .collect();
            let d = FiniteDomain::new(xs, Metric::L2).unwrap();
            let amb = optimality_constant(&a, &d, Codomain::Ambient).unwrap();
            let res = optimality_constant(&a, &d, Codomain::Restricted).unwrap();
            assert!(amb.c_opt <= res.c_opt + 1e-7);
            assert!(amb.sup_error(&a, &d).unwrap() <= amb.c_opt + 1e-8);
        }
    }

    #[test]
    fn two_point_fibers_match_half_distance() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 4, vec![0]).unwrap();
        let x = CVector::from_real(&[1.0, 1.0, 1.0, 1.0]);
        let x2 = x.add(&CVector::from_real(&[1.0, -1.0, 0.5, -0.5]));
        let d = FiniteDomain::new(vec![x.clone(), x2.clone()], Metric::L2).unwrap();
        let res = optimality_constant(&a, &d, Codomain::Ambient).unwrap();
        assert!((res.c_opt - x.dist(&x2) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn oversized_and_duplicate_domains_are_rejected() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 4, vec![0]).unwrap();
        let xs: Vec<CVector> = (0..65)
            .map(|i| CVector::from_real(&[i as f64, 0.0, 0.0, 0.0]))
            .collect();
        let d = FiniteDomain::new(xs, Metric::L2).unwrap();
        assert!(matches!(
            optimality_constant(&a, &d, Codomain::Ambient),
            Err(crate::Error::Size(_))
        ));
        let x = CVector::from_real(&[1.0; 4]);
        assert!(FiniteDomain::new(vec![x.clone(), x], Metric::L2).is_err());
    }
}
