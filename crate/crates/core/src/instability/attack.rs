use super::map::ReconstructionMap;
use crate::error::{arg_err, Result};
use crate::linalg::{CVector, C64};
use crate::operators::MeasurementOperator;
use crate::rng;

#[derive(Clone, Debug)]
pub struct AttackConfig {
    pub radius: f64,
    pub steps: usize,
    pub seed: u64,
    /// Starting perturbations, e.g. `A^dagger A (x' - x)`.
    pub pool: Vec<CVector>,
    /// Initial step of the finite-difference path; `0.1 radius` when absent.
    pub a0: Option<f64>,
    /// Initial difference width; `1e-3 ||x||` when absent.
    pub c0: Option<f64>,
}

impl AttackConfig {
    pub fn new(radius: f64, steps: usize, seed: u64) -> Self {
        AttackConfig {
            radius,
            steps,
            seed,
            pool: Vec::new(),
            a0: None,
            c0: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AttackResult {
    pub r: CVector,
    /// `||R(A(x + r)) - x||^2`.
    pub objective: f64,
    pub evaluations: usize,
}

struct Objective<'a> {
    map: &'a dyn ReconstructionMap,
    a: &'a MeasurementOperator,
    x: &'a CVector,
    y: CVector,
    radius: f64,
}

impl Objective<'_> {
    fn value(&self, r: &CVector) -> Result<f64> {
        let out = self.map.eval(&self.y.add(&self.a.apply(r)?))?;
        Ok(out.sub(self.x).norm_sqr())
    }

    fn gradient(&self, r: &CVector) -> Result<Option<CVector>> {
        let yr = self.y.add(&self.a.apply(r)?);
        let out = self.map.eval(&yr)?;
        let w = out.sub(self.x).scale(2.0);
        match self.map.vjp(&yr, &w) {
            Some(g) => Ok(Some(self.a.adjoint(&g?)?)),
            None => Ok(None),
        }
    }

    fn project(&self, r: CVector) -> CVector {
        let n = r.norm();
        if n > self.radius {
            r.scale(self.radius / n * (1.0 - 1e-15))
        } else {
            r
        }
    }
}

/// Maximizes `||R(A(x + r)) - x||^2` over `||r|| <= radius`.
///
/// Maps with gradients use normalized projected gradient ascent; black-box
/// maps use simultaneous-perturbation differences with gains
/// `a_t = a0 / (t + 10)^0.602` and `c_t = c0 / t^0.101`.
pub fn adversarial_search(
    map: &dyn ReconstructionMap,
    a: &MeasurementOperator,
    x: &CVector,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    if !(cfg.radius > 0.0) {
        return arg_err("radius must be positive");
    }
    let obj = Objective {
        map,
        a,
        x,
        y: a.apply(x)?,
        radius: cfg.radius,
    };
    let n = a.n();
    let mut r = rng::seeded(cfg.seed);
    let mut starts: Vec<CVector> = cfg.pool.iter().map(|p| obj.project(p.clone())).collect();
    starts.push(rng::unit_direction(&mut r, n).scale(0.5 * cfg.radius));
    let mut best = (obj.value(&CVector::zeros(n))?, CVector::zeros(n));
    let mut evals = 1;
    for start in starts {
        let mut cur = start;
        let mut val = obj.value(&cur)?;
        evals += 1;
        if val > best.0 {
            best = (val, cur.clone());
        }
        let gradient_path = map.has_gradient();
        let a0 = cfg.a0.unwrap_or(0.1 * cfg.radius);
        let c0 = cfg.c0.unwrap_or(1e-3 * x.norm().max(1e-12));
        for t in 1..=cfg.steps {
            let g = if gradient_path {
                evals += 1;
                obj.gradient(&cur)?
            } else {
                None
            };
            let (g, step) = match g {
                Some(g) => (g, 0.25 * cfg.radius / (t as f64).sqrt()),
                None => {
                    let ct = c0 / (t as f64).powf(0.101);
                    let delta: CVector = (0..n)
                        .map(|_| {
                            let s = |b: bool| if b { 1.0 } else { -1.0 };
                            C64::new(s(rand::Rng::random(&mut r)), s(rand::Rng::random(&mut r)))
                        })
                        .collect();
                    let plus = obj.value(&cur.add(&delta.scale(ct)))?;
                    let minus = obj.value(&cur.sub(&delta.scale(ct)))?;
                    evals += 2;
                    (
                        delta.scale((plus - minus) / (2.0 * ct)),
                        a0 / (t as f64 + 10.0).powf(0.602),
                    )
                }
            };
            let gn = g.norm();
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            let mut next = cur.clone();
            next.axpy(C64::new(step / gn, 0.0), &g);
            let next = obj.project(next);
            let v = obj.value(&next)?;
            evals += 1;
            if v >= val || !gradient_path {
                cur = next;
                val = v;
            }
            if val > best.0 {
                best = (val, cur.clone());
            }
        }
    }
    Ok(AttackResult {
        r: best.1,
        objective: best.0,
        evaluations: evals,
    })
}
