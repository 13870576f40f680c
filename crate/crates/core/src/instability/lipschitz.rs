use rayon::prelude::*;

use super::map::{check_input, Metric, ReconstructionMap};
use crate::error::{arg_err, Result};
use crate::linalg::{CVector, C64};
use crate::rng;

/// `(d(x, x') - 2 eta) / epsilon`, valid for `epsilon >= eta > 0`.
pub fn lipschitz_lower_bound(d_xxp: f64, eta: f64, epsilon: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return arg_err("eta must be positive");
    }
    if epsilon < eta {
        return arg_err(format!("epsilon = {epsilon} is smaller than eta = {eta}"));
    }
    Ok((d_xxp - 2.0 * eta) / epsilon)
}

#[derive(Clone, Debug)]
pub struct LipschitzProbe {
    pub epsilon: f64,
    pub trials: usize,
    /// Gradient ascent steps on the difference quotient, used when the map has gradients.
    pub refine_steps: usize,
    pub seed: u64,
    /// Perturbations tried before the random ones, rescaled into the ball.
    pub candidates: Vec<CVector>,
    pub input_metric: Metric,
    pub output_metric: Metric,
}

impl LipschitzProbe {
    pub fn new(epsilon: f64, trials: usize, seed: u64) -> Self {
        LipschitzProbe {
            epsilon,
            trials,
            refine_steps: 50,
            seed,
            candidates: Vec::new(),
            input_metric: Metric::L2,
            output_metric: Metric::L2,
        }
    }

    pub fn with_candidates(mut self, candidates: Vec<CVector>) -> Self {
        self.candidates = candidates;
        self
    }
}

#[derive(Clone, Debug)]
pub struct LipschitzEstimate {
    /// Largest difference quotient found; a lower bound on the local constant.
    pub value: f64,
    /// Perturbation `e` attaining it.
    pub perturbation: CVector,
    pub evaluations: usize,
}

struct Quotient<'a> {
    map: &'a dyn ReconstructionMap,
    y: &'a CVector,
    base: CVector,
    probe: &'a LipschitzProbe,
}

impl Quotient<'_> {
    fn at(&self, e: &CVector) -> Result<f64> {
        let de = self.probe.input_metric.dist(e, &CVector::zeros(e.len()));
        if de == 0.0 {
            return Ok(0.0);
        }
        let out = self.map.eval(&self.y.add(e))?;
        Ok(self.probe.output_metric.dist(&out, &self.base) / de)
    }

    fn to_ball(&self, e: &CVector) -> CVector {
        let n = e.norm();
        if n > self.probe.epsilon {
            e.scale(self.probe.epsilon / n)
        } else {
            e.clone()
        }
    }

    /// Gradient of `||R(y + e) - R(y)|| / ||e||`.
    fn gradient(&self, e: &CVector) -> Option<Result<(f64, CVector)>> {
        let ye = self.y.add(e);
        let out = match self.map.eval(&ye) {
            Ok(o) => o,
            Err(err) => return Some(Err(err)),
        };
        let r = out.sub(&self.base);
        let n = r.norm();
        let en = e.norm();
        if n == 0.0 || en == 0.0 {
            return None;
        }
        let g = match self.map.vjp(&ye, &r.scale(1.0 / n))? {
            Ok(g) => g,
            Err(err) => return Some(Err(err)),
        };
        let mut grad = g.scale(1.0 / en);
        grad.axpy(C64::new(-n / en.powi(3), 0.0), e);
        Some(Ok((n / en, grad)))
    }

    fn refine(&self, start: &CVector, steps: usize) -> Result<(f64, CVector, usize)> {
        let mut e = start.clone();
        let mut q = self.at(&e)?;
        let mut evals = 1;
        let mut alpha = 0.1 * self.probe.epsilon;
        for _ in 0..steps {
            let Some(g) = self.gradient(&e) else { break };
            let (_, grad) = g?;
            evals += 1;
            let gn = grad.norm();
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            let mut improved = false;
            for _ in 0..20 {
                let mut cand = e.clone();
                cand.axpy(C64::new(alpha / gn, 0.0), &grad);
                let cand = self.to_ball(&cand);
                let qc = self.at(&cand)?;
                evals += 1;
                if qc > q {
                    e = cand;
                    q = qc;
                    alpha *= 1.5;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok((q, e, evals))
    }

    /// Power iteration on `J^T J` at `y`, with `J d` from a forward difference.
    fn power_direction(&self, start: &CVector, steps: usize) -> Result<Option<CVector>> {
        let h = 1e-6 * self.probe.epsilon.min(1.0);
        let mut d = start.scale(1.0 / start.norm());
        for _ in 0..steps {
            let jd = self
                .map
                .eval(&self.y.add(&d.scale(h)))?
                .sub(&self.base)
                .scale(1.0 / h);
            let Some(g) = self.map.vjp(self.y, &jd) else {
                return Ok(None);
            };
            let g = g?;
            let gn = g.norm();
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            d = g.scale(1.0 / gn);
        }
        Ok(Some(d))
    }
}

/// Lower bound on the local `epsilon`-Lipschitz constant of `map` at `y`.
///
/// Tries the candidate perturbations, then `trials` random ones with radii
/// log-uniform in `[1e-3 epsilon, epsilon]`; maps with gradients are refined
/// by power iteration on the Jacobian and gradient ascent on the quotient.
pub fn empirical_lipschitz(
    map: &dyn ReconstructionMap,
    y: &CVector,
    probe: &LipschitzProbe,
) -> Result<LipschitzEstimate> {
    check_input(map, y)?;
    if !(probe.epsilon > 0.0) {
        return arg_err("epsilon must be positive");
    }
    if probe.trials == 0 {
        return arg_err("at least one trial is required");
    }
    let q = Quotient {
        map,
        y,
        base: map.eval(y)?,
        probe,
    };
    let mut best = (0.0f64, CVector::zeros(y.len()));
    let mut evals = 1;
    for c in &probe.candidates {
        if c.len() != y.len() {
            return crate::error::size_err("candidate perturbation has the wrong dimension");
        }
        for sign in [1.0, -1.0] {
            let e = q.to_ball(&c.scale(sign));
            let v = q.at(&e)?;
            evals += 1;
            if v > best.0 {
                best = (v, e);
            }
        }
    }
    let random: Vec<(f64, CVector)> = (0..probe.trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::worker_stream(probe.seed, i as u64);
            let u = rng::unit_direction(&mut r, y.len());
            let t: f64 = rand::Rng::random_range(&mut r, -3.0..=0.0);
            let e = u.scale(probe.epsilon * 10f64.powf(t));
            q.at(&e).map(|v| (v, e))
        })
        .collect::<Result<_>>()?;
    evals += random.len();
    for (v, e) in random {
        if v > best.0 {
            best = (v, e);
        }
    }
    let l2 = probe.input_metric == Metric::L2 && probe.output_metric == Metric::L2;
    if map.has_gradient() && l2 && probe.refine_steps > 0 {
        let mut starts = vec![best.1.clone()];
        let seed_dir = if best.1.norm() > 0.0 {
            best.1.clone()
        } else {
            rng::unit_direction(&mut rng::seeded(probe.seed), y.len())
        };
        if let Some(d) = q.power_direction(&seed_dir, 30)? {
            evals += 30;
            for scale in [1.0, 0.1] {
                starts.push(d.scale(probe.epsilon * scale));
            }
        }
        for s in starts {
            if s.norm() == 0.0 {
                continue;
            }
            let (v, e, k) = q.refine(&s, probe.refine_steps)?;
            evals += k;
            if v > best.0 {
                best = (v, e);
            }
        }
    }
    Ok(LipschitzEstimate {
        value: best.0,
        perturbation: best.1,
        evaluations: evals,
    })
}
