use rayon::prelude::*;

use super::map::{Metric, ReconstructionMap};
use crate::error::{arg_err, Result};
use crate::linalg::CVector;
use crate::operators::MeasurementOperator;
use crate::rng;

/// Estimated probability with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub successes: usize,
    pub trials: usize,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn wilson(successes: usize, trials: usize) -> Estimate {
    let z = 1.959963984540054;
    let n = trials as f64;
    let p = if trials == 0 {
        0.0
    } else {
        successes as f64 / n
    };
    if trials == 0 {
        return Estimate {
            successes,
            trials,
            p,
            lower: 0.0,
            upper: 1.0,
        };
    }
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Estimate {
        successes,
        trials,
        p,
        lower: if successes == 0 {
            0.0
        } else {
            (centre - half).max(0.0)
        },
        upper: if successes == trials {
            1.0
        } else {
            (centre + half).min(1.0)
        },
    }
}

#[derive(Clone, Debug)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    /// Standard deviation of each real and imaginary part of the generic noise.
    pub sigma: f64,
    /// Standard deviation of the generic part added on top of the damaging perturbation `Az`.
    pub generic_sigma: f64,
    /// Radius `epsilon >= eta` of the Lipschitz event.
    pub epsilon: f64,
    pub metric: Metric,
}

#[derive(Clone, Debug)]
pub struct McReport {
    /// Lipschitz bound used by the first event.
    pub bound: f64,
    /// Difference quotient along `Az` at `y + e` is at least `bound`.
    pub lipschitz: Estimate,
    /// `d(R(y + e), x + z) <= eta`.
    pub false_positive: Estimate,
    /// `d(R(A(x + z) + e), x) <= eta`.
    pub false_negative: Estimate,
    /// `d(R(y + Az + e), x + z) <= eta` with `e` the generic part.
    pub conditional: Estimate,
}

/// Monte Carlo estimates of the instability events under Gaussian noise.
///
/// The Lipschitz event at `y + e` is witnessed by the difference quotients
/// along `+Az` and `-Az`, so its estimate is a lower bound on the event probability.
pub fn mc_instability_probability(
    map: &dyn ReconstructionMap,
    a: &MeasurementOperator,
    x: &CVector,
    z: &CVector,
    eta: f64,
    cfg: &McConfig,
) -> Result<McReport> {
    if cfg.trials < 100 {
        return arg_err("at least 100 trials are required");
    }
    let y = a.apply(x)?;
    let az = a.apply(z)?;
    let azn = cfg.metric.dist(&az, &CVector::zeros(az.len()));
    let x2 = x.add(z);
    let y2 = a.apply(&x2)?;
    let epsilon = cfg.epsilon.max(eta);
    let bound = super::lipschitz_lower_bound(cfg.metric.dist(x, &x2), eta, epsilon)?;
    let m = a.m();
    let outcomes: Vec<[bool; 4]> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<[bool; 4]> {
            let mut r = rng::worker_stream(cfg.seed, i as u64);
            let e = rng::gaussian_cvector(&mut r, m, cfg.sigma);
            let e2 = rng::gaussian_cvector(&mut r, m, cfg.generic_sigma);
            let yt = y.add(&e);
            let base = map.eval(&yt)?;
            let lip = if azn > 0.0 && azn <= epsilon {
                let up = cfg.metric.dist(&map.eval(&yt.add(&az))?, &base) / azn;
                let down = cfg.metric.dist(&map.eval(&yt.sub(&az))?, &base) / azn;
                up.max(down) >= bound
            } else {
                false
            };
            let fp = cfg.metric.dist(&base, &x2) <= eta;
            let fneg = cfg.metric.dist(&map.eval(&y2.add(&e))?, x) <= eta;
            let cond = cfg.metric.dist(&map.eval(&y.add(&az).add(&e2))?, &x2) <= eta;
            Ok([lip, fp, fneg, cond])
        })
        .collect::<Result<_>>()?;
    let count = |k: usize| wilson(outcomes.iter().filter(|o| o[k]).count(), cfg.trials);
    Ok(McReport {
        bound,
        lipschitz: count(0),
        false_positive: count(1),
        false_negative: count(2),
        conditional: count(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instability::map::FnMap;
    use crate::operators::Transform;

    #[test]
    fn wilson_interval() {
        let e = wilson(50, 100);
        assert!((e.p - 0.5).abs() < 1e-15);
        assert!((e.lower - 0.40383).abs() < 1e-4 && (e.upper - 0.59617).abs() < 1e-4);
        let w1 = wilson(300, 1000);
        let w2 = wilson(600, 2000);
        let ratio = (w2.upper - w2.lower) / (w1.upper - w1.lower);
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.01);
        assert_eq!(wilson(0, 100).lower, 0.0);
    }

    #[test]
    fn perfect_map_has_no_false_positive() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 8, (0..8).collect()).unwrap();
        let x = CVector::from_real(&[1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let map = FnMap {
            f: |_: &CVector| Ok(x.clone()),
            dims: (8, 8),
            label: "perfect".into(),
        };
        let cfg = McConfig {
            trials: 100,
            seed: 1,
            sigma: 0.01,
            generic_sigma: 0.001,
            epsilon: 0.1,
            metric: Metric::L2,
        };
        let rep = mc_instability_probability(&map, &a, &x, &CVector::zeros(8), 0.1, &cfg).unwrap();
        assert_eq!(rep.lipschitz.successes, 0);
        assert_eq!(rep.false_positive.successes, 100);
        let z = CVector::basis(8, 3);
        let rep = mc_instability_probability(&map, &a, &x, &z, 0.1, &cfg).unwrap();
        assert_eq!(rep.false_positive.successes, 0);
    }
}
