use crate::error::{arg_err, size_err, Error, Result};
use crate::linalg::{CVector, C64};
use crate::operators::{LevelStructure, MeasurementOperator, Sparsifier};

/// Sparse recovery setup: measurements `A`, unitary sparsifier `H` and
/// per-coefficient weights of the weighted l1 norm `||Hz||_{l1_w}`.
#[derive(Clone, Debug)]
pub struct Recovery<'a> {
    pub a: &'a MeasurementOperator,
    pub h: &'a Sparsifier,
    pub weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stopping tolerance, relative to `1 + ||y||`.
    pub tol: f64,
    /// Step sizes are `safety / ||A||`.
    pub safety: f64,
    /// Allowed constraint violation, relative to `1 + ||y||`.
    pub feas_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 100_000,
            tol: 1e-9,
            safety: 0.95,
            feas_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: CVector,
    pub coefficients: CVector,
    pub objective: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn soft_threshold(c: &mut CVector, thresholds: &[f64]) {
    for (z, &t) in c.iter_mut().zip(thresholds) {
        let m = z.norm();
        *z = if m <= t {
            C64::new(0.0, 0.0)
        } else {
            *z * (1.0 - t / m)
        };
    }
}

impl<'a> Recovery<'a> {
    pub fn new(a: &'a MeasurementOperator, h: &'a Sparsifier, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != a.n() {
            return size_err(format!("expected {} weights, got {}", a.n(), weights.len()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return arg_err("weights must be positive and finite");
        }
        Ok(Recovery { a, h, weights })
    }

    /// Weights taken from a level structure.
    pub fn with_levels(
        a: &'a MeasurementOperator,
        h: &'a Sparsifier,
        levels: &LevelStructure,
    ) -> Result<Self> {
        Self::new(a, h, levels.coefficient_weights())
    }

    pub fn unweighted(a: &'a MeasurementOperator, h: &'a Sparsifier) -> Result<Self> {
        Self::new(a, h, vec![1.0; a.n()])
    }

    /// `c -> A H^* c`
    pub fn forward(&self, c: &CVector) -> Result<CVector> {
        self.a.apply(&self.h.inverse(c)?)
    }

    /// `w -> H A^* w`
    pub fn backward(&self, w: &CVector) -> Result<CVector> {
        self.h.forward(&self.a.adjoint(w)?)
    }

    fn pinv(&self, w: &CVector) -> Result<CVector> {
        self.h.forward(&self.a.pinv_apply(w)?)
    }

    /// `||Hz||_{l1_w}`
    pub fn objective(&self, z: &CVector) -> Result<f64> {
        let c = self.h.forward(z)?;
        Ok(self.weighted_l1(&c))
    }

    pub fn weighted_l1(&self, c: &CVector) -> f64 {
        c.iter().zip(&self.weights).map(|(z, w)| w * z.norm()).sum()
    }

    fn check_y(&self, y: &CVector) -> Result<()> {
        if y.len() != self.a.m() {
            return size_err(format!(
                "expected {} measurements, got {}",
                self.a.m(),
                y.len()
            ));
        }
        Ok(())
    }

    /// Feasible point on or inside `||A H^* c - y|| <= eta` near `c`.
    fn restore_feasibility(&self, c: &CVector, y: &CVector, eta: f64) -> Result<CVector> {
        let r = self.forward(c)?.sub(y);
        let rn = r.norm();
        if rn <= eta {
            return Ok(c.clone());
        }
        let target = y.add(&r.scale(if rn > 0.0 { eta / rn } else { 0.0 }));
        let bc = self.forward(c)?;
        Ok(c.add(&self.pinv(&target.sub(&bc))?))
    }

    /// Weighted quadratically constrained basis pursuit
    /// `min ||Hz||_{l1_w}  s.t.  ||Az - y|| <= eta`, by the primal-dual
    /// hybrid gradient method on the coefficients `c = Hz`.
    pub fn qcbp(&self, y: &CVector, eta: f64, cfg: &SolverConfig) -> Result<Solution> {
        self.check_y(y)?;
        if !(eta >= 0.0) || !eta.is_finite() {
            return arg_err("eta must be non-negative");
        }
        let norm_a = self.a.norm()?;
        if norm_a == 0.0 {
            return arg_err("operator is zero");
        }
        let tau = cfg.safety / norm_a;
        let sigma = cfg.safety / norm_a;
        let scale = 1.0 + y.norm();
        let stop = cfg.tol * scale;
        let thresholds: Vec<f64> = self.weights.iter().map(|w| w * tau).collect();

        let mut c = self.pinv(y)?;
        let mut bc = self.forward(&c)?;
        let mut xi = CVector::zeros(y.len());
        let mut bt_xi = CVector::zeros(c.len());
        let mut residual = f64::INFINITY;
        for it in 1..=cfg.max_iter {
            let mut c_new = c.clone();
            c_new.axpy(C64::new(-tau, 0.0), &bt_xi);
            soft_threshold(&mut c_new, &thresholds);
            let bc_new = self.forward(&c_new)?;
            // xi + sigma * B(2 c_new - c), then prox of the ball conjugate
            let mut v = xi.clone();
            for i in 0..v.len() {
                v[i] += (bc_new[i] * 2.0 - bc[i]) * sigma;
            }
            let mut u: CVector = v.scale(1.0 / sigma).sub(y);
            let un = u.norm();
            if un > eta {
                u = u.scale(eta / un);
            }
            let proj = y.add(&u);
            let xi_new = v.sub(&proj.scale(sigma));
            let bt_xi_new = self.backward(&xi_new)?;

            let mut p = c.sub(&c_new).scale(1.0 / tau);
            p.axpy(C64::new(-1.0, 0.0), &bt_xi.sub(&bt_xi_new));
            let mut d = xi.sub(&xi_new).scale(1.0 / sigma);
            d.axpy(C64::new(-1.0, 0.0), &bc.sub(&bc_new));
            residual = p.norm().max(d.norm());

            c = c_new;
            bc = bc_new;
            xi = xi_new;
            bt_xi = bt_xi_new;
            if !residual.is_finite() {
                break;
            }
            if residual <= stop {
                let feas = self.forward(&c)?.sub(y).norm();
                if feas <= eta + cfg.feas_tol * scale {
                    let c = self.restore_feasibility(&c, y, eta)?;
                    let x = self.h.inverse(&c)?;
                    return Ok(Solution {
                        objective: self.weighted_l1(&c),
                        x,
                        coefficients: c,
                        iterations: it,
                        residual,
                    });
                }
            }
        }
        let x = self.h.inverse(&c)?;
        Err(Error::Convergence {
            iterations: cfg.max_iter,
            residual,
            last: Box::new(x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Transform;

    #[test]
    fn soft_threshold_acts_on_modulus() {
        let mut c: CVector = vec![C64::new(3.0, 4.0), C64::new(0.1, 0.0)].into();
        soft_threshold(&mut c, &[1.0, 1.0]);
        assert!((c[0] - C64::new(2.4, 3.2)).norm() < 1e-15);
        assert_eq!(c[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn full_sampling_recovers_exactly() {
        let a = MeasurementOperator::unscaled(Transform::Walsh, 8, (0..8).collect()).unwrap();
        let h = Sparsifier::Haar;
        let rec = Recovery::unweighted(&a, &h).unwrap();
        let x = CVector::from_real(&[1.0, 2.0, 0.0, -1.0, 0.5, 0.5, 3.0, 0.0]);
        let y = a.apply(&x).unwrap();
        let sol = rec.qcbp(&y, 0.0, &SolverConfig::default()).unwrap();
        assert!(sol.x.dist(&x) < 1e-8);
    }

    #[test]
    fn zero_data_gives_zero() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 8, vec![0, 1, 5]).unwrap();
        let h = Sparsifier::Identity;
        let rec = Recovery::unweighted(&a, &h).unwrap();
        let sol = rec
            .qcbp(&CVector::zeros(3), 0.0, &SolverConfig::default())
            .unwrap();
        assert!(sol.x.norm() < 1e-12);
    }

    #[test]
    fn non_convergence_carries_iterate() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 16, vec![0, 1, 2, 3, 9]).unwrap();
        let h = Sparsifier::Haar;
        let rec = Recovery::unweighted(&a, &h).unwrap();
        let y: CVector = vec![C64::new(1.0, 0.5); 5].into();
        let cfg = SolverConfig {
            max_iter: 3,
            ..Default::default()
        };
        match rec.qcbp(&y, 0.0, &cfg) {
            Err(Error::Convergence {
                iterations, last, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(last.len(), 16);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
