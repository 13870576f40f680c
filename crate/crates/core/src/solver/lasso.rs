use super::qcbp::{soft_threshold, Recovery, Solution, SolverConfig};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{CVector, C64};

impl Recovery<'_> {
    /// `||A H^* c - y||^2 + lambda ||c||_{l1_w}` at `c`.
    pub fn lasso_objective(&self, c: &CVector, y: &CVector, lambda: f64) -> Result<f64> {
        Ok(self.forward(c)?.sub(y).norm_sqr() + lambda * self.weighted_l1(c))
    }

    /// Smallest `lambda` for which zero is a minimiser:
    /// `max_i 2 |(H A^* y)_i| / w_i`.
    pub fn lasso_lambda_max(&self, y: &CVector) -> Result<f64> {
        let g = self.backward(y)?;
        Ok(g.iter()
            .zip(&self.weights)
            .map(|(z, w)| 2.0 * z.norm() / w)
            .fold(0.0, f64::max))
    }

    /// Weighted LASSO `min ||Az - y||^2 + lambda ||Hz||_{l1_w}` by
    /// accelerated proximal gradient. Stops when the fixed-point residual
    /// `||c - prox(c - grad/L)||` is at most `cfg.tol`.
    pub fn lasso(&self, y: &CVector, lambda: f64, cfg: &SolverConfig) -> Result<Solution> {
        if y.len() != self.a.m() {
            return Err(Error::Size("measurement length mismatch".into()));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return arg_err("lambda must be non-negative");
        }
        let norm_a = self.a.norm()?;
        let lip = 2.0 * norm_a * norm_a;
        let step = 1.0 / lip;
        let thresholds: Vec<f64> = self.weights.iter().map(|w| lambda * w * step).collect();
        let prox_step = |c: &CVector| -> Result<CVector> {
            let grad = self.backward(&self.forward(c)?.sub(y))?.scale(2.0);
            let mut next = c.clone();
            next.axpy(C64::new(-step, 0.0), &grad);
            soft_threshold(&mut next, &thresholds);
            Ok(next)
        };
        let mut c = CVector::zeros(self.a.n());
        let mut z = c.clone();
        let mut t = 1.0f64;
        let mut residual = f64::INFINITY;
        for it in 1..=cfg.max_iter {
            let c_new = prox_step(&z)?;
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let mom = (t - 1.0) / t_new;
            // restart momentum when the objective direction turns
            let diff = c_new.sub(&c);
            let turn = z.sub(&c_new).dot(&diff).re > 0.0;
            z = if turn {
                t = 1.0;
                c_new.clone()
            } else {
                t = t_new;
                let mut zz = c_new.clone();
                zz.axpy(C64::new(mom, 0.0), &diff);
                zz
            };
            c = c_new;
            if it % 10 == 0 || it == cfg.max_iter {
                residual = prox_step(&c)?.dist(&c);
                if !residual.is_finite() {
                    break;
                }
                if residual <= cfg.tol {
                    let x = self.h.inverse(&c)?;
                    return Ok(Solution {
                        objective: self.lasso_objective(&c, y, lambda)?,
                        x,
                        coefficients: c,
                        iterations: it,
                        residual,
                    });
                }
            }
        }
        Err(Error::Convergence {
            iterations: cfg.max_iter,
            residual,
            last: Box::new(self.h.inverse(&c)?),
        })
    }
}
