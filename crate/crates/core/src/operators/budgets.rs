use super::levels::LevelStructure;
use crate::error::{arg_err, Result};

/// Failure probability `nu` and universal constant `C` of the budget formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetParams {
    pub nu: f64,
    pub c: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        BudgetParams { nu: 0.1, c: 1.0 }
    }
}

fn check(levels: &LevelStructure, p: &BudgetParams) -> Result<()> {
    if !(p.nu > 0.0 && p.nu < 1.0) {
        return arg_err(format!("nu = {} must lie in (0, 1)", p.nu));
    }
    if !(p.c > 0.0) || !p.c.is_finite() {
        return arg_err("C must be positive");
    }
    if levels.n < 2 {
        return arg_err("N must be at least 2");
    }
    Ok(())
}

/// `log^3(N) log(2m) log^2(2s) + log(N) log(1/nu)` (natural logarithms).
fn log_factor(n: usize, m: usize, s: usize, nu: f64) -> f64 {
    let ln_n = (n as f64).ln();
    ln_n.powi(3) * (2.0 * m.max(1) as f64).ln() * (2.0 * s as f64).ln().powi(2)
        + ln_n * (1.0 / nu).ln()
}

/// Solves `m = sum_k m_k(m)` by iterating downward from `m = N`.
fn fixed_point(levels: &LevelStructure, per_level: impl Fn(usize) -> Vec<f64>) -> Vec<usize> {
    let sizes = levels.level_sizes();
    let budgets = |m: usize| -> Vec<usize> {
        per_level(m)
            .iter()
            .zip(&sizes)
            .map(|(&v, &size)| (v.ceil().max(0.0) as usize).min(size))
            .collect()
    };
    let mut m = levels.n;
    let mut current = budgets(m);
    for _ in 0..=levels.n {
        let total: usize = current.iter().sum();
        if total == m {
            break;
        }
        m = total;
        current = budgets(m);
    }
    current
}

/// Walsh budgets `m_k = ceil(C s_k L)`, clipped at the level size.
pub fn walsh_budgets(levels: &LevelStructure, p: BudgetParams) -> Result<Vec<usize>> {
    check(levels, &p)?;
    let s = levels.total_sparsity();
    if s == 0 {
        return Ok(vec![0; levels.r()]);
    }
    Ok(fixed_point(levels, |m| {
        let l = log_factor(levels.n, m, s, p.nu);
        levels
            .sparsities
            .iter()
            .map(|&sk| p.c * sk as f64 * l)
            .collect()
    }))
}

/// Fourier budgets with the neighbouring-level leakage terms
/// `s_k + sum_{l<k} s_l 2^{-(k-l)} + sum_{l>k} s_l 2^{-3(l-k)}`.
pub fn fourier_budgets(levels: &LevelStructure, p: BudgetParams) -> Result<Vec<usize>> {
    check(levels, &p)?;
    let s = levels.total_sparsity();
    if s == 0 {
        return Ok(vec![0; levels.r()]);
    }
    let r = levels.r();
    let sp = &levels.sparsities;
    let eff: Vec<f64> = (0..r)
        .map(|k| {
            let mut v = sp[k] as f64;
            for l in 0..k {
                v += sp[l] as f64 * 2f64.powi(-((k - l) as i32));
            }
            for l in k + 1..r {
                v += sp[l] as f64 * 2f64.powi(-3 * (l - k) as i32);
            }
            v
        })
        .collect();
    Ok(fixed_point(levels, |m| {
        let l = log_factor(levels.n, m, s, p.nu);
        eff.iter().map(|&e| p.c * e * l).collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_outside_unit_interval_is_rejected() {
        let l = LevelStructure::dyadic(4, vec![1, 1, 1, 1]).unwrap();
        for nu in [0.0, 1.0, 1.5, -0.1] {
            assert!(walsh_budgets(&l, BudgetParams { nu, c: 1.0 }).is_err());
            assert!(fourier_budgets(&l, BudgetParams { nu, c: 1.0 }).is_err());
        }
    }

    #[test]
    fn unit_constant_saturates_at_desk_scale() {
        let l = LevelStructure::dyadic(6, vec![1, 1, 1, 1, 1, 1]).unwrap();
        let m = walsh_budgets(&l, BudgetParams::default()).unwrap();
        assert_eq!(m, l.level_sizes());
    }

    #[test]
    fn vanishing_level_gets_no_walsh_samples() {
        let l = LevelStructure::dyadic(6, vec![1, 1, 1, 2, 0, 2]).unwrap();
        let m = walsh_budgets(&l, BudgetParams::default()).unwrap();
        assert_eq!(m[4], 0);
    }
}
