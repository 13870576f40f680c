use std::ops::Range;

use crate::error::{arg_err, Result};

/// Sparsity levels `M_1 < ... < M_r = N`, local sparsities `s_l` and
/// per-level weights for the weighted l1 norm.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelStructure {
    pub n: usize,
    pub bounds: Vec<usize>,
    pub sparsities: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Dyadic level bounds `2^{l-1}`, `l = 1..=r`.
pub fn dyadic_bounds(r: usize) -> Vec<usize> {
    (0..r).map(|l| 1usize << l).collect()
}

pub fn level_ranges_of(bounds: &[usize]) -> Vec<Range<usize>> {
    let mut prev = 0;
    bounds
        .iter()
        .map(|&b| {
            let r = prev..b;
            prev = b;
            r
        })
        .collect()
}

pub fn check_bounds(bounds: &[usize], n: usize) -> Result<()> {
    if bounds.is_empty() {
        return arg_err("at least one level is required");
    }
    if bounds.windows(2).any(|w| w[0] >= w[1]) || bounds[0] == 0 {
        return arg_err("level bounds must be strictly increasing and positive");
    }
    if *bounds.last().unwrap() != n {
        return arg_err(format!(
            "last level bound {} differs from N = {n}",
            bounds.last().unwrap()
        ));
    }
    Ok(())
}

/// Default weights `sqrt(s / s_l)`; levels with `s_l = 0` get `sqrt(s N)`.
pub fn default_weights(sparsities: &[usize], n: usize) -> Vec<f64> {
    let s: usize = sparsities.iter().sum();
    if s == 0 {
        return vec![1.0; sparsities.len()];
    }
    sparsities
        .iter()
        .map(|&sl| {
            if sl == 0 {
                ((s * n) as f64).sqrt()
            } else {
                (s as f64 / sl as f64).sqrt()
            }
        })
        .collect()
}

impl LevelStructure {
    pub fn new(n: usize, bounds: Vec<usize>, sparsities: Vec<usize>) -> Result<Self> {
        check_bounds(&bounds, n)?;
        if sparsities.len() != bounds.len() {
            return arg_err("one local sparsity per level is required");
        }
        for (range, &s) in level_ranges_of(&bounds).iter().zip(&sparsities) {
            if s > range.len() {
                return arg_err(format!(
                    "local sparsity {s} exceeds level size {}",
                    range.len()
                ));
            }
        }
        let weights = default_weights(&sparsities, n);
        Ok(LevelStructure {
            n,
            bounds,
            sparsities,
            weights,
        })
    }

    /// `r` dyadic levels on `N = 2^{r-1}`.
    pub fn dyadic(r: usize, sparsities: Vec<usize>) -> Result<Self> {
        if r == 0 || r > 31 {
            return arg_err("r must be between 1 and 31");
        }
        Self::new(1 << (r - 1), dyadic_bounds(r), sparsities)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.bounds.len()
            || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite())
        {
            return arg_err("weights must be positive, finite and one per level");
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn r(&self) -> usize {
        self.bounds.len()
    }

    pub fn total_sparsity(&self) -> usize {
        self.sparsities.iter().sum()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        level_ranges_of(&self.bounds)
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.ranges().iter().map(|r| r.len()).collect()
    }

    /// Level (0-based) containing coefficient `i`.
    pub fn level_of(&self, i: usize) -> usize {
        self.bounds
            .iter()
            .position(|&b| i < b)
            .unwrap_or(self.bounds.len() - 1)
    }

    /// Per-coefficient weight vector of length `N`.
    pub fn coefficient_weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        for (range, &w) in self.ranges().iter().zip(&self.weights) {
            out.extend(std::iter::repeat_n(w, range.len()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_layout() {
        let l = LevelStructure::dyadic(4, vec![1, 1, 1, 2]).unwrap();
        assert_eq!(l.bounds, vec![1, 2, 4, 8]);
        assert_eq!(l.level_sizes(), vec![1, 1, 2, 4]);
        assert_eq!(l.level_of(0), 0);
        assert_eq!(l.level_of(3), 2);
        assert_eq!(l.level_of(7), 3);
    }

    #[test]
    fn weights() {
        let l = LevelStructure::dyadic(3, vec![1, 0, 1]).unwrap();
        assert!((l.weights[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((l.weights[1] - (2.0 * 4.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_oversized_sparsity() {
        assert!(LevelStructure::dyadic(3, vec![2, 0, 0]).is_err());
    }
}
