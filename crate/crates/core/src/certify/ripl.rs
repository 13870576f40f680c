use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{arg_err, Error, Result};
use crate::linalg::{svd_small, CMatrix};
use crate::operators::{LevelStructure, MeasurementOperator, Sparsifier};
use crate::rng;
use crate::solver::{binomial, level_supports};

pub const MAX_EXHAUSTIVE_SUPPORTS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiplMode {
    Exhaustive,
    /// Random level-wise supports; the result is a lower bound.
    Sampled {
        supports: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug)]
pub struct RiplResult {
    pub delta: f64,
    pub worst_support: Vec<usize>,
    pub supports_checked: u64,
    pub exhaustive: bool,
}

/// `t_l = min(M_l - M_{l-1}, 2 ceil(4 r s_l))`.
pub fn ripl_order_auto(levels: &LevelStructure) -> Vec<usize> {
    let r = levels.r();
    levels
        .level_sizes()
        .iter()
        .zip(&levels.sparsities)
        .map(|(&size, &s)| size.min(2 * 4 * r * s))
        .collect()
}

/// `max |sigma^2 - 1|` over singular values of the column submatrix.
fn support_delta(g: &CMatrix, support: &[usize]) -> f64 {
    if support.is_empty() {
        return 0.0;
    }
    let sub = g.select_columns(support);
    let svd = svd_small(&sub).expect("submatrix within svd limits");
    let mut d = svd
        .sigma
        .iter()
        .map(|s| (s * s - 1.0).abs())
        .fold(0.0, f64::max);
    if sub.rows < sub.cols {
        d = d.max(1.0);
    }
    d
}

/// Rows of `g` touch columns of a single level each.
fn level_separable(g: &CMatrix, levels: &LevelStructure) -> bool {
    let scale = g.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    let ranges = levels.ranges();
    (0..g.rows).all(|i| {
        let touched = ranges
            .iter()
            .filter(|r| (*r).clone().any(|j| g.get(i, j).norm() > tol))
            .count();
        touched <= 1
    })
}

fn worst_of(g: &CMatrix, supports: &[Vec<usize>]) -> (f64, usize) {
    supports
        .par_iter()
        .enumerate()
        .map(|(i, s)| (support_delta(g, s), i))
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        )
}

/// Restricted isometry constant in levels of `A H^*` for order `t`:
/// the largest `|sigma^2 - 1|` over column supports with `t_l` entries in level `l`.
///
/// When the rows of `A H^*` do not mix levels the joint maximum equals the
/// largest per-level maximum, and only per-level supports are enumerated.
pub fn ripl_constant(
    a: &MeasurementOperator,
    h: &Sparsifier,
    levels: &LevelStructure,
    t: &[usize],
    mode: RiplMode,
) -> Result<RiplResult> {
    if t.len() != levels.r() {
        return arg_err("one order per level is required");
    }
    if levels.n != a.n() {
        return arg_err("level structure does not match operator");
    }
    let sizes = levels.level_sizes();
    if t.iter().zip(&sizes).any(|(&tl, &sz)| tl > sz) {
        return arg_err("order exceeds level size");
    }
    let g = a.matrix_with(h)?;
    match mode {
        RiplMode::Exhaustive => {
            if level_separable(&g, levels) {
                let mut best = (0.0f64, Vec::new());
                let mut checked = 0u64;
                for (l, &tl) in t.iter().enumerate() {
                    if tl == 0 {
                        continue;
                    }
                    let mut zero = vec![0; t.len()];
                    zero[l] = tl;
                    let supports = level_supports(levels, &zero, MAX_EXHAUSTIVE_SUPPORTS)?;
                    checked += supports.len() as u64;
                    let (d, i) = worst_of(&g, &supports);
                    if d > best.0 || best.1.is_empty() {
                        best = (d, supports[i].clone());
                    }
                }
                return Ok(RiplResult {
                    delta: best.0,
                    worst_support: best.1,
                    supports_checked: checked,
                    exhaustive: true,
                });
            }
            let supports = level_supports(levels, t, MAX_EXHAUSTIVE_SUPPORTS)?;
            let (d, i) = worst_of(&g, &supports);
            Ok(RiplResult {
                delta: d.max(0.0),
                worst_support: supports.get(i).cloned().unwrap_or_default(),
                supports_checked: supports.len() as u64,
                exhaustive: true,
            })
        }
        RiplMode::Sampled {
            supports: count,
            seed,
        } => {
            if count == 0 {
                return Err(Error::Argument(
                    "sampled mode needs at least one support".into(),
                ));
            }
            let mut r = rng::seeded(seed);
            let ranges = levels.ranges();
            let supports: Vec<Vec<usize>> = (0..count)
                .map(|_| {
                    let mut s = Vec::new();
                    for (range, &tl) in ranges.iter().zip(t) {
                        let mut pick: Vec<usize> = sample(&mut r, range.len(), tl)
                            .into_iter()
                            .map(|i| i + range.start)
                            .collect();
                        pick.sort_unstable();
                        s.extend(pick);
                    }
                    s
                })
                .collect();
            let (d, i) = worst_of(&g, &supports);
            Ok(RiplResult {
                delta: d.max(0.0),
                worst_support: supports[i].clone(),
                supports_checked: count as u64,
                exhaustive: false,
            })
        }
    }
}

/// Number of joint supports an exhaustive run without level separation visits.
pub fn joint_support_count(levels: &LevelStructure, t: &[usize]) -> u64 {
    levels
        .level_sizes()
        .iter()
        .zip(t)
        .fold(1u64, |acc, (&n, &k)| acc.saturating_mul(binomial(n, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Transform;

    #[test]
    fn full_walsh_sampling_is_an_isometry() {
        let levels = LevelStructure::dyadic(4, vec![1, 1, 1, 2]).unwrap();
        let a = MeasurementOperator::unscaled(Transform::Walsh, 8, (0..8).collect()).unwrap();
        let res = ripl_constant(
            &a,
            &Sparsifier::Haar,
            &levels,
            &[1, 1, 2, 2],
            RiplMode::Exhaustive,
        )
        .unwrap();
        assert!(res.delta < 1e-12);
    }

    #[test]
    fn two_rows_of_identity_have_delta_one() {
        let levels = LevelStructure::new(4, vec![4], vec![2]).unwrap();
        let a = MeasurementOperator::unscaled(Transform::Identity, 4, vec![0, 2]).unwrap();
        let res = ripl_constant(
            &a,
            &Sparsifier::Identity,
            &levels,
            &[2],
            RiplMode::Exhaustive,
        )
        .unwrap();
        assert!((res.delta - 1.0).abs() < 1e-12);
        assert_eq!(res.supports_checked, 6);
    }

    #[test]
    fn capacity_is_enforced() {
        let levels = LevelStructure::new(64, vec![64], vec![10]).unwrap();
        let a = MeasurementOperator::unscaled(Transform::Fourier, 64, (0..20).collect()).unwrap();
        let res = ripl_constant(&a, &Sparsifier::Haar, &levels, &[10], RiplMode::Exhaustive);
        assert!(matches!(res, Err(Error::Capacity(_))));
    }

    #[test]
    fn auto_order() {
        let levels = LevelStructure::dyadic(6, vec![0, 1, 1, 1, 1, 2]).unwrap();
        assert_eq!(ripl_order_auto(&levels), vec![0, 1, 2, 4, 8, 16]);
    }
}
