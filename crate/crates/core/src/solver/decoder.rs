use std::cmp::Ordering;

use super::levels_error::best_levels_term_error;
use super::qcbp::{Recovery, Solution, SolverConfig};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{least_squares_residual, CVector};
use crate::operators::LevelStructure;

/// Largest number of supports enumerated for a distance to a sparse model.
pub const MAX_MODEL_SUPPORTS: u64 = 1_000_000;

/// Set of admissible measurements used to pick the noise level of the decoder.
#[derive(Clone, Copy, Debug)]
pub enum Model<'m> {
    /// Finite list of measurement vectors.
    Finite(&'m [CVector]),
    /// The union of subspaces `A H^*(Sigma_{s,M})`.
    SparseInLevels(&'m LevelStructure),
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if cur[i] == i + n - k {
            return out;
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// All level-wise supports `S = S_1 u ... u S_r` with `|S_l| = s_l`.
pub(crate) fn level_supports(
    levels: &LevelStructure,
    t: &[usize],
    cap: u64,
) -> Result<Vec<Vec<usize>>> {
    let ranges = levels.ranges();
    let mut count: u64 = 1;
    for (range, &tl) in ranges.iter().zip(t) {
        count = count.saturating_mul(binomial(range.len(), tl));
    }
    if count > cap {
        return Err(Error::Capacity(format!(
            "{count} supports exceed the cap of {cap}"
        )));
    }
    let mut supports: Vec<Vec<usize>> = vec![vec![]];
    for (range, &tl) in ranges.iter().zip(t) {
        let local: Vec<Vec<usize>> = combinations(range.len(), tl)
            .into_iter()
            .map(|c| c.into_iter().map(|i| i + range.start).collect())
            .collect();
        supports = supports
            .iter()
            .flat_map(|s| {
                local.iter().map(move |l| {
                    let mut v = s.clone();
                    v.extend_from_slice(l);
                    v
                })
            })
            .collect();
    }
    Ok(supports)
}

impl Recovery<'_> {
    /// `inf { ||y - z|| : z in model }`.
    pub fn model_distance(&self, y: &CVector, model: Model<'_>) -> Result<f64> {
        match model {
            Model::Finite(set) => {
                if set.is_empty() {
                    return arg_err("empty model set");
                }
                Ok(set.iter().map(|z| z.dist(y)).fold(f64::INFINITY, f64::min))
            }
            Model::SparseInLevels(levels) => {
                if levels.n != self.a.n() {
                    return arg_err("level structure does not match operator");
                }
                let supports = level_supports(levels, &levels.sparsities, MAX_MODEL_SUPPORTS)?;
                let n = self.a.n();
                let cols = (0..n)
                    .map(|j| self.forward(&CVector::basis(n, j)))
                    .collect::<Result<Vec<_>>>()?;
                let mut best = y.norm();
                for s in supports {
                    let sub: Vec<CVector> = s.iter().map(|&j| cols[j].clone()).collect();
                    best = best.min(least_squares_residual(&sub, y));
                }
                Ok(best)
            }
        }
    }

    /// Decoder that solves the weighted QCBP with `eta` equal to the distance
    /// from `y` to the model.
    pub fn cs_decoder(
        &self,
        y: &CVector,
        model: Model<'_>,
        cfg: &SolverConfig,
    ) -> Result<Solution> {
        let eta = self.model_distance(y, model)?;
        self.qcbp(y, eta, cfg)
    }
}

fn lex_cmp(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Index of the candidate minimising `||A x - y||`; exact ties go to the
/// lexicographically smallest candidate.
pub fn data_consistent_select(
    a: &crate::operators::MeasurementOperator,
    y: &CVector,
    candidates: &[CVector],
) -> Result<usize> {
    if candidates.is_empty() {
        return arg_err("no candidates");
    }
    let res: Vec<f64> = candidates
        .iter()
        .map(|c| a.apply(c).map(|ac| ac.dist(y)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..candidates.len() {
        let o = res[i].total_cmp(&res[best]);
        if o == Ordering::Less
            || (o == Ordering::Equal
                && lex_cmp(&candidates[i], &candidates[best]) == Ordering::Less)
        {
            best = i;
        }
    }
    Ok(best)
}

/// `C = 2(2 + sqrt 3)/(2 - sqrt 3)` and `D = 8 sqrt 2/(2 - sqrt 3)`.
pub fn recovery_constants() -> (f64, f64) {
    let s3 = 3f64.sqrt();
    (
        2.0 * (2.0 + s3) / (2.0 - s3),
        8.0 * 2f64.sqrt() / (2.0 - s3),
    )
}

/// Lipschitz cap `2 sqrt 2 + (1 + r^{1/4}) D` of the sparse decoder.
pub fn cs_lipschitz_cap(r: usize) -> f64 {
    let (_, d) = recovery_constants();
    2.0 * 2f64.sqrt() + (1.0 + (r as f64).powf(0.25)) * d
}

#[derive(Clone, Copy, Debug)]
pub struct BoundCheck {
    pub error: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `||x - x_hat||` with `(1 + r^{1/4}) (C sigma / sqrt(r s) + D eta)`.
pub fn recovery_bound_check(
    x: &CVector,
    x_hat: &CVector,
    h: &crate::operators::Sparsifier,
    levels: &LevelStructure,
    eta: f64,
) -> Result<BoundCheck> {
    let (c, d) = recovery_constants();
    let r = levels.r() as f64;
    let s = levels.total_sparsity().max(1) as f64;
    let sigma = best_levels_term_error(&h.forward(x)?, levels)?.sigma;
    let bound = (1.0 + r.powf(0.25)) * (c * sigma / (r * s).sqrt() + d * eta);
    let error = x.dist(x_hat);
    Ok(BoundCheck {
        error,
        bound,
        holds: error <= bound,
    })
}
