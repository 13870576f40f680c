use crate::error::{size_err, Result};
use crate::linalg::CVector;
use crate::operators::LevelStructure;

/// Best `(s, M)`-term approximation error in the weighted l1 norm.
#[derive(Clone, Debug, PartialEq)]
pub struct BestTerm {
    pub sigma: f64,
    /// Kept coefficient indices, sorted ascending.
    pub support: Vec<usize>,
}

/// Keeps the `s_l` largest entries of each level (ties go to the lower
/// index) and returns the weighted l1 norm of the rest.
pub fn best_levels_term_error(z: &CVector, levels: &LevelStructure) -> Result<BestTerm> {
    if z.len() != levels.n {
        return size_err("coefficient length does not match level structure");
    }
    let mut support = Vec::new();
    let mut sigma = 0.0;
    for ((range, &s), &w) in levels
        .ranges()
        .iter()
        .zip(&levels.sparsities)
        .zip(&levels.weights)
    {
        let mut idx: Vec<usize> = range.clone().collect();
        idx.sort_by(|&i, &j| z[j].norm().total_cmp(&z[i].norm()).then(i.cmp(&j)));
        support.extend_from_slice(&idx[..s]);
        sigma += w * idx[s..].iter().map(|&i| z[i].norm()).sum::<f64>();
    }
    support.sort_unstable();
    Ok(BestTerm { sigma, support })
}

/// Whether `z` has at most `s_l` nonzero entries in every level.
pub fn is_sparse_in_levels(z: &CVector, levels: &LevelStructure, tol: f64) -> bool {
    levels
        .ranges()
        .iter()
        .zip(&levels.sparsities)
        .all(|(range, &s)| range.clone().filter(|&i| z[i].norm() > tol).count() <= s)
}
