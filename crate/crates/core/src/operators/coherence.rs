use std::fmt::Write as _;

use super::levels::{check_bounds, level_ranges_of};
use super::measurement::Transform;
use super::sparsifier::Sparsifier;
use crate::error::Result;
use crate::linalg::CVector;

/// `mu[k][l] = max |(U H^*)_{ij}|^2` over sampling level `k` and sparsity level `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceTable {
    pub mu: Vec<Vec<f64>>,
}

pub fn local_coherence(
    u: Transform,
    h: &Sparsifier,
    sampling_bounds: &[usize],
    sparsity_bounds: &[usize],
) -> Result<CoherenceTable> {
    let n = *sampling_bounds.last().unwrap_or(&0);
    check_bounds(sampling_bounds, n)?;
    check_bounds(sparsity_bounds, n)?;
    let rows = level_ranges_of(sampling_bounds);
    let cols = level_ranges_of(sparsity_bounds);
    let mut mu = vec![vec![0.0; cols.len()]; rows.len()];
    for (l, cr) in cols.iter().enumerate() {
        for j in cr.clone() {
            let col = u.forward(&h.inverse(&CVector::basis(n, j))?)?;
            for (k, rr) in rows.iter().enumerate() {
                for i in rr.clone() {
                    let v = col[i].norm_sqr();
                    if v > mu[k][l] {
                        mu[k][l] = v;
                    }
                }
            }
        }
    }
    Ok(CoherenceTable { mu })
}

/// CSV with header `k,l,mu` and 1-based level indices.
pub fn coherence_to_csv(t: &CoherenceTable) -> String {
    let mut s = String::from("k,l,mu\n");
    for (k, row) in t.mu.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            writeln!(s, "{},{},{:e}", k + 1, l + 1, v).unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dyadic_bounds;

    #[test]
    fn walsh_haar_small_case() {
        let b = dyadic_bounds(4);
        let t = local_coherence(Transform::Walsh, &Sparsifier::Haar, &b, &b).unwrap();
        let sizes = [1.0, 1.0, 2.0, 4.0];
        for k in 0..4 {
            for l in 0..4 {
                let expect = if k == l { 1.0 / sizes[k] } else { 0.0 };
                assert!((t.mu[k][l] - expect).abs() < 1e-14, "{k},{l}");
            }
        }
        let csv = coherence_to_csv(&t);
        assert!(csv.starts_with("k,l,mu\n1,1,"));
        assert_eq!(csv.lines().count(), 17);
    }
}
