#![allow(dead_code)]

pub mod lp;

use kawlab_core::operators::LevelStructure;
use kawlab_core::{rng, CVector, C64};

/// Random (s, M)-sparse coefficient vector with N(0,1) entries.
pub fn sparse_in_levels(levels: &LevelStructure, r: &mut rng::Rng, complex: bool) -> CVector {
    use rand::seq::index::sample;
    let mut c = CVector::zeros(levels.n);
    for (range, &s) in levels.ranges().iter().zip(&levels.sparsities) {
        for i in sample(r, range.len(), s).into_iter() {
            let re = rng::gaussian(r);
            let im = if complex { rng::gaussian(r) } else { 0.0 };
            c[range.start + i] = C64::new(re, im);
        }
    }
    c
}
