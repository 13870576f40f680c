#![allow(clippy::needless_range_loop)]

use kawlab_core::operators::*;
use proptest::prelude::*;

#[test]
fn walsh_haar_coherence_is_block_diagonal() {
    for r in 2..=11 {
        let b = dyadic_bounds(r);
        let t = local_coherence(Transform::Walsh, &Sparsifier::Haar, &b, &b).unwrap();
        let sizes: Vec<usize> = level_ranges_of(&b).iter().map(|x| x.len()).collect();
        for k in 0..r {
            for l in 0..r {
                let expect = if k == l { 1.0 / sizes[k] as f64 } else { 0.0 };
                assert!(
                    (t.mu[k][l] - expect).abs() < 1e-12,
                    "r={r} k={k} l={l} mu={}",
                    t.mu[k][l]
                );
            }
        }
    }
}

#[test]
fn fourier_haar_coherence_decays() {
    let r = 7;
    let b = dyadic_bounds(r);
    let t = local_coherence(Transform::Fourier, &Sparsifier::Haar, &b, &b).unwrap();
    let sizes: Vec<usize> = level_ranges_of(&b).iter().map(|x| x.len()).collect();
    let mut worst: f64 = 0.0;
    for k in 0..r {
        for l in 0..r {
            let decay = if l <= k {
                2f64.powi(-((k - l) as i32))
            } else {
                2f64.powi(-3 * (l - k) as i32)
            };
            worst = worst.max(t.mu[k][l] * sizes[k] as f64 / decay);
        }
    }
    assert!(worst <= 10.0, "measured constant {worst}");
}

fn independent_walsh(n: f64, m: f64, s: f64, sk: f64, nu: f64, c: f64) -> f64 {
    let l = n.ln() * n.ln() * n.ln() * (2.0 * m).ln() * (2.0 * s).ln() * (2.0 * s).ln()
        + n.ln() * (1.0 / nu).ln();
    (c * sk * l).ceil()
}

#[test]
fn walsh_budgets_agree_with_direct_evaluation() {
    let l = LevelStructure::dyadic(6, vec![1, 1, 1, 1, 1, 1]).unwrap();
    for c in [1.0, 0.01, 0.002] {
        let m = walsh_budgets(&l, BudgetParams { nu: 0.1, c }).unwrap();
        let total: usize = m.iter().sum();
        for (k, &mk) in m.iter().enumerate() {
            let direct = independent_walsh(32.0, total as f64, 6.0, 1.0, 0.1, c)
                .min(l.level_sizes()[k] as f64);
            assert_eq!(mk as f64, direct, "C={c} k={k}");
        }
    }
}

#[test]
fn fourier_budgets_agree_with_direct_evaluation() {
    let s = [1usize, 1, 2, 1, 1];
    let l = LevelStructure::dyadic(5, s.to_vec()).unwrap();
    let c = 0.004;
    let m = fourier_budgets(&l, BudgetParams { nu: 0.1, c }).unwrap();
    let total: f64 = m.iter().sum::<usize>() as f64;
    let st: f64 = 6.0;
    let n: f64 = 16.0;
    let big_l = n.ln().powi(3) * (2.0 * total).ln() * (2.0 * st).ln().powi(2) + n.ln() * 10f64.ln();
    for k in 0..5 {
        let mut e = s[k] as f64;
        for j in 0..5 {
            if j < k {
                e += s[j] as f64 / 2f64.powi((k - j) as i32);
            } else if j > k {
                e += s[j] as f64 / 8f64.powi((j - k) as i32);
            }
        }
        let direct = (c * e * big_l).ceil().min(l.level_sizes()[k] as f64);
        assert_eq!(m[k] as f64, direct, "k={k}");
    }
}

proptest! {
    #[test]
    fn scheme_invariants(seed in any::<u64>(), r in 2usize..8, frac in 0.0f64..1.0) {
        let b = dyadic_bounds(r);
        let sizes: Vec<usize> = level_ranges_of(&b).iter().map(|x| x.len()).collect();
        let m: Vec<usize> = sizes.iter().map(|&s| ((s as f64) * frac).round() as usize).collect();
        let sch = draw_multilevel_scheme(&m, &b, seed, DrawMode::Dedup).unwrap();
        prop_assert_eq!(sch.m(), m.iter().sum::<usize>());
        prop_assert!(sch.omega.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(&sch.counts, &m);
        let again = draw_multilevel_scheme(&m, &b, seed, DrawMode::Dedup).unwrap();
        prop_assert_eq!(again, sch);
    }

    #[test]
    fn budgets_never_exceed_level_sizes(s in proptest::collection::vec(0usize..3, 5), c in 0.0001f64..2.0) {
        let s: Vec<usize> = s.iter().enumerate().map(|(i, &v)| v.min(1 << i.saturating_sub(1))).collect();
        let l = LevelStructure::dyadic(5, s).unwrap();
        for m in [walsh_budgets(&l, BudgetParams { nu: 0.5, c }).unwrap(), fourier_budgets(&l, BudgetParams { nu: 0.5, c }).unwrap()] {
            for (mk, size) in m.iter().zip(l.level_sizes()) {
                prop_assert!(*mk <= size);
            }
        }
    }
}
