mod common;

use kawlab_core::operators::*;
use kawlab_core::solver::*;
use kawlab_core::{rng, CMatrix, CVector, C64};

fn walsh_setup(seed: u64, c: f64) -> (LevelStructure, MeasurementOperator) {
    let levels = LevelStructure::dyadic(6, vec![1, 1, 1, 1, 1, 2]).unwrap();
    let m = walsh_budgets(&levels, BudgetParams { nu: 0.1, c }).unwrap();
    let sch = draw_multilevel_scheme(&m, &levels.bounds, seed, DrawMode::Dedup).unwrap();
    (
        levels,
        MeasurementOperator::from_scheme(Transform::Walsh, &sch).unwrap(),
    )
}

#[test]
fn lp_oracle_sanity() {
    // min |x1| + |x2| s.t. x1 + x2 = 1  -> 1
    let v = common::lp::weighted_l1_min(&[vec![1.0, 1.0]], &[1.0], &[1.0, 1.0]).unwrap();
    assert!((v - 1.0).abs() < 1e-12);
    // min |x1| + 3|x2| s.t. x1 - x2 = 2, x1 + 2 x2 = -1 -> x2 = -1, x1 = 1 -> 4
    let v = common::lp::weighted_l1_min(
        &[vec![1.0, -1.0], vec![1.0, 2.0]],
        &[2.0, -1.0],
        &[1.0, 3.0],
    )
    .unwrap();
    assert!((v - 4.0).abs() < 1e-12);
}

#[test]
fn walsh_haar_recovery_and_lp_objective() {
    let h = Sparsifier::Haar;
    let mut r = rng::seeded(1234);
    let mut max_iter = 0;
    let mut ok = 0;
    for seed in 0..20u64 {
        let (levels, a) = walsh_setup(seed, 0.006);
        let rec = Recovery::with_levels(&a, &h, &levels).unwrap();
        let c = common::sparse_in_levels(&levels, &mut r, false);
        let x = h.inverse(&c).unwrap();
        let y = a.apply(&x).unwrap();
        let sol = rec.qcbp(&y, 0.0, &SolverConfig::default()).unwrap();
        max_iter = max_iter.max(sol.iterations);
        if sol.x.dist(&x) <= 1e-6 {
            ok += 1;
        }
        let b = a.matrix_with(&h).unwrap();
        let breal: Vec<Vec<f64>> = (0..b.rows)
            .map(|i| (0..b.cols).map(|j| b.get(i, j).re).collect())
            .collect();
        let yr: Vec<f64> = y.iter().map(|z| z.re).collect();
        let lp = common::lp::weighted_l1_min(&breal, &yr, &rec.weights).unwrap();
        assert!(
            (sol.objective - lp).abs() <= 1e-6 * (1.0 + lp),
            "seed {seed}: {} vs {lp}",
            sol.objective
        );
    }
    eprintln!("exact {ok}/20, max iterations {max_iter}");
    assert!(ok >= 19);
}

#[test]
fn dense_gaussian_bp_matches_lp() {
    let mut r = rng::seeded(99);
    let h = Sparsifier::Identity;
    for _ in 0..5 {
        let m = CMatrix::from_fn(6, 12, |_, _| C64::new(rng::gaussian(&mut r), 0.0));
        let a = MeasurementOperator::dense(m.clone()).unwrap();
        let rec = Recovery::unweighted(&a, &h).unwrap();
        let y = CVector::from_real(&(0..6).map(|_| rng::gaussian(&mut r)).collect::<Vec<_>>());
        let sol = rec.qcbp(&y, 0.0, &SolverConfig::default()).unwrap();
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..12).map(|j| m.get(i, j).re).collect())
            .collect();
        let yr: Vec<f64> = y.iter().map(|z| z.re).collect();
        let lp = common::lp::weighted_l1_min(&rows, &yr, &[1.0; 12]).unwrap();
        assert!(
            (sol.objective - lp).abs() < 1e-6,
            "{} vs {lp}",
            sol.objective
        );
        assert!(a.apply(&sol.x).unwrap().dist(&y) <= 1e-8 * (1.0 + y.norm()));
    }
}

fn coordinate_descent_lasso(b: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let (m, n) = (b.len(), w.len());
    let mut c = vec![0.0; n];
    let mut res: Vec<f64> = y.to_vec();
    let colsq: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| b[i][j] * b[i][j]).sum())
        .collect();
    for _ in 0..20_000 {
        for j in 0..n {
            let zj: f64 = (0..m).map(|i| b[i][j] * (res[i] + b[i][j] * c[j])).sum();
            let t = lambda * w[j] / 2.0;
            let new = if zj > t {
                (zj - t) / colsq[j]
            } else if zj < -t {
                (zj + t) / colsq[j]
            } else {
                0.0
            };
            for i in 0..m {
                res[i] -= b[i][j] * (new - c[j]);
            }
            c[j] = new;
        }
    }
    res.iter().map(|r| r * r).sum::<f64>()
        + lambda * c.iter().zip(w).map(|(a, b)| a.abs() * b).sum::<f64>()
}

#[test]
fn lasso_matches_coordinate_descent_and_duality_gap() {
    let mut r = rng::seeded(5);
    let h = Sparsifier::Identity;
    for lambda in [0.05, 0.3, 1.0] {
        let m = CMatrix::from_fn(6, 12, |_, _| C64::new(rng::gaussian(&mut r), 0.0));
        let a = MeasurementOperator::dense(m.clone()).unwrap();
        let rec = Recovery::unweighted(&a, &h).unwrap();
        let y = CVector::from_real(&(0..6).map(|_| rng::gaussian(&mut r)).collect::<Vec<_>>());
        let sol = rec.lasso(&y, lambda, &SolverConfig::default()).unwrap();
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..12).map(|j| m.get(i, j).re).collect())
            .collect();
        let yr: Vec<f64> = y.iter().map(|z| z.re).collect();
        let oracle = coordinate_descent_lasso(&rows, &yr, &[1.0; 12], lambda);
        assert!(
            sol.objective <= oracle + 1e-6,
            "{} vs {oracle}",
            sol.objective
        );
        // dual certificate u = s * 2 (Bc - y)
        let u0 = a.apply(&sol.x).unwrap().sub(&y).scale(2.0);
        let g = a.adjoint(&u0).unwrap();
        let s = g.iter().map(|z| lambda / z.norm()).fold(1.0f64, f64::min);
        let u = u0.scale(s);
        let dual = -u.norm_sqr() / 4.0 - u.dot(&y).re;
        assert!(sol.objective - dual <= 1e-6, "gap {}", sol.objective - dual);
    }
}

#[test]
fn noisy_qcbp_is_feasible_and_bounded() {
    let h = Sparsifier::Haar;
    let mut r = rng::seeded(77);
    let mut checked = 0;
    for seed in 0..40u64 {
        let (levels, a) = walsh_setup(seed + 100, 0.006);
        let rec = Recovery::with_levels(&a, &h, &levels).unwrap();
        let c = common::sparse_in_levels(&levels, &mut r, true);
        // add a small tail so that the best-term error is non-zero
        let mut c = c;
        for v in c.iter_mut() {
            *v += C64::new(1e-3 * rng::gaussian(&mut r), 0.0);
        }
        let x = h.inverse(&c).unwrap();
        let eta = 1e-2;
        let e = rng::unit_direction(&mut r, a.m()).scale(eta * 0.9);
        let y = a.apply(&x).unwrap().add(&e);
        let sol = rec.qcbp(&y, eta, &SolverConfig::default()).unwrap();
        assert!(a.apply(&sol.x).unwrap().dist(&y) <= eta + 1e-8 * (1.0 + y.norm()));
        let chk = recovery_bound_check(&x, &sol.x, &h, &levels, eta).unwrap();
        assert!(chk.holds, "seed {seed}: {} > {}", chk.error, chk.bound);
        checked += 1;
    }
    assert_eq!(checked, 40);
}

#[test]
fn qcbp_is_scale_equivariant() {
    let h = Sparsifier::Haar;
    let mut r = rng::seeded(8);
    for seed in 0..5u64 {
        let (levels, a) = walsh_setup(seed, 0.006);
        let rec = Recovery::with_levels(&a, &h, &levels).unwrap();
        let x = h
            .inverse(&common::sparse_in_levels(&levels, &mut r, true))
            .unwrap();
        let y = a.apply(&x).unwrap();
        let base = rec.qcbp(&y, 1e-3, &SolverConfig::default()).unwrap();
        for t in [0.5, 2.0, 10.0] {
            let scaled = rec
                .qcbp(&y.scale(t), 1e-3 * t, &SolverConfig::default())
                .unwrap();
            let rel = scaled.x.dist(&base.x.scale(t)) / (t * base.x.norm());
            assert!(rel < 1e-8, "t={t}: {rel}");
        }
    }
}

#[test]
fn best_term_error_vanishes_on_model_and_is_homogeneous() {
    let levels = LevelStructure::dyadic(6, vec![1, 1, 1, 1, 1, 2]).unwrap();
    let mut r = rng::seeded(4);
    for _ in 0..20 {
        let c = common::sparse_in_levels(&levels, &mut r, true);
        assert_eq!(best_levels_term_error(&c, &levels).unwrap().sigma, 0.0);
        let z = rng::gaussian_cvector(&mut r, 32, 1.0);
        let s1 = best_levels_term_error(&z, &levels).unwrap().sigma;
        let s2 = best_levels_term_error(&z.scale(-3.0), &levels)
            .unwrap()
            .sigma;
        assert!((s2 - 3.0 * s1).abs() < 1e-12 * s2.max(1.0));
    }
}
