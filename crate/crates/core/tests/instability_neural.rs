use kawlab_core::instability::{
    check_vjp, empirical_lipschitz, falsewitness, lipschitz_lower_bound, tumor_signal, wilson,
    LipschitzProbe, Metric, ReconstructionMap, TumorMode, TumorParams,
};
use kawlab_core::neural::{
    corrected_matrix, interpolatory_network, mlp, pinv_decoder_network, Network,
};
use kawlab_core::operators::{MeasurementOperator, Transform};
use kawlab_core::{rng, CMatrix, CVector, C64};
use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;

fn to_na(m: &CMatrix) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.rows, m.cols, |i, j| {
        let z = m.get(i, j);
        Complex::new(z.re, z.im)
    })
}

fn na_vec(v: &CVector) -> DVector<Complex<f64>> {
    DVector::from_iterator(v.len(), v.iter().map(|z| Complex::new(z.re, z.im)))
}

fn max_diff(a: &CVector, b: &DVector<Complex<f64>>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| ((x.re - y.re).powi(2) + (x.im - y.im).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

fn random_rows(r: &mut rng::Rng, n: usize, m: usize) -> Vec<usize> {
    let mut rows = rand::seq::index::sample(r, n, m).into_vec();
    rows.sort_unstable();
    rows
}

#[test]
fn pinv_decoder_matches_nalgebra_pseudoinverse() {
    let mut r = rng::seeded(31);
    for (kind, n, m) in [
        (Transform::Fourier, 16, 5),
        (Transform::Walsh, 32, 9),
        (Transform::Fourier, 8, 8),
    ] {
        let a = MeasurementOperator::unscaled(kind, n, random_rows(&mut r, n, m)).unwrap();
        let oracle = to_na(&a.matrix().unwrap()).pseudo_inverse(1e-12).unwrap();
        let net = pinv_decoder_network(&a, 3, 4 * m).unwrap();
        for _ in 0..5 {
            let y = rng::gaussian_cvector(&mut r, m, 1.0);
            let err = max_diff(&net.eval(&y).unwrap(), &(&oracle * na_vec(&y)));
            assert!(err < 1e-10, "{kind:?} n={n}: {err}");
        }
    }
}

#[test]
fn corrected_matrix_satisfies_its_interpolation_conditions() {
    let mut r = rng::seeded(32);
    let a =
        MeasurementOperator::unscaled(Transform::Walsh, 16, random_rows(&mut r, 16, 6)).unwrap();
    let oracle = to_na(&a.matrix().unwrap()).pseudo_inverse(1e-12).unwrap();
    let y_hat = rng::gaussian_cvector(&mut r, 6, 1.0);
    let target = rng::gaussian_cvector(&mut r, 16, 1.0);
    for i in 0..6 {
        let c = to_na(&corrected_matrix(&a, i, &y_hat, &target).unwrap());
        assert!(max_diff(&target, &(&c * na_vec(&y_hat))) < 1e-12);
        let mut y = rng::gaussian_cvector(&mut r, 6, 1.0);
        y[i] = C64::new(0.0, 0.0);
        let diff = &c * na_vec(&y) - &oracle * na_vec(&y);
        assert!(diff.norm() < 1e-12);
    }
}

#[test]
fn linear_lipschitz_matches_nalgebra_operator_norm() {
    let mut r = rng::seeded(33);
    let m = CMatrix::from_fn(5, 9, |_, _| {
        C64::new(rng::gaussian(&mut r), rng::gaussian(&mut r))
    });
    let smax = to_na(&m).singular_values().max();
    let map = kawlab_core::instability::LinearMap::new(m);
    let y = rng::gaussian_cvector(&mut r, 9, 1.0);
    let est = empirical_lipschitz(&map, &y, &LipschitzProbe::new(1e-2, 8, 1)).unwrap();
    assert!(
        (est.value - smax).abs() < 1e-6 * smax,
        "{} vs {smax}",
        est.value
    );
}

#[test]
fn mlp_gradients_pass_the_difference_check() {
    let mut r = rng::seeded(34);
    let net = mlp(&[6, 10, 8], true, 5).unwrap();
    let y = rng::gaussian_cvector(&mut r, 3, 1.0);
    assert!(check_vjp(&net, &y, 8, 1e-6, 2).unwrap() < 1e-5);
}

#[test]
fn near_kernel_pair_forces_instability() {
    let a = MeasurementOperator::unscaled(Transform::Fourier, 64, (0..15).collect()).unwrap();
    let params = TumorParams {
        mode: TumorMode::NearKernel { sigma: 1.0 },
        center: Some(20),
        norm: 0.4,
    };
    let tumor = tumor_signal(&a, params, 3).unwrap();
    assert!(
        tumor.az_norm > 0.0 && tumor.az_norm < 0.05 * tumor.norm,
        "{}",
        tumor.az_norm
    );
    let mut r = rng::seeded(35);
    let xs: Vec<CVector> = (0..4)
        .map(|_| rng::gaussian_real_cvector(&mut r, 64, 0.2))
        .collect();
    let x2 = xs[0].add(&tumor.z);
    let mut pairs: Vec<(CVector, CVector)> = xs
        .iter()
        .map(|x| (a.apply(x).unwrap(), x.clone()))
        .collect();
    pairs.push((a.apply(&x2).unwrap(), x2.clone()));
    let net = interpolatory_network(&pairs, 1).unwrap();
    let delta = pairs
        .iter()
        .map(|(y, x)| net.eval(y).unwrap().dist(x))
        .fold(0.0, f64::max);
    assert!(delta < 1e-8, "{delta}");

    let eta = tumor.az_norm;
    let w = falsewitness(&xs[0], &x2, &a).unwrap();
    let chk = w.check(&net, &a, eta, Metric::L2).unwrap();
    assert!(chk.positive_holds() && chk.negative_holds(), "{chk:?}");

    let bound = lipschitz_lower_bound(tumor.norm - 2.0 * delta, eta, eta).unwrap();
    let probe = LipschitzProbe::new(eta, 16, 4).with_candidates(vec![w.e.clone()]);
    let est = empirical_lipschitz(&net, &a.apply(&xs[0]).unwrap(), &probe).unwrap();
    assert!(
        bound > 1.0 && est.value >= bound,
        "{} vs {bound}",
        est.value
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let k = ((trials as f64) * frac).round() as usize;
        let e = wilson(k, trials);
        prop_assert!(0.0 <= e.lower && e.lower <= e.p + 1e-12);
        prop_assert!(e.p <= e.upper + 1e-12 && e.upper <= 1.0);
        let more = wilson(4 * k, 4 * trials);
        prop_assert!(more.upper - more.lower <= e.upper - e.lower + 1e-12);
    }

    #[test]
    fn network_bytes_round_trip(seed in any::<u64>(), hidden in 1usize..12, complex in any::<bool>()) {
        let out = if complex { 6 } else { 3 };
        let net = mlp(&[4, hidden, out], complex, seed).unwrap();
        let back = Network::from_bytes(&net.to_bytes()).unwrap();
        prop_assert_eq!(&back, &net);
        let x: Vec<f64> = (0..4).map(|i| i as f64 - 1.5).collect();
        prop_assert_eq!(back.forward(&x).unwrap(), net.forward(&x).unwrap());
    }
}
