use std::f64::consts::PI;

use kawlab_core::linalg::{
    dft_forward, dft_inverse, fwht_sequency_forward, fwht_sequency_inverse, haar_forward,
    haar_inverse, transform_matrix, CMatrix,
};
use kawlab_core::optimal::{DemoReport, Rel};
use kawlab_core::{rng, CVector, C64};

use super::{table, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, Result};

type Pair = (
    &'static str,
    fn(&[C64]) -> kawlab_core::Result<CVector>,
    fn(&[C64]) -> kawlab_core::Result<CVector>,
);

const TRANSFORMS: [Pair; 3] = [
    ("dft", dft_forward, dft_inverse),
    ("walsh", fwht_sequency_forward, fwht_sequency_inverse),
    ("haar", haar_forward, haar_inverse),
];

fn naive_dft(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(s, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn gram_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint().matmul(u);
    let mut worst = 0.0f64;
    for i in 0..g.rows {
        for j in 0..g.cols {
            let e = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - C64::new(e, 0.0)).norm());
        }
    }
    worst
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let max_n = cfg.int("max_n");
    let naive_max = cfg.int("naive_max_n");
    let mut r = rng::seeded(cfg.seed);
    let mut rows = Vec::new();
    let mut naive_rows = Vec::new();
    let (mut unitary, mut round, mut naive) = (0.0f64, 0.0f64, 0.0f64);
    let mut n = 2;
    while n <= max_n {
        let x = rng::gaussian_cvector(&mut r, n, 1.0);
        let y = rng::gaussian_cvector(&mut r, n, 1.0);
        let mut row = vec![n as f64];
        let mut rts = Vec::new();
        for (_, fwd, inv) in TRANSFORMS {
            let fx = stage("transform", fwd(&x))?;
            let fy = stage("transform", fwd(&y))?;
            let mut u = ((fx.norm() - x.norm()) / x.norm())
                .abs()
                .max((fx.dot(&fy) - x.dot(&y)).norm() / (x.norm() * y.norm()));
            if n <= 64 {
                u = u.max(gram_defect(&stage("transform", transform_matrix(n, fwd))?));
            }
            let rt = stage("transform", inv(&fx))?.dist(&x) / x.norm();
            unitary = unitary.max(u);
            round = round.max(rt);
            row.push(u);
            rts.push(rt);
        }
        row.extend(rts);
        rows.push(row);
        if n <= naive_max {
            let fast = stage("transform", dft_forward(&x))?;
            let err = fast.dist(&CVector(naive_dft(&x)));
            naive = naive.max(err);
            naive_rows.push(vec![n as f64, err]);
        }
        n *= 2;
    }
    let mut rep = DemoReport::new("transforms-check");
    rep.set("max_n", max_n as f64);
    rep.set("tol", cfg.real("tol"));
    rep.set("naive_tol", cfg.real("naive_tol"));
    rep.set("unitarity_error", unitary);
    rep.set("round_trip_error", round);
    rep.set("naive_dft_error", naive);
    rep.claim(
        "DFT, Walsh and Haar are unitary",
        "unitarity_error",
        Rel::Le,
        "tol",
    );
    rep.claim(
        "inverse transforms undo the forward ones",
        "round_trip_error",
        Rel::Le,
        "tol",
    );
    rep.claim(
        "fast DFT matches the naive sum",
        "naive_dft_error",
        Rel::Le,
        "naive_tol",
    );
    rep.tables.push(table(
        "transforms",
        &[
            "n",
            "dft_unitary",
            "walsh_unitary",
            "haar_unitary",
            "dft_round_trip",
            "walsh_round_trip",
            "haar_round_trip",
        ],
        rows,
    ));
    rep.tables
        .push(table("naive-dft", &["n", "error"], naive_rows));
    Ok(Outcome::new(rep))
}
