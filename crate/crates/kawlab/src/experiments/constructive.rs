use kawlab_core::instability::ReconstructionMap;
use kawlab_core::neural::{
    corrected_decoder_network, identity_relu_gadget, pinv_decoder_network, Layer, Network, Shape,
};
use kawlab_core::operators::{MeasurementOperator, Transform};
use kawlab_core::optimal::{lambda_sensitivity_demo, DemoReport, LambdaConfig, Rel};
use kawlab_core::{rng, C64};

use super::{table, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, HarnessError, Result};

fn gadget_error(seed: u64) -> Result<f64> {
    let mut r = rng::seeded(seed);
    let mut worst = 0.0f64;
    for dim in 1..=16 {
        let (l1, l2) = stage("gadget", identity_relu_gadget(dim))?;
        let net = stage(
            "gadget",
            Network::new(Shape::new(1, dim), vec![l1, Layer::Relu, l2], false),
        )?;
        for _ in 0..4 {
            let y: Vec<f64> = (0..dim).map(|_| 10.0 * rng::gaussian(&mut r)).collect();
            let out = stage("gadget", net.forward(&y))?;
            worst = worst.max(
                out.iter()
                    .zip(&y)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }
    }
    Ok(worst)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let depth = cfg.int("depth");
    let n = cfg.operator.n();
    let rows: Vec<usize> = (0..cfg.operator.m).collect();
    let mut rep = DemoReport::new("constructive");
    rep.set("tol", cfg.real("tol"));
    rep.set("loss_tol", cfg.real("loss_tol"));
    rep.set("gadget_error", gadget_error(cfg.seed)?);
    rep.claim("identity gadget is exact", "gadget_error", Rel::Le, "tol");
    let mut r = rng::seeded(cfg.seed ^ 0xc0);
    let mut tab = Vec::new();
    for (ti, kind) in [Transform::Fourier, Transform::Walsh]
        .into_iter()
        .enumerate()
    {
        let a = stage(
            "operator",
            MeasurementOperator::unscaled(kind, n, rows.clone()),
        )?;
        let m = a.m();
        let width = 4 * m + 2;
        let pinv = stage("pinv", pinv_decoder_network(&a, depth, width))?;
        let mut pinv_err = 0.0f64;
        for _ in 0..10 {
            let x = stage(
                "pinv",
                a.project_cokernel(&rng::gaussian_cvector(&mut r, n, 1.0)),
            )?;
            pinv_err =
                pinv_err.max(stage("pinv", pinv.eval(&stage("pinv", a.apply(&x))?))?.dist(&x));
        }
        let mut y_hat = rng::gaussian_cvector(&mut r, m, 1.0);
        y_hat[0] = C64::new(1.0, -0.5);
        let target = rng::gaussian_cvector(&mut r, n, 1.0);
        let corr = stage(
            "corrected",
            corrected_decoder_network(&a, 0, &y_hat, &target, depth, width),
        )?;
        let hit = stage("corrected", corr.eval(&y_hat))?.dist(&target);
        let mut y0 = rng::gaussian_cvector(&mut r, m, 1.0);
        y0[0] = C64::new(0.0, 0.0);
        let agree =
            stage("corrected", corr.eval(&y0))?.dist(&stage("corrected", a.pinv_apply(&y0))?);
        let name = kind.name();
        rep.set(&format!("{name}_pinv_error"), pinv_err);
        rep.set(&format!("{name}_corrected_hit"), hit);
        rep.set(&format!("{name}_corrected_agreement"), agree);
        rep.claim(
            &format!("{name}: pinv decoder inverts A on the cokernel"),
            &format!("{name}_pinv_error"),
            Rel::Le,
            "tol",
        );
        rep.claim(
            &format!("{name}: corrected decoder hits its target"),
            &format!("{name}_corrected_hit"),
            Rel::Le,
            "tol",
        );
        rep.claim(
            &format!("{name}: corrected decoder equals the pinv off row i"),
            &format!("{name}_corrected_agreement"),
            Rel::Le,
            "tol",
        );

        let mut lc = LambdaConfig::new(kind, n, 6, cfg.seed);
        lc.sweep.clear();
        let demo = stage("losses", lambda_sensitivity_demo(&lc))?;
        let keys = [
            "midpoint_objective",
            "midpoint_predicted",
            "optimal_map_objective",
            "optimal_map_predicted",
        ];
        let mut vals = Vec::new();
        for k in keys {
            let v = demo
                .get(k)
                .ok_or_else(|| HarnessError::Check(vec![format!("lambda demo lacks {k}")]))?;
            rep.set(&format!("{name}_{k}"), v);
            vals.push(v);
        }
        rep.claim(
            &format!("{name}: midpoint net loss is ||x||^2/(4|T|)"),
            &format!("{name}_midpoint_objective"),
            Rel::Near(cfg.real("loss_tol")),
            &format!("{name}_midpoint_predicted"),
        );
        rep.claim(
            &format!("{name}: optimal maps have loss ||x||^2/(2|T|)"),
            &format!("{name}_optimal_map_objective"),
            Rel::Near(cfg.real("loss_tol")),
            &format!("{name}_optimal_map_predicted"),
        );
        tab.push([vec![ti as f64, pinv_err, hit, agree], vals].concat());
    }
    rep.tables.push(table(
        "constructive",
        &[
            "transform",
            "pinv_error",
            "corrected_hit",
            "corrected_agreement",
            "midpoint_objective",
            "midpoint_predicted",
            "optimal_objective",
            "optimal_predicted",
        ],
        tab,
    ));
    Ok(Outcome::new(rep))
}
