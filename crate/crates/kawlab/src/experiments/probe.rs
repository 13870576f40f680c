use kawlab_core::instability::{
    empirical_lipschitz, BestEffortDecoder, CsDecoder, LinearMap, LipschitzProbe, ReconstructionMap,
};
use kawlab_core::operators::Sparsifier;
use kawlab_core::optimal::{DemoReport, Rel};
use kawlab_core::rng;
use kawlab_core::solver::{cs_lipschitz_cap, Model};

use super::{build_operator, levels, solver_config, sparse_coefficients, table, usage, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, Result};

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lv = levels(cfg)?;
    let a = build_operator(cfg, cfg.seed)?;
    let h = Sparsifier::Haar;
    let mut r = rng::seeded(cfg.seed ^ 0x9b);
    let x = stage("signal", h.inverse(&sparse_coefficients(&lv, &mut r, true)))?;
    let y = stage("measure", a.apply(&x))?;
    let epsilon = cfg.real("epsilon");
    let probe = LipschitzProbe::new(epsilon, cfg.int("trials"), cfg.seed);
    let mut rep = DemoReport::new("probe");
    rep.set("epsilon", epsilon);
    rep.set("m", a.m() as f64);
    let (est, evals) = match cfg.param("map") {
        "pinv" => {
            let map = LinearMap::new(stage("pinv", a.pinv_matrix())?);
            let est = stage("lipschitz", empirical_lipschitz(&map, &y, &probe))?;
            let norm = 1.0 / stage("pinv", a.sigma_min())?;
            rep.set("pinv_norm", norm);
            rep.set("pinv_norm_lower", norm * (1.0 - 1e-6));
            rep.set("pinv_norm_upper", norm * (1.0 + 1e-9));
            rep.set("lipschitz", est.value);
            rep.claim(
                "estimate does not exceed the pinv norm",
                "lipschitz",
                Rel::Le,
                "pinv_norm_upper",
            );
            rep.claim(
                "gradient refinement attains the pinv norm",
                "lipschitz",
                Rel::Ge,
                "pinv_norm_lower",
            );
            (est.value, est.evaluations)
        }
        "cs" => {
            let map = BestEffortDecoder::new(CsDecoder {
                a: &a,
                h: &h,
                weights: lv.coefficient_weights(),
                model: Model::SparseInLevels(&lv),
                config: solver_config(cfg),
            });
            let est = stage("lipschitz", empirical_lipschitz(&map, &y, &probe))?;
            let rec = stage("decode", map.eval(&y))?;
            rep.set("recovery_error", rec.dist(&x));
            rep.set("recovery_tol", 1e-5 * (1.0 + x.norm()));
            rep.set("lipschitz", est.value);
            rep.set("cap", cs_lipschitz_cap(lv.r()));
            rep.set("unconverged_solves", map.fallbacks() as f64);
            rep.claim(
                "the decoder recovers the sparse signal",
                "recovery_error",
                Rel::Le,
                "recovery_tol",
            );
            rep.claim(
                "estimate respects the decoder's Lipschitz cap",
                "lipschitz",
                Rel::Le,
                "cap",
            );
            (est.value, est.evaluations)
        }
        other => return Err(usage(format!("unknown map {other:?}; use cs or pinv"))),
    };
    rep.tables.push(table(
        "lipschitz",
        &["epsilon", "estimate", "evaluations"],
        vec![vec![epsilon, est, evals as f64]],
    ));
    Ok(Outcome::new(rep))
}
