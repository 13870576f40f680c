use kawlab_core::certify::{ripl_constant, RiplMode};
use kawlab_core::operators::Sparsifier;
use kawlab_core::optimal::{DemoReport, Rel};
use kawlab_core::rng;
use kawlab_core::solver::Recovery;

use super::{build_operator, levels, solver_config, sparse_coefficients, table, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, HarnessError, Result};

/// Order `min(2 s_l, level size)` used to certify recovery.
pub fn doubled_order(levels: &kawlab_core::operators::LevelStructure) -> Vec<usize> {
    levels
        .sparsities
        .iter()
        .zip(levels.level_sizes())
        .map(|(&s, n)| n.min(2 * s))
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lv = levels(cfg)?;
    let h = Sparsifier::Haar;
    let trials = cfg.int("trials");
    let retries = cfg.int("ripl_retries");
    let target = cfg.real("ripl_delta");
    let tol = cfg.real("exact_tol");
    let order = doubled_order(&lv);
    let solver = solver_config(cfg);
    let mut r = rng::seeded(cfg.seed);
    let mut draw = 0u64;
    let mut rows = Vec::new();
    let mut exact = 0usize;
    for trial in 0..trials {
        let mut found = None;
        for attempt in 0..retries.max(1) {
            let a = build_operator(cfg, cfg.seed.wrapping_mul(1_000_003).wrapping_add(draw))?;
            draw += 1;
            let res = stage(
                "certify",
                ripl_constant(&a, &h, &lv, &order, RiplMode::Exhaustive),
            )?;
            if res.delta <= target {
                found = Some((a, res.delta, attempt + 1));
                break;
            }
        }
        let (a, delta, attempts) = found.ok_or_else(|| {
            HarnessError::Check(vec![format!(
                "trial {trial}: no certified scheme in {retries} draws"
            )])
        })?;
        let rec = stage("recovery", Recovery::with_levels(&a, &h, &lv))?;
        let x = stage(
            "signal",
            h.inverse(&sparse_coefficients(&lv, &mut r, false)),
        )?;
        let y = stage("measure", a.apply(&x))?;
        let sol = stage("qcbp", rec.qcbp(&y, 0.0, &solver))?;
        let err = sol.x.dist(&x);
        if err <= tol {
            exact += 1;
        }
        rows.push(vec![
            trial as f64,
            attempts as f64,
            delta,
            a.m() as f64,
            err,
            sol.iterations as f64,
            sol.objective,
        ]);
    }
    let mut rep = DemoReport::new("recovery");
    rep.set("trials", trials as f64);
    rep.set("exact", exact as f64);
    rep.set("required", cfg.int("required") as f64);
    rep.set("scheme_draws", draw as f64);
    rep.claim(
        "exact recoveries reach the required count",
        "exact",
        Rel::Ge,
        "required",
    );
    rep.tables.push(table(
        "recovery",
        &[
            "trial",
            "draws",
            "ripl_delta",
            "m",
            "error",
            "iterations",
            "objective",
        ],
        rows,
    ));
    Ok(Outcome::new(rep))
}
