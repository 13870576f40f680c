use kawlab_core::certify::{ripl_constant, ripl_order_auto, RiplMode};
use kawlab_core::operators::Sparsifier;
use kawlab_core::optimal::{DemoReport, Rel};

use super::recovery::doubled_order;
use super::{build_operator, levels, table, usage, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, Result};

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lv = levels(cfg)?;
    let order = match cfg.param("order") {
        "auto" => ripl_order_auto(&lv),
        "double" => doubled_order(&lv),
        list => list
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| usage(format!("params.order {list:?} is not a list of integers")))?,
    };
    let sampled = cfg.int("sampled");
    let draws = cfg.int("draws");
    let threshold = cfg.real("ripl_delta");
    let mut rows = Vec::new();
    let mut certified = 0usize;
    let mut m = 0usize;
    for d in 0..draws {
        let seed = cfg.seed.wrapping_add(d as u64);
        let a = build_operator(cfg, seed)?;
        m = a.m();
        let mode = if sampled == 0 {
            RiplMode::Exhaustive
        } else {
            RiplMode::Sampled {
                supports: sampled,
                seed,
            }
        };
        let res = stage(
            "certify",
            ripl_constant(&a, &Sparsifier::Haar, &lv, &order, mode),
        )?;
        if res.delta <= threshold {
            certified += 1;
        }
        rows.push(vec![d as f64, res.delta, res.supports_checked as f64]);
    }
    let mut rep = DemoReport::new("certify-ripl");
    rep.set("m", m as f64);
    rep.set("draws", draws as f64);
    rep.set("certified_fraction", certified as f64 / draws.max(1) as f64);
    rep.set("expected_fraction", 1.0 - cfg.operator.nu);
    rep.set("exhaustive", if sampled == 0 { 1.0 } else { 0.0 });
    rep.claim(
        "certified fraction is at least 1 - nu",
        "certified_fraction",
        Rel::Ge,
        "expected_fraction",
    );
    rep.tables
        .push(table("ripl", &["draw", "delta", "supports"], rows));
    Ok(Outcome::new(rep))
}
