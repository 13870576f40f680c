use kawlab_core::neural::{
    mlp, multi_mask_samples, piecewise_poly_signals, refit_output_layer, train, Network, Sample,
    TrainConfig,
};
use kawlab_core::optimal::{DemoReport, Rel};

use super::{build_operator, table, usage, Outcome};
use crate::config::{ExperimentConfig, Sampling};
use crate::error::{stage, Result};

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let masks = cfg.int("masks");
    if masks == 0 {
        return Err(usage("at least one mask is required"));
    }
    if masks > 1 && cfg.operator.sampling != Sampling::Multilevel {
        return Err(usage("several masks need multilevel sampling"));
    }
    let ops = (0..masks as u64)
        .map(|i| build_operator(cfg, cfg.seed + i))
        .collect::<Result<Vec<_>>>()?;
    let n = ops[0].n();
    let signals = piecewise_poly_signals(cfg.int("signals"), n, cfg.seed ^ 0x51, cfg.flag("jumps"));
    let data: Vec<Sample> = if masks == 1 {
        let a = &ops[0];
        signals
            .iter()
            .map(|x| a.apply(x).map(|y| Sample::from_complex(&y, x, false)))
            .collect::<kawlab_core::Result<_>>()
            .map_err(|e| crate::error::HarnessError::Stage {
                stage: "data".into(),
                source: e,
            })?
    } else {
        stage("data", multi_mask_samples(&signals, &ops, false))?
    };
    let inputs = data[0].input.len();
    let hidden = if cfg.train.hidden == 0 {
        4 * data.len()
    } else {
        cfg.train.hidden
    };
    let mut net =
        stage("network", mlp(&[inputs, hidden, n], false, cfg.seed))?.with_label("trained-mlp");
    let initial = stage("loss", net.loss(&data))?;
    let tc = TrainConfig::new(cfg.train.epochs, cfg.train.batch_size, cfg.seed ^ 0x7a)
        .with_lr(cfg.train.lr);
    let out = stage("train", train(&mut net, &data, &tc))?;
    let mut max_error = out.final_error;
    if cfg.flag("refit") {
        max_error = stage("refit", refit_output_layer(&mut net, &data, 1e-10))?;
    }
    let bytes = net.to_bytes();
    let reloaded = stage("reload", Network::from_bytes(&bytes))?;
    let mut rep = DemoReport::new("train");
    rep.set("samples", data.len() as f64);
    rep.set("parameters", net.parameter_count() as f64);
    rep.set("initial_loss", initial);
    rep.set("final_loss", stage("loss", net.loss(&data))?);
    rep.set("max_error", max_error);
    rep.set("reload_difference", if reloaded == net { 0.0 } else { 1.0 });
    rep.set("zero", 0.0);
    rep.claim(
        "training lowers the loss",
        "final_loss",
        Rel::Lt,
        "initial_loss",
    );
    rep.claim(
        "the saved network reloads unchanged",
        "reload_difference",
        Rel::Le,
        "zero",
    );
    let curve = out
        .loss_curve
        .iter()
        .enumerate()
        .map(|(e, l)| vec![e as f64, *l])
        .collect();
    rep.tables.push(table("loss", &["epoch", "loss"], curve));
    Ok(Outcome::new(rep).with_file("network.bin", bytes))
}
