use kawlab_core::instability::{
    empirical_lipschitz, falsewitness, lipschitz_lower_bound, mc_instability_probability,
    tumor_signal, LipschitzProbe, McConfig, Metric, ProbeReport, Tumor, TumorMode, TumorParams,
};
use kawlab_core::io::cvector_to_text;
use kawlab_core::neural::{
    mlp, piecewise_poly_signals, refit_output_layer, train, Network, Sample, TrainConfig,
};
use kawlab_core::operators::MeasurementOperator;
use kawlab_core::optimal::{DemoReport, Rel};
use kawlab_core::CVector;

use super::{build_operator, table, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, Result};

/// Operator, tumor, signals and the network trained to recover both
/// `x_k` and `x_k + z` for the first few signals.
pub struct TumorSetup {
    pub a: MeasurementOperator,
    pub tumor: Tumor,
    pub signals: Vec<CVector>,
    pub net: Network,
    /// Largest training error after the refit.
    pub delta: f64,
    pub loss_curve: Vec<f64>,
}

pub fn setup(cfg: &ExperimentConfig) -> Result<TumorSetup> {
    let a = build_operator(cfg, cfg.seed)?;
    let n = a.n();
    let params = TumorParams {
        mode: TumorMode::NearKernel {
            sigma: cfg.real("tumor_sigma"),
        },
        center: Some(cfg.int("tumor_center")),
        norm: cfg.real("tumor_norm"),
    };
    let tumor = stage("tumor", tumor_signal(&a, params, cfg.seed))?;
    let signals = piecewise_poly_signals(cfg.int("signals"), n, cfg.seed ^ 0x51, true);
    let mut images = signals.clone();
    for x in signals.iter().take(cfg.int("tumor_pairs")) {
        images.push(x.add(&tumor.z));
    }
    let data: Vec<Sample> = images
        .iter()
        .map(|x| Ok(Sample::from_complex(&a.apply(x)?, x, false)))
        .collect::<kawlab_core::Result<_>>()
        .map_err(|e| crate::error::HarnessError::Stage {
            stage: "data".into(),
            source: e,
        })?;
    let hidden = if cfg.train.hidden == 0 {
        4 * data.len()
    } else {
        cfg.train.hidden
    };
    let mut net =
        stage("network", mlp(&[2 * a.m(), hidden, n], false, cfg.seed))?.with_label("tumor-mlp");
    let tc = TrainConfig::new(cfg.train.epochs, cfg.train.batch_size, cfg.seed ^ 0x7a)
        .with_lr(cfg.train.lr);
    let out = stage("train", train(&mut net, &data, &tc))?;
    let delta = stage(
        "refit",
        refit_output_layer(&mut net, &data, cfg.real("ridge")),
    )?;
    Ok(TumorSetup {
        a,
        tumor,
        signals,
        net,
        delta,
        loss_curve: out.loss_curve,
    })
}

fn base_report(name: &str, cfg: &ExperimentConfig, s: &TumorSetup) -> DemoReport {
    let mut rep = DemoReport::new(name);
    rep.set("n", s.a.n() as f64);
    rep.set("m", s.a.m() as f64);
    rep.set("tumor_norm", s.tumor.norm);
    rep.set("eta", s.tumor.az_norm);
    rep.set("eta_over_d", s.tumor.az_norm / s.tumor.norm);
    rep.set("tumor_support_width", s.tumor.support_width as f64);
    rep.set("delta", s.delta);
    rep.set("delta_max", cfg.real("delta_max"));
    rep.set("zero", 0.0);
    rep.set("near_kernel_ratio", 0.05);
    rep.claim(
        "trained net reaches the required accuracy",
        "delta",
        Rel::Le,
        "delta_max",
    );
    rep.claim(
        "||A(x - x')|| is much smaller than ||x - x'||",
        "eta_over_d",
        Rel::Le,
        "near_kernel_ratio",
    );
    let curve = s
        .loss_curve
        .iter()
        .enumerate()
        .map(|(e, l)| vec![e as f64, *l])
        .collect();
    rep.tables.push(table("loss", &["epoch", "loss"], curve));
    rep
}

/// Lipschitz bound and both witnesses for the pair `(x, x + z)`.
pub fn witness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let mut rep = base_report("witness", cfg, &s);
    let x = &s.signals[0];
    let x2 = x.add(&s.tumor.z);
    let eta = s.tumor.az_norm;
    let eps = eta;
    let d = x.dist(&x2);
    let bound = stage("bound", lipschitz_lower_bound(d, s.delta, eps))?;
    let y = stage("measure", s.a.apply(x))?;
    let az = stage("measure", s.a.apply(&s.tumor.z))?;
    let probe =
        LipschitzProbe::new(eps, cfg.int("lipschitz_trials"), cfg.seed).with_candidates(vec![az]);
    let emp = stage("lipschitz", empirical_lipschitz(&s.net, &y, &probe))?;
    let w = stage("witness", falsewitness(x, &x2, &s.a))?;
    let chk = stage("witness", w.check(&s.net, &s.a, eta, Metric::L2))?;
    rep.set("d", d);
    rep.set("epsilon", eps);
    rep.set("bound", bound);
    rep.set("empirical_lipschitz", emp.value);
    rep.set("false_positive", chk.false_positive);
    rep.set("false_negative", chk.false_negative);
    rep.claim(
        "(d - 2 delta) / epsilon is positive",
        "bound",
        Rel::Gt,
        "zero",
    );
    rep.claim(
        "empirical Lipschitz meets the bound",
        "empirical_lipschitz",
        Rel::Ge,
        "bound",
    );
    rep.claim(
        "false positive: R(Ax + e) is within eta of x + z",
        "false_positive",
        Rel::Le,
        "eta",
    );
    rep.claim(
        "false negative: R(A(x + z) - e) is within eta of x",
        "false_negative",
        Rel::Le,
        "eta",
    );
    let mut probe_rep = stage("report", ProbeReport::new(d, s.delta, eps))?;
    probe_rep.empirical_lipschitz = Some(emp.value);
    probe_rep.seeds = vec![cfg.seed];
    probe_rep.config = vec![("experiment".into(), cfg.name.clone())];
    probe_rep.witnesses = vec![("e".into(), w.e.clone()), ("z".into(), w.z.clone())];
    stage("report", probe_rep.verify())?;
    Ok(Outcome::new(rep)
        .with_file("probe.txt", probe_rep.to_text().into_bytes())
        .with_file("network.bin", s.net.to_bytes())
        .with_file("x.txt", cvector_to_text(x).into_bytes())
        .with_file("tumor.txt", cvector_to_text(&s.tumor.z).into_bytes()))
}

/// Monte Carlo estimates of the instability events on the tumor network.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let mut rep = base_report("tumor-demo", cfg, &s);
    let eta_tol = cfg.real("eta");
    let mc = McConfig {
        trials: cfg.int("trials"),
        seed: cfg.seed,
        sigma: cfg.real("noise_sigma"),
        generic_sigma: cfg.real("generic_sigma"),
        epsilon: cfg.real("epsilon_factor") * s.tumor.az_norm,
        metric: Metric::L2,
    };
    let x = &s.signals[0];
    let res = stage(
        "monte-carlo",
        mc_instability_probability(&s.net, &s.a, x, &s.tumor.z, eta_tol, &mc),
    )?;
    rep.set("event_eta", eta_tol);
    rep.set("epsilon", mc.epsilon);
    rep.set("bound", res.bound);
    let events = [
        ("lipschitz", res.lipschitz),
        ("false_positive", res.false_positive),
        ("false_negative", res.false_negative),
        ("conditional", res.conditional),
    ];
    let mut rows = Vec::new();
    for (i, (name, e)) in events.iter().enumerate() {
        rep.set(&format!("{name}_p"), e.p);
        rep.set(&format!("{name}_lower"), e.lower);
        rep.set(&format!("{name}_upper"), e.upper);
        rows.push(vec![
            i as f64,
            e.successes as f64,
            e.trials as f64,
            e.p,
            e.lower,
            e.upper,
        ]);
    }
    rep.set("min_lower", cfg.real("min_lower"));
    rep.set("min_conditional", cfg.real("min_conditional"));
    rep.claim(
        "damaging perturbations are not rare",
        "lipschitz_lower",
        Rel::Gt,
        "min_lower",
    );
    rep.claim(
        "generic noise cannot counteract the damage",
        "conditional_p",
        Rel::Gt,
        "min_conditional",
    );
    rep.tables.push(table(
        "events",
        &["event", "successes", "trials", "p", "lower", "upper"],
        rows,
    ));
    let mut probe_rep = stage(
        "report",
        ProbeReport::new(x.dist(&x.add(&s.tumor.z)), eta_tol, mc.epsilon),
    )?;
    probe_rep.seeds = vec![cfg.seed];
    probe_rep.config = vec![("experiment".into(), cfg.name.clone())];
    probe_rep.estimates = events.iter().map(|(n, e)| (n.to_string(), *e)).collect();
    stage("report", probe_rep.verify())?;
    Ok(Outcome::new(rep)
        .with_file("probe.txt", probe_rep.to_text().into_bytes())
        .with_file("network.bin", s.net.to_bytes())
        .with_file("tumor.txt", cvector_to_text(&s.tumor.z).into_bytes()))
}
