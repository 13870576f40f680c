use std::io::BufReader;
use std::path::Path;

use kawlab_core::instability::Metric;
use kawlab_core::io::read_cvectors_text;
use kawlab_core::operators::{BudgetParams, MeasurementOperator};
use kawlab_core::optimal::{
    demo_not_optimal, destabilize_demo, dl_vs_cs_demo, fibers, lambda_sensitivity_demo,
    optimality_constant, Codomain, DemoReport, DestabilizeConfig, DlVsCsConfig, FiniteDomain,
    LambdaConfig, Rel,
};
use kawlab_core::{rng, CVector};

use super::{build_operator, levels, table, usage, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, HarnessError, Result};

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: Path::new(path).to_path_buf(),
        source,
    })
}

/// `{x, x + z, w_1, w_2}` with `z` in the kernel and `||z|| = 1/2`, so the
/// kernel pair shares a fiber of radius 1/4 (ambient) or 1/2 (restricted).
fn kernel_pair_domain(a: &MeasurementOperator, seed: u64) -> Result<(Vec<CVector>, f64)> {
    let n = a.n();
    let mut r = rng::seeded(seed);
    let z = stage(
        "domain",
        a.project_kernel(&rng::gaussian_cvector(&mut r, n, 1.0)),
    )?;
    if z.norm() < 1e-8 {
        return Err(usage(
            "the operator has a trivial kernel; supply a domain file",
        ));
    }
    let z = z.scale(0.5 / z.norm());
    let x = stage(
        "domain",
        a.project_cokernel(&rng::gaussian_cvector(&mut r, n, 1.0)),
    )?;
    let x = x.scale(0.5 / x.norm());
    let mut els = vec![x.clone(), x.add(&z)];
    for _ in 0..2 {
        els.push(rng::gaussian_cvector(&mut r, n, 1.0));
    }
    Ok((els, z.norm()))
}

pub fn optimal_map(cfg: &ExperimentConfig) -> Result<Outcome> {
    let codomain = Codomain::parse(cfg.param("mode")).ok_or_else(|| {
        usage(format!(
            "unknown mode {:?}; use ambient or restricted",
            cfg.param("mode")
        ))
    })?;
    let a = match cfg.param("operator") {
        "" => build_operator(cfg, cfg.seed)?,
        path => stage(
            "operator",
            MeasurementOperator::from_text(&read_file(path)?),
        )?,
    };
    let (elements, kernel_gap) = match cfg.param("domain") {
        "" => {
            let (els, g) = kernel_pair_domain(&a, cfg.seed)?;
            (els, Some(g))
        }
        path => {
            let text = read_file(path)?;
            (
                stage(
                    "domain",
                    read_cvectors_text(BufReader::new(text.as_bytes())),
                )?,
                None,
            )
        }
    };
    let domain = stage("domain", FiniteDomain::new(elements, Metric::L2))?;
    let tau = cfg.real("tau");
    let opt = stage("optimality", optimality_constant(&a, &domain, codomain))?;
    let part = stage("fibers", fibers(&a, &domain, tau))?;
    let mut rep = DemoReport::new("optimal-map");
    rep.set("zero", 0.0);
    rep.set("domain_size", domain.len() as f64);
    rep.set("fibers", opt.partition.groups.len() as f64);
    rep.set("fibers_at_tau", part.groups.len() as f64);
    rep.set("c_opt", opt.c_opt);
    rep.set(
        "witness_sup_error",
        stage("optimality", opt.sup_error(&a, &domain))?,
    );
    rep.claim("c_opt is non-negative", "c_opt", Rel::Ge, "zero");
    rep.claim(
        "the witness map attains c_opt",
        "witness_sup_error",
        Rel::Near(1e-9),
        "c_opt",
    );
    if let Some(g) = kernel_gap {
        let predicted = match codomain {
            Codomain::Ambient => g / 2.0,
            Codomain::Restricted => g,
        };
        rep.set("predicted", predicted);
        rep.claim(
            "c_opt matches the kernel-pair value",
            "c_opt",
            Rel::Near(1e-9),
            "predicted",
        );
    }
    let rows = opt
        .partition
        .groups
        .iter()
        .zip(&opt.radii)
        .enumerate()
        .map(|(i, (g, &rad))| vec![i as f64, g.len() as f64, rad])
        .collect();
    rep.tables
        .push(table("fibers", &["fiber", "size", "radius"], rows));
    let mut witness = String::new();
    for out in &opt.outputs {
        witness.push_str(&kawlab_core::io::cvector_to_text(out));
    }
    Ok(Outcome::new(rep)
        .with_file("operator.txt", a.to_text().into_bytes())
        .with_file("witness.txt", witness.into_bytes()))
}

pub fn not_optimal(cfg: &ExperimentConfig) -> Result<Outcome> {
    let a = build_operator(cfg, cfg.seed)?;
    let rep = stage(
        "not-optimal",
        demo_not_optimal(&a, cfg.int("k"), cfg.real("delta"), cfg.seed),
    )?;
    Ok(Outcome::new(rep).with_file("operator.txt", a.to_text().into_bytes()))
}

pub fn lambda(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut lc = LambdaConfig::new(cfg.operator.kind, cfg.operator.n(), cfg.int("k"), cfg.seed);
    lc.sweep = cfg.reals("sweep");
    lc.sweep_epochs = cfg.int("sweep_epochs");
    Ok(Outcome::new(stage("lambda", lambda_sensitivity_demo(&lc))?))
}

fn budget(cfg: &ExperimentConfig) -> BudgetParams {
    BudgetParams {
        nu: cfg.operator.nu,
        c: cfg.operator.c,
    }
}

pub fn dl_vs_cs(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = cfg.int("k");
    if k == 0 {
        return Err(usage("k is 1-based"));
    }
    let dc = DlVsCsConfig {
        levels: levels(cfg)?,
        k: k - 1,
        p: cfg.real("p"),
        budget: budget(cfg),
        domain_size: cfg.int("domain_size"),
        seed: cfg.seed,
        retries: cfg.int("retries"),
        lipschitz_trials: cfg.int("lipschitz_trials"),
        epochs: cfg.train.epochs,
    };
    Ok(Outcome::new(stage("dl-vs-cs", dl_vs_cs_demo(&dc))?))
}

pub fn destabilize(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dc = DestabilizeConfig {
        levels: levels(cfg)?,
        budget: budget(cfg),
        k: cfg.int("k"),
        gamma: cfg.real("gamma"),
        seed: cfg.seed,
        epochs: cfg.train.epochs,
        lipschitz_trials: cfg.int("lipschitz_trials"),
    };
    Ok(Outcome::new(stage("destabilize", destabilize_demo(&dc))?))
}
