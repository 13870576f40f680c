//! Experiment implementations. Each returns a self-verifying report plus
//! any extra artifacts.

pub mod certify;
pub mod coherence;
pub mod constructive;
pub mod optimal;
pub mod probe;
pub mod recovery;
pub mod train;
pub mod transforms;
pub mod tumor;

use kawlab_core::operators::{
    draw_multilevel_scheme, fourier_budgets, walsh_budgets, BudgetParams, DrawMode, LevelStructure,
    MeasurementOperator, Transform,
};
use kawlab_core::optimal::DemoReport;
use kawlab_core::solver::SolverConfig;
use kawlab_core::{rng, CVector, C64};
use rand::seq::index::sample;

use crate::config::{ExperimentConfig, Sampling};
use crate::error::{stage, HarnessError, Result};

/// A report and extra named files.
#[derive(Debug)]
pub struct Outcome {
    pub report: DemoReport,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn new(report: DemoReport) -> Self {
        Outcome {
            report,
            files: Vec::new(),
        }
    }

    pub fn with_file(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.files.push((name.to_string(), bytes));
        self
    }
}

pub(crate) fn levels(cfg: &ExperimentConfig) -> Result<LevelStructure> {
    stage(
        "levels",
        LevelStructure::dyadic(cfg.operator.r, cfg.sparsities.clone()),
    )
}

pub(crate) fn budgets(cfg: &ExperimentConfig, levels: &LevelStructure) -> Result<Vec<usize>> {
    let p = BudgetParams {
        nu: cfg.operator.nu,
        c: cfg.operator.c,
    };
    stage(
        "budgets",
        match cfg.operator.kind {
            Transform::Fourier => fourier_budgets(levels, p),
            _ => walsh_budgets(levels, p),
        },
    )
}

/// Operator from the config; multilevel schemes are drawn with `seed`.
pub(crate) fn build_operator(cfg: &ExperimentConfig, seed: u64) -> Result<MeasurementOperator> {
    let op = &cfg.operator;
    let n = op.n();
    let a = match op.sampling {
        Sampling::Multilevel => {
            let lv = levels(cfg)?;
            let m = budgets(cfg, &lv)?;
            let sch = stage(
                "sampling",
                draw_multilevel_scheme(&m, &lv.bounds, seed, DrawMode::Dedup),
            )?;
            MeasurementOperator::from_scheme(op.kind, &sch)
        }
        Sampling::Lowpass => MeasurementOperator::unscaled(op.kind, n, (0..op.m).collect()),
        Sampling::Explicit => MeasurementOperator::unscaled(op.kind, n, op.omega.clone()),
    };
    stage("operator", a)
}

pub(crate) fn solver_config(cfg: &ExperimentConfig) -> SolverConfig {
    SolverConfig {
        max_iter: cfg.solver.max_iter,
        tol: cfg.solver.tol,
        ..SolverConfig::default()
    }
}

/// Haar coefficients with `s_l` standard normal entries at random positions of level `l`.
pub(crate) fn sparse_coefficients(
    levels: &LevelStructure,
    r: &mut rng::Rng,
    complex: bool,
) -> CVector {
    let mut c = CVector::zeros(levels.n);
    for (range, &s) in levels.ranges().iter().zip(&levels.sparsities) {
        for i in sample(r, range.len(), s).into_iter() {
            let re = rng::gaussian(r);
            let im = if complex { rng::gaussian(r) } else { 0.0 };
            c[range.start + i] = C64::new(re, im);
        }
    }
    c
}

pub(crate) fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

pub(crate) fn table(
    name: &str,
    header: &[&str],
    rows: Vec<Vec<f64>>,
) -> kawlab_core::optimal::Table {
    kawlab_core::optimal::Table {
        name: name.to_string(),
        header: header.iter().map(|h| h.to_string()).collect(),
        rows,
    }
}
