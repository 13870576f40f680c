use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{size_err, Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::operators::{MeasurementOperator, Sparsifier};
use crate::rng;
use crate::solver::{Model, Recovery, SolverConfig};

/// Distances on signal and measurement spaces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    L2,
    L1,
    LInf,
}

impl Metric {
    pub fn dist(&self, a: &CVector, b: &CVector) -> f64 {
        let d = a.sub(b);
        match self {
            Metric::L2 => d.norm(),
            Metric::L1 => d.norm1(),
            Metric::LInf => d.norm_inf(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::L2 => "l2",
            Metric::L1 => "l1",
            Metric::LInf => "linf",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "l2" => Some(Metric::L2),
            "l1" => Some(Metric::L1),
            "linf" => Some(Metric::LInf),
            _ => None,
        }
    }
}

/// A reconstruction map `C^m -> C^N`.
///
/// `vjp(y, w)` returns the gradient of `Re <w, R(y)>` with respect to the
/// real and imaginary parts of `y`, packed as a complex vector.
pub trait ReconstructionMap: Sync {
    fn name(&self) -> &str;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, y: &CVector) -> Result<CVector>;
    fn vjp(&self, _y: &CVector, _w: &CVector) -> Option<Result<CVector>> {
        None
    }
    fn has_gradient(&self) -> bool {
        false
    }
}

pub(crate) fn check_input(map: &dyn ReconstructionMap, y: &CVector) -> Result<()> {
    if y.len() != map.input_dim() {
        return size_err(format!(
            "{} expects {} inputs, got {}",
            map.name(),
            map.input_dim(),
            y.len()
        ));
    }
    Ok(())
}

/// `y -> M y`.
pub struct LinearMap {
    pub matrix: CMatrix,
    pub label: String,
}

impl LinearMap {
    pub fn new(matrix: CMatrix) -> Self {
        LinearMap {
            matrix,
            label: "linear".into(),
        }
    }
}

impl ReconstructionMap for LinearMap {
    fn name(&self) -> &str {
        &self.label
    }
    fn input_dim(&self) -> usize {
        self.matrix.cols
    }
    fn output_dim(&self) -> usize {
        self.matrix.rows
    }
    fn eval(&self, y: &CVector) -> Result<CVector> {
        check_input(self, y)?;
        Ok(self.matrix.matvec(y))
    }
    fn vjp(&self, y: &CVector, w: &CVector) -> Option<Result<CVector>> {
        Some(check_input(self, y).map(|_| self.matrix.matvec_adjoint(w)))
    }
    fn has_gradient(&self) -> bool {
        true
    }
}

/// Black-box map from a closure.
pub struct FnMap<F> {
    pub f: F,
    pub dims: (usize, usize),
    pub label: String,
}

impl<F: Fn(&CVector) -> Result<CVector> + Sync> ReconstructionMap for FnMap<F> {
    fn name(&self) -> &str {
        &self.label
    }
    fn input_dim(&self) -> usize {
        self.dims.0
    }
    fn output_dim(&self) -> usize {
        self.dims.1
    }
    fn eval(&self, y: &CVector) -> Result<CVector> {
        check_input(self, y)?;
        (self.f)(y)
    }
}

/// The weighted QCBP decoder with the noise level set to the distance from
/// `y` to a model set.
pub struct CsDecoder<'a> {
    pub a: &'a MeasurementOperator,
    pub h: &'a Sparsifier,
    pub weights: Vec<f64>,
    pub model: Model<'a>,
    pub config: SolverConfig,
}

impl ReconstructionMap for CsDecoder<'_> {
    fn name(&self) -> &str {
        "cs-decoder"
    }
    fn input_dim(&self) -> usize {
        self.a.m()
    }
    fn output_dim(&self) -> usize {
        self.a.n()
    }
    fn eval(&self, y: &CVector) -> Result<CVector> {
        check_input(self, y)?;
        let rec = Recovery::new(self.a, self.h, self.weights.clone())?;
        Ok(rec.cs_decoder(y, self.model, &self.config)?.x)
    }
}

/// A [`CsDecoder`] that returns the last iterate when the solver stalls and
/// counts how often it did.
pub struct BestEffortDecoder<'a> {
    pub inner: CsDecoder<'a>,
    fallbacks: AtomicUsize,
}

impl<'a> BestEffortDecoder<'a> {
    pub fn new(inner: CsDecoder<'a>) -> Self {
        BestEffortDecoder {
            inner,
            fallbacks: AtomicUsize::new(0),
        }
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }
}

impl ReconstructionMap for BestEffortDecoder<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }
    fn eval(&self, y: &CVector) -> Result<CVector> {
        match self.inner.eval(y) {
            Err(Error::Convergence { last, .. }) => {
                self.fallbacks.fetch_add(1, Ordering::Relaxed);
                Ok(*last)
            }
            other => other,
        }
    }
}

/// Largest relative error between `vjp` and central differences of
/// `Re <w, R(y)>` along random directions.
pub fn check_vjp(
    map: &dyn ReconstructionMap,
    y: &CVector,
    probes: usize,
    step: f64,
    seed: u64,
) -> Result<f64> {
    let mut r = rng::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let w = rng::gaussian_cvector(&mut r, map.output_dim(), 1.0);
        let d = rng::unit_direction(&mut r, map.input_dim());
        let g = match map.vjp(y, &w) {
            Some(g) => g?,
            None => return crate::error::arg_err(format!("{} has no gradient", map.name())),
        };
        let analytic: f64 = g
            .iter()
            .zip(d.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        let f = |t: f64| -> Result<f64> {
            let mut yt = y.clone();
            yt.axpy(crate::linalg::C64::new(t, 0.0), &d);
            let out = map.eval(&yt)?;
            Ok(w.dot(&out).re)
        };
        let numeric = (f(step)? - f(-step)?) / (2.0 * step);
        let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}
