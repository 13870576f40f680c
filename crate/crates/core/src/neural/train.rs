use rand::seq::SliceRandom;

use super::layer::Layer;
use super::network::{Gradients, Network, Sample};
use crate::error::{arg_err, size_err, Error, Result};
use crate::instability::{check_input, ReconstructionMap};
use crate::linalg::{solve_real, CVector};
use crate::operators::MeasurementOperator;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Adam {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub adam: Adam,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Stop once the maximum training error drops to this value.
    pub target_error: Option<f64>,
    /// Epochs between early-stopping checks.
    pub check_every: usize,
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize, seed: u64) -> Self {
        TrainConfig {
            adam: Adam::default(),
            epochs,
            batch_size,
            seed,
            target_error: None,
            check_every: 10,
        }
    }

    pub fn with_lr(mut self, lr: f64) -> Self {
        self.adam.lr = lr;
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target_error = Some(target);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.adam.lr > 0.0) || !self.adam.lr.is_finite() {
            return arg_err("learning rate must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 || self.check_every == 0 {
            return arg_err("epochs, batch size and check interval must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    /// Mean objective per epoch.
    pub loss_curve: Vec<f64>,
    /// `max_j ||x_j - Psi(y_j)||` after training.
    pub final_error: f64,
    pub epochs_run: usize,
}

/// Penalty `J` of the regularised objective.
pub enum Regularizer<'a> {
    /// Sum of squared weight norms (biases excluded).
    WeightNorm,
    /// Value and parameter gradients of a user penalty.
    Custom(&'a dyn Fn(&Network) -> (f64, Gradients)),
}

impl Regularizer<'_> {
    pub fn evaluate(&self, net: &Network) -> (f64, Gradients) {
        match self {
            Regularizer::WeightNorm => {
                let mut g = net.zero_gradients();
                let mut v = 0.0;
                for (l, (gw, _)) in net.layers().iter().zip(g.iter_mut()) {
                    if let Some((w, _)) = l.params() {
                        v += w.iter().map(|x| x * x).sum::<f64>();
                        gw.iter_mut().zip(w).for_each(|(a, b)| *a = 2.0 * b);
                    }
                }
                (v, g)
            }
            Regularizer::Custom(f) => f(net),
        }
    }
}

struct AdamState {
    m: Gradients,
    v: Gradients,
    t: i32,
}

impl AdamState {
    fn step(&mut self, net: &mut Network, g: &Gradients, p: &Adam) {
        self.t += 1;
        let c1 = 1.0 - p.beta1.powi(self.t);
        let c2 = 1.0 - p.beta2.powi(self.t);
        let layers = net.layers().len();
        for i in 0..layers {
            let Some((w, b)) = net.layer_mut(i) else {
                continue;
            };
            let (mw, mb) = &mut self.m[i];
            let (vw, vb) = &mut self.v[i];
            for (param, grad, m, v) in [(w, &g[i].0, mw, vw), (b, &g[i].1, mb, vb)] {
                for j in 0..param.len() {
                    m[j] = p.beta1 * m[j] + (1.0 - p.beta1) * grad[j];
                    v[j] = p.beta2 * v[j] + (1.0 - p.beta2) * grad[j] * grad[j];
                    param[j] -= p.lr * (m[j] / c1) / ((v[j] / c2).sqrt() + p.eps);
                }
            }
        }
    }
}

fn check_data(net: &Network, data: &[Sample]) -> Result<()> {
    if data.is_empty() {
        return arg_err("training set is empty");
    }
    for s in data {
        if s.input.len() != net.input_size() || s.target.len() != net.output_size() {
            return size_err("training pair does not match the network dimensions");
        }
    }
    Ok(())
}

/// Minimises `(1/K) sum ½ ||x_j - Psi(y_j)||²` with Adam on shuffled mini-batches.
pub fn train(net: &mut Network, data: &[Sample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_regularized(net, data, 0.0, &Regularizer::WeightNorm, cfg)
}

/// As [`train`] with the objective augmented by `lambda J(Psi)`.
pub fn train_regularized(
    net: &mut Network,
    data: &[Sample],
    lambda: f64,
    j: &Regularizer,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_data(net, data)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return arg_err("lambda must be non-negative");
    }
    let mut state = AdamState {
        m: net.zero_gradients(),
        v: net.zero_gradients(),
        t: 0,
    };
    let mut r = rng::seeded(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut epochs_run = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut r);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &data[i]).collect();
            let (mut loss, mut g) = net.loss_and_gradients(&batch)?;
            if lambda != 0.0 {
                let (pv, pg) = j.evaluate(net);
                loss += lambda * pv;
                for ((gw, gb), (pw, pb)) in g.iter_mut().zip(&pg) {
                    gw.iter_mut().zip(pw).for_each(|(a, b)| *a += lambda * b);
                    gb.iter_mut().zip(pb).for_each(|(a, b)| *a += lambda * b);
                }
            }
            if !loss.is_finite() {
                return Err(Error::Training { epoch });
            }
            total += loss;
            batches += 1;
            state.step(net, &g, &cfg.adam);
        }
        curve.push(total / batches as f64);
        epochs_run = epoch + 1;
        if let Some(target) = cfg.target_error {
            if epochs_run % cfg.check_every == 0 && net.max_error(data)? <= target {
                break;
            }
        }
    }
    let final_error = net.max_error(data)?;
    if !final_error.is_finite() {
        return Err(Error::Training { epoch: epochs_run });
    }
    Ok(TrainOutcome {
        loss_curve: curve,
        final_error,
        epochs_run,
    })
}

/// Places `y` at the sampled rows of a zero vector of length `N`.
pub fn zero_fill(a: &MeasurementOperator, y: &CVector) -> Result<CVector> {
    let omega = a
        .omega()
        .ok_or_else(|| Error::Argument("zero filling needs a structured operator".into()))?;
    if y.len() != omega.len() {
        return size_err("measurement length does not match the operator");
    }
    let mut full = CVector::zeros(a.n());
    for (&i, &v) in omega.iter().zip(y.iter()) {
        full[i] = v;
    }
    Ok(full)
}

/// Training pairs `(zero_fill(A_i x_j), x_j)` over all images and masks.
pub fn multi_mask_samples(
    images: &[CVector],
    masks: &[MeasurementOperator],
    complex_target: bool,
) -> Result<Vec<Sample>> {
    if masks.is_empty() {
        return arg_err("at least one mask is required");
    }
    let mut out = Vec::with_capacity(images.len() * masks.len());
    for x in images {
        for a in masks {
            let y = zero_fill(a, &a.apply(x)?)?;
            out.push(Sample::from_complex(&y, x, complex_target));
        }
    }
    Ok(out)
}

/// Trains on zero-filled measurements from every `(image, mask)` pair.
pub fn train_multi_mask(
    net: &mut Network,
    images: &[CVector],
    masks: &[MeasurementOperator],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let data = multi_mask_samples(images, masks, net.complex_output)?;
    train(net, &data, cfg)
}

/// A zero-filled-input network viewed as a map on the measurements of one mask.
pub struct MaskedNetwork<'a> {
    pub net: &'a Network,
    pub op: &'a MeasurementOperator,
}

impl ReconstructionMap for MaskedNetwork<'_> {
    fn name(&self) -> &str {
        &self.net.label
    }
    fn input_dim(&self) -> usize {
        self.op.m()
    }
    fn output_dim(&self) -> usize {
        self.net.output_dim()
    }
    fn eval(&self, y: &CVector) -> Result<CVector> {
        check_input(self, y)?;
        self.net.eval(&zero_fill(self.op, y)?)
    }
    fn vjp(&self, y: &CVector, w: &CVector) -> Option<Result<CVector>> {
        let full = match zero_fill(self.op, y) {
            Ok(f) => f,
            Err(e) => return Some(Err(e)),
        };
        let omega = self.op.omega()?;
        Some(
            self.net
                .vjp(&full, w)?
                .map(|g| omega.iter().map(|&i| g[i]).collect()),
        )
    }
    fn has_gradient(&self) -> bool {
        true
    }
}

/// Refits the final dense layer by ridge least squares on the training set,
/// keeping every earlier layer fixed. Returns the new maximum training error.
pub fn refit_output_layer(net: &mut Network, data: &[Sample], ridge: f64) -> Result<f64> {
    check_data(net, data)?;
    if !(ridge >= 0.0) {
        return arg_err("ridge must be non-negative");
    }
    let last = net.layers().len() - 1;
    let Layer::Dense {
        inputs, outputs, ..
    } = net.layers()[last]
    else {
        return arg_err("the final layer is not dense");
    };
    let k = data.len();
    let feats: Vec<Vec<f64>> = data
        .iter()
        .map(|s| {
            let mut h = net.activations(&s.input).map(|a| a[last].clone())?;
            h.push(1.0);
            Ok(h)
        })
        .collect::<Result<_>>()?;
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = feats[i]
                .iter()
                .zip(&feats[j])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        gram[i][i] += ridge;
    }
    let mut w = vec![0.0; inputs * outputs];
    let mut b = vec![0.0; outputs];
    for o in 0..outputs {
        let rhs: Vec<f64> = data.iter().map(|s| s.target[o]).collect();
        let alpha = solve_real(&gram, &rhs)?;
        for (f, a) in feats.iter().zip(&alpha) {
            for q in 0..inputs {
                w[o * inputs + q] += a * f[q];
            }
            b[o] += a * f[inputs];
        }
    }
    let (pw, pb) = net.layer_mut(last).unwrap();
    *pw = w;
    *pb = b;
    net.max_error(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::network::mlp;
    use crate::operators::Transform;

    fn toy_data() -> Vec<Sample> {
        let mut r = rng::seeded(3);
        (0..6)
            .map(|_| Sample {
                input: (0..4).map(|_| rng::gaussian(&mut r)).collect(),
                target: (0..3).map(|_| rng::gaussian(&mut r)).collect(),
            })
            .collect()
    }

    #[test]
    fn seeded_training_is_bit_identical() {
        let data = toy_data();
        let cfg = TrainConfig::new(30, 4, 9);
        let mut a = mlp(&[4, 16, 3], false, 1).unwrap();
        let mut b = a.clone();
        let oa = train(&mut a, &data, &cfg).unwrap();
        let ob = train(&mut b, &data, &cfg).unwrap();
        assert_eq!(oa, ob);
        assert_eq!(a, b);
        assert!(oa.loss_curve.last() < oa.loss_curve.first());
    }

    #[test]
    fn zero_lambda_matches_plain_training() {
        let data = toy_data();
        let cfg = TrainConfig::new(20, 2, 4);
        let mut a = mlp(&[4, 8, 3], false, 2).unwrap();
        let mut b = a.clone();
        train(&mut a, &data, &cfg).unwrap();
        train_regularized(&mut b, &data, 0.0, &Regularizer::WeightNorm, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn heavy_penalty_drives_weights_to_zero() {
        let data = toy_data();
        let cfg = TrainConfig::new(400, 6, 4).with_lr(1e-2);
        let mut net = mlp(&[4, 8, 3], false, 2).unwrap();
        train_regularized(&mut net, &data, 1e3, &Regularizer::WeightNorm, &cfg).unwrap();
        let wmax = net
            .layers()
            .iter()
            .filter_map(|l| l.params())
            .flat_map(|(w, _)| w.iter())
            .fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(wmax < 1e-2, "{wmax}");
    }

    #[test]
    fn divergence_reports_the_epoch() {
        let mut data = toy_data();
        data[0].target[0] = f64::NAN;
        let mut net = mlp(&[4, 8, 3], false, 2).unwrap();
        let err = train(&mut net, &data, &TrainConfig::new(5, 2, 1)).unwrap_err();
        assert!(matches!(err, Error::Training { epoch: 0 }));
    }

    #[test]
    fn empty_set_and_bad_config_are_rejected() {
        let mut net = mlp(&[4, 3], false, 2).unwrap();
        assert!(train(&mut net, &[], &TrainConfig::new(5, 2, 1)).is_err());
        assert!(train(&mut net, &toy_data(), &TrainConfig::new(0, 2, 1)).is_err());
        assert!(train(
            &mut net,
            &toy_data(),
            &TrainConfig::new(3, 2, 1).with_lr(0.0)
        )
        .is_err());
    }

    #[test]
    fn singleton_is_interpolated() {
        let data = vec![toy_data().remove(0)];
        let mut net = mlp(&[4, 32, 3], false, 5).unwrap();
        let out = train(
            &mut net,
            &data,
            &TrainConfig::new(5000, 1, 1).with_lr(1e-2).with_target(1e-3),
        )
        .unwrap();
        assert!(out.final_error <= 1e-3, "{}", out.final_error);
    }

    #[test]
    fn single_mask_matches_zero_filled_training() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 8, vec![0, 1, 2, 5]).unwrap();
        let mut r = rng::seeded(1);
        let images: Vec<CVector> = (0..4)
            .map(|_| rng::gaussian_real_cvector(&mut r, 8, 1.0))
            .collect();
        let cfg = TrainConfig::new(10, 2, 3);
        let mut n1 = mlp(&[16, 12, 8], false, 1).unwrap();
        let mut n2 = n1.clone();
        let o1 = train_multi_mask(&mut n1, &images, std::slice::from_ref(&a), &cfg).unwrap();
        let data: Vec<Sample> = images
            .iter()
            .map(|x| Sample::from_complex(&zero_fill(&a, &a.apply(x).unwrap()).unwrap(), x, false))
            .collect();
        let o2 = train(&mut n2, &data, &cfg).unwrap();
        assert_eq!(o1, o2);
        let masked = MaskedNetwork { net: &n1, op: &a };
        let err = crate::instability::check_vjp(&masked, &a.apply(&images[0]).unwrap(), 4, 1e-6, 2)
            .unwrap();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn refit_interpolates_with_wide_features() {
        let data = toy_data();
        let mut net = mlp(&[4, 32, 3], false, 5).unwrap();
        let e = refit_output_layer(&mut net, &data, 1e-12).unwrap();
        assert!(e < 1e-8, "{e}");
    }
}
