use super::layer::{Layer, Shape};
use super::network::Network;
use crate::error::{arg_err, Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::operators::MeasurementOperator;
use crate::rng;

/// Largest number of pairs accepted by [`interpolatory_network`].
pub const MAX_INTERPOLATION_PAIRS: usize = 64;

fn dense_rows(rows: &[Vec<f64>], inputs: usize, b: Vec<f64>) -> Layer {
    let mut w = Vec::with_capacity(rows.len() * inputs);
    for r in rows {
        w.extend_from_slice(r);
    }
    Layer::Dense {
        inputs,
        outputs: rows.len(),
        w,
        b,
    }
}

/// `W_1 = [1, -1]^T (x) I` and `W_2 = [1, -1] (x) I`, so that `W_2 rho(W_1 y) = y`.
pub fn identity_relu_gadget(dim: usize) -> Result<(Layer, Layer)> {
    if dim == 0 {
        return arg_err("gadget dimension must be positive");
    }
    let mut w1 = vec![0.0; 2 * dim * dim];
    let mut w2 = vec![0.0; 2 * dim * dim];
    for i in 0..dim {
        w1[i * dim + i] = 1.0;
        w1[(dim + i) * dim + i] = -1.0;
        w2[i * 2 * dim + i] = 1.0;
        w2[i * 2 * dim + dim + i] = -1.0;
    }
    Ok((
        Layer::Dense {
            inputs: dim,
            outputs: 2 * dim,
            w: w1,
            b: vec![0.0; 2 * dim],
        },
        Layer::Dense {
            inputs: 2 * dim,
            outputs: dim,
            w: w2,
            b: vec![0.0; dim],
        },
    ))
}

/// `M W_2 rho(I rho(... rho(W_1 y)))` with `depth` affine layers of the given width.
fn relu_chain(
    m: &[Vec<f64>],
    d: usize,
    depth: usize,
    width: usize,
    complex_output: bool,
) -> Result<Network> {
    if depth < 2 {
        return arg_err("depth must be at least 2");
    }
    if width < 2 * d {
        return arg_err(format!("width {width} is below the required {}", 2 * d));
    }
    let mut first = vec![vec![0.0; d]; width];
    for i in 0..d {
        first[i][i] = 1.0;
        first[d + i][i] = -1.0;
    }
    let mut layers = vec![dense_rows(&first, d, vec![0.0; width]), Layer::Relu];
    for _ in 0..depth - 2 {
        let eye: Vec<Vec<f64>> = (0..width)
            .map(|i| (0..width).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        layers.push(dense_rows(&eye, width, vec![0.0; width]));
        layers.push(Layer::Relu);
    }
    let last: Vec<Vec<f64>> = m
        .iter()
        .map(|row| {
            let mut r = vec![0.0; width];
            for j in 0..d {
                r[j] = row[j];
                r[d + j] = -row[j];
            }
            r
        })
        .collect();
    let outputs = last.len();
    layers.push(dense_rows(&last, width, vec![0.0; outputs]));
    Network::new(Shape::new(1, d), layers, complex_output)
}

/// ReLU network realising `y -> A^dagger y`; `width >= 4m` on stacked input.
pub fn pinv_decoder_network(
    a: &MeasurementOperator,
    depth: usize,
    width: usize,
) -> Result<Network> {
    let p = a.pinv_matrix()?;
    Ok(relu_chain(&p.realify(), 2 * a.m(), depth, width, true)?.with_label("pinv-decoder"))
}

/// `C = A^dagger P_{not i} + (1/y_i)(target - A^dagger P_{not i} y) e_i^T`, so that
/// `C y_hat = target` and `C y = A^dagger y` whenever `y_i = 0`.
pub fn corrected_matrix(
    a: &MeasurementOperator,
    i: usize,
    y_hat: &CVector,
    target: &CVector,
) -> Result<CMatrix> {
    let m = a.m();
    if i >= m || y_hat.len() != m || target.len() != a.n() {
        return arg_err("index or vector lengths do not match the operator");
    }
    if y_hat[i].norm() == 0.0 {
        return arg_err("the selected measurement of y_hat is zero");
    }
    let p = a.pinv_matrix()?;
    let mut y_rest = y_hat.clone();
    y_rest[i] = C64::new(0.0, 0.0);
    let base = p.matvec(&y_rest);
    let col = target.sub(&base).scale_c(C64::new(1.0, 0.0) / y_hat[i]);
    let mut c = p;
    for r in 0..c.rows {
        c.set(r, i, col[r]);
    }
    Ok(c)
}

/// ReLU network realising [`corrected_matrix`].
pub fn corrected_decoder_network(
    a: &MeasurementOperator,
    i: usize,
    y_hat: &CVector,
    target: &CVector,
    depth: usize,
    width: usize,
) -> Result<Network> {
    let c = corrected_matrix(a, i, y_hat, target)?;
    Ok(relu_chain(&c.realify(), 2 * a.m(), depth, width, true)?.with_label("corrected-decoder"))
}

/// One-hidden-layer ReLU network with `Psi(y_j) = x_j` for every pair.
///
/// Hidden units are ridges `rho(<w, y> - b_k)` along a direction `w` that
/// separates the projections `t_j`; with `b_1 = t_1 - 1` and `b_k = t_{k-1}`
/// the interpolation system is lower triangular.
pub fn interpolatory_network(pairs: &[(CVector, CVector)], seed: u64) -> Result<Network> {
    if pairs.is_empty() {
        return arg_err("at least one pair is required");
    }
    let (m, n) = (pairs[0].0.len(), pairs[0].1.len());
    if pairs.iter().any(|(y, x)| y.len() != m || x.len() != n) {
        return arg_err("pairs have inconsistent dimensions");
    }
    let mut uniq: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (y, x) in pairs {
        let (ys, xs) = (y.to_stacked(), x.to_stacked());
        match uniq.iter().find(|(u, _)| *u == ys) {
            Some((_, ux)) if *ux != xs => {
                return arg_err("coincident inputs with different targets")
            }
            Some(_) => {}
            None => uniq.push((ys, xs)),
        }
    }
    let k = uniq.len();
    if k > MAX_INTERPOLATION_PAIRS {
        return Err(Error::Capacity(format!(
            "{k} pairs exceed the limit of {MAX_INTERPOLATION_PAIRS}"
        )));
    }
    let d = 2 * m;
    let mut r = rng::seeded(seed);
    let scale = uniq
        .iter()
        .map(|(y, _)| y.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..32 {
        let w: Vec<f64> = rng::unit_direction(&mut r, m).to_stacked();
        let w = if w.iter().all(|v| *v == 0.0) {
            vec![1.0; d]
        } else {
            w
        };
        let mut t: Vec<f64> = uniq
            .iter()
            .map(|(y, _)| y.iter().zip(&w).map(|(a, b)| a * b).sum())
            .collect();
        t.sort_by(f64::total_cmp);
        let gap = t
            .windows(2)
            .map(|p| p[1] - p[0])
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, w));
        }
    }
    let (gap, w) = best.unwrap();
    if k > 1 && !(gap > 1e-10 * scale) {
        return arg_err("no direction separates the inputs");
    }
    let proj = |y: &[f64]| -> f64 { y.iter().zip(&w).map(|(a, b)| a * b).sum() };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| proj(&uniq[i].0).total_cmp(&proj(&uniq[j].0)));
    let t: Vec<f64> = order.iter().map(|&i| proj(&uniq[i].0)).collect();
    let b: Vec<f64> = (0..k)
        .map(|j| if j == 0 { t[0] - 1.0 } else { t[j - 1] })
        .collect();
    // rows j, columns q: rho(t_j - b_q), zero for q > j
    let mut coef: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let target = &uniq[order[j]].1;
        let mut c = target.clone();
        for (q, cq) in coef.iter().enumerate() {
            let h = (t[j] - b[q]).max(0.0);
            c.iter_mut().zip(cq).for_each(|(a, v)| *a -= h * v);
        }
        let diag = t[j] - b[j];
        c.iter_mut().for_each(|a| *a /= diag);
        coef.push(c);
    }
    let hidden = Layer::Dense {
        inputs: d,
        outputs: k,
        w: (0..k).flat_map(|_| w.iter().copied()).collect(),
        b: b.iter().map(|v| -v).collect(),
    };
    let rows: Vec<Vec<f64>> = (0..2 * n)
        .map(|o| coef.iter().map(|c| c[o]).collect())
        .collect();
    let out = dense_rows(&rows, k, vec![0.0; 2 * n]);
    Ok(
        Network::new(Shape::new(1, d), vec![hidden, Layer::Relu, out], true)?
            .with_label("interpolatory"),
    )
}

/// Minimiser of the empirical squared loss that interpolates the mean target
/// on each group of inputs lying within `tol` of each other.
pub fn least_squares_interpolant(
    pairs: &[(CVector, CVector)],
    tol: f64,
    seed: u64,
) -> Result<Network> {
    let mut groups: Vec<(CVector, Vec<&CVector>)> = Vec::new();
    for (y, x) in pairs {
        match groups.iter_mut().find(|(g, _)| g.dist(y) <= tol) {
            Some((_, xs)) => xs.push(x),
            None => groups.push((y.clone(), vec![x])),
        }
    }
    let merged: Vec<(CVector, CVector)> = groups
        .into_iter()
        .map(|(y, xs)| {
            let mut mean = CVector::zeros(xs[0].len());
            for x in &xs {
                mean = mean.add(x);
            }
            (y, mean.scale(1.0 / xs.len() as f64))
        })
        .collect();
    Ok(interpolatory_network(&merged, seed)?.with_label("least-squares-interpolant"))
}

/// Three-scale U-net with leaky ReLU and skip concatenations.
#[derive(Clone, Debug, PartialEq)]
pub struct UnetConfig {
    /// Signal length; divisible by 4.
    pub n: usize,
    pub base_channels: usize,
    pub kernel: usize,
    pub alpha: f64,
    /// Fixed map from the network input to the stacked 2-channel signal, if any.
    pub front: Option<Vec<Vec<f64>>>,
}

impl UnetConfig {
    pub fn new(n: usize, base_channels: usize) -> Self {
        UnetConfig {
            n,
            base_channels,
            kernel: 3,
            alpha: 0.2,
            front: None,
        }
    }

    /// Prepends the fixed real form of `A^*`, as in `f(y) = phi(A^* y)`.
    pub fn with_adjoint_front(mut self, a: &MeasurementOperator) -> Result<Self> {
        let adj = a.matrix()?.adjoint();
        self.front = Some(adj.realify());
        Ok(self)
    }
}

pub fn unet(cfg: &UnetConfig, seed: u64) -> Result<Network> {
    if !cfg.n.is_multiple_of(4) || cfg.n == 0 || cfg.base_channels == 0 {
        return arg_err("U-net needs a length divisible by 4 and at least one channel");
    }
    let c = cfg.base_channels;
    let conv = |i: usize, o: usize, k: usize| Layer::Conv1d {
        in_ch: i,
        out_ch: o,
        k,
        stride: 1,
        w: vec![0.0; i * o * k],
        b: vec![0.0; o],
    };
    let up = |i: usize, o: usize| Layer::TransposeConv1d {
        in_ch: i,
        out_ch: o,
        k: 2,
        w: vec![0.0; i * o * 2],
        b: vec![0.0; o],
    };
    let act = Layer::LeakyRelu(cfg.alpha);
    let k = cfg.kernel;
    let (input, mut layers) = match &cfg.front {
        Some(f) => {
            if f.len() != 2 * cfg.n {
                return arg_err("front map must output 2N values");
            }
            let inputs = f[0].len();
            let layer = Layer::Linear {
                inputs,
                outputs: 2 * cfg.n,
                w: f.iter().flatten().copied().collect(),
            };
            (Shape::new(1, inputs), vec![layer])
        }
        None => (Shape::new(1, 2 * cfg.n), Vec::new()),
    };
    layers.push(Layer::Reshape { channels: 2 });
    let block = |layers: &mut Vec<Layer>, i: usize, o: usize| {
        layers.push(conv(i, o, k));
        layers.push(act.clone());
        layers.push(conv(o, o, k));
        layers.push(act.clone());
    };
    block(&mut layers, 2, c);
    let skip1 = layers.len();
    layers.push(Layer::MaxPool2);
    block(&mut layers, c, 2 * c);
    let skip2 = layers.len();
    layers.push(Layer::MaxPool2);
    block(&mut layers, 2 * c, 4 * c);
    layers.push(up(4 * c, 2 * c));
    layers.push(Layer::SkipConcat { source: skip2 });
    block(&mut layers, 4 * c, 2 * c);
    layers.push(up(2 * c, c));
    layers.push(Layer::SkipConcat { source: skip1 });
    block(&mut layers, 2 * c, c);
    layers.push(conv(c, 1, 1));
    let mut net = Network::new(input, layers, false)?.with_label("unet");
    net.init_he(seed);
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instability::ReconstructionMap;
    use crate::operators::Transform;
    use rand::Rng;

    fn random_real(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::seeded(seed);
        (0..n).map(|_| r.random_range(-5.0..5.0)).collect()
    }

    fn op() -> MeasurementOperator {
        MeasurementOperator::unscaled(Transform::Fourier, 8, vec![0, 1, 3, 6]).unwrap()
    }

    #[test]
    fn gadget_is_exact() {
        let (l1, l2) = identity_relu_gadget(8).unwrap();
        let net = Network::new(Shape::new(1, 8), vec![l1, Layer::Relu, l2], false).unwrap();
        let y = random_real(8, 3);
        assert_eq!(net.forward(&y).unwrap(), y);
        let (l1, l2) = identity_relu_gadget(1).unwrap();
        let one = Network::new(Shape::new(1, 1), vec![l1, Layer::Relu, l2], false).unwrap();
        assert_eq!(one.forward(&[-3.0]).unwrap(), vec![-3.0]);
        assert!(identity_relu_gadget(0).is_err());
    }

    #[test]
    fn deep_gadget_chain_is_exact() {
        let eye: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        let net = relu_chain(&eye, 6, 5, 14, false).unwrap();
        let y = random_real(6, 9);
        assert_eq!(net.forward(&y).unwrap(), y);
    }

    #[test]
    fn pinv_decoder_matches_pseudoinverse() {
        let a = op();
        let net = pinv_decoder_network(&a, 3, 16).unwrap();
        let mut r = rng::seeded(4);
        for _ in 0..5 {
            let x = rng::gaussian_cvector(&mut r, 8, 1.0);
            let y = a.apply(&x).unwrap();
            let want = a.pinv_apply(&y).unwrap();
            assert!(net.eval(&y).unwrap().dist(&want) < 1e-10);
            let xp = a.project_cokernel(&x).unwrap();
            assert!(net.eval(&a.apply(&xp).unwrap()).unwrap().dist(&xp) < 1e-10);
        }
        assert!(pinv_decoder_network(&a, 3, 15).is_err());
        assert!(pinv_decoder_network(&a, 1, 16).is_err());
    }

    #[test]
    fn corrected_decoder_hits_target_and_keeps_the_rest() {
        let a = op();
        let mut r = rng::seeded(5);
        let y_hat = rng::gaussian_cvector(&mut r, 4, 1.0);
        let target = rng::gaussian_cvector(&mut r, 8, 1.0);
        let net = corrected_decoder_network(&a, 2, &y_hat, &target, 2, 16).unwrap();
        assert!(net.eval(&y_hat).unwrap().dist(&target) < 1e-10);
        let mut y = rng::gaussian_cvector(&mut r, 4, 1.0);
        y[2] = C64::new(0.0, 0.0);
        assert!(net.eval(&y).unwrap().dist(&a.pinv_apply(&y).unwrap()) < 1e-10);
        let mut zero = y_hat.clone();
        zero[2] = C64::new(0.0, 0.0);
        assert!(corrected_decoder_network(&a, 2, &zero, &target, 2, 16).is_err());
    }

    #[test]
    fn interpolation_is_exact() {
        let mut r = rng::seeded(6);
        for k in [1, 2, 16] {
            let pairs: Vec<(CVector, CVector)> = (0..k)
                .map(|_| {
                    (
                        rng::gaussian_cvector(&mut r, 8, 1.0),
                        rng::gaussian_cvector(&mut r, 8, 1.0),
                    )
                })
                .collect();
            let net = interpolatory_network(&pairs, 7).unwrap();
            let worst = pairs
                .iter()
                .map(|(y, x)| net.eval(y).unwrap().dist(x))
                .fold(0.0, f64::max);
            assert!(worst <= 1e-8, "k = {k}: {worst}");
        }
    }

    #[test]
    fn interpolation_rejects_conflicts_and_excess() {
        let y = CVector::from_real(&[1.0, 2.0]);
        let pairs = vec![
            (y.clone(), CVector::from_real(&[1.0])),
            (y.clone(), CVector::from_real(&[2.0])),
        ];
        assert!(matches!(
            interpolatory_network(&pairs, 1),
            Err(Error::Argument(_))
        ));
        let dup = vec![
            (y.clone(), CVector::from_real(&[1.0])),
            (y, CVector::from_real(&[1.0])),
        ];
        assert!(interpolatory_network(&dup, 1).is_ok());
        let mut r = rng::seeded(1);
        let many: Vec<(CVector, CVector)> = (0..65)
            .map(|_| {
                (
                    rng::gaussian_cvector(&mut r, 2, 1.0),
                    CVector::from_real(&[0.0]),
                )
            })
            .collect();
        assert!(matches!(
            interpolatory_network(&many, 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn conflicting_targets_are_averaged() {
        let y = CVector::from_real(&[1.0, 0.0]);
        let y2 = CVector::from_real(&[1.0, 1e-14]);
        let other = CVector::from_real(&[0.0, 1.0]);
        let pairs = vec![
            (y, CVector::from_real(&[1.0])),
            (y2.clone(), CVector::from_real(&[3.0])),
            (other.clone(), CVector::from_real(&[5.0])),
        ];
        let net = least_squares_interpolant(&pairs, 1e-10, 1).unwrap();
        assert!((net.eval(&y2).unwrap()[0].re - 2.0).abs() < 1e-9);
        assert!((net.eval(&other).unwrap()[0].re - 5.0).abs() < 1e-9);
    }

    #[test]
    fn unet_shapes() {
        let a = MeasurementOperator::unscaled(Transform::Fourier, 16, vec![0, 1, 2, 3, 9]).unwrap();
        let cfg = UnetConfig::new(16, 4).with_adjoint_front(&a).unwrap();
        let net = unet(&cfg, 1).unwrap();
        assert_eq!(net.input_size(), 10);
        assert_eq!(net.output_size(), 16);
        assert_eq!(net.output_dim(), 16);
        assert!(unet(&UnetConfig::new(18, 4), 1).is_err());
    }
}
