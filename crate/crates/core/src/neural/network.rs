use rand::Rng;

use super::layer::{Aux, Layer, Shape};
use crate::error::{size_err, Error, Result};
use crate::instability::ReconstructionMap;
use crate::linalg::CVector;
use crate::rng;

/// Parameter gradients, one `(weights, biases)` pair per layer.
pub type Gradients = Vec<(Vec<f64>, Vec<f64>)>;

/// Training pair on real (stacked) coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Sample {
    /// Stacks `y`; the target is stacked when `complex_target`, else its real part.
    pub fn from_complex(y: &CVector, x: &CVector, complex_target: bool) -> Sample {
        let target = if complex_target {
            x.to_stacked()
        } else {
            x.iter().map(|z| z.re).collect()
        };
        Sample {
            input: y.to_stacked(),
            target,
        }
    }
}

/// Feedforward network on real vectors with an optional complex reading of the output.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    input: Shape,
    layers: Vec<Layer>,
    shapes: Vec<Shape>,
    /// Output is read as stacked real/imaginary parts.
    pub complex_output: bool,
    pub label: String,
}

pub(crate) struct Tape {
    pub acts: Vec<Vec<f64>>,
    aux: Vec<Aux>,
}

impl Network {
    pub fn new(input: Shape, layers: Vec<Layer>, complex_output: bool) -> Result<Network> {
        let mut shapes = vec![input];
        for l in &layers {
            let s = l.output_shape(*shapes.last().unwrap(), &shapes)?;
            shapes.push(s);
        }
        let out = shapes.last().unwrap().size();
        if complex_output && out % 2 != 0 {
            return size_err("complex output needs an even number of units");
        }
        Ok(Network {
            input,
            layers,
            shapes,
            complex_output,
            label: "network".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Network {
        self.label = label.into();
        self
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Mutable access to parameters; the architecture cannot change.
    pub fn params_mut(&mut self) -> impl Iterator<Item = (&mut Vec<f64>, &mut Vec<f64>)> {
        self.layers.iter_mut().filter_map(|l| l.params_mut())
    }

    pub fn layer_mut(&mut self, i: usize) -> Option<(&mut Vec<f64>, &mut Vec<f64>)> {
        self.layers.get_mut(i).and_then(|l| l.params_mut())
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn input_size(&self) -> usize {
        self.input.size()
    }

    pub fn output_size(&self) -> usize {
        self.shapes.last().unwrap().size()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.parameter_count()).sum()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return size_err(format!(
                "{} expects {} inputs, got {}",
                self.label,
                self.input_size(),
                x.len()
            ));
        }
        Ok(())
    }

    pub(crate) fn tape(&self, x: &[f64]) -> Result<Tape> {
        self.check(x)?;
        let mut acts = vec![x.to_vec()];
        let mut aux = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let (y, a) = l.forward(&acts[i], self.shapes[i], &acts, self.shapes[i + 1]);
            acts.push(y);
            aux.push(a);
        }
        Ok(Tape { acts, aux })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.tape(x)?.acts.pop().unwrap())
    }

    /// Activations after every layer, starting with the input.
    pub fn activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.tape(x)?.acts)
    }

    pub fn zero_gradients(&self) -> Gradients {
        self.layers
            .iter()
            .map(|l| match l.params() {
                Some((w, b)) => (vec![0.0; w.len()], vec![0.0; b.len()]),
                None => (Vec::new(), Vec::new()),
            })
            .collect()
    }

    /// Backpropagates `gout`; accumulates parameter gradients and returns the input gradient.
    pub(crate) fn backward(&self, tape: &Tape, gout: &[f64], grads: &mut Gradients) -> Vec<f64> {
        let n = self.layers.len();
        let mut gacts: Vec<Vec<f64>> = tape.acts.iter().map(|a| vec![0.0; a.len()]).collect();
        gacts[n].copy_from_slice(gout);
        for i in (0..n).rev() {
            let gy = std::mem::take(&mut gacts[i + 1]);
            let (gw, gb) = &mut grads[i];
            let gx = self.layers[i].backward(
                &tape.acts[i],
                self.shapes[i],
                &tape.aux[i],
                &gy,
                self.shapes[i + 1],
                gw,
                gb,
                &mut gacts,
            );
            for (a, g) in gacts[i].iter_mut().zip(&gx) {
                *a += g;
            }
        }
        std::mem::take(&mut gacts[0])
    }

    /// Gradient of `<gout, f(x)>` with respect to `x`.
    pub fn input_gradient(&self, x: &[f64], gout: &[f64]) -> Result<Vec<f64>> {
        if gout.len() != self.output_size() {
            return size_err("output gradient has the wrong size");
        }
        let tape = self.tape(x)?;
        let mut g = self.zero_gradients();
        Ok(self.backward(&tape, gout, &mut g))
    }

    /// `(1/B) sum ½ ||target - f(input)||²` and its parameter gradients.
    pub fn loss_and_gradients(&self, batch: &[&Sample]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        let mut grads = self.zero_gradients();
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for s in batch {
            if s.target.len() != self.output_size() {
                return size_err(format!(
                    "target has {} entries, network outputs {}",
                    s.target.len(),
                    self.output_size()
                ));
            }
            let tape = self.tape(&s.input)?;
            let out = tape.acts.last().unwrap();
            let r: Vec<f64> = out.iter().zip(&s.target).map(|(o, t)| o - t).collect();
            loss += 0.5 * scale * r.iter().map(|v| v * v).sum::<f64>();
            let g: Vec<f64> = r.iter().map(|v| v * scale).collect();
            self.backward(&tape, &g, &mut grads);
        }
        Ok((loss, grads))
    }

    pub fn loss(&self, data: &[Sample]) -> Result<f64> {
        let mut l = 0.0;
        for s in data {
            let out = self.forward(&s.input)?;
            l += 0.5
                * out
                    .iter()
                    .zip(&s.target)
                    .map(|(o, t)| (o - t) * (o - t))
                    .sum::<f64>();
        }
        Ok(l / data.len().max(1) as f64)
    }

    /// `max_j ||target_j - f(input_j)||`.
    pub fn max_error(&self, data: &[Sample]) -> Result<f64> {
        let mut worst = 0.0f64;
        for s in data {
            let out = self.forward(&s.input)?;
            let e = out
                .iter()
                .zip(&s.target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(e);
        }
        Ok(worst)
    }

    /// He-uniform weights and zero biases.
    pub fn init_he(&mut self, seed: u64) {
        let mut r = rng::seeded(seed);
        for l in &mut self.layers {
            let fan_in: usize = match &*l {
                Layer::Dense { inputs, .. } => *inputs,
                Layer::Conv1d { in_ch, k, .. } => in_ch * k,
                Layer::TransposeConv1d { in_ch, k, .. } => (in_ch * k / 2).max(1),
                _ => continue,
            };
            let bound = (6.0f64 / fan_in as f64).sqrt();
            if let Some((w, b)) = l.params_mut() {
                w.iter_mut()
                    .for_each(|v| *v = r.random_range(-bound..bound));
                b.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: input {}x{}, {} parameters, {} output\n",
            self.label,
            self.input.channels,
            self.input.len,
            self.parameter_count(),
            if self.complex_output {
                "complex"
            } else {
                "real"
            }
        );
        for (i, l) in self.layers.iter().enumerate() {
            let sh = self.shapes[i + 1];
            s.push_str(&format!(
                "{i:3} {:<17} -> {}x{}",
                l.name(),
                sh.channels,
                sh.len
            ));
            match l {
                Layer::Dense { .. } | Layer::Conv1d { .. } | Layer::TransposeConv1d { .. } => {
                    s.push_str(&format!("  ({} parameters)", l.parameter_count()))
                }
                Layer::LeakyRelu(a) => s.push_str(&format!("  (alpha {a})")),
                Layer::SkipConcat { source } => {
                    s.push_str(&format!("  (from activation {source})"))
                }
                _ => {}
            }
            s.push('\n');
        }
        s
    }
}

/// Dense ReLU network with the given layer widths; no activation after the last layer.
pub fn mlp(widths: &[usize], complex_output: bool, seed: u64) -> Result<Network> {
    if widths.len() < 2 {
        return Err(Error::Argument(
            "an mlp needs at least input and output widths".into(),
        ));
    }
    let mut layers = Vec::new();
    for (i, w) in widths.windows(2).enumerate() {
        layers.push(Layer::Dense {
            inputs: w[0],
            outputs: w[1],
            w: vec![0.0; w[0] * w[1]],
            b: vec![0.0; w[1]],
        });
        if i + 2 < widths.len() {
            layers.push(Layer::Relu);
        }
    }
    let mut net = Network::new(Shape::new(1, widths[0]), layers, complex_output)?.with_label("mlp");
    net.init_he(seed);
    Ok(net)
}

impl ReconstructionMap for Network {
    fn name(&self) -> &str {
        &self.label
    }

    fn input_dim(&self) -> usize {
        self.input_size() / 2
    }

    fn output_dim(&self) -> usize {
        if self.complex_output {
            self.output_size() / 2
        } else {
            self.output_size()
        }
    }

    fn eval(&self, y: &CVector) -> Result<CVector> {
        crate::instability::check_input(self, y)?;
        let out = self.forward(&y.to_stacked())?;
        Ok(if self.complex_output {
            CVector::from_stacked(&out)
        } else {
            CVector::from_real(&out)
        })
    }

    fn vjp(&self, y: &CVector, w: &CVector) -> Option<Result<CVector>> {
        let g = if self.complex_output {
            w.to_stacked()
        } else {
            w.iter().map(|z| z.re).collect()
        };
        Some(
            self.input_gradient(&y.to_stacked(), &g)
                .map(|gi| CVector::from_stacked(&gi)),
        )
    }

    fn has_gradient(&self) -> bool {
        true
    }
}

const MAGIC: &[u8; 7] = b"KAWNET1";

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn tensor(&mut self, v: &[f64]) {
        self.0.extend_from_slice(&(v.len() as u64).to_le_bytes());
        v.iter().for_each(|&x| self.f64(x));
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            line: 0,
            msg: format!("byte {}: {msg}", self.pos),
        })
    }
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.buf.len() {
            return self.err("unexpected end of data");
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn tensor(&mut self, expected: usize) -> Result<Vec<f64>> {
        let n = u64::from_le_bytes(self.take(8)?.try_into().unwrap()) as usize;
        if n != expected {
            return self.err(&format!("tensor has {n} entries, expected {expected}"));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()?;
        let b = self.take(n)?.to_vec();
        String::from_utf8(b).or_else(|_| self.err("label is not utf-8"))
    }
}

impl Network {
    /// Little-endian binary form starting with `KAWNET1`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(MAGIC.to_vec());
        w.str(&self.label);
        w.u32(self.input.channels);
        w.u32(self.input.len);
        w.u8(self.complex_output as u8);
        w.u32(self.layers.len());
        for l in &self.layers {
            match l {
                Layer::Dense {
                    inputs,
                    outputs,
                    w: wt,
                    b,
                } => {
                    w.u8(1);
                    w.u32(*inputs);
                    w.u32(*outputs);
                    w.tensor(wt);
                    w.tensor(b);
                }
                Layer::Conv1d {
                    in_ch,
                    out_ch,
                    k,
                    stride,
                    w: wt,
                    b,
                } => {
                    w.u8(2);
                    w.u32(*in_ch);
                    w.u32(*out_ch);
                    w.u32(*k);
                    w.u32(*stride);
                    w.tensor(wt);
                    w.tensor(b);
                }
                Layer::TransposeConv1d {
                    in_ch,
                    out_ch,
                    k,
                    w: wt,
                    b,
                } => {
                    w.u8(3);
                    w.u32(*in_ch);
                    w.u32(*out_ch);
                    w.u32(*k);
                    w.tensor(wt);
                    w.tensor(b);
                }
                Layer::Relu => w.u8(4),
                Layer::LeakyRelu(a) => {
                    w.u8(5);
                    w.f64(*a);
                }
                Layer::MaxPool2 => w.u8(6),
                Layer::SkipConcat { source } => {
                    w.u8(7);
                    w.u32(*source);
                }
                Layer::Reshape { channels } => {
                    w.u8(8);
                    w.u32(*channels);
                }
                Layer::Linear {
                    inputs,
                    outputs,
                    w: wt,
                } => {
                    w.u8(9);
                    w.u32(*inputs);
                    w.u32(*outputs);
                    w.tensor(wt);
                }
            }
        }
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Network> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return r.err("missing KAWNET1 magic");
        }
        let label = r.str()?;
        let input = Shape::new(r.u32()?, r.u32()?);
        let complex_output = match r.u8()? {
            0 => false,
            1 => true,
            _ => return r.err("invalid output flag"),
        };
        let count = r.u32()?;
        let mut layers = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let l = match r.u8()? {
                1 => {
                    let (inputs, outputs) = (r.u32()?, r.u32()?);
                    let w = r.tensor(inputs * outputs)?;
                    let b = r.tensor(outputs)?;
                    Layer::Dense {
                        inputs,
                        outputs,
                        w,
                        b,
                    }
                }
                2 => {
                    let (in_ch, out_ch, k, stride) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
                    let w = r.tensor(in_ch * out_ch * k)?;
                    let b = r.tensor(out_ch)?;
                    Layer::Conv1d {
                        in_ch,
                        out_ch,
                        k,
                        stride,
                        w,
                        b,
                    }
                }
                3 => {
                    let (in_ch, out_ch, k) = (r.u32()?, r.u32()?, r.u32()?);
                    let w = r.tensor(in_ch * out_ch * k)?;
                    let b = r.tensor(out_ch)?;
                    Layer::TransposeConv1d {
                        in_ch,
                        out_ch,
                        k,
                        w,
                        b,
                    }
                }
                4 => Layer::Relu,
                5 => Layer::LeakyRelu(r.f64()?),
                6 => Layer::MaxPool2,
                7 => Layer::SkipConcat { source: r.u32()? },
                8 => Layer::Reshape { channels: r.u32()? },
                9 => {
                    let (inputs, outputs) = (r.u32()?, r.u32()?);
                    let w = r.tensor(inputs * outputs)?;
                    Layer::Linear { inputs, outputs, w }
                }
                t => return r.err(&format!("unknown layer tag {t}")),
            };
            layers.push(l);
        }
        if r.pos != buf.len() {
            return r.err("trailing bytes");
        }
        Ok(Network::new(input, layers, complex_output)?.with_label(label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian;

    fn random_params(net: &mut Network, seed: u64) {
        let mut r = rng::seeded(seed);
        for (w, b) in net.params_mut() {
            w.iter_mut().for_each(|v| *v = 0.5 * gaussian(&mut r));
            b.iter_mut().for_each(|v| *v = 0.1 * gaussian(&mut r));
        }
    }

    /// Central differences on `count` random parameters.
    fn fd_check(net: &Network, sample: &Sample, count: usize, seed: u64) -> f64 {
        let (_, grads) = net.loss_and_gradients(&[sample]).unwrap();
        let slots: Vec<(usize, usize, bool)> = grads
            .iter()
            .enumerate()
            .flat_map(|(i, (w, b))| {
                (0..w.len())
                    .map(move |j| (i, j, true))
                    .chain((0..b.len()).map(move |j| (i, j, false)))
            })
            .collect();
        let mut r = rng::seeded(seed);
        let h = 1e-5;
        let mut worst = 0.0f64;
        for _ in 0..count {
            let (i, j, is_w) = slots[r.random_range(0..slots.len())];
            let eval = |delta: f64| {
                let mut n = net.clone();
                let (w, b) = n.layer_mut(i).unwrap();
                if is_w {
                    w[j] += delta
                } else {
                    b[j] += delta
                }
                n.loss(std::slice::from_ref(sample)).unwrap()
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let an = if is_w { grads[i].0[j] } else { grads[i].1[j] };
            let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        worst
    }

    fn random_sample(net: &Network, seed: u64) -> Sample {
        let mut r = rng::seeded(seed);
        Sample {
            input: (0..net.input_size()).map(|_| gaussian(&mut r)).collect(),
            target: (0..net.output_size()).map(|_| gaussian(&mut r)).collect(),
        }
    }

    fn conv(in_ch: usize, out_ch: usize, k: usize, stride: usize) -> Layer {
        Layer::Conv1d {
            in_ch,
            out_ch,
            k,
            stride,
            w: vec![0.0; in_ch * out_ch * k],
            b: vec![0.0; out_ch],
        }
    }

    #[test]
    fn zero_weights_give_the_bias() {
        let mut net = mlp(&[4, 6, 3], false, 1).unwrap();
        for (i, (w, b)) in net.params_mut().enumerate() {
            w.iter_mut().for_each(|v| *v = 0.0);
            b.iter_mut()
                .enumerate()
                .for_each(|(j, v)| *v = (i * 10 + j) as f64);
        }
        assert_eq!(
            net.forward(&[1.0, -2.0, 3.0, 4.0]).unwrap(),
            vec![10.0, 11.0, 12.0]
        );
    }

    #[test]
    fn dimension_mismatch_is_a_size_error() {
        let net = mlp(&[4, 3], false, 1).unwrap();
        assert!(matches!(net.forward(&[1.0; 5]), Err(Error::Size(_))));
        assert!(Network::new(
            Shape::new(1, 4),
            vec![Layer::dense(vec![0.0; 10], vec![0.0; 2]).unwrap()],
            false
        )
        .is_err());
    }

    #[test]
    fn dense_gradients_match_finite_differences() {
        let mut net = mlp(&[5, 7, 6, 4], false, 3).unwrap();
        random_params(&mut net, 4);
        let s = random_sample(&net, 5);
        assert!(fd_check(&net, &s, 10, 6) < 1e-4);
    }

    #[test]
    fn layer_zoo_gradients_match_finite_differences() {
        let input = Shape::new(1, 16);
        let layers = vec![
            Layer::Reshape { channels: 2 },
            conv(2, 3, 3, 1),
            Layer::LeakyRelu(0.2),
            conv(3, 4, 5, 2),
            Layer::Relu,
            Layer::MaxPool2,
            Layer::TransposeConv1d {
                in_ch: 4,
                out_ch: 3,
                k: 4,
                w: vec![0.0; 48],
                b: vec![0.0; 3],
            },
            Layer::SkipConcat { source: 4 },
            Layer::LeakyRelu(0.2),
            conv(7, 2, 1, 1),
            Layer::Dense {
                inputs: 8,
                outputs: 6,
                w: vec![0.0; 48],
                b: vec![0.0; 6],
            },
        ];
        let mut net = Network::new(input, layers, true).unwrap();
        for seed in 0..3 {
            random_params(&mut net, 10 + seed);
            let s = random_sample(&net, 20 + seed);
            let worst = fd_check(&net, &s, 40, 30 + seed);
            assert!(worst < 1e-4, "seed {seed}: {worst}");
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut net = mlp(&[6, 8, 4], true, 7).unwrap();
        random_params(&mut net, 8);
        let y = CVector::from_stacked(&random_sample(&net, 9).input);
        let w = CVector::from_stacked(&[0.3, -1.0, 0.5, 2.0]);
        let err = crate::instability::check_vjp(&net, &y, 5, 1e-6, 11).unwrap();
        assert!(err < 1e-6, "{err}");
        assert!(net.vjp(&y, &w).unwrap().is_ok());
    }

    #[test]
    fn binary_round_trip() {
        let input = Shape::new(1, 8);
        let layers = vec![
            Layer::Linear {
                inputs: 8,
                outputs: 8,
                w: (0..64).map(|i| i as f64 * 0.1).collect(),
            },
            Layer::Reshape { channels: 2 },
            conv(2, 2, 3, 1),
            Layer::LeakyRelu(0.2),
            Layer::MaxPool2,
            Layer::TransposeConv1d {
                in_ch: 2,
                out_ch: 1,
                k: 2,
                w: vec![0.5; 4],
                b: vec![0.1],
            },
            Layer::SkipConcat { source: 2 },
            Layer::Relu,
        ];
        let mut net = Network::new(input, layers, false)
            .unwrap()
            .with_label("zoo");
        random_params(&mut net, 1);
        let bytes = net.to_bytes();
        assert_eq!(&bytes[..7], b"KAWNET1");
        assert_eq!(Network::from_bytes(&bytes).unwrap(), net);
        assert!(Network::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Network::from_bytes(&bad).is_err());
        assert!(net.summary().contains("transpose_conv1d"));
    }
}
