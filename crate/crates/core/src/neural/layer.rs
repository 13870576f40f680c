use crate::error::{size_err, Result};

/// Activation shape: channels by length, stored channel-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub channels: usize,
    pub len: usize,
}

impl Shape {
    pub fn new(channels: usize, len: usize) -> Self {
        Shape { channels, len }
    }
    pub fn size(&self) -> usize {
        self.channels * self.len
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    /// `W x + b` on the flattened input; output shape `(1, outputs)`.
    Dense {
        inputs: usize,
        outputs: usize,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    /// Odd kernel with half-sample symmetric extension at both ends.
    Conv1d {
        in_ch: usize,
        out_ch: usize,
        k: usize,
        stride: usize,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    /// Stride-2 upsampling; output length is twice the input length.
    TransposeConv1d {
        in_ch: usize,
        out_ch: usize,
        k: usize,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    /// Fixed linear map `W x` on the flattened input; not trained.
    Linear {
        inputs: usize,
        outputs: usize,
        w: Vec<f64>,
    },
    Relu,
    LeakyRelu(f64),
    MaxPool2,
    /// Appends the channels of activation `source` (0 is the network input).
    SkipConcat {
        source: usize,
    },
    /// Reinterprets the flattened activation with the given channel count.
    Reshape {
        channels: usize,
    },
}

/// Half-sample symmetric index into `0..len`.
fn reflect(j: isize, len: usize) -> usize {
    let n = len as isize;
    let mut j = j;
    loop {
        if j < 0 {
            j = -j - 1;
        } else if j >= n {
            j = 2 * n - j - 1;
        } else {
            return j as usize;
        }
    }
}

pub(crate) enum Aux {
    None,
    Argmax(Vec<usize>),
}

impl Layer {
    pub fn dense(w: Vec<f64>, b: Vec<f64>) -> Result<Layer> {
        let outputs = b.len();
        if outputs == 0 || !w.len().is_multiple_of(outputs) {
            return size_err("dense weight size is not a multiple of the bias size");
        }
        Ok(Layer::Dense {
            inputs: w.len() / outputs,
            outputs,
            w,
            b,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Layer::Dense { .. } => "dense",
            Layer::Linear { .. } => "linear",
            Layer::Conv1d { .. } => "conv1d",
            Layer::TransposeConv1d { .. } => "transpose_conv1d",
            Layer::Relu => "relu",
            Layer::LeakyRelu(_) => "leaky_relu",
            Layer::MaxPool2 => "maxpool2",
            Layer::SkipConcat { .. } => "skip_concat",
            Layer::Reshape { .. } => "reshape",
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.params().map(|(w, b)| w.len() + b.len()).unwrap_or(0)
    }

    pub fn params(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Layer::Dense { w, b, .. }
            | Layer::Conv1d { w, b, .. }
            | Layer::TransposeConv1d { w, b, .. } => Some((w, b)),
            _ => None,
        }
    }

    pub fn params_mut(&mut self) -> Option<(&mut Vec<f64>, &mut Vec<f64>)> {
        match self {
            Layer::Dense { w, b, .. }
            | Layer::Conv1d { w, b, .. }
            | Layer::TransposeConv1d { w, b, .. } => Some((w, b)),
            _ => None,
        }
    }

    /// Output shape, given the input shape and the shapes of earlier activations.
    pub fn output_shape(&self, s: Shape, earlier: &[Shape]) -> Result<Shape> {
        match self {
            Layer::Dense {
                inputs, outputs, ..
            }
            | Layer::Linear {
                inputs, outputs, ..
            } => {
                if s.size() != *inputs {
                    return size_err(format!(
                        "dense layer expects {inputs} inputs, got {}",
                        s.size()
                    ));
                }
                Ok(Shape::new(1, *outputs))
            }
            Layer::Conv1d {
                in_ch,
                out_ch,
                k,
                stride,
                ..
            } => {
                if s.channels != *in_ch {
                    return size_err(format!(
                        "conv1d expects {in_ch} channels, got {}",
                        s.channels
                    ));
                }
                if k % 2 == 0 || *stride == 0 {
                    return size_err("conv1d needs an odd kernel and positive stride");
                }
                Ok(Shape::new(*out_ch, s.len.div_ceil(*stride)))
            }
            Layer::TransposeConv1d {
                in_ch, out_ch, k, ..
            } => {
                if s.channels != *in_ch {
                    return size_err(format!(
                        "transpose_conv1d expects {in_ch} channels, got {}",
                        s.channels
                    ));
                }
                if *k < 2 || k % 2 != 0 {
                    return size_err("transpose_conv1d needs an even kernel");
                }
                Ok(Shape::new(*out_ch, 2 * s.len))
            }
            Layer::Relu | Layer::LeakyRelu(_) => Ok(s),
            Layer::MaxPool2 => {
                if !s.len.is_multiple_of(2) {
                    return size_err("maxpool2 needs an even length");
                }
                Ok(Shape::new(s.channels, s.len / 2))
            }
            Layer::SkipConcat { source } => {
                let src = earlier.get(*source).ok_or_else(|| {
                    crate::Error::Size(format!("skip source {source} does not precede the layer"))
                })?;
                if src.len != s.len {
                    return size_err("skip source length mismatch");
                }
                Ok(Shape::new(s.channels + src.channels, s.len))
            }
            Layer::Reshape { channels } => {
                if *channels == 0 || !s.size().is_multiple_of(*channels) {
                    return size_err("reshape does not divide the activation");
                }
                Ok(Shape::new(*channels, s.size() / channels))
            }
        }
    }

    pub(crate) fn forward(
        &self,
        x: &[f64],
        s: Shape,
        acts: &[Vec<f64>],
        out_shape: Shape,
    ) -> (Vec<f64>, Aux) {
        match self {
            Layer::Dense {
                inputs,
                outputs,
                w,
                b,
            } => {
                let y = (0..*outputs)
                    .map(|o| {
                        b[o] + w[o * inputs..(o + 1) * inputs]
                            .iter()
                            .zip(x)
                            .map(|(a, v)| a * v)
                            .sum::<f64>()
                    })
                    .collect();
                (y, Aux::None)
            }
            Layer::Linear { inputs, outputs, w } => {
                let y = (0..*outputs)
                    .map(|o| {
                        w[o * inputs..(o + 1) * inputs]
                            .iter()
                            .zip(x)
                            .map(|(a, v)| a * v)
                            .sum::<f64>()
                    })
                    .collect();
                (y, Aux::None)
            }
            Layer::Conv1d {
                in_ch,
                out_ch,
                k,
                stride,
                w,
                b,
            } => {
                let pad = (k / 2) as isize;
                let ol = out_shape.len;
                let mut y = vec![0.0; out_ch * ol];
                for o in 0..*out_ch {
                    for t in 0..ol {
                        let mut acc = b[o];
                        for i in 0..*in_ch {
                            for q in 0..*k {
                                let j = reflect((t * stride) as isize + q as isize - pad, s.len);
                                acc += w[(o * in_ch + i) * k + q] * x[i * s.len + j];
                            }
                        }
                        y[o * ol + t] = acc;
                    }
                }
                (y, Aux::None)
            }
            Layer::TransposeConv1d {
                in_ch,
                out_ch,
                k,
                w,
                b,
            } => {
                let pad = ((k - 2) / 2) as isize;
                let ol = out_shape.len;
                let mut y = vec![0.0; out_ch * ol];
                for o in 0..*out_ch {
                    y[o * ol..(o + 1) * ol].iter_mut().for_each(|v| *v = b[o]);
                }
                for i in 0..*in_ch {
                    for t in 0..s.len {
                        let v = x[i * s.len + t];
                        for o in 0..*out_ch {
                            for q in 0..*k {
                                let p = 2 * t as isize + q as isize - pad;
                                if p >= 0 && (p as usize) < ol {
                                    y[o * ol + p as usize] += w[(i * out_ch + o) * k + q] * v;
                                }
                            }
                        }
                    }
                }
                (y, Aux::None)
            }
            Layer::Relu => (x.iter().map(|&v| v.max(0.0)).collect(), Aux::None),
            Layer::LeakyRelu(a) => (
                x.iter().map(|&v| if v > 0.0 { v } else { a * v }).collect(),
                Aux::None,
            ),
            Layer::MaxPool2 => {
                let ol = s.len / 2;
                let mut y = Vec::with_capacity(s.channels * ol);
                let mut arg = Vec::with_capacity(s.channels * ol);
                for c in 0..s.channels {
                    for t in 0..ol {
                        let i0 = c * s.len + 2 * t;
                        let i = if x[i0 + 1] > x[i0] { i0 + 1 } else { i0 };
                        y.push(x[i]);
                        arg.push(i);
                    }
                }
                (y, Aux::Argmax(arg))
            }
            Layer::SkipConcat { source } => {
                let mut y = x.to_vec();
                y.extend_from_slice(&acts[*source]);
                (y, Aux::None)
            }
            Layer::Reshape { .. } => (x.to_vec(), Aux::None),
        }
    }

    /// Returns the gradient with respect to the input; parameter gradients are
    /// accumulated into `gw`, `gb`, and skip gradients into `gacts`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn backward(
        &self,
        x: &[f64],
        s: Shape,
        aux: &Aux,
        gy: &[f64],
        out_shape: Shape,
        gw: &mut [f64],
        gb: &mut [f64],
        gacts: &mut [Vec<f64>],
    ) -> Vec<f64> {
        match self {
            Layer::Dense {
                inputs, outputs, w, ..
            } => {
                let mut gx = vec![0.0; *inputs];
                for o in 0..*outputs {
                    let g = gy[o];
                    gb[o] += g;
                    let row = &w[o * inputs..(o + 1) * inputs];
                    let grow = &mut gw[o * inputs..(o + 1) * inputs];
                    for j in 0..*inputs {
                        grow[j] += g * x[j];
                        gx[j] += g * row[j];
                    }
                }
                gx
            }
            Layer::Linear { inputs, outputs, w } => {
                let mut gx = vec![0.0; *inputs];
                for o in 0..*outputs {
                    let row = &w[o * inputs..(o + 1) * inputs];
                    for j in 0..*inputs {
                        gx[j] += gy[o] * row[j];
                    }
                }
                gx
            }
            Layer::Conv1d {
                in_ch,
                out_ch,
                k,
                stride,
                w,
                ..
            } => {
                let pad = (k / 2) as isize;
                let ol = out_shape.len;
                let mut gx = vec![0.0; x.len()];
                for o in 0..*out_ch {
                    for t in 0..ol {
                        let g = gy[o * ol + t];
                        gb[o] += g;
                        for i in 0..*in_ch {
                            for q in 0..*k {
                                let j = reflect((t * stride) as isize + q as isize - pad, s.len);
                                let wi = (o * in_ch + i) * k + q;
                                gw[wi] += g * x[i * s.len + j];
                                gx[i * s.len + j] += g * w[wi];
                            }
                        }
                    }
                }
                gx
            }
            Layer::TransposeConv1d {
                in_ch,
                out_ch,
                k,
                w,
                ..
            } => {
                let pad = ((k - 2) / 2) as isize;
                let ol = out_shape.len;
                let mut gx = vec![0.0; x.len()];
                for o in 0..*out_ch {
                    gb[o] += gy[o * ol..(o + 1) * ol].iter().sum::<f64>();
                }
                for i in 0..*in_ch {
                    for t in 0..s.len {
                        let v = x[i * s.len + t];
                        let mut acc = 0.0;
                        for o in 0..*out_ch {
                            for q in 0..*k {
                                let p = 2 * t as isize + q as isize - pad;
                                if p >= 0 && (p as usize) < ol {
                                    let wi = (i * out_ch + o) * k + q;
                                    let g = gy[o * ol + p as usize];
                                    gw[wi] += g * v;
                                    acc += g * w[wi];
                                }
                            }
                        }
                        gx[i * s.len + t] = acc;
                    }
                }
                gx
            }
            Layer::Relu => x
                .iter()
                .zip(gy)
                .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
                .collect(),
            Layer::LeakyRelu(a) => x
                .iter()
                .zip(gy)
                .map(|(&v, &g)| if v > 0.0 { g } else { a * g })
                .collect(),
            Layer::MaxPool2 => {
                let mut gx = vec![0.0; x.len()];
                if let Aux::Argmax(arg) = aux {
                    for (&i, &g) in arg.iter().zip(gy) {
                        gx[i] += g;
                    }
                }
                gx
            }
            Layer::SkipConcat { source } => {
                let n = x.len();
                for (a, g) in gacts[*source].iter_mut().zip(&gy[n..]) {
                    *a += g;
                }
                gy[..n].to_vec()
            }
            Layer::Reshape { .. } => gy.to_vec(),
        }
    }
}
