//! Small differentiable classifiers: deterministic forward inference,
//! supervised training, and the gradient of the loss with respect to the
//! *input pixels*, which is what every attack consumes.
//!
//! Images are kept in `[0, 255]` pixel units everywhere; the forward pass
//! scales by `1/255` internally so that attack budgets stay expressed in
//! pixel units.

mod io;
mod train;

pub use io::{load_model, save_model};
pub use train::{train, TrainParams};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::tensor::Tensor;
use crate::Result;

/// Input pixels are divided by this inside the first layer.
pub const PIXEL_SCALE: f64 = 1.0 / 255.0;

/// One architecture element. Parameter-free layers carry no fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerSpec {
    Dense { inputs: usize, outputs: usize },
    Relu,
    Conv2d { in_channels: usize, out_channels: usize, kernel: usize, stride: usize },
    Flatten,
    MaxPool2d { window: usize },
}

/// Architecture description: layer list, expected input shape, class count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub layers: Vec<LayerSpec>,
    pub input_shape: Vec<usize>,
    pub class_count: usize,
}

/// A labeled image: pixels in `[0, 255]`, label below the class count.
#[derive(Debug, Clone)]
pub struct LabeledExample {
    pub image: Tensor,
    pub label: usize,
}

/// How a model was trained, for reproducibility records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingFingerprint {
    pub seed: u64,
    pub epochs_run: usize,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

/// A trained classifier: immutable after construction, so forward passes and
/// gradients may be taken concurrently from many threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    spec: ModelSpec,
    params: Vec<Tensor>,
    fingerprint: TrainingFingerprint,
}

/// Anything the attack engine can differentiate through.
pub trait Differentiable {
    fn input_shape(&self) -> &[usize];
    fn class_count(&self) -> usize;
    fn predict(&self, image: &Tensor) -> Result<usize>;
    fn loss(&self, image: &Tensor, label: usize) -> Result<f64>;
    fn input_gradient(&self, image: &Tensor, label: usize) -> Result<Tensor>;
}

impl ModelSpec {
    /// Checks layer compatibility and returns the output shape of every
    /// layer in order.
    pub fn validate(&self) -> Result<Vec<Vec<usize>>> {
        let mut shape = self.input_shape.clone();
        let mut shapes = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            shape = infer_output_shape(&shape, layer)
                .map_err(|e| Error::invalid(format!("layer {i} ({layer:?}): {e}")))?;
            shapes.push(shape.clone());
        }
        if shape != vec![self.class_count] {
            return Err(Error::invalid(format!(
                "final layer produces shape {:?}, expected [{}]",
                shape, self.class_count
            )));
        }
        Ok(shapes)
    }

    /// Shapes of the parameter tensors, in layer order (weight then bias for
    /// each parameterized layer).
    pub fn parameter_shapes(&self) -> Vec<Vec<usize>> {
        let mut shapes = Vec::new();
        for layer in &self.layers {
            match layer {
                LayerSpec::Dense { inputs, outputs } => {
                    shapes.push(vec![*outputs, *inputs]);
                    shapes.push(vec![*outputs]);
                }
                LayerSpec::Conv2d { in_channels, out_channels, kernel, .. } => {
                    shapes.push(vec![*out_channels, *in_channels, *kernel, *kernel]);
                    shapes.push(vec![*out_channels]);
                }
                _ => {}
            }
        }
        shapes
    }

    /// Two hidden dense layers.
    pub fn mlp_a() -> Self {
        ModelSpec {
            layers: vec![
                LayerSpec::Flatten,
                LayerSpec::Dense { inputs: 784, outputs: 64 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 64, outputs: 32 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 32, outputs: 10 },
            ],
            input_shape: vec![28, 28],
            class_count: 10,
        }
    }

    /// Three hidden dense layers with different widths.
    pub fn mlp_b() -> Self {
        ModelSpec {
            layers: vec![
                LayerSpec::Flatten,
                LayerSpec::Dense { inputs: 784, outputs: 48 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 48, outputs: 48 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 48, outputs: 24 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 24, outputs: 10 },
            ],
            input_shape: vec![28, 28],
            class_count: 10,
        }
    }

    /// One convolution block followed by a dense readout.
    pub fn cnn_a() -> Self {
        ModelSpec {
            layers: vec![
                LayerSpec::Conv2d { in_channels: 1, out_channels: 6, kernel: 3, stride: 1 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2d { window: 2 },
                LayerSpec::Flatten,
                LayerSpec::Dense { inputs: 6 * 13 * 13, outputs: 10 },
            ],
            input_shape: vec![28, 28],
            class_count: 10,
        }
    }

    /// Two convolution blocks followed by a dense readout.
    pub fn cnn_b() -> Self {
        ModelSpec {
            layers: vec![
                LayerSpec::Conv2d { in_channels: 1, out_channels: 4, kernel: 3, stride: 1 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2d { window: 2 },
                LayerSpec::Conv2d { in_channels: 4, out_channels: 8, kernel: 3, stride: 1 },
                LayerSpec::Relu,
                LayerSpec::MaxPool2d { window: 2 },
                LayerSpec::Flatten,
                LayerSpec::Dense { inputs: 8 * 5 * 5, outputs: 10 },
            ],
            input_shape: vec![28, 28],
            class_count: 10,
        }
    }

    /// Looks up one of the built-in desk-scale architectures by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "mlp-a" => Ok(Self::mlp_a()),
            "mlp-b" => Ok(Self::mlp_b()),
            "cnn-a" => Ok(Self::cnn_a()),
            "cnn-b" => Ok(Self::cnn_b()),
            other => Err(Error::invalid(format!(
                "unknown architecture {other:?} (expected mlp-a, mlp-b, cnn-a or cnn-b)"
            ))),
        }
    }
}

fn infer_output_shape(input: &[usize], layer: &LayerSpec) -> std::result::Result<Vec<usize>, String> {
    match layer {
        LayerSpec::Dense { inputs, outputs } => {
            if input.len() != 1 || input[0] != *inputs {
                return Err(format!("expects a flat input of length {inputs}, got {input:?}"));
            }
            Ok(vec![*outputs])
        }
        LayerSpec::Relu => Ok(input.to_vec()),
        LayerSpec::Flatten => Ok(vec![input.iter().product()]),
        LayerSpec::Conv2d { in_channels, kernel, stride, out_channels } => {
            let (c, h, w) = as_chw(input)?;
            if c != *in_channels {
                return Err(format!("expects {in_channels} input channels, got {c}"));
            }
            if *kernel == 0 || *stride == 0 {
                return Err("kernel and stride must be positive".into());
            }
            if h < *kernel || w < *kernel {
                return Err(format!("kernel {kernel} larger than input {h}x{w}"));
            }
            Ok(vec![
                *out_channels,
                (h - kernel) / stride + 1,
                (w - kernel) / stride + 1,
            ])
        }
        LayerSpec::MaxPool2d { window } => {
            let (c, h, w) = as_chw(input)?;
            if *window == 0 {
                return Err("window must be positive".into());
            }
            if h < *window || w < *window {
                return Err(format!("window {window} larger than input {h}x{w}"));
            }
            Ok(vec![c, h / window, w / window])
        }
    }
}

/// 2-D inputs are treated as single-channel.
fn as_chw(shape: &[usize]) -> std::result::Result<(usize, usize, usize), String> {
    match shape {
        [h, w] => Ok((1, *h, *w)),
        [c, h, w] => Ok((*c, *h, *w)),
        other => Err(format!("expected a 2-D or 3-D input, got {other:?}")),
    }
}

impl TrainedModel {
    /// Assembles a model from explicit parameters, validating shapes.
    pub fn from_parts(
        spec: ModelSpec,
        params: Vec<Tensor>,
        fingerprint: TrainingFingerprint,
    ) -> Result<Self> {
        spec.validate()?;
        let expected = spec.parameter_shapes();
        if expected.len() != params.len() {
            return Err(Error::invalid(format!(
                "spec declares {} parameter tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for (i, (want, have)) in expected.iter().zip(params.iter()).enumerate() {
            if want != have.shape() {
                return Err(Error::ShapeMismatch {
                    expected: want.clone(),
                    actual: have.shape().to_vec(),
                });
            }
            let _ = i;
        }
        Ok(TrainedModel { spec, params, fingerprint })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn parameters(&self) -> &[Tensor] {
        &self.params
    }

    pub fn fingerprint(&self) -> &TrainingFingerprint {
        &self.fingerprint
    }

    /// Short content hash over architecture, seed and exact parameter bytes;
    /// two models agree here iff they are bit-identical.
    pub fn identity(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(&self.spec).expect("spec serializes").as_bytes());
        hasher.update(self.fingerprint.seed.to_le_bytes());
        hasher.update((self.fingerprint.epochs_run as u64).to_le_bytes());
        for p in &self.params {
            for v in p.data() {
                hasher.update(v.to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        hex_prefix(&digest, 16)
    }

    /// Logits for one image. Deterministic: identical input gives
    /// bit-identical output.
    pub fn forward(&self, image: &Tensor) -> Result<Tensor> {
        Ok(self.forward_trace(image)?.logits)
    }

    /// Class index of the maximum logit; ties break to the lowest index.
    pub fn predict(&self, image: &Tensor) -> Result<usize> {
        Ok(argmax(self.forward(image)?.data()))
    }

    /// Cross-entropy loss of this model on `(image, label)`.
    pub fn loss(&self, image: &Tensor, label: usize) -> Result<f64> {
        loss(&self.forward(image)?, label)
    }

    /// Gradient of the cross-entropy loss with respect to the input pixels.
    pub fn input_gradient(&self, image: &Tensor, label: usize) -> Result<Tensor> {
        let trace = self.forward_trace(image)?;
        if label >= self.spec.class_count {
            return Err(Error::invalid(format!(
                "label {label} out of range for {} classes",
                self.spec.class_count
            )));
        }
        let dlogits = softmax_ce_logit_gradient(&trace.logits, label)?;
        let (_, dinput) = self.backward(&trace, &dlogits, false);
        // Undo the internal 1/255 input scaling.
        Ok(Tensor::new(
            image.shape().to_vec(),
            dinput.iter().map(|g| g * PIXEL_SCALE).collect(),
        )
        .expect("gradient is finite"))
    }

    fn check_input(&self, image: &Tensor) -> Result<()> {
        if image.shape() != self.spec.input_shape.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: self.spec.input_shape.clone(),
                actual: image.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Forward pass recording the input buffer of every layer (needed for
    /// backpropagation).
    fn forward_trace(&self, image: &Tensor) -> Result<ForwardTrace> {
        self.check_input(image)?;
        let mut shape = self.spec.input_shape.clone();
        let mut buf: Vec<f64> = image.data().iter().map(|p| p * PIXEL_SCALE).collect();
        let mut layer_inputs = Vec::with_capacity(self.spec.layers.len());
        let mut param_ix = 0;
        for layer in &self.spec.layers {
            layer_inputs.push(buf.clone());
            let (out, out_shape) = self.apply_layer(layer, &buf, &shape, &mut param_ix);
            buf = out;
            shape = out_shape;
        }
        Ok(ForwardTrace {
            layer_inputs,
            logits: Tensor::new(shape, buf).map_err(|_| {
                Error::invalid("forward pass produced non-finite logits".to_string())
            })?,
        })
    }

    fn apply_layer(
        &self,
        layer: &LayerSpec,
        input: &[f64],
        shape: &[usize],
        param_ix: &mut usize,
    ) -> (Vec<f64>, Vec<usize>) {
        match layer {
            LayerSpec::Dense { inputs, outputs } => {
                let w = self.params[*param_ix].data();
                let b = self.params[*param_ix + 1].data();
                *param_ix += 2;
                let mut out = vec![0.0; *outputs];
                for (o, out_v) in out.iter_mut().enumerate() {
                    let row = &w[o * inputs..(o + 1) * inputs];
                    let mut acc = b[o];
                    for i in 0..*inputs {
                        acc += row[i] * input[i];
                    }
                    *out_v = acc;
                }
                (out, vec![*outputs])
            }
            LayerSpec::Relu => (
                input.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect(),
                shape.to_vec(),
            ),
            LayerSpec::Flatten => (input.to_vec(), vec![shape.iter().product()]),
            LayerSpec::Conv2d { in_channels, out_channels, kernel, stride } => {
                let w = self.params[*param_ix].data();
                let b = self.params[*param_ix + 1].data();
                *param_ix += 2;
                let (_, h, wid) = as_chw(shape).expect("validated");
                let (k, s) = (*kernel, *stride);
                let oh = (h - k) / s + 1;
                let ow = (wid - k) / s + 1;
                let mut out = vec![0.0; out_channels * oh * ow];
                for co in 0..*out_channels {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut acc = b[co];
                            for ci in 0..*in_channels {
                                for ky in 0..k {
                                    let in_row = (ci * h + oy * s + ky) * wid + ox * s;
                                    let w_row = ((co * in_channels + ci) * k + ky) * k;
                                    for kx in 0..k {
                                        acc += w[w_row + kx] * input[in_row + kx];
                                    }
                                }
                            }
                            out[(co * oh + oy) * ow + ox] = acc;
                        }
                    }
                }
                (out, vec![*out_channels, oh, ow])
            }
            LayerSpec::MaxPool2d { window } => {
                let (c, h, wid) = as_chw(shape).expect("validated");
                let wn = *window;
                let oh = h / wn;
                let ow = wid / wn;
                let mut out = vec![0.0; c * oh * ow];
                for ch in 0..c {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut best = f64::NEG_INFINITY;
                            for dy in 0..wn {
                                for dx in 0..wn {
                                    let v = input[(ch * h + oy * wn + dy) * wid + ox * wn + dx];
                                    if v > best {
                                        best = v;
                                    }
                                }
                            }
                            out[(ch * oh + oy) * ow + ox] = best;
                        }
                    }
                }
                (out, vec![c, oh, ow])
            }
        }
    }

    /// Backward pass from a logit gradient. Returns parameter gradients
    /// (when requested) and the gradient with respect to the *scaled* input.
    fn backward(
        &self,
        trace: &ForwardTrace,
        dlogits: &Tensor,
        want_param_grads: bool,
    ) -> (Option<Vec<Tensor>>, Vec<f64>) {
        let mut param_grads: Option<Vec<Vec<f64>>> = if want_param_grads {
            Some(
                self.spec
                    .parameter_shapes()
                    .iter()
                    .map(|s| vec![0.0; s.iter().product()])
                    .collect(),
            )
        } else {
            None
        };

        // Shapes entering each layer.
        let mut shapes = Vec::with_capacity(self.spec.layers.len());
        let mut shape = self.spec.input_shape.clone();
        for layer in &self.spec.layers {
            shapes.push(shape.clone());
            shape = infer_output_shape(&shape, layer).expect("validated");
        }

        // Parameter index entering each layer.
        let mut param_starts = Vec::with_capacity(self.spec.layers.len());
        let mut pix = 0;
        for layer in &self.spec.layers {
            param_starts.push(pix);
            match layer {
                LayerSpec::Dense { .. } | LayerSpec::Conv2d { .. } => pix += 2,
                _ => {}
            }
        }

        let mut dout = dlogits.data().to_vec();
        for (li, layer) in self.spec.layers.iter().enumerate().rev() {
            let input = &trace.layer_inputs[li];
            let in_shape = &shapes[li];
            let pstart = param_starts[li];
            dout = match layer {
                LayerSpec::Dense { inputs, outputs } => {
                    let w = self.params[pstart].data();
                    let mut din = vec![0.0; *inputs];
                    for o in 0..*outputs {
                        let g = dout[o];
                        let row = &w[o * inputs..(o + 1) * inputs];
                        for i in 0..*inputs {
                            din[i] += g * row[i];
                        }
                    }
                    if let Some(pg) = param_grads.as_mut() {
                        let (dw, db) = {
                            let (a, b) = pg.split_at_mut(pstart + 1);
                            (&mut a[pstart], &mut b[0])
                        };
                        for o in 0..*outputs {
                            let g = dout[o];
                            db[o] += g;
                            let row = &mut dw[o * inputs..(o + 1) * inputs];
                            for i in 0..*inputs {
                                row[i] += g * input[i];
                            }
                        }
                    }
                    din
                }
                LayerSpec::Relu => input
                    .iter()
                    .zip(dout.iter())
                    .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
                    .collect(),
                LayerSpec::Flatten => dout,
                LayerSpec::Conv2d { in_channels, out_channels, kernel, stride } => {
                    let w = self.params[pstart].data();
                    let (_, h, wid) = as_chw(in_shape).expect("validated");
                    let (k, s) = (*kernel, *stride);
                    let oh = (h - k) / s + 1;
                    let ow = (wid - k) / s + 1;
                    let mut din = vec![0.0; in_channels * h * wid];
                    for co in 0..*out_channels {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let g = dout[(co * oh + oy) * ow + ox];
                                for ci in 0..*in_channels {
                                    for ky in 0..k {
                                        let in_row = (ci * h + oy * s + ky) * wid + ox * s;
                                        let w_row = ((co * in_channels + ci) * k + ky) * k;
                                        for kx in 0..k {
                                            din[in_row + kx] += g * w[w_row + kx];
                                        }
                                    }
                                }
                            }
                        }
                    }
                    if let Some(pg) = param_grads.as_mut() {
                        let (dw, db) = {
                            let (a, b) = pg.split_at_mut(pstart + 1);
                            (&mut a[pstart], &mut b[0])
                        };
                        for co in 0..*out_channels {
                            for oy in 0..oh {
                                for ox in 0..ow {
                                    let g = dout[(co * oh + oy) * ow + ox];
                                    db[co] += g;
                                    for ci in 0..*in_channels {
                                        for ky in 0..k {
                                            let in_row =
                                                (ci * h + oy * s + ky) * wid + ox * s;
                                            let w_row =
                                                ((co * in_channels + ci) * k + ky) * k;
                                            for kx in 0..k {
                                                dw[w_row + kx] += g * input[in_row + kx];
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    din
                }
                LayerSpec::MaxPool2d { window } => {
                    let (c, h, wid) = as_chw(in_shape).expect("validated");
                    let wn = *window;
                    let oh = h / wn;
                    let ow = wid / wn;
                    let mut din = vec![0.0; input.len()];
                    for ch in 0..c {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                // Route to the first maximum in scan order.
                                let mut best = f64::NEG_INFINITY;
                                let mut best_ix = 0;
                                for dy in 0..wn {
                                    for dx in 0..wn {
                                        let ix =
                                            (ch * h + oy * wn + dy) * wid + ox * wn + dx;
                                        if input[ix] > best {
                                            best = input[ix];
                                            best_ix = ix;
                                        }
                                    }
                                }
                                din[best_ix] += dout[(ch * oh + oy) * ow + ox];
                            }
                        }
                    }
                    din
                }
            };
        }

        let param_grads = param_grads.map(|gs| {
            gs.into_iter()
                .zip(self.spec.parameter_shapes())
                .map(|(g, s)| Tensor::new(s, g).expect("finite gradients"))
                .collect()
        });
        (param_grads, dout)
    }

    /// Training entry point used by `train`: loss gradient for one example,
    /// with parameter gradients.
    pub(crate) fn example_gradients(
        &self,
        example: &LabeledExample,
    ) -> Result<(f64, Vec<Tensor>)> {
        let trace = self.forward_trace(&example.image)?;
        let j = loss(&trace.logits, example.label)?;
        let dlogits = softmax_ce_logit_gradient(&trace.logits, example.label)?;
        let (grads, _) = self.backward(&trace, &dlogits, true);
        Ok((j, grads.expect("requested")))
    }

    pub(crate) fn params_mut(&mut self) -> &mut Vec<Tensor> {
        &mut self.params
    }

    pub(crate) fn fingerprint_mut(&mut self) -> &mut TrainingFingerprint {
        &mut self.fingerprint
    }
}

impl Differentiable for TrainedModel {
    fn input_shape(&self) -> &[usize] {
        &self.spec.input_shape
    }

    fn class_count(&self) -> usize {
        self.spec.class_count
    }

    fn predict(&self, image: &Tensor) -> Result<usize> {
        TrainedModel::predict(self, image)
    }

    fn loss(&self, image: &Tensor, label: usize) -> Result<f64> {
        TrainedModel::loss(self, image, label)
    }

    fn input_gradient(&self, image: &Tensor, label: usize) -> Result<Tensor> {
        TrainedModel::input_gradient(self, image, label)
    }
}

struct ForwardTrace {
    layer_inputs: Vec<Vec<f64>>,
    logits: Tensor,
}

/// Index of the maximum element; ties break to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Cross-entropy loss `-log softmax(logits)[label]`, computed in the
/// log-sum-exp-stabilized form so large logits cannot overflow.
pub fn loss(logits: &Tensor, label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::invalid(format!(
            "label {label} out of range for {} logits",
            logits.len()
        )));
    }
    let z = logits.data();
    let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lse = m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
    Ok(lse - z[label])
}

/// Gradient of the cross-entropy loss with respect to the logits:
/// `softmax(logits) - onehot(label)`. Its components sum to zero.
pub fn softmax_ce_logit_gradient(logits: &Tensor, label: usize) -> Result<Tensor> {
    if label >= logits.len() {
        return Err(Error::invalid(format!(
            "label {label} out of range for {} logits",
            logits.len()
        )));
    }
    let z = logits.data();
    let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let mut g: Vec<f64> = exps.into_iter().map(|e| e / sum).collect();
    g[label] -= 1.0;
    Tensor::new(vec![g.len()], g)
}

/// Fraction of examples whose prediction matches their label.
pub fn evaluate_accuracy(model: &TrainedModel, examples: &[LabeledExample]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::invalid("cannot evaluate accuracy on an empty set"));
    }
    let mut hits = 0usize;
    for ex in examples {
        if model.predict(&ex.image)? == ex.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / examples.len() as f64)
}

fn hex_prefix(digest: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for byte in digest {
        use std::fmt::Write;
        write!(s, "{byte:02x}").expect("write to string");
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

#[cfg(test)]
mod tests;
