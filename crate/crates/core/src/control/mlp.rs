use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ControlError, Result, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn slope_from_output(self, a: f64) -> f64 {
        match self {
            Self::Tanh => 1.0 - a * a,
        }
    }
}

/// Maps raw features/targets to the standardized space the network works in.
/// Features flagged in `log_features` (and the target if `log_target`) are
/// log-transformed before standardizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub x_mean: Vec<f64>,
    pub x_std: Vec<f64>,
    pub y_mean: f64,
    pub y_std: f64,
    pub log_features: Vec<bool>,
    pub log_target: bool,
    /// Raw per-feature training range, for extrapolation warnings.
    pub x_range: Vec<(f64, f64)>,
}

impl Normalization {
    pub fn identity(inputs: usize) -> Self {
        Self {
            x_mean: vec![0.0; inputs],
            x_std: vec![1.0; inputs],
            y_mean: 0.0,
            y_std: 1.0,
            log_features: vec![false; inputs],
            log_target: false,
            x_range: vec![(f64::MIN, f64::MAX); inputs],
        }
    }

    pub fn fit(xs: &[Vec<f64>], ys: &[f64], log_features: &[bool], log_target: bool) -> Result<Self> {
        let d = log_features.len();
        let tx: Vec<Vec<f64>> = xs.iter().map(|x| transform(x, log_features)).collect();
        let ty: Vec<f64> = ys.iter().map(|&y| if log_target { y.ln() } else { y }).collect();
        if tx.iter().flatten().chain(&ty).any(|v| !v.is_finite()) {
            return Err(ControlError::InvalidParameter(
                "dataset has values outside the transform domain".into(),
            ));
        }
        let (mut x_mean, mut x_std, mut x_range) = (Vec::new(), Vec::new(), Vec::new());
        for j in 0..d {
            let col: Vec<f64> = tx.iter().map(|x| x[j]).collect();
            let (m, s) = mean_std(&col);
            x_mean.push(m);
            x_std.push(s);
            let raw = xs.iter().map(|x| x[j]);
            x_range.push(raw.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))));
        }
        let (y_mean, y_std) = mean_std(&ty);
        Ok(Self {
            x_mean,
            x_std,
            y_mean,
            y_std,
            log_features: log_features.to_vec(),
            log_target,
            x_range,
        })
    }

    pub fn input(&self, x: &[f64]) -> Vec<f64> {
        transform(x, &self.log_features)
            .iter()
            .enumerate()
            .map(|(j, v)| (v - self.x_mean[j]) / self.x_std[j])
            .collect()
    }

    pub fn target(&self, y: f64) -> f64 {
        let t = if self.log_target { y.ln() } else { y };
        (t - self.y_mean) / self.y_std
    }

    pub fn output(&self, z: f64) -> f64 {
        let t = z * self.y_std + self.y_mean;
        if self.log_target {
            t.exp()
        } else {
            t
        }
    }
}

fn transform(x: &[f64], log: &[bool]) -> Vec<f64> {
    x.iter().zip(log).map(|(&v, &l)| if l { v.ln() } else { v }).collect()
}

/// Population mean and std; a constant column gets std 1.
fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    (m, if s > 1e-12 { s } else { 1.0 })
}

/// Fully connected regressor: tanh on hidden layers, identity on the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// Per layer, row-major `out x in`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub activation: Activation,
    pub norms: Normalization,
    pub seed: u64,
    pub config: Option<TrainConfig>,
    pub trained: bool,
}

/// Per-layer outputs of one forward pass, input first.
pub(crate) type Activations = Vec<Vec<f64>>;

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(ControlError::InvalidParameter(format!("bad layer sizes {layer_sizes:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            activation: Activation::Tanh,
            norms: Normalization::identity(layer_sizes[0]),
            seed,
            config: None,
            trained: false,
        })
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    /// All weights then biases of layer 0, then layer 1, ...
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            p.extend_from_slice(w);
            p.extend_from_slice(b);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count(), "parameter vector length");
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let (nw, nb) = (w.len(), b.len());
            w.copy_from_slice(&p[k..k + nw]);
            k += nw;
            b.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
    }

    /// Forward pass in normalized space, keeping every layer's output.
    pub(crate) fn forward_trace(&self, x: &[f64]) -> Activations {
        let mut acts = vec![x.to_vec()];
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let input = &acts[l];
            let n_in = input.len();
            let out: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(o, &bias)| {
                    let z = bias + w[o * n_in..(o + 1) * n_in].iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if l == last {
                        z
                    } else {
                        self.activation.apply(z)
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub(crate) fn forward_normalized(&self, x: &[f64]) -> f64 {
        self.forward_trace(x).last().expect("output layer")[0]
    }

    /// Adds this sample's squared-error gradient (scaled by `scale`) to `grad`,
    /// laid out like [`MlpModel::params`]. Returns the prediction.
    pub(crate) fn backprop(&self, x: &[f64], y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let acts = self.forward_trace(x);
        let pred = acts.last().expect("output")[0];
        let mut delta = vec![2.0 * (pred - y) * scale];
        let offsets: Vec<usize> = self
            .weights
            .iter()
            .zip(&self.biases)
            .scan(0, |k, (w, b)| {
                let o = *k;
                *k += w.len() + b.len();
                Some(o)
            })
            .collect();
        for l in (0..self.weights.len()).rev() {
            let input = &acts[l];
            let n_in = input.len();
            let w = &self.weights[l];
            let off = offsets[l];
            for (o, d) in delta.iter().enumerate() {
                for (i, a) in input.iter().enumerate() {
                    grad[off + o * n_in + i] += d * a;
                }
                grad[off + w.len() + o] += d;
            }
            if l > 0 {
                delta = (0..n_in)
                    .map(|i| {
                        let back: f64 = delta.iter().enumerate().map(|(o, d)| d * w[o * n_in + i]).sum();
                        back * self.activation.slope_from_output(input[i])
                    })
                    .collect();
            }
        }
        pred
    }

    /// Prediction in raw units.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.inputs() {
            return Err(ControlError::InputDimension {
                expected: self.inputs(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ControlError::NonFiniteInput);
        }
        let xn = self.norms.input(x);
        if xn.iter().any(|v| !v.is_finite()) {
            return Err(ControlError::NonFiniteInput);
        }
        Ok(self.norms.output(self.forward_normalized(&xn)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| ControlError::Format(format!("model json: {e}")))?;
        let consistent = m.layer_sizes.len() >= 2
            && m.weights.len() == m.layer_sizes.len() - 1
            && m.biases.len() == m.weights.len()
            && m.layer_sizes.windows(2).zip(&m.weights).all(|(s, w)| w.len() == s[0] * s[1])
            && m.layer_sizes[1..].iter().zip(&m.biases).all(|(&s, b)| b.len() == s)
            && m.norms.x_mean.len() == m.layer_sizes[0]
            && m.norms.x_std.iter().chain([&m.norms.y_std]).all(|&s| s > 0.0);
        if !consistent {
            return Err(ControlError::Format("model json: inconsistent shapes or normalization".into()));
        }
        if m.params().iter().any(|p| !p.is_finite()) {
            return Err(ControlError::Format("model json: non-finite parameter".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_output_target_mean() {
        let mut m = MlpModel::new(&[2, 32, 64, 1], 0).unwrap();
        m.set_params(&vec![0.0; m.param_count()]);
        m.norms.y_mean = 3.5;
        m.norms.y_std = 2.0;
        assert_eq!(m.forward(&[1.3, 0.02]).unwrap(), 3.5);
    }

    #[test]
    fn forward_is_continuous() {
        let m = MlpModel::new(&[2, 32, 64, 1], 7).unwrap();
        let a = m.forward(&[0.3, -0.2]).unwrap();
        let b = m.forward(&[0.3 + 1e-6, -0.2]).unwrap();
        assert!((a - b).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = MlpModel::new(&[2, 4, 1], 1).unwrap();
        assert_eq!(m.forward(&[1.0]), Err(ControlError::InputDimension { expected: 2, got: 1 }));
        assert_eq!(m.forward(&[f64::NAN, 1.0]), Err(ControlError::NonFiniteInput));
    }

    #[test]
    fn json_round_trip() {
        let m = MlpModel::new(&[2, 32, 64, 1], 3).unwrap();
        assert_eq!(MlpModel::from_json(&m.to_json()).unwrap(), m);
        assert!(MlpModel::from_json("{}").is_err());
    }

    #[test]
    fn seeded_init_is_reproducible() {
        assert_eq!(MlpModel::new(&[2, 8, 1], 5).unwrap(), MlpModel::new(&[2, 8, 1], 5).unwrap());
        assert_ne!(MlpModel::new(&[2, 8, 1], 5).unwrap(), MlpModel::new(&[2, 8, 1], 6).unwrap());
    }
}
