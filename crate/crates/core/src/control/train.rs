use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ControlError, MlpModel, Normalization, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Hidden layer widths; `[32]` gives the single-hidden-layer ablation.
    pub hidden: Vec<usize>,
    pub log_features: Vec<bool>,
    pub log_target: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            learning_rate: 0.06,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            hidden: vec![32, 64],
            log_features: vec![false, false],
            log_target: false,
        }
    }
}

impl TrainConfig {
    /// Defaults plus log transforms of the size feature and the target, for
    /// the power-law speed and time datasets.
    pub fn for_control() -> Self {
        Self {
            log_features: vec![false, true],
            log_target: true,
            ..Self::default()
        }
    }

    pub fn layer_sizes(&self, inputs: usize) -> Vec<usize> {
        let mut s = vec![inputs];
        s.extend(&self.hidden);
        s.push(1);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(ControlError::InvalidParameter("epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(ControlError::InvalidParameter("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return Err(ControlError::InvalidParameter("Adam constants out of range".into()));
        }
        if self.hidden.contains(&0) {
            return Err(ControlError::InvalidParameter("hidden layers must be nonempty".into()));
        }
        Ok(())
    }
}

/// Mean squared error in normalized space.
pub fn loss(model: &MlpModel, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (model.forward_normalized(x) - y).powi(2))
        .sum::<f64>()
        / xs.len() as f64
}

fn loss_grad(model: &MlpModel, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; model.param_count()];
    let scale = 1.0 / xs.len() as f64;
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let p = model.backprop(x, y, scale, &mut grad);
        total += (p - y).powi(2);
    }
    (total * scale, grad)
}

fn check_data(xs: &[Vec<f64>], ys: &[f64], inputs: usize) -> Result<()> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(ControlError::EmptyDataset);
    }
    if let Some(x) = xs.iter().find(|x| x.len() != inputs) {
        return Err(ControlError::InputDimension {
            expected: inputs,
            got: x.len(),
        });
    }
    if xs.iter().flatten().chain(ys).any(|v| !v.is_finite()) {
        return Err(ControlError::NonFiniteInput);
    }
    Ok(())
}

/// Full-batch Adam on MSE. Fits the model's normalization to the data first.
/// The loss history has one entry per epoch, measured before that epoch's
/// update.
pub fn train(mut model: MlpModel, xs: &[Vec<f64>], ys: &[f64], config: &TrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    config.validate()?;
    check_data(xs, ys, model.inputs())?;
    if config.log_features.len() != model.inputs() {
        return Err(ControlError::InvalidParameter("log_features length must match the inputs".into()));
    }
    model.norms = Normalization::fit(xs, ys, &config.log_features, config.log_target)?;
    let xn: Vec<Vec<f64>> = xs.iter().map(|x| model.norms.input(x)).collect();
    let yn: Vec<f64> = ys.iter().map(|&y| model.norms.target(y)).collect();

    let mut params = model.params();
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        model.set_params(&params);
        let (l, g) = loss_grad(&model, &xn, &yn);
        if !l.is_finite() {
            return Err(ControlError::Diverged { epoch, loss: l });
        }
        history.push(l);
        let t = (epoch + 1) as i32;
        let c1 = 1.0 - config.beta1.powi(t);
        let c2 = 1.0 - config.beta2.powi(t);
        for i in 0..params.len() {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            params[i] -= config.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + config.epsilon);
        }
    }
    model.set_params(&params);
    if params.iter().any(|p| !p.is_finite()) {
        return Err(ControlError::Diverged {
            epoch: config.epochs,
            loss: f64::NAN,
        });
    }
    model.config = Some(config.clone());
    model.trained = true;
    Ok((model, history))
}

/// Fresh model shaped by `config`, seeded by `config.seed`, then trained.
pub fn train_new(xs: &[Vec<f64>], ys: &[f64], config: &TrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    let inputs = xs.first().ok_or(ControlError::EmptyDataset)?.len();
    let model = MlpModel::new(&config.layer_sizes(inputs), config.seed)?;
    train(model, xs, ys, config)
}

/// Relative differences `|a - n| / max(|a| + |n|, 1e-8)` between backprop
/// and central finite differences (step 1e-6) for `probes` randomly chosen
/// parameters, on data already in normalized space.
pub fn gradient_check(model: &MlpModel, xs: &[Vec<f64>], ys: &[f64], probes: usize, seed: u64) -> Vec<f64> {
    let (_, grad) = loss_grad(model, xs, ys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = model.params();
    let mut probe_model = model.clone();
    let h = 1e-6;
    (0..probes)
        .map(|_| {
            let i = rng.gen_range(0..base.len());
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe_model.set_params(&p);
            let up = loss(&probe_model, xs, ys);
            p[i] = base[i] - h;
            probe_model.set_params(&p);
            let down = loss(&probe_model, xs, ys);
            let numeric = (up - down) / (2.0 * h);
            // near-zero components are judged on absolute error; central differences carry ~1e-10 rounding noise
            (grad[i] - numeric).abs() / (grad[i].abs() + numeric.abs()).max(1e-5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<Vec<f64>> = (0..64).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let ys = xs.iter().map(|x| 2.0 * x[0] + 3.0 * x[1]).collect();
        (xs, ys)
    }

    #[test]
    fn constant_target_converges() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let ys = vec![4.2; 20];
        let cfg = TrainConfig {
            epochs: 200,
            ..TrainConfig::default()
        };
        let (m, hist) = train_new(&xs, &ys, &cfg).unwrap();
        assert_eq!(hist.len(), 200);
        assert!((m.forward(&[3.0, 9.0]).unwrap() - 4.2).abs() < 1e-3);
    }

    #[test]
    fn linear_target_fits() {
        let (xs, ys) = linear_data();
        let (m, _) = train_new(&xs, &ys, &TrainConfig::default()).unwrap();
        let var = ys.iter().map(|y| y * y).sum::<f64>() / ys.len() as f64;
        let mse = xs.iter().zip(&ys).map(|(x, y)| (m.forward(x).unwrap() - y).powi(2)).sum::<f64>() / ys.len() as f64;
        assert!(mse < 1e-3 * var, "{mse} vs {var}");
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (xs, ys) = linear_data();
        let m = MlpModel::new(&[2, 32, 64, 1], 3).unwrap();
        let errs = gradient_check(&m, &xs, &ys, 100, 0);
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        assert!(worst <= 1e-4, "{worst}");
    }

    #[test]
    fn same_seed_same_history() {
        let (xs, ys) = linear_data();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        assert_eq!(train_new(&xs, &ys, &cfg).unwrap().1, train_new(&xs, &ys, &cfg).unwrap().1);
    }

    #[test]
    fn rejects_bad_config_and_empty_data() {
        let (xs, ys) = linear_data();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(train_new(&xs, &ys, &cfg).is_err());
        assert_eq!(train_new(&[], &[], &TrainConfig::default()).unwrap_err(), ControlError::EmptyDataset);
    }
}
