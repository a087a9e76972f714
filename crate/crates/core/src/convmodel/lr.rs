//! L2-regularized logistic regression over sparse binary features, trained
//! with plain SGD.
//!
//! The objective is
//!
//! ```text
//! J(w, b) = 1/N Σ_i [ -y_i log σ(z_i) - (1 - y_i) log(1 - σ(z_i)) ] + λ/2 ‖w‖²,   z_i = b + Σ_{j ∈ x_i} w_j
//! ```
//!
//! and each SGD step follows the gradient of one summand plus the full
//! penalty. The penalty's decay is applied lazily through a global weight
//! scale so a step costs O(nnz) rather than O(features).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FeatureVector, ModelError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrHyper {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: u32,
    pub rng_seed: u64,
}

impl Default for LrHyper {
    fn default() -> Self {
        Self { learning_rate: 0.1, l2: 1e-4, epochs: 10, rng_seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyper: LrHyper,
}

impl LrModel {
    pub fn zeros(n_features: usize, hyper: LrHyper) -> Self {
        Self { weights: vec![0.0; n_features], bias: 0.0, hyper }
    }

    pub fn logit(&self, fv: &FeatureVector) -> f64 {
        self.bias + fv.indices().iter().filter_map(|&j| self.weights.get(j as usize)).sum::<f64>()
    }

    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        sigmoid(self.logit(fv))
    }
}

pub fn predict(model: &LrModel, fv: &FeatureVector) -> f64 {
    model.predict(fv)
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(z)` if `label`, else `-log(1 - σ(z))`, computed without overflow.
fn log_loss(z: f64, label: bool) -> f64 {
    let m = if label { -z } else { z };
    // log(1 + e^m)
    if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    }
}

/// Regularized objective `J(w, b)`.
pub fn objective(weights: &[f64], bias: f64, examples: &[(FeatureVector, bool)], l2: f64) -> f64 {
    let data: f64 = examples
        .iter()
        .map(|(fv, y)| {
            let z = bias + fv.indices().iter().map(|&j| weights[j as usize]).sum::<f64>();
            log_loss(z, *y)
        })
        .sum();
    let penalty = 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    data / examples.len().max(1) as f64 + penalty
}

/// Analytic gradient of [`objective`]: `(∂J/∂w, ∂J/∂b)`.
pub fn gradient(weights: &[f64], bias: f64, examples: &[(FeatureVector, bool)], l2: f64) -> (Vec<f64>, f64) {
    let n = examples.len().max(1) as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (fv, y) in examples {
        let z = bias + fv.indices().iter().map(|&j| weights[j as usize]).sum::<f64>();
        let r = (sigmoid(z) - if *y { 1.0 } else { 0.0 }) / n;
        gb += r;
        for &j in fv.indices() {
            gw[j as usize] += r;
        }
    }
    (gw, gb)
}

/// Weights stored as `scale * raw` so the L2 decay is a scalar update.
struct ScaledWeights {
    raw: Vec<f64>,
    scale: f64,
}

impl ScaledWeights {
    fn sum(&self, fv: &FeatureVector) -> f64 {
        self.scale * fv.indices().iter().map(|&j| self.raw[j as usize]).sum::<f64>()
    }

    /// `w ← (1 - decay) w - step · x`
    fn update(&mut self, fv: &FeatureVector, decay: f64, step: f64) {
        self.scale *= 1.0 - decay;
        if self.scale < 1e-9 {
            self.materialize();
        }
        let delta = step / self.scale;
        for &j in fv.indices() {
            self.raw[j as usize] -= delta;
        }
    }

    fn materialize(&mut self) {
        for w in &mut self.raw {
            *w *= self.scale;
        }
        self.scale = 1.0;
    }

    fn into_weights(mut self) -> Vec<f64> {
        self.materialize();
        self.raw
    }
}

/// One SGD step on example `(fv, y)`; returns nothing, mutates the state.
fn sgd_step(w: &mut ScaledWeights, bias: &mut f64, fv: &FeatureVector, y: bool, hyper: &LrHyper) {
    let p = sigmoid(*bias + w.sum(fv));
    let residual = p - if y { 1.0 } else { 0.0 };
    w.update(fv, hyper.learning_rate * hyper.l2, hyper.learning_rate * residual);
    *bias -= hyper.learning_rate * residual;
}

/// Fits the model by SGD, visiting examples in a seeded shuffled order each
/// epoch. Requires both classes.
pub fn train_lr(examples: &[(FeatureVector, bool)], n_features: usize, hyper: LrHyper) -> Result<LrModel, ModelError> {
    let positives = examples.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == examples.len() {
        return Err(ModelError::SingleClass);
    }
    if let Some(j) = examples.iter().flat_map(|(fv, _)| fv.indices()).find(|&&j| j as usize >= n_features) {
        return Err(ModelError::FeatureOutOfRange { index: *j, n_features });
    }

    let mut w = ScaledWeights { raw: vec![0.0; n_features], scale: 1.0 };
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.rng_seed);
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (fv, y) = &examples[i];
            sgd_step(&mut w, &mut bias, fv, *y, &hyper);
        }
    }
    let weights = w.into_weights();
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(ModelError::Diverged);
    }
    Ok(LrModel { weights, bias, hyper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fv(ix: &[u32]) -> FeatureVector {
        FeatureVector::from_indices(ix.to_vec())
    }

    #[test]
    fn zero_model_predicts_half() {
        let m = LrModel::zeros(3, LrHyper::default());
        assert_eq!(m.predict(&fv(&[0, 2])), 0.5);
    }

    #[test]
    fn positive_weight_increases_prediction() {
        let m = LrModel { weights: vec![0.3, 1.2, -0.4], bias: -0.1, hyper: LrHyper::default() };
        assert!(m.predict(&fv(&[0, 1])) > m.predict(&fv(&[0])));
        // σ(-0.1 + 0.3 + 1.2 - 0.4) = σ(1.0)
        let manual = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((m.predict(&fv(&[0, 1, 2])) - manual).abs() < 1e-15);
        assert!((manual - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn separable_feature_gets_positive_weight() {
        let data: Vec<_> = (0..40).map(|i| if i % 2 == 0 { (fv(&[0]), true) } else { (fv(&[]), false) }).collect();
        let m = train_lr(&data, 1, LrHyper::default()).unwrap();
        assert!(m.weights[0] > 0.0);
        let flipped: Vec<_> = data.iter().map(|(f, y)| (f.clone(), !y)).collect();
        let m = train_lr(&flipped, 1, LrHyper::default()).unwrap();
        assert!(m.weights[0] < 0.0);
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let data = vec![(fv(&[0]), true), (fv(&[1]), false)];
        let hyper = LrHyper { epochs: 0, ..LrHyper::default() };
        assert_eq!(train_lr(&data, 2, hyper).unwrap(), LrModel::zeros(2, hyper));
    }

    #[test]
    fn single_class_rejected() {
        let data = vec![(fv(&[0]), true), (fv(&[1]), true)];
        assert!(matches!(train_lr(&data, 2, LrHyper::default()), Err(ModelError::SingleClass)));
        assert!(matches!(
            train_lr(&[(fv(&[5]), true), (fv(&[]), false)], 2, LrHyper::default()),
            Err(ModelError::FeatureOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<_> = (0..300)
            .map(|_| {
                let ix: Vec<u32> = (0..10).filter(|_| rng.random::<f64>() < 0.3).collect();
                let y = ix.contains(&2) || rng.random::<f64>() < 0.1;
                (fv(&ix), y)
            })
            .collect();
        let hyper = LrHyper::default();
        let initial = objective(&[0.0; 10], 0.0, &data, hyper.l2);
        let m = train_lr(&data, 10, hyper).unwrap();
        assert!(objective(&m.weights, m.bias, &data, hyper.l2) < initial);
        assert_eq!(train_lr(&data, 10, hyper).unwrap(), m);
    }

    /// One lazily-scaled step equals the dense update w ← w − η(∇ℓ_i + λw).
    #[test]
    fn lazy_step_matches_dense_step() {
        let hyper = LrHyper { learning_rate: 0.3, l2: 0.05, ..LrHyper::default() };
        let start = vec![0.2, -0.7, 1.1, 0.4];
        let mut w = ScaledWeights { raw: start.clone(), scale: 1.0 };
        let mut bias = 0.25;
        let x = fv(&[1, 3]);
        sgd_step(&mut w, &mut bias, &x, true, &hyper);

        let (gw, gb) = gradient(&start, 0.25, &[(x, true)], hyper.l2);
        let dense: Vec<f64> = start.iter().zip(&gw).map(|(w, g)| w - hyper.learning_rate * g).collect();
        for (a, b) in w.into_weights().iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!((bias - (0.25 - hyper.learning_rate * gb)).abs() < 1e-12);
    }

    #[test]
    fn log_loss_is_stable() {
        assert!((log_loss(0.0, true) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_loss(800.0, false) - 800.0).abs() < 1e-9);
        assert!(log_loss(800.0, true) < 1e-300);
    }
}
