//! Softmax-linear classifier with cross-entropy loss.

use serde::{Deserialize, Serialize};

use super::data::Samples;
use crate::error::{Error, Result};

/// Parameters `θ = (W, b)` of a multinomial logistic-regression model.
///
/// `params` holds the `num_classes × num_features` weight matrix row-major,
/// followed by `num_classes` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub num_classes: usize,
    pub num_features: usize,
    pub params: Vec<f64>,
}

impl ModelState {
    pub fn zeros(num_classes: usize, num_features: usize) -> Self {
        ModelState {
            num_classes,
            num_features,
            params: vec![0.0; num_classes * (num_features + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    fn bias_offset(&self) -> usize {
        self.num_classes * self.num_features
    }

    /// Class probabilities for one sample, written into `out`.
    fn probabilities(&self, x: &[f64], out: &mut [f64]) {
        let d = self.num_features;
        let b = self.bias_offset();
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.params[c * d..(c + 1) * d];
            *o = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.params[b + c];
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            total += *o;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut p = vec![0.0; self.num_classes];
        self.probabilities(x, &mut p);
        p.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(c, _)| c)
    }

    /// Mean cross-entropy over `range` of `data`.
    pub fn loss_on(&self, data: &Samples, range: std::ops::Range<usize>) -> f64 {
        let n = range.len().max(1);
        let mut p = vec![0.0; self.num_classes];
        let mut total = 0.0;
        for k in range {
            self.probabilities(data.row(k), &mut p);
            total -= p[data.labels[k]].max(f64::MIN_POSITIVE).ln();
        }
        total / n as f64
    }

    pub fn loss(&self, data: &Samples) -> f64 {
        self.loss_on(data, 0..data.len())
    }

    pub fn accuracy(&self, data: &Samples) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let hits = (0..data.len())
            .filter(|&k| self.predict(data.row(k)) == data.labels[k])
            .count();
        hits as f64 / data.len() as f64
    }

    /// Gradient of the mean cross-entropy over `range`.
    pub fn gradient_on(&self, data: &Samples, range: std::ops::Range<usize>) -> Vec<f64> {
        let d = self.num_features;
        let b = self.bias_offset();
        let n = range.len().max(1) as f64;
        let mut grad = vec![0.0; self.dim()];
        let mut p = vec![0.0; self.num_classes];
        for k in range {
            let x = data.row(k);
            self.probabilities(x, &mut p);
            p[data.labels[k]] -= 1.0;
            for (c, &g) in p.iter().enumerate() {
                for (gw, xi) in grad[c * d..(c + 1) * d].iter_mut().zip(x) {
                    *gw += g * xi;
                }
                grad[b + c] += g;
            }
        }
        for g in &mut grad {
            *g /= n;
        }
        grad
    }
}

/// Runs `epochs` full passes of mini-batch gradient descent on `data`.
///
/// Batches are contiguous slices in storage order; the last one may be short.
pub fn local_update(
    model: &ModelState,
    data: &Samples,
    epochs: usize,
    learning_rate: f64,
    batch_size: usize,
) -> Result<ModelState> {
    let mut theta = model.clone();
    if epochs == 0 || data.is_empty() {
        return Ok(theta);
    }
    let batch = batch_size.clamp(1, data.len());
    for _ in 0..epochs {
        let mut start = 0;
        while start < data.len() {
            let end = (start + batch).min(data.len());
            let grad = theta.gradient_on(data, start..end);
            for (w, g) in theta.params.iter_mut().zip(&grad) {
                *w -= learning_rate * g;
            }
            start = end;
        }
        if !theta.params.iter().all(|w| w.is_finite()) || !theta.loss(data).is_finite() {
            return Err(Error::Divergence { round: None });
        }
    }
    Ok(theta)
}

/// Weighted average `Σ_i ρ_i θ_i` of client models.
pub fn fedavg_round(models: &[ModelState], weights: &[f64]) -> Result<ModelState> {
    let first = models
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no client models to aggregate".into()))?;
    if models.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} models but {} weights",
            models.len(),
            weights.len()
        )));
    }
    if let Some(m) = models
        .iter()
        .find(|m| m.dim() != first.dim() || m.num_classes != first.num_classes)
    {
        return Err(Error::DimensionMismatch(format!(
            "model dimension {} differs from {}",
            m.dim(),
            first.dim()
        )));
    }
    let mut out = ModelState::zeros(first.num_classes, first.num_features);
    for (m, &w) in models.iter().zip(weights) {
        for (o, p) in out.params.iter_mut().zip(&m.params) {
            *o += w * p;
        }
    }
    Ok(out)
}
