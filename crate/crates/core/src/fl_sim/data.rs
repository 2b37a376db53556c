//! Synthetic non-IID classification data.
//!
//! Each class is a Gaussian blob. Feature `j` is scaled by `s_j`, with the
//! scales log-spaced between `min_scale` and `max_scale`, so gradient descent
//! picks up the large-scale features quickly and the small-scale ones only
//! after many steps. Every client draws its samples from exactly two classes.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::instances;

/// Row-major feature matrix with integer labels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub num_features: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Samples {
    pub fn new(num_features: usize) -> Self {
        Samples {
            num_features,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.features[k * self.num_features..(k + 1) * self.num_features]
    }

    pub fn push(&mut self, x: &[f64], label: usize) {
        debug_assert_eq!(x.len(), self.num_features);
        self.features.extend_from_slice(x);
        self.labels.push(label);
    }

    /// Concatenation of several sample sets.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Samples>, num_features: usize) -> Samples {
        let mut out = Samples::new(num_features);
        for p in parts {
            out.features.extend_from_slice(&p.features);
            out.labels.extend_from_slice(&p.labels);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub num_clients: usize,
    pub num_classes: usize,
    pub num_features: usize,
    pub samples_per_client: usize,
    pub test_per_class: usize,
    /// Standard deviation of the class-mean offsets, in units of the per-feature noise.
    pub class_separation: f64,
    pub min_scale: f64,
    pub max_scale: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            num_clients: 8,
            num_classes: 4,
            num_features: 40,
            samples_per_client: 200,
            test_per_class: 250,
            class_separation: 0.45,
            min_scale: 0.1,
            max_scale: 3.0,
            seed: 0,
        }
    }
}

/// Per-client training data plus a balanced test set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub num_classes: usize,
    pub num_features: usize,
    pub clients: Vec<Samples>,
    /// The two classes each client holds.
    pub client_classes: Vec<[usize; 2]>,
    pub test: Samples,
}

impl SyntheticDataset {
    pub fn generate(config: &DatasetConfig) -> Self {
        assert!(config.num_classes >= 2, "need at least two classes");
        let mut rng = instances::rng(config.seed);
        let d = config.num_features;
        let k = config.num_classes;

        let scales: Vec<f64> = (0..d)
            .map(|j| {
                let u = if d > 1 { j as f64 / (d - 1) as f64 } else { 0.0 };
                config.max_scale * (config.min_scale / config.max_scale).powf(u)
            })
            .collect();
        let means: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..d)
                    .map(|_| config.class_separation * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let draw = |rng: &mut rand_chacha::ChaCha8Rng, class: usize| -> Vec<f64> {
            (0..d)
                .map(|j| scales[j] * (means[class][j] + rng.sample::<f64, _>(StandardNormal)))
                .collect()
        };

        // Client c holds classes (c, c + 1 + c / k) mod k, relabelled by a random
        // permutation, so every class is held by about the same number of clients.
        let mut relabel: Vec<usize> = (0..k).collect();
        relabel.shuffle(&mut rng);
        let client_classes: Vec<[usize; 2]> = (0..config.num_clients)
            .map(|c| {
                let shift = 1 + (c / k) % (k - 1);
                [relabel[c % k], relabel[(c + shift) % k]]
            })
            .collect();

        let clients = client_classes
            .iter()
            .map(|pair| {
                let mut s = Samples::new(d);
                let mut rows: Vec<(Vec<f64>, usize)> = (0..config.samples_per_client)
                    .map(|n| {
                        let class = pair[n % 2];
                        (draw(&mut rng, class), class)
                    })
                    .collect();
                rows.shuffle(&mut rng);
                for (x, y) in rows {
                    s.push(&x, y);
                }
                s
            })
            .collect();

        let mut test = Samples::new(d);
        for class in 0..k {
            for _ in 0..config.test_per_class {
                let x = draw(&mut rng, class);
                test.push(&x, class);
            }
        }

        SyntheticDataset {
            num_classes: k,
            num_features: d,
            clients,
            client_classes,
            test,
        }
    }

    /// `ρ_i = D_i / D`.
    pub fn data_weights(&self) -> Vec<f64> {
        let total: usize = self.clients.iter().map(Samples::len).sum();
        self.clients
            .iter()
            .map(|c| c.len() as f64 / total as f64)
            .collect()
    }

    pub fn all_training(&self) -> Samples {
        Samples::concat(&self.clients, self.num_features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clients_hold_two_labels() {
        let ds = SyntheticDataset::generate(&DatasetConfig::default());
        assert_eq!(ds.clients.len(), 8);
        for (c, pair) in ds.clients.iter().zip(&ds.client_classes) {
            assert_eq!(c.len(), 200);
            let mut seen: Vec<usize> = c.labels.clone();
            seen.sort();
            seen.dedup();
            let mut want = pair.to_vec();
            want.sort();
            assert_eq!(seen, want);
        }
        for class in 0..4 {
            let holders = ds.client_classes.iter().filter(|p| p.contains(&class)).count();
            assert_eq!(holders, 4);
        }
        assert!(ds.test.labels.iter().all(|&y| y < 4));
        assert_eq!(ds.test.len(), 1000);
        let w = ds.data_weights();
        assert!(w.iter().all(|&x| (x - 0.125).abs() < 1e-15));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = DatasetConfig {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(SyntheticDataset::generate(&cfg), SyntheticDataset::generate(&cfg));
    }
}
