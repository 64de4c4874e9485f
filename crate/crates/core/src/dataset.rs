//! In-memory labeled datasets and the builtin XOR task.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(first) = features.first() {
            if let Some(i) = features.iter().position(|r| r.len() != first.len()) {
                return Err(Error::Data(format!("row {i} has a different width")));
            }
        }
        if let Some(i) = labels.iter().position(|&l| l >= class_count) {
            return Err(Error::Data(format!("label {} at row {i} out of range", labels[i])));
        }
        Ok(Self { features, labels, class_count })
    }

    /// Class count inferred as `max(label) + 1`.
    pub fn from_rows(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(features, labels, classes)
    }

    /// The four XOR corners scaled to `{0, c}`.
    pub fn xor(c: f64) -> Self {
        let features = vec![vec![0.0, 0.0], vec![0.0, c], vec![c, 0.0], vec![c, c]];
        Self { features, labels: vec![0, 1, 1, 0], class_count: 2 }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// `per_point` Gaussian-jittered copies of every row.
    pub fn jittered(&self, sigma: f64, per_point: usize, seed: u64) -> Result<Self> {
        let noise = Normal::new(0.0, sigma).map_err(|_| invalid("jitter sigma must be >= 0"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::with_capacity(self.len() * per_point);
        let mut labels = Vec::with_capacity(self.len() * per_point);
        for (row, &label) in self.features.iter().zip(&self.labels) {
            for _ in 0..per_point {
                features.push(row.iter().map(|v| v + noise.sample(&mut rng)).collect());
                labels.push(label);
            }
        }
        Ok(Self { features, labels, class_count: self.class_count })
    }

    /// Uniform sample of `k` rows without replacement, in ascending index
    /// order.
    pub fn subset(&self, k: usize, seed: u64) -> Result<Self> {
        let idx = self.subset_indices(k, seed)?;
        Ok(self.select(&idx))
    }

    pub fn subset_indices(&self, k: usize, seed: u64) -> Result<Vec<usize>> {
        if k > self.len() {
            return Err(invalid(format!("subset of {k} from {} rows", self.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = index::sample(&mut rng, self.len(), k).into_vec();
        idx.sort_unstable();
        Ok(idx)
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_corners() {
        let d = Dataset::xor(1.0);
        assert_eq!(d.len(), 4);
        assert_eq!(d.labels, vec![0, 1, 1, 0]);
        assert_eq!(d.class_counts(), vec![2, 2]);
    }

    #[test]
    fn jitter_and_subset_are_seeded() {
        let d = Dataset::xor(1.0).jittered(0.1, 100, 5).unwrap();
        assert_eq!(d.len(), 400);
        assert_eq!(d, Dataset::xor(1.0).jittered(0.1, 100, 5).unwrap());
        let a = d.subset_indices(50, 9).unwrap();
        assert_eq!(a, d.subset_indices(50, 9).unwrap());
        assert_eq!(a.len(), 50);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(d.subset(401, 0).is_err());
    }

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![vec![0.0]], vec![2], 2).is_err());
        assert!(Dataset::new(vec![vec![0.0], vec![0.0, 1.0]], vec![0, 1], 2).is_err());
        assert!(Dataset::new(vec![vec![0.0]], vec![], 2).is_err());
    }
}
