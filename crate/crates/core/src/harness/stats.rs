use serde::Serialize;

use crate::sample::EstimatorSample;

/// Streaming mean and sum of squared deviations (Welford), mergeable with
/// Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.n as f64 * w;
        self.n = n;
    }

    /// Unbiased sample variance (0 for fewer than two points).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// Accumulates replications of one estimator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Accumulator {
    value: Moments,
    work_sum: u128,
    max_work: u64,
    index_sum: u128,
    max_index: u64,
    components: Vec<(&'static str, Moments)>,
}

impl Accumulator {
    pub fn push(&mut self, s: &EstimatorSample) {
        self.value.push(s.value);
        self.work_sum += s.nu as u128;
        self.max_work = self.max_work.max(s.nu);
        self.index_sum += s.max_index as u128;
        self.max_index = self.max_index.max(s.max_index);
        for &(label, v) in &s.components {
            match self.components.iter_mut().find(|c| c.0 == label) {
                Some(c) => c.1.push(v),
                None => {
                    // Earlier replications that lacked this component contributed 0.
                    let mut m = Moments::default();
                    for _ in 0..self.value.n - 1 {
                        m.push(0.0);
                    }
                    m.push(v);
                    self.components.push((label, m));
                }
            }
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.value.merge(&other.value);
        self.work_sum += other.work_sum;
        self.max_work = self.max_work.max(other.max_work);
        self.index_sum += other.index_sum;
        self.max_index = self.max_index.max(other.max_index);
        for &(label, ref m) in &other.components {
            match self.components.iter_mut().find(|c| c.0 == label) {
                Some(c) => c.1.merge(m),
                None => self.components.push((label, *m)),
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.value.n
    }

    pub fn finish(&self, seed: u64) -> RunStats {
        let n = self.value.n;
        let variance = self.value.variance();
        let sd = variance.sqrt();
        let mean = self.value.mean;
        let nf = n.max(1) as f64;
        RunStats {
            n_reps: n,
            mean,
            variance,
            std_error: (variance / nf).sqrt(),
            cv: if mean > 0.0 { sd / mean } else { f64::NAN },
            mean_work: self.work_sum as f64 / nf,
            max_work: self.max_work,
            mean_index: self.index_sum as f64 / nf,
            max_index: self.max_index,
            seed,
            components: self
                .components
                .iter()
                .map(|(label, m)| ComponentStats { label: (*label).to_string(), mean: m.mean, variance: m.variance() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentStats {
    pub label: String,
    pub mean: f64,
    pub variance: f64,
}

/// Summary of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub n_reps: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// `sd / mean`; NaN when the mean is not positive.
    pub cv: f64,
    /// Average increments generated per replication.
    pub mean_work: f64,
    pub max_work: u64,
    /// Average of the largest time index touched per replication.
    pub mean_index: f64,
    pub max_index: u64,
    pub seed: u64,
    pub components: Vec<ComponentStats>,
}

impl RunStats {
    pub fn component_mean(&self, label: &str) -> Option<f64> {
        self.components.iter().find(|c| c.label == label).map(|c| c.mean)
    }

    /// Standardized distance `|mean - target| / std_error`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }
}
