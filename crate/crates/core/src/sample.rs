/// One replication of an estimator.
///
/// `value` is the sum of `components`; each component is already scaled so
/// that this holds exactly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimatorSample {
    pub value: f64,
    pub components: Vec<(&'static str, f64)>,
    /// Increments charged to this replication.
    pub nu: u64,
    /// Largest time index touched.
    pub max_index: u64,
}

impl EstimatorSample {
    pub fn single(label: &'static str, value: f64, nu: u64, max_index: u64) -> Self {
        Self { value, components: vec![(label, value)], nu, max_index }
    }

    /// Concatenates components and adds work; `value` is recomputed as the sum.
    pub fn combine(parts: impl IntoIterator<Item = EstimatorSample>) -> Self {
        let mut out = Self::default();
        for p in parts {
            out.components.extend(p.components);
            out.nu += p.nu;
            out.max_index = out.max_index.max(p.max_index);
        }
        out.value = out.components.iter().map(|c| c.1).sum();
        out
    }

    /// Multiplies the value and every component by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for c in &mut self.components {
            c.1 *= factor;
        }
        self.value = self.components.iter().map(|c| c.1).sum();
        self
    }

    pub fn component(&self, label: &str) -> Option<f64> {
        self.components.iter().find(|c| c.0 == label).map(|c| c.1)
    }
}
