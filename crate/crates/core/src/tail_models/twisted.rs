use super::{IncrementModel, QUAD_RTOL};
use crate::error::{param, Error, Result};
use crate::quadrature::{gauss_kronrod, integrate_pieces, Tolerance};
use crate::rng::RandomSource;

/// Largest tolerated deviation of the log-density from its chord inside a cell.
const CELL_LOG_TOL: f64 = 1e-7;

/// `F` restricted to `(-inf, u)` and tilted by `e^(θx)`:
/// `dF_θ(x) = e^(θx - Λ) 1(x < u) F(dx)` with `Λ = log ∫_{x<u} e^(θx) F(dx)`.
///
/// Discrete laws are reweighted atom by atom. Continuous laws use
/// rejection from `F` on `(-inf, c)`, `c = min(0, u)`, where the tilt is at
/// most 1, and a table of exponential-linear cells on `[c, u)`.
#[derive(Debug, Clone)]
pub struct TwistedTruncated {
    model: IncrementModel,
    threshold: f64,
    theta: f64,
    log_mgf: f64,
    sampler: Sampler,
}

#[derive(Debug, Clone)]
enum Sampler {
    Atoms { values: Vec<f64>, weights: Vec<f64>, total: f64 },
    Continuous(CellTable),
}

#[derive(Debug, Clone)]
struct CellTable {
    split: f64,
    left_prob: f64,
    cells: Vec<Cell>,
    /// Normalized cumulative mass of the cells (last entry is 1).
    cum: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    width: f64,
    /// Log-density increase across the cell.
    rise: f64,
}

impl TwistedTruncated {
    pub(super) fn new(model: IncrementModel, threshold: f64, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) || !threshold.is_finite() {
            return Err(param(format!(
                "twist needs finite u and theta >= 0, got u={threshold}, theta={theta}"
            )));
        }
        let (log_mgf, sampler) = match &model {
            IncrementModel::DiscreteToy(toy) => {
                let (values, weights): (Vec<f64>, Vec<f64>) = toy
                    .atoms()
                    .iter()
                    .filter(|a| a.0 < threshold)
                    .map(|&(v, p)| (v, p * (theta * (v - threshold)).exp()))
                    .unzip();
                let total: f64 = weights.iter().sum();
                if values.is_empty() || !(total > 0.0) {
                    return Err(Error::TailUnderflow { threshold });
                }
                (theta * threshold + total.ln(), Sampler::Atoms { values, weights, total })
            }
            _ => {
                let (mass, table) = build_table(&model, threshold, theta)?;
                (theta * threshold + mass.ln(), Sampler::Continuous(table))
            }
        };
        Ok(Self { model, threshold, theta, log_mgf, sampler })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `Λ_u(θ)`.
    pub fn log_mgf(&self) -> f64 {
        self.log_mgf
    }

    pub fn model(&self) -> &IncrementModel {
        &self.model
    }

    /// One draw, always strictly below the threshold.
    #[inline]
    pub fn sample<R: RandomSource + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = match &self.sampler {
            Sampler::Atoms { values, weights, total } => {
                let i = rng.pick_weighted(values.len() as u64, *total, &mut |i| weights[i as usize]);
                values[i as usize]
            }
            Sampler::Continuous(t) => t.sample(&self.model, self.theta, self.threshold, rng),
        };
        debug_assert!(x < self.threshold);
        x
    }
}

impl CellTable {
    #[inline]
    fn sample<R: RandomSource + ?Sized>(&self, model: &IncrementModel, theta: f64, u: f64, rng: &mut R) -> f64 {
        let v = rng.uniform();
        if v < self.left_prob {
            loop {
                let x = model.sample(rng);
                if x < self.split && rng.uniform() < (theta * (x - self.split)).exp() {
                    return x;
                }
            }
        }
        let w = (v - self.left_prob) / (1.0 - self.left_prob);
        let j = self.cum.partition_point(|&c| c <= w).min(self.cells.len() - 1);
        let lo = if j == 0 { 0.0 } else { self.cum[j - 1] };
        let within = ((w - lo) / (self.cum[j] - lo)).clamp(0.0, 1.0);
        let cell = self.cells[j];
        let frac = if cell.rise.abs() < 1e-9 {
            within
        } else {
            (within * cell.rise.exp_m1()).ln_1p() / cell.rise
        };
        let x = cell.x0 + cell.width * frac;
        if x >= u {
            u.next_down()
        } else {
            x
        }
    }
}

/// Returns the total tilted mass `∫_{x<u} e^(θ(x-u)) F(dx)` and the sampler table.
fn build_table(model: &IncrementModel, u: f64, theta: f64) -> Result<(f64, CellTable)> {
    let lower = model.support_lower();
    if u <= lower {
        return Err(Error::TailUnderflow { threshold: u });
    }
    let split = u.min(0.0).max(lower);
    let tilted = |x: f64| {
        let d = model.density(x).unwrap_or(0.0);
        if d == 0.0 {
            0.0
        } else {
            d * (theta * (x - u)).exp()
        }
    };
    let log_tilted = |x: f64| theta * (x - u) + model.density(x).unwrap_or(0.0).ln();

    let left_mass = if split > lower {
        let mut points = vec![lower];
        points.extend(model.kinks().into_iter().filter(|&k| k > lower && k < split));
        points.push(split);
        integrate_pieces(tilted, &points, Tolerance::relative(QUAD_RTOL))?.value
    } else {
        0.0
    };

    let mut points = vec![split];
    points.extend(model.kinks().into_iter().filter(|&k| k > split && k < u));
    let mut p = 1.0;
    while p < u {
        if p > split {
            points.push(p);
        }
        p *= 2.0;
    }
    points.push(u);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut cells = Vec::new();
    let mut masses = Vec::new();
    for w in points.windows(2) {
        let mut stack = vec![(w[0], w[1], log_tilted(w[0]), log_tilted(w[1]))];
        while let Some((a, b, la, lb)) = stack.pop() {
            let mid = 0.5 * (a + b);
            let lm = log_tilted(mid);
            let q1 = log_tilted(0.5 * (a + mid));
            let q3 = log_tilted(0.5 * (mid + b));
            let err = (lm - 0.5 * (la + lb))
                .abs()
                .max((q1 - 0.75 * la - 0.25 * lb).abs())
                .max((q3 - 0.25 * la - 0.75 * lb).abs());
            let resolvable = (b - a) > 1e-9 * a.abs().max(1.0);
            if !(err <= CELL_LOG_TOL) && resolvable {
                // push right first so cells come out in increasing order
                stack.push((mid, b, lm, lb));
                stack.push((a, mid, la, lm));
                continue;
            }
            let mass = gauss_kronrod(&tilted, a, b).value;
            if mass > 0.0 {
                let rise = if la.is_finite() && lb.is_finite() { lb - la } else { 0.0 };
                cells.push(Cell { x0: a, width: b - a, rise });
                masses.push(mass);
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::TailUnderflow { threshold: u });
    }
    let mut right_mass = crate::rng::NeumaierSum::default();
    let mut cum = Vec::with_capacity(masses.len());
    for m in &masses {
        right_mass.add(*m);
        cum.push(right_mass.value());
    }
    let right_mass = right_mass.value();
    for c in &mut cum {
        *c /= right_mass;
    }
    *cum.last_mut().expect("cells are non-empty") = 1.0;
    let total = left_mass + right_mass;
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::TailUnderflow { threshold: u });
    }
    Ok((total, CellTable { split, left_prob: left_mass / total, cells, cum }))
}

#[cfg(test)]
mod tests {
    use crate::rng::{StreamKey, SubStream};
    use crate::tail_models::IncrementModel;

    fn models() -> Vec<IncrementModel> {
        vec![
            IncrementModel::pareto_centered(2.5).unwrap(),
            IncrementModel::lambda_laplace(4.0).unwrap(),
            IncrementModel::queue(2.5, 0.5).unwrap(),
            IncrementModel::pareto_centered(1.75).unwrap(),
        ]
    }

    #[test]
    fn zero_twist_is_log_cdf() {
        for m in models() {
            for &u in &[0.5, 5.0, 100.0, 1000.0] {
                let t = m.make_twisted(u, 0.0).unwrap();
                let expected = (1.0 - m.tail(u)).ln();
                assert!((t.log_mgf() - expected).abs() < 1e-9, "{m:?} u={u}");
                let q = m.log_mgf_truncated(u, 0.0).unwrap();
                assert!((q - expected).abs() < 1e-9, "{m:?} u={u}");
            }
        }
    }

    #[test]
    fn table_mass_agrees_with_quadrature() {
        for m in models() {
            for &(u, theta) in &[(100.0, 0.069), (1000.0, 0.018), (5.0, 0.4), (20_000.0, 0.001)] {
                let t = m.make_twisted(u, theta).unwrap();
                let q = m.log_mgf_truncated(u, theta).unwrap();
                assert!((t.log_mgf() - q).abs() < 1e-9, "{m:?} u={u}: {} vs {q}", t.log_mgf());
            }
        }
    }

    #[test]
    fn toy_twist() {
        let m = IncrementModel::discrete(&[(-1.0, 0.9), (9.0, 0.1)]).unwrap();
        let t = m.make_twisted(5.0, 1.0).unwrap();
        assert!((t.log_mgf() - (0.9 * (-1f64).exp()).ln()).abs() < 1e-15);
        let mut s = StreamKey::new(1, 0, SubStream::Residual).stream();
        for _ in 0..1000 {
            assert_eq!(t.sample(&mut s), -1.0);
        }
    }

    #[test]
    fn samples_stay_below_threshold_and_match_mean() {
        let n = 1_000_000;
        for (i, m) in models().into_iter().enumerate() {
            let (u, theta) = (100.0, 0.07);
            let t = m.make_twisted(u, theta).unwrap();
            let mut s = StreamKey::new(2, i as u64, SubStream::Residual).stream();
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let x = t.sample(&mut s);
                assert!(x < u);
                sum += x;
                sq += x * x;
            }
            let avg = sum / n as f64;
            let se = ((sq / n as f64 - avg * avg) / n as f64).sqrt();
            let h = 1e-4;
            let deriv = (m.log_mgf_truncated(u, theta + h).unwrap()
                - m.log_mgf_truncated(u, theta - h).unwrap())
                / (2.0 * h);
            assert!((avg - deriv).abs() < 3.5 * se, "{m:?}: {avg} vs {deriv} (se {se})");
        }
    }

    #[test]
    fn log_mgf_is_convex_and_nondecreasing() {
        for m in models() {
            let u = 50.0;
            let grid: Vec<f64> = (0..12).map(|i| 0.02 * i as f64).collect();
            let vals: Vec<f64> = grid.iter().map(|&th| m.log_mgf_truncated(u, th).unwrap()).collect();
            for w in vals.windows(3) {
                assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-9);
            }
            // Slope at 0 is E[X; X < u] / F(u) < 0 for a centered law, so Λ first
            // dips; beyond its minimum it increases.
            let argmin = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            for w in vals[argmin..].windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }
}
