//! Quick invariant checks on the shipped models, shared by the command line
//! `property_suite` and the acceptance run.

use crate::crossing::{BlockPmf, BlockRegime, BlockScheme, CrossingEstimator, CrossingProblem};
use crate::error::Result;
use crate::harness::{run, RunOptions};
use crate::ld::{LdEstimator, LdProblem};
use crate::rng::{StreamKey, SubStream};
use crate::tail_models::IncrementModel;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Draws or evaluations the check looked at.
    pub trials: u64,
    pub detail: String,
}

fn check(name: &'static str, trials: u64, failures: Vec<String>) -> PropertyCheck {
    let passed = failures.is_empty();
    let detail = if passed { "ok".into() } else { failures.join("; ") };
    PropertyCheck { name, passed, trials, detail }
}

fn models() -> Result<Vec<IncrementModel>> {
    Ok(vec![
        IncrementModel::pareto_centered(1.75)?,
        IncrementModel::pareto_centered(2.5)?,
        IncrementModel::lambda_laplace(4.0)?,
        IncrementModel::queue(2.5, 0.5)?,
    ])
}

const LEVELS: [f64; 3] = [2.0, 50.0, 1000.0];

/// Runs every check. `draws` scales the sampling-based ones.
pub fn property_suite(seed: u64, draws: u64) -> Result<Vec<PropertyCheck>> {
    let models = models()?;
    let mut out = Vec::new();

    let (mut below, mut above, mut lam0, mut convex) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (mi, m) in models.iter().enumerate() {
        let mut s = StreamKey::new(seed, mi as u64, SubStream::Auxiliary).stream();
        for u in LEVELS {
            let tw = m.make_twisted(u, 1.0 / u)?;
            if let Some(x) = (0..draws).map(|_| tw.sample(&mut s)).find(|&x| x >= u) {
                below.push(format!("model {mi}: twisted draw {x} >= {u}"));
            }
            for _ in 0..draws {
                let x = m.sample_conditional_tail(u, &mut s)?;
                if x < u {
                    above.push(format!("model {mi}: conditional draw {x} < {u}"));
                    break;
                }
            }
            let got = m.make_twisted(u, 0.0)?.log_mgf();
            let want = (-m.tail_at_least(u)).ln_1p();
            if (got - want).abs() > 1e-9 {
                lam0.push(format!("model {mi}, u={u}: {got} vs {want}"));
            }
            let step = 0.05 / u.sqrt();
            let grid = (0..10).map(|i| m.log_mgf_truncated(u, step * i as f64)).collect::<Result<Vec<_>>>()?;
            if grid.windows(3).any(|w| w[0] - 2.0 * w[1] + w[2] < -1e-9 * w[1].abs().max(1.0)) {
                convex.push(format!("model {mi}, u={u}"));
            }
        }
    }
    let cases = (models.len() * LEVELS.len()) as u64;
    out.push(check("twisted_below_threshold", cases * draws, below));
    out.push(check("conditional_above_threshold", cases * draws, above));
    out.push(check("zero_twist_log_cdf", cases, lam0));
    out.push(check("log_mgf_convex", cases * 10, convex));

    let pareto = IncrementModel::pareto_centered;
    let mut tele = Vec::new();
    for (m, regime) in [
        (pareto(2.5)?, BlockRegime::FiniteVariance),
        (pareto(1.75)?, BlockRegime::StrongEfficiency { beta: None, allow_boundary: false }),
        (pareto(1.3)?, BlockRegime::SubStrong { beta: None, gamma: None }),
    ] {
        let p = CrossingProblem::new(m, 1.0, 100.0, BlockScheme::default())?;
        let pmf = BlockPmf::new(&p, regime)?;
        let top = pmf.k_max();
        let sum: f64 = (1..=top).map(|k| pmf.p(k)).sum::<f64>() + pmf.survival(top);
        if (sum - 1.0).abs() > 1e-12 {
            tele.push(format!("{regime}: {sum}"));
        }
    }
    out.push(check("block_pmf_telescopes", 3, tele));

    // The samplers assert these bounds themselves; a violation surfaces as a panic.
    let ld = LdEstimator::new(LdProblem::new(models[2].clone(), 100, 100.0)?)?;
    let queue = &models[3];
    let p = CrossingProblem::new(queue.clone(), CrossingProblem::queue_drift(queue).unwrap_or(1.0), 100.0, BlockScheme::default())?;
    let cross = CrossingEstimator::new(p.clone(), BlockRegime::FiniteVariance)?;
    let mut bounds = Vec::new();
    for i in 0..draws {
        let mut s = StreamKey::new(seed, i, SubStream::Auxiliary).stream();
        let z = ld.sample_dom(&mut s)?.value;
        if z > ld.n_tail() {
            bounds.push(format!("Z_dom {z} > {}", ld.n_tail()));
        }
        let k = 1 + (i % 8) as u32;
        let cap3 = p.scheme.n(k) as f64 * p.model.tail_at_least(p.b + p.scheme.n(k - 1) as f64 * p.mu);
        let z1 = cross.sample_zk1(k, &mut s)?.value;
        let z3 = cross.sample_zk3(k, &mut s)?.value;
        if z1 > cross.q(k) || z3 > cap3 {
            bounds.push(format!("block {k}: z1 {z1}, z3 {z3}"));
        }
        if bounds.len() > 3 {
            break;
        }
    }
    out.push(check("estimator_bounds", 3 * draws, bounds));

    let reps = draws.min(2000);
    let one = run(&cross, reps, seed, RunOptions { threads: 1, chunk: 64 });
    let four = run(&cross, reps, seed, RunOptions { threads: 4, chunk: 64 });
    let same = match (one, four) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    let failures = if same { Vec::new() } else { vec!["1 and 4 threads disagree".into()] };
    out.push(check("thread_determinism", 2 * reps, failures));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let checks = property_suite(3, 300).unwrap();
        assert_eq!(checks.len(), 7);
        for c in checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
