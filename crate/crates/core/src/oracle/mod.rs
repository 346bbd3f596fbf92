//! Ground truth for tests: exhaustive enumeration of discrete walks, naive
//! simulation and the classical asymptotic approximations.
//!
//! Nothing here calls into the estimators; the enumerations only read the
//! atoms of the discrete law.

use crate::crossing::CrossingProblem;
use crate::error::{param, Error, Result};
use crate::harness::{run, RunError, RunOptions, RunStats};
use crate::rng::{NeumaierSum, StreamKey, SubStream};
use crate::sample::EstimatorSample;
use crate::tail_models::{DiscreteToy, IncrementModel};

/// Largest number of paths an enumeration may visit.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Exact probabilities for `S_n > b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdEnumeration {
    /// `Pr{S_n > b}`
    pub probability: f64,
    /// `Pr{S_n > b, max X_i >= b}`
    pub dominant: f64,
    /// `Pr{S_n > b, max X_i < b}`
    pub residual: f64,
    pub outcome_count: u64,
}

/// Exact probabilities for the block event `n_(k-1) < τ_b <= n_k` and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEnumeration {
    pub block: f64,
    /// Some `X_i >= b + iμ` with `n_(k-1) < i <= τ_b`.
    pub big_jump: f64,
    /// Every `X_i < b + n_(k-1) μ` for `i <= τ_b`.
    pub bounded: f64,
    pub mixed: f64,
    pub outcome_count: u64,
}

fn path_count(atoms: usize, n: u64) -> Result<u64> {
    let count = (atoms as f64).powf(n as f64);
    if count > ENUMERATION_LIMIT as f64 {
        return Err(Error::EnumerationTooLarge { outcomes: count, limit: ENUMERATION_LIMIT });
    }
    Ok((atoms as u64).pow(n as u32))
}

/// Calls `visit(values, probability)` for every path of length `n`.
fn for_each_path(toy: &DiscreteToy, n: u64, mut visit: impl FnMut(&[f64], f64)) -> Result<u64> {
    let atoms = toy.atoms();
    let total = path_count(atoms.len(), n)?;
    let n = n as usize;
    let mut digits = vec![0usize; n];
    let mut values = vec![0.0; n];
    for _ in 0..total {
        let mut p = 1.0;
        for (slot, &d) in values.iter_mut().zip(&digits) {
            *slot = atoms[d].0;
            p *= atoms[d].1;
        }
        visit(&values, p);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < atoms.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(total)
}

pub fn enumerate_ld(toy: &DiscreteToy, n: u64, b: f64) -> Result<LdEnumeration> {
    let (mut dom, mut res) = (NeumaierSum::default(), NeumaierSum::default());
    let outcome_count = for_each_path(toy, n, |xs, p| {
        if xs.iter().sum::<f64>() > b {
            if xs.iter().any(|&x| x >= b) {
                dom.add(p);
            } else {
                res.add(p);
            }
        }
    })?;
    let (dominant, residual) = (dom.value(), res.value());
    Ok(LdEnumeration { probability: dominant + residual, dominant, residual, outcome_count })
}

pub fn enumerate_block(toy: &DiscreteToy, k: u32, b: f64, mu: f64, r: u64) -> Result<BlockEnumeration> {
    if k == 0 || r < 2 {
        return Err(param("block enumeration needs k >= 1 and r >= 2"));
    }
    let hi = r.checked_pow(k).ok_or(Error::BlockOverflow { k })?;
    let lo = hi / r * u64::from(k > 1);
    let u = b + lo as f64 * mu;
    let (mut a, mut bb, mut c) = (NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default());
    let outcome_count = for_each_path(toy, hi, |xs, p| {
        let mut s = 0.0;
        for (idx, &x) in xs.iter().enumerate() {
            let i = idx as u64 + 1;
            s += x;
            if s - i as f64 * mu > b {
                if i > lo {
                    let upto = &xs[..idx + 1];
                    let crossing_jump =
                        upto.iter().enumerate().skip(lo as usize).any(|(m, &y)| y >= b + (m as u64 + 1) as f64 * mu);
                    if crossing_jump {
                        a.add(p);
                    } else if upto.iter().all(|&y| y < u) {
                        bb.add(p);
                    } else {
                        c.add(p);
                    }
                }
                return;
            }
        }
    })?;
    let (big_jump, bounded, mixed) = (a.value(), bb.value(), c.value());
    Ok(BlockEnumeration { block: big_jump + bounded + mixed, big_jump, bounded, mixed, outcome_count })
}

/// Naive finite-horizon simulation of the block event and its three parts.
///
/// The result's mean is `Pr{n_(k-1) < τ_b <= n_k}`; the components `"a"`,
/// `"b"`, `"c"` estimate the three parts.
pub fn naive_mc_block(
    problem: &CrossingProblem,
    k: u32,
    paths: u64,
    seed: u64,
    budget: u128,
    opts: RunOptions,
) -> Result<RunStats> {
    if k == 0 || k > problem.scheme.k_max() {
        return Err(Error::BlockOverflow { k });
    }
    let (lo, hi) = (problem.scheme.n(k - 1), problem.scheme.n(k));
    let requested = hi as u128 * paths as u128;
    if requested > budget {
        return Err(Error::WorkBudget { requested, budget });
    }
    let (b, mu) = (problem.b, problem.mu);
    let u = b + lo as f64 * mu;
    let model: &IncrementModel = &problem.model;
    let path = |seed: u64, index: u64| -> Result<EstimatorSample> {
        let mut rng = StreamKey::new(seed, index, SubStream::Naive).stream();
        let (mut s, mut crossing_jump, mut big) = (0.0, false, false);
        for i in 1..=hi {
            let x = model.sample(&mut rng);
            s += x;
            big |= x >= u;
            crossing_jump |= i > lo && x >= b + i as f64 * mu;
            if s - i as f64 * mu > b {
                let hit = f64::from(u8::from(i > lo));
                let (a, bb, c) = if crossing_jump {
                    (hit, 0.0, 0.0)
                } else if !big {
                    (0.0, hit, 0.0)
                } else {
                    (0.0, 0.0, hit)
                };
                return Ok(EstimatorSample::combine([
                    EstimatorSample::single("a", a, i, i),
                    EstimatorSample::single("b", bb, 0, 0),
                    EstimatorSample::single("c", c, 0, 0),
                ]));
            }
        }
        Ok(EstimatorSample::combine([
            EstimatorSample::single("a", 0.0, hi, hi),
            EstimatorSample::single("b", 0.0, 0, 0),
            EstimatorSample::single("c", 0.0, 0, 0),
        ]))
    };
    run(&path, paths, seed, opts).map_err(|e: RunError| e.source.unwrap_or(Error::Parameter(e.message)))
}

/// `n Pr{X > b}`, the single-big-jump approximation of `Pr{S_n > b}`.
pub fn ld_baseline(model: &IncrementModel, n: u64, b: f64) -> f64 {
    n as f64 * model.tail(b)
}

/// `F_I(b) / μ`, the classical approximation of `Pr{τ_b < ∞}`.
pub fn crossing_baseline(model: &IncrementModel, mu: f64, b: f64) -> f64 {
    model.integrated_tail(b) / mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossing::BlockScheme;

    fn toy() -> DiscreteToy {
        DiscreteToy::new(&[(-1.0, 0.9), (9.0, 0.1)]).unwrap()
    }

    #[test]
    fn ld_hand_values() {
        let e = enumerate_ld(&toy(), 2, 7.0).unwrap();
        assert!((e.probability - 0.19).abs() < 1e-15);
        assert_eq!(e.outcome_count, 4);
        assert_eq!(enumerate_ld(&toy(), 2, 18.5).unwrap().probability, 0.0);
        assert!((enumerate_ld(&toy(), 2, -2.5).unwrap().probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permutation_invariant() {
        let t2 = DiscreteToy::new(&[(9.0, 0.1), (-1.0, 0.9)]).unwrap();
        assert_eq!(enumerate_ld(&toy(), 4, 8.5).unwrap(), enumerate_ld(&t2, 4, 8.5).unwrap());
    }

    #[test]
    fn too_large_is_refused() {
        assert!(matches!(enumerate_ld(&toy(), 30, 1.0), Err(Error::EnumerationTooLarge { .. })));
    }

    #[test]
    fn block_hand_values() {
        // n_1 = 2, b = 3, μ = 1: crossing at 1 needs X_1 = 9; at 2 needs
        // X_1 = -1, X_2 = 9 (sum 8 - 2 > 3).
        let e = enumerate_block(&toy(), 1, 3.0, 1.0, 2).unwrap();
        assert!((e.block - (0.1 + 0.9 * 0.1)).abs() < 1e-15);
        assert!((e.big_jump - e.block).abs() < 1e-15);
        // too far to reach within two steps
        assert_eq!(enumerate_block(&toy(), 1, 30.0, 1.0, 2).unwrap().block, 0.0);
    }

    #[test]
    fn naive_agrees_with_enumeration() {
        let t = toy();
        let model = IncrementModel::DiscreteToy(t.clone());
        let p = CrossingProblem::new(model, 0.5, 3.0, BlockScheme::new(2).unwrap()).unwrap();
        let exact = enumerate_block(&t, 2, 3.0, 0.5, 2).unwrap();
        let mc = naive_mc_block(&p, 2, 200_000, 5, u128::MAX, RunOptions::default()).unwrap();
        assert!((mc.mean - exact.block).abs() < 4.0 * mc.std_error);
        let a = mc.component_mean("a").unwrap();
        assert!((a - exact.big_jump).abs() < 4.0 * (exact.big_jump / 200_000.0).sqrt());
    }

    #[test]
    fn naive_budget_and_zero_block() {
        let model = IncrementModel::DiscreteToy(toy());
        let p = CrossingProblem::new(model, 0.5, 300.0, BlockScheme::new(2).unwrap()).unwrap();
        assert!(matches!(
            naive_mc_block(&p, 3, 1000, 1, 100, RunOptions::default()),
            Err(Error::WorkBudget { .. })
        ));
        let z = naive_mc_block(&p, 1, 1000, 1, u128::MAX, RunOptions::default()).unwrap();
        assert_eq!((z.mean, z.std_error), (0.0, 0.0));
    }

    #[test]
    fn baselines() {
        let m = IncrementModel::queue(2.5, 0.5).unwrap();
        let v = crossing_baseline(&IncrementModel::pareto_service(2.5).unwrap(), 2.0 / 3.0, 1000.0);
        assert!((v - 1001f64.powf(-1.5)).abs() < 1e-18);
        assert!((v - 3.16e-5).abs() < 1e-7);
        assert_eq!(ld_baseline(&m, 0, 10.0), 0.0);
    }
}
