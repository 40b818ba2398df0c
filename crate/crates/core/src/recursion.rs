//! Level-probability calculus of the tournament under ideal comparison.
//!
//! After one CNR the target holds level `a` with probability
//! `Pr(a) + Pr'(a) - Pr(a) S'(a) - Pr'(a) S(a) + Pr(a) Pr'(a)`, where `S` and
//! `S'` are the inclusive prefix sums. When both inputs are identical this
//! becomes `S(a, m + 1) = 1 - (1 - S(a, m))^2`, hence after `p` levels
//! `S(a, p) = 1 - (1 - S(a, 0))^(2^p)`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::cost::EnergySpectrum;
use crate::error::{bail, Result};

/// Largest depth accepted by [`distribution_at`].
pub const MAX_DEPTH: u32 = 62;

const SUM_TOL: f64 = 1e-12;

/// Probabilities `P(a, m)` over levels `a = 1..G` after `m` tournament levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDistribution {
    probs: Vec<f64>,
    depth: u32,
}

impl LevelDistribution {
    pub fn new(probs: Vec<f64>, depth: u32) -> Result<Self> {
        if probs.is_empty() {
            bail!(Argument, "a level distribution needs at least one level");
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            bail!(Argument, "level probabilities must be non-negative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            bail!(Argument, "level probabilities sum to {total}, not 1");
        }
        Ok(LevelDistribution { probs, depth })
    }

    /// Normalizes non-negative weights (e.g. counts) into a distribution.
    pub fn from_weights(weights: &[f64], depth: u32) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|&w| !(w >= 0.0)) {
            bail!(Argument, "weights must be non-negative with a positive sum");
        }
        LevelDistribution::new(weights.iter().map(|w| w / total).collect(), depth)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(a)` for a 1-based level.
    pub fn prob(&self, a: usize) -> f64 {
        self.probs[a - 1]
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Inclusive prefix sums `S(a)`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// Complements `1 - S(a) = sum_{b > a} P(b)`, summed from the top so that
    /// small tails keep their relative precision.
    pub fn tail_sums(&self) -> Vec<f64> {
        let mut tails = alloc::vec![0.0; self.probs.len()];
        let mut acc = 0.0;
        for a in (0..self.probs.len()).rev() {
            tails[a] = acc;
            acc += self.probs[a];
        }
        tails
    }

    /// `sum_{b <= beta + 1} P(b)`, the mass of the first `beta + 1` levels.
    pub fn cumulative(&self, beta: usize) -> f64 {
        self.probs.iter().take(beta + 1).sum()
    }

    /// Total variation distance to another distribution over the same levels.
    pub fn tv_distance(&self, other: &LevelDistribution) -> Result<f64> {
        if self.len() != other.len() {
            bail!(Argument, "distributions have {} and {} levels", self.len(), other.len());
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }
}

/// `P(a, 0) = g_a / 2^n`, the uniform superposition.
pub fn initial_distribution(spec: &EnergySpectrum) -> LevelDistribution {
    let total = spec.total_states() as f64;
    let probs = spec.levels().iter().map(|l| l.degeneracy as f64 / total).collect();
    LevelDistribution { probs, depth: 0 }
}

/// Target-register level law after one CNR on `target` and `support`.
///
/// Evaluated in the equivalent form `Pr(a) T'(a) + Pr'(a) T(a) + Pr(a) Pr'(a)`
/// with tails `T = 1 - S`, so every term is non-negative.
pub fn cnr_combine(target: &LevelDistribution, support: &LevelDistribution) -> Result<LevelDistribution> {
    if target.len() != support.len() {
        bail!(Argument, "target has {} levels, support has {}", target.len(), support.len());
    }
    let t_tail = target.tail_sums();
    let s_tail = support.tail_sums();
    let probs = target
        .probs
        .iter()
        .zip(&support.probs)
        .zip(t_tail.iter().zip(&s_tail))
        .map(|((&p, &q), (&tp, &tq))| p * tq + q * tp + p * q)
        .collect();
    Ok(LevelDistribution { probs, depth: target.depth.max(support.depth) + 1 })
}

/// One tournament level on identical inputs: `cnr_combine(dist, dist)`.
///
/// Levels `a >= 2` use `P(a) (2 T(a) + P(a))`; the ground level takes the
/// complement of their mass. Squaring a distribution doubles any drift of its
/// total mass, so without this repeated steps would walk away from 1.
pub fn step(dist: &LevelDistribution) -> LevelDistribution {
    let tail = dist.tail_sums();
    let mut probs: Vec<f64> = dist
        .probs
        .iter()
        .zip(&tail)
        .map(|(&p, &t)| p * (2.0 * t + p))
        .collect();
    let upper: f64 = probs.iter().skip(1).rev().sum();
    probs[0] = 1.0 - upper;
    LevelDistribution { probs, depth: dist.depth + 1 }
}

/// `P(a, p)` in closed form.
///
/// Tails are `Q(a) = (1 - S(a, 0))^(2^p) = exp(2^p ln(1 - A/N))` with
/// `ln(1 - A/N)` taken from the exact integer ratio, and `P(a) = Q(a-1) - Q(a)`.
pub fn distribution_at(spec: &EnergySpectrum, p: u32) -> Result<LevelDistribution> {
    if p > MAX_DEPTH {
        bail!(Argument, "depth p = {p} exceeds {MAX_DEPTH}");
    }
    let tails = closed_form_tails(spec, p);
    let mut prev = 1.0;
    let probs = tails
        .iter()
        .map(|&q| {
            let pa = prev - q;
            prev = q;
            pa
        })
        .collect();
    Ok(LevelDistribution { probs, depth: p })
}

/// `1 - S(a, p)` for every level, in closed form.
pub fn closed_form_tails(spec: &EnergySpectrum, p: u32) -> Vec<f64> {
    let total = spec.total_states();
    let rounds = Float::powi(2.0, p as i32);
    let mut below = 0u64;
    spec.levels()
        .iter()
        .map(|l| {
            below += l.degeneracy;
            survival(below, total, rounds)
        })
        .collect()
}

/// `(1 - count/total)^rounds`, exact at the endpoints.
pub(crate) fn survival(count: u64, total: u64, rounds: f64) -> f64 {
    if count >= total {
        return 0.0;
    }
    if count == 0 {
        return 1.0;
    }
    let ln_keep = Float::ln_1p(-(count as f64) / total as f64);
    Float::exp(rounds * ln_keep)
}
