//! Approximation quality, probability bounds and the bound-line construction.
//!
//! `U(1, beta)` is the neighborhood made of the first `beta + 1` levels and
//! `A_beta` the number of strings in it. After `p` levels the tournament
//! lands in `U(1, beta)` with probability `1 - (1 - A_beta / 2^n)^(2^p)`.

use num_traits::Float;

use crate::cost::EnergySpectrum;
use crate::error::{bail, Result};
use crate::recursion::{distribution_at, survival, LevelDistribution, MAX_DEPTH};

/// `alpha_R(a) = (E_a - E_1) / (E_G - E_1)`.
pub fn relative_error(spec: &EnergySpectrum, a: usize) -> Result<f64> {
    let range = spec.c_max() - spec.c_min();
    if !(range > 0.0) {
        bail!(Undefined, "relative error needs a non-constant cost");
    }
    if a == 0 || a > spec.num_levels() {
        bail!(Argument, "level {a} outside 1..={}", spec.num_levels());
    }
    Ok((spec.energy(a) - spec.c_min()) / range)
}

fn check_beta(spec: &EnergySpectrum, beta: usize) -> Result<()> {
    if beta >= spec.num_levels() {
        bail!(Argument, "beta = {beta} must be below G = {}", spec.num_levels());
    }
    Ok(())
}

fn check_depth(p: u32) -> Result<()> {
    if p > MAX_DEPTH {
        bail!(Argument, "depth p = {p} exceeds {MAX_DEPTH}");
    }
    Ok(())
}

/// `1 - (1 - a_beta / total)^(2^p)`.
pub fn cumulative_prob_counts(total: u64, a_beta: u64, p: u32) -> f64 {
    1.0 - cumulative_complement_counts(total, a_beta, p)
}

/// `(1 - a_beta / total)^(2^p)`, the mass outside the neighborhood.
pub fn cumulative_complement_counts(total: u64, a_beta: u64, p: u32) -> f64 {
    survival(a_beta, total, Float::powi(2.0, p as i32))
}

/// `P(U(1, beta), p)` in closed form.
pub fn cumulative_prob(spec: &EnergySpectrum, beta: usize, p: u32) -> Result<f64> {
    Ok(1.0 - cumulative_complement(spec, beta, p)?)
}

pub fn cumulative_complement(spec: &EnergySpectrum, beta: usize, p: u32) -> Result<f64> {
    check_beta(spec, beta)?;
    check_depth(p)?;
    Ok(cumulative_complement_counts(spec.total_states(), spec.neighborhood_count(beta), p))
}

/// `1 - exp(-2^p a_beta / 2^n)`, a lower bound of the cumulative probability.
pub fn cumulative_lower_bound(n: u32, a_beta: u64, p: u32) -> f64 {
    let x = Float::powi(2.0, p as i32 - n as i32) * a_beta as f64;
    -Float::exp_m1(-x)
}

/// Smallest `p >= 0` with `p >= log2((2^n / a_beta) ln(1 / (1 - eta)))`.
///
/// Any such `p` guarantees a cumulative probability of at least `eta`.
pub fn min_p_for(eta: f64, n: u32, a_beta: u64) -> Result<u32> {
    if !(eta > 0.0 && eta < 1.0) {
        bail!(Argument, "acceptance probability eta = {eta} outside (0, 1)");
    }
    if a_beta == 0 {
        bail!(Argument, "A_beta must be at least 1");
    }
    let x = Float::powi(2.0, n as i32) / a_beta as f64 * -Float::ln_1p(-eta);
    if x <= 1.0 {
        return Ok(0);
    }
    Ok(Float::ceil(Float::log2(x)) as u32)
}

/// `(1 / P(U)) sum_{i <= beta + 1} P(i, p) alpha_R(i)`.
pub fn avg_relative_error(spec: &EnergySpectrum, beta: usize, p: u32) -> Result<f64> {
    check_beta(spec, beta)?;
    let dist = distribution_at(spec, p)?;
    avg_relative_error_of(spec, &dist, beta)
}

/// Average relative error inside `U(1, beta)` for any level distribution.
pub fn avg_relative_error_of(spec: &EnergySpectrum, dist: &LevelDistribution, beta: usize) -> Result<f64> {
    check_beta(spec, beta)?;
    if beta == 0 {
        return Ok(0.0);
    }
    let mass = dist.cumulative(beta);
    if !(mass > 0.0) {
        bail!(Undefined, "no probability mass on U(1, {beta})");
    }
    let mut acc = 0.0;
    for a in 1..=beta + 1 {
        acc += dist.prob(a) * relative_error(spec, a)?;
    }
    Ok(acc / mass)
}

/// `Pr(beta + 1 | U(1, beta)) = P(beta + 1, p) / P(U(1, beta), p)`.
pub fn worst_case_conditional(spec: &EnergySpectrum, beta: usize, p: u32) -> Result<f64> {
    check_beta(spec, beta)?;
    let dist = distribution_at(spec, p)?;
    worst_case_conditional_of(&dist, beta)
}

pub fn worst_case_conditional_of(dist: &LevelDistribution, beta: usize) -> Result<f64> {
    let mass = dist.cumulative(beta);
    if !(mass > 0.0) {
        bail!(Undefined, "no probability mass on U(1, {beta})");
    }
    Ok(dist.prob(beta + 1) / mass)
}

/// Largest `beta` whose top level still has `alpha_R <= eps_r`, from the true
/// energies.
pub fn beta_from_energies(spec: &EnergySpectrum, eps_r: f64) -> Result<usize> {
    let range = spec.c_max() - spec.c_min();
    if !(range > 0.0) {
        bail!(Undefined, "relative error needs a non-constant cost");
    }
    let within = spec
        .levels()
        .iter()
        .take_while(|l| (l.energy - spec.c_min()) / range <= eps_r)
        .count();
    Ok(within - 1)
}

/// Quality figures of a neighborhood `U(1, beta)` after `p` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodReport {
    pub beta: usize,
    pub a_beta: u64,
    pub p: u32,
    pub cum_prob: f64,
    /// `1 - cum_prob`, computed directly.
    pub cum_complement: f64,
    pub lower_bound: f64,
    pub avg_rel_error: f64,
    pub worst_case_cond: f64,
}

impl NeighborhoodReport {
    pub fn compute(spec: &EnergySpectrum, beta: usize, p: u32) -> Result<Self> {
        check_beta(spec, beta)?;
        let dist = distribution_at(spec, p)?;
        let a_beta = spec.neighborhood_count(beta);
        let cum_complement = cumulative_complement(spec, beta, p)?;
        let n = match spec.n_bits() {
            Some(n) => n as u32,
            None => bail!(Argument, "the lower bound needs a spectrum over 2^n strings"),
        };
        Ok(NeighborhoodReport {
            beta,
            a_beta,
            p,
            cum_prob: 1.0 - cum_complement,
            cum_complement,
            lower_bound: cumulative_lower_bound(n, a_beta, p),
            avg_rel_error: avg_relative_error_of(spec, &dist, beta)?,
            worst_case_cond: worst_case_conditional_of(&dist, beta)?,
        })
    }
}

/// A straight line through `(1, E_1)`: `E(a) = e1 + slope (a - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub e1: f64,
    pub slope: f64,
}

impl Affine {
    pub fn eval(&self, a: f64) -> f64 {
        self.e1 + self.slope * (a - 1.0)
    }
}

/// The steepest chord from the ground level, `E^C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLine {
    /// Level `a~` attaining the largest slope (smallest such level on ties).
    pub a_tilde: usize,
    pub line: Affine,
}

/// `E^C(a) = E_1 + (E_a~ - E_1) / (a~ - 1) (a - 1)`, the lowest-slope line
/// through `(1, E_1)` lying on or above every level.
pub fn critical_line(spec: &EnergySpectrum) -> Result<CriticalLine> {
    if spec.num_levels() < 2 {
        bail!(Undefined, "a critical line needs at least two levels");
    }
    let e1 = spec.c_min();
    let mut a_tilde = 2;
    let mut best = spec.energy(2) - e1;
    for a in 3..=spec.num_levels() {
        let slope = (spec.energy(a) - e1) / (a - 1) as f64;
        if slope > best + 1e-12 * best.abs().max(1.0) {
            best = slope;
            a_tilde = a;
        }
    }
    Ok(CriticalLine { a_tilde, line: Affine { e1, slope: best } })
}

/// `floor(eps_r (C_max - C_min) (a~ - 1) / (E_a~ - E_1))`, the widest
/// neighborhood certified by a bound line above `E^C`.
pub fn beta_upper_bound(spec: &EnergySpectrum, eps_r: f64) -> Result<usize> {
    if !(eps_r > 0.0 && eps_r <= 1.0) {
        bail!(Argument, "eps_r = {eps_r} outside (0, 1]");
    }
    let crit = critical_line(spec)?;
    let x = eps_r * (spec.c_max() - spec.c_min()) / crit.line.slope;
    // absorb rounding when x is an exact integer
    Ok(Float::floor(x * (1.0 + 1e-12)) as usize)
}

/// `E^B(a) = E_1 + eps_r (C_max - C_min) / beta (a - 1)`.
pub fn bound_line(spec: &EnergySpectrum, eps_r: f64, beta: usize) -> Result<Affine> {
    let max = beta_upper_bound(spec, eps_r)?;
    if beta == 0 || beta > max {
        bail!(Argument, "beta = {beta} outside 1..={max}; the line would cross below E^C");
    }
    Ok(Affine { e1: spec.c_min(), slope: eps_r * (spec.c_max() - spec.c_min()) / beta as f64 })
}

/// Critical and bound lines for one `eps_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundLines {
    pub a_tilde: usize,
    pub critical_slope: f64,
    pub e_critical: Affine,
    /// `None` when `beta_max = 0`, the vertical-line case.
    pub e_bound: Option<Affine>,
    pub beta_max: usize,
}

impl BoundLines {
    /// Lines for `eps_r`, with `E^B` drawn at the largest admissible beta.
    pub fn build(spec: &EnergySpectrum, eps_r: f64) -> Result<Self> {
        let crit = critical_line(spec)?;
        let beta_max = beta_upper_bound(spec, eps_r)?;
        let e_bound = if beta_max == 0 { None } else { Some(bound_line(spec, eps_r, beta_max)?) };
        Ok(BoundLines {
            a_tilde: crit.a_tilde,
            critical_slope: crit.line.slope,
            e_critical: crit.line,
            e_bound,
            beta_max,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::DEFAULT_GROUPING_TOL;
    use crate::generators::{gen_gaussian, gen_max2xor};
    use proptest::prelude::*;

    fn spec(levels: &[(f64, u64)]) -> EnergySpectrum {
        EnergySpectrum::from_levels(levels).unwrap()
    }

    #[test]
    fn relative_error_examples() {
        let s = spec(&[(-3.0, 1), (1.0, 2), (5.0, 1)]);
        assert_eq!(relative_error(&s, 1).unwrap(), 0.0);
        assert_eq!(relative_error(&s, 2).unwrap(), 0.5);
        assert_eq!(relative_error(&s, 3).unwrap(), 1.0);
        let flat = spec(&[(2.0, 4)]);
        assert!(matches!(relative_error(&flat, 1), Err(crate::Error::Undefined(_))));
    }

    #[test]
    fn cumulative_table_values() {
        assert!((cumulative_prob_counts(1024, 58, 6) - 0.9760).abs() < 5e-5);
        assert!((cumulative_prob_counts(1024, 144, 4) - 0.9115).abs() < 5e-5);
        // E^B rows at p = 9
        assert!((cumulative_prob_counts(1024, 12, 9) - 0.9976).abs() < 5e-5);
        assert!(cumulative_prob_counts(1024, 28, 9) > 0.99995);
        let s = spec(&[(0.0, 3), (1.0, 5), (2.0, 8)]);
        assert_eq!(cumulative_prob(&s, 1, 0).unwrap(), 0.5);
        assert!(cumulative_prob(&s, 3, 0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        for n in [4u32, 10, 20, 40] {
            let lb = cumulative_lower_bound(n, 1, n + 3);
            assert!((lb - (1.0 - (-8.0f64).exp())).abs() < 1e-15);
            assert!((lb - 0.9997).abs() < 5e-5);
        }
        let lb = cumulative_lower_bound(10, 58, 4);
        assert!((lb - (1.0 - (-0.90625f64).exp())).abs() < 1e-15);
        assert!((lb - 0.596).abs() < 5e-4);
        assert!(lb <= cumulative_prob_counts(1024, 58, 4));
        let seq: alloc::vec::Vec<f64> = (0..30).map(|p| cumulative_lower_bound(10, 1, p)).collect();
        assert!(seq.windows(2).all(|w| w[1] >= w[0]));
        assert!((seq[29] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn min_p_examples() {
        assert_eq!(min_p_for(0.9, 10, 58).unwrap(), 6);
        assert!(cumulative_prob_counts(1024, 58, 5) < 0.9);
        assert_eq!(min_p_for(1e-9, 10, 58).unwrap(), 0);
        assert_eq!(min_p_for(0.5, 10, 1024).unwrap(), 0);
        assert!(min_p_for(1.0, 10, 58).is_err());
        assert!(min_p_for(0.0, 10, 58).is_err());
    }

    #[test]
    fn two_level_hand_recursion() {
        // P(., 1) = [3/4, 1/4] on energies (0, 1)
        let s = spec(&[(0.0, 1), (1.0, 1)]);
        assert_eq!(avg_relative_error(&s, 1, 1).unwrap(), 0.25);
        assert_eq!(worst_case_conditional(&s, 1, 1).unwrap(), 0.25);
        assert_eq!(avg_relative_error(&s, 0, 1).unwrap(), 0.0);
        assert_eq!(worst_case_conditional(&s, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn critical_line_examples() {
        let s = spec(&[(0.0, 1), (1.0, 1), (4.0, 1)]);
        let c = critical_line(&s).unwrap();
        assert_eq!(c.a_tilde, 3);
        assert_eq!(c.line.slope, 2.0);
        assert_eq!(c.line.eval(1.0), 0.0);
        assert_eq!(beta_upper_bound(&s, 0.5).unwrap(), 1);
        assert_eq!(beta_upper_bound(&s, 0.1).unwrap(), 0);

        let affine = spec(&[(1.0, 1), (2.0, 1), (3.0, 1), (4.0, 1)]);
        let c = critical_line(&affine).unwrap();
        assert_eq!(c.a_tilde, 2);
        for a in 1..=4 {
            assert_eq!(c.line.eval(a as f64), affine.energy(a));
        }
        assert!(critical_line(&spec(&[(0.0, 2)])).is_err());
    }

    #[test]
    fn bound_line_endpoints() {
        let s = spec(&[(0.0, 1), (0.5, 2), (1.0, 1), (1.2, 3), (4.0, 1), (10.0, 1)]);
        let eps = 0.3;
        let max = beta_upper_bound(&s, eps).unwrap();
        assert!(max >= 1);
        for beta in 1..=max {
            let line = bound_line(&s, eps, beta).unwrap();
            assert_eq!(line.eval(1.0), s.c_min());
            let top = line.eval((beta + 1) as f64);
            assert!(((top - s.c_min()) / (s.c_max() - s.c_min()) - eps).abs() < 1e-12);
        }
        assert!(bound_line(&s, eps, 0).is_err());
        assert!(bound_line(&s, eps, max + 1).is_err());
        let lines = BoundLines::build(&s, eps).unwrap();
        assert_eq!(lines.beta_max, max);
        assert!(BoundLines::build(&s, 1e-6).unwrap().e_bound.is_none());
    }

    #[test]
    fn report_fields_are_consistent() {
        let inst = gen_gaussian(8, 3).unwrap();
        let s = EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL).unwrap();
        let beta = beta_from_energies(&s, 0.2).unwrap();
        for p in 0..8 {
            let r = NeighborhoodReport::compute(&s, beta, p).unwrap();
            assert!(r.a_beta >= (beta + 1) as u64);
            assert!(r.cum_prob >= r.lower_bound);
            assert!((0.0..=1.0).contains(&r.worst_case_cond));
            assert!((r.cum_prob + r.cum_complement - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn family_trends_are_nonincreasing() {
        for inst in [gen_gaussian(10, 11).unwrap(), gen_max2xor(10, 0.6, 11).unwrap()] {
            let s = EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL).unwrap();
            let beta = beta_from_energies(&s, 0.2).unwrap();
            let rows: alloc::vec::Vec<NeighborhoodReport> =
                (4..=9).map(|p| NeighborhoodReport::compute(&s, beta, p).unwrap()).collect();
            for w in rows.windows(2) {
                assert!(w[1].avg_rel_error <= w[0].avg_rel_error);
                assert!(w[1].worst_case_cond <= w[0].worst_case_cond);
                assert!(w[1].cum_prob >= w[0].cum_prob);
            }
        }
    }

    fn arb_spectrum() -> impl Strategy<Value = EnergySpectrum> {
        proptest::collection::vec((0.01f64..5.0, 1u64..6), 2..30).prop_map(|steps| {
            let mut e = -3.0;
            let levels: alloc::vec::Vec<(f64, u64)> = steps
                .iter()
                .map(|&(de, g)| {
                    e += de;
                    (e, g)
                })
                .collect();
            EnergySpectrum::from_levels(&levels).unwrap()
        })
    }

    proptest! {
        #[test]
        fn lines_are_ordered(s in arb_spectrum(), eps in 0.01f64..=1.0) {
            let crit = critical_line(&s).unwrap();
            for a in 1..=s.num_levels() {
                let ec = crit.line.eval(a as f64);
                prop_assert!(ec >= s.energy(a) - 1e-9 * (1.0 + ec.abs()));
            }
            let max = beta_upper_bound(&s, eps).unwrap();
            prop_assert!(max < s.num_levels());
            if max >= 1 {
                let eb = bound_line(&s, eps, max).unwrap();
                for a in 1..=max + 1 {
                    let (b, c) = (eb.eval(a as f64), crit.line.eval(a as f64));
                    prop_assert!(b >= c - 1e-9 * (1.0 + c.abs()));
                }
                // conservative against the true-energy neighborhood
                prop_assert!(max <= beta_from_energies(&s, eps * (1.0 + 1e-12)).unwrap());
            }
        }

        #[test]
        fn cumulative_dominates_lower_bound(n in 1u32..30, frac in 0.0f64..1.0, p in 0u32..40) {
            let total = 1u64 << n;
            let a = ((frac * total as f64) as u64).clamp(1, total);
            prop_assert!(cumulative_prob_counts(total, a, p) >= cumulative_lower_bound(n, a, p) - 1e-15);
        }

        #[test]
        fn min_p_suffices(n in 1u32..=20, frac in 0.0f64..1.0, eta in 0.001f64..0.999) {
            let total = 1u64 << n;
            let a = ((frac * total as f64) as u64).clamp(1, total);
            let p = min_p_for(eta, n, a).unwrap();
            prop_assert!(cumulative_prob_counts(total, a, p) >= eta);
        }
    }
}
