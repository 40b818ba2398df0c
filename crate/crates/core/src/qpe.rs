//! Closed-form law of the comparison step.
//!
//! Comparing `|z_t>|z_s>` writes the phase fraction
//! `delta = (C(z_s) - C(z_t)) / (2 pi M)` into a `t`-qubit ancilla through
//! phase estimation. An ancilla string `x = x_1 ... x_t` (with `x_1` most
//! significant) has decimal value `D(x)`. Bins `D(x) >= 2^(t-1)` carry
//! `x_1 = 1` and stand for a negative `delta`, i.e. a better support string.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::cost::EnergySpectrum;
use crate::error::{bail, Result};

/// Guard bits added by [`choose_t`] on top of `ceil(log2(1/b))`.
pub const DEFAULT_GUARD_BITS: u32 = 2;
/// Widest ancilla the closed-form helpers accept.
pub const MAX_ANCILLA_BITS: u32 = 30;

// |2^t delta - D(x)| closer than this to an integer counts as an exact phase.
const EXACT_PHASE_TOL: f64 = 1e-12;

/// Ancilla width `t`, scale factor `M` and accuracy `b` of a CNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnrConfig {
    pub t: u32,
    pub scale: f64,
    pub accuracy: f64,
}

impl CnrConfig {
    pub fn new(t: u32, scale: f64, accuracy: f64) -> Result<Self> {
        if !(2..=MAX_ANCILLA_BITS).contains(&t) {
            bail!(Argument, "ancilla width t = {t} outside [2, {MAX_ANCILLA_BITS}]");
        }
        if !(scale > 0.0 && scale.is_finite()) {
            bail!(Argument, "scale factor M must be positive, got {scale}");
        }
        if !(accuracy > 0.0 && accuracy.is_finite()) {
            bail!(Argument, "accuracy b must be positive, got {accuracy}");
        }
        Ok(CnrConfig { t, scale, accuracy })
    }

    /// A configuration whose accuracy is one `t`-bit step, `2^-t`.
    pub fn with_scale(t: u32, scale: f64) -> Result<Self> {
        CnrConfig::new(t, scale, Float::powi(2.0, -(t.min(MAX_ANCILLA_BITS) as i32)))
    }

    /// Smallest admissible `M` for a cost range: `(C_max - C_min) / 2 pi`.
    pub fn min_scale(range: f64) -> f64 {
        range / (2.0 * PI)
    }

    /// Smallest `M` at which no comparison aliases: `(C_max - C_min) / pi`.
    ///
    /// Phase fractions then lie in `[-1/2, 1/2]`; only a difference of
    /// exactly `+(C_max - C_min)` lands on the ambiguous `+1/2`.
    pub fn alias_free_scale(range: f64) -> f64 {
        range / PI
    }

    pub fn is_alias_free(&self, c_min: f64, c_max: f64) -> bool {
        self.scale > CnrConfig::alias_free_scale(c_max - c_min)
    }

    /// Checks `M >= (C_max - C_min) / 2 pi` for a cost range.
    pub fn validate_range(&self, c_min: f64, c_max: f64) -> Result<()> {
        let bound = CnrConfig::min_scale(c_max - c_min);
        if self.scale < bound {
            bail!(
                Config,
                "scale factor M = {} is below the bound (C_max - C_min)/2pi = {bound}",
                self.scale
            );
        }
        Ok(())
    }

    pub fn validate_for(&self, spec: &EnergySpectrum) -> Result<()> {
        self.validate_range(spec.c_min(), spec.c_max())
    }

    pub fn bins(&self) -> u64 {
        1u64 << self.t
    }
}

/// A phase fraction `delta` in `[-1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PhaseFraction(f64);

impl PhaseFraction {
    pub fn new(delta: f64) -> Result<Self> {
        if !(-0.5..0.5).contains(&delta) {
            bail!(Config, "phase fraction {delta} outside [-1/2, 1/2); M is too small");
        }
        Ok(PhaseFraction(delta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `delta = (c_s - c_t) / (2 pi M)`, rejected when outside `[-1/2, 1/2)`.
pub fn delta_of(config: &CnrConfig, c_t: f64, c_s: f64) -> Result<PhaseFraction> {
    PhaseFraction::new((c_s - c_t) / (2.0 * PI * config.scale))
}

/// The phase fraction the ancilla actually resolves: `delta` reduced mod 1
/// into `[-1/2, 1/2)`.
///
/// Equal to [`delta_of`] whenever that succeeds. A scale factor that only
/// meets `M >= (C_max - C_min) / 2 pi` lets `|delta|` reach 1, and such
/// comparisons alias onto the opposite sign.
pub fn aliased_delta(config: &CnrConfig, c_t: f64, c_s: f64) -> PhaseFraction {
    let raw = (c_s - c_t) / (2.0 * PI * config.scale);
    let wrapped = raw - Float::floor(raw + 0.5);
    PhaseFraction(if wrapped >= 0.5 { wrapped - 1.0 } else { wrapped })
}

// theta = 2^t delta - D(x), split as nearest integer plus remainder.
fn offset(x: u64, delta: PhaseFraction, t: u32) -> (f64, f64) {
    let theta = Float::powi(2.0, t as i32) * delta.0 - x as f64;
    let k = Float::round(theta);
    (k, theta - k)
}

fn exact_bin(k: f64, t: u32) -> bool {
    (k as i64).rem_euclid(1i64 << t) == 0
}

/// Amplitude `phi(x; delta)` of ancilla string `x` after the comparison.
///
/// Evaluated as `e^{i pi theta (1 - 2^-t)} sin(pi theta) / (2^t sin(pi theta / 2^t))`
/// with `theta = 2^t delta - D(x)`, the same quotient as the geometric sum.
/// At an exact phase the result is 1 on the matching bin and 0 elsewhere.
pub fn ancilla_amplitude(x: u64, delta: PhaseFraction, t: u32) -> Complex64 {
    let (k, r) = offset(x, delta, t);
    if r.abs() <= EXACT_PHASE_TOL {
        return if exact_bin(k, t) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let n = Float::powi(2.0, t as i32);
    let theta = k + r;
    let sign = if (k as i64) & 1 == 0 { 1.0 } else { -1.0 };
    let ratio = sign * Float::sin(PI * r) / (n * Float::sin(PI * theta / n));
    Complex64::from_polar(ratio, PI * theta * (1.0 - 1.0 / n))
}

/// `Pr(x; delta) = |phi(x; delta)|^2`.
///
/// Uses `(1 - cos 2a) = 2 sin^2 a` on the cosine quotient, which stays
/// accurate next to the removable singularity.
pub fn ancilla_probability(x: u64, delta: PhaseFraction, t: u32) -> f64 {
    let (k, r) = offset(x, delta, t);
    if r.abs() <= EXACT_PHASE_TOL {
        return if exact_bin(k, t) { 1.0 } else { 0.0 };
    }
    let n = Float::powi(2.0, t as i32);
    let num = Float::sin(PI * r);
    let den = n * Float::sin(PI * (k + r) / n);
    (num * num) / (den * den)
}

/// The literal cosine quotient `(1 - cos 2 pi theta) / (4^t (1 - cos(2 pi theta / 2^t)))`.
///
/// Only meaningful away from exact phases; kept as a cross-check of
/// [`ancilla_probability`].
pub fn ancilla_probability_cosine(x: u64, delta: PhaseFraction, t: u32) -> f64 {
    let n = Float::powi(2.0, t as i32);
    let theta = n * delta.0 - x as f64;
    (1.0 - Float::cos(2.0 * PI * theta)) / (n * n * (1.0 - Float::cos(2.0 * PI * theta / n)))
}

/// Probabilities of all `2^t` ancilla bins, indexed by `D(x)`.
pub fn distribution(delta: PhaseFraction, t: u32) -> Vec<f64> {
    (0..1u64 << t).map(|x| ancilla_probability(x, delta, t)).collect()
}

/// Bin the law peaks at: `round(2^t delta) mod 2^t`.
pub fn peak_bin(delta: PhaseFraction, t: u32) -> u64 {
    let n = 1i64 << t;
    (Float::round(Float::powi(2.0, t as i32) * delta.0) as i64).rem_euclid(n) as u64
}

/// Whether bin `x` has its first ancilla bit set (reads as a negative delta).
pub fn reads_negative(x: u64, t: u32) -> bool {
    x >= 1u64 << (t - 1)
}

/// Probability that the first ancilla bit reports the wrong sign of `delta`.
///
/// `delta = 0` counts as non-negative, so its correct reading is `x_1 = 0`.
pub fn sign_error_prob(delta: PhaseFraction, t: u32) -> f64 {
    let half = 1u64 << (t - 1);
    let wrong = if delta.0 >= 0.0 { half..1u64 << t } else { 0..half };
    wrong.map(|x| ancilla_probability(x, delta, t)).sum()
}

/// Ancilla width for accuracy `b`: `ceil(log2(1/b)) + guard`.
pub fn choose_t(b: f64, guard: u32) -> Result<u32> {
    if !(b > 0.0 && b < 0.5) {
        bail!(Argument, "accuracy b = {b} outside (0, 1/2)");
    }
    let bits = Float::ceil(Float::log2(1.0 / b) - 1e-12);
    Ok(bits as u32 + guard)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf(d: f64) -> PhaseFraction {
        PhaseFraction::new(d).unwrap()
    }

    #[test]
    fn delta_examples() {
        let cfg = CnrConfig::new(7, 45.0 / (2.0 * PI), 2.0 / 45.0).unwrap();
        assert_eq!(delta_of(&cfg, 1.0, 1.0).unwrap().value(), 0.0);
        assert!((delta_of(&cfg, 0.0, 9.0).unwrap().value() - 0.2).abs() < 1e-15);
        // M = 45/2pi sits at the alias-free bound for a range of 22.5
        assert_eq!(delta_of(&cfg, 11.25, -11.25).unwrap().value(), -0.5);
        assert!(matches!(delta_of(&cfg, -11.25, 11.25), Err(crate::Error::Config(_))));
        // at the weaker 2pi bound for a range of 45, extreme differences reach -1
        assert!(delta_of(&cfg, 22.5, -22.5).is_err());
    }

    #[test]
    fn aliasing_wraps_into_range() {
        let cfg = CnrConfig::new(7, 45.0 / (2.0 * PI), 2.0 / 45.0).unwrap();
        for diff in [-44.0, -30.0, -22.5, -9.0, 0.0, 9.0, 22.4, 22.5, 30.0, 44.0] {
            let a = aliased_delta(&cfg, 0.0, diff).value();
            assert!((-0.5..0.5).contains(&a), "{diff} -> {a}");
            let raw = diff / 45.0;
            assert!(((raw - a) - Float::round(raw - a)).abs() < 1e-12);
            if let Ok(d) = delta_of(&cfg, 0.0, diff) {
                assert_eq!(d.value(), a);
            }
        }
        assert!((aliased_delta(&cfg, 0.0, 30.0).value() + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(CnrConfig::new(1, 1.0, 0.1).is_err());
        assert!(CnrConfig::new(4, 0.0, 0.1).is_err());
        assert!(CnrConfig::new(4, 1.0, 0.0).is_err());
        let cfg = CnrConfig::new(7, 45.0 / (2.0 * PI), 2.0 / 45.0).unwrap();
        assert!(cfg.validate_range(-20.0, 24.0).is_ok());
        assert!(cfg.validate_range(-23.0, 23.0).is_err());
    }

    #[test]
    fn exact_phase_amplitudes() {
        for x in 0..4 {
            let a = ancilla_amplitude(x, pf(0.25), 2);
            let want = if x == 1 { 1.0 } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
        assert_eq!(ancilla_amplitude(0, pf(0.0), 3), Complex64::new(1.0, 0.0));
        assert_eq!(ancilla_probability(3, pf(-0.25), 2), 1.0);
        assert!(reads_negative(3, 2));
    }

    #[test]
    fn amplitude_matches_geometric_sum() {
        // direct sum (1/2^t) sum_k e^{2 pi i k (delta - x/2^t)}
        let t = 5;
        for &d in &[0.2333, -0.41, 0.013, -0.5] {
            for x in 0..32u64 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..32 {
                    let ang = 2.0 * PI * k as f64 * (d - x as f64 / 32.0);
                    s += Complex64::from_polar(1.0, ang);
                }
                s /= 32.0;
                let a = ancilla_amplitude(x, pf(d), t);
                assert!((a - s).norm() < 1e-12, "d={d} x={x}: {a} vs {s}");
            }
        }
    }

    #[test]
    fn normalization_at_fig2_setting() {
        let total: f64 = (0..512).map(|x| ancilla_amplitude(x, pf(0.2333), 9).norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fig2_peak() {
        let dist = distribution(pf(0.2333), 9);
        let argmax = (0..512).max_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
        assert_eq!(argmax, 119);
        assert_eq!(peak_bin(pf(0.2333), 9), 119);
        // negative counterpart wraps into the upper half
        assert_eq!(peak_bin(pf(-0.2333), 9), 512 - 119);
    }

    #[test]
    fn cosine_form_agrees_off_singularity() {
        for x in 0..128 {
            let a = ancilla_probability(x, pf(0.1), 7);
            let b = ancilla_probability_cosine(x, pf(0.1), 7);
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sign_error_examples() {
        assert_eq!(sign_error_prob(pf(0.0), 6), 0.0);
        assert_eq!(sign_error_prob(pf(0.25), 4), 0.0);
        // frozen from an independent geometric-sum evaluation; note t = 8 is
        // worse than t = 7 because 2^t * 0.1 sits nearer a half-integer there
        let want = [0.0028274547880092317, 0.00376306793762286, 0.0007247226135221917];
        for (t, w) in (7..=9).zip(want) {
            let e = sign_error_prob(pf(0.1), t);
            assert!((e - w).abs() < 1e-12, "t={t}: {e}");
            assert!(e <= 0.05);
        }
    }

    #[test]
    fn choose_t_examples() {
        assert_eq!(choose_t(2.0 / 45.0, DEFAULT_GUARD_BITS).unwrap(), 7);
        assert_eq!(choose_t(0.25, 0).unwrap(), 2);
        assert_eq!(choose_t(0.01, 2).unwrap(), 9);
        assert!(choose_t(0.5, 2).is_err());
        assert!(choose_t(0.0, 2).is_err());
    }

    fn grid(points: usize) -> impl Iterator<Item = f64> {
        (0..points).map(move |k| -0.5 + k as f64 / points as f64)
    }

    #[test]
    fn normalization_peak_and_consistency() {
        for t in 2..=12 {
            for d in grid(97) {
                let delta = pf(d);
                let dist = distribution(delta, t);
                let total: f64 = dist.iter().sum();
                assert!((total - 1.0).abs() < 1e-10, "t={t} d={d} total={total}");
                let peak = peak_bin(delta, t) as usize;
                assert!(dist[peak] >= 4.0 / (PI * PI) - 1e-12, "t={t} d={d}");
                for (x, &p) in dist.iter().enumerate().step_by(7) {
                    let a = ancilla_amplitude(x as u64, delta, t);
                    assert!((a.norm_sqr() - p).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sign_error_bounded_away_from_edges() {
        // The wrap between +1/2 and -1/2 is indistinguishable to the ancilla,
        // so the guarantee holds on b < |delta| <= 1/2 - b.
        for &b in &[0.2, 0.1, 2.0 / 45.0, 0.01] {
            let t = choose_t(b, DEFAULT_GUARD_BITS).unwrap();
            for d in grid(400).filter(|d| d.abs() > b && d.abs() <= 0.5 - b) {
                let e = sign_error_prob(pf(d), t);
                assert!(e <= 0.05, "b={b} t={t} d={d} err={e}");
            }
        }
    }
}
