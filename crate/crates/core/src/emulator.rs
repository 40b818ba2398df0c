//! Classical Monte Carlo of the CNR tournament.
//!
//! Basis components with different register contents never interfere, so the
//! final target register is distributed like the winner of a knockout
//! bracket over `2^p` uniform strings. At each match the target takes the
//! support's string when the support is strictly cheaper ([`Mode::IdealSign`])
//! or when a sampled phase-estimation readout has its top bit set
//! ([`Mode::QpeSampled`]).
//!
//! Samples are split into chunks of [`CHUNK_SAMPLES`]. Chunk `c` draws leaf
//! strings from `ChaCha8Rng::seed_from_u64(seed)` on stream `2c` and readout
//! uniforms on stream `2c + 1`, so any worker can run any chunk, the merged
//! tally does not depend on scheduling, and both modes see the same leaves.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cost::{EnergySpectrum, ProblemInstance};
use crate::error::{bail, Result};
use crate::metrics::{avg_relative_error_of, relative_error, worst_case_conditional_of};
use crate::qpe::{aliased_delta, ancilla_probability, peak_bin, CnrConfig, PhaseFraction};
use crate::recursion::{distribution_at, LevelDistribution};

pub const MAX_EMULATOR_BITS: usize = 30;
pub const CHUNK_SAMPLES: u64 = 1 << 16;
/// Upper limit on `samples * 2^p` leaf draws.
pub const MAX_LEAF_DRAWS: u128 = 1 << 42;
const TABLE_BITS: usize = 20;
const CACHE_FLOATS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    IdealSign,
    QpeSampled,
}

/// Which survivors meet at each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// `(0,1), (2,3), ...` as in the circuit layout.
    Adjacent,
    /// `(i, i + half)`.
    Strided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmulatorRun<'a> {
    pub instance: &'a ProblemInstance,
    pub config: CnrConfig,
    pub p: u32,
    pub samples: u64,
    pub seed: u64,
    pub mode: Mode,
    pub pairing: Pairing,
}

impl<'a> EmulatorRun<'a> {
    /// Ideal-sign run with adjacent pairing.
    pub fn new(instance: &'a ProblemInstance, config: CnrConfig, p: u32, samples: u64, seed: u64) -> Self {
        EmulatorRun { instance, config, p, samples, seed, mode: Mode::IdealSign, pairing: Pairing::Adjacent }
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        EmulatorRun { mode, ..self }
    }

    pub fn with_pairing(self, pairing: Pairing) -> Self {
        EmulatorRun { pairing, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            bail!(Argument, "need at least one sample");
        }
        let n = self.instance.n();
        if n > MAX_EMULATOR_BITS {
            bail!(Resource, "emulator supports n <= {MAX_EMULATOR_BITS}, got {n}");
        }
        if self.p >= 64 || (self.samples as u128) << self.p > MAX_LEAF_DRAWS {
            bail!(Resource, "{} samples at p = {} exceed the leaf-draw budget", self.samples, self.p);
        }
        Ok(())
    }

    pub fn num_chunks(&self) -> u64 {
        self.samples.div_ceil(CHUNK_SAMPLES)
    }

    /// Validates the run and precomputes what the chunks share.
    pub fn prepare(&self) -> Result<PreparedRun<'a>> {
        self.validate()?;
        let table = if self.instance.n() <= TABLE_BITS { Some(self.instance.energy_table()?) } else { None };
        if let (Mode::QpeSampled, Some(tab)) = (self.mode, &table) {
            let lo = tab.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = tab.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            self.config.validate_range(lo, hi)?;
        }
        Ok(PreparedRun { run: *self, table })
    }
}

/// A validated run with its energy table.
#[derive(Debug, Clone)]
pub struct PreparedRun<'a> {
    run: EmulatorRun<'a>,
    table: Option<Vec<f64>>,
}

impl PreparedRun<'_> {
    pub fn num_chunks(&self) -> u64 {
        self.run.num_chunks()
    }

    fn energy(&self, z: u64) -> f64 {
        match &self.table {
            Some(t) => t[z as usize],
            None => self.run.instance.energy(z),
        }
    }

    /// Runs one chunk of samples.
    pub fn run_chunk(&self, chunk: u64) -> Tally {
        let run = &self.run;
        let start = chunk * CHUNK_SAMPLES;
        let count = CHUNK_SAMPLES.min(run.samples.saturating_sub(start));
        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
        rng.set_stream(2 * chunk);
        let mut readout = ChaCha8Rng::seed_from_u64(run.seed);
        readout.set_stream(2 * chunk + 1);
        let shift = 64 - run.instance.n() as u32;
        let leaves = 1usize << run.p;
        let mut strings = alloc::vec![0u64; leaves];
        let mut energies = alloc::vec![0f64; leaves];
        let mut sampler = PhaseSampler::new(run.config.t);
        let mut tally = Tally::default();

        for _ in 0..count {
            for k in 0..leaves {
                let z = rng.next_u64() >> shift;
                strings[k] = z;
                energies[k] = self.energy(z);
            }
            let mut len = leaves;
            while len > 1 {
                let half = len / 2;
                for i in 0..half {
                    let (ti, si) = match run.pairing {
                        Pairing::Adjacent => (2 * i, 2 * i + 1),
                        Pairing::Strided => (i, i + half),
                    };
                    let (et, es) = (energies[ti], energies[si]);
                    let replace = match run.mode {
                        Mode::IdealSign => es < et,
                        Mode::QpeSampled => {
                            let delta = aliased_delta(&run.config, et, es);
                            let x = sampler.sample(delta, unit_f64(&mut readout));
                            x >> (run.config.t - 1) == 1
                        }
                    };
                    let (z, e) = if replace { (strings[si], es) } else { (strings[ti], et) };
                    strings[i] = z;
                    energies[i] = e;
                }
                len = half;
            }
            tally.record(strings[0]);
        }
        tally
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bin visited `k`-th when walking outward from the peak:
/// `peak, peak+1, peak-1, peak+2, ...`.
fn walk_bin(peak: u64, k: u64, t: u32) -> u64 {
    let mask = (1u64 << t) - 1;
    let off = k.div_ceil(2);
    if k % 2 == 1 { peak.wrapping_add(off) & mask } else { peak.wrapping_sub(off) & mask }
}

/// Draws readouts `x ~ Pr(x; delta)` by inverting the CDF taken in
/// peak-outward order. Distributions are cached per `delta` rounded to
/// `1e-12`; past the cache budget the same walk runs uncached, so the
/// drawn bin never depends on cache state.
struct PhaseSampler {
    t: u32,
    cache: BTreeMap<i64, Vec<f64>>,
    floats: usize,
}

impl PhaseSampler {
    fn new(t: u32) -> Self {
        PhaseSampler { t, cache: BTreeMap::new(), floats: 0 }
    }

    fn sample(&mut self, delta: PhaseFraction, u: f64) -> u64 {
        let mut key = Float::round(delta.value() * 1e12) as i64;
        if key >= 500_000_000_000 {
            key -= 1_000_000_000_000;
        }
        let delta = PhaseFraction::new(key as f64 * 1e-12).unwrap_or(delta);
        let t = self.t;
        let bins = 1u64 << t;
        let peak = peak_bin(delta, t);
        if let Some(cum) = self.cache.get(&key) {
            let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
            return walk_bin(peak, k as u64, t);
        }
        if self.floats + bins as usize <= CACHE_FLOATS {
            let mut acc = 0.0;
            let cum: Vec<f64> = (0..bins)
                .map(|k| {
                    acc += ancilla_probability(walk_bin(peak, k, t), delta, t);
                    acc
                })
                .collect();
            self.floats += cum.len();
            self.cache.insert(key, cum);
            return self.sample(delta, u);
        }
        let mut acc = 0.0;
        for k in 0..bins {
            let x = walk_bin(peak, k, t);
            acc += ancilla_probability(x, delta, t);
            if u < acc {
                return x;
            }
        }
        walk_bin(peak, bins - 1, t)
    }
}

/// Exact branch law of one CNR on basis inputs `(z_t, z_s)`: every readout
/// `x` with its probability and the resulting `(T, S)` contents.
pub fn cnr_branches(config: &CnrConfig, e_t: f64, e_s: f64, z_t: u64, z_s: u64) -> Vec<(u64, u64, u64, f64)> {
    let delta = aliased_delta(config, e_t, e_s);
    (0..config.bins())
        .map(|x| {
            let (t, s) = if x >> (config.t - 1) == 1 { (z_s, z_s ^ z_t) } else { (z_t, z_s) };
            (x, t, s, ancilla_probability(x, delta, config.t))
        })
        .collect()
}

/// Final-survivor counts keyed by basis string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    counts: BTreeMap<u64, u64>,
    samples: u64,
}

impl Tally {
    pub fn record(&mut self, z: u64) {
        *self.counts.entry(z).or_insert(0) += 1;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Tally) {
        for (&z, &c) in &other.counts {
            *self.counts.entry(z).or_insert(0) += c;
        }
        self.samples += other.samples;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Counts per energy, ascending, merging energies closer than `tol`.
    pub fn energy_histogram(&self, inst: &ProblemInstance, tol: f64) -> Vec<(f64, u64)> {
        let mut by_energy: Vec<(f64, u64)> = self.counts.iter().map(|(&z, &c)| (inst.energy(z), c)).collect();
        by_energy.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, u64)> = Vec::new();
        for (e, c) in by_energy {
            match out.last_mut() {
                Some(last) if e - last.0 <= tol => last.1 += c,
                _ => out.push((e, c)),
            }
        }
        out
    }

    pub fn levels(&self, spec: &EnergySpectrum, inst: &ProblemInstance) -> Result<EmpiricalLevels> {
        let mut counts = alloc::vec![0u64; spec.num_levels()];
        for (&z, &c) in &self.counts {
            counts[spec.level_of(inst, z)? - 1] += c;
        }
        Ok(EmpiricalLevels { counts, samples: self.samples })
    }
}

/// Sequential emulation over all chunks.
pub fn emulate(run: &EmulatorRun<'_>) -> Result<Tally> {
    let prepared = run.prepare()?;
    let mut tally = Tally::default();
    for c in 0..prepared.num_chunks() {
        tally.merge(&prepared.run_chunk(c));
    }
    Ok(tally)
}

/// A Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Distance to `target` in standard errors; zero-width estimates only
    /// match their own value (to `1e-12`).
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Standard error of the empirical cumulative mass on levels `1..=beta+1`
/// when level probabilities are `dist`.
pub fn cumulative_std_error(dist: &LevelDistribution, beta: usize, samples: u64) -> f64 {
    let q = dist.cumulative(beta).clamp(0.0, 1.0);
    Float::sqrt(q * (1.0 - q) / samples as f64)
}

/// Delta-method standard error of a ratio `sum_U f(a) P(a) / sum_U P(a)`.
fn ratio_std_error(dist: &LevelDistribution, beta: usize, samples: u64, f: impl Fn(usize) -> f64) -> f64 {
    let top = (beta + 1).min(dist.len());
    let mass: f64 = (1..=top).map(|a| dist.prob(a)).sum();
    if mass <= 0.0 {
        return f64::INFINITY;
    }
    let r: f64 = (1..=top).map(|a| f(a) * dist.prob(a)).sum::<f64>() / mass;
    let v: f64 = (1..=top).map(|a| (f(a) - r) * (f(a) - r) * dist.prob(a)).sum();
    Float::sqrt(v / samples as f64) / mass
}

pub fn avg_relative_error_std_error(spec: &EnergySpectrum, dist: &LevelDistribution, beta: usize, samples: u64) -> Result<f64> {
    let alphas: Vec<f64> = (1..=spec.num_levels()).map(|a| relative_error(spec, a)).collect::<Result<_>>()?;
    Ok(ratio_std_error(dist, beta, samples, |a| alphas[a - 1]))
}

pub fn worst_case_std_error(dist: &LevelDistribution, beta: usize, samples: u64) -> f64 {
    ratio_std_error(dist, beta, samples, |a| if a == beta + 1 { 1.0 } else { 0.0 })
}

/// Survivor counts per energy level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalLevels {
    counts: Vec<u64>,
    samples: u64,
}

impl EmpiricalLevels {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let samples = counts.iter().sum();
        if samples == 0 {
            bail!(Argument, "no samples");
        }
        Ok(EmpiricalLevels { counts, samples })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn distribution(&self) -> LevelDistribution {
        let n = self.samples as f64;
        let probs = self.counts.iter().map(|&c| c as f64 / n).collect();
        LevelDistribution::new(probs, 0).expect("frequencies are normalized")
    }

    /// Frequency of level `a` (1-based) with its binomial standard error.
    pub fn level(&self, a: usize) -> Estimate {
        let q = self.counts[a - 1] as f64 / self.samples as f64;
        Estimate { value: q, std_error: Float::sqrt(q * (1.0 - q) / self.samples as f64) }
    }

    pub fn cumulative(&self, beta: usize) -> Estimate {
        let d = self.distribution();
        Estimate { value: d.cumulative(beta), std_error: cumulative_std_error(&d, beta, self.samples) }
    }

    pub fn avg_relative_error(&self, spec: &EnergySpectrum, beta: usize) -> Result<Estimate> {
        let d = self.distribution();
        Ok(Estimate {
            value: avg_relative_error_of(spec, &d, beta)?,
            std_error: avg_relative_error_std_error(spec, &d, beta, self.samples)?,
        })
    }

    pub fn worst_case_conditional(&self, beta: usize) -> Result<Estimate> {
        let d = self.distribution();
        Ok(Estimate { value: worst_case_conditional_of(&d, beta)?, std_error: worst_case_std_error(&d, beta, self.samples) })
    }
}

/// One emulated table row next to the exact recursion values. Standard
/// errors are evaluated at the exact distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub p: u32,
    pub beta: usize,
    pub a_beta: u64,
    pub samples: u64,
    pub exact_cum: f64,
    pub cum: Estimate,
    pub exact_avg_rel_error: f64,
    pub avg_rel_error: Estimate,
    pub exact_worst_case: f64,
    pub worst_case: Estimate,
}

impl TableRow {
    /// Largest deviation from the exact values, in standard errors.
    pub fn max_sigmas(&self) -> f64 {
        let emp = |e: Estimate, exact: f64, se: f64| Estimate { value: e.value, std_error: se }.sigmas_from(exact);
        emp(self.cum, self.exact_cum, self.cum.std_error)
            .max(emp(self.avg_rel_error, self.exact_avg_rel_error, self.avg_rel_error.std_error))
            .max(emp(self.worst_case, self.exact_worst_case, self.worst_case.std_error))
    }
}

pub fn table_row(spec: &EnergySpectrum, emp: &EmpiricalLevels, p: u32, beta: usize) -> Result<TableRow> {
    if beta >= spec.num_levels() {
        bail!(Argument, "beta = {beta} but the spectrum has {} levels", spec.num_levels());
    }
    let exact = distribution_at(spec, p)?;
    let n = emp.samples();
    let d = emp.distribution();
    Ok(TableRow {
        p,
        beta,
        a_beta: spec.neighborhood_count(beta),
        samples: n,
        exact_cum: exact.cumulative(beta),
        cum: Estimate { value: d.cumulative(beta), std_error: cumulative_std_error(&exact, beta, n) },
        exact_avg_rel_error: avg_relative_error_of(spec, &exact, beta)?,
        avg_rel_error: Estimate {
            value: avg_relative_error_of(spec, &d, beta)?,
            std_error: avg_relative_error_std_error(spec, &exact, beta, n)?,
        },
        exact_worst_case: worst_case_conditional_of(&exact, beta)?,
        worst_case: Estimate {
            value: worst_case_conditional_of(&d, beta)?,
            std_error: worst_case_std_error(&exact, beta, n),
        },
    })
}

/// Emulates every `p` in turn (same seed each time) and tabulates.
pub fn table_report(
    run: &EmulatorRun<'_>,
    spec: &EnergySpectrum,
    ps: &[u32],
    beta: usize,
) -> Result<Vec<TableRow>> {
    ps.iter()
        .map(|&p| {
            let tally = emulate(&EmulatorRun { p, ..*run })?;
            table_row(spec, &tally.levels(spec, run.instance)?, p, beta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{Term, DEFAULT_GROUPING_TOL};
    use crate::generators::gen_gaussian;
    use crate::qpe::distribution;
    use crate::sim::{exact_phase_scale, run_algorithm, t_marginal_levels};

    fn tri() -> ProblemInstance {
        ProblemInstance::new(3, alloc::vec![Term::new(1, 2, 1.0), Term::new(2, 3, -2.0), Term::new(1, 3, 1.0)]).unwrap()
    }

    fn spec_of(inst: &ProblemInstance) -> EnergySpectrum {
        EnergySpectrum::enumerate(inst, DEFAULT_GROUPING_TOL).unwrap()
    }

    fn cfg(t: u32) -> CnrConfig {
        CnrConfig::with_scale(t, 2.0).unwrap()
    }

    #[test]
    fn walk_covers_every_bin_once() {
        for t in 1..8 {
            for peak in [0u64, 3, (1 << t) - 1] {
                let peak = peak & ((1 << t) - 1);
                let mut seen: Vec<u64> = (0..1u64 << t).map(|k| walk_bin(peak, k, t)).collect();
                assert_eq!(seen[0], peak);
                seen.sort();
                assert_eq!(seen, (0..1u64 << t).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn sampler_frequencies_follow_the_law() {
        let t = 5;
        let delta = PhaseFraction::new(0.137).unwrap();
        let law = distribution(delta, t);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cached = PhaseSampler::new(t);
        let mut uncached = PhaseSampler::new(t);
        uncached.floats = CACHE_FLOATS;
        let mut hist = alloc::vec![0u64; 32];
        let n = 200_000;
        for _ in 0..n {
            let u = unit_f64(&mut rng);
            let x = cached.sample(delta, u);
            assert_eq!(x, uncached.sample(delta, u));
            hist[x as usize] += 1;
        }
        for (x, &c) in hist.iter().enumerate() {
            let q = law[x];
            let se = (q * (1.0 - q) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - q).abs() <= 4.0 * se + 1e-9, "bin {x}");
        }
    }

    #[test]
    fn deterministic_and_chunk_consistent() {
        let inst = tri();
        let run = EmulatorRun::new(&inst, cfg(4), 2, 150_000, 9).with_mode(Mode::QpeSampled);
        let a = emulate(&run).unwrap();
        assert_eq!(a, emulate(&run).unwrap());
        assert_eq!(a.samples(), 150_000);
        assert_eq!(run.num_chunks(), 3);
        assert_ne!(a, emulate(&EmulatorRun { seed: 10, ..run }).unwrap());
        let prepared = run.prepare().unwrap();
        let mut reversed = Tally::default();
        for c in (0..3).rev() {
            reversed.merge(&prepared.run_chunk(c));
        }
        assert_eq!(a, reversed);
    }

    #[test]
    fn p_zero_is_uniform() {
        let inst = gen_gaussian(6, 2).unwrap();
        let spec = spec_of(&inst);
        let emp = emulate(&EmulatorRun::new(&inst, cfg(4), 0, 100_000, 1))
            .unwrap()
            .levels(&spec, &inst)
            .unwrap();
        for beta in [0, 3, 10] {
            let want = spec.neighborhood_count(beta) as f64 / 64.0;
            assert!(emp.cumulative(beta).sigmas_from(want) <= 4.0);
        }
    }

    #[test]
    fn ideal_sign_matches_simulator() {
        let inst = tri();
        let spec = spec_of(&inst);
        let config = CnrConfig::with_scale(3, exact_phase_scale(&spec, 3).unwrap()).unwrap();
        for p in 1..=2 {
            let sim = t_marginal_levels(&run_algorithm(&inst, &config, p).unwrap(), &spec, &inst).unwrap();
            let emp = emulate(&EmulatorRun::new(&inst, config, p, 200_000, 4))
                .unwrap()
                .levels(&spec, &inst)
                .unwrap();
            for a in 1..=spec.num_levels() {
                let q = sim.prob(a);
                let se = (q * (1.0 - q) / 200_000.0).sqrt();
                assert!((emp.level(a).value - q).abs() <= 3.0 * se + 1e-12, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn qpe_sampled_with_exact_phases_is_ideal() {
        let inst = tri();
        let spec = spec_of(&inst);
        let config = CnrConfig::with_scale(4, exact_phase_scale(&spec, 4).unwrap()).unwrap();
        let run = EmulatorRun::new(&inst, config, 3, 20_000, 5);
        assert_eq!(emulate(&run).unwrap(), emulate(&run.with_mode(Mode::QpeSampled)).unwrap());
    }

    #[test]
    fn pairing_does_not_matter() {
        let inst = gen_gaussian(5, 8).unwrap();
        let spec = spec_of(&inst);
        let beta = 2;
        for mode in [Mode::IdealSign, Mode::QpeSampled] {
            let run = EmulatorRun::new(&inst, CnrConfig::with_scale(4, 3.0).unwrap(), 3, 100_000, 6).with_mode(mode);
            let a = emulate(&run).unwrap().levels(&spec, &inst).unwrap().cumulative(beta);
            let b = emulate(&run.with_pairing(Pairing::Strided))
                .unwrap()
                .levels(&spec, &inst)
                .unwrap()
                .cumulative(beta);
            let se = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
            assert!((a.value - b.value).abs() <= 4.0 * se, "{mode:?}: {a:?} {b:?}");
            if mode == Mode::IdealSign {
                assert!(a.sigmas_from(distribution_at(&spec, 3).unwrap().cumulative(beta)) <= 4.0);
            }
        }
    }

    #[test]
    fn cumulative_grows_with_p() {
        let inst = gen_gaussian(8, 4).unwrap();
        let spec = spec_of(&inst);
        let run = EmulatorRun::new(&inst, cfg(4), 0, 50_000, 2);
        let rows = table_report(&run, &spec, &[0, 1, 2, 3, 4], 5).unwrap();
        for w in rows.windows(2) {
            let se = (w[0].cum.std_error.powi(2) + w[1].cum.std_error.powi(2)).sqrt();
            assert!(w[1].cum.value >= w[0].cum.value - 3.0 * se);
        }
        for r in &rows {
            assert!(r.max_sigmas() <= 4.0, "{r:?}");
        }
        let zero = table_report(&run, &spec, &[3], 0).unwrap()[0];
        assert_eq!(zero.worst_case.value, 1.0);
        assert_eq!(zero.exact_worst_case, 1.0);
    }

    #[test]
    fn guards() {
        let inst = tri();
        assert!(EmulatorRun::new(&inst, cfg(4), 2, 0, 0).validate().is_err());
        assert!(matches!(EmulatorRun::new(&inst, cfg(4), 40, 10, 0).validate(), Err(crate::Error::Resource(_))));
        // range 4 needs M >= 4 / 2pi
        let narrow = CnrConfig::with_scale(4, 0.5).unwrap();
        assert!(EmulatorRun::new(&inst, narrow, 2, 10, 0).prepare().is_ok());
        assert!(matches!(
            EmulatorRun::new(&inst, narrow, 2, 10, 0).with_mode(Mode::QpeSampled).prepare(),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn branch_law_sums_to_one() {
        let branches = cnr_branches(&cfg(5), 1.0, -0.3, 0b10, 0b01);
        assert_eq!(branches.len(), 32);
        assert!((branches.iter().map(|b| b.3).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(branches.iter().all(|&(x, t, s, _)| if x >= 16 { t == 0b01 && s == 0b11 } else { t == 0b10 && s == 0b01 }));
    }

    #[test]
    fn energy_histogram_groups() {
        let inst = tri();
        let mut tally = Tally::default();
        for z in 0..8 {
            tally.record(z);
        }
        let hist = tally.energy_histogram(&inst, 1e-9);
        let spec = spec_of(&inst);
        assert_eq!(hist.len(), spec.num_levels());
        for (h, l) in hist.iter().zip(spec.levels()) {
            assert_eq!(h.1, l.degeneracy);
        }
    }
}
