//! 2-local Ising cost functions and their exact energy spectra.
//!
//! A bit string `z = z_1 z_2 ... z_n` is stored as a basis index with `z_1` as
//! the most significant of the `n` bits. Bits map to spins as `s = 1 - 2z`, so
//! `z_k = 0` is spin `+1`. The cost is `C(z) = sum w * s_i * s_j` over the terms.

use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Largest `n` for which the `2^n` strings may be enumerated.
pub const MAX_ENUM_BITS: usize = 26;
/// Level member lists are kept up to this `n` and dropped above it.
pub const MEMBER_BITS: usize = 20;
/// Default relative tolerance for grouping energies into levels.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-9;

/// One coupling `w * Z_i Z_j`, with 1-based indices `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl Term {
    pub fn new(i: usize, j: usize, w: f64) -> Self {
        Term { i, j, w }
    }
}

/// An `n`-variable 2-local cost function without constant offset.
///
/// Minimization semantics: a maximization problem is entered with negated
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    n: usize,
    terms: Vec<Term>,
    // Bit shifts of (z_i, z_j) inside a basis index, cached for evaluation.
    shifts: Vec<(u32, u32)>,
}

impl ProblemInstance {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if n < 2 {
            bail!(Argument, "an instance needs n >= 2, got {n}");
        }
        if n > 63 {
            bail!(Argument, "n = {n} does not fit a 64-bit basis index");
        }
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(terms.len());
        for term in &terms {
            if !(1 <= term.i && term.i < term.j && term.j <= n) {
                bail!(Argument, "term ({}, {}) violates 1 <= i < j <= {n}", term.i, term.j);
            }
            if !term.w.is_finite() {
                bail!(Argument, "term ({}, {}) has non-finite weight", term.i, term.j);
            }
            pairs.push((term.i, term.j));
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            bail!(Argument, "duplicate term ({}, {})", w[0].0, w[0].1);
        }
        let shifts = terms
            .iter()
            .map(|t| ((n - t.i) as u32, (n - t.j) as u32))
            .collect();
        Ok(ProblemInstance { n, terms, shifts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of basis strings, `2^n`.
    pub fn num_states(&self) -> u64 {
        1u64 << self.n
    }

    /// `C(z)` for a bit string given as `z_1, ..., z_n`.
    pub fn evaluate(&self, z: &[bool]) -> Result<f64> {
        if z.len() != self.n {
            bail!(Argument, "bit string has length {}, instance has n = {}", z.len(), self.n);
        }
        Ok(self.energy(bits_to_index(z)))
    }

    /// `C(z)` for a basis index (`z_1` most significant).
    pub fn energy(&self, index: u64) -> f64 {
        self.terms
            .iter()
            .zip(&self.shifts)
            .map(|(term, &(si, sj))| {
                if ((index >> si) ^ (index >> sj)) & 1 == 0 {
                    term.w
                } else {
                    -term.w
                }
            })
            .sum()
    }

    /// Energies of all `2^n` basis strings, indexed by basis index.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        if self.n > MAX_ENUM_BITS {
            bail!(Resource, "enumeration needs n <= {MAX_ENUM_BITS}, got {}", self.n);
        }
        Ok((0..self.num_states()).map(|z| self.energy(z)).collect())
    }
}

/// Basis index of `z_1 ... z_n` with `z_1` most significant.
pub fn bits_to_index(z: &[bool]) -> u64 {
    z.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Inverse of [`bits_to_index`].
pub fn index_to_bits(index: u64, n: usize) -> Vec<bool> {
    (0..n).map(|k| (index >> (n - 1 - k)) & 1 == 1).collect()
}

/// One energy level: a distinct energy and the strings that attain it.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u64,
    /// Basis indices of the level; `None` when dropped for large `n`.
    pub members: Option<Vec<u64>>,
}

/// Ascending distinct energies with degeneracies.
///
/// Level indices in the public API are 1-based, so level `1` is the ground
/// level and level `G` the top one.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<Level>,
    total_states: u64,
    n_bits: Option<usize>,
    abs_tol: f64,
}

impl EnergySpectrum {
    /// Exhaustive enumeration of an instance's `2^n` strings.
    ///
    /// Energies within `tol * max(1, C_max - C_min)` of a level's lowest
    /// energy are grouped into that level.
    pub fn enumerate(inst: &ProblemInstance, tol: f64) -> Result<Self> {
        if !(tol >= 0.0 && tol.is_finite()) {
            bail!(Argument, "grouping tolerance must be finite and >= 0");
        }
        let table = inst.energy_table()?;
        let mut order: Vec<(f64, u64)> = table.iter().copied().zip(0..).collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let range = order[order.len() - 1].0 - order[0].0;
        let abs_tol = tol * range.max(1.0);
        let keep_members = inst.n() <= MEMBER_BITS;

        let mut levels: Vec<Level> = Vec::new();
        for &(e, z) in &order {
            match levels.last_mut() {
                Some(level) if e - level.energy <= abs_tol => {
                    level.degeneracy += 1;
                    if let Some(m) = level.members.as_mut() {
                        m.push(z);
                    }
                }
                _ => levels.push(Level {
                    energy: e,
                    degeneracy: 1,
                    members: keep_members.then(|| alloc::vec![z]),
                }),
            }
        }
        Ok(EnergySpectrum {
            levels,
            total_states: inst.num_states(),
            n_bits: Some(inst.n()),
            abs_tol,
        })
    }

    /// A synthetic spectrum from `(energy, degeneracy)` pairs.
    ///
    /// The total state count is the sum of degeneracies; it need not be a
    /// power of two.
    pub fn from_levels(levels: &[(f64, u64)]) -> Result<Self> {
        if levels.is_empty() {
            bail!(Argument, "a spectrum needs at least one level");
        }
        for w in levels.windows(2) {
            if !(w[0].0 < w[1].0) {
                bail!(Argument, "level energies must be strictly increasing");
            }
        }
        if levels.iter().any(|&(e, g)| g == 0 || !e.is_finite()) {
            bail!(Argument, "levels need finite energies and degeneracy >= 1");
        }
        let total_states = levels.iter().map(|l| l.1).sum::<u64>();
        let n_bits = total_states
            .is_power_of_two()
            .then(|| total_states.trailing_zeros() as usize);
        let range = levels[levels.len() - 1].0 - levels[0].0;
        Ok(EnergySpectrum {
            levels: levels
                .iter()
                .map(|&(energy, degeneracy)| Level { energy, degeneracy, members: None })
                .collect(),
            total_states,
            n_bits,
            abs_tol: DEFAULT_GROUPING_TOL * range.max(1.0),
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// `G`, the number of distinct levels.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn total_states(&self) -> u64 {
        self.total_states
    }

    pub fn n_bits(&self) -> Option<usize> {
        self.n_bits
    }

    pub fn c_min(&self) -> f64 {
        self.levels[0].energy
    }

    pub fn c_max(&self) -> f64 {
        self.levels[self.levels.len() - 1].energy
    }

    /// Absolute grouping tolerance used to match energies to levels.
    pub fn tolerance(&self) -> f64 {
        self.abs_tol
    }

    /// `E_a` for a 1-based level index.
    pub fn energy(&self, a: usize) -> f64 {
        self.levels[a - 1].energy
    }

    /// `g_a` for a 1-based level index.
    pub fn degeneracy(&self, a: usize) -> u64 {
        self.levels[a - 1].degeneracy
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// `A_beta`: the number of strings in the first `beta + 1` levels.
    pub fn neighborhood_count(&self, beta: usize) -> u64 {
        self.levels
            .iter()
            .take(beta + 1)
            .map(|l| l.degeneracy)
            .sum()
    }

    /// 1-based level whose energy matches `e` within the grouping tolerance.
    pub fn level_of_energy(&self, e: f64) -> Result<usize> {
        let idx = self.levels.partition_point(|l| l.energy + self.abs_tol < e);
        match self.levels.get(idx) {
            Some(level) if (level.energy - e).abs() <= self.abs_tol => Ok(idx + 1),
            _ => bail!(Consistency, "energy {e} matches no level of the spectrum"),
        }
    }

    /// 1-based level of basis string `index` under `inst`.
    pub fn level_of(&self, inst: &ProblemInstance, index: u64) -> Result<usize> {
        if self.n_bits != Some(inst.n()) {
            bail!(Argument, "spectrum and instance disagree on n");
        }
        self.level_of_energy(inst.energy(index))
    }

    /// 1-based level of the bit string `z_1 ... z_n`.
    pub fn level_of_bits(&self, inst: &ProblemInstance, z: &[bool]) -> Result<usize> {
        self.level_of_energy(inst.evaluate(z)?)
    }

    /// 0-based level of every basis index, for fast marginalization.
    pub fn level_table(&self, inst: &ProblemInstance) -> Result<Vec<u32>> {
        if self.n_bits != Some(inst.n()) {
            bail!(Argument, "spectrum and instance disagree on n");
        }
        if self.levels.iter().all(|l| l.members.is_some()) {
            let mut table = alloc::vec![0u32; self.total_states as usize];
            for (a, level) in self.levels.iter().enumerate() {
                for &z in level.members.iter().flatten() {
                    table[z as usize] = a as u32;
                }
            }
            return Ok(table);
        }
        (0..self.total_states)
            .map(|z| Ok(self.level_of_energy(inst.energy(z))? as u32 - 1))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn triangle() -> ProblemInstance {
        ProblemInstance::new(3, vec![Term::new(1, 2, 1.0), Term::new(2, 3, 1.0), Term::new(1, 3, 1.0)])
            .unwrap()
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn evaluate_single_term() {
        let inst = ProblemInstance::new(2, vec![Term::new(1, 2, 1.0)]).unwrap();
        assert_eq!(inst.evaluate(&bits("00")).unwrap(), 1.0);
        assert_eq!(inst.evaluate(&bits("01")).unwrap(), -1.0);
        assert!(inst.evaluate(&bits("011")).is_err());
    }

    #[test]
    fn evaluate_triangle_against_spins() {
        let inst = triangle();
        assert_eq!(inst.evaluate(&bits("000")).unwrap(), 3.0);
        assert_eq!(inst.evaluate(&bits("001")).unwrap(), -1.0);
        // every string against a direct spin-product oracle
        for z in 0..8u64 {
            let b = index_to_bits(z, 3);
            let s: Vec<f64> = b.iter().map(|&x| if x { -1.0 } else { 1.0 }).collect();
            let oracle = s[0] * s[1] + s[1] * s[2] + s[0] * s[2];
            assert_eq!(inst.energy(z), oracle);
        }
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(ProblemInstance::new(1, vec![]).is_err());
        assert!(ProblemInstance::new(3, vec![Term::new(2, 1, 1.0)]).is_err());
        assert!(ProblemInstance::new(3, vec![Term::new(1, 4, 1.0)]).is_err());
        assert!(ProblemInstance::new(3, vec![Term::new(1, 2, 1.0), Term::new(1, 2, 2.0)]).is_err());
    }

    #[test]
    fn triangle_spectrum() {
        let spec = EnergySpectrum::enumerate(&triangle(), DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(spec.num_levels(), 2);
        assert_eq!((spec.energy(1), spec.degeneracy(1)), (-1.0, 6));
        assert_eq!((spec.energy(2), spec.degeneracy(2)), (3.0, 2));
        assert_eq!(spec.level_of_bits(&triangle(), &bits("000")).unwrap(), 2);
        assert_eq!(spec.levels()[1].members.as_deref(), Some(&[0u64, 7][..]));
    }

    #[test]
    fn single_term_spectrum_and_extremes() {
        let inst = ProblemInstance::new(2, vec![Term::new(1, 2, 1.0)]).unwrap();
        let spec = EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL).unwrap();
        let got: Vec<(f64, u64)> = spec.levels().iter().map(|l| (l.energy, l.degeneracy)).collect();
        assert_eq!(got, vec![(-1.0, 2), (1.0, 2)]);
        assert_eq!(spec.level_of(&inst, 0b01).unwrap(), 1);
        assert_eq!(spec.level_of(&inst, 0b11).unwrap(), spec.num_levels());
    }

    #[test]
    fn unknown_energy_is_a_consistency_error() {
        let spec = EnergySpectrum::enumerate(&triangle(), DEFAULT_GROUPING_TOL).unwrap();
        assert!(matches!(spec.level_of_energy(0.5), Err(crate::Error::Consistency(_))));
    }

    #[test]
    fn enumeration_guard() {
        let inst = ProblemInstance::new(27, vec![Term::new(1, 2, 1.0)]).unwrap();
        assert!(matches!(
            EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL),
            Err(crate::Error::Resource(_))
        ));
    }

    #[test]
    fn members_dropped_above_threshold() {
        let inst = ProblemInstance::new(21, vec![Term::new(1, 21, 1.0)]).unwrap();
        let spec = EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL).unwrap();
        assert!(spec.levels().iter().all(|l| l.members.is_none()));
        assert_eq!(spec.degeneracy(1), 1 << 20);
    }

    fn arb_instance() -> impl Strategy<Value = ProblemInstance> {
        (2usize..=7).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> =
                (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
            let len = pairs.len();
            (Just(n), Just(pairs), proptest::collection::vec(proptest::option::of(-3.0f64..3.0), len))
        })
        .prop_map(|(n, pairs, ws)| {
            let terms = pairs
                .into_iter()
                .zip(ws)
                .filter_map(|((i, j), w)| w.map(|w| Term::new(i, j, w)))
                .collect();
            ProblemInstance::new(n, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn spectrum_partitions_basis(inst in arb_instance()) {
            let spec = EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL).unwrap();
            let total: u64 = spec.levels().iter().map(|l| l.degeneracy).sum();
            prop_assert_eq!(total, inst.num_states());
            prop_assert!(spec.energies().windows(2).all(|w| w[0] < w[1]));
            for z in 0..inst.num_states() {
                let e = inst.energy(z);
                let a = spec.level_of(&inst, z).unwrap();
                prop_assert!((spec.energy(a) - e).abs() <= spec.tolerance());
                prop_assert!(spec.c_min() <= e && e <= spec.c_max());
            }
        }

        #[test]
        fn global_flip_is_a_symmetry(inst in arb_instance(), z in any::<u64>()) {
            let mask = inst.num_states() - 1;
            let z = z & mask;
            prop_assert_eq!(inst.energy(z), inst.energy(!z & mask));
        }
    }
}
