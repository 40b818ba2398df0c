//! Exact statevector simulation of the CNR circuit at small sizes.
//!
//! Qubit `0` of a layout is the most significant bit of an amplitude index,
//! and inside a register the first qubit (`z_1`, `x_1`) is the register's most
//! significant bit. A register's value is therefore a contiguous bit field of
//! the index.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_complex::Complex64;
use num_traits::Float;

use crate::cost::{EnergySpectrum, ProblemInstance};
use crate::error::{bail, Result};
use crate::qpe::CnrConfig;
use crate::recursion::LevelDistribution;

/// Widest state the simulator allocates (`2^26` amplitudes, 1 GiB).
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub width: usize,
    pub offset: usize,
}

/// Named, contiguous, non-overlapping registers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: usize,
}

impl RegisterLayout {
    pub fn new() -> Self {
        RegisterLayout::default()
    }

    /// Appends a register after the existing ones.
    pub fn add(&mut self, name: &str, width: usize) -> Result<()> {
        if width == 0 {
            bail!(Argument, "register {name} needs a positive width");
        }
        if self.registers.iter().any(|r| r.name == name) {
            bail!(Argument, "register {name} already exists");
        }
        if self.total + width > MAX_QUBITS {
            bail!(Resource, "layout would need {} qubits, limit is {MAX_QUBITS}", self.total + width);
        }
        self.registers.push(Register { name: name.to_string(), width, offset: self.total });
        self.total += width;
        Ok(())
    }

    pub fn with(mut self, name: &str, width: usize) -> Result<Self> {
        self.add(name, width)?;
        Ok(self)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn get(&self, name: &str) -> Result<&Register> {
        match self.registers.iter().find(|r| r.name == name) {
            Some(r) => Ok(r),
            None => bail!(Argument, "unknown register {name}"),
        }
    }

    /// Right shift that brings register `reg` to the low bits of an index.
    fn shift(&self, reg: &Register) -> u32 {
        (self.total - reg.offset - reg.width) as u32
    }

    /// Value of a register inside an amplitude index.
    pub fn value(&self, reg: &Register, index: u64) -> u64 {
        (index >> self.shift(reg)) & ((1u64 << reg.width) - 1)
    }

    /// Global qubit number of bit `k` (0 = most significant) of a register.
    pub fn qubit(&self, name: &str, k: usize) -> Result<usize> {
        let reg = self.get(name)?;
        if k >= reg.width {
            bail!(Argument, "register {name} has no bit {k}");
        }
        Ok(reg.offset + k)
    }

    /// Amplitude index holding the given register values; others are 0.
    pub fn encode(&self, values: &[(&str, u64)]) -> Result<u64> {
        let mut index = 0u64;
        for &(name, v) in values {
            let reg = self.get(name)?;
            if v >> reg.width != 0 {
                bail!(Argument, "value {v} does not fit register {name}");
            }
            index |= v << self.shift(reg);
        }
        Ok(index)
    }

    fn mask(&self, qubit: usize) -> u64 {
        1u64 << (self.total - 1 - qubit)
    }
}

/// Amplitudes over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    layout: RegisterLayout,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); 1usize << layout.total];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { amps, layout }
    }

    /// A computational basis state with the given register values.
    pub fn basis(layout: RegisterLayout, values: &[(&str, u64)]) -> Result<Self> {
        let index = layout.encode(values)?;
        let mut state = StateVector::zero(layout);
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.layout.total {
            bail!(Argument, "qubit {q} outside a {}-qubit state", self.layout.total);
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let m = self.layout.mask(q) as usize;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | m] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// Controlled phase `diag(1, 1, 1, e^{i angle})` on two qubits.
    pub fn apply_cphase(&mut self, a: usize, b: usize, angle: f64) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        let both = (self.layout.mask(a) | self.layout.mask(b)) as usize;
        let phase = Complex64::from_polar(1.0, angle);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & both == both {
                *amp *= phase;
            }
        }
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        let (ma, mb) = (self.layout.mask(a) as usize, self.layout.mask(b) as usize);
        for i in 0..self.amps.len() {
            if i & ma != 0 && i & mb == 0 {
                self.amps.swap(i, i ^ ma ^ mb);
            }
        }
        Ok(())
    }

    /// Toffoli: flips `target` where both controls are 1.
    pub fn apply_ccx(&mut self, c1: usize, c2: usize, target: usize) -> Result<()> {
        for q in [c1, c2, target] {
            self.check_qubit(q)?;
        }
        if target == c1 || target == c2 {
            bail!(Argument, "Toffoli target must differ from its controls");
        }
        let ctrl = (self.layout.mask(c1) | self.layout.mask(c2)) as usize;
        let mt = self.layout.mask(target) as usize;
        for i in 0..self.amps.len() {
            if i & ctrl == ctrl && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
        Ok(())
    }

    /// Multiplies every amplitude by a phase depending on its index.
    pub fn apply_diagonal(&mut self, phase: impl Fn(u64) -> f64) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let angle = phase(i as u64);
            if angle != 0.0 {
                *amp *= Complex64::from_polar(1.0, angle);
            }
        }
    }

    /// Inverse quantum Fourier transform on one register, gate by gate:
    /// bit-reversal swaps, then controlled phases and Hadamards in reverse
    /// order of the forward circuit.
    pub fn inverse_qft(&mut self, name: &str) -> Result<()> {
        let reg = self.layout.get(name)?.clone();
        let q = |k: usize| reg.offset + k;
        let w = reg.width;
        for j in 0..w / 2 {
            self.apply_swap(q(j), q(w - 1 - j))?;
        }
        for j in (0..w).rev() {
            for k in (j + 1..w).rev() {
                self.apply_cphase(q(k), q(j), -2.0 * PI / Float::powi(2.0, (k - j + 1) as i32))?;
            }
            self.apply_hadamard(q(j))?;
        }
        Ok(())
    }

    /// Probability of each value of one register.
    pub fn marginal(&self, name: &str) -> Result<Vec<f64>> {
        let reg = self.layout.get(name)?;
        let mut out = alloc::vec![0.0; 1usize << reg.width];
        for (i, a) in self.amps.iter().enumerate() {
            out[self.layout.value(reg, i as u64) as usize] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Joint distribution of several registers, indexed by their values
    /// concatenated in the given order (first register most significant).
    pub fn joint_marginal(&self, names: &[&str]) -> Result<Vec<f64>> {
        let regs: Vec<&Register> = names.iter().map(|n| self.layout.get(n)).collect::<Result<_>>()?;
        let width: usize = regs.iter().map(|r| r.width).sum();
        let mut out = alloc::vec![0.0; 1usize << width];
        for (i, a) in self.amps.iter().enumerate() {
            let key = regs
                .iter()
                .fold(0u64, |acc, r| (acc << r.width) | self.layout.value(r, i as u64));
            out[key as usize] += a.norm_sqr();
        }
        Ok(out)
    }
}

/// Uniform superposition over the listed registers, `|0>` elsewhere.
pub fn uniform_init(layout: RegisterLayout, registers: &[&str]) -> Result<StateVector> {
    let mut covered = 0u64;
    for name in registers {
        let reg = layout.get(name)?;
        covered |= ((1u64 << reg.width) - 1) << layout.shift(reg);
    }
    let count = covered.count_ones() as i32;
    let amp = Complex64::new(Float::powf(2.0, -count as f64 / 2.0), 0.0);
    let mut state = StateVector::zero(layout);
    for (i, a) in state.amps.iter_mut().enumerate() {
        *a = if i as u64 & !covered == 0 { amp } else { Complex64::new(0.0, 0.0) };
    }
    Ok(state)
}

fn check_data_register(state: &StateVector, name: &str, n: usize) -> Result<()> {
    let w = state.layout.get(name)?.width;
    if w != n {
        bail!(Argument, "register {name} has width {w}, instance needs {n}");
    }
    Ok(())
}

fn table_range(table: &[f64]) -> (f64, f64) {
    table
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)))
}

/// Comparison step: ancilla-controlled `exp(i 2^j (C_s - C_t) / M)` phases
/// followed by the inverse QFT on the ancilla.
///
/// The ancilla must already be in uniform superposition. The cost operator is
/// diagonal, so the controlled evolutions are applied as the equivalent phase
/// `D(x) (C(z_s) - C(z_t)) / M` on each basis component.
pub fn apply_comparison(
    state: &mut StateVector,
    inst: &ProblemInstance,
    config: &CnrConfig,
    t_reg: &str,
    s_reg: &str,
    anc_reg: &str,
) -> Result<()> {
    let table = inst.energy_table()?;
    compare_with_table(state, &table, config, t_reg, s_reg, anc_reg)
}

fn compare_with_table(
    state: &mut StateVector,
    table: &[f64],
    config: &CnrConfig,
    t_reg: &str,
    s_reg: &str,
    anc_reg: &str,
) -> Result<()> {
    let n = table.len().trailing_zeros() as usize;
    check_data_register(state, t_reg, n)?;
    check_data_register(state, s_reg, n)?;
    let anc = state.layout.get(anc_reg)?.clone();
    if anc.width != config.t as usize {
        bail!(Argument, "ancilla {anc_reg} has width {}, config has t = {}", anc.width, config.t);
    }
    let (lo, hi) = table_range(table);
    config.validate_range(lo, hi)?;
    let t = state.layout.get(t_reg)?.clone();
    let s = state.layout.get(s_reg)?.clone();
    let layout = state.layout.clone();
    state.apply_diagonal(|i| {
        let zt = layout.value(&t, i) as usize;
        let zs = layout.value(&s, i) as usize;
        let x = layout.value(&anc, i) as f64;
        x * (table[zs] - table[zt]) / config.scale
    });
    state.inverse_qft(anc_reg)
}

/// Replacement step: for every bit position a Toffoli `(control, t_i -> s_i)`
/// then `(control, s_i -> t_i)`. With the control set this maps
/// `(z_t, z_s)` to `(z_s, z_s XOR z_t)`; otherwise it does nothing.
pub fn apply_replacement(state: &mut StateVector, t_reg: &str, s_reg: &str, control_qubit: usize) -> Result<()> {
    let (tw, sw) = (state.layout.get(t_reg)?.width, state.layout.get(s_reg)?.width);
    if tw != sw {
        bail!(Argument, "registers {t_reg} ({tw}) and {s_reg} ({sw}) differ in width");
    }
    for k in 0..tw {
        let (tq, sq) = (state.layout.qubit(t_reg, k)?, state.layout.qubit(s_reg, k)?);
        state.apply_ccx(control_qubit, tq, sq)?;
        state.apply_ccx(control_qubit, sq, tq)?;
    }
    Ok(())
}

/// One CNR: comparison, then replacement controlled by the first ancilla qubit.
pub fn apply_cnr(
    state: &mut StateVector,
    inst: &ProblemInstance,
    config: &CnrConfig,
    t_reg: &str,
    s_reg: &str,
    anc_reg: &str,
) -> Result<()> {
    let table = inst.energy_table()?;
    cnr_with_table(state, &table, config, t_reg, s_reg, anc_reg)
}

fn cnr_with_table(
    state: &mut StateVector,
    table: &[f64],
    config: &CnrConfig,
    t_reg: &str,
    s_reg: &str,
    anc_reg: &str,
) -> Result<()> {
    compare_with_table(state, table, config, t_reg, s_reg, anc_reg)?;
    let control = state.layout.qubit(anc_reg, 0)?;
    apply_replacement(state, t_reg, s_reg, control)
}

/// Qubits needed by a `p`-level run: `2^p n + (2^p - 1) t`.
pub fn algorithm_width(n: usize, t: u32, p: u32) -> Option<usize> {
    let leaves = 1usize.checked_shl(p)?;
    leaves.checked_mul(n)?.checked_add((leaves - 1).checked_mul(t as usize)?)
}

/// Data and ancilla layout of a `p`-level run: registers `r0..` then `a0..`.
pub fn algorithm_layout(n: usize, t: u32, p: u32) -> Result<RegisterLayout> {
    match algorithm_width(n, t, p) {
        Some(w) if w <= MAX_QUBITS => {}
        _ => bail!(Resource, "a {p}-level run with n = {n}, t = {t} exceeds {MAX_QUBITS} qubits"),
    }
    let mut layout = RegisterLayout::new();
    for r in 0..1usize << p {
        layout.add(&format!("r{r}"), n)?;
    }
    for a in 0..(1usize << p) - 1 {
        layout.add(&format!("a{a}"), t as usize)?;
    }
    Ok(layout)
}

/// Full `p`-level algorithm: `2^p` uniform registers paired left to right at
/// every level, a fresh ancilla block per CNR. Returns the exact distribution
/// of the final target register `r0` over its `2^n` basis strings.
pub fn run_algorithm(inst: &ProblemInstance, config: &CnrConfig, p: u32) -> Result<Vec<f64>> {
    let layout = algorithm_layout(inst.n(), config.t, p)?;
    let table = inst.energy_table()?;
    let names: Vec<String> = layout.registers().iter().map(|r| r.name.clone()).collect();
    let all: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut state = uniform_init(layout, &all)?;

    let leaves = 1usize << p;
    let mut next_anc = 0;
    let mut stride = 1;
    while stride < leaves {
        for i in (0..leaves).step_by(2 * stride) {
            let (t, s, a) = (format!("r{i}"), format!("r{}", i + stride), format!("a{next_anc}"));
            cnr_with_table(&mut state, &table, config, &t, &s, &a)?;
            next_anc += 1;
        }
        stride *= 2;
    }
    state.marginal("r0")
}

/// Groups a basis-string distribution into energy levels.
pub fn t_marginal_levels(dist: &[f64], spec: &EnergySpectrum, inst: &ProblemInstance) -> Result<LevelDistribution> {
    if dist.len() as u64 != inst.num_states() {
        bail!(Argument, "distribution has {} entries, expected {}", dist.len(), inst.num_states());
    }
    let table = spec.level_table(inst)?;
    let mut levels = alloc::vec![0.0; spec.num_levels()];
    for (z, &pr) in dist.iter().enumerate() {
        levels[table[z] as usize] += pr;
    }
    LevelDistribution::from_weights(&levels, 0)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// A scale factor that makes every comparison phase an exact `t`-bit
/// fraction inside `(-1/2, 1/2)`, for integer-valued spectra.
///
/// With `g` the gcd of the level gaps and `R = (C_max - C_min) / g`, it picks
/// the largest `j` with `R j < 2^(t-1)` and returns `M = 2^t g / (2 pi j)`, so
/// `delta = j (E_k - E_i) / (2^t g)`. `None` when the energies are not
/// integers or no such `j` exists.
pub fn exact_phase_scale(spec: &EnergySpectrum, t: u32) -> Option<f64> {
    let mut energies = BTreeSet::new();
    for l in spec.levels() {
        if (l.energy - Float::round(l.energy)).abs() > 1e-9 {
            return None;
        }
        energies.insert(Float::round(l.energy) as i64);
    }
    let lo = *energies.iter().next()?;
    let g = energies.iter().fold(0u64, |acc, &e| gcd(acc, (e - lo) as u64));
    if g == 0 {
        return None;
    }
    let span = (spec.c_max() - spec.c_min()).round() as u64 / g;
    let j = ((1u64 << (t - 1)) - 1) / span;
    if j == 0 {
        return None;
    }
    Some(Float::powi(2.0, t as i32) * g as f64 / (2.0 * PI * j as f64))
}
