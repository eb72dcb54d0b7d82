//! Dense statevector engine.
//!
//! Basis-state integers are little-endian in qubits: global qubit `q` is bit
//! `q` of the index. [`RegisterLayout`] fixes where each logical register of
//! the counting circuit lives:
//!
//! ```text
//! bit:   0 .. n | n .. n+k    | n+k .. n+k+l | scratch | probe
//!        data   | hyperplane  | phase        | (opt.)  | (opt.)
//! ```
//!
//! Within a register, position `m` carries weight `2^m` of the register
//! value. For the phase register this puts the leading fraction bit `s_1` on
//! the highest position.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `Σ|a|² = 1` accepted when building states from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest state the engine agrees to allocate.
pub const MAX_QUBITS: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Register {
    Data,
    Hyperplane,
    Phase,
    Scratch,
    /// Kickback qubit used when a circuit is run as a controlled block.
    Probe,
}

/// Qubit bookkeeping for the data / hyperplane / phase (+ scratch) registers.
///
/// A layout can also *pin* the hyperplane register to a classical column
/// index instead of simulating it. Every oracle in this crate is diagonal in
/// the hyperplane index, so a pinned layout evolves exactly like the `|j⟩`
/// slice of the full register at `2^k` times less cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    n: usize,
    k: usize,
    l: usize,
    scratch: bool,
    probe: bool,
    pinned_column: Option<usize>,
}

impl RegisterLayout {
    pub fn new(n: usize, k: usize, l: usize, scratch: bool) -> Result<Self> {
        let layout = RegisterLayout {
            n,
            k,
            l,
            scratch,
            probe: false,
            pinned_column: None,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Layout with no hyperplane qubits; the circuit acts on column `column`.
    pub fn single_column(n: usize, l: usize, column: usize) -> Result<Self> {
        let layout = RegisterLayout {
            n,
            k: 0,
            l,
            scratch: false,
            probe: false,
            pinned_column: Some(column),
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn with_scratch(mut self) -> Self {
        self.scratch = true;
        self
    }

    pub fn with_probe(mut self) -> Self {
        self.probe = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let total = self.num_qubits();
        if total == 0 {
            return Err(Error::InvalidParameter("layout has no qubits".into()));
        }
        if total > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "layout needs {total} qubits, more than the {MAX_QUBITS} supported"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn has_scratch(&self) -> bool {
        self.scratch
    }

    pub fn pinned_column(&self) -> Option<usize> {
        self.pinned_column
    }

    pub fn num_qubits(&self) -> usize {
        self.n + self.k + self.l + self.scratch as usize + self.probe as usize
    }

    pub fn size(&self, reg: Register) -> usize {
        match reg {
            Register::Data => self.n,
            Register::Hyperplane => self.k,
            Register::Phase => self.l,
            Register::Scratch => self.scratch as usize,
            Register::Probe => self.probe as usize,
        }
    }

    fn offset(&self, reg: Register) -> usize {
        match reg {
            Register::Data => 0,
            Register::Hyperplane => self.n,
            Register::Phase => self.n + self.k,
            Register::Scratch => self.n + self.k + self.l,
            Register::Probe => self.n + self.k + self.l + self.scratch as usize,
        }
    }

    /// Global qubit index of position `pos` within `reg`.
    pub fn qubit(&self, reg: Register, pos: usize) -> Result<usize> {
        let size = self.size(reg);
        if pos >= size {
            return Err(Error::IndexOutOfRange {
                what: "register position",
                index: pos,
                limit: size,
            });
        }
        Ok(self.offset(reg) + pos)
    }

    /// All qubits of `reg`, least significant position first.
    pub fn qubits(&self, reg: Register) -> Vec<usize> {
        let start = self.offset(reg);
        (start..start + self.size(reg)).collect()
    }

    pub fn scratch_qubit(&self) -> Option<usize> {
        self.scratch.then(|| self.offset(Register::Scratch))
    }

    pub fn probe_qubit(&self) -> Option<usize> {
        self.probe.then(|| self.offset(Register::Probe))
    }

    #[inline]
    pub fn data_index(&self, basis: usize) -> usize {
        basis & ((1usize << self.n) - 1)
    }

    #[inline]
    pub fn column_index(&self, basis: usize) -> usize {
        match self.pinned_column {
            Some(j) => j,
            None => (basis >> self.n) & ((1usize << self.k) - 1),
        }
    }

    #[inline]
    pub fn phase_value(&self, basis: usize) -> usize {
        (basis >> (self.n + self.k)) & ((1usize << self.l) - 1)
    }

    pub fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::LayoutMismatch(format!(
                "layout spans {} qubits, state has {}",
                self.num_qubits(),
                state.num_qubits()
            )));
        }
        Ok(())
    }
}

/// Normalized amplitude vector over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                what: "basis state",
                index,
                limit: dim,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(StateVector {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// `|+⟩^n ⊗ (|j⟩ or |+⟩^k) ⊗ |+⟩^l`, with scratch and probe in `|0⟩`.
    pub fn new_uniform(layout: &RegisterLayout, fixed_j: Option<usize>) -> Result<Self> {
        let k = layout.k();
        if let Some(j) = fixed_j {
            let limit = 1usize << k;
            let pinned_ok = k == 0 && layout.pinned_column() == Some(j);
            if j >= limit && !pinned_ok {
                return Err(Error::IndexOutOfRange {
                    what: "hyperplane",
                    index: j,
                    limit,
                });
            }
        }
        let q = layout.num_qubits();
        let mut fixed_mask = 0usize;
        let mut fixed_value = 0usize;
        let mut free = layout.n() + layout.l();
        match fixed_j {
            Some(j) if k > 0 => {
                fixed_mask |= ((1usize << k) - 1) << layout.n();
                fixed_value |= j << layout.n();
            }
            Some(_) => {}
            None => free += k,
        }
        for q in layout.scratch_qubit().into_iter().chain(layout.probe_qubit()) {
            fixed_mask |= 1 << q;
        }
        let amp = Complex64::new((0.5f64).powf(free as f64 / 2.0), 0.0);
        let amplitudes = (0..1usize << q)
            .map(|x| if x & fixed_mask == fixed_value { amp } else { ZERO })
            .collect();
        Ok(StateVector {
            num_qubits: q,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Validates a list of distinct qubits and returns their bit mask.
    fn qubit_mask(&self, qubits: &[usize]) -> Result<usize> {
        let mut mask = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            if mask & (1 << q) != 0 {
                return Err(Error::DuplicateQubit(q));
            }
            mask |= 1 << q;
        }
        Ok(mask)
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let stride = 1usize << q;
        for chunk in self.amplitudes.chunks_mut(stride << 1) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * s;
                *b = (x - y) * s;
            }
        }
        Ok(())
    }

    pub fn apply_hadamards(&mut self, qubits: &[usize]) -> Result<()> {
        self.qubit_mask(qubits)?;
        for &q in qubits {
            self.apply_hadamard(q)?;
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = 1usize << q;
        for chunk in self.amplitudes.chunks_mut(stride << 1) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.swap_with_slice(hi);
        }
        Ok(())
    }

    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        self.apply_conditional_phase_flip(&[(q, true)])
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::OverlappingQubits(a));
        }
        self.apply_conditional_phase_flip(&[(a, true), (b, true)])
    }

    /// Negates every amplitude whose listed qubits match the given values.
    pub fn apply_conditional_phase_flip(&mut self, pattern: &[(usize, bool)]) -> Result<()> {
        let qubits: Vec<usize> = pattern.iter().map(|&(q, _)| q).collect();
        let mask = self.qubit_mask(&qubits)?;
        let value = pattern
            .iter()
            .filter(|&&(_, v)| v)
            .fold(0usize, |acc, &(q, _)| acc | (1 << q));
        for (x, a) in self.amplitudes.iter_mut().enumerate() {
            if x & mask == value {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// `2|0⟩⟨0| − I` on the listed qubits.
    pub fn apply_phase_flip_all_zero(&mut self, qubits: &[usize]) -> Result<()> {
        let mask = self.qubit_mask(qubits)?;
        for (x, a) in self.amplitudes.iter_mut().enumerate() {
            if x & mask != 0 {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Z on `target`, applied only where every control qubit is `|0⟩`.
    pub fn apply_open_controlled_z(&mut self, target: usize, open_controls: &[usize]) -> Result<()> {
        if open_controls.contains(&target) {
            return Err(Error::OverlappingQubits(target));
        }
        let mut pattern = vec![(target, true)];
        pattern.extend(open_controls.iter().map(|&c| (c, false)));
        self.apply_conditional_phase_flip(&pattern)
    }

    /// Forward QFT on the register formed by `qubits` (first entry least significant).
    pub fn apply_qft(&mut self, qubits: &[usize]) -> Result<()> {
        self.apply_fourier(qubits, 1.0)
    }

    /// Inverse QFT: `Σ_x e^{2πi x y / 2^l} |x⟩ / √2^l ↦ |y⟩`.
    pub fn apply_inverse_qft(&mut self, qubits: &[usize]) -> Result<()> {
        self.apply_fourier(qubits, -1.0)
    }

    fn apply_fourier(&mut self, qubits: &[usize], sign: f64) -> Result<()> {
        if qubits.is_empty() {
            return Err(Error::InvalidParameter("QFT needs at least one qubit".into()));
        }
        let mask = self.qubit_mask(qubits)?;
        let dim = 1usize << qubits.len();
        let scale = 1.0 / (dim as f64).sqrt();
        let twiddle: Vec<Complex64> = (0..dim)
            .map(|t| Complex64::from_polar(scale, sign * 2.0 * PI * t as f64 / dim as f64))
            .collect();
        let offsets = register_offsets(qubits);
        let mut input = vec![ZERO; dim];
        for base in 0..self.amplitudes.len() {
            if base & mask != 0 {
                continue;
            }
            for (slot, &off) in input.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (y, &off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (x, &a) in input.iter().enumerate() {
                    acc += twiddle[(x * y) % dim] * a;
                }
                self.amplitudes[base | off] = acc;
            }
        }
        Ok(())
    }

    /// `2|+⟩⟨+| − I` on `qubits` (the `H S H` diffusion block), optionally
    /// applied only where `control` is `|1⟩`.
    pub fn reflect_about_uniform(&mut self, qubits: &[usize], control: Option<usize>) -> Result<()> {
        let mask = self.qubit_mask(qubits)?;
        if let Some(c) = control {
            self.check_qubit(c)?;
            if mask & (1 << c) != 0 {
                return Err(Error::OverlappingQubits(c));
            }
        }
        let ctrl_mask = control.map_or(0, |c| 1usize << c);
        let width = qubits.len();
        if mask == (1usize << width) - 1 {
            // Contiguous low register: each block of 2^width amplitudes is one slice.
            let block = 1usize << width;
            for (b, chunk) in self.amplitudes.chunks_mut(block).enumerate() {
                if (b * block) & ctrl_mask == ctrl_mask {
                    reflect_slice(chunk);
                }
            }
            return Ok(());
        }
        let offsets = register_offsets(qubits);
        let inv = 1.0 / offsets.len() as f64;
        for base in 0..self.amplitudes.len() {
            if base & mask != 0 || base & ctrl_mask != ctrl_mask {
                continue;
            }
            let sum: Complex64 = offsets.iter().map(|&o| self.amplitudes[base | o]).sum();
            let twice_mean = sum * (2.0 * inv);
            for &o in &offsets {
                let a = &mut self.amplitudes[base | o];
                *a = twice_mean - *a;
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Total probability of basis states with qubit `q` equal to `value`.
    pub fn weight_where(&self, q: usize, value: bool) -> Result<f64> {
        self.check_qubit(q)?;
        let want = if value { 1usize << q } else { 0 };
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(x, _)| x & (1 << q) == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Distribution of the register value formed by `qubits`.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.qubit_mask(qubits)?;
        let mut probs = vec![0.0; 1usize << qubits.len()];
        for (x, a) in self.amplitudes.iter().enumerate() {
            let v = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (m, &q)| acc | (((x >> q) & 1) << m));
            probs[v] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Samples a measurement of the register formed by `qubits` (no collapse).
    pub fn sample_register<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<usize> {
        let probs = self.marginal_probabilities(qubits)?;
        Ok(sample_index(&probs, rng))
    }
}

/// Inverse-CDF draw from a (possibly slightly unnormalized) distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut r = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if r < p {
            return i;
        }
        r -= p;
    }
    // Rounding fell off the end; return the last outcome with support.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn register_offsets(qubits: &[usize]) -> Vec<usize> {
    (0..1usize << qubits.len())
        .map(|v| {
            qubits
                .iter()
                .enumerate()
                .filter(|(m, _)| v >> m & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | (1 << q))
        })
        .collect()
}

#[inline]
pub(crate) fn reflect_slice(slice: &mut [Complex64]) {
    let sum: Complex64 = slice.iter().sum();
    let twice_mean = sum * (2.0 / slice.len() as f64);
    for a in slice.iter_mut() {
        *a = twice_mean - *a;
    }
}
