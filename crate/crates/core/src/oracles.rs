//! The Boolean matrix `f(i, j)` and its metered quantum oracles.
//!
//! Three oracle forms act on a [`StateVector`] laid out by [`RegisterLayout`]:
//!
//! * bit oracle `U_f′|i, j, a⟩ = |i, j, a ⊕ f(i, j)⟩` on the scratch qubit;
//! * phase oracle `U_f|i, j⟩ = (−1)^{f(i, j)}|i, j⟩`, one bit-oracle call with
//!   the scratch qubit in `|−⟩`;
//! * controlled phase oracle, `U_f′ · CZ(control, scratch) · U_f′` with the
//!   scratch qubit in `|0⟩`, two bit-oracle calls.
//!
//! Layouts without a scratch qubit get the same unitary applied directly and
//! are charged exactly what the scratch construction would cost, so the
//! [`QueryLedger`] reads identically either way.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::perceptron::{correctly_classifies, Dataset, Hyperplane};
use crate::statevec::{RegisterLayout, StateVector};

/// Largest weight the scratch qubit may keep on `|1⟩` after a controlled call.
pub const SCRATCH_TOLERANCE: f64 = 1e-12;

/// `N × K` table over `{0, 1}`, row `i` = data element, column `j` = hyperplane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("truth table needs N ≥ 1 and K ≥ 1".into()));
        }
        if bits.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: bits.len(),
            });
        }
        Ok(TruthTable { rows, cols, bits })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let bits = (0..rows * cols).map(|x| f(x / cols, x % cols)).collect();
        TruthTable::new(rows, cols, bits)
    }

    /// Builds a table from 0/1 rows.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            for &b in r {
                match b {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    other => {
                        return Err(Error::InvalidParameter(format!("entry {other} is not 0 or 1")))
                    }
                }
            }
        }
        TruthTable::new(rows.len(), cols, bits)
    }

    /// `f(i, j) = 1` iff `planes[j]` classifies `data[i]` correctly.
    pub fn from_perceptron(data: &Dataset, planes: &[Hyperplane]) -> Result<Self> {
        let mut bits = Vec::with_capacity(data.len() * planes.len());
        for point in data.points() {
            for p in planes {
                bits.push(correctly_classifies(p, point)?);
            }
        }
        TruthTable::new(data.len(), planes.len(), bits)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = bool> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }

    /// `N K`, then `N` lines of `K` space-separated digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<&str> = (0..self.cols)
                .map(|j| if self.get(i, j) { "1" } else { "0" })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(hline, "header must be `N K`"))?;
        let [rows, cols] = dims[..] else {
            return Err(parse_err(hline, "header must be `N K`"));
        };
        let mut bits = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (line, body) in lines {
            let before = bits.len();
            for tok in body.split_whitespace() {
                match tok {
                    "0" => bits.push(false),
                    "1" => bits.push(true),
                    _ => return Err(parse_err(line, format!("`{tok}` is not 0 or 1"))),
                }
            }
            if bits.len() - before != cols {
                return Err(parse_err(line, format!("expected {cols} entries")));
            }
            seen += 1;
        }
        if seen != rows {
            return Err(parse_err(hline, format!("header announces {rows} rows, found {seen}")));
        }
        TruthTable::new(rows, cols, bits)
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        TruthTable::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Smallest `q ≥ 1` with `2^q ≥ count`.
pub fn register_width(count: usize) -> usize {
    count.next_power_of_two().trailing_zeros().max(1) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryKind {
    BitOracle,
    PhaseOracle,
    ControlledPhaseOracle,
    ClassicalF,
}

/// Oracle invocation counts. Only ever grows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub bit_oracle: u64,
    pub phase_oracle: u64,
    pub controlled_phase_oracle: u64,
    pub classical_f: u64,
}

impl QueryLedger {
    pub fn count(&self, kind: QueryKind) -> u64 {
        match kind {
            QueryKind::BitOracle => self.bit_oracle,
            QueryKind::PhaseOracle => self.phase_oracle,
            QueryKind::ControlledPhaseOracle => self.controlled_phase_oracle,
            QueryKind::ClassicalF => self.classical_f,
        }
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &QueryLedger) -> QueryLedger {
        QueryLedger {
            bit_oracle: self.bit_oracle - earlier.bit_oracle,
            phase_oracle: self.phase_oracle - earlier.phase_oracle,
            controlled_phase_oracle: self.controlled_phase_oracle - earlier.controlled_phase_oracle,
            classical_f: self.classical_f - earlier.classical_f,
        }
    }

    pub fn add(&mut self, delta: &QueryLedger) {
        self.bit_oracle += delta.bit_oracle;
        self.phase_oracle += delta.phase_oracle;
        self.controlled_phase_oracle += delta.controlled_phase_oracle;
        self.classical_f += delta.classical_f;
    }

    pub fn scaled(&self, times: u64) -> QueryLedger {
        QueryLedger {
            bit_oracle: self.bit_oracle * times,
            phase_oracle: self.phase_oracle * times,
            controlled_phase_oracle: self.controlled_phase_oracle * times,
            classical_f: self.classical_f * times,
        }
    }
}

/// A truth table bound to its query ledger. Every oracle call goes through here.
#[derive(Clone, Debug)]
pub struct OracleHandle {
    table: TruthTable,
    n: usize,
    k: usize,
    /// Padded columns, `columns[j][i] = f(i, j)` over `2^k × 2^n`.
    columns: Vec<Vec<bool>>,
    ledger: QueryLedger,
}

impl OracleHandle {
    /// Pads the table to `2^n × 2^k`: padded rows read 1 (they never block the
    /// AND), padded columns read 0 (they are never solutions).
    pub fn new(table: TruthTable) -> Self {
        let n = register_width(table.rows());
        let k = register_width(table.cols());
        let columns = (0..1usize << k)
            .map(|j| {
                (0..1usize << n)
                    .map(|i| j < table.cols() && (i >= table.rows() || table.get(i, j)))
                    .collect()
            })
            .collect();
        OracleHandle {
            table,
            n,
            k,
            columns,
            ledger: QueryLedger::default(),
        }
    }

    pub fn table(&self) -> &TruthTable {
        &self.table
    }

    /// Data-register width `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Hyperplane-register width `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    /// Unmetered read of the padded table. Test and diagnostic use only.
    pub fn peek(&self, i: usize, j: usize) -> bool {
        self.columns[j][i]
    }

    /// Records calls the simulator replayed from an earlier identical run.
    pub(crate) fn charge(&mut self, delta: &QueryLedger) {
        self.ledger.add(delta);
    }

    /// One classical query `f(i, j)` on the unpadded table.
    pub fn query_classical(&mut self, i: usize, j: usize) -> Result<bool> {
        self.check_entry(i, j)?;
        self.ledger.classical_f += 1;
        Ok(self.table.get(i, j))
    }

    /// Exact `L_j = Σ_i f(i, j)` by a full classical column scan.
    pub fn column_count(&mut self, j: usize) -> Result<usize> {
        self.check_entry(0, j)?;
        self.ledger.classical_f += self.table.rows() as u64;
        Ok(self.table.column(j).filter(|&b| b).count())
    }

    fn check_entry(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.table.rows() {
            return Err(Error::IndexOutOfRange {
                what: "data",
                index: i,
                limit: self.table.rows(),
            });
        }
        if j >= self.table.cols() {
            return Err(Error::IndexOutOfRange {
                what: "hyperplane",
                index: j,
                limit: self.table.cols(),
            });
        }
        Ok(())
    }

    fn check_layout(&self, layout: &RegisterLayout, state: &StateVector) -> Result<()> {
        layout.check_state(state)?;
        if layout.n() != self.n {
            return Err(Error::LayoutMismatch(format!(
                "data register has {} qubits, table needs {}",
                layout.n(),
                self.n
            )));
        }
        match layout.pinned_column() {
            Some(j) if layout.k() == 0 => {
                if j >= 1 << self.k {
                    return Err(Error::IndexOutOfRange {
                        what: "hyperplane",
                        index: j,
                        limit: 1 << self.k,
                    });
                }
            }
            _ if layout.k() != self.k => {
                return Err(Error::LayoutMismatch(format!(
                    "hyperplane register has {} qubits, table needs {}",
                    layout.k(),
                    self.k
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// `U_f′`: XORs `f(i, j)` into the scratch qubit.
    pub fn apply_bit_oracle(&mut self, state: &mut StateVector, layout: &RegisterLayout) -> Result<()> {
        self.check_layout(layout, state)?;
        let scratch = layout.scratch_qubit().ok_or(Error::MissingScratch)?;
        let s = 1usize << scratch;
        let amps = state.amplitudes_mut();
        for x in 0..amps.len() {
            if x & s == 0 && self.columns[layout.column_index(x)][layout.data_index(x)] {
                amps.swap(x, x | s);
            }
        }
        self.ledger.bit_oracle += 1;
        Ok(())
    }

    /// `U_f|i, j⟩ = (−1)^{f(i, j)}|i, j⟩`.
    pub fn apply_phase_oracle(&mut self, state: &mut StateVector, layout: &RegisterLayout) -> Result<()> {
        self.check_layout(layout, state)?;
        match layout.scratch_qubit() {
            Some(scratch) => {
                state.apply_x(scratch)?;
                state.apply_hadamard(scratch)?;
                self.apply_bit_oracle(state, layout)?;
                state.apply_hadamard(scratch)?;
                state.apply_x(scratch)?;
            }
            None => {
                self.flip_marked(state, layout, None);
                self.ledger.bit_oracle += 1;
            }
        }
        self.ledger.phase_oracle += 1;
        Ok(())
    }

    /// `|c⟩|i, j⟩ ↦ (−1)^{c·f(i, j)}|c⟩|i, j⟩`, built from two bit-oracle calls.
    pub fn apply_controlled_phase_oracle(
        &mut self,
        state: &mut StateVector,
        control: usize,
        layout: &RegisterLayout,
    ) -> Result<()> {
        self.check_layout(layout, state)?;
        if control < layout.n() + layout.k() || Some(control) == layout.scratch_qubit() {
            return Err(Error::OverlappingQubits(control));
        }
        if control >= state.num_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: control,
                num_qubits: state.num_qubits(),
            });
        }
        match layout.scratch_qubit() {
            Some(scratch) => {
                self.apply_bit_oracle(state, layout)?;
                state.apply_cz(control, scratch)?;
                self.apply_bit_oracle(state, layout)?;
                let weight = state.weight_where(scratch, true)?;
                if weight > SCRATCH_TOLERANCE {
                    return Err(Error::ScratchEntangled { weight });
                }
            }
            None => {
                self.flip_marked(state, layout, Some(control));
                self.ledger.bit_oracle += 2;
            }
        }
        self.ledger.controlled_phase_oracle += 1;
        Ok(())
    }

    /// Negates amplitudes with `f(i, j) = 1` (and `control = 1` if given).
    fn flip_marked(&self, state: &mut StateVector, layout: &RegisterLayout, control: Option<usize>) {
        let block = 1usize << layout.n();
        let ctrl = control.map_or(0, |c| 1usize << c);
        for (b, chunk) in state.amplitudes_mut().chunks_mut(block).enumerate() {
            let base = b * block;
            if base & ctrl != ctrl {
                continue;
            }
            let column = &self.columns[layout.column_index(base)];
            for (a, &marked) in chunk.iter_mut().zip(column) {
                if marked {
                    *a = -*a;
                }
            }
        }
    }
}

/// Column-AND vector `g(j) = ⋀_i f(i, j)` of an unpadded table.
pub fn column_and(table: &TruthTable) -> Vec<bool> {
    (0..table.cols()).map(|j| table.column(j).all(|b| b)).collect()
}

/// Small named tables used across tests, docs and the CLI.
pub mod fixtures {
    use super::TruthTable;

    /// The 4 × 3 table whose third column is the only all-ones column.
    pub fn elementary_table() -> TruthTable {
        TruthTable::from_rows(&[[0u8, 1, 1], [0, 1, 1], [0, 0, 1], [1, 1, 1]]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::elementary_table;
    use super::*;
    use num_complex::Complex64;
    use crate::perceptron::{generate_planted_dataset, sample_hyperplanes};
    use crate::statevec::Register;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(rows: usize, cols: usize, seed: u64) -> TruthTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TruthTable::from_fn(rows, cols, |_, _| rng.random_bool(0.6)).unwrap()
    }

    fn random_state(q: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> = (0..1 << q)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    /// Random state with the scratch qubit (the top one) in |0⟩.
    fn random_state_clear_scratch(q: usize, seed: u64) -> StateVector {
        let inner = random_state(q - 1, seed);
        let mut amps = inner.amplitudes().to_vec();
        amps.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), amps.len()));
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn from_perceptron_matches_entrywise() {
        let (data, planted) = generate_planted_dataset(12, 2, 0.195, 3).unwrap();
        let mut planes = sample_hyperplanes(2, 2, 9).unwrap();
        planes.insert(0, planted.clone());
        let table = TruthTable::from_perceptron(&data, &planes).unwrap();
        assert!(table.column(0).all(|b| b));
        for (i, p) in data.points().iter().enumerate() {
            for (j, h) in planes.iter().enumerate() {
                assert_eq!(table.get(i, j), correctly_classifies(h, p).unwrap());
            }
        }
        let only = TruthTable::from_perceptron(&data, &[planted]).unwrap();
        assert_eq!(column_and(&only), vec![true]);
    }

    #[test]
    fn padding_rules() {
        let h = OracleHandle::new(elementary_table());
        assert_eq!((h.n(), h.k()), (2, 2));
        assert!((0..4).all(|i| !h.peek(i, 3)));
        let tall = OracleHandle::new(TruthTable::from_rows(&[[1u8, 0], [1, 1], [1, 0]]).unwrap());
        assert!(tall.peek(3, 0) && tall.peek(3, 1));
        let single = OracleHandle::new(TruthTable::from_rows(&[[1u8]]).unwrap());
        assert_eq!((single.n(), single.k()), (1, 1));
    }

    #[test]
    fn bit_oracle_example() {
        let mut h = OracleHandle::new(elementary_table());
        let layout = RegisterLayout::new(2, 2, 0, true).unwrap();
        let i = 3;
        let j = 2;
        let mut s = StateVector::basis(5, i | j << 2).unwrap();
        h.apply_bit_oracle(&mut s, &layout).unwrap();
        assert_eq!(s.amplitude(i | j << 2 | 1 << 4).re, 1.0);
        assert_eq!(h.ledger().bit_oracle, 1);

        let no_scratch = RegisterLayout::new(2, 2, 0, false).unwrap();
        let mut t = StateVector::zero(4).unwrap();
        assert!(matches!(
            h.apply_bit_oracle(&mut t, &no_scratch),
            Err(Error::MissingScratch)
        ));
    }

    #[test]
    fn bit_oracle_is_an_involution_and_zero_table_is_identity() {
        let layout = RegisterLayout::new(2, 2, 1, true).unwrap();
        let r = random_state(6, 1);
        let mut h = OracleHandle::new(elementary_table());
        let mut s = r.clone();
        h.apply_bit_oracle(&mut s, &layout).unwrap();
        h.apply_bit_oracle(&mut s, &layout).unwrap();
        assert_eq!(s, r);

        let mut zero = OracleHandle::new(TruthTable::from_fn(4, 4, |_, _| false).unwrap());
        let mut s = r.clone();
        zero.apply_bit_oracle(&mut s, &layout).unwrap();
        assert_eq!(s, r);
    }

    #[test]
    fn phase_oracle_examples() {
        for scratch in [false, true] {
            let mut h = OracleHandle::new(elementary_table());
            for (j, expected) in [(2usize, [-1.0, -1.0, -1.0, -1.0]), (0, [1.0, 1.0, 1.0, -1.0])] {
                let mut layout = RegisterLayout::new(2, 2, 0, false).unwrap();
                if scratch {
                    layout = layout.with_scratch();
                }
                let mut s = StateVector::new_uniform(&layout, Some(j)).unwrap();
                h.apply_phase_oracle(&mut s, &layout).unwrap();
                for (i, e) in expected.iter().enumerate() {
                    assert!((s.amplitude(i | j << 2).re - 0.5 * e).abs() < 1e-12);
                }
                if scratch {
                    assert!(s.weight_where(4, true).unwrap() < 1e-24);
                }
            }
            assert_eq!(h.ledger().phase_oracle, 2);
            assert_eq!(h.ledger().bit_oracle, 2);
        }
    }

    #[test]
    fn both_phase_oracle_forms_are_unitary_involutions() {
        for seed in 0..5 {
            let table = random_table(4, 8, seed);
            let mut h = OracleHandle::new(table);
            let direct = RegisterLayout::new(2, 3, 1, false).unwrap();
            let r = random_state(6, seed + 10);
            let mut s = r.clone();
            h.apply_phase_oracle(&mut s, &direct).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
            // Same data/hyperplane/phase amplitudes, plus a scratch qubit in |0⟩.
            let mut via_scratch = random_state_clear_scratch(7, seed + 10);
            let scratch = direct.clone().with_scratch();
            h.apply_phase_oracle(&mut via_scratch, &scratch).unwrap();
            for x in 0..64 {
                assert!((via_scratch.amplitude(x) - s.amplitude(x)).norm() < 1e-10);
                assert!(via_scratch.amplitude(x | 64).norm() < 1e-10);
            }
            h.apply_phase_oracle(&mut s, &direct).unwrap();
            for x in 0..64 {
                assert!((s.amplitude(x) - r.amplitude(x)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn controlled_phase_oracle_examples() {
        let mut h = OracleHandle::new(elementary_table());
        // data 0..2, hyperplane 2..4, phase (control) 4, scratch 5
        let layout = RegisterLayout::new(2, 2, 1, true).unwrap();
        let control = layout.qubit(Register::Phase, 0).unwrap();
        for x in 0..16usize {
            let mut s = StateVector::basis(6, x).unwrap();
            h.apply_controlled_phase_oracle(&mut s, control, &layout).unwrap();
            assert_eq!(s.amplitude(x).re, 1.0);
        }
        let x = 2 | 2 << 2 | 1 << control;
        let mut s = StateVector::basis(6, x).unwrap();
        h.apply_controlled_phase_oracle(&mut s, control, &layout).unwrap();
        assert_eq!(s.amplitude(x).re, -1.0);
        assert_eq!(h.ledger().controlled_phase_oracle, 17);
        assert_eq!(h.ledger().bit_oracle, 34);

        assert!(matches!(
            h.apply_controlled_phase_oracle(&mut s, 1, &layout),
            Err(Error::OverlappingQubits(1))
        ));
    }

    #[test]
    fn controlled_oracle_detects_dirty_scratch() {
        let mut h = OracleHandle::new(elementary_table());
        let layout = RegisterLayout::new(2, 2, 1, true).unwrap();
        let mut s = StateVector::basis(6, 2 | 2 << 2 | 1 << 4 | 1 << 5).unwrap();
        // Scratch starts in |1⟩, so it is still |1⟩ afterwards.
        let err = h.apply_controlled_phase_oracle(&mut s, 4, &layout).unwrap_err();
        assert!(matches!(err, Error::ScratchEntangled { weight } if (weight - 1.0).abs() < 1e-12));
    }

    /// `U_f′·CZ·U_f′` on the scratch-|0⟩ sector against `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U_f`.
    #[test]
    fn controlled_oracle_identity_dense() {
        for seed in 0..8u64 {
            let (rows, cols) = [(4, 4), (8, 2), (2, 8), (4, 8)][seed as usize % 4];
            let table = random_table(rows, cols, seed);
            let mut h = OracleHandle::new(table.clone());
            let (n, k) = (h.n(), h.k());
            let layout = RegisterLayout::new(n, k, 1, true).unwrap();
            let control = n + k;
            for x in 0..1usize << (n + k + 1) {
                let mut s = StateVector::basis(n + k + 2, x).unwrap();
                h.apply_controlled_phase_oracle(&mut s, control, &layout).unwrap();
                let i = x & ((1 << n) - 1);
                let j = (x >> n) & ((1 << k) - 1);
                let c = x >> control & 1 == 1;
                let expect = if c && h.peek(i, j) { -1.0 } else { 1.0 };
                for y in 0..s.dim() {
                    let want = if y == x { expect } else { 0.0 };
                    assert!((s.amplitude(y).re - want).abs() < 1e-10);
                    assert!(s.amplitude(y).im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn column_count_examples() {
        let mut h = OracleHandle::new(elementary_table());
        let counts: Vec<usize> = (0..3).map(|j| h.column_count(j).unwrap()).collect();
        assert_eq!(counts, vec![1, 3, 4]);
        assert_eq!(h.ledger().classical_f, 12);
        assert!(h.column_count(3).is_err());

        let mut ones = OracleHandle::new(TruthTable::from_fn(8, 1, |_, _| true).unwrap());
        assert_eq!(ones.column_count(0).unwrap(), 8);

        let table = random_table(13, 5, 77);
        let mut h = OracleHandle::new(table.clone());
        for j in 0..5 {
            let mut sum = 0;
            for i in 0..13 {
                sum += table.get(i, j) as usize;
            }
            assert_eq!(h.column_count(j).unwrap(), sum);
        }
    }

    #[test]
    fn layout_mismatch_is_reported() {
        let mut h = OracleHandle::new(elementary_table());
        let wrong = RegisterLayout::new(3, 2, 0, false).unwrap();
        let mut s = StateVector::zero(5).unwrap();
        assert!(matches!(
            h.apply_phase_oracle(&mut s, &wrong),
            Err(Error::LayoutMismatch(_))
        ));
        let pinned = RegisterLayout::single_column(2, 1, 9).unwrap();
        let mut s = StateVector::zero(3).unwrap();
        assert!(h.apply_phase_oracle(&mut s, &pinned).is_err());
    }

    #[test]
    fn text_format() {
        let t = elementary_table();
        assert_eq!(t.to_text(), "4 3\n0 1 1\n0 1 1\n0 0 1\n1 1 1\n");
        assert_eq!(TruthTable::from_text(&t.to_text()).unwrap(), t);
        assert!(TruthTable::from_text("2 2\n0 1\n").is_err());
        assert!(TruthTable::from_text("1 2\n0 2\n").is_err());
        assert!(TruthTable::from_text("1 2\n0 1 1\n").is_err());
        assert!(TruthTable::from_text("x\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ledger_factor_of_two(calls in 1usize..6, controlled in 0usize..6, seed in 0u64..100) {
                let mut h = OracleHandle::new(random_table(4, 4, seed));
                let layout = RegisterLayout::new(2, 2, 1, true).unwrap();
                let mut s = StateVector::new_uniform(&layout, None).unwrap();
                for _ in 0..calls {
                    let before = h.ledger();
                    h.apply_phase_oracle(&mut s, &layout).unwrap();
                    prop_assert_eq!(h.ledger().since(&before).bit_oracle, 1);
                }
                for _ in 0..controlled {
                    let before = h.ledger();
                    h.apply_controlled_phase_oracle(&mut s, 4, &layout).unwrap();
                    prop_assert_eq!(h.ledger().since(&before).bit_oracle, 2);
                }
                let l = h.ledger();
                prop_assert_eq!(l.bit_oracle, l.phase_oracle + 2 * l.controlled_phase_oracle);
            }

            #[test]
            fn table_text_round_trip(rows in 1usize..10, cols in 1usize..10, seed in 0u64..1000) {
                let t = random_table(rows, cols, seed);
                prop_assert_eq!(TruthTable::from_text(&t.to_text()).unwrap(), t);
            }
        }
    }
}
