//! Grover operator, phase estimation and the SimAnd circuit.
//!
//! For a fixed column `j`, `G = (2|+⟩⟨+| − I) U_f` rotates the data register
//! inside span{|good_j⟩, |bad_j⟩} by `2θ_j`, `sin θ_j = √(L_j / 2^n)`, so its
//! eigenphases are `±2θ_j`. Phase estimation on `G` writes `θ_j/π` (or
//! `1 − θ_j/π`) into the phase register. The column is all ones exactly when
//! `θ_j = π/2`, i.e. when the phase register reads `100…0`. SimAnd marks that
//! readout with a `−1` and uncomputes the estimation.
//!
//! All circuits are diagonal in the hyperplane index, so they work both on a
//! full hyperplane register and on a pinned single-column layout.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracles::OracleHandle;
use crate::statevec::{sample_index, Register, RegisterLayout, StateVector};

/// Phase-register width used with an `n`-qubit data register: `⌈n/2⌉ + 3`.
pub fn l_bits(n: usize) -> usize {
    n.div_ceil(2) + 3
}

/// Bit-oracle calls made by one phase estimation with `l` phase qubits.
pub fn phase_estimate_cost(l: usize) -> u64 {
    2 * ((1u64 << l) - 1)
}

/// Bit-oracle calls made by one SimAnd with `l` phase qubits.
pub fn sim_and_cost(l: usize) -> u64 {
    2 * phase_estimate_cost(l)
}

/// Applies `G` (or its controlled form) to the data register.
pub fn grover_operator(
    state: &mut StateVector,
    layout: &RegisterLayout,
    handle: &mut OracleHandle,
    control: Option<usize>,
) -> Result<()> {
    match control {
        Some(c) => handle.apply_controlled_phase_oracle(state, c, layout)?,
        None => handle.apply_phase_oracle(state, layout)?,
    }
    state.reflect_about_uniform(&layout.qubits(Register::Data), control)
}

/// Applies `G† = U_f (2|+⟩⟨+| − I)`.
pub fn inverse_grover_operator(
    state: &mut StateVector,
    layout: &RegisterLayout,
    handle: &mut OracleHandle,
    control: Option<usize>,
) -> Result<()> {
    state.reflect_about_uniform(&layout.qubits(Register::Data), control)?;
    match control {
        Some(c) => handle.apply_controlled_phase_oracle(state, c, layout),
        None => handle.apply_phase_oracle(state, layout),
    }
}

fn phase_qubits(layout: &RegisterLayout) -> Result<Vec<usize>> {
    if layout.l() == 0 {
        return Err(Error::LayoutMismatch("layout has no phase register".into()));
    }
    Ok(layout.qubits(Register::Phase))
}

/// Controlled-`G^{2^t}` ladder followed by the inverse QFT on the phase register.
///
/// Expects the phase register in `|+⟩^l`. `G^{2^t}` is `2^t` separate calls.
pub fn phase_estimate(state: &mut StateVector, layout: &RegisterLayout, handle: &mut OracleHandle) -> Result<()> {
    let phase = phase_qubits(layout)?;
    for (t, &control) in phase.iter().enumerate() {
        for _ in 0..1usize << t {
            grover_operator(state, layout, handle, Some(control))?;
        }
    }
    state.apply_inverse_qft(&phase)
}

/// Exact inverse of [`phase_estimate`].
pub fn inverse_phase_estimate(
    state: &mut StateVector,
    layout: &RegisterLayout,
    handle: &mut OracleHandle,
) -> Result<()> {
    let phase = phase_qubits(layout)?;
    state.apply_qft(&phase)?;
    for (t, &control) in phase.iter().enumerate().rev() {
        for _ in 0..1usize << t {
            inverse_grover_operator(state, layout, handle, Some(control))?;
        }
    }
    Ok(())
}

/// The SimAnd circuit `U_g̃`: phase estimation, `−1` on readout `100…0`,
/// inverse phase estimation.
pub fn sim_and(state: &mut StateVector, layout: &RegisterLayout, handle: &mut OracleHandle) -> Result<()> {
    sim_and_with_control(state, layout, handle, None)
}

/// SimAnd whose marking step only fires where `control` is `|1⟩`.
///
/// The estimation and its inverse cancel on the `control = 0` branch, so this
/// is the controlled-SimAnd unitary at the query cost of a plain SimAnd.
pub fn sim_and_with_control(
    state: &mut StateVector,
    layout: &RegisterLayout,
    handle: &mut OracleHandle,
    control: Option<usize>,
) -> Result<()> {
    let phase = phase_qubits(layout)?;
    phase_estimate(state, layout, handle)?;
    let (&top, rest) = phase.split_last().expect("phase register is non-empty");
    let mut pattern: Vec<(usize, bool)> = vec![(top, true)];
    pattern.extend(rest.iter().map(|&q| (q, false)));
    if let Some(c) = control {
        if phase.contains(&c) {
            return Err(Error::OverlappingQubits(c));
        }
        pattern.push((c, true));
    }
    state.apply_conditional_phase_flip(&pattern)?;
    inverse_phase_estimate(state, layout, handle)
}

/// Exact simulation readout of `U_g̃` on one column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GTildeReadout {
    /// Sign of `Re⟨ψ|U_g̃|ψ⟩`: `−1` means the circuit marks the column.
    pub sign: i8,
    /// `|⟨ψ|U_g̃|ψ⟩|²`.
    pub fidelity: f64,
}

impl GTildeReadout {
    pub fn marks(&self) -> bool {
        self.sign < 0
    }
}

/// Runs SimAnd on `|+⟩^n|j⟩|+⟩^l` and reads the overlap with the input.
pub fn g_tilde_readout(j: usize, handle: &mut OracleHandle) -> Result<GTildeReadout> {
    g_tilde_readout_with(j, handle, l_bits(handle.n()))
}

/// [`g_tilde_readout`] with an explicit phase-register width.
pub fn g_tilde_readout_with(j: usize, handle: &mut OracleHandle, l: usize) -> Result<GTildeReadout> {
    check_column(j, handle)?;
    let layout = RegisterLayout::single_column(handle.n(), l, j)?;
    let input = StateVector::new_uniform(&layout, Some(j))?;
    let mut out = input.clone();
    sim_and(&mut out, &layout, handle)?;
    let overlap = input.inner_product(&out)?;
    Ok(GTildeReadout {
        sign: if overlap.re < 0.0 { -1 } else { 1 },
        fidelity: overlap.norm_sqr(),
    })
}

/// Probability that a phase-kickback measurement reports column `j` as marked.
///
/// A probe qubit in `|+⟩` controls the marking step of a single-column SimAnd;
/// measuring the probe in the X basis returns `1` with probability
/// `(1 − Re⟨ψ|U_g̃|ψ⟩)/2`. Costs one SimAnd.
pub fn kickback_probability(j: usize, handle: &mut OracleHandle, l: usize) -> Result<f64> {
    check_column(j, handle)?;
    let layout = RegisterLayout::single_column(handle.n(), l, j)?.with_probe();
    let probe = layout.probe_qubit().expect("layout has a probe");
    let mut state = StateVector::new_uniform(&layout, Some(j))?;
    state.apply_hadamard(probe)?;
    sim_and_with_control(&mut state, &layout, handle, Some(probe))?;
    state.apply_hadamard(probe)?;
    state.weight_where(probe, true)
}

fn check_column(j: usize, handle: &OracleHandle) -> Result<()> {
    let limit = 1usize << handle.k();
    if j >= limit {
        return Err(Error::IndexOutOfRange {
            what: "hyperplane",
            index: j,
            limit,
        });
    }
    Ok(())
}

/// Modal quantum-counting readout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountEstimate {
    /// Folded readout `min(s, 2^l − s)`.
    pub s: usize,
    pub l: usize,
    pub theta_hat: f64,
    /// `2^n sin²θ̂`; counts padded rows, which always read 1.
    pub l_hat: f64,
}

impl CountEstimate {
    fn from_readout(s: usize, l: usize, n: usize) -> Self {
        let theta_hat = PI * s as f64 / (1u64 << l) as f64;
        CountEstimate {
            s,
            l,
            theta_hat,
            l_hat: (1u64 << n) as f64 * theta_hat.sin().powi(2),
        }
    }

    /// `s₁ s₂ … s_l`, most significant first.
    pub fn s_bits(&self) -> String {
        format!("{:0width$b}", self.s, width = self.l)
    }
}

/// Estimates `L_j` from `shots` phase-estimation readouts, each charged in full.
pub fn quantum_count<R: Rng + ?Sized>(
    j: usize,
    handle: &mut OracleHandle,
    shots: usize,
    rng: &mut R,
) -> Result<CountEstimate> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    check_column(j, handle)?;
    let n = handle.n();
    let l = l_bits(n);
    let layout = RegisterLayout::single_column(n, l, j)?;
    let mut state = StateVector::new_uniform(&layout, Some(j))?;
    let before = handle.ledger();
    phase_estimate(&mut state, &layout, handle)?;
    let per_shot = handle.ledger().since(&before);
    handle.charge(&per_shot.scaled(shots as u64 - 1));

    let probs = state.marginal_probabilities(&layout.qubits(Register::Phase))?;
    let size = 1usize << l;
    let mut tally: HashMap<usize, usize> = HashMap::new();
    for _ in 0..shots {
        let s = sample_index(&probs, rng);
        *tally.entry(s.min(size - s)).or_default() += 1;
    }
    let (s, _) = tally
        .into_iter()
        .max_by_key(|&(s, c)| (c, std::cmp::Reverse(s)))
        .expect("at least one shot");
    Ok(CountEstimate::from_readout(s, l, n))
}

/// Checks `(2π − 2θ)/2π ≥ 1/2 + 2^{−(⌈n/2⌉+3)}` for `cos θ = √(m/2^n)`.
pub fn phase_gap_bound_check(n: usize, m: u64) -> Result<bool> {
    if n == 0 || n > 52 {
        return Err(Error::InvalidParameter(format!("n = {n} must lie in 1..=52")));
    }
    let size = 1u64 << n;
    if m == 0 || m > size {
        return Err(Error::InvalidParameter(format!("m = {m} must lie in 1..={size}")));
    }
    let theta = (m as f64 / size as f64).sqrt().acos();
    let lhs = (2.0 * PI - 2.0 * theta) / (2.0 * PI);
    let rhs = 0.5 + 0.5f64.powi(l_bits(n) as i32);
    Ok(lhs >= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::fixtures::elementary_table;
    use crate::oracles::{column_and, TruthTable};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn handle() -> OracleHandle {
        OracleHandle::new(elementary_table())
    }

    fn random_table(rows: usize, cols: usize, seed: u64) -> TruthTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let density: f64 = rng.random_range(0.5..1.0);
        TruthTable::from_fn(rows, cols, |_, _| rng.random_bool(density)).unwrap()
    }

    #[test]
    fn l_bits_examples() {
        assert_eq!(l_bits(1), 4);
        assert_eq!(l_bits(2), 4);
        assert_eq!(l_bits(5), 6);
        assert_eq!(l_bits(6), 6);
    }

    #[test]
    fn grover_on_all_ones_column_negates() {
        let mut h = handle();
        let layout = RegisterLayout::single_column(2, 0, 2).unwrap();
        let input = StateVector::new_uniform(&layout, Some(2)).unwrap();
        let mut s = input.clone();
        grover_operator(&mut s, &layout, &mut h, None).unwrap();
        let overlap = input.inner_product(&s).unwrap();
        assert!((overlap - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn grover_on_single_solution_column_hits_it() {
        // Column 0 has L = 1 (row 3): θ = π/6 and sin 3θ = 1.
        let mut h = handle();
        let layout = RegisterLayout::new(2, 2, 0, false).unwrap();
        let mut s = StateVector::new_uniform(&layout, Some(0)).unwrap();
        grover_operator(&mut s, &layout, &mut h, None).unwrap();
        assert!((s.amplitude(3).norm() - 1.0).abs() < 1e-12);
        // Nothing leaks to other columns.
        let outside: f64 = (0..16).filter(|x| x >> 2 != 0).map(|x| s.amplitude(x).norm_sqr()).sum();
        assert!(outside < 1e-24);
    }

    #[test]
    fn grover_inverse_round_trip() {
        let mut h = OracleHandle::new(random_table(5, 3, 4));
        let layout = RegisterLayout::new(3, 2, 1, false).unwrap();
        let mut s = StateVector::new_uniform(&layout, None).unwrap();
        s.apply_hadamard(5).unwrap();
        s.apply_z(0).unwrap();
        let r = s.clone();
        grover_operator(&mut s, &layout, &mut h, Some(5)).unwrap();
        inverse_grover_operator(&mut s, &layout, &mut h, Some(5)).unwrap();
        assert!((r.inner_product(&s).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_estimate_examples() {
        let mut h = handle();
        let layout = RegisterLayout::new(2, 2, 4, false).unwrap();
        let phase = layout.qubits(Register::Phase);

        let mut s = StateVector::new_uniform(&layout, Some(2)).unwrap();
        let before = h.ledger();
        phase_estimate(&mut s, &layout, &mut h).unwrap();
        assert_eq!(h.ledger().since(&before).bit_oracle, 30);
        let probs = s.marginal_probabilities(&phase).unwrap();
        assert!((probs[0b1000] - 1.0).abs() < 1e-12);

        let mut s = StateVector::new_uniform(&layout, Some(1)).unwrap();
        phase_estimate(&mut s, &layout, &mut h).unwrap();
        let probs = s.marginal_probabilities(&phase).unwrap();
        let argmax = (0..16).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap();
        // 1/3 and 2/3 are equally likely branches; 5/16 is nearest to 1/3.
        assert!(argmax == 5 || argmax == 11);
        assert!((probs[5] - probs[11]).abs() < 1e-12);
    }

    #[test]
    fn phase_estimate_round_trip() {
        let mut h = OracleHandle::new(random_table(4, 4, 9));
        let layout = RegisterLayout::new(2, 2, 3, false).unwrap();
        let input = StateVector::new_uniform(&layout, None).unwrap();
        let mut s = input.clone();
        phase_estimate(&mut s, &layout, &mut h).unwrap();
        inverse_phase_estimate(&mut s, &layout, &mut h).unwrap();
        assert!((input.inner_product(&s).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sim_and_examples() {
        let mut h = handle();
        let layout = RegisterLayout::single_column(2, 4, 2).unwrap();
        let input = StateVector::new_uniform(&layout, Some(2)).unwrap();
        let mut s = input.clone();
        let before = h.ledger();
        sim_and(&mut s, &layout, &mut h).unwrap();
        assert_eq!(h.ledger().since(&before).bit_oracle, sim_and_cost(4));
        assert_eq!(sim_and_cost(4), 60);
        let overlap = input.inner_product(&s).unwrap();
        assert!((overlap + 1.0).norm() < 1e-9);

        let r = g_tilde_readout(0, &mut h).unwrap();
        assert_eq!(r.sign, 1);
        assert!(r.fidelity >= 2.0 / 3.0);

        let mut zero = OracleHandle::new(TruthTable::from_fn(4, 3, |_, _| false).unwrap());
        for j in 0..4 {
            assert_eq!(g_tilde_readout(j, &mut zero).unwrap().sign, 1);
        }
    }

    #[test]
    fn g_tilde_readout_examples() {
        let mut h = handle();
        let r = g_tilde_readout(2, &mut h).unwrap();
        assert_eq!(r.sign, -1);
        assert!((r.fidelity - 1.0).abs() < 1e-9);
        let r = g_tilde_readout(1, &mut h).unwrap();
        assert_eq!(r.sign, 1);
        assert!(r.fidelity >= 2.0 / 3.0);
        // Padded column reads all zeros.
        assert_eq!(g_tilde_readout(3, &mut h).unwrap().sign, 1);
        assert!(g_tilde_readout(4, &mut h).is_err());

        let mut ones = OracleHandle::new(TruthTable::from_fn(5, 3, |_, _| true).unwrap());
        for j in 0..3 {
            let r = g_tilde_readout(j, &mut ones).unwrap();
            assert_eq!(r.sign, -1);
            assert!((r.fidelity - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn full_register_sim_and_matches_single_columns() {
        let table = random_table(6, 3, 21);
        let mut h = OracleHandle::new(table);
        let (n, k) = (h.n(), h.k());
        let l = l_bits(n);
        let layout = RegisterLayout::new(n, k, l, false).unwrap();
        let input = StateVector::new_uniform(&layout, None).unwrap();
        let mut s = input.clone();
        sim_and(&mut s, &layout, &mut h).unwrap();
        assert_eq!(h.ledger().bit_oracle, sim_and_cost(l));
        for j in 0..1usize << k {
            // ⟨ψ_j|out_j⟩ restricted to the |j⟩ slice, normalized per column.
            let mut overlap = Complex64::new(0.0, 0.0);
            let mut weight = 0.0;
            for x in 0..s.dim() {
                if (x >> n) & ((1 << k) - 1) == j {
                    overlap += input.amplitude(x).conj() * s.amplitude(x);
                    weight += input.amplitude(x).norm_sqr();
                }
            }
            let single = g_tilde_readout(j, &mut h).unwrap();
            let overlap = overlap / weight;
            assert!((overlap.norm_sqr() - single.fidelity).abs() < 1e-10, "column {j}");
            assert_eq!(if overlap.re < 0.0 { -1 } else { 1 }, single.sign);
        }
    }

    #[test]
    fn kickback_probability_matches_overlap() {
        let mut h = OracleHandle::new(random_table(7, 4, 5));
        let l = l_bits(h.n());
        for j in 0..4 {
            let layout = RegisterLayout::single_column(h.n(), l, j).unwrap();
            let input = StateVector::new_uniform(&layout, Some(j)).unwrap();
            let mut out = input.clone();
            sim_and(&mut out, &layout, &mut h).unwrap();
            let re = input.inner_product(&out).unwrap().re;
            let before = h.ledger();
            let p = kickback_probability(j, &mut h, l).unwrap();
            assert_eq!(h.ledger().since(&before).bit_oracle, sim_and_cost(l));
            assert!((p - (1.0 - re) / 2.0).abs() < 1e-10);
        }
        // All-ones column: probe flips with certainty.
        let mut h = handle();
        assert!((kickback_probability(2, &mut h, 4).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantum_count_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut h = handle();
        let e = quantum_count(2, &mut h, 20, &mut rng).unwrap();
        assert_eq!(e.s_bits(), "1000");
        assert!((e.l_hat - 4.0).abs() < 1e-9);
        assert_eq!(h.ledger().bit_oracle, 20 * phase_estimate_cost(4));

        let e = quantum_count(1, &mut h, 50, &mut rng).unwrap();
        assert!((e.theta_hat - PI / 3.0).abs() <= PI / 16.0);
        assert_eq!(e.l_hat.round(), 3.0);
        let e = quantum_count(0, &mut h, 50, &mut rng).unwrap();
        assert_eq!(e.l_hat.round(), 1.0);

        // Closest case: n = 3, L = 7.
        let mut close = OracleHandle::new(TruthTable::from_fn(8, 1, |i, _| i != 5).unwrap());
        let e = quantum_count(0, &mut close, 50, &mut rng).unwrap();
        assert_ne!(e.s, 1 << (e.l - 1));
        assert!(quantum_count(0, &mut close, 0, &mut rng).is_err());
    }

    #[test]
    fn phase_gap_bound_examples() {
        assert!(phase_gap_bound_check(2, 1).unwrap());
        assert!(phase_gap_bound_check(2, 4).unwrap());
        assert!(phase_gap_bound_check(2, 0).is_err());
        assert!(phase_gap_bound_check(2, 5).is_err());
        assert!(phase_gap_bound_check(0, 1).is_err());
        for n in 1..=12 {
            for m in 1..=1u64 << n {
                assert!(phase_gap_bound_check(n, m).unwrap(), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn simand_on_small_tables() {
        for seed in 0..12u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = rng.random_range(1..=16);
            let cols = rng.random_range(1..=6);
            let table = random_table(rows, cols, seed + 100);
            let g = column_and(&table);
            let mut h = OracleHandle::new(table);
            for (j, &gj) in g.iter().enumerate() {
                let r = g_tilde_readout(j, &mut h).unwrap();
                assert_eq!(r.marks(), gj, "seed {seed} column {j}");
                assert!(r.fidelity >= 2.0 / 3.0);
                if gj {
                    assert!((r.fidelity - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn too_few_phase_bits_break_the_closest_case() {
        // n = 2, L = 3 with l = ⌈n/2⌉: the readout lands on 100…0 too often.
        let mut h = OracleHandle::new(TruthTable::from_fn(4, 1, |i, _| i != 0).unwrap());
        let r = g_tilde_readout_with(0, &mut h, 1).unwrap();
        assert!(r.marks() || r.fidelity < 2.0 / 3.0);
    }
}
