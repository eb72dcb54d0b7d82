//! Seeded experiment drivers shared by the command-line tool and the test suites.
//!
//! Every randomized routine takes a base seed; item `i` of a batch uses
//! `seed + i`. Batches run on the rayon pool and return results in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::andor::{evaluate_direct, AndOrInstance};
use crate::baselines::classical_version_space_search;
use crate::counting::{phase_gap_bound_check, g_tilde_readout_with, l_bits, GTildeReadout};
use crate::error::Result;
use crate::oracles::{column_and, OracleHandle, QueryLedger, TruthTable};
use crate::perceptron::{
    generate_planted_dataset, in_version_space, sample_hyperplanes, Dataset, DEFAULT_SAMPLE_CONSTANT,
};
use crate::search::{bounded_error_search, train_perceptron_with, BeqConfig, GTildeOracle, SearchResult, TrainOutcome};
use crate::statevec::{RegisterLayout, StateVector};

/// Fidelity floor that SimAnd must clear on every column.
pub const SIMAND_FIDELITY: f64 = 2.0 / 3.0;

/// Allowed deviation from fidelity 1 on all-ones columns.
pub const EXACTNESS_TOLERANCE: f64 = 1e-9;

/// Seed of run `run` on the instance seeded `instance_seed`.
pub fn run_seed(instance_seed: u64, run: usize) -> u64 {
    instance_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(run as u64)
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct `x` values.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if logs.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

// ---------------------------------------------------------------- tables

/// Column kinds mixed into random test tables.
fn random_column(rng: &mut ChaCha8Rng, rows: usize) -> Vec<bool> {
    match rng.random_range(0..4) {
        0 => vec![true; rows],
        1 => {
            let zero = rng.random_range(0..rows);
            (0..rows).map(|i| i != zero).collect()
        }
        _ => {
            let density = rng.random_range(0.3..1.0);
            (0..rows).map(|_| rng.random_bool(density)).collect()
        }
    }
}

fn table_from_columns(rows: usize, columns: &[Vec<bool>]) -> TruthTable {
    TruthTable::from_fn(rows, columns.len(), |i, j| columns[j][i]).expect("non-empty")
}

/// Random table with at most `2^n_max` rows and `2^k_max` columns, mixing
/// all-ones columns, single-zero columns and random-density columns.
pub fn random_table(n_max: usize, k_max: usize, seed: u64) -> TruthTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(1..=1usize << n_max);
    let cols = rng.random_range(1..=1usize << k_max);
    let columns: Vec<Vec<bool>> = (0..cols).map(|_| random_column(&mut rng, rows)).collect();
    table_from_columns(rows, &columns)
}

/// Sweep instance: one all-ones column at a random position; every other
/// column has a single 0 at a random row. Classical scans pay the most on
/// these, and SimAnd sees the hardest gap to separate.
pub fn planted_sweep_table(rows: usize, cols: usize, seed: u64) -> TruthTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solution = rng.random_range(0..cols);
    let zeros: Vec<usize> = (0..cols).map(|_| rng.random_range(0..rows)).collect();
    TruthTable::from_fn(rows, cols, |i, j| j == solution || i != zeros[j]).expect("non-empty")
}

// ---------------------------------------------------------------- SimAnd correctness

#[derive(Clone, Debug, Serialize)]
pub struct SimAndViolation {
    pub table: String,
    pub column: usize,
    pub all_ones: bool,
    pub readout: GTildeReadout,
}

/// Phase-register width used by the SimAnd checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseBits {
    /// `⌈n/2⌉ + 3`.
    Standard,
    /// `⌈n/2⌉`, too few bits to separate the closest case.
    Reduced,
}

impl PhaseBits {
    pub fn for_data_width(self, n: usize) -> usize {
        match self {
            PhaseBits::Standard => l_bits(n),
            PhaseBits::Reduced => n.div_ceil(2),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SimAndReport {
    pub tables: usize,
    pub columns: usize,
    pub all_ones_columns: usize,
    /// Smallest fidelity seen on any column.
    pub min_fidelity: f64,
    pub violations: Vec<SimAndViolation>,
    pub queries: QueryLedger,
}

/// Readout of every real column of `table`, flagging sign errors, fidelity
/// below 2/3, and inexact all-ones columns.
pub fn simand_check(table: &TruthTable, bits: PhaseBits) -> Result<SimAndReport> {
    let g = column_and(table);
    let mut handle = OracleHandle::new(table.clone());
    let l = bits.for_data_width(handle.n());
    let mut report = SimAndReport {
        tables: 1,
        columns: g.len(),
        all_ones_columns: g.iter().filter(|&&b| b).count(),
        min_fidelity: f64::INFINITY,
        violations: Vec::new(),
        queries: QueryLedger::default(),
    };
    for (j, &gj) in g.iter().enumerate() {
        let r = g_tilde_readout_with(j, &mut handle, l)?;
        report.min_fidelity = report.min_fidelity.min(r.fidelity);
        let bad = r.marks() != gj
            || r.fidelity < SIMAND_FIDELITY
            || (gj && (r.fidelity - 1.0).abs() > EXACTNESS_TOLERANCE);
        if bad {
            report.violations.push(SimAndViolation {
                table: table.to_text(),
                column: j,
                all_ones: gj,
                readout: r,
            });
        }
    }
    report.queries = handle.ledger();
    Ok(report)
}

/// [`simand_check`] over `count` random tables.
pub fn simand_suite(count: usize, n_max: usize, k_max: usize, seed: u64, bits: PhaseBits) -> Result<SimAndReport> {
    let reports: Vec<SimAndReport> = (0..count)
        .into_par_iter()
        .map(|t| simand_check(&random_table(n_max, k_max, seed.wrapping_add(t as u64)), bits))
        .collect::<Result<_>>()?;
    let mut total = SimAndReport {
        min_fidelity: f64::INFINITY,
        ..SimAndReport::default()
    };
    for r in reports {
        total.tables += r.tables;
        total.columns += r.columns;
        total.all_ones_columns += r.all_ones_columns;
        total.min_fidelity = total.min_fidelity.min(r.min_fidelity);
        total.violations.extend(r.violations);
        total.queries.add(&r.queries);
    }
    Ok(total)
}

/// One column with `L = 2^n − 1` read with `l` phase bits.
pub fn closest_case_readout(n: usize, l: usize) -> Result<(TruthTable, GTildeReadout)> {
    let rows = 1usize << n;
    let table = TruthTable::from_fn(rows, 1, |i, _| i != rows - 1)?;
    let mut handle = OracleHandle::new(table.clone());
    let r = g_tilde_readout_with(0, &mut handle, l)?;
    Ok((table, r))
}

// ---------------------------------------------------------------- Phase gap and controlled oracle

#[derive(Clone, Debug, Serialize)]
pub struct PhaseGapSummary {
    pub checked: usize,
    pub failures: Vec<(usize, u64)>,
}

/// Exhaustive bound check over `1 ≤ n ≤ n_max`, `1 ≤ m ≤ 2^n`.
pub fn phase_gap_sweep(n_max: usize) -> Result<PhaseGapSummary> {
    let mut summary = PhaseGapSummary {
        checked: 0,
        failures: Vec::new(),
    };
    for n in 1..=n_max {
        for m in 1..=1u64 << n {
            summary.checked += 1;
            if !phase_gap_bound_check(n, m)? {
                summary.failures.push((n, m));
            }
        }
    }
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct ControlledOracleReport {
    /// Largest entrywise deviation from `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U_f`.
    pub max_deviation: f64,
    /// Every controlled call cost exactly two bit-oracle calls.
    pub ledger_exact: bool,
    pub queries: QueryLedger,
}

/// Builds the matrix of `U_f′ · CZ · U_f′` column by column on the scratch-|0⟩
/// sector and compares it with the ideal controlled phase oracle.
pub fn controlled_oracle_check(table: &TruthTable) -> Result<ControlledOracleReport> {
    let mut handle = OracleHandle::new(table.clone());
    let (n, k) = (handle.n(), handle.k());
    let layout = RegisterLayout::new(n, k, 1, true)?;
    let control = n + k;
    let inputs = 1usize << (n + k + 1);
    let mut max_deviation: f64 = 0.0;
    let mut ledger_exact = true;
    for x in 0..inputs {
        let mut s = StateVector::basis(layout.num_qubits(), x)?;
        let before = handle.ledger();
        handle.apply_controlled_phase_oracle(&mut s, control, &layout)?;
        let d = handle.ledger().since(&before);
        ledger_exact &= d
            == QueryLedger {
                bit_oracle: 2,
                controlled_phase_oracle: 1,
                ..QueryLedger::default()
            };
        let i = x & ((1 << n) - 1);
        let j = (x >> n) & ((1 << k) - 1);
        let flip = x >> control & 1 == 1 && handle.peek(i, j);
        for (y, a) in s.amplitudes().iter().enumerate() {
            let want = match (y == x, flip) {
                (true, true) => -1.0,
                (true, false) => 1.0,
                _ => 0.0,
            };
            max_deviation = max_deviation.max((a.re - want).abs()).max(a.im.abs());
        }
    }
    Ok(ControlledOracleReport {
        max_deviation,
        ledger_exact,
        queries: handle.ledger(),
    })
}

// ---------------------------------------------------------------- search suites

#[derive(Clone, Debug, Serialize)]
pub struct SearchAgreement {
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub runs: usize,
    pub correct: usize,
    /// Found results whose column is not all ones.
    pub unsound: usize,
    pub median_bit_queries: f64,
    pub queries_total: QueryLedger,
}

impl SearchAgreement {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.runs as f64
    }
}

/// `runs` bounded-error searches on one table, scored against the column-AND:
/// a run is correct if it finds an all-ones column when one exists and
/// reports none otherwise.
pub fn search_agreement(table: &TruthTable, runs: usize, seed: u64, verify_repeats: usize) -> Result<SearchAgreement> {
    let g = column_and(table);
    let any = g.iter().any(|&b| b);
    let mut oracle = GTildeOracle::new(table)?;
    let mut correct = 0;
    let mut unsound = 0;
    let mut queries = Vec::with_capacity(runs);
    let mut queries_total = QueryLedger::default();
    for r in 0..runs {
        let mut handle = OracleHandle::new(table.clone());
        let cfg = BeqConfig {
            verify_repeats,
            max_rounds: None,
            rng_seed: run_seed(seed, r),
        };
        let out = bounded_error_search(&mut handle, &mut oracle, &cfg)?;
        queries.push(out.queries.bit_oracle as f64);
        queries_total.add(&out.queries);
        match out.result {
            SearchResult::Found(j) if g[j] => correct += 1,
            SearchResult::Found(_) => unsound += 1,
            SearchResult::NotFound if !any => correct += 1,
            SearchResult::NotFound => {}
        }
    }
    Ok(SearchAgreement {
        seed,
        rows: table.rows(),
        cols: table.cols(),
        runs,
        correct,
        unsound,
        median_bit_queries: median(&queries),
        queries_total,
    })
}

/// [`search_agreement`] over `count` random tables.
pub fn random_search_suite(
    count: usize,
    n_max: usize,
    k_max: usize,
    runs: usize,
    seed: u64,
    verify_repeats: usize,
) -> Result<Vec<SearchAgreement>> {
    (0..count)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t as u64);
            search_agreement(&random_table(n_max, k_max, s), runs, s, verify_repeats)
        })
        .collect()
}

/// Random AND-OR instance with fan-ins up to `max_fan_in`; about half have a
/// planted all-ones block.
pub fn random_andor_instance(max_fan_in: usize, seed: u64) -> AndOrInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_fan_in);
    let k = rng.random_range(1..=max_fan_in);
    let density = rng.random_range(0.2..0.8);
    let mut z: Vec<bool> = (0..n * k).map(|_| rng.random_bool(density)).collect();
    if rng.random_bool(0.5) {
        let j = rng.random_range(0..k);
        z[j * n..(j + 1) * n].iter_mut().for_each(|b| *b = true);
    }
    AndOrInstance::new(n, k, z).expect("sizes match")
}

#[derive(Clone, Debug, Serialize)]
pub struct AndOrAgreement {
    pub seed: u64,
    pub and_fan_in: usize,
    pub or_fan_in: usize,
    pub direct: bool,
    pub runs: usize,
    pub agree: usize,
    pub median_bit_queries: f64,
    pub queries_total: QueryLedger,
}

pub fn andor_agreement(inst: &AndOrInstance, runs: usize, seed: u64, verify_repeats: usize) -> Result<AndOrAgreement> {
    let direct = evaluate_direct(inst);
    let table = inst.to_table();
    let mut oracle = GTildeOracle::new(&table)?;
    let mut agree = 0;
    let mut queries = Vec::with_capacity(runs);
    let mut queries_total = QueryLedger::default();
    for r in 0..runs {
        let cfg = BeqConfig {
            verify_repeats,
            max_rounds: None,
            rng_seed: run_seed(seed, r),
        };
        let (value, out) = crate::andor::evaluate_via_search_with(inst, &mut oracle, &cfg)?;
        queries.push(out.queries.bit_oracle as f64);
        queries_total.add(&out.queries);
        agree += (value == direct) as usize;
    }
    Ok(AndOrAgreement {
        seed,
        and_fan_in: inst.and_fan_in(),
        or_fan_in: inst.or_fan_in(),
        direct,
        runs,
        agree,
        median_bit_queries: median(&queries),
        queries_total,
    })
}

pub fn random_andor_suite(count: usize, max_fan_in: usize, runs: usize, seed: u64, verify_repeats: usize) -> Result<Vec<AndOrAgreement>> {
    (0..count)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t as u64);
            andor_agreement(&random_andor_instance(max_fan_in, s), runs, s, verify_repeats)
        })
        .collect()
}

// ---------------------------------------------------------------- scaling sweep

#[derive(Clone, Debug, Serialize)]
pub struct SweepInstance {
    pub seed: u64,
    /// Exact sequential classical query count.
    pub classical_queries: u64,
    pub quantum_median: f64,
    pub successes: usize,
    /// Ledger of every bounded-error run, in run order.
    pub runs: Vec<QueryLedger>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub rows: usize,
    pub cols: usize,
    /// Median bit-oracle queries over every run in the cell.
    pub quantum_median: f64,
    pub classical_median: f64,
    pub instances: Vec<SweepInstance>,
}

/// `instances` planted tables of size `rows × cols`, each searched `runs` times.
pub fn sweep_cell(
    rows: usize,
    cols: usize,
    instances: usize,
    runs: usize,
    seed: u64,
    verify_repeats: usize,
) -> Result<SweepCell> {
    let results: Vec<SweepInstance> = (0..instances)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t as u64);
            let table = planted_sweep_table(rows, cols, s);
            let g = column_and(&table);
            let mut classical = OracleHandle::new(table.clone());
            let classical_queries = classical_version_space_search(&mut classical)?.queries.classical_f;
            let mut oracle = GTildeOracle::new(&table)?;
            let mut ledgers = Vec::with_capacity(runs);
            let mut successes = 0;
            for r in 0..runs {
                let mut handle = OracleHandle::new(table.clone());
                let cfg = BeqConfig {
                    verify_repeats,
                    max_rounds: None,
                    rng_seed: run_seed(s, r),
                };
                let out = bounded_error_search(&mut handle, &mut oracle, &cfg)?;
                ledgers.push(out.queries);
                successes += out.result.found().is_some_and(|j| g[j]) as usize;
            }
            let bits: Vec<f64> = ledgers.iter().map(|q| q.bit_oracle as f64).collect();
            Ok(SweepInstance {
                seed: s,
                classical_queries,
                quantum_median: median(&bits),
                successes,
                runs: ledgers,
            })
        })
        .collect::<Result<_>>()?;
    let pooled: Vec<f64> = results
        .iter()
        .flat_map(|i| i.runs.iter().map(|q| q.bit_oracle as f64))
        .collect();
    let classical: Vec<f64> = results.iter().map(|i| i.classical_queries as f64).collect();
    Ok(SweepCell {
        rows,
        cols,
        quantum_median: median(&pooled),
        classical_median: median(&classical),
        instances: results,
    })
}

// ---------------------------------------------------------------- perceptron

#[derive(Clone, Debug, Serialize)]
pub struct TrainTrial {
    pub seed: u64,
    /// The returned hyperplane passed an independent version-space check.
    pub verified: bool,
    pub outcome: TrainOutcome,
}

/// Planted dataset from `seed`, hyperplanes from `seed + 1`, search from `seed + 2`.
pub fn train_trial(
    points: usize,
    dimension: usize,
    gamma: f64,
    epsilon: f64,
    seed: u64,
    verify_repeats: usize,
) -> Result<TrainTrial> {
    let (data, _) = generate_planted_dataset(points, dimension, gamma, seed)?;
    train_trial_on(&data, epsilon, DEFAULT_SAMPLE_CONSTANT, seed, verify_repeats)
}

/// One training trial on given data, seeded like [`train_trial`].
pub fn train_trial_on(
    data: &Dataset,
    epsilon: f64,
    sample_constant: f64,
    seed: u64,
    verify_repeats: usize,
) -> Result<TrainTrial> {
    let cfg = BeqConfig {
        verify_repeats,
        max_rounds: None,
        rng_seed: seed.wrapping_add(2),
    };
    let outcome = train_perceptron_with(data, epsilon, sample_constant, &cfg, seed.wrapping_add(1))?;
    let verified = match &outcome.hyperplane {
        Some(h) => in_version_space(data, h)?,
        None => false,
    };
    Ok(TrainTrial { seed, verified, outcome })
}

/// Fraction of `samples` Gaussian hyperplanes in the version space of `data`.
pub fn version_space_fraction(data: &Dataset, samples: usize, seed: u64) -> Result<f64> {
    let planes = sample_hyperplanes(samples, data.dimension(), seed)?;
    let mut hits = 0usize;
    for p in &planes {
        hits += in_version_space(data, p)? as usize;
    }
    Ok(hits as f64 / samples as f64)
}

/// Pooled version-space fraction over `datasets` planted datasets.
pub fn pooled_version_space_fraction(
    points: usize,
    dimension: usize,
    gamma: f64,
    datasets: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let fractions: Vec<f64> = (0..datasets)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t as u64);
            let (data, _) = generate_planted_dataset(points, dimension, gamma, s)?;
            version_space_fraction(&data, samples, s.wrapping_add(1))
        })
        .collect::<Result<_>>()?;
    Ok(fractions.iter().sum::<f64>() / datasets as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_slope() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
        assert!((fit_loglog_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fit_loglog_slope(&[(4.0, 1.0)]), None);
        assert_eq!(fit_loglog_slope(&[(4.0, 1.0), (4.0, 2.0)]), None);
    }

    #[test]
    fn sweep_tables_have_one_solution() {
        for seed in 0..20 {
            let t = planted_sweep_table(16, 8, seed);
            assert_eq!(column_and(&t).iter().filter(|&&b| b).count(), 1);
            for j in 0..8 {
                let zeros = t.column(j).filter(|&b| !b).count();
                assert!(zeros <= 1);
            }
        }
    }

    #[test]
    fn random_tables_respect_bounds() {
        for seed in 0..50 {
            let t = random_table(5, 3, seed);
            assert!(t.rows() <= 32 && t.cols() <= 8);
        }
    }

    #[test]
    fn controlled_oracle_on_a_small_table() {
        let r = controlled_oracle_check(&random_table(3, 2, 1)).unwrap();
        assert!(r.max_deviation < 1e-10);
        assert!(r.ledger_exact);
    }

    #[test]
    fn closest_case_with_reduced_precision() {
        let (_, r) = closest_case_readout(2, 1).unwrap();
        assert!(r.marks() || r.fidelity < SIMAND_FIDELITY);
        let (_, r) = closest_case_readout(2, l_bits(2)).unwrap();
        assert!(!r.marks() && r.fidelity >= SIMAND_FIDELITY);
    }

    #[test]
    fn small_sweep_cell_runs() {
        let cell = sweep_cell(4, 4, 2, 3, 9, 15).unwrap();
        assert_eq!(cell.instances.len(), 2);
        assert!(cell.quantum_median > 0.0);
        for inst in &cell.instances {
            assert!(inst.classical_queries as usize <= 16);
        }
    }
}
