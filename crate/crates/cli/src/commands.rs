use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use rayon::prelude::*;
use serde_json::{json, Value};

use qvs::andor::{evaluate_direct, evaluate_via_search_with, AndOrInstance};
use qvs::baselines::classical_version_space_search;
use qvs::counting::{g_tilde_readout_with, l_bits};
use qvs::experiments::{
    andor_agreement, phase_gap_sweep, controlled_oracle_check, fit_loglog_slope, simand_suite,
    median, random_andor_instance, random_table, run_seed, sweep_cell, train_trial_on, PhaseBits, SweepCell,
    SIMAND_FIDELITY,
};
use qvs::oracles::{register_width, OracleHandle, QueryLedger, TruthTable};
use qvs::perceptron::{generate_planted_dataset, Dataset};
use qvs::search::{BeqConfig, GTildeOracle};
use qvs::Error;

use crate::{AndOrArgs, GenDatasetArgs, SweepArgs, TrainArgs, VerifyArgs};

/// Largest simulated register a sweep cell may need.
const MAX_SWEEP_QUBITS: usize = 24;

/// Failure that ends the command with `code`.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

type CmdResult = Result<ExitCode, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::Io(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn emit(line: &Value) {
    println!("{line}");
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn check_repeats(t: usize) -> Result<(), Failure> {
    BeqConfig {
        verify_repeats: t,
        ..BeqConfig::new(0)
    }
    .validate()
    .map_err(Failure::from)
}

fn check_unit_interval(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("{name} must lie in (0, 1), got {v}")))
    }
}

pub fn train(a: &TrainArgs) -> CmdResult {
    check_unit_interval("epsilon", a.epsilon)?;
    check_repeats(a.verify_repeats)?;
    if a.c.is_nan() || a.c <= 0.0 {
        return Err(usage(format!("c must be positive, got {}", a.c)));
    }
    if a.trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    let fixed = match &a.dataset {
        Some(path) => Some(Dataset::read_from(path)?),
        None => {
            check_unit_interval("gamma", a.gamma.unwrap_or(0.0))?;
            if a.n == Some(0) || a.m == Some(0) {
                return Err(usage("n and m must be at least 1"));
            }
            None
        }
    };

    let trials: Vec<_> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let seed = a.seed.wrapping_add(i as u64);
            let data = match &fixed {
                Some(d) => d.clone(),
                None => generate_planted_dataset(a.n.unwrap(), a.m.unwrap(), a.gamma.unwrap(), seed)?.0,
            };
            let trial = train_trial_on(&data, a.epsilon, a.c, seed, a.verify_repeats)?;
            Ok((data.len(), trial))
        })
        .collect::<Result<_, Error>>()?;

    let mut total = QueryLedger::default();
    let mut bits = Vec::with_capacity(trials.len());
    let mut verified = 0;
    for (i, (points, t)) in trials.iter().enumerate() {
        let o = &t.outcome;
        total.add(&o.search.queries);
        bits.push(o.search.queries.bit_oracle as f64);
        verified += t.verified as usize;
        emit(&json!({
            "trial": i,
            "seed": t.seed,
            "points": points,
            "candidates": o.candidates,
            "candidate_available": o.candidate_available,
            "found": o.search.result.found(),
            "verified": t.verified,
            "failure": o.failure,
            "hyperplane": o.hyperplane,
            "rounds": o.search.rounds.len(),
            "queries": o.search.queries,
        }));
    }
    emit(&json!({
        "summary": {
            "trials": trials.len(),
            "verified": verified,
            "success_rate": verified as f64 / trials.len() as f64,
            "median_bit_oracle": median(&bits),
            "queries": total,
        }
    }));
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    if a.n_max == 0 || a.n_max > 8 {
        return Err(usage("n-max must lie in 1..=8"));
    }
    if a.k_max == 0 || a.k_max > 4 {
        return Err(usage("k-max must lie in 1..=4"));
    }
    if a.tables == 0 {
        return Err(usage("tables must be at least 1"));
    }
    let bits = if a.fault { PhaseBits::Reduced } else { PhaseBits::Standard };
    let mut violations = 0;

    let report = simand_suite(a.tables, a.n_max, a.k_max, a.seed, bits)?;
    violations += report.violations.len();
    emit(&json!({
        "check": "simand_random_tables",
        "phase_bits": bits,
        "tables": report.tables,
        "columns": report.columns,
        "all_ones_columns": report.all_ones_columns,
        "min_fidelity": report.min_fidelity,
        "violations": report.violations,
        "passed": report.violations.is_empty(),
        "queries": report.queries,
    }));

    for n in 1..=a.n_max {
        let l = bits.for_data_width(n);
        let (table, mut handle) = closest_case(n)?;
        let r = g_tilde_readout_with(0, &mut handle, l)?;
        let ok = !r.marks() && r.fidelity >= SIMAND_FIDELITY;
        violations += !ok as usize;
        emit(&json!({
            "check": "simand_closest_case",
            "n": n,
            "phase_bits": l,
            "table": table.to_text(),
            "column": 0,
            "readout": r,
            "passed": ok,
            "queries": handle.ledger(),
        }));
    }

    let gap = phase_gap_sweep(12)?;
    violations += gap.failures.len();
    emit(&json!({
        "check": "phase_gap_bound",
        "n_max": 12,
        "checked": gap.checked,
        "failures": gap.failures,
        "passed": gap.failures.is_empty(),
        "queries": QueryLedger::default(),
    }));

    let mut worst: f64 = 0.0;
    let mut exact = true;
    let mut queries = QueryLedger::default();
    let count = a.tables.min(24);
    for t in 0..count {
        let table = random_table(a.n_max.min(4), a.k_max, a.seed.wrapping_add(t as u64));
        let r = controlled_oracle_check(&table)?;
        worst = worst.max(r.max_deviation);
        exact &= r.ledger_exact;
        queries.add(&r.queries);
    }
    let ok = worst <= 1e-10 && exact;
    violations += !ok as usize;
    emit(&json!({
        "check": "controlled_oracle_construction",
        "tables": count,
        "max_deviation": worst,
        "ledger_exact": exact,
        "passed": ok,
        "queries": queries,
    }));

    emit(&json!({ "summary": { "violations": violations, "passed": violations == 0 } }));
    Ok(if violations == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// One column with `L = 2^n − 1`: every row reads 1 except the last.
fn closest_case(n: usize) -> Result<(TruthTable, OracleHandle), Error> {
    let rows = 1usize << n;
    let table = TruthTable::from_fn(rows, 1, |i, _| i != rows - 1)?;
    Ok((table.clone(), OracleHandle::new(table)))
}

fn ledger_medians(cell: &SweepCell) -> [f64; 4] {
    let runs: Vec<&QueryLedger> = cell.instances.iter().flat_map(|i| &i.runs).collect();
    let field = |f: fn(&QueryLedger) -> u64| median(&runs.iter().map(|q| f(q) as f64).collect::<Vec<_>>());
    [
        field(|q| q.bit_oracle),
        field(|q| q.phase_oracle),
        field(|q| q.controlled_phase_oracle),
        field(|q| q.classical_f),
    ]
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    check_repeats(a.verify_repeats)?;
    if a.instances == 0 || a.runs == 0 {
        return Err(usage("instances and runs must be at least 1"));
    }
    if a.rows.contains(&0) || a.cols.contains(&0) {
        return Err(usage("rows and cols must be positive"));
    }
    for &r in &a.rows {
        for &c in &a.cols {
            let n = register_width(r);
            if n + register_width(c) + l_bits(n) > MAX_SWEEP_QUBITS {
                return Err(usage(format!("{r}x{c} needs more than {MAX_SWEEP_QUBITS} simulated qubits")));
            }
        }
    }

    let mut cells = Vec::new();
    for &r in &a.rows {
        for &c in &a.cols {
            cells.push(sweep_cell(r, c, a.instances, a.runs, a.seed, a.verify_repeats)?);
        }
    }

    let mut csv = String::from(
        "kind,rows,cols,instances,runs,successes,bit_oracle,phase_oracle,controlled_phase_oracle,classical_f,classical_scan,slope\n",
    );
    for cell in &cells {
        let [bit, phase, ctrl, cf] = ledger_medians(cell);
        let successes: usize = cell.instances.iter().map(|i| i.successes).sum();
        writeln!(
            csv,
            "cell,{},{},{},{},{successes},{bit},{phase},{ctrl},{cf},{},",
            cell.rows,
            cell.cols,
            a.instances,
            a.runs,
            cell.classical_median
        )
        .unwrap();
    }
    // One fit per fixed K across N, and per fixed N across K.
    if a.rows.len() > 1 {
        for &c in &a.cols {
            let pts: Vec<_> = cells.iter().filter(|x| x.cols == c).map(|x| (x.rows as f64, x.quantum_median)).collect();
            if let Some(s) = fit_loglog_slope(&pts) {
                writeln!(csv, "fit_rows,,{c},,,,,,,,,{s:.6}").unwrap();
            }
        }
    }
    if a.cols.len() > 1 {
        for &r in &a.rows {
            let pts: Vec<_> = cells.iter().filter(|x| x.rows == r).map(|x| (x.cols as f64, x.quantum_median)).collect();
            if let Some(s) = fit_loglog_slope(&pts) {
                writeln!(csv, "fit_cols,{r},,,,,,,,,,{s:.6}").unwrap();
            }
        }
    }
    write_output(a.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

pub fn andor(a: &AndOrArgs) -> CmdResult {
    check_repeats(a.verify_repeats)?;
    if a.runs == 0 {
        return Err(usage("runs must be at least 1"));
    }
    if let Some(path) = &a.file {
        let inst = AndOrInstance::read_from(path)?;
        let direct = evaluate_direct(&inst);
        let table = inst.to_table();
        let mut scan = OracleHandle::new(table.clone());
        let classical = classical_version_space_search(&mut scan)?;
        let mut oracle = GTildeOracle::new(&table)?;
        for r in 0..a.runs {
            let cfg = BeqConfig {
                verify_repeats: a.verify_repeats,
                max_rounds: None,
                rng_seed: run_seed(a.seed, r),
            };
            let (value, out) = evaluate_via_search_with(&inst, &mut oracle, &cfg)?;
            emit(&json!({
                "run": r,
                "seed": cfg.rng_seed,
                "and_fan_in": inst.and_fan_in(),
                "or_fan_in": inst.or_fan_in(),
                "direct": direct as u8,
                "via_search": value as u8,
                "found": out.result.found(),
                "classical_queries": classical.queries,
                "queries": out.queries,
            }));
        }
        return Ok(ExitCode::SUCCESS);
    }

    let count = a.random.unwrap_or(0);
    if count == 0 || a.max_fan_in == 0 {
        return Err(usage("random and max-fan-in must be at least 1"));
    }
    let rows: Vec<_> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s = a.seed.wrapping_add(i as u64);
            let inst = random_andor_instance(a.max_fan_in, s);
            let mut scan = OracleHandle::new(inst.to_table());
            let classical = classical_version_space_search(&mut scan)?;
            let agreement = andor_agreement(&inst, a.runs, s, a.verify_repeats)?;
            Ok((inst, agreement, classical.queries))
        })
        .collect::<Result<_, Error>>()?;
    let mut total = QueryLedger::default();
    let mut majority = 0;
    for (inst, ag, classical) in &rows {
        total.add(&ag.queries_total);
        majority += (3 * ag.agree >= 2 * ag.runs) as usize;
        emit(&json!({
            "seed": ag.seed,
            "and_fan_in": ag.and_fan_in,
            "or_fan_in": ag.or_fan_in,
            "bits": inst.to_text().lines().nth(1),
            "direct": ag.direct as u8,
            "runs": ag.runs,
            "agree": ag.agree,
            "median_bit_oracle": ag.median_bit_queries,
            "classical_queries": classical,
            "queries": ag.queries_total,
        }));
    }
    emit(&json!({
        "summary": {
            "instances": rows.len(),
            "agree_at_two_thirds": majority,
            "queries": total,
        }
    }));
    Ok(ExitCode::SUCCESS)
}

pub fn gen_dataset(a: &GenDatasetArgs) -> CmdResult {
    let (data, _) = generate_planted_dataset(a.n, a.m, a.gamma, a.seed)?;
    write_output(a.out.as_deref(), &data.to_text())?;
    Ok(ExitCode::SUCCESS)
}
