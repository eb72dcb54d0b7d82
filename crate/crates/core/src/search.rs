//! Grover search with an unknown number of solutions, driven either by an
//! exact marking oracle or by SimAnd (a marking oracle that errs with bounded
//! probability), plus the perceptron trainer built on top.
//!
//! Both searches use the same randomized schedule: in round `r` pick an
//! iteration count uniformly from `{0, …, ⌈m⌉ − 1}`, measure, verify the
//! candidate, and on rejection grow `m` by `6/5` up to `⌈π/4 · √(2^k)⌉`.
//!
//! Candidates from SimAnd are checked by a majority of `t` phase-kickback
//! votes, each one a fresh (charged) SimAnd on the candidate column alone.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::{kickback_probability, l_bits, sim_and};
use crate::error::{Error, Result};
use crate::oracles::{column_and, register_width, OracleHandle, QueryLedger, TruthTable};
use crate::perceptron::{required_sample_count, sample_hyperplanes, Dataset, Hyperplane, DEFAULT_SAMPLE_CONSTANT};
use crate::statevec::{sample_index, Register, RegisterLayout, StateVector};

pub const DEFAULT_VERIFY_REPEATS: usize = 15;

/// Growth factor of the iteration bound between rounds.
const GROWTH: f64 = 6.0 / 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum SearchResult {
    Found(usize),
    NotFound,
}

impl SearchResult {
    pub fn found(&self) -> Option<usize> {
        match *self {
            SearchResult::Found(j) => Some(j),
            SearchResult::NotFound => None,
        }
    }
}

/// One measure-and-verify round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrace {
    pub iterations: usize,
    pub candidate: usize,
    pub votes_for: usize,
    pub votes_against: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub result: SearchResult,
    /// Oracle calls made by this search alone.
    pub queries: QueryLedger,
    pub rounds: Vec<RoundTrace>,
}

/// Bounded-error search settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeqConfig {
    /// Majority-vote width `t`; odd, at least 3.
    pub verify_repeats: usize,
    /// Round budget; `None` uses [`default_max_rounds`].
    pub max_rounds: Option<usize>,
    pub rng_seed: u64,
}

impl BeqConfig {
    pub fn new(rng_seed: u64) -> Self {
        BeqConfig {
            verify_repeats: DEFAULT_VERIFY_REPEATS,
            max_rounds: None,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.verify_repeats < 3 || self.verify_repeats.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "verify_repeats must be odd and at least 3, got {}",
                self.verify_repeats
            )));
        }
        if self.max_rounds == Some(0) {
            return Err(Error::InvalidParameter("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

/// `⌈π/4 · √(2^k)⌉`, the largest iteration bound the schedule reaches.
pub fn iteration_cap(k: usize) -> usize {
    (PI / 4.0 * ((1u64 << k) as f64).sqrt()).ceil() as usize
}

/// Three times the number of rounds the schedule needs to reach its cap.
pub fn default_max_rounds(k: usize) -> usize {
    let cap = iteration_cap(k) as f64;
    let to_cap = (cap.ln() / GROWTH.ln()).ceil() as usize;
    3 * to_cap.max(1)
}

struct Verdict {
    accepted: bool,
    votes_for: usize,
    votes_against: usize,
}

/// What the schedule needs from a search backend.
trait Amplifier {
    fn width(&self) -> usize;
    /// Prepares the uniform state, applies `iterations` Grover steps and measures.
    fn measure_after(&mut self, iterations: usize, rng: &mut ChaCha8Rng) -> Result<usize>;
    fn verify(&mut self, candidate: usize, rng: &mut ChaCha8Rng) -> Result<Verdict>;
}

fn run_schedule<A: Amplifier>(
    amp: &mut A,
    max_rounds: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(SearchResult, Vec<RoundTrace>)> {
    let cap = iteration_cap(amp.width()) as f64;
    let mut m: f64 = 1.0;
    let mut rounds = Vec::new();
    for _ in 0..max_rounds {
        let iterations = rng.random_range(0..m.ceil() as usize);
        let candidate = amp.measure_after(iterations, rng)?;
        let v = amp.verify(candidate, rng)?;
        rounds.push(RoundTrace {
            iterations,
            candidate,
            votes_for: v.votes_for,
            votes_against: v.votes_against,
            accepted: v.accepted,
        });
        if v.accepted {
            return Ok((SearchResult::Found(candidate), rounds));
        }
        m = (m * GROWTH).min(cap);
    }
    Ok((SearchResult::NotFound, rounds))
}

/// Marginal distribution of the search register after `m` Grover steps,
/// computed lazily and kept for every `m` seen so far.
struct IterationCache {
    state: StateVector,
    marginals: Vec<Vec<f64>>,
}

impl IterationCache {
    fn new(state: StateVector, index_qubits: &[usize]) -> Result<Self> {
        let first = state.marginal_probabilities(index_qubits)?;
        Ok(IterationCache {
            state,
            marginals: vec![first],
        })
    }

    fn marginal(
        &mut self,
        iterations: usize,
        index_qubits: &[usize],
        mut step: impl FnMut(&mut StateVector) -> Result<()>,
    ) -> Result<&[f64]> {
        while self.marginals.len() <= iterations {
            step(&mut self.state)?;
            self.marginals.push(self.state.marginal_probabilities(index_qubits)?);
        }
        Ok(&self.marginals[iterations])
    }
}

struct ExactAmplifier<F> {
    k: usize,
    marked: F,
    ledger: QueryLedger,
    cache: IterationCache,
    qubits: Vec<usize>,
}

impl<F: Fn(usize) -> bool> Amplifier for ExactAmplifier<F> {
    fn width(&self) -> usize {
        self.k
    }

    fn measure_after(&mut self, iterations: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let marked = &self.marked;
        let qubits = &self.qubits;
        let probs = self.cache.marginal(iterations, qubits, |s| {
            let pattern: Vec<bool> = (0..s.dim()).map(marked).collect();
            for (a, &m) in s.amplitudes_mut().iter_mut().zip(&pattern) {
                if m {
                    *a = -*a;
                }
            }
            s.reflect_about_uniform(qubits, None)
        })?;
        let j = sample_index(probs, rng);
        let per_step = QueryLedger {
            bit_oracle: 1,
            phase_oracle: 1,
            ..QueryLedger::default()
        };
        self.ledger.add(&per_step.scaled(iterations as u64));
        Ok(j)
    }

    fn verify(&mut self, candidate: usize, _rng: &mut ChaCha8Rng) -> Result<Verdict> {
        self.ledger.classical_f += 1;
        let ok = (self.marked)(candidate);
        Ok(Verdict {
            accepted: ok,
            votes_for: ok as usize,
            votes_against: !ok as usize,
        })
    }
}

/// Grover search over `2^k` indices with an exact marking predicate.
///
/// Each Grover step is one phase-oracle call; each candidate is checked with
/// one classical query.
pub fn grover_search_unknown_m(
    k: usize,
    marked: impl Fn(usize) -> bool,
    rng_seed: u64,
) -> Result<SearchOutcome> {
    if k == 0 || k > 20 {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..=20")));
    }
    let layout = RegisterLayout::new(0, k, 0, false)?;
    let start = StateVector::new_uniform(&layout, None)?;
    let qubits: Vec<usize> = (0..k).collect();
    let mut amp = ExactAmplifier {
        k,
        marked,
        ledger: QueryLedger::default(),
        cache: IterationCache::new(start, &qubits)?,
        qubits,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (result, rounds) = run_schedule(&mut amp, default_max_rounds(k), &mut rng)?;
    Ok(SearchOutcome {
        result,
        queries: amp.ledger,
        rounds,
    })
}

/// SimAnd bound to one truth table, with the simulation results that do not
/// depend on measurement outcomes kept between calls.
///
/// Every use is charged in full to the caller's [`OracleHandle`]; the caches
/// only save the simulator from recomputing identical unitaries.
pub struct GTildeOracle {
    engine: OracleHandle,
    layout: RegisterLayout,
    index_qubits: Vec<usize>,
    iterations: Option<IterationCache>,
    kickback: HashMap<usize, f64>,
    /// Ledger cost of one SimAnd, measured on the first simulated call.
    sim_and_cost: Option<QueryLedger>,
}

impl GTildeOracle {
    pub fn new(table: &TruthTable) -> Result<Self> {
        GTildeOracle::with_phase_bits(table, l_bits(register_width(table.rows())))
    }

    /// Uses an explicit phase-register width instead of `⌈n/2⌉ + 3`.
    pub fn with_phase_bits(table: &TruthTable, l: usize) -> Result<Self> {
        let engine = OracleHandle::new(table.clone());
        let layout = RegisterLayout::new(engine.n(), engine.k(), l, false)?;
        let index_qubits = layout.qubits(Register::Hyperplane);
        Ok(GTildeOracle {
            engine,
            layout,
            index_qubits,
            iterations: None,
            kickback: HashMap::new(),
            sim_and_cost: None,
        })
    }

    pub fn table(&self) -> &TruthTable {
        self.engine.table()
    }

    pub fn phase_bits(&self) -> usize {
        self.layout.l()
    }

    fn record_cost(&mut self, before: QueryLedger) {
        if self.sim_and_cost.is_none() {
            self.sim_and_cost = Some(self.engine.ledger().since(&before));
        }
    }

    /// Distribution of the measured column after `iterations` steps of
    /// `(2|+⟩⟨+| − I)_k · U_g̃`, plus the cost of one step.
    fn search_marginal(&mut self, iterations: usize) -> Result<(&[f64], QueryLedger)> {
        if self.iterations.is_none() {
            let start = StateVector::new_uniform(&self.layout, None)?;
            self.iterations = Some(IterationCache::new(start, &self.index_qubits)?);
        }
        let cache = self.iterations.as_mut().expect("initialized above");
        let engine = &mut self.engine;
        let layout = &self.layout;
        let index = &self.index_qubits;
        let cost = &mut self.sim_and_cost;
        let probs = cache.marginal(iterations, index, |s| {
            let before = engine.ledger();
            sim_and(s, layout, engine)?;
            if cost.is_none() {
                *cost = Some(engine.ledger().since(&before));
            }
            s.reflect_about_uniform(index, None)
        })?;
        Ok((probs, self.sim_and_cost.unwrap_or_default()))
    }

    /// Probability that one kickback vote reports column `j` as marked.
    fn vote_probability(&mut self, j: usize) -> Result<(f64, QueryLedger)> {
        if let Some(&p) = self.kickback.get(&j) {
            let cost = self.sim_and_cost.expect("cost recorded with the first vote");
            return Ok((p, cost));
        }
        let before = self.engine.ledger();
        let l = self.layout.l();
        let p = kickback_probability(j, &mut self.engine, l)?;
        self.record_cost(before);
        self.kickback.insert(j, p);
        Ok((p, self.engine.ledger().since(&before)))
    }
}

struct BoundedAmplifier<'a> {
    oracle: &'a mut GTildeOracle,
    handle: &'a mut OracleHandle,
    repeats: usize,
}

impl Amplifier for BoundedAmplifier<'_> {
    fn width(&self) -> usize {
        self.handle.k()
    }

    fn measure_after(&mut self, iterations: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let (probs, cost) = self.oracle.search_marginal(iterations)?;
        let j = sample_index(probs, rng);
        self.handle.charge(&cost.scaled(iterations as u64));
        Ok(j)
    }

    fn verify(&mut self, candidate: usize, rng: &mut ChaCha8Rng) -> Result<Verdict> {
        // Padded columns are known to be empty; no query needed.
        if candidate >= self.handle.table().cols() {
            return Ok(Verdict {
                accepted: false,
                votes_for: 0,
                votes_against: 0,
            });
        }
        let (p, cost) = self.oracle.vote_probability(candidate)?;
        let needed = self.repeats.div_ceil(2);
        let (mut yes, mut no) = (0, 0);
        while yes < needed && no < needed {
            self.handle.charge(&cost);
            if rng.random_bool(p.clamp(0.0, 1.0)) {
                yes += 1;
            } else {
                no += 1;
            }
        }
        Ok(Verdict {
            accepted: yes >= needed,
            votes_for: yes,
            votes_against: no,
        })
    }
}

/// Searches the hyperplane register of `handle` using SimAnd as the marking
/// oracle. `oracle` must be built from the same table as `handle`.
pub fn bounded_error_search(
    handle: &mut OracleHandle,
    oracle: &mut GTildeOracle,
    cfg: &BeqConfig,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    if oracle.table() != handle.table() {
        return Err(Error::LayoutMismatch("oracle and handle hold different tables".into()));
    }
    let before = handle.ledger();
    let max_rounds = cfg.max_rounds.unwrap_or_else(|| default_max_rounds(handle.k()));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut amp = BoundedAmplifier {
        oracle,
        handle,
        repeats: cfg.verify_repeats,
    };
    let (result, rounds) = run_schedule(&mut amp, max_rounds, &mut rng)?;
    Ok(SearchOutcome {
        result,
        queries: amp.handle.ledger().since(&before),
        rounds,
    })
}

/// Finds a column of all ones, or reports that none exists.
pub fn multi_criterion_search(handle: &mut OracleHandle, cfg: &BeqConfig) -> Result<SearchOutcome> {
    let mut oracle = GTildeOracle::new(handle.table())?;
    bounded_error_search(handle, &mut oracle, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainFailure {
    /// None of the sampled hyperplanes separates the data.
    NoSeparatingCandidate,
    /// A separating candidate existed but the search missed it.
    SearchMissed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainOutcome {
    pub hyperplane: Option<Hyperplane>,
    pub failure: Option<TrainFailure>,
    pub candidates: usize,
    /// Unmetered check of whether any candidate separates the data.
    pub candidate_available: bool,
    pub search: SearchOutcome,
}

/// Samples `K = ⌈2 ln(1/ε)/γ⌉` Gaussian hyperplanes and searches them for one
/// that classifies every point correctly.
pub fn train_perceptron(data: &Dataset, epsilon: f64, cfg: &BeqConfig, rng_seed: u64) -> Result<TrainOutcome> {
    train_perceptron_with(data, epsilon, DEFAULT_SAMPLE_CONSTANT, cfg, rng_seed)
}

/// [`train_perceptron`] with `K = ⌈c · ln(1/ε)/γ⌉`.
pub fn train_perceptron_with(
    data: &Dataset,
    epsilon: f64,
    sample_constant: f64,
    cfg: &BeqConfig,
    rng_seed: u64,
) -> Result<TrainOutcome> {
    let k = required_sample_count(data.claimed_margin(), epsilon, sample_constant)?;
    let planes = sample_hyperplanes(k, data.dimension(), rng_seed)?;
    train_on_candidates(data, planes, cfg)
}

/// Searches a given candidate list for a version-space hyperplane.
pub fn train_on_candidates(data: &Dataset, planes: Vec<Hyperplane>, cfg: &BeqConfig) -> Result<TrainOutcome> {
    let table = TruthTable::from_perceptron(data, &planes)?;
    let candidate_available = column_and(&table).into_iter().any(|g| g);
    let mut handle = OracleHandle::new(table);
    let search = multi_criterion_search(&mut handle, cfg)?;
    let (hyperplane, failure) = match search.result {
        SearchResult::Found(j) => (Some(planes[j].clone()), None),
        SearchResult::NotFound if candidate_available => (None, Some(TrainFailure::SearchMissed)),
        SearchResult::NotFound => (None, Some(TrainFailure::NoSeparatingCandidate)),
    };
    Ok(TrainOutcome {
        hyperplane,
        failure,
        candidates: planes.len(),
        candidate_available,
        search,
    })
}
