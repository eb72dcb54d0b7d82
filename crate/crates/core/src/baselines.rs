//! Classical reference algorithms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracles::{column_and, OracleHandle};
use crate::perceptron::{correctly_classifies, Dataset, Hyperplane};
use crate::search::{SearchOutcome, SearchResult};

/// Sequential scan: columns left to right, rows top-down, leaving a column at
/// its first 0. Every read is a metered classical query.
pub fn classical_version_space_search(handle: &mut OracleHandle) -> Result<SearchOutcome> {
    let before = handle.ledger();
    let (rows, cols) = (handle.table().rows(), handle.table().cols());
    let mut result = SearchResult::NotFound;
    'columns: for j in 0..cols {
        for i in 0..rows {
            if !handle.query_classical(i, j)? {
                continue 'columns;
            }
        }
        result = SearchResult::Found(j);
        break;
    }
    Ok(SearchOutcome {
        result,
        queries: handle.ledger().since(&before),
        rounds: Vec::new(),
    })
}

/// Unmetered column-AND vector of the handle's table.
pub fn brute_force_g(handle: &OracleHandle) -> Vec<bool> {
    column_and(handle.table())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OnlineOutcome {
    /// The first hyperplane that survives a full pass without a mistake.
    pub hyperplane: Option<Hyperplane>,
    pub updates: usize,
}

/// Mistake-driven perceptron starting from `w = 0, b = 0`.
pub fn online_train(data: &Dataset, max_updates: usize) -> Result<OnlineOutcome> {
    online_train_from(data, Hyperplane::zero(data.dimension()), max_updates)
}

/// Mistake-driven perceptron: `w ← w + y·x, b ← b + y` on every misclassified
/// point, sweeping the data in order until a pass makes no mistake.
pub fn online_train_from(data: &Dataset, initial: Hyperplane, max_updates: usize) -> Result<OnlineOutcome> {
    if max_updates == 0 {
        return Err(Error::InvalidParameter("max_updates must be at least 1".into()));
    }
    if initial.dimension() != data.dimension() {
        return Err(Error::DimensionMismatch {
            expected: data.dimension(),
            found: initial.dimension(),
        });
    }
    let mut plane = initial;
    let mut updates = 0;
    loop {
        let mut clean = true;
        for point in data.points() {
            if correctly_classifies(&plane, point)? {
                continue;
            }
            if updates == max_updates {
                return Ok(OnlineOutcome {
                    hyperplane: None,
                    updates,
                });
            }
            plane.update(point);
            updates += 1;
            clean = false;
        }
        if clean {
            return Ok(OnlineOutcome {
                hyperplane: Some(plane),
                updates,
            });
        }
    }
}

/// `(R/γ)²` with `R = max ‖(x, 1)‖` and `γ = min y(w·x + b)/‖(w, b)‖` for the
/// given separator: the perceptron's bound on updates from the zero start.
pub fn mistake_bound(data: &Dataset, separator: &Hyperplane) -> Result<f64> {
    let norm = (separator.weight_norm().powi(2) + separator.b().powi(2)).sqrt();
    let mut radius: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for point in data.points() {
        let r = (point.x().iter().map(|v| v * v).sum::<f64>() + 1.0).sqrt();
        radius = radius.max(r);
        margin = margin.min(separator.activation(point.x())? * point.y().sign() / norm);
    }
    if margin <= 0.0 {
        return Err(Error::InvalidParameter("separator does not separate the data".into()));
    }
    Ok((radius / margin).powi(2))
}
