//! Two-level AND-OR trees: `OR_j AND_i z_{i + jN}`.

use std::path::Path;

use crate::error::{parse_err, Error, Result};
use crate::oracles::{OracleHandle, TruthTable};
use crate::search::{bounded_error_search, multi_criterion_search, BeqConfig, GTildeOracle, SearchOutcome};

/// `K` AND-gates of fan-in `N` under one OR; block `j` is `z[jN .. (j+1)N]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AndOrInstance {
    n: usize,
    k: usize,
    z: Vec<bool>,
}

impl AndOrInstance {
    pub fn new(n: usize, k: usize, z: Vec<bool>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter("fan-ins must be positive".into()));
        }
        if z.len() != n * k {
            return Err(Error::DimensionMismatch {
                expected: n * k,
                found: z.len(),
            });
        }
        Ok(AndOrInstance { n, k, z })
    }

    /// Flattens a table column by column, `z_{i + jN} = f(i, j)`.
    pub fn from_table(table: &TruthTable) -> Self {
        let (n, k) = (table.rows(), table.cols());
        let z = (0..n * k).map(|x| table.get(x % n, x / n)).collect();
        AndOrInstance { n, k, z }
    }

    /// `f(i, j) = z_{i + jN}`.
    pub fn to_table(&self) -> TruthTable {
        TruthTable::from_fn(self.n, self.k, |i, j| self.z[i + j * self.n]).expect("dimensions checked")
    }

    pub fn and_fan_in(&self) -> usize {
        self.n
    }

    pub fn or_fan_in(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> &[bool] {
        &self.z
    }

    /// `N K` on the first line, `z` as one line of digits on the second.
    pub fn to_text(&self) -> String {
        let bits: String = self.z.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!("{} {}\n{}\n", self.n, self.k, bits)
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
        let [n, k] = dims[..] else {
            return Err(parse_err(hline, "header must be `N K`"));
        };
        let (zline, body) = lines.next().ok_or_else(|| parse_err(hline + 1, "missing bit string"))?;
        let z = body
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(parse_err(zline, format!("`{c}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some((line, _)) = lines.next() {
            return Err(parse_err(line, "unexpected content after the bit string"));
        }
        if z.len() != n * k {
            return Err(parse_err(zline, format!("expected {} bits, found {}", n * k, z.len())));
        }
        AndOrInstance::new(n, k, z)
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        AndOrInstance::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub fn evaluate_direct(inst: &AndOrInstance) -> bool {
    inst.z.chunks(inst.n).any(|block| block.iter().all(|&b| b))
}

/// Evaluates the tree by searching for an all-ones block.
pub fn evaluate_via_search(inst: &AndOrInstance, cfg: &BeqConfig) -> Result<(bool, SearchOutcome)> {
    let mut handle = OracleHandle::new(inst.to_table());
    let out = multi_criterion_search(&mut handle, cfg)?;
    Ok((out.result.found().is_some(), out))
}

/// [`evaluate_via_search`] with a SimAnd oracle reused across runs.
pub fn evaluate_via_search_with(
    inst: &AndOrInstance,
    oracle: &mut GTildeOracle,
    cfg: &BeqConfig,
) -> Result<(bool, SearchOutcome)> {
    let mut handle = OracleHandle::new(inst.to_table());
    let out = bounded_error_search(&mut handle, oracle, cfg)?;
    Ok((out.result.found().is_some(), out))
}
