//! Labeled data, candidate hyperplanes and version-space membership.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

/// Constant in `K = ⌈c · ln(1/ε) / γ⌉`.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    fn parse(token: &str) -> Option<Label> {
        match token {
            "1" | "+1" => Some(Label::Positive),
            "-1" => Some(Label::Negative),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "1",
            Label::Negative => "-1",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    x: Vec<f64>,
    y: Label,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, y: Label) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidParameter("data point has no features".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("data point has a non-finite feature".into()));
        }
        Ok(DataPoint { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> Label {
        self.y
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }
}

/// Separator `p = (w, b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    w: Vec<f64>,
    b: f64,
}

impl Hyperplane {
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("hyperplane has no weights".into()));
        }
        if w.iter().chain(std::iter::once(&b)).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("hyperplane has a non-finite entry".into()));
        }
        if w.iter().all(|&v| v == 0.0) && b == 0.0 {
            return Err(Error::InvalidParameter("hyperplane (w, b) is the zero vector".into()));
        }
        Ok(Hyperplane { w, b })
    }

    /// The all-zero starting point of online training. Not a valid separator.
    pub(crate) fn zero(dimension: usize) -> Self {
        Hyperplane {
            w: vec![0.0; dimension],
            b: 0.0,
        }
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dimension(&self) -> usize {
        self.w.len()
    }

    pub fn weight_norm(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `(αw, αb)`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Hyperplane::new(self.w.iter().map(|v| v * alpha).collect(), self.b * alpha)
    }

    /// `w·x + b`.
    pub fn activation(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: x.len(),
            });
        }
        Ok(self.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.b)
    }

    pub(crate) fn update(&mut self, point: &DataPoint) {
        let s = point.y.sign();
        for (w, x) in self.w.iter_mut().zip(&point.x) {
            *w += s * x;
        }
        self.b += s;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<DataPoint>,
    claimed_margin: f64,
}

impl Dataset {
    pub fn new(points: Vec<DataPoint>, claimed_margin: f64) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidParameter("dataset is empty".into()));
        };
        let m = first.dimension();
        if let Some(p) = points.iter().find(|p| p.dimension() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.dimension(),
            });
        }
        if !(claimed_margin > 0.0 && claimed_margin.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "claimed margin must be positive, got {claimed_margin}"
            )));
        }
        Ok(Dataset {
            points,
            claimed_margin,
        })
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].dimension()
    }

    pub fn claimed_margin(&self) -> f64 {
        self.claimed_margin
    }

    /// `N M gamma`, then one `x_1 … x_M y` line per point.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.len(), self.dimension(), self.claimed_margin);
        for p in &self.points {
            for v in &p.x {
                write!(out, "{v} ").unwrap();
            }
            out.push_str(p.y.as_str());
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
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(hline, "header must be `N M gamma`"));
        }
        let n: usize = fields[0].parse().map_err(|_| parse_err(hline, "bad N"))?;
        let m: usize = fields[1].parse().map_err(|_| parse_err(hline, "bad M"))?;
        let gamma: f64 = fields[2].parse().map_err(|_| parse_err(hline, "bad gamma"))?;
        let mut points = Vec::with_capacity(n);
        for (line, body) in lines {
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.len() != m + 1 {
                return Err(parse_err(line, format!("expected {} fields", m + 1)));
            }
            let x = tokens[..m]
                .iter()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(line, "bad feature value"))?;
            let y = Label::parse(tokens[m]).ok_or_else(|| parse_err(line, "label must be 1 or -1"))?;
            points.push(DataPoint::new(x, y)?);
        }
        if points.len() != n {
            return Err(parse_err(
                hline,
                format!("header announces {n} points, found {}", points.len()),
            ));
        }
        Dataset::new(points, gamma)
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Dataset::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// `sgn(w·x + b)` with the boundary mapped to `+1`.
pub fn classify(p: &Hyperplane, x: &[f64]) -> Result<Label> {
    Ok(if p.activation(x)? >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    })
}

/// Strict `(w·x + b)·y > 0`.
pub fn correctly_classifies(p: &Hyperplane, d: &DataPoint) -> Result<bool> {
    Ok(p.activation(&d.x)? * d.y.sign() > 0.0)
}

/// `min_i y_i (w·x_i + b) / ‖w‖₂`.
pub fn geometric_margin(data: &Dataset, p: &Hyperplane) -> Result<f64> {
    let norm = p.weight_norm();
    if norm == 0.0 {
        return Err(Error::ZeroWeight);
    }
    data.points.iter().try_fold(f64::INFINITY, |min, d| {
        Ok(min.min(p.activation(&d.x)? * d.y.sign() / norm))
    })
}

pub fn in_version_space(data: &Dataset, p: &Hyperplane) -> Result<bool> {
    for d in &data.points {
        if !correctly_classifies(p, d)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `count` draws of `(w, b) ~ N(0, I_{M+1})`.
pub fn sample_hyperplanes(count: usize, dimension: usize, seed: u64) -> Result<Vec<Hyperplane>> {
    if count == 0 || dimension == 0 {
        return Err(Error::InvalidParameter(
            "need at least one hyperplane of dimension ≥ 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planes = Vec::with_capacity(count);
    while planes.len() < count {
        let w: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
        let b: f64 = rng.sample(StandardNormal);
        // An exact zero draw has probability zero; skip it rather than fail.
        if let Ok(p) = Hyperplane::new(w, b) {
            planes.push(p);
        }
    }
    Ok(planes)
}

/// `K = ⌈c · ln(1/ε) / γ⌉`.
pub fn required_sample_count(gamma: f64, epsilon: f64, c: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample constant must be positive, got {c}")));
    }
    let k = c * (-epsilon.ln()) / gamma;
    // ln and the division each round; don't let 2.0000000000000004 become 3.
    let k = (k - k * 1e-12).ceil();
    Ok((k as usize).max(1))
}

/// Rejection-sampled dataset around a random unit-norm plane.
///
/// Points are uniform in `[-1, 1]^M`; draws closer than `gamma` to the plane
/// are discarded and the rest are labeled by it. The bias is uniform in
/// `[-0.5, 0.5]`.
pub fn generate_planted_dataset(
    n: usize,
    dimension: usize,
    gamma: f64,
    seed: u64,
) -> Result<(Dataset, Hyperplane)> {
    if n == 0 || dimension == 0 {
        return Err(Error::InvalidParameter("need N ≥ 1 and M ≥ 1".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    let b = rng.random_range(-0.5..=0.5);
    let planted = Hyperplane::new(w, b)?;

    let budget = 1000 * n + 10_000;
    let mut points = Vec::with_capacity(n);
    let mut attempts = 0;
    while points.len() < n {
        if attempts == budget {
            return Err(Error::RetryBudgetExhausted { attempts });
        }
        attempts += 1;
        let x: Vec<f64> = (0..dimension).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let a = planted.activation(&x)?;
        if a.abs() < gamma {
            continue;
        }
        let y = classify(&planted, &x)?;
        points.push(DataPoint::new(x, y)?);
    }
    Ok((Dataset::new(points, gamma)?, planted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: Label) -> DataPoint {
        DataPoint::new(x.to_vec(), y).unwrap()
    }

    fn plane(w: &[f64], b: f64) -> Hyperplane {
        Hyperplane::new(w.to_vec(), b).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&plane(&[1.0, 0.0], 0.0), &[2.0, 5.0]).unwrap(), Label::Positive);
        // boundary maps to +1
        assert_eq!(classify(&plane(&[1.0, 0.0], 0.0), &[0.0, 3.0]).unwrap(), Label::Positive);
        assert_eq!(classify(&plane(&[1.0, 0.0], -1.0), &[0.0, 0.0]).unwrap(), Label::Negative);
        assert!(matches!(
            classify(&plane(&[1.0, 0.0], 0.0), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn correctly_classifies_examples() {
        let p = plane(&[1.0, 0.0], 0.0);
        assert!(correctly_classifies(&p, &pt(&[1.0, 0.0], Label::Positive)).unwrap());
        assert!(!correctly_classifies(&p, &pt(&[0.0, 0.0], Label::Positive)).unwrap());
        assert!(correctly_classifies(&p, &pt(&[-1.0, 0.0], Label::Negative)).unwrap());
    }

    #[test]
    fn margin_examples() {
        let p = plane(&[1.0, 0.0], 0.0);
        let d = Dataset::new(vec![pt(&[2.0, 0.0], Label::Positive)], 1.0).unwrap();
        assert_eq!(geometric_margin(&d, &p).unwrap(), 2.0);
        let d = Dataset::new(vec![pt(&[2.0, 0.0], Label::Negative)], 1.0).unwrap();
        assert_eq!(geometric_margin(&d, &p).unwrap(), -2.0);
        let bias_only = plane(&[0.0, 0.0], 1.0);
        assert!(matches!(geometric_margin(&d, &bias_only), Err(Error::ZeroWeight)));
    }

    #[test]
    fn fig1_style_instance() {
        // N=12, M=2 and 2γ = 0.39 as in the two-dimensional illustration.
        let (data, planted) = generate_planted_dataset(12, 2, 0.195, 1).unwrap();
        assert_eq!(data.len(), 12);
        let margin = geometric_margin(&data, &planted).unwrap();
        assert!(margin >= 0.195, "margin {margin}");
        assert!(in_version_space(&data, &planted).unwrap());

        // Two lines through the data that each misclassify something.
        let reversed = planted.scaled(-1.0).unwrap();
        assert!(!in_version_space(&data, &reversed).unwrap());
        let rotated = plane(&[-planted.w()[1], planted.w()[0]], planted.b());
        let shifted = plane(planted.w(), planted.b() + 2.0);
        let misfits = [rotated, shifted]
            .iter()
            .filter(|p| !in_version_space(&data, p).unwrap())
            .count();
        assert!(misfits >= 1);
    }

    #[test]
    fn planted_generator_postconditions() {
        for seed in 0..100 {
            let (data, planted) = generate_planted_dataset(20, 2, 0.2, seed).unwrap();
            assert!(in_version_space(&data, &planted).unwrap());
            assert!(geometric_margin(&data, &planted).unwrap() >= 0.2);
            assert!((planted.weight_norm() - 1.0).abs() < 1e-12);
            let again = generate_planted_dataset(20, 2, 0.2, seed).unwrap();
            assert_eq!(again.0, data);
        }
    }

    #[test]
    fn flipped_labels_leave_version_space() {
        let (data, planted) = generate_planted_dataset(10, 3, 0.1, 5).unwrap();
        let flipped = Dataset::new(
            data.points()
                .iter()
                .map(|p| pt(p.x(), p.y().flipped()))
                .collect(),
            data.claimed_margin(),
        )
        .unwrap();
        assert!(!in_version_space(&flipped, &planted).unwrap());
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(generate_planted_dataset(0, 2, 0.1, 0).is_err());
        assert!(generate_planted_dataset(5, 2, 1.0, 0).is_err());
        assert!(generate_planted_dataset(5, 2, 0.0, 0).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_hyperplanes(3, 2, 42).unwrap();
        let b = sample_hyperplanes(3, 2, 42).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|p| p.dimension() == 2));
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.w()[0].to_bits(), q.w()[0].to_bits());
            assert_eq!(p.b().to_bits(), q.b().to_bits());
        }
        assert_ne!(a, sample_hyperplanes(3, 2, 43).unwrap());
        assert!(sample_hyperplanes(0, 2, 1).is_err());
    }

    #[test]
    fn sampling_moments() {
        let planes = sample_hyperplanes(10_000, 2, 7).unwrap();
        let coords: [Vec<f64>; 3] = [
            planes.iter().map(|p| p.w()[0]).collect(),
            planes.iter().map(|p| p.w()[1]).collect(),
            planes.iter().map(|p| p.b()).collect(),
        ];
        for c in coords {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
            assert!(mean.abs() < 4.0 / 100.0, "mean {mean}");
            assert!((0.9..=1.1).contains(&var), "var {var}");
        }
    }

    #[test]
    fn sample_count_examples() {
        let inv_e = (-1.0f64).exp();
        assert_eq!(required_sample_count(1.0, inv_e, 2.0).unwrap(), 2);
        assert_eq!(required_sample_count(0.1, 0.1, 2.0).unwrap(), 47);
        for gamma in [0.4, 0.2, 0.1, 0.05] {
            let k = required_sample_count(gamma, 0.05, 2.0).unwrap();
            let k_half = required_sample_count(gamma / 2.0, 0.05, 2.0).unwrap();
            assert!(k_half >= 2 * k - 1 && k_half <= 2 * k, "{k} → {k_half}");
        }
        assert!(required_sample_count(0.0, 0.1, 2.0).is_err());
        assert!(required_sample_count(1.5, 0.1, 2.0).is_err());
        assert!(required_sample_count(0.1, 1.0, 2.0).is_err());
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::new(vec![], 0.1).is_err());
        assert!(Dataset::new(vec![pt(&[1.0], Label::Positive)], 0.0).is_err());
        assert!(matches!(
            Dataset::new(
                vec![pt(&[1.0], Label::Positive), pt(&[1.0, 2.0], Label::Negative)],
                0.1
            ),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Hyperplane::new(vec![0.0, 0.0], 0.0).is_err());
        assert!(Hyperplane::new(vec![f64::NAN], 1.0).is_err());
        assert!(DataPoint::new(vec![f64::INFINITY], Label::Positive).is_err());
    }

    #[test]
    fn text_format_rejects_garbage() {
        assert!(Dataset::from_text("").is_err());
        assert!(Dataset::from_text("1 2\n0 0 1\n").is_err());
        assert!(Dataset::from_text("1 2 0.1\n0 0 2\n").is_err());
        assert!(Dataset::from_text("2 2 0.1\n0 0 1\n").is_err());
        let d = Dataset::from_text("1 2 0.5\n0.25 -3 +1\n").unwrap();
        assert_eq!(d.points()[0].y(), Label::Positive);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec2() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-10.0f64..10.0, 2)
        }

        proptest! {
            #[test]
            fn classify_matches_activation_sign(w in vec2(), b in -5.0f64..5.0, x in vec2()) {
                prop_assume!(w.iter().any(|&v| v != 0.0) || b != 0.0);
                let p = Hyperplane::new(w.clone(), b).unwrap();
                let direct = w[0] * x[0] + w[1] * x[1] + b;
                let expected = if direct >= 0.0 { Label::Positive } else { Label::Negative };
                prop_assert_eq!(classify(&p, &x).unwrap(), expected);
            }

            #[test]
            fn version_space_iff_positive_margin(
                seed in 0u64..1000, w in vec2(), b in -1.0f64..1.0, alpha in 0.01f64..100.0
            ) {
                prop_assume!(w.iter().any(|&v| v.abs() > 1e-6));
                let (data, _) = generate_planted_dataset(8, 2, 0.1, seed).unwrap();
                let p = Hyperplane::new(w, b).unwrap();
                let inside = in_version_space(&data, &p).unwrap();
                prop_assert_eq!(inside, geometric_margin(&data, &p).unwrap() > 0.0);
                prop_assert_eq!(inside, in_version_space(&data, &p.scaled(alpha).unwrap()).unwrap());
            }

            #[test]
            fn text_round_trip_is_bit_exact(seed in 0u64..10_000, n in 1usize..20, m in 1usize..4) {
                let (data, _) = generate_planted_dataset(n, m, 0.05, seed).unwrap();
                let back = Dataset::from_text(&data.to_text()).unwrap();
                prop_assert_eq!(back, data);
            }
        }
    }
}
