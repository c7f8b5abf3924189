//! Finite two-sided coefficient series on the circle.
//!
//! A [`CoefficientSeries`] is a finitely supported map `n -> c(n)` standing for
//! the trigonometric polynomial `s(t) = sum_n c(n) e^{int}`. Everything here is
//! exact direct summation in double precision: no FFTs, no truncation policy.
//!
//! Grid evaluations live on the uniform grid `t_j = 2 pi j / M`; the phase
//! `e^{i n t_j}` is looked up as the `(n j mod M)`-th root of unity, so large
//! frequencies do not lose accuracy to argument reduction.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("duplicate frequency {0} in series input")]
    DuplicateFrequency(i64),
    #[error("non-finite amplitude at frequency {0}")]
    NonFinite(i64),
    #[error("abel evaluation needs non-negative frequencies, found {0}")]
    NegativeFrequency(i64),
    #[error("abel evaluation needs |z| < 1, got |z| = {0}")]
    OutsideDisk(f64),
    #[error("weight sequence must be nonempty")]
    EmptyWeights,
    #[error("weight {value} at index {index} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights decrease at index {index}: {prev} > {next}")]
    DecreasingWeight { index: usize, prev: f64, next: f64 },
    #[error("malformed series file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rotation by a fixed angle `beta`, evaluated at integer multiples.
///
/// `turns(n)` is `n * beta / 2pi` reduced to `[-1/2, 1/2)`. Implementations that
/// know `beta` exactly should do the reduction exactly; the floating version
/// loses about `|n| * ulp(beta)` of accuracy.
pub trait Shift {
    fn turns(&self, n: i64) -> f64;

    /// `e^{i n beta}`.
    fn unit(&self, n: i64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.turns(n))
    }

    /// `e^{i n beta} - 1`, accurate when the rotation is close to the identity.
    fn unit_minus_one(&self, n: i64) -> Complex64 {
        let x = self.turns(n);
        let s = (PI * x).sin();
        Complex64::new(-2.0 * s * s, (2.0 * PI * x).sin())
    }
}

impl Shift for f64 {
    fn turns(&self, n: i64) -> f64 {
        let x = (*self * n as f64 / (2.0 * PI)).rem_euclid(1.0);
        if x >= 0.5 {
            x - 1.0
        } else {
            x
        }
    }
}

/// Finitely supported coefficient map `n -> c(n)`, sorted by frequency.
///
/// Zero amplitudes may be present; every operation treats a stored zero the
/// same as an absent frequency.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientSeries {
    coeffs: BTreeMap<i64, Complex64>,
}

impl CoefficientSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a series from `(n, c)` pairs, rejecting duplicates and non-finite values.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (n, c) in pairs {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(SeriesError::NonFinite(n));
            }
            if coeffs.insert(n, c).is_some() {
                return Err(SeriesError::DuplicateFrequency(n));
            }
        }
        Ok(Self { coeffs })
    }

    /// Builds from real amplitudes. Panics on duplicates or non-finite input.
    pub fn from_real<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        Self::from_pairs(pairs.into_iter().map(|(n, a)| (n, Complex64::new(a, 0.0))))
            .expect("valid real series")
    }

    pub fn monomial(n: i64, c: Complex64) -> Self {
        let mut s = Self::new();
        s.coeffs.insert(n, c);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Lowest stored frequency.
    pub fn n_min(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Highest stored frequency.
    pub fn n_max(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    /// Adds `c` to the amplitude at `n`.
    pub fn add_term(&mut self, n: i64, c: Complex64) {
        *self.coeffs.entry(n).or_default() += c;
    }

    /// Drops stored zeros.
    pub fn trimmed(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| **c != Complex64::default())
                .map(|(&n, &c)| (n, c))
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&n, &c)| (n, c * factor)).collect(),
        }
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in other.iter() {
            out.add_term(n, c);
        }
        out
    }

    /// Coefficient-wise difference.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in other.iter() {
            out.add_term(n, -c);
        }
        out
    }

    /// Sub-series on frequencies inside `range`.
    pub fn restrict<R: std::ops::RangeBounds<i64>>(&self, range: R) -> Self {
        Self {
            coeffs: self.coeffs.range(range).map(|(&n, &c)| (n, c)).collect(),
        }
    }

    /// Value of the trigonometric polynomial at a single angle.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.iter()
            .map(|(n, c)| c * Complex64::from_polar(1.0, (n as f64) * t))
            .sum()
    }

    /// Samples on the uniform `m`-point grid.
    pub fn sample(&self, m: usize) -> GridFunction {
        self.partial_sum(i64::MAX, m)
    }

    /// `t_j -> sum_{n < cutoff} c(n) e^{i n t_j}` on the `m`-point grid.
    pub fn partial_sum(&self, cutoff: i64, m: usize) -> GridFunction {
        assert!(m >= 1, "grid size must be positive");
        let roots = RootTable::new(m);
        let mut samples = vec![Complex64::default(); m];
        for (n, c) in self.coeffs.range(..cutoff) {
            roots.accumulate(*n, *c, &mut samples);
        }
        GridFunction { samples }
    }

    /// `g*(t_j) = max_N |sum_{n < N} c(n) e^{i n t_j}|`, over every prefix in
    /// increasing frequency order (the empty prefix included).
    pub fn maximal_partial_sum(&self, m: usize) -> GridFunction<f64> {
        assert!(m >= 1, "grid size must be positive");
        let roots = RootTable::new(m);
        let mut acc = vec![Complex64::default(); m];
        let mut best = vec![0.0f64; m];
        for (&n, &c) in &self.coeffs {
            roots.accumulate(n, c, &mut acc);
            for (b, a) in best.iter_mut().zip(&acc) {
                *b = b.max(a.norm());
            }
        }
        GridFunction { samples: best }
    }

    /// `g*` at a single angle.
    pub fn maximal_partial_sum_at(&self, t: f64) -> f64 {
        let mut acc = Complex64::default();
        let mut best = 0.0f64;
        for (n, c) in self.iter() {
            acc += c * Complex64::from_polar(1.0, n as f64 * t);
            best = best.max(acc.norm());
        }
        best
    }

    /// `G(z) = sum c(n) z^n` for a series supported on `n >= 0` and `|z| < 1`.
    pub fn abel_eval(&self, z: Complex64) -> Result<Complex64, SeriesError> {
        if let Some(n) = self.n_min().filter(|&n| n < 0) {
            return Err(SeriesError::NegativeFrequency(n));
        }
        if !(z.norm() < 1.0) {
            return Err(SeriesError::OutsideDisk(z.norm()));
        }
        Ok(self.power_eval(z))
    }

    /// Sparse Horner evaluation of `sum c(n) z^n` with no domain checks.
    /// Callers guarantee `n >= 0` on the support.
    pub(crate) fn power_eval(&self, z: Complex64) -> Complex64 {
        let mut iter = self.coeffs.iter().rev();
        let Some((&top, &c_top)) = iter.next() else {
            return Complex64::default();
        };
        let mut acc = c_top;
        let mut prev = top;
        for (&n, &c) in iter {
            acc = acc * z.powu((prev - n) as u32) + c;
            prev = n;
        }
        acc * z.powu(prev as u32)
    }

    /// Parseval norm `sqrt(sum |c(n)|^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Weighted norm `sqrt(sum |c(n)|^2 w(|n|)^2)`.
    pub fn hw_norm(&self, weights: &WeightSequence) -> f64 {
        self.iter()
            .map(|(n, c)| c.norm_sqr() * weights.at(n.unsigned_abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Wiener-algebra norm `sum |c(n)|`.
    pub fn wiener_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// `sqrt(sum_{n < cutoff} |c(n)|^2)`.
    pub fn tail_l2(&self, cutoff: i64) -> f64 {
        self.coeffs
            .range(..cutoff)
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Multiplication by `e^{imt}`: `c'(n + m) = c(n)`.
    pub fn modulate(&self, m: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&n, &c)| (n + m, c)).collect(),
        }
    }

    /// Coefficients of `t -> s(t + beta) - s(t)`, i.e. `c(n) (e^{i n beta} - 1)`.
    pub fn beta_difference<S: Shift + ?Sized>(&self, beta: &S) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&n, &c)| (n, c * beta.unit_minus_one(n)))
                .collect(),
        }
    }

    /// Splits into `(n >= 0, n < 0)` parts.
    pub fn split_parts(&self) -> (Self, Self) {
        (self.restrict(0..), self.restrict(..0))
    }

    /// The series of `t -> s(-t)`: `c'(-n) = c(n)`.
    pub fn reflect(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&n, &c)| (-n, c)).collect(),
        }
    }

    pub fn to_json(&self) -> SeriesFile {
        SeriesFile {
            coeffs: self
                .iter()
                .map(|(n, c)| SeriesEntry { n, re: c.re, im: c.im })
                .collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, SeriesError> {
        let file: SeriesFile =
            serde_json::from_str(text).map_err(|e| SeriesError::Format(e.to_string()))?;
        file.try_into()
    }

    /// Reads the `n,re,im` CSV layout.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, SeriesError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| SeriesError::Format(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["n", "re", "im"] {
            return Err(SeriesError::Format("expected header n,re,im".into()));
        }
        let mut entries = Vec::new();
        for row in rdr.deserialize::<SeriesEntry>() {
            entries.push(row.map_err(|e| SeriesError::Format(e.to_string()))?);
        }
        SeriesFile { coeffs: entries }.try_into()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SeriesError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (n, c) in self.iter() {
            wtr.serialize(SeriesEntry { n, re: c.re, im: c.im })
                .map_err(|e| SeriesError::Format(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// On-disk layout: `{"coeffs": [{"n": .., "re": .., "im": ..}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesFile {
    pub coeffs: Vec<SeriesEntry>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

impl TryFrom<SeriesFile> for CoefficientSeries {
    type Error = SeriesError;

    fn try_from(file: SeriesFile) -> Result<Self, Self::Error> {
        Self::from_pairs(file.coeffs.into_iter().map(|e| (e.n, Complex64::new(e.re, e.im))))
    }
}

/// Samples on the uniform grid `t_j = 2 pi j / M`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T = Complex64> {
    samples: Vec<T>,
}

impl<T> GridFunction<T> {
    pub fn from_samples(samples: Vec<T>) -> Self {
        assert!(!samples.is_empty(), "grid size must be positive");
        Self { samples }
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn t(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.samples.len() as f64
    }
}

impl GridFunction<f64> {
    /// `(2 pi / M) * #{j : f(t_j) > level}`.
    pub fn superlevel_measure(&self, level: f64) -> f64 {
        let count = self.samples.iter().filter(|&&v| v > level).count();
        2.0 * PI * count as f64 / self.samples.len() as f64
    }
}

impl GridFunction<Complex64> {
    pub fn abs(&self) -> GridFunction<f64> {
        GridFunction {
            samples: self.samples.iter().map(|c| c.norm()).collect(),
        }
    }

    /// Mean of `|f|^2` over the grid.
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Weights `w(0), w(1), ...`: positive, non-decreasing, extended past the
/// stored range by the last value.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    values: Vec<f64>,
}

impl WeightSequence {
    pub fn new(values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::EmptyWeights);
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(SeriesError::NonPositiveWeight { index, value });
            }
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(SeriesError::DecreasingWeight {
                index: i + 1,
                prev: values[i],
                next: values[i + 1],
            });
        }
        Ok(Self { values })
    }

    pub fn from_fn(len: usize, f: impl Fn(u64) -> f64) -> Result<Self, SeriesError> {
        Self::new((0..len as u64).map(f).collect())
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![value]).expect("positive constant weight")
    }

    pub fn at(&self, n: u64) -> f64 {
        let i = usize::try_from(n).unwrap_or(usize::MAX);
        self.values.get(i).copied().unwrap_or(*self.values.last().unwrap())
    }

    /// Number of stored values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    /// Smallest stored index `n >= from` with `w(n) > target`.
    pub fn first_exceeding(&self, target: f64, from: u64) -> Option<u64> {
        let start = usize::try_from(from).ok()?;
        if start >= self.values.len() {
            return None;
        }
        let i = start + self.values[start..].partition_point(|&w| w <= target);
        (i < self.values.len()).then_some(i as u64)
    }

    /// Smallest stored index `n >= from` with `w(n) >= target`.
    pub fn first_reaching(&self, target: f64, from: u64) -> Option<u64> {
        let start = usize::try_from(from).ok()?;
        if start >= self.values.len() {
            return None;
        }
        let offset = self.values[start..].partition_point(|&w| w < target);
        let i = start + offset;
        (i < self.values.len()).then_some(i as u64)
    }
}

struct RootTable {
    m: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    fn new(m: usize) -> Self {
        let roots = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Self { m: m as u64, roots }
    }

    fn accumulate(&self, n: i64, c: Complex64, out: &mut [Complex64]) {
        let step = n.rem_euclid(self.m as i64) as u64;
        let mut idx = 0u64;
        for v in out.iter_mut() {
            *v += c * self.roots[idx as usize];
            idx += step;
            if idx >= self.m {
                idx -= self.m;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_partial_sum() {
        let s = CoefficientSeries::from_real([(0, 1.0)]);
        let g = s.partial_sum(1, 4);
        assert!(g.samples().iter().all(|v| *v == c(1.0, 0.0)));
        // N at or below the support gives the empty sum
        assert!(s.partial_sum(0, 4).samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dirichlet_kernel_at_zero() {
        let s = CoefficientSeries::from_real((0..=10).map(|n| (n, 1.0)));
        assert!((s.partial_sum(11, 8).samples()[0] - c(11.0, 0.0)).norm() < 1e-12);
        assert_eq!(s.maximal_partial_sum(8).samples()[0], 11.0);
    }

    #[test]
    fn single_exponential_maximal_function() {
        let s = CoefficientSeries::from_real([(5, 1.0)]);
        let g = s.maximal_partial_sum(16);
        assert!(g.samples().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn abel_examples() {
        let s = CoefficientSeries::from_real([(1, 1.0)]);
        assert!((s.abel_eval(c(0.5, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        let s = CoefficientSeries::from_real([(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert!((s.abel_eval(c(-0.5, 0.0)).unwrap() - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn abel_rejects_bad_input() {
        let s = CoefficientSeries::from_real([(-1, 1.0), (2, 1.0)]);
        assert!(matches!(s.abel_eval(c(0.1, 0.0)), Err(SeriesError::NegativeFrequency(-1))));
        let s = CoefficientSeries::from_real([(2, 1.0)]);
        assert!(matches!(s.abel_eval(c(1.0, 0.0)), Err(SeriesError::OutsideDisk(_))));
        assert!(s.abel_eval(c(0.0, 0.999)).is_ok());
    }

    #[test]
    fn sparse_horner_handles_gaps() {
        let s = CoefficientSeries::from_real([(3, 2.0), (10, -1.0)]);
        let z = c(0.3, -0.4);
        let direct = 2.0 * z.powu(3) - z.powu(10);
        assert!((s.abel_eval(z).unwrap() - direct).norm() < 1e-15);
    }

    #[test]
    fn norms() {
        let s = CoefficientSeries::from_real([(0, 3.0), (4, 4.0)]);
        assert_eq!(s.l2_norm(), 5.0);
        assert_eq!(CoefficientSeries::new().l2_norm(), 0.0);
        let s = CoefficientSeries::from_real([(0, 1.0), (3, -1.0)]);
        assert_eq!(s.wiener_norm(), 2.0);
        assert_eq!(CoefficientSeries::new().wiener_norm(), 0.0);
    }

    #[test]
    fn weighted_norm() {
        let one = CoefficientSeries::from_real([(1, 1.0)]);
        assert_eq!(one.hw_norm(&WeightSequence::constant(1.0)), 1.0);
        let w = WeightSequence::from_fn(10, |n| n.max(1) as f64).unwrap();
        let two = CoefficientSeries::from_real([(2, 1.0)]);
        assert_eq!(two.hw_norm(&w), 2.0);
        // past the stored range the last value is reused
        let far = CoefficientSeries::from_real([(-50, 1.0)]);
        assert_eq!(far.hw_norm(&w), 9.0);
    }

    #[test]
    fn weight_validation() {
        assert!(matches!(WeightSequence::new(vec![]), Err(SeriesError::EmptyWeights)));
        assert!(matches!(
            WeightSequence::new(vec![1.0, 0.0]),
            Err(SeriesError::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            WeightSequence::new(vec![1.0, 2.0, 1.5]),
            Err(SeriesError::DecreasingWeight { index: 2, .. })
        ));
        let w = WeightSequence::new(vec![1.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(w.first_reaching(2.0, 0), Some(1));
        assert_eq!(w.first_reaching(2.0, 2), Some(2));
        assert_eq!(w.first_reaching(6.0, 0), None);
    }

    #[test]
    fn tail() {
        let s = CoefficientSeries::from_real([(-5, 2.0), (1, 7.0)]);
        assert_eq!(s.tail_l2(-1), 2.0);
        assert_eq!(s.tail_l2(-10), 0.0);
    }

    #[test]
    fn modulation() {
        let s = CoefficientSeries::from_real([(0, 1.0)]);
        assert_eq!(s.modulate(3), CoefficientSeries::from_real([(3, 1.0)]));
        assert_eq!(s.modulate(0), s);
        let r = CoefficientSeries::from_real([(-2, 1.0), (4, -3.0)]);
        assert_eq!(r.modulate(7).modulate(-7), r);
    }

    #[test]
    fn beta_difference_examples() {
        let s = CoefficientSeries::from_real([(-3, 1.0), (2, 0.5)]);
        assert!(s.beta_difference(&0.0).wiener_norm() == 0.0);
        let one = CoefficientSeries::from_real([(1, 1.0)]);
        let d = one.beta_difference(&PI);
        assert!((d.coeff(1) - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn float_shift_reduces_into_half_turn() {
        for n in [-7i64, -1, 0, 1, 5, 1000] {
            let x = 1.234f64.turns(n);
            assert!((-0.5..0.5).contains(&x));
            let direct = Complex64::from_polar(1.0, 1.234 * n as f64);
            assert!((1.234f64.unit(n) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn superlevel() {
        let g = GridFunction::from_samples(vec![5.0; 8]);
        assert!((g.superlevel_measure(4.0) - 2.0 * PI).abs() < 1e-15);
        assert_eq!(g.superlevel_measure(6.0), 0.0);
        let half = GridFunction::from_samples(vec![1.0, 1.0, 0.0, 0.0]);
        assert!((half.superlevel_measure(0.5) - PI).abs() < 1e-15);
    }

    #[test]
    fn split() {
        let s = CoefficientSeries::from_real([(-1, 1.0), (0, 2.0)]);
        let (pos, neg) = s.split_parts();
        assert_eq!(pos, CoefficientSeries::from_real([(0, 2.0)]));
        assert_eq!(neg, CoefficientSeries::from_real([(-1, 1.0)]));
        let p = CoefficientSeries::from_real([(1, 1.0), (4, 2.0)]);
        assert_eq!(p.split_parts(), (p.clone(), CoefficientSeries::new()));
    }

    #[test]
    fn zero_amplitudes_are_invisible() {
        let a = CoefficientSeries::from_real([(0, 1.0), (3, 2.0)]);
        let b = CoefficientSeries::from_real([(-4, 0.0), (0, 1.0), (3, 2.0), (9, 0.0)]);
        assert_eq!(a.l2_norm(), b.l2_norm());
        assert_eq!(a.wiener_norm(), b.wiener_norm());
        assert_eq!(a.sample(16), b.sample(16));
        let ga = a.maximal_partial_sum(16);
        let gb = b.maximal_partial_sum(16);
        assert_eq!(ga, gb);
        assert_eq!(b.trimmed(), a);
    }

    #[test]
    fn json_duplicate_rejected() {
        let text = r#"{"coeffs": [{"n": 1, "re": 1.0, "im": 0.0}, {"n": 1, "re": 2.0, "im": 0.0}]}"#;
        assert!(matches!(
            CoefficientSeries::from_json_str(text),
            Err(SeriesError::DuplicateFrequency(1))
        ));
        let text = r#"{"coeffs": [{"n": 4, "re": 1.0, "im": 0.5}, {"n": -2, "re": 2.0, "im": 0.0}]}"#;
        let s = CoefficientSeries::from_json_str(text).unwrap();
        assert_eq!(s.n_min(), Some(-2));
        assert_eq!(s.coeff(4), c(1.0, 0.5));
    }

    #[test]
    fn csv_round_trip() {
        let s = CoefficientSeries::from_pairs([(-3, c(0.25, -1.0)), (7, c(2.0, 0.0))]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("n,re,im\n"));
        assert_eq!(CoefficientSeries::from_csv(&buf[..]).unwrap(), s);
        assert!(CoefficientSeries::from_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
