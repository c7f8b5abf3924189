//! Exact construction of a rotation number `alpha in (1/3, 2/3)` whose multiples
//! `alpha * q(k)` approach integers along a fast-growing integer sequence.
//!
//! With `a(0) = 1/3` and, for each `n`,
//!
//! ```text
//! w(n) = 1 - {a(n-1) q(n)},     a(n) = a(n-1) + w(n) / q(n),
//! ```
//!
//! every `q(n) a(n)` is an integer and `0 < w(n) <= 1`. The limit
//! `alpha = 1/3 + sum w(k)/q(k)` then satisfies `{alpha q(k)} <= q(k) sum_{j>k} 1/q(j)`.
//! All arithmetic is on big rationals; floating point appears only in [`beta`](AlphaConstruction::beta).

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::series::Shift;

#[derive(Debug, Error, PartialEq)]
pub enum AlphaError {
    #[error("sequence is empty")]
    Empty,
    #[error("q(1) = {value} is below the minimum 6")]
    FirstTooSmall { value: String },
    #[error("q({index}) = {prev} and q({next_index}) = {next}: ratio is not > 2", next_index = index + 1)]
    RatioTooSmall { index: usize, prev: String, next: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("operation needs depth >= {needed}, construction has {depth}")]
    TooShallow { needed: usize, depth: usize },
    #[error("beta = {beta} falls outside (2pi/3, 4pi/3)")]
    BetaOutOfRange { beta: f64 },
}

/// A validated prefix `q(1) < q(2) < ... < q(K)` with `q(1) >= 6` and
/// `q(k+1) > 2 q(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LacunarySequence {
    q: Vec<BigInt>,
}

impl LacunarySequence {
    pub fn validate(q: Vec<BigInt>) -> Result<Self, AlphaError> {
        let first = q.first().ok_or(AlphaError::Empty)?;
        if *first < BigInt::from(6) {
            return Err(AlphaError::FirstTooSmall {
                value: first.to_string(),
            });
        }
        for (i, w) in q.windows(2).enumerate() {
            if w[1] <= &w[0] * 2 {
                return Err(AlphaError::RatioTooSmall {
                    index: i + 1,
                    prev: w[0].to_string(),
                    next: w[1].to_string(),
                });
            }
        }
        Ok(Self { q })
    }

    pub fn from_u64(q: &[u64]) -> Result<Self, AlphaError> {
        Self::validate(q.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// One decimal integer per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, AlphaError> {
        let mut q = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: BigInt = line.parse().map_err(|_| AlphaError::Parse {
                line: i + 1,
                reason: format!("not an integer: {line:?}"),
            })?;
            q.push(v);
        }
        Self::validate(q)
    }

    pub fn terms(&self) -> &[BigInt] {
        &self.q
    }

    pub fn depth(&self) -> usize {
        self.q.len()
    }

    /// 1-based indices `k` where `q(k+1)/q(k) <= ell(q(k))` fails to exceed the
    /// growth witness.
    pub fn growth_violations(&self, ell: impl Fn(&BigInt) -> f64) -> Vec<usize> {
        self.q
            .windows(2)
            .enumerate()
            .filter(|(_, w)| ratio_f64(&w[1], &w[0]) <= ell(&w[0]))
            .map(|(i, _)| i + 1)
            .collect()
    }
}

fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    BigRational::new(num.clone(), den.clone())
        .to_f64()
        .unwrap_or(f64::INFINITY)
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

fn int(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

/// The finite-depth construction: weights, partial sums and an enclosure of
/// every `alpha` compatible with the prefix.
#[derive(Clone, Debug)]
pub struct AlphaConstruction {
    q: Vec<BigInt>,
    weights: Vec<BigRational>,
    partial: Vec<BigRational>,
    alpha_lo: BigRational,
    alpha_hi: BigRational,
}

/// Rational interval `[lo, hi]` enclosing `{alpha q(k)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracEnclosure {
    /// 1-based index into the sequence.
    pub k: usize,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl AlphaConstruction {
    pub fn construct(seq: &LacunarySequence) -> Self {
        let mut a = BigRational::new(BigInt::one(), BigInt::from(3));
        let mut weights = Vec::with_capacity(seq.depth());
        let mut partial = Vec::with_capacity(seq.depth());
        for q in seq.terms() {
            let w = BigRational::one() - frac(&(&a * int(q)));
            a += &w / int(q);
            weights.push(w);
            partial.push(a.clone());
        }
        let last_q = int(seq.terms().last().expect("validated sequence is nonempty"));
        // any continuation with ratio > 2 keeps the tail below 1/q(K)
        let alpha_hi = &a + BigRational::one() / last_q;
        Self {
            q: seq.terms().to_vec(),
            weights,
            partial,
            alpha_lo: a,
            alpha_hi,
        }
    }

    pub fn depth(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[BigInt] {
        &self.q
    }

    /// `w(1), ..., w(K)`.
    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    /// `a(1), ..., a(K)`.
    pub fn partial_sums(&self) -> &[BigRational] {
        &self.partial
    }

    /// `a(K)`: the value of `alpha` when the sequence ends at `q(K)`.
    pub fn alpha_lo(&self) -> &BigRational {
        &self.alpha_lo
    }

    /// Strict upper bound for `alpha` over all admissible continuations.
    pub fn alpha_hi(&self) -> &BigRational {
        &self.alpha_hi
    }

    /// Checks `q(n) a(n) in Z` for every level.
    pub fn integrality_holds(&self) -> bool {
        self.q
            .iter()
            .zip(&self.partial)
            .all(|(q, a)| (a * int(q)).is_integer())
    }

    /// Enclosures of `{alpha q(k)}`.
    ///
    /// With `use_alpha_upper`, the interval covers every `alpha` in
    /// `[alpha_lo, alpha_hi)`, i.e. every continuation of the sequence; this is
    /// only informative for `k < K`, so entries stop at `K - 1`. Without it, the
    /// intervals are the exact points for `alpha = alpha_lo`, for all `k <= K`.
    pub fn frac_parts(&self, use_alpha_upper: bool) -> Vec<FracEnclosure> {
        let last = int(self.q.last().unwrap());
        let upto = if use_alpha_upper { self.depth() - 1 } else { self.depth() };
        (0..upto)
            .map(|i| {
                let q = int(&self.q[i]);
                // q(k) a(k) is an integer, so the fractional part is the tail
                let lo = &q * (&self.alpha_lo - &self.partial[i]);
                let hi = if use_alpha_upper { &lo + &q / &last } else { lo.clone() };
                FracEnclosure { k: i + 1, lo, hi }
            })
            .collect()
    }

    /// Checks `{alpha q(k)} <= C max_{l >= k} q(l)/q(l+1)` on the robust
    /// enclosures, for `k = 1..K-1`.
    pub fn uniform_bound_check(&self, constant: &BigRational) -> Result<UniformBound, AlphaError> {
        if self.depth() < 2 {
            return Err(AlphaError::TooShallow {
                needed: 2,
                depth: self.depth(),
            });
        }
        let ratios: Vec<BigRational> = self
            .q
            .windows(2)
            .map(|w| BigRational::new(w[0].clone(), w[1].clone()))
            .collect();
        // suffix maxima of q(l)/q(l+1)
        let mut suffix_max = ratios.clone();
        for i in (0..suffix_max.len().saturating_sub(1)).rev() {
            if suffix_max[i + 1] > suffix_max[i] {
                suffix_max[i] = suffix_max[i + 1].clone();
            }
        }
        let mut observed = BigRational::zero();
        let mut rows = Vec::new();
        for (enc, max) in self.frac_parts(true).into_iter().zip(&suffix_max) {
            let c = &enc.hi / max;
            if c > observed {
                observed = c.clone();
            }
            rows.push(UniformRow {
                k: enc.k,
                bound: enc.hi.clone(),
                max_ratio: max.clone(),
                pass: enc.hi <= constant * max,
            });
        }
        Ok(UniformBound {
            constant: constant.clone(),
            observed,
            pass: rows.iter().all(|r| r.pass),
            rows,
        })
    }

    /// The exact rotation `beta = 2 pi alpha_lo`.
    pub fn exact_beta(&self) -> ExactBeta {
        ExactBeta {
            turns: self.alpha_lo.clone(),
        }
    }

    /// `beta = 2 pi alpha_lo` as a double, asserted to lie in `(2pi/3, 4pi/3)`.
    pub fn beta(&self) -> Result<f64, AlphaError> {
        let beta = TAU * self.alpha_lo.to_f64().expect("finite rational");
        if beta > TAU / 3.0 && beta < 2.0 * TAU / 3.0 {
            Ok(beta)
        } else {
            Err(AlphaError::BetaOutOfRange { beta })
        }
    }

    pub fn report(&self) -> Result<AlphaReport, AlphaError> {
        Ok(AlphaReport {
            depth: self.depth(),
            alpha_lo: RatioString(self.alpha_lo.clone()),
            alpha_hi: RatioString(self.alpha_hi.clone()),
            weights: self.weights.iter().cloned().map(RatioString).collect(),
            frac_bounds: self
                .frac_parts(true)
                .into_iter()
                .map(|e| FracBound {
                    k: e.k,
                    lo: RatioString(e.lo),
                    hi: RatioString(e.hi),
                })
                .collect(),
            beta: self.beta()?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct UniformRow {
    pub k: usize,
    pub bound: BigRational,
    pub max_ratio: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct UniformBound {
    pub constant: BigRational,
    /// Smallest constant that would still pass.
    pub observed: BigRational,
    pub rows: Vec<UniformRow>,
    pub pass: bool,
}

/// Rotation by `2 pi * turns` with exact argument reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactBeta {
    pub turns: BigRational,
}

impl ExactBeta {
    /// `{turns * n}` as an exact rational in `[0, 1)`.
    pub fn frac(&self, n: &BigInt) -> BigRational {
        frac(&(&self.turns * int(n)))
    }

    /// Distance from `turns * n` to the nearest integer.
    pub fn dist_to_int(&self, n: &BigInt) -> BigRational {
        let f = self.frac(n);
        let g = BigRational::one() - &f;
        if f < g {
            f
        } else {
            g
        }
    }

    pub fn radians(&self) -> f64 {
        TAU * self.turns.to_f64().expect("finite rational")
    }
}

impl Shift for ExactBeta {
    fn turns(&self, n: i64) -> f64 {
        let x = self.frac(&BigInt::from(n));
        let x = if x >= BigRational::new(BigInt::one(), BigInt::from(2)) {
            x - BigRational::one()
        } else {
            x
        };
        x.to_f64().expect("finite rational")
    }
}

/// Upper bound `2 pi ||x||` for `|e^{2 pi i x} - 1|`, rounded up to a double.
pub fn chord_bound(dist: &BigRational) -> f64 {
    let v = dist.to_f64().expect("finite rational") * 2.0 * PI;
    v * (1.0 + 4.0 * f64::EPSILON)
}

/// Exact rational serialized as `"p/q"`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioString(pub BigRational);

impl fmt::Display for RatioString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for RatioString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FracBound {
    pub k: usize,
    pub lo: RatioString,
    pub hi: RatioString,
}

/// JSON payload of a construction.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaReport {
    pub depth: usize,
    pub alpha_lo: RatioString,
    pub alpha_hi: RatioString,
    pub weights: Vec<RatioString>,
    pub frac_bounds: Vec<FracBound>,
    pub beta: f64,
}

impl BigRationalExt for BigRational {
    fn is_in_unit_interval(&self) -> bool {
        !self.is_negative() && *self < BigRational::one()
    }
}

/// Small helpers on exact rationals.
pub trait BigRationalExt {
    /// `0 <= x < 1`.
    fn is_in_unit_interval(&self) -> bool;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn validation_examples() {
        assert!(LacunarySequence::from_u64(&[6, 13, 27, 55]).is_ok());
        assert!(matches!(
            LacunarySequence::from_u64(&[6, 12]),
            Err(AlphaError::RatioTooSmall { index: 1, .. })
        ));
        assert!(LacunarySequence::from_u64(&[6, 60, 6000, 6_000_000]).is_ok());
        assert_eq!(LacunarySequence::from_u64(&[]), Err(AlphaError::Empty));
        assert!(matches!(
            LacunarySequence::from_u64(&[5, 60]),
            Err(AlphaError::FirstTooSmall { .. })
        ));
        assert!(matches!(
            LacunarySequence::from_u64(&[6, 60, 100]),
            Err(AlphaError::RatioTooSmall { index: 2, .. })
        ));
    }

    #[test]
    fn parse_lines() {
        let s = LacunarySequence::parse("6\n60\n\n6000\n").unwrap();
        assert_eq!(s.depth(), 3);
        assert!(matches!(LacunarySequence::parse("6\nx\n"), Err(AlphaError::Parse { line: 2, .. })));
        assert_eq!(LacunarySequence::parse(""), Err(AlphaError::Empty));
        let big = LacunarySequence::parse("7\n100000000000000000000000000000\n").unwrap();
        assert_eq!(big.terms()[1].to_string(), "100000000000000000000000000000");
    }

    #[test]
    fn hand_computed_levels() {
        // a(0) = 1/3; 6/3 = 2 so w(1) = 1, a(1) = 1/2; 60/2 = 30 so w(2) = 1, ...
        let seq = LacunarySequence::from_u64(&[6, 60, 6000]).unwrap();
        let a = AlphaConstruction::construct(&seq);
        assert_eq!(a.weights(), &[r(1, 1), r(1, 1), r(1, 1)]);
        assert_eq!(a.partial_sums(), &[r(1, 2), r(31, 60), r(3101, 6000)]);
        assert!(a.integrality_holds());
        // k = 1: 6 * (1/60 + 1/6000) = 101/1000, plus at most 6/6000 from the tail
        let enc = a.frac_parts(true);
        assert_eq!(enc[0].lo, r(101, 1000));
        assert_eq!(enc[0].hi, r(101, 1000) + r(1, 1000));
        assert_eq!(enc.len(), 2);
    }

    #[test]
    fn nontrivial_weights() {
        let seq = LacunarySequence::from_u64(&[7, 20, 45]).unwrap();
        let a = AlphaConstruction::construct(&seq);
        // 7/3 = 2 + 1/3 -> w(1) = 2/3; a(1) = 1/3 + 2/21 = 3/7
        assert_eq!(a.weights()[0], r(2, 3));
        assert_eq!(a.partial_sums()[0], r(3, 7));
        // 20 * 3/7 = 60/7 = 8 + 4/7 -> w(2) = 3/7
        assert_eq!(a.weights()[1], r(3, 7));
        assert!(a.integrality_holds());
        for e in a.frac_parts(false) {
            assert!(e.lo.is_in_unit_interval());
        }
    }

    #[test]
    fn exact_mode_hits_zero_at_last_level() {
        let seq = LacunarySequence::from_u64(&[6, 60, 6000]).unwrap();
        let a = AlphaConstruction::construct(&seq);
        let pts = a.frac_parts(false);
        assert_eq!(pts.len(), 3);
        assert!(pts[2].lo.is_zero());
        assert_eq!(pts[0].lo, pts[0].hi);
    }

    #[test]
    fn shallow_uniform_check_rejected() {
        let a = AlphaConstruction::construct(&LacunarySequence::from_u64(&[6]).unwrap());
        assert!(matches!(a.uniform_bound_check(&r(2, 1)), Err(AlphaError::TooShallow { .. })));
        let a = AlphaConstruction::construct(&LacunarySequence::from_u64(&[6, 60]).unwrap());
        let u = a.uniform_bound_check(&r(2, 1)).unwrap();
        assert_eq!(u.rows.len(), 1);
        assert!(u.pass);
    }

    #[test]
    fn ratio_strings() {
        assert_eq!(RatioString(r(4, 2)).to_string(), "2/1");
        assert_eq!(RatioString(r(-3, 9)).to_string(), "-1/3");
    }

    #[test]
    fn exact_shift_matches_float_for_small_n() {
        let beta = ExactBeta { turns: r(31, 60) };
        let f = beta.radians();
        for n in [-50i64, -1, 0, 3, 17, 600] {
            assert!((beta.unit(n) - f.unit(n)).norm() < 1e-12);
        }
        assert_eq!(beta.turns(60), 0.0);
    }
}
