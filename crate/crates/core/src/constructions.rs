//! Parameter schedules for the counterexample functions and the null-series
//! bookkeeping around them.
//!
//! Every builder emits a finite prefix together with the inequalities it is
//! supposed to satisfy, re-evaluated from the stored sequences. Conditions of
//! the form `o(.)` or `-> infinity` are replaced by a margin schedule: at level
//! `k` the relevant ratio must clear `margin * 2^k`.
//!
//! The ratio `(amplitude, frequency)` that a finite table can support depends on
//! the overall scale of the lead amplitude, so the thm1 and thm4 builders try
//! lead amplitudes `2^j`, `j = 0, 1, ...`, and keep the first that fits.

use std::f64::consts::{LN_2, PI, TAU};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::alpha::{chord_bound, AlphaConstruction, AlphaError, ExactBeta, RatioString};
use crate::series::{CoefficientSeries, Shift, WeightSequence};

/// Largest exponent tried for the lead amplitude `2^j`.
pub const MAX_SCALE_EXPONENT: i32 = 256;

/// Slack on `|1 - e^{i beta nu}| > 1`.
pub const CHORD_SLACK: f64 = 1e-9;

pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("depth must be at least {min}, got {depth}")]
    Depth { depth: usize, min: usize },
    #[error("margin must be > 1, got {0}")]
    Margin(f64),
    #[error("invalid epsilon model: {0}")]
    Model(String),
    #[error("{table} table exhausted at level {level}: needs a value {relation} {needed:e}, table ends at {last:e}")]
    TableExhausted {
        table: &'static str,
        level: usize,
        relation: &'static str,
        needed: f64,
        last: f64,
    },
    #[error("growth table must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
    #[error("no nu in [{from}, {to}) with |1 - e^(i beta nu)| > 1 at level {level}; largest value seen {best}")]
    SearchCap { level: usize, from: i64, to: i64, best: f64 },
    #[error("frequency {0} does not fit in 64 bits")]
    Overflow(String),
    #[error(transparent)]
    Alpha(#[from] AlphaError),
    #[error("amplitude must be positive, got {0}")]
    Amplitude(f64),
    #[error("normalization vanishes for shift {shift}")]
    ZeroNormalization { shift: i64 },
    #[error("beta = {0} is outside (2pi/3, 4pi/3)")]
    BetaRange(f64),
    #[error("case 2 at nu = {nu}: |e^(-i nu beta) - 1| = {modulus}, but |e^(-i (nu-1) beta) - 1| = {shifted} <= {c2}")]
    CaseAssertion { nu: i64, modulus: f64, shifted: f64, c2: f64 },
    #[error("bundle failed its own checks: {0:?}")]
    Unverified(Vec<String>),
}

/// `eps(K) = min(1/2, c_eps K^{-p})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsilonModel {
    pub c_eps: f64,
    pub p: f64,
    pub c1: f64,
}

impl Default for EpsilonModel {
    fn default() -> Self {
        Self {
            c_eps: 1.0,
            p: 2.0,
            c1: 0.25,
        }
    }
}

impl EpsilonModel {
    pub fn new(c_eps: f64, p: f64, c1: f64) -> Result<Self, BuildError> {
        if !(c_eps > 0.0 && c_eps.is_finite()) {
            return Err(BuildError::Model(format!("c_eps = {c_eps}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(BuildError::Model(format!("p = {p}")));
        }
        if !(c1 > 0.0 && c1 < 1.0) {
            return Err(BuildError::Model(format!("c1 = {c1}")));
        }
        Ok(Self { c_eps, p, c1 })
    }

    pub fn eps(&self, k: f64) -> f64 {
        (self.c_eps * k.powf(-self.p)).min(0.5)
    }

    /// `eps_N = (d/N) eps(N/d)`.
    pub fn eps_n(&self, d: f64, n: usize) -> f64 {
        let n = n as f64;
        d / n * self.eps(n / d)
    }

    /// `(d/N)^2 eps(N/d) eps((N/d)^2 / eps(N/d))`: the lemma applied twice.
    pub fn eps_eps(&self, d: f64, n: usize) -> f64 {
        self.ln_eps_eps(d.ln(), n).exp()
    }

    /// `ln eps(e^{ln_k})`.
    pub fn ln_eps(&self, ln_k: f64) -> f64 {
        (self.c_eps.ln() - self.p * ln_k).min(-LN_2)
    }

    /// `ln eps_N` from `ln d`.
    pub fn ln_eps_n(&self, ln_d: f64, n: usize) -> f64 {
        let ln_k = (n as f64).ln() - ln_d;
        self.ln_eps(ln_k) - ln_k
    }

    /// `ln epseps_N` from `ln d`.
    pub fn ln_eps_eps(&self, ln_d: f64, n: usize) -> f64 {
        let ln_k = (n as f64).ln() - ln_d;
        let e1 = self.ln_eps(ln_k);
        e1 + self.ln_eps(2.0 * ln_k - e1) - 2.0 * ln_k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Thm1,
    Thm2,
    Thm4,
}

/// One re-evaluated inequality. `index` is the level (1-based), or 0 for a
/// whole-sequence property. With `log` set, both sides are natural logarithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub index: usize,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub log: bool,
}

impl Check {
    fn new(name: &str, index: usize, lhs: f64, rhs: f64, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            index,
            pass,
            lhs,
            rhs,
            log: false,
        }
    }

    fn log(name: &str, index: usize, lhs: f64, rhs: f64, pass: bool) -> Self {
        Self {
            log: true,
            ..Self::new(name, index, lhs, rhs, pass)
        }
    }

    fn flag(name: &str, violations: usize) -> Self {
        Self::new(name, 0, violations as f64, 0.0, violations == 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sequences {
    Thm1 {
        b: Vec<f64>,
        n: Vec<i64>,
        omega_at_n: Vec<f64>,
    },
    /// Amplitudes and thresholds as natural logarithms.
    Thm2 {
        ln_d: Vec<f64>,
        nu: Vec<i64>,
        ln_eps: Vec<f64>,
        beta: ExactBeta,
        q: Vec<BigInt>,
    },
    /// Amplitudes and thresholds as natural logarithms.
    Thm4 {
        ln_d: Vec<f64>,
        nu: Vec<i64>,
        ln_epseps: Vec<f64>,
        ell_at_nu: Vec<f64>,
    },
}

/// A finite schedule, the series it induces, and its self-verification table.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleBundle {
    pub margin: f64,
    pub model: EpsilonModel,
    pub sequences: Sequences,
    pub checks: Vec<Check>,
    pub f: CoefficientSeries,
}

impl ScheduleBundle {
    fn assemble(margin: f64, model: EpsilonModel, sequences: Sequences) -> Result<Self, BuildError> {
        let f = induced_series(&sequences);
        let mut bundle = Self {
            margin,
            model,
            sequences,
            checks: Vec::new(),
            f,
        };
        bundle.checks = bundle.recheck();
        let failed: Vec<String> = bundle
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}[{}]", c.name, c.index))
            .collect();
        if failed.is_empty() {
            Ok(bundle)
        } else {
            Err(BuildError::Unverified(failed))
        }
    }

    pub fn variant(&self) -> Variant {
        match self.sequences {
            Sequences::Thm1 { .. } => Variant::Thm1,
            Sequences::Thm2 { .. } => Variant::Thm2,
            Sequences::Thm4 { .. } => Variant::Thm4,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Re-evaluates every defining inequality from the stored sequences.
    pub fn recheck(&self) -> Vec<Check> {
        let (m, model) = (self.margin, &self.model);
        match &self.sequences {
            Sequences::Thm1 { b, n, omega_at_n } => thm1_checks(b, n, omega_at_n, m, model),
            Sequences::Thm2 { ln_d, nu, beta, q, .. } => thm2_checks(ln_d, nu, beta, q, m, model),
            Sequences::Thm4 { ln_d, nu, ell_at_nu, .. } => thm4_checks(ln_d, nu, ell_at_nu, m, model),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let sequences = match &self.sequences {
            Sequences::Thm1 { b, n, omega_at_n } => json!({ "b": b, "n": n, "omega_at_n": omega_at_n }),
            Sequences::Thm2 { ln_d, nu, ln_eps, beta, q } => json!({
                "d": exp_all(ln_d),
                "log_d": ln_d,
                "nu": nu,
                "eps": exp_all(ln_eps),
                "log_eps": ln_eps,
                "beta": beta.radians(),
                "beta_turns": RatioString(beta.turns.clone()).to_string(),
                "q": q.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }),
            Sequences::Thm4 { ln_d, nu, ln_epseps, ell_at_nu } => json!({
                "d": exp_all(ln_d),
                "log_d": ln_d,
                "nu": nu,
                "epseps": exp_all(ln_epseps),
                "log_epseps": ln_epseps,
                "ell_at_nu": ell_at_nu,
            }),
        };
        json!({
            "variant": self.variant(),
            "margin": self.margin,
            "model": self.model,
            "sequences": sequences,
            "checks": self.checks,
            "f": self.f.to_json(),
        })
    }
}

fn exp_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.exp()).collect()
}

fn induced_series(seq: &Sequences) -> CoefficientSeries {
    let mut f = CoefficientSeries::new();
    match seq {
        Sequences::Thm1 { b, n, .. } => {
            for (&bk, &nk) in b.iter().zip(n) {
                f.add_term(-nk, Complex64::new(bk, 0.0));
            }
        }
        Sequences::Thm2 { ln_d, nu, .. } => {
            for (&dk, &vk) in ln_d.iter().zip(nu) {
                f.add_term(-vk, Complex64::new(dk.exp(), 0.0));
            }
        }
        Sequences::Thm4 { ln_d, nu, .. } => {
            for (&dk, &vk) in ln_d.iter().zip(nu) {
                f.add_term(-vk + 1, Complex64::new(dk.exp(), 0.0));
                f.add_term(-vk, Complex64::new(dk.exp(), 0.0));
            }
        }
    }
    f
}

fn check_common(depth: usize, margin: f64) -> Result<(), BuildError> {
    if depth < 1 {
        return Err(BuildError::Depth { depth, min: 1 });
    }
    if !(margin > 1.0 && margin.is_finite()) {
        return Err(BuildError::Margin(margin));
    }
    Ok(())
}

fn decreasing_violations(v: &[f64]) -> usize {
    v.iter().filter(|&&x| !(x > 0.0)).count() + v.windows(2).filter(|w| !(w[1] < w[0])).count()
}

/// Counts `nu(k) - gap < nu(k-1)` failures and `nu(1) < min`.
fn spacing_violations(nu: &[i64], gap: i64, min: i64) -> usize {
    usize::from(nu.first().is_some_and(|&v| v < min)) + nu.windows(2).filter(|w| w[1] - w[0] < gap).count()
}

/// `sum_{j > k} x(j)^power` for every `k`, over the stored prefix.
fn tail_sums(x: &[f64], power: i32) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for k in (0..x.len().saturating_sub(1)).rev() {
        out[k] = out[k + 1] + x[k + 1].powi(power);
    }
    out
}

fn pow2(k: usize) -> f64 {
    2f64.powi(k as i32)
}

fn thm1_checks(b: &[f64], n: &[i64], omega_at_n: &[f64], margin: f64, model: &EpsilonModel) -> Vec<Check> {
    let mut checks = vec![
        Check::flag("b-decreasing", decreasing_violations(b)),
        Check::flag("n-increasing", spacing_violations(n, 1, 1)),
    ];
    let tails = tail_sums(b, 1);
    for k in 1..=b.len() {
        let bk = b[k - 1];
        let r = bk * model.eps(k as f64 / bk);
        if k < b.len() {
            let lhs = margin * pow2(k) * tails[k - 1];
            checks.push(Check::new("e6", k, lhs, r, lhs <= r));
        }
        let lhs = r * omega_at_n[k - 1];
        let rhs = margin * pow2(k);
        checks.push(Check::new("e7", k, lhs, rhs, lhs >= rhs));
    }
    checks
}

/// Schedule with `sum_{j>k} b(j) <= b(k) eps(k/b(k)) / (margin 2^k)` and
/// `b(k) eps(k/b(k)) omega(n(k)) >= margin 2^k`.
pub fn build_thm1(
    omega: &WeightSequence,
    depth: usize,
    margin: f64,
    model: &EpsilonModel,
) -> Result<ScheduleBundle, BuildError> {
    check_common(depth, margin)?;
    if depth < 2 {
        return Err(BuildError::Depth { depth, min: 2 });
    }
    let attempt = |j: i32| -> Result<Sequences, BuildError> {
        let (mut b, mut n, mut omega_at_n) = (vec![2f64.powi(j)], Vec::new(), Vec::new());
        let mut prev = 0u64;
        for k in 1..=depth {
            let bk = b[k - 1];
            let r = bk * model.eps(k as f64 / bk);
            let target = margin * pow2(k) / r;
            let nk = omega
                .first_reaching(target, prev + 1)
                .ok_or(BuildError::TableExhausted {
                    table: "omega",
                    level: k,
                    relation: ">=",
                    needed: target,
                    last: omega.last(),
                })?;
            n.push(nk as i64);
            omega_at_n.push(omega.at(nk));
            prev = nk;
            if k < depth {
                b.push(r / (2.0 * margin * pow2(k)));
            }
        }
        Ok(Sequences::Thm1 { b, n, omega_at_n })
    };
    let sequences = scan_scales(attempt)?;
    ScheduleBundle::assemble(margin, *model, sequences)
}

/// Tries lead amplitudes `1, 2, 4, ...`; returns the first success, or the
/// error of the unscaled attempt.
fn scan_scales(attempt: impl Fn(i32) -> Result<Sequences, BuildError>) -> Result<Sequences, BuildError> {
    let mut first = None;
    for j in 0..=MAX_SCALE_EXPONENT {
        match attempt(j) {
            Ok(s) => return Ok(s),
            Err(e @ BuildError::TableExhausted { .. }) => {
                first.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(first.expect("at least one attempt"))
}

fn beta_in_range(turns: f64) -> bool {
    // turns(1) in [-1/2, 1/2); beta mod 2pi in (2pi/3, 4pi/3) iff |turns| > 1/3
    turns.abs() > 1.0 / 3.0
}

/// `ln(e^a + e^b)`.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `ln sum_{j > k} d(j)^2` from `ln d`, for every `k`.
fn log_tail_sq(ln_d: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; ln_d.len()];
    for k in (0..ln_d.len().saturating_sub(1)).rev() {
        out[k] = log_add(out[k + 1], 2.0 * ln_d[k + 1]);
    }
    out
}

fn log_decreasing_violations(ln_d: &[f64]) -> usize {
    ln_d.iter().filter(|x| !x.is_finite()).count() + ln_d.windows(2).filter(|w| !(w[1] < w[0])).count()
}

/// `ln d(N+1) = min(ln x - ln(2 margin)/2, ln d(N) - ln 2)`: keeps the squared
/// tail below `x^2 / margin` and the amplitudes at least halving.
fn next_ln_d(ln_x: f64, ln_d: f64, margin: f64) -> f64 {
    (ln_x - 0.5 * (2.0 * margin).ln()).min(ln_d - LN_2)
}

fn thm2_checks(
    ln_d: &[f64],
    nu: &[i64],
    beta: &ExactBeta,
    q: &[BigInt],
    margin: f64,
    model: &EpsilonModel,
) -> Vec<Check> {
    let beta_turns = beta.turns(1);
    let mut checks = vec![
        Check::flag("d-decreasing", log_decreasing_violations(ln_d)),
        Check::flag("nu-increasing", spacing_violations(nu, 1, 1)),
        Check::new("beta-range", 0, TAU * beta_turns.rem_euclid(1.0), PI, beta_in_range(beta_turns)),
    ];
    let tails = log_tail_sq(ln_d);
    let ln_m = margin.ln();
    for big_n in 1..=ln_d.len() {
        let ln_eps = model.ln_eps_n(ln_d[big_n - 1], big_n);
        if big_n < ln_d.len() {
            let lhs = ln_m + tails[big_n - 1];
            checks.push(Check::log("2_6-1", big_n, lhs, 2.0 * ln_eps, lhs < 2.0 * ln_eps));
        }
        let v = nu[big_n - 1];
        for qk in q.iter().filter(|qk| **qk > BigInt::from(v)) {
            let lhs = ln_m + chord_bound(&beta.dist_to_int(qk)).ln();
            checks.push(Check::log("orig-8", big_n, lhs, ln_eps, lhs < ln_eps));
        }
        let chord = beta.unit_minus_one(v).norm();
        checks.push(Check::new("orig-9", big_n, chord, 1.0, chord > 1.0 + CHORD_SLACK));
    }
    checks
}

/// Schedule with `margin sum_{n>N} d(n)^2 < eps_N^2`, `|1 - e^{i beta q(k)}| < eps_N / margin`
/// for every `q(k) > nu(N)` (certified by exact rational reduction), and
/// `|1 - e^{i beta nu(N)}| > 1`.
///
/// `beta` is `2 pi` times the lower end of the alpha enclosure, i.e. the alpha
/// of the sequence that stops at its last stored term. Amplitudes are kept as
/// logarithms since they decay roughly like `d(N+1) ~ (d(N)/N)^3`.
pub fn build_thm2(
    alpha: &AlphaConstruction,
    depth: usize,
    margin: f64,
    model: &EpsilonModel,
    search_cap: u64,
) -> Result<ScheduleBundle, BuildError> {
    check_common(depth, margin)?;
    alpha.beta()?;
    let beta = alpha.exact_beta();
    let q = alpha.q().to_vec();
    let q_i64: Vec<i64> = q
        .iter()
        .map(|v| v.to_i64().ok_or_else(|| BuildError::Overflow(v.to_string())))
        .collect::<Result<_, _>>()?;
    let ln_chords: Vec<f64> = q
        .iter()
        .map(|v| margin.ln() + chord_bound(&beta.dist_to_int(v)).ln())
        .collect();

    let (mut ln_d, mut nu, mut ln_eps) = (vec![0.0], Vec::new(), Vec::new());
    for big_n in 1..=depth {
        let e = model.ln_eps_n(ln_d[big_n - 1], big_n);
        ln_eps.push(e);
        // every q(k) above nu must already be eps_N-close to a full turn
        let floor_q = ln_chords.iter().rposition(|&c| c >= e).map_or(1, |k| q_i64[k]);
        let from = floor_q.max(nu.last().map_or(1, |v| v + 1));
        let to = from.saturating_add(search_cap as i64);
        let mut best = 0.0f64;
        let found = (from..to).find(|&m| {
            let c = beta.unit_minus_one(m).norm();
            best = best.max(c);
            c > 1.0 + CHORD_SLACK
        });
        nu.push(found.ok_or(BuildError::SearchCap {
            level: big_n,
            from,
            to,
            best,
        })?);
        if big_n < depth {
            let last = ln_d[big_n - 1];
            ln_d.push(next_ln_d(e, last, margin));
        }
    }
    ScheduleBundle::assemble(
        margin,
        *model,
        Sequences::Thm2 {
            ln_d,
            nu,
            ln_eps,
            beta,
            q,
        },
    )
}

fn thm4_checks(ln_d: &[f64], nu: &[i64], ell_at_nu: &[f64], margin: f64, model: &EpsilonModel) -> Vec<Check> {
    let mut checks = vec![
        Check::flag("d-decreasing", log_decreasing_violations(ln_d)),
        Check::flag("couples-disjoint", spacing_violations(nu, 2, 2)),
    ];
    let tails = log_tail_sq(ln_d);
    let ln_m = margin.ln();
    for big_n in 1..=ln_d.len() {
        let ln_ee = model.ln_eps_eps(ln_d[big_n - 1], big_n);
        if big_n < ln_d.len() {
            let lhs = ln_m + tails[big_n - 1];
            checks.push(Check::log("2_6", big_n, lhs, 2.0 * ln_ee, lhs < 2.0 * ln_ee));
        }
        let ln_ell = ell_at_nu[big_n - 1].ln();
        checks.push(Check::log("defnun", big_n, ln_ell, -ln_ee, ln_ell > -ln_ee));
    }
    checks
}

/// Schedule with `margin sum_{n>N} d(n)^2 < epseps_N^2` and `ell(nu(N)) > 1/epseps_N`,
/// where `nu(N) - 1 > nu(N-1)` so the couples `{nu - 1, nu}` are disjoint.
pub fn build_thm4(
    ell: &WeightSequence,
    depth: usize,
    margin: f64,
    model: &EpsilonModel,
) -> Result<ScheduleBundle, BuildError> {
    check_common(depth, margin)?;
    if let Some(i) = ell.values().windows(2).position(|w| w[1] <= w[0]) {
        return Err(BuildError::NotIncreasing { index: i + 1 });
    }
    let attempt = |j: i32| -> Result<Sequences, BuildError> {
        let (mut ln_d, mut nu, mut ln_epseps, mut ell_at_nu) = (vec![j as f64 * LN_2], Vec::new(), Vec::new(), Vec::new());
        for big_n in 1..=depth {
            let ln_ee = model.ln_eps_eps(ln_d[big_n - 1], big_n);
            ln_epseps.push(ln_ee);
            let from = nu.last().map_or(2, |v| v + 2) as u64;
            let needed = (-ln_ee).exp();
            let v = ell.first_exceeding(needed, from).ok_or(BuildError::TableExhausted {
                table: "ell",
                level: big_n,
                relation: ">",
                needed,
                last: ell.last(),
            })?;
            nu.push(v as i64);
            ell_at_nu.push(ell.at(v));
            if big_n < depth {
                let last = ln_d[big_n - 1];
                ln_d.push(next_ln_d(ln_ee, last, margin));
            }
        }
        Ok(Sequences::Thm4 {
            ln_d,
            nu,
            ln_epseps,
            ell_at_nu,
        })
    };
    let sequences = scan_scales(attempt)?;
    ScheduleBundle::assemble(margin, *model, sequences)
}

/// `gamma(n) = c(n) - f(n)`.
pub fn gamma_coeffs(c: &CoefficientSeries, f: &CoefficientSeries) -> CoefficientSeries {
    c.sub(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftVariant {
    ByNu,
    ByNuMinusOne,
}

/// Output of [`normalized_shift_series`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedShift {
    /// Frequencies `> 0` after the shift.
    pub analytic: CoefficientSeries,
    /// Frequencies `<= 0` after the shift.
    pub tail: CoefficientSeries,
    pub normalization: Complex64,
    pub shift: i64,
}

impl NormalizedShift {
    /// Undoes the normalization and the shift.
    pub fn recombine(&self) -> CoefficientSeries {
        self.analytic
            .add(&self.tail)
            .scale(self.normalization)
            .modulate(-self.shift)
    }
}

/// Multiplies by `e^{i n beta} - 1`, moves frequency `-s` to 0 (`s = nu` or
/// `nu - 1`), splits at 0 and divides by `d (e^{-i nu beta} - 1)` (or by
/// `d |e^{-i (nu-1) beta} - 1|` for the `nu - 1` shift).
pub fn normalized_shift_series<S: Shift + ?Sized>(
    gamma: &CoefficientSeries,
    beta: &S,
    nu: i64,
    d: f64,
    variant: ShiftVariant,
) -> Result<NormalizedShift, BuildError> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(BuildError::Amplitude(d));
    }
    let (shift, normalization) = match variant {
        ShiftVariant::ByNu => (nu, beta.unit_minus_one(-nu) * d),
        ShiftVariant::ByNuMinusOne => (nu - 1, Complex64::new(d * beta.unit_minus_one(1 - nu).norm(), 0.0)),
    };
    if normalization.norm() == 0.0 || !normalization.is_finite() {
        return Err(BuildError::ZeroNormalization { shift });
    }
    let shifted = gamma.beta_difference(beta).modulate(shift);
    let inv = normalization.inv();
    Ok(NormalizedShift {
        analytic: shifted.restrict(1..).scale(inv),
        tail: shifted.restrict(..=0).scale(inv),
        normalization,
        shift,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub tail_sq: f64,
    pub budget: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// `sum_{n < -nu} |gamma(n) (e^{i beta n} - 1)|^2` against `budget`.
pub fn tail_estimate_check<S: Shift + ?Sized>(
    gamma: &CoefficientSeries,
    beta: &S,
    nu: i64,
    budget: f64,
) -> TailReport {
    let tail = gamma.restrict(..-nu).beta_difference(beta).l2_norm();
    let tail_sq = tail * tail;
    TailReport {
        tail_sq,
        budget,
        ratio: tail_sq / budget,
        pass: tail_sq <= budget,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum Case {
    /// `|e^{-i nu beta} - 1|` exceeds the threshold.
    Case1 { modulus: f64, threshold: f64 },
    /// It does not, and the neighbouring rotation is far from the identity.
    Case2 { modulus: f64, threshold: f64, shifted: f64 },
}

/// Decides which of `e^{-i nu beta}`, `e^{-i (nu-1) beta}` is far from 1.
pub fn case_split<S: Shift + ?Sized>(
    beta: &S,
    nu: i64,
    d: f64,
    big_n: usize,
    model: &EpsilonModel,
    c2: f64,
) -> Result<Case, BuildError> {
    let turns = beta.turns(1);
    if !beta_in_range(turns) {
        return Err(BuildError::BetaRange(TAU * turns.rem_euclid(1.0)));
    }
    let modulus = beta.unit_minus_one(-nu).norm();
    let threshold = model.eps_n(d, big_n);
    if modulus > threshold {
        return Ok(Case::Case1 { modulus, threshold });
    }
    let shifted = beta.unit_minus_one(1 - nu).norm();
    if shifted > c2 {
        Ok(Case::Case2 {
            modulus,
            threshold,
            shifted,
        })
    } else {
        Err(BuildError::CaseAssertion {
            nu,
            modulus,
            shifted,
            c2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::LacunarySequence;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eps_examples() {
        let m = EpsilonModel::default();
        assert_eq!(m.eps(1e-9), 0.5);
        assert!((m.eps(10.0) - 0.01).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let e = m.eps(k as f64 * 0.37);
            assert!(e <= prev && e > 0.0);
            prev = e;
        }
        assert!(EpsilonModel::new(1.0, 0.0, 0.5).is_err());
        assert!(EpsilonModel::new(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn log_forms_match_direct_formulas() {
        let m = EpsilonModel::new(0.7, 1.5, 0.5).unwrap();
        for n in 1..20 {
            for d in [3.0, 1.0, 0.2, 1e-4] {
                let k = n as f64 / d;
                let e1 = m.eps(k);
                let direct = (d / n as f64).powi(2) * e1 * m.eps(k * k / e1);
                assert!((m.ln_eps_eps(f64::ln(d), n) - direct.ln()).abs() < 1e-12);
                assert!((m.ln_eps_n(f64::ln(d), n) - (d / n as f64 * e1).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deep_thm2_stays_representable() {
        let q = LacunarySequence::from_u64(&[6, 60, 6000, 6_000_000]).unwrap();
        let b = build_thm2(&AlphaConstruction::construct(&q), 8, 2.0, &EpsilonModel::default(), DEFAULT_SEARCH_CAP).unwrap();
        let Sequences::Thm2 { ln_eps, .. } = &b.sequences else {
            panic!("wrong variant")
        };
        assert!(ln_eps[7] < -1000.0);
    }

    #[test]
    fn epseps_below_eps_n_for_unit_amplitudes() {
        let m = EpsilonModel::default();
        for n in 1..50 {
            for d in [1.0, 0.5, 1e-3, 1e-8] {
                assert!(m.eps_eps(d, n) < m.eps_n(d, n), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn thm1_log_weight() {
        let omega = WeightSequence::from_fn(1 << 16, |n| (2.0 + n as f64).ln()).unwrap();
        let b = build_thm1(&omega, 3, 2.0, &EpsilonModel::default()).unwrap();
        assert!(b.all_pass());
        assert_eq!(b.recheck(), b.checks);
        let Sequences::Thm1 { b: amps, n, .. } = &b.sequences else {
            panic!("wrong variant")
        };
        let support: Vec<i64> = b.f.iter().map(|(k, _)| k).collect();
        let mut expected: Vec<i64> = n.iter().map(|v| -v).collect();
        expected.sort();
        assert_eq!(support, expected);
        assert!((b.f.wiener_norm() - amps.iter().sum::<f64>()).abs() < 1e-9 * amps[0]);
    }

    #[test]
    fn thm1_reports_needed_value() {
        let omega = WeightSequence::new(vec![1.0, 1.0, 1.0]).unwrap();
        match build_thm1(&omega, 4, 2.0, &EpsilonModel::default()) {
            Err(BuildError::TableExhausted { table: "omega", needed, .. }) => assert!(needed > 1.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            build_thm1(&omega, 1, 2.0, &EpsilonModel::default()),
            Err(BuildError::Depth { .. })
        ));
        assert!(matches!(
            build_thm1(&omega, 3, 1.0, &EpsilonModel::default()),
            Err(BuildError::Margin(_))
        ));
    }

    #[test]
    fn thm4_couples() {
        let ell = WeightSequence::from_fn(1 << 16, |n| n as f64 + 1.0).unwrap();
        let b = build_thm4(&ell, 4, 2.0, &EpsilonModel::default()).unwrap();
        assert!(b.all_pass());
        let Sequences::Thm4 { ln_d, nu, .. } = &b.sequences else {
            panic!("wrong variant")
        };
        for (dk, v) in ln_d.iter().zip(nu) {
            assert_eq!(b.f.coeff(-v), c(dk.exp()));
            assert_eq!(b.f.coeff(-v + 1), c(dk.exp()));
        }
        assert_eq!(b.f.len(), 2 * nu.len());
        let flat = WeightSequence::new(vec![1.0, 2.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            build_thm4(&flat, 2, 2.0, &EpsilonModel::default()),
            Err(BuildError::NotIncreasing { index: 2 })
        ));
    }

    #[test]
    fn thm2_small_sequence() {
        let q = LacunarySequence::from_u64(&[6, 60, 6000, 6_000_000]).unwrap();
        let a = AlphaConstruction::construct(&q);
        let b = build_thm2(&a, 3, 2.0, &EpsilonModel::default(), DEFAULT_SEARCH_CAP).unwrap();
        assert!(b.all_pass());
        let Sequences::Thm2 { nu, .. } = &b.sequences else {
            panic!("wrong variant")
        };
        // q(1) = 6 is too far from a full turn for eps_1 = 1/2, and 6 itself fails the chord test
        assert_eq!(nu[0], 7);
        let json = b.to_json();
        assert_eq!(json["variant"], "thm2");
        assert!(json["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    }

    #[test]
    fn tampered_bundle_fails_recheck() {
        let q = LacunarySequence::from_u64(&[6, 60, 6000, 6_000_000]).unwrap();
        let a = AlphaConstruction::construct(&q);
        let mut b = build_thm2(&a, 2, 2.0, &EpsilonModel::default(), DEFAULT_SEARCH_CAP).unwrap();
        if let Sequences::Thm2 { nu, .. } = &mut b.sequences {
            nu[0] = 6;
        }
        assert!(b.recheck().iter().any(|c| !c.pass));
    }

    #[test]
    fn gamma_examples() {
        let f = CoefficientSeries::from_real([(-3, 0.5), (-1, 2.0)]);
        assert!(gamma_coeffs(&f, &f).trimmed().is_empty());
        assert_eq!(gamma_coeffs(&f, &CoefficientSeries::new()), f);
    }

    #[test]
    fn normalized_shift_hand_example() {
        let g = CoefficientSeries::from_real([(-1, 1.0)]);
        let s = normalized_shift_series(&g, &PI, 1, 1.0, ShiftVariant::ByNu).unwrap();
        assert!((s.normalization - c(-2.0)).norm() < 1e-15);
        assert!((s.tail.coeff(0) - c(1.0)).norm() < 1e-15);
        assert!(s.analytic.is_empty());
        // shifting by nu - 1 = 0 leaves gamma(-1) below zero
        let s = normalized_shift_series(&g, &PI, 1, 1.0, ShiftVariant::ByNuMinusOne);
        assert!(matches!(s, Err(BuildError::ZeroNormalization { shift: 0 })));
        assert!(matches!(
            normalized_shift_series(&g, &PI, 2, 1.0, ShiftVariant::ByNu),
            Err(BuildError::ZeroNormalization { .. })
        ));
    }

    #[test]
    fn tail_single_term() {
        let beta = 2.0;
        let g = CoefficientSeries::from_real([(-40, 0.3)]);
        let delta = (Complex64::from_polar(1.0, -40.0 * beta) - 1.0).norm();
        let r = tail_estimate_check(&g, &beta, 10, 1.0);
        assert!((r.tail_sq - 0.09 * delta * delta).abs() < 1e-12);
        assert_eq!(tail_estimate_check(&g, &beta, 40, 0.0).tail_sq, 0.0);
    }

    #[test]
    fn case_split_at_pi() {
        let m = EpsilonModel::default();
        match case_split(&PI, 4, 1.0, 1, &m, 0.5).unwrap() {
            Case::Case2 { modulus, shifted, .. } => {
                assert!(modulus < 1e-12);
                assert!((shifted - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(case_split(&PI, 5, 1.0, 1, &m, 0.5).unwrap(), Case::Case1 { .. }));
        assert!(matches!(case_split(&0.5, 5, 1.0, 1, &m, 0.5), Err(BuildError::BetaRange(_))));
        assert!(matches!(
            case_split(&PI, 4, 1.0, 1, &m, 3.0),
            Err(BuildError::CaseAssertion { .. })
        ));
    }
}
