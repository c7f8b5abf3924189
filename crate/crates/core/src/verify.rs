//! The check suite behind `plabench verify`.
//!
//! Each criterion returns a pass flag and a one-line detail. Monte-Carlo
//! criteria get one retry with a derived seed; a pass on retry is reported as
//! such rather than as a plain pass.

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alpha::{AlphaConstruction, LacunarySequence};
use crate::cone::{cone_contains, cone_kappa_max, ArcSet, PrivalovDomain};
use crate::constructions::{
    build_thm1, build_thm2, build_thm4, case_split, gamma_coeffs, normalized_shift_series,
    tail_estimate_check, Case, EpsilonModel, Sequences, ShiftVariant, DEFAULT_SEARCH_CAP,
};
use crate::harmonic::{
    arc_histogram, disk_oracle_passes, lattice_walk_gap_table, omega_gap_table, sample_exits,
    subharmonic_check, HmEstimate, WalkOptions,
};
use crate::series::{CoefficientSeries, WeightSequence};

/// The sequence used by the diophantine and schedule criteria.
pub const REFERENCE_Q: [u64; 5] = [6, 60, 6000, 6_000_000, 60_000_000_000];

pub const GAP_FAMILY: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
pub const LATTICE_STEP: f64 = 1e-3;
pub const LATTICE_WALKS: usize = 1000;
pub const SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub grid_size: usize,
    pub samples: usize,
    pub delta: f64,
    pub seed: u64,
    pub margin: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            grid_size: 65536,
            samples: 100_000,
            delta: 1e-5,
            seed: 0,
            margin: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    /// Failed once, passed with the derived seed.
    Retry,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Seed for the single retry of a statistical criterion.
pub fn derived_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03)
}

type CriterionFn = fn(&VerifyConfig, u64) -> Outcome;

pub const CRITERIA: [(u8, &str, bool, CriterionFn); 10] = [
    (1, "cone constant", false, cone_constant),
    (2, "abel bound", false, abel_bound),
    (3, "disk oracle", true, disk_oracle),
    (4, "gap bound", true, gap_bound),
    (5, "subharmonic inequality", true, subharmonic),
    (6, "alpha exactness", false, alpha_exactness),
    (7, "series algebra", false, series_algebra),
    (8, "schedule self-verification", false, schedules),
    (9, "tail estimate", false, tail_estimate),
    (10, "case split totality", false, case_split_totality),
];

pub fn run_criterion(id: u8, cfg: &VerifyConfig) -> Option<CriterionResult> {
    let &(id, name, statistical, f) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let first = f(cfg, cfg.seed);
    let (status, detail) = if first.pass {
        (Status::Pass, first.detail)
    } else if statistical {
        let second = f(cfg, derived_seed(cfg.seed));
        if second.pass {
            (Status::Retry, format!("{} | retry: {}", first.detail, second.detail))
        } else {
            (Status::Fail, format!("{} | retry: {}", first.detail, second.detail))
        }
    } else {
        (Status::Fail, first.detail)
    };
    Some(CriterionResult {
        id,
        name,
        status,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter_map(|c| run_criterion(c.0, cfg))
        .collect()
}

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone_constant(_: &VerifyConfig, _: u64) -> Outcome {
    let k = cone_kappa_max(20_000);
    let pass = (k.value - 3.0).abs() <= 1e-9 && (k.argmax - Complex64::new(-0.5, 0.0)).norm() <= 1e-6;
    Outcome::new(pass, format!("max {:.12} at {:.8}", k.value, k.argmax))
}

/// Result of [`abel_bound_sweep`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AbelSweep {
    pub polynomials: usize,
    pub points: usize,
    /// Largest `|G(z)| / (3 g*(0))`.
    pub worst_ratio: f64,
    pub failures: usize,
}

/// Uniform point of `Q_0` strictly inside the unit disk.
pub fn random_cone_point<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-0.5..1.0), rng.gen_range(-0.5..0.5));
        if z.norm() < 1.0 && cone_contains(0.0, z) {
            return z;
        }
    }
}

/// Random analytic polynomial with degree at most `max_degree`.
pub fn random_polynomial<R: Rng>(rng: &mut R, max_degree: i64) -> CoefficientSeries {
    let degree = rng.gen_range(0..=max_degree);
    let mut g = CoefficientSeries::new();
    for n in 0..=degree {
        g.add_term(n, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    g
}

/// Checks `|G(z)| <= tolerance * g*(0)` on random polynomials and cone points.
pub fn abel_bound_sweep(polynomials: usize, points: usize, tolerance: f64, seed: u64) -> AbelSweep {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..polynomials {
        let g = random_polynomial(&mut rng, 64);
        let gstar = g.maximal_partial_sum_at(0.0);
        for _ in 0..points {
            let z = random_cone_point(&mut rng);
            let value = g.abel_eval(z).expect("analytic series inside the disk").norm();
            let ratio = value / (3.0 * gstar);
            worst = worst.max(ratio);
            if value > tolerance * gstar * (1.0 + 1e-9) {
                failures += 1;
            }
        }
    }
    AbelSweep {
        polynomials,
        points,
        worst_ratio: worst,
        failures,
    }
}

pub fn abel_bound(_: &VerifyConfig, seed: u64) -> Outcome {
    let s = abel_bound_sweep(1000, 100, 3.0, seed);
    Outcome::new(
        s.failures == 0,
        format!("worst |G|/(3 g*(0)) = {:.6}, failures {}", s.worst_ratio, s.failures),
    )
}

pub fn disk_oracle(cfg: &VerifyConfig, seed: u64) -> Outcome {
    let disk = PrivalovDomain::from_arcs(ArcSet::full_circle());
    let opts = WalkOptions::with_delta(cfg.delta);
    let exits = match sample_exits(&disk, origin(), cfg.samples, &opts, seed) {
        Ok(e) => e,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let est = HmEstimate::from_exits(&disk, &exits, cfg.delta, seed);
    let bins = arc_histogram(&exits, 8);
    let partition = est.partition_holds() && bins.iter().map(|b| b.hits).sum::<u64>() == est.samples;
    let worst = bins
        .iter()
        .map(|b| (b.omega - 0.125).abs() / (0.125f64 * 0.875 / cfg.samples as f64).sqrt())
        .fold(0.0, f64::max);
    Outcome::new(
        partition && disk_oracle_passes(&bins, est.samples, SIGMAS),
        format!("worst bin deviation {worst:.2} sigma, partition {partition}"),
    )
}

pub fn gap_bound(cfg: &VerifyConfig, seed: u64) -> Outcome {
    let opts = WalkOptions::with_delta(cfg.delta);
    let mut pass = true;
    let mut max_ratio: f64 = 0.0;
    let mut parts = Vec::new();
    for len in GAP_FAMILY {
        let domain = PrivalovDomain::from_arcs(ArcSet::with_single_gap(0.0, len).expect("valid gap"));
        let wos = omega_gap_table(&domain, origin(), cfg.samples, &opts, seed);
        let lat = lattice_walk_gap_table(&domain, origin(), LATTICE_WALKS, LATTICE_STEP, seed);
        let (wos, lat) = match (wos, lat) {
            (Ok(w), Ok(l)) => (w[0].clone(), l[0].clone()),
            (Err(e), _) | (_, Err(e)) => return Outcome::new(false, e.to_string()),
        };
        let sigma = (wos.stderr.powi(2) + lat.stderr.powi(2)).sqrt();
        let agree = (wos.omega - lat.omega).abs() <= SIGMAS * sigma;
        pass &= wos.ratio.is_finite() && agree;
        max_ratio = max_ratio.max(wos.ratio);
        parts.push(format!("|J|={len}: {:.4} vs {:.4}", wos.ratio, lat.ratio));
    }
    Outcome::new(pass, format!("max ratio {max_ratio:.4}; {}", parts.join(", ")))
}

/// Domain with a single gap long enough to expose part of the inner circle.
pub fn subharmonic_domain() -> PrivalovDomain {
    PrivalovDomain::from_arcs(ArcSet::with_single_gap(PI, 2.5).expect("valid gap"))
}

pub fn subharmonic(cfg: &VerifyConfig, seed: u64) -> Outcome {
    let domain = subharmonic_domain();
    let opts = WalkOptions::with_delta(cfg.delta);
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [1, 2, 5] {
        let g = CoefficientSeries::monomial(m, Complex64::new(1.0, 0.0));
        match subharmonic_check(&domain, &g, origin(), cfg.samples, &opts, seed) {
            Ok(r) => {
                pass &= r.center == 0.0 && r.holds(SIGMAS);
                parts.push(format!("m={m}: slack {:.5} +- {:.5}", r.slack, r.stderr));
            }
            Err(e) => return Outcome::new(false, e.to_string()),
        }
    }
    Outcome::new(pass, parts.join(", "))
}

pub fn reference_alpha() -> AlphaConstruction {
    AlphaConstruction::construct(&LacunarySequence::from_u64(&REFERENCE_Q).expect("valid reference sequence"))
}

pub fn alpha_exactness(_: &VerifyConfig, _: u64) -> Outcome {
    let a = reference_alpha();
    let integral = a.integrality_holds();
    let enc = a.frac_parts(true);
    let monotone = enc.windows(2).all(|w| w[1].hi <= w[0].hi);
    let last_small = enc
        .last()
        .is_some_and(|e| e.hi < BigRational::new(BigInt::from(1), BigInt::from(1000)));
    let uniform = a
        .uniform_bound_check(&BigRational::from_integer(BigInt::from(2)))
        .map(|u| (u.pass, u.observed.to_f64().unwrap_or(f64::NAN)));
    let (upass, observed) = uniform.unwrap_or((false, f64::NAN));
    Outcome::new(
        integral && monotone && last_small && upass,
        format!(
            "integral {integral}, non-increasing {monotone}, last bound {:.3e}, observed C {observed:.4}",
            enc.last().and_then(|e| e.hi.to_f64()).unwrap_or(f64::NAN)
        ),
    )
}

fn random_series<R: Rng>(rng: &mut R, max_len: usize, span: i64) -> CoefficientSeries {
    let len = rng.gen_range(1..=max_len);
    let mut s = CoefficientSeries::new();
    for _ in 0..len {
        s.add_term(
            rng.gen_range(-span..=span),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    s
}

/// `max_N |sum_{n<N} c(n) e^{int}|` by evaluating every prefix from scratch.
pub fn exhaustive_prefix_max(s: &CoefficientSeries, t: f64) -> f64 {
    let terms: Vec<(i64, Complex64)> = s.iter().collect();
    (0..=terms.len())
        .map(|k| {
            terms[..k]
                .iter()
                .map(|&(n, c)| c * Complex64::from_polar(1.0, n as f64 * t))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

pub fn series_algebra(cfg: &VerifyConfig, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = reference_alpha().exact_beta();
    let (mut parseval, mut shift, mut round, mut prefix) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let s = random_series(&mut rng, 128, 200);
        let grid = s.sample(cfg.grid_size).mean_square().sqrt();
        parseval = parseval.max((s.l2_norm() - grid).abs());

        let diff = s.beta_difference(&beta);
        let b = beta.radians();
        for j in 0..64 {
            let t = j as f64 * 0.0981;
            let direct = s.eval(t + b) - s.eval(t);
            shift = shift.max((diff.eval(t) - direct).norm());
        }

        let nu = rng.gen_range(1..=200);
        if let Ok(ns) = normalized_shift_series(&s, &beta, nu, 0.37, ShiftVariant::ByNu) {
            round = round.max(ns.recombine().sub(&diff).l2_norm());
        }

        let m = 256;
        let fast = s.maximal_partial_sum(m);
        for j in 0..m {
            let t = fast.t(j);
            prefix = prefix.max((fast.samples()[j] - exhaustive_prefix_max(&s, t)).abs());
        }
    }
    let pass = parseval <= 1e-10 && shift <= 1e-10 && round <= 1e-10 && prefix <= 1e-12;
    Outcome::new(
        pass,
        format!("parseval {parseval:.1e}, shift {shift:.1e}, round-trip {round:.1e}, prefix {prefix:.1e}"),
    )
}

/// `log(2 + n)` for `n < len`.
pub fn log_table(len: usize) -> WeightSequence {
    WeightSequence::from_fn(len, |n| (2.0 + n as f64).ln()).expect("positive increasing")
}

/// `n` for `1 <= n < len`; index 0 holds 1/2 to keep the table positive.
pub fn linear_table(len: usize) -> WeightSequence {
    WeightSequence::from_fn(len, |n| if n == 0 { 0.5 } else { n as f64 }).expect("positive increasing")
}

pub fn schedules(cfg: &VerifyConfig, _: u64) -> Outcome {
    let model = EpsilonModel::default();
    let results = [
        ("thm1", build_thm1(&log_table(1 << 20), 6, cfg.margin, &model)),
        ("thm2", build_thm2(&reference_alpha(), 4, cfg.margin, &model, DEFAULT_SEARCH_CAP)),
        ("thm4", build_thm4(&linear_table(1 << 20), 4, cfg.margin, &model)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in results {
        match r {
            Ok(b) => {
                let ok = b.all_pass() && b.recheck().iter().all(|c| c.pass);
                pass &= ok;
                parts.push(format!("{name}: {} checks {}", b.checks.len(), if ok { "pass" } else { "FAIL" }));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome::new(pass, parts.join(", "))
}

/// Random coefficients on `{-q(k)}` with unit l2 norm.
pub fn synthetic_c(q: &[BigInt], seed: u64) -> CoefficientSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CoefficientSeries::new();
    for v in q {
        let n = v.to_i64().expect("frequency fits in i64");
        c.add_term(-n, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    c.scale(Complex64::new(1.0 / c.l2_norm(), 0.0))
}

pub fn tail_estimate(cfg: &VerifyConfig, seed: u64) -> Outcome {
    let bundle = match build_thm2(&reference_alpha(), 4, cfg.margin, &EpsilonModel::default(), DEFAULT_SEARCH_CAP) {
        Ok(b) => b,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let Sequences::Thm2 { nu, ln_eps, beta, q, .. } = &bundle.sequences else {
        unreachable!("thm2 builder")
    };
    let gamma = gamma_coeffs(&synthetic_c(q, seed), &bundle.f);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (v, e) in nu.iter().zip(ln_eps) {
        let r = tail_estimate_check(&gamma, beta, *v, (2.0 * e).exp() * (2.0 + 8.0));
        pass &= r.pass;
        worst = worst.max(r.ratio);
    }
    Outcome::new(pass, format!("worst tail/budget {worst:.3e} over {} levels", nu.len()))
}

pub fn case_split_totality(_: &VerifyConfig, _: u64) -> Outcome {
    let beta = reference_alpha().exact_beta();
    let model = EpsilonModel::default();
    let pairs = [(1.0, 1), (0.5, 2), (0.1, 3), (1e-3, 5), (0.25, 10)];
    let (mut case1, mut case2, mut errors) = (0usize, 0usize, 0usize);
    let mut min_shifted = f64::INFINITY;
    for &(d, n) in &pairs {
        for nu in 1..=10_000 {
            match case_split(&beta, nu, d, n, &model, 0.5) {
                Ok(Case::Case1 { .. }) => case1 += 1,
                Ok(Case::Case2 { shifted, .. }) => {
                    case2 += 1;
                    min_shifted = min_shifted.min(shifted);
                }
                Err(_) => errors += 1,
            }
        }
    }
    let total = pairs.len() * 10_000;
    let pass = errors == 0 && case1 + case2 == total && !(min_shifted <= 0.5);
    Outcome::new(
        pass,
        format!("case1 {case1}, case2 {case2}, errors {errors}, min case-2 modulus {min_shifted:.4}"),
    )
}
