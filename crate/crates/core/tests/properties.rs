use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::collection::{btree_map, vec};
use proptest::prelude::*;

use pla_workbench::alpha::{AlphaConstruction, LacunarySequence};
use pla_workbench::cone::{cone_contains, ArcSet, PrivalovDomain};
use pla_workbench::constructions::{normalized_shift_series, ShiftVariant};
use pla_workbench::harmonic::{sample_exits, WalkOptions};
use pla_workbench::series::CoefficientSeries;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn series(span: i64, max_len: usize) -> impl Strategy<Value = Vec<(i64, Complex64)>> {
    btree_map(-span..=span, coeff(), 1..=max_len).prop_map(|m| m.into_iter().collect())
}

fn build(terms: &[(i64, Complex64)]) -> CoefficientSeries {
    CoefficientSeries::from_pairs(terms.iter().copied()).unwrap()
}

/// `n t_j` reduced in integers, so the oracle does not lose phase at large `n`.
fn grid_eval(terms: &[(i64, Complex64)], j: i64, m: i64) -> Complex64 {
    terms
        .iter()
        .map(|&(n, a)| a * Complex64::from_polar(1.0, TAU * (n * j).rem_euclid(m) as f64 / m as f64))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_matches_grid_quadrature(terms in series(100, 64)) {
        let s = build(&terms);
        let m = 256i64;
        let quad = (0..m).map(|j| grid_eval(&terms, j, m).norm_sqr()).sum::<f64>() / m as f64;
        let direct = terms.iter().map(|t| t.1.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((s.l2_norm() - direct).abs() <= 1e-12);
        prop_assert!((s.l2_norm() - quad.sqrt()).abs() <= 1e-10);
        prop_assert!((s.sample(m as usize).mean_square().sqrt() - quad.sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn prefix_sup_matches_brute_force(terms in series(300, 48)) {
        let s = build(&terms);
        let m = 64i64;
        let fast = s.maximal_partial_sum(m as usize);
        for j in 0..m {
            let best = (0..=terms.len())
                .map(|k| grid_eval(&terms[..k], j, m).norm())
                .fold(0.0, f64::max);
            prop_assert!((fast.samples()[j as usize] - best).abs() <= 1e-12);
        }
    }

    #[test]
    fn abel_bound_on_cone(
        coeffs in vec(coeff(), 1..=65),
        s in 0.0..1.0f64,
        r in 0.0..0.5f64,
        phi in 0.0..TAU,
    ) {
        let g = build(&coeffs.iter().enumerate().map(|(n, &c)| (n as i64, c)).collect::<Vec<_>>());
        let z = Complex64::new(s, 0.0) + Complex64::from_polar(r, phi) * (1.0 - s);
        prop_assert!(cone_contains(0.0, z));
        let bound = 3.0 * g.maximal_partial_sum_at(0.0) * (1.0 + 1e-9);
        prop_assert!(g.abel_eval(z).unwrap().norm() <= bound + 1e-12);
    }

    #[test]
    fn beta_difference_matches_grid(terms in series(150, 64), beta in 0.1..6.2f64) {
        let s = build(&terms);
        let diff = s.beta_difference(&beta);
        for j in 0..32 {
            let t = TAU * j as f64 / 32.0;
            let oracle = s.eval(t + beta) - s.eval(t);
            prop_assert!((diff.eval(t) - oracle).norm() <= 1e-10);
        }
    }

    #[test]
    fn modulation_shifts_support_and_keeps_norm(terms in series(100, 32), m in -50i64..=50) {
        let s = build(&terms);
        let moved = s.modulate(m);
        prop_assert!((moved.l2_norm() - s.l2_norm()).abs() <= 1e-12);
        for &(n, c) in &terms {
            prop_assert_eq!(moved.coeff(n + m), c);
        }
        let t = 0.731;
        let expect = s.eval(t) * Complex64::from_polar(1.0, m as f64 * t);
        prop_assert!((moved.eval(t) - expect).norm() <= 1e-9);
    }

    #[test]
    fn normalized_shift_round_trip(
        terms in series(200, 64),
        nu in 1i64..500,
        d in 0.01..10.0f64,
        by_nu in any::<bool>(),
    ) {
        let s = build(&terms);
        let beta = TAU / 3.0 + 0.01;
        let variant = if by_nu { ShiftVariant::ByNu } else { ShiftVariant::ByNuMinusOne };
        if let Ok(ns) = normalized_shift_series(&s, &beta, nu, d, variant) {
            prop_assert!(ns.analytic.n_min().is_none_or(|n| n > 0));
            prop_assert!(ns.tail.n_max().is_none_or(|n| n <= 0));
            let back = ns.recombine().sub(&s.beta_difference(&beta)).l2_norm();
            prop_assert!(back <= 1e-10 * (1.0 + s.l2_norm()));
        }
    }

    #[test]
    fn alpha_partial_sums_are_integral(
        first in 6u64..50,
        steps in vec((3u64..40, 0u64..1000), 1..6),
    ) {
        // ratios above 2, with no divisibility between consecutive terms
        let mut q = vec![first];
        for (f, r) in steps {
            let next = q.last().unwrap().checked_mul(f).map(|v| v + r);
            match next {
                Some(v) if v < 1 << 60 => q.push(v),
                _ => break,
            }
        }
        let a = AlphaConstruction::construct(&LacunarySequence::from_u64(&q).unwrap());
        prop_assert!(a.integrality_holds());
        for (k, (&qk, ak)) in q.iter().zip(a.partial_sums()).enumerate() {
            prop_assert!((ak * BigInt::from(qk)).is_integer());
            let w = &a.weights()[k];
            prop_assert!(*w > BigRational::from_integer(0.into()) && *w <= BigRational::from_integer(1.into()));
        }
        for e in a.frac_parts(false) {
            prop_assert!(e.lo >= BigRational::from_integer(0.into()) && e.lo < BigRational::from_integer(1.into()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn walk_on_spheres_is_deterministic(seed in any::<u64>(), gap in 0.05..1.0f64) {
        let domain = PrivalovDomain::from_arcs(ArcSet::with_single_gap(1.0, gap).unwrap());
        let opts = WalkOptions::default();
        let z = Complex64::new(0.0, 0.0);
        let a = sample_exits(&domain, z, 500, &opts, seed).unwrap();
        let b = sample_exits(&domain, z, 500, &opts, seed).unwrap();
        prop_assert_eq!(a.len(), 500);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.piece, y.piece);
            prop_assert_eq!(x.point, y.point);
            prop_assert_eq!(x.steps, y.steps);
        }
    }
}
