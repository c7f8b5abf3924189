//! Numerical workbench for Privalov-type arguments on the unit circle.
//!
//! * [`series`]: finite coefficient series, partial sums, maximal functions, norms.
//! * [`cone`]: Privalov cones and Privalov domains over finite arc sets.
//! * [`harmonic`]: walk-on-spheres harmonic measure on those domains.
//! * [`alpha`]: exact rational construction of `alpha` with `{alpha q(k)} -> 0`.
//! * [`constructions`]: counterexample schedules and null-series bookkeeping.
//! * [`cli`] and [`verify`]: the `plabench` front end and its check suite.

pub mod alpha;
pub mod cli;
pub mod cone;
pub mod constructions;
pub mod harmonic;
pub mod series;
pub mod verify;
