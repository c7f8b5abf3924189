//! Privalov ice-cream cones and Privalov domains over finite arc sets.
//!
//! The cone at `e^{it}` is the closed convex hull of that boundary point and the
//! disk `|z| <= 1/2`. A union of such cones over a closed set `E` of the circle is
//! star-shaped about the origin, so it is described by a radial profile: radius
//! 1 over `E`, and over a gap `J = (b, a)` the larger of the two tangent lines
//! issuing from `e^{ib}` and `e^{ia}`, floored at 1/2. Only the two cones at the
//! gap's endpoints matter there; every other cone is dominated by one of them.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Radius of the inner disk every cone contains.
pub const INNER_RADIUS: f64 = 0.5;

/// Gaps strictly longer than this expose a piece of the inner circle.
pub const INNER_ARC_THRESHOLD: f64 = 2.0 * FRAC_PI_3;

const CONTAIN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("arc set is empty")]
    EmptyArcSet,
    #[error("arc {index} = [{a}, {b}] is invalid (need finite a <= b <= a + 2pi)")]
    InvalidArc { index: usize, a: f64, b: f64 },
    #[error("point {0} lies outside the Privalov domain")]
    OutsideDomain(Complex64),
    #[error("malformed arc file: {0}")]
    Format(String),
}

/// Closed Privalov cone membership: `z` lies in `conv({e^{it}} ∪ {|w| <= 1/2})`.
///
/// Equivalent to `min_{s in [0,1]} |z - s e^{it}| - (1 - s)/2 <= 0`; after rotating
/// the apex to 1 the minimizer is `s = x - |y|/sqrt(3)` clamped to `[0, 1]`.
pub fn cone_contains(t: f64, z: Complex64) -> bool {
    let w = z * Complex64::from_polar(1.0, -t);
    cone_gap(w) <= CONTAIN_TOL
}

/// `min_s |w - s| - (1 - s)/2` for the cone with apex 1.
fn cone_gap(w: Complex64) -> f64 {
    let s = (w.re - w.im.abs() / 3f64.sqrt()).clamp(0.0, 1.0);
    (w - s).norm() - (1.0 - s) * INNER_RADIUS
}

/// Points where the two segments from `e^{it}` touch `|z| = 1/2`.
pub fn tangent_points(t: f64) -> (Complex64, Complex64) {
    (
        Complex64::from_polar(INNER_RADIUS, t + FRAC_PI_3),
        Complex64::from_polar(INNER_RADIUS, t - FRAC_PI_3),
    )
}

/// Distance from the origin of the tangent line leaving the apex at angular
/// offset `d` (measured from the apex direction), for `0 <= d <= pi/3`.
fn tangent_radius(d: f64) -> f64 {
    if d >= FRAC_PI_3 {
        INNER_RADIUS
    } else {
        INNER_RADIUS / (d - FRAC_PI_3).cos()
    }
}

/// `|1 - z| / (1 - |z|)`, the Abel-summation growth factor.
pub fn abel_ratio(z: Complex64) -> f64 {
    (Complex64::new(1.0, 0.0) - z).norm() / (1.0 - z.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaMax {
    pub value: f64,
    pub argmax: Complex64,
    pub samples: usize,
    /// Set when fewer than 1000 samples were requested.
    pub low_sampling: bool,
}

/// Maximizes `|1 - z|/(1 - |z|)` over the cone `Q_0` (apex excluded, where the
/// ratio is 0/0).
///
/// `log` of the ratio is subharmonic, so the maximum sits on the boundary; the
/// boundary is sampled densely, the interior on a grid as a cross-check, and the
/// best boundary sample is refined by golden-section search.
pub fn cone_kappa_max(samples: usize) -> KappaMax {
    let samples = samples.max(2);
    let boundary_n = samples.div_ceil(2);
    let mut best_u = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..boundary_n {
        let u = (i as f64 + 0.5) / boundary_n as f64;
        let v = abel_ratio(cone_boundary_point(u));
        if v > best {
            best = v;
            best_u = u;
        }
    }
    let h = 1.0 / boundary_n as f64;
    let u = golden_max(|u| abel_ratio(cone_boundary_point(u)), (best_u - h).max(0.0), (best_u + h).min(1.0));
    let mut value = abel_ratio(cone_boundary_point(u));
    let mut argmax = cone_boundary_point(u);
    if best > value {
        value = best;
        argmax = cone_boundary_point(best_u);
    }

    let side = ((samples - boundary_n) as f64).sqrt().ceil().max(1.0) as usize;
    for i in 0..side {
        for j in 0..side {
            let z = Complex64::new(
                -0.5 + 1.5 * (i as f64 + 0.5) / side as f64,
                -0.5 + (j as f64 + 0.5) / side as f64,
            );
            if z.norm() < 1.0 && cone_contains(0.0, z) {
                let v = abel_ratio(z);
                if v > value {
                    value = v;
                    argmax = z;
                }
            }
        }
    }
    KappaMax {
        value,
        argmax,
        samples,
        low_sampling: samples < 1000,
    }
}

/// Boundary of `Q_0` parametrized by `u in [0, 1]`: the upper tangent segment
/// from the apex, the far arc of the inner circle, the lower segment back.
fn cone_boundary_point(u: f64) -> Complex64 {
    let seg = 3f64.sqrt() / 2.0;
    let arc = INNER_RADIUS * 4.0 * FRAC_PI_3;
    let total = 2.0 * seg + arc;
    let s = u.clamp(0.0, 1.0) * total;
    let (top, bottom) = tangent_points(0.0);
    let apex = Complex64::new(1.0, 0.0);
    if s < seg {
        apex + (top - apex) * (s / seg)
    } else if s < seg + arc {
        Complex64::from_polar(INNER_RADIUS, FRAC_PI_3 + (s - seg) / INNER_RADIUS)
    } else {
        bottom + (apex - bottom) * ((s - seg - arc) / seg)
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-13 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// A closed arc `{e^{i s} : start <= s <= start + len}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    /// In `[0, 2pi)`.
    pub start: f64,
    /// In `[0, 2pi]`; zero for a single point.
    pub len: f64,
}

impl Arc {
    pub fn end(&self) -> f64 {
        self.start + self.len
    }
}

/// A complementary open arc of an [`ArcSet`]; gap `id` follows arc `id`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub id: usize,
    pub start: f64,
    pub len: f64,
}

/// Finite union of closed arcs of the unit circle.
///
/// Stored cyclically sorted by start angle, with overlapping or touching arcs
/// merged. An arc that crosses angle 0 stays a single arc (its end may exceed
/// 2pi), so gaps are exactly the spaces between consecutive arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSet {
    arcs: Vec<Arc>,
}

#[derive(Serialize, Deserialize)]
struct ArcFile {
    arcs: Vec<[f64; 2]>,
}

impl ArcSet {
    /// Builds from `[a, b]` pairs in radians.
    pub fn new(raw: &[[f64; 2]]) -> Result<Self, ConeError> {
        if raw.is_empty() {
            return Err(ConeError::EmptyArcSet);
        }
        let mut arcs = Vec::with_capacity(raw.len());
        for (index, &[a, b]) in raw.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) || b < a || b - a > TAU + 1e-12 {
                return Err(ConeError::InvalidArc { index, a, b });
            }
            if b - a >= TAU {
                return Ok(Self::full_circle());
            }
            arcs.push(Arc {
                start: a.rem_euclid(TAU) % TAU,
                len: b - a,
            });
        }
        arcs.sort_by(|x, y| x.start.total_cmp(&y.start));

        let mut merged: Vec<Arc> = Vec::with_capacity(arcs.len());
        for arc in arcs {
            match merged.last_mut() {
                Some(cur) if arc.start <= cur.end() => {
                    cur.len = cur.len.max(arc.end() - cur.start);
                }
                _ => merged.push(arc),
            }
        }
        // the last arc may run past 2pi into the first ones
        while merged.len() > 1 {
            let last = *merged.last().unwrap();
            let first = merged[0];
            if last.end() < first.start + TAU {
                break;
            }
            merged.remove(0);
            let cur = merged.last_mut().unwrap();
            cur.len = cur.len.max(first.end() + TAU - cur.start);
        }
        if merged.len() == 1 && merged[0].len >= TAU {
            return Ok(Self::full_circle());
        }
        Ok(Self { arcs: merged })
    }

    pub fn full_circle() -> Self {
        Self {
            arcs: vec![Arc { start: 0.0, len: TAU }],
        }
    }

    /// The circle with one open gap of length `len` centred at angle `center`.
    pub fn with_single_gap(center: f64, len: f64) -> Result<Self, ConeError> {
        let a = center + len / 2.0;
        Self::new(&[[a, a + TAU - len]])
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConeError> {
        let file: ArcFile =
            serde_json::from_str(text).map_err(|e| ConeError::Format(e.to_string()))?;
        Self::new(&file.arcs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let arcs: Vec<[f64; 2]> = self.arcs.iter().map(|a| [a.start, a.end()]).collect();
        serde_json::to_value(ArcFile { arcs }).expect("serializable")
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].len >= TAU
    }

    /// `|E|`.
    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|a| a.len).sum::<f64>().min(TAU)
    }

    pub fn gaps(&self) -> Vec<Gap> {
        if self.is_full() {
            return Vec::new();
        }
        let n = self.arcs.len();
        (0..n)
            .map(|i| {
                let a = self.arcs[i];
                let next = self.arcs[(i + 1) % n];
                let next_start = if i + 1 == n { next.start + TAU } else { next.start };
                Gap {
                    id: i,
                    start: a.end(),
                    len: next_start - a.end(),
                }
            })
            .collect()
    }
}

/// Kind of a boundary piece, with its geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum PieceKind {
    /// Arc of the unit circle lying over `E`.
    #[serde(rename = "earc")]
    EArc { start: f64, len: f64 },
    /// Straight piece of a cone's side over a gap.
    #[serde(rename = "segment")]
    TangentSegment { from: [f64; 2], to: [f64; 2] },
    /// Exposed piece of `|z| = 1/2` over a long gap.
    #[serde(rename = "innerarc")]
    InnerArc { start: f64, len: f64 },
}

/// Boundary tag without geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceTag {
    EArc,
    Segment,
    InnerArc,
}

impl PieceKind {
    pub fn tag(&self) -> PieceTag {
        match self {
            PieceKind::EArc { .. } => PieceTag::EArc,
            PieceKind::TangentSegment { .. } => PieceTag::Segment,
            PieceKind::InnerArc { .. } => PieceTag::InnerArc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryPiece {
    pub id: usize,
    #[serde(flatten)]
    pub kind: PieceKind,
    /// Owning gap for segments and inner arcs.
    pub gap: Option<usize>,
}

impl BoundaryPiece {
    pub fn start_point(&self) -> Complex64 {
        match self.kind {
            PieceKind::EArc { start, .. } => Complex64::from_polar(1.0, start),
            PieceKind::InnerArc { start, .. } => Complex64::from_polar(INNER_RADIUS, start),
            PieceKind::TangentSegment { from, .. } => Complex64::new(from[0], from[1]),
        }
    }

    pub fn end_point(&self) -> Complex64 {
        match self.kind {
            PieceKind::EArc { start, len } => Complex64::from_polar(1.0, start + len),
            PieceKind::InnerArc { start, len } => Complex64::from_polar(INNER_RADIUS, start + len),
            PieceKind::TangentSegment { to, .. } => Complex64::new(to[0], to[1]),
        }
    }

    pub fn length(&self) -> f64 {
        match self.kind {
            PieceKind::EArc { len, .. } => len,
            PieceKind::InnerArc { len, .. } => INNER_RADIUS * len,
            PieceKind::TangentSegment { .. } => (self.end_point() - self.start_point()).norm(),
        }
    }

    /// Exact Euclidean distance from `z` to this piece.
    pub fn distance(&self, z: Complex64) -> f64 {
        match self.kind {
            PieceKind::EArc { start, len } => arc_distance(z, 1.0, start, len),
            PieceKind::InnerArc { start, len } => arc_distance(z, INNER_RADIUS, start, len),
            PieceKind::TangentSegment { from, to } => segment_distance(
                z,
                Complex64::new(from[0], from[1]),
                Complex64::new(to[0], to[1]),
            ),
        }
    }

    /// Point of the piece at parameter `u in [0, 1]`.
    pub fn point_at(&self, u: f64) -> Complex64 {
        match self.kind {
            PieceKind::EArc { start, len } => Complex64::from_polar(1.0, start + u * len),
            PieceKind::InnerArc { start, len } => Complex64::from_polar(INNER_RADIUS, start + u * len),
            PieceKind::TangentSegment { .. } => {
                let a = self.start_point();
                a + (self.end_point() - a) * u
            }
        }
    }
}

fn arc_distance(z: Complex64, radius: f64, start: f64, len: f64) -> f64 {
    let r = z.norm();
    if len >= TAU || r == 0.0 {
        return (r - radius).abs();
    }
    let offset = (z.arg() - start).rem_euclid(TAU);
    if offset <= len {
        (r - radius).abs()
    } else {
        let a = Complex64::from_polar(radius, start);
        let b = Complex64::from_polar(radius, start + len);
        (z - a).norm().min((z - b).norm())
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let u = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * u)).norm()
}

/// The union of cones over an [`ArcSet`], with its boundary split into tagged
/// pieces listed in counterclockwise order.
#[derive(Clone, Debug)]
pub struct PrivalovDomain {
    base: ArcSet,
    gaps: Vec<Gap>,
    pieces: Vec<BoundaryPiece>,
}

impl PrivalovDomain {
    /// `P = ∪_{t in E} Q_t`.
    ///
    /// Over each gap `(b, a)`: a segment down from `e^{ib}`, then either the inner
    /// arc `[b + pi/3, a - pi/3]` and a segment up to `e^{ia}` (gap longer than
    /// `2pi/3`), or a segment up from the point where the two tangent lines cross.
    pub fn from_arcs(base: ArcSet) -> Self {
        let gaps = base.gaps();
        let mut pieces = Vec::new();
        let push = |kind: PieceKind, gap: Option<usize>, pieces: &mut Vec<BoundaryPiece>| {
            let id = pieces.len();
            pieces.push(BoundaryPiece { id, kind, gap });
        };
        let pt = |z: Complex64| [z.re, z.im];
        for (i, arc) in base.arcs().iter().enumerate() {
            if arc.len > 0.0 {
                push(
                    PieceKind::EArc {
                        start: arc.start,
                        len: arc.len,
                    },
                    None,
                    &mut pieces,
                );
            }
            let Some(gap) = gaps.get(i) else { continue };
            let b = gap.start;
            let a = gap.start + gap.len;
            let left = Complex64::from_polar(1.0, b);
            let right = Complex64::from_polar(1.0, a);
            if gap.len > INNER_ARC_THRESHOLD {
                let p1 = Complex64::from_polar(INNER_RADIUS, b + FRAC_PI_3);
                let p2 = Complex64::from_polar(INNER_RADIUS, a - FRAC_PI_3);
                push(PieceKind::TangentSegment { from: pt(left), to: pt(p1) }, Some(i), &mut pieces);
                push(
                    PieceKind::InnerArc {
                        start: (b + FRAC_PI_3).rem_euclid(TAU),
                        len: gap.len - INNER_ARC_THRESHOLD,
                    },
                    Some(i),
                    &mut pieces,
                );
                push(PieceKind::TangentSegment { from: pt(p2), to: pt(right) }, Some(i), &mut pieces);
            } else {
                let mid = b + gap.len / 2.0;
                let cross = Complex64::from_polar(tangent_radius(gap.len / 2.0), mid);
                push(PieceKind::TangentSegment { from: pt(left), to: pt(cross) }, Some(i), &mut pieces);
                push(PieceKind::TangentSegment { from: pt(cross), to: pt(right) }, Some(i), &mut pieces);
            }
        }
        Self { base, gaps, pieces }
    }

    pub fn base(&self) -> &ArcSet {
        &self.base
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }

    /// Outer radius of `P` in direction `phi`.
    pub fn radial_extent(&self, phi: f64) -> f64 {
        if self.base.is_full() {
            return 1.0;
        }
        let phi = phi.rem_euclid(TAU);
        // last arc starting at or before phi, cyclically
        let arcs = self.base.arcs();
        let k = arcs.partition_point(|a| a.start <= phi);
        let (arc_idx, offset) = if k == 0 {
            (arcs.len() - 1, phi + TAU - arcs[arcs.len() - 1].start)
        } else {
            (k - 1, phi - arcs[k - 1].start)
        };
        let arc = arcs[arc_idx];
        if offset <= arc.len {
            return 1.0;
        }
        let gap = self.gaps[arc_idx];
        let from_left = offset - arc.len;
        let from_right = gap.len - from_left;
        if from_right < 0.0 {
            // phi wrapped past the end of the cyclic order; only possible through rounding
            return 1.0;
        }
        tangent_radius(from_left).max(tangent_radius(from_right))
    }

    /// Closed-domain membership.
    pub fn contains(&self, z: Complex64) -> bool {
        let r2 = z.norm_sqr();
        if r2 <= INNER_RADIUS * INNER_RADIUS {
            return true;
        }
        let r = r2.sqrt();
        if r > 1.0 + CONTAIN_TOL {
            return false;
        }
        r <= self.radial_extent(z.arg()) + CONTAIN_TOL
    }

    fn nearest(&self, z: Complex64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for piece in &self.pieces {
            let d = piece.distance(z);
            if d < best.1 {
                best = (piece.id, d);
            }
        }
        best
    }

    /// Exact distance from an interior point to `∂P`.
    pub fn distance_to_boundary(&self, z: Complex64) -> Result<f64, ConeError> {
        if !self.contains(z) {
            return Err(ConeError::OutsideDomain(z));
        }
        Ok(self.nearest(z).1)
    }

    /// The closest piece; ties go to the lowest id.
    pub fn nearest_boundary_piece(&self, z: Complex64) -> Result<&BoundaryPiece, ConeError> {
        if !self.contains(z) {
            return Err(ConeError::OutsideDomain(z));
        }
        Ok(&self.pieces[self.nearest(z).0])
    }

    /// Unchecked nearest piece and distance, for callers that already know `z` is inside.
    pub(crate) fn nearest_unchecked(&self, z: Complex64) -> (usize, f64) {
        self.nearest(z)
    }

    /// Number of times the boundary winds around the origin.
    pub fn turning_number(&self) -> f64 {
        let total: f64 = self
            .pieces
            .iter()
            .map(|p| match p.kind {
                PieceKind::EArc { len, .. } | PieceKind::InnerArc { len, .. } => len,
                PieceKind::TangentSegment { .. } => {
                    let d = p.end_point().arg() - p.start_point().arg();
                    (d + PI).rem_euclid(TAU) - PI
                }
            })
            .sum();
        total / TAU
    }

    /// Largest mismatch between one piece's end and the next piece's start.
    pub fn closure_defect(&self) -> f64 {
        let n = self.pieces.len();
        (0..n)
            .map(|i| (self.pieces[i].end_point() - self.pieces[(i + 1) % n].start_point()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "arcs": self.base.to_json()["arcs"],
            "pieces": self.pieces,
        })
    }
}
