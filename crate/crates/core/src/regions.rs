//! Smoothing profile `(d, o, a0, d0, g, k)` and the exact `(1/p, 1/q, s)`
//! region geometry: the interpolation surface, the diagonal triangle, the
//! separating plane, point classification and the `s = 0` slice.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::BlockStructure;
use crate::rational::{from_f64, qi, to_f64, Q};

/// Half-width of the band around a boundary in which approximate profiles answer `Unknown`.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum A0Source {
    /// `1/d(S)` or `1/d(R)` from the Newton polyhedron.
    Predicted,
    Fitted,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseFlag {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub all_alpha_zero: bool,
    pub kernel_bounded_below: bool,
    pub g_at_most_critical: bool,
}

impl Hypotheses {
    pub fn all(&self) -> bool {
        self.all_alpha_zero && self.kernel_bounded_below && self.g_at_most_critical
    }
}

/// Where `a0` comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct A0Input {
    pub value: Q,
    pub source: A0Source,
    /// False for fitted values; comparisons then use [`TOLERANCE`].
    pub exact: bool,
    pub low_confidence: bool,
}

impl A0Input {
    pub fn predicted(value: Q) -> Self {
        Self {
            value,
            source: A0Source::Predicted,
            exact: true,
            low_confidence: false,
        }
    }

    pub fn user(value: Q) -> Self {
        Self {
            value,
            source: A0Source::User,
            exact: true,
            low_confidence: false,
        }
    }

    pub fn fitted(value: f64, low_confidence: bool) -> Result<Self> {
        Ok(Self {
            value: from_f64(value)?,
            source: A0Source::Fitted,
            exact: false,
            low_confidence,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingProfile {
    pub n: usize,
    pub d: Q,
    pub o: u32,
    pub a0: Q,
    pub a0_source: A0Source,
    pub d0: Option<usize>,
    pub g: Q,
    pub k: Q,
    pub case: CaseFlag,
    pub hypotheses: Hypotheses,
    /// All of `a0`, `g` are exact rationals.
    pub exact: bool,
    pub low_confidence: bool,
}

impl SmoothingProfile {
    /// `max(o, 2)`.
    pub fn c2(&self) -> Q {
        qi(i64::from(self.o.max(2)))
    }

    /// `1 / max(o, 2)`.
    pub fn critical(&self) -> Q {
        Q::one() / self.c2()
    }
}

/// Compares two values, treating anything within [`TOLERANCE`] as undecided when inexact.
fn compare(a: &Q, b: &Q, exact: bool) -> Option<Ordering> {
    if exact {
        Some(a.cmp(b))
    } else {
        let diff = to_f64(&(a - b));
        if diff.abs() <= TOLERANCE {
            None
        } else if diff < 0.0 {
            Some(Ordering::Less)
        } else {
            Some(Ordering::Greater)
        }
    }
}

pub fn build_profile(
    d: Q,
    o: u32,
    a0: A0Input,
    d0: Option<usize>,
    blocks: &BlockStructure,
    kernel_bounded_below: bool,
) -> Result<SmoothingProfile> {
    if !a0.value.is_positive() {
        return Err(Error::Input(format!(
            "a0 must be positive, got {}",
            to_f64(&a0.value)
        )));
    }
    let mut g = a0.value.clone();
    for b in blocks.blocks() {
        let cap = qi(b.size() as i64) - &b.alpha;
        if cap < g {
            g = cap;
        }
    }
    // when g is pinned by some l_i - alpha_i it is exact even if a0 is not
    let exact = a0.exact || g != a0.value;
    let crit = Q::one() / qi(i64::from(o.max(2)));
    let case = match compare(&g, &crit, exact) {
        Some(Ordering::Less) => CaseFlag::Subcritical,
        Some(Ordering::Equal) | None => CaseFlag::Critical,
        Some(Ordering::Greater) => CaseFlag::Supercritical,
    };
    let hypotheses = Hypotheses {
        all_alpha_zero: blocks.all_alpha_zero(),
        kernel_bounded_below,
        g_at_most_critical: case != CaseFlag::Supercritical,
    };
    Ok(SmoothingProfile {
        n: blocks.dim(),
        d,
        o,
        a0: a0.value,
        a0_source: a0.source,
        d0,
        g,
        k: blocks.k(),
        case,
        hypotheses,
        exact,
        low_confidence: a0.low_confidence,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point3 {
    pub x: Q,
    pub y: Q,
    pub z: Q,
}

impl Point3 {
    pub fn new(x: Q, y: Q, z: Q) -> Self {
        Self { x, y, z }
    }

    /// Reflection `(x, y, z) -> (1 - y, 1 - x, z)` across the plane `x + y = 1`.
    pub fn reflect(&self) -> Self {
        Self::new(Q::one() - &self.y, Q::one() - &self.x, self.z.clone())
    }
}

/// The plane `(g + k)(x - y) + z = g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane3 {
    pub g: Q,
    pub k: Q,
}

impl Plane3 {
    pub fn height(&self, x: &Q, y: &Q) -> Q {
        &self.g - (&self.g + &self.k) * (x - y)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (&self.g + &self.k) * (&p.x - &p.y) + &p.z == self.g
    }

    /// `c` in the `z = 0` trace `y = x - c`.
    pub fn zero_level_offset(&self) -> Q {
        &self.g / (&self.g + &self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub label: String,
    pub vertices: Vec<Point3>,
}

impl Piece {
    fn triangle(label: &str, a: Point3, b: Point3, c: Point3) -> Self {
        Self {
            label: label.into(),
            vertices: vec![a, b, c],
        }
    }

    /// Height of the triangle above `(x, y)` when `(x, y)` lies in its closed shadow.
    pub fn height_at(&self, x: &Q, y: &Q) -> Option<Q> {
        let [a, b, c] = [&self.vertices[0], &self.vertices[1], &self.vertices[2]];
        let det = (&b.x - &a.x) * (&c.y - &a.y) - (&c.x - &a.x) * (&b.y - &a.y);
        if det.is_zero() {
            return None;
        }
        let l1 = ((x - &a.x) * (&c.y - &a.y) - (&c.x - &a.x) * (y - &a.y)) / &det;
        let l2 = ((&b.x - &a.x) * (y - &a.y) - (x - &a.x) * (&b.y - &a.y)) / &det;
        let l0 = Q::one() - &l1 - &l2;
        if l0.is_negative() || l1.is_negative() || l2.is_negative() {
            return None;
        }
        Some(l0 * &a.z + l1 * &b.z + l2 * &c.z)
    }
}

/// Which statement a verdict rests on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `L^p -> L^q_{-gamma}` for `p < q` and `gamma > k`.
    CornerEstimate,
    /// Below the interpolation surface, over the named piece.
    Surface { piece: String },
    /// `L^p -> L^p_s` for `(1/p, s)` under the diagonal triangle `B`.
    DiagonalTriangle,
    /// Strictly above the plane `P` with every sharpness hypothesis satisfied.
    PlaneObstruction,
    /// `p = q`, kernel comparable to its weight from below, `g < 1` and `s > g`.
    DiagonalObstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    ProvablyBounded,
    ProvablyUnbounded,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSet {
    pub case: CaseFlag,
    pub plane: Plane3,
    /// `Z, Z1, Z2` below critical, otherwise `Z3, Z4`.
    pub pieces: Vec<Piece>,
    /// Endpoints of the open segment `L` (critical and supercritical only).
    pub segment_l: Option<(Point3, Point3)>,
    /// Vertices `(x, s)` of the open triangle `A`.
    pub triangle_a: Vec<(Q, Q)>,
    /// Vertices `(x, s)` of `B = A ∩ {s < g}`.
    pub region_b: Vec<(Q, Q)>,
    g: Q,
    k: Q,
    c2: Q,
    n: usize,
    exact: bool,
    hypotheses: Hypotheses,
}

pub fn build_regions(profile: &SmoothingProfile) -> RegionSet {
    let g = profile.g.clone();
    let k = profile.k.clone();
    let c2 = profile.c2();
    let c = &c2 / qi(2);
    let zero = Q::zero;
    let one = Q::one;
    let corner = || Point3::new(one(), zero(), -k.clone());
    let plane = Plane3 {
        g: g.clone(),
        k: k.clone(),
    };
    let (pieces, segment_l) = if profile.case == CaseFlag::Subcritical {
        let cg = &c * &g;
        let left = Point3::new(cg.clone(), cg.clone(), g.clone());
        let right = Point3::new(one() - &cg, one() - &cg, g.clone());
        (
            vec![
                Piece::triangle("Z", left.clone(), right.clone(), corner()),
                Piece::triangle("Z1", Point3::new(zero(), zero(), zero()), corner(), left),
                Piece::triangle("Z2", Point3::new(one(), one(), zero()), corner(), right),
            ],
            None,
        )
    } else {
        let half = Q::new(1.into(), 2.into());
        let apex = Point3::new(half.clone(), half, one() / &c2);
        (
            vec![
                Piece::triangle("Z3", Point3::new(zero(), zero(), zero()), corner(), apex.clone()),
                Piece::triangle("Z4", Point3::new(one(), one(), zero()), corner(), apex.clone()),
            ],
            Some((apex, corner())),
        )
    };

    let half = Q::new(1.into(), 2.into());
    let top = one() / &c2;
    let triangle_a = vec![(half, top.clone()), (zero(), zero()), (one(), zero())];
    let region_b = if g < top {
        let cg = &c * &g;
        vec![
            (zero(), zero()),
            (one(), zero()),
            (one() - &cg, g.clone()),
            (cg, g.clone()),
        ]
    } else {
        vec![(zero(), zero()), (one(), zero()), triangle_a[0].clone()]
    };

    RegionSet {
        case: profile.case,
        plane,
        pieces,
        segment_l,
        triangle_a,
        region_b,
        g,
        k,
        c2,
        n: profile.n,
        exact: profile.exact,
        hypotheses: profile.hypotheses,
    }
}

impl RegionSet {
    /// Height of the interpolation surface over `(x, y)` with `0 <= y <= x <= 1`.
    pub fn surface_height(&self, x: &Q, y: &Q) -> Option<(Q, &str)> {
        self.pieces
            .iter()
            .find_map(|p| p.height_at(x, y).map(|h| (h, p.label.as_str())))
    }

    /// Upper edge of `B` over the diagonal: `min((2/max(o,2)) min(x, 1-x), g)`.
    pub fn diagonal_height(&self, x: &Q) -> Q {
        let side = if *x < Q::one() - x {
            x.clone()
        } else {
            Q::one() - x
        };
        let h = qi(2) * side / &self.c2;
        if h < self.g {
            h
        } else {
            self.g.clone()
        }
    }

    fn extension_note(&self) -> Option<String> {
        let n1 = qi(self.n as i64 + 1);
        let threshold = if self.case == CaseFlag::Subcritical {
            &n1 - qi(2) * &self.g
        } else {
            &n1 - qi(2) / &self.c2
        };
        (self.k > threshold).then(|| {
            "k exceeds the Sobolev-embedding threshold; regions enlarged by embedding are not included and the plane obstruction may fail there".to_string()
        })
    }

    pub fn classify(&self, x: f64, y: f64, s: f64) -> Result<Verdict> {
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return Err(Error::Domain(format!(
                "(1/p, 1/q) = ({x}, {y}) must lie in the open unit square"
            )));
        }
        if !s.is_finite() {
            return Err(Error::Domain(format!("s = {s} is not finite")));
        }
        let (x, y, s) = (from_f64(x)?, from_f64(y)?, from_f64(s)?);
        Ok(self.classify_exact(&x, &y, &s))
    }

    /// Classification of an exact query point with `0 < x, y < 1`.
    pub fn classify_exact(&self, x: &Q, y: &Q, s: &Q) -> Verdict {
        let notes: Vec<String> = self.extension_note().into_iter().collect();
        let verdict = |kind, witness| Verdict {
            verdict: kind,
            witness,
            notes: notes.clone(),
        };

        if y < x {
            if compare(s, &-self.k.clone(), self.exact) == Some(Ordering::Less) {
                return verdict(VerdictKind::ProvablyBounded, Some(Witness::CornerEstimate));
            }
            if let Some((h, label)) = self.surface_height(x, y) {
                if compare(s, &h, self.exact) == Some(Ordering::Less) {
                    return verdict(
                        VerdictKind::ProvablyBounded,
                        Some(Witness::Surface {
                            piece: label.to_string(),
                        }),
                    );
                }
            }
        } else if x == y {
            let h = self.diagonal_height(x);
            if compare(s, &h, self.exact) == Some(Ordering::Less) {
                return verdict(VerdictKind::ProvablyBounded, Some(Witness::DiagonalTriangle));
            }
        }

        if self.hypotheses.all() {
            let zp = self.plane.height(x, y);
            if compare(s, &zp, self.exact) == Some(Ordering::Greater) {
                return verdict(VerdictKind::ProvablyUnbounded, Some(Witness::PlaneObstruction));
            }
        }
        if x == y
            && self.hypotheses.kernel_bounded_below
            && compare(&self.g, &Q::one(), self.exact) == Some(Ordering::Less)
            && compare(s, &self.g, self.exact) == Some(Ordering::Greater)
        {
            return verdict(VerdictKind::ProvablyUnbounded, Some(Witness::DiagonalObstruction));
        }
        verdict(VerdictKind::Unknown, None)
    }

    pub fn g(&self) -> &Q {
        &self.g
    }

    pub fn k(&self) -> &Q {
        &self.k
    }

    pub fn c2(&self) -> &Q {
        &self.c2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether every boundary is known exactly (no fitted `a0`).
    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn hypotheses(&self) -> Hypotheses {
        self.hypotheses
    }
}

pub fn classify(regions: &RegionSet, x: f64, y: f64, s: f64) -> Result<Verdict> {
    regions.classify(x, y, s)
}

/// The `s = 0` slice of the bounded region: an open convex polygon in the
/// `(1/p, 1/q)` square, plus the trace `y = x - c` of the plane `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    /// Counterclockwise, starting from `(0, 0)`.
    pub vertices: Vec<(Q, Q)>,
    pub excluded_offset: Q,
}

pub fn lq_slice(regions: &RegionSet) -> Slice {
    let mut pts: Vec<(Q, Q)> = Vec::new();
    for piece in &regions.pieces {
        let v = &piece.vertices;
        for i in 0..3 {
            let a = &v[i];
            if !a.z.is_negative() {
                pts.push((a.x.clone(), a.y.clone()));
            }
            let b = &v[(i + 1) % 3];
            if (a.z.is_positive() && b.z.is_negative()) || (a.z.is_negative() && b.z.is_positive()) {
                let t = &a.z / (&a.z - &b.z);
                pts.push((
                    &a.x + &t * (&b.x - &a.x),
                    &a.y + &t * (&b.y - &a.y),
                ));
            }
        }
    }
    Slice {
        vertices: convex_hull(pts),
        excluded_offset: regions.plane.zero_level_offset(),
    }
}

fn cross(o: &(Q, Q), a: &(Q, Q), b: &(Q, Q)) -> Q {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Exact convex hull (monotone chain), counterclockwise, collinear points dropped.
pub fn convex_hull(mut pts: Vec<(Q, Q)>) -> Vec<(Q, Q)> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(Q, Q)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<(Q, Q)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn example1(l: i64, alpha: Q) -> SmoothingProfile {
        let blocks = BlockStructure::singletons(&[alpha.clone()]).unwrap();
        let a0 = (Q::one() - &alpha) / qi(l);
        build_profile(qi(l), 0, A0Input::predicted(a0), Some(0), &blocks, true).unwrap()
    }

    fn example2(d: i64) -> SmoothingProfile {
        let blocks = BlockStructure::unweighted(2);
        build_profile(qi(d), 2, A0Input::predicted(q(1, d)), None, &blocks, true).unwrap()
    }

    fn p3(x: Q, y: Q, z: Q) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn example_one_profile() {
        let p = example1(3, q(1, 2));
        assert_eq!(p.g, q(1, 6));
        assert_eq!(p.k, q(3, 2));
        assert_eq!(p.case, CaseFlag::Subcritical);
        assert!(!p.hypotheses.all_alpha_zero);
        let p = example1(2, Q::zero());
        assert_eq!(p.case, CaseFlag::Critical);
    }

    #[test]
    fn squared_parabola_is_supercritical() {
        let blocks = BlockStructure::unweighted(2);
        let p = build_profile(q(4, 3), 2, A0Input::predicted(q(3, 4)), None, &blocks, true).unwrap();
        assert_eq!(p.g, q(3, 4));
        assert_eq!(p.case, CaseFlag::Supercritical);
        assert!(!p.hypotheses.g_at_most_critical);
    }

    #[test]
    fn example_two_vertices_and_plane() {
        for d in [3, 4, 5] {
            let r = build_regions(&example2(d));
            let z = &r.pieces[0];
            assert_eq!(z.label, "Z");
            let (a, b) = (q(1, d), q(d - 1, d));
            assert_eq!(
                z.vertices,
                vec![
                    p3(a.clone(), a.clone(), a.clone()),
                    p3(b.clone(), b, a),
                    p3(qi(1), qi(0), qi(-1))
                ]
            );
            assert!(z.vertices.iter().all(|v| r.plane.contains(v)));
            // z = 1/d + ((d+1)/d)(y - x)
            let (x, y) = (q(1, 3), q(1, 7));
            assert_eq!(r.plane.height(&x, &y), q(1, d) + q(d + 1, d) * (&y - &x));
        }
    }

    #[test]
    fn z1_z2_are_mirror_images() {
        let r = build_regions(&example1(4, q(1, 2)));
        let z1: Vec<Point3> = r.pieces[1].vertices.iter().map(Point3::reflect).collect();
        let mut z1s = z1.clone();
        let mut z2s = r.pieces[2].vertices.clone();
        let key = |p: &Point3| (p.x.clone(), p.y.clone(), p.z.clone());
        z1s.sort_by_key(key);
        z2s.sort_by_key(key);
        assert_eq!(z1s, z2s);
    }

    #[test]
    fn slices_match_closed_forms() {
        for l in [3i64, 4, 5] {
            let s = lq_slice(&build_regions(&example1(l, Q::zero())));
            assert_eq!(
                s.vertices,
                vec![
                    (qi(0), qi(0)),
                    (q(2, l + 1), q(1, l + 1)),
                    (q(l, l + 1), q(l - 1, l + 1)),
                    (qi(1), qi(1))
                ]
            );
            assert_eq!(s.excluded_offset, q(1, l + 1));
        }
        let s = lq_slice(&build_regions(&example1(2, Q::zero())));
        assert_eq!(s.vertices, vec![(qi(0), qi(0)), (q(2, 3), q(1, 3)), (qi(1), qi(1))]);
    }

    #[test]
    fn classification_examples() {
        let r = build_regions(&example2(3));
        let v = r.classify(0.5, 0.25, -0.01).unwrap();
        assert_eq!(v.verdict, VerdictKind::ProvablyBounded);
        assert_eq!(v.witness, Some(Witness::Surface { piece: "Z".into() }));
        let v = r.classify(0.5, 0.25, 0.01).unwrap();
        assert_eq!(v.verdict, VerdictKind::ProvablyUnbounded);
        assert_eq!(v.witness, Some(Witness::PlaneObstruction));
        // exactly on P
        assert_eq!(r.classify(0.5, 0.25, 0.0).unwrap().verdict, VerdictKind::Unknown);

        let g = 1.0 / 3.0;
        let v = r.classify(0.5, 0.5, g / 2.0).unwrap();
        assert_eq!(v.verdict, VerdictKind::ProvablyBounded);
        assert_eq!(v.witness, Some(Witness::DiagonalTriangle));
        let v = r.classify(0.5, 0.5, g + 0.1).unwrap();
        assert_eq!(v.verdict, VerdictKind::ProvablyUnbounded);

        assert!(matches!(r.classify(0.0, 0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(r.classify(0.5, 1.0, 0.0), Err(Error::Domain(_))));
        let v = r.classify(0.9, 0.1, -5.0).unwrap();
        assert_eq!(v.witness, Some(Witness::CornerEstimate));
    }

    #[test]
    fn weighted_kernel_only_has_the_diagonal_obstruction() {
        let r = build_regions(&example1(3, q(1, 2)));
        assert_eq!(r.classify(0.5, 0.25, 0.9).unwrap().verdict, VerdictKind::Unknown);
        let v = r.classify(0.5, 0.5, 0.5).unwrap();
        assert_eq!(v.witness, Some(Witness::DiagonalObstruction));
    }

    #[test]
    fn approximate_profile_has_a_boundary_band() {
        let blocks = BlockStructure::unweighted(2);
        let a0 = A0Input::fitted(1.0 / 3.0, false).unwrap();
        let p = build_profile(qi(3), 0, a0, Some(0), &blocks, true).unwrap();
        assert!(!p.exact);
        let r = build_regions(&p);
        let zp = 1.0 / 3.0 + (4.0 / 3.0) * (0.25 - 0.5);
        assert_eq!(r.classify(0.5, 0.25, zp + 1e-12).unwrap().verdict, VerdictKind::Unknown);
        assert_eq!(
            r.classify(0.5, 0.25, zp + 1e-6).unwrap().verdict,
            VerdictKind::ProvablyUnbounded
        );
    }

    #[test]
    fn extension_note_when_k_is_large() {
        // one 2-block with alpha = 19/10: k = 29/10 > n + 1 - 2g = 14/5
        let blocks = BlockStructure::new(
            2,
            vec![crate::poly::Block { vars: vec![0, 1], alpha: q(19, 10) }],
        )
        .unwrap();
        let p = build_profile(qi(2), 0, A0Input::user(q(1, 2)), None, &blocks, true).unwrap();
        assert_eq!(p.g, q(1, 10));
        let r = build_regions(&p);
        assert!(!r.classify(0.5, 0.25, 0.0).unwrap().notes.is_empty());
        let r = build_regions(&example2(3));
        assert!(r.classify(0.5, 0.25, 0.0).unwrap().notes.is_empty());
    }
}
