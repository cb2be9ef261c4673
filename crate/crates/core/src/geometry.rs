//! Newton polyhedra: vertices, compact faces, Newton distance, the diagonal
//! supporting normal, and the coordinate rescaling used for one-dimensional
//! singular blocks.
//!
//! Everything here is exact. Each membership or optimality question is a
//! small rational LP (see [`crate::lp`]).

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::poly::{BlockStructure, SparsePolynomial};
use crate::rational::{self, dot, primitive_integer_ray, Q};

/// A point of `Q^n`; exponents of rescaled polyhedra need not be integers.
pub type Point = Vec<Q>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolyhedron {
    dim: usize,
    /// All generating points (exponents of nonzero terms), sorted.
    points: Vec<Point>,
    /// The subset of `points` that are vertices, sorted.
    vertices: Vec<Point>,
}

/// A compact face `{x in N : normal . x = value}` with `normal > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Face {
    /// Primitive integer normal, strictly positive.
    #[serde(with = "rational::serde_qvec")]
    pub normal: Vec<Q>,
    #[serde(with = "rational::serde_q")]
    pub value: Q,
    /// Vertices of the polyhedron on this face.
    #[serde(serialize_with = "serialize_points")]
    pub vertices: Vec<Point>,
    /// Every generating point on this face (vertices and interior exponents).
    #[serde(serialize_with = "serialize_points")]
    pub members: Vec<Point>,
    #[serde(rename = "dim")]
    pub dimension: usize,
}

fn serialize_points<S: serde::Serializer>(
    pts: &[Point],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(pts.len()))?;
    for p in pts {
        let texts: Vec<String> = p.iter().map(rational::format_rational).collect();
        seq.serialize_element(&texts)?;
    }
    seq.end()
}

/// A supporting hyperplane of the polyhedron through the diagonal point `(d, ..., d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalSupport {
    #[serde(with = "rational::serde_q")]
    pub d: Q,
    /// Nonnegative normal with `sum b_i = 1`.
    #[serde(with = "rational::serde_qvec")]
    pub b: Vec<Q>,
    /// `min over vertices of b . v`, which equals `d * sum b_i`.
    #[serde(with = "rational::serde_q")]
    pub value: Q,
}

impl DiagonalSupport {
    pub fn b_sum(&self) -> Q {
        self.b.iter().sum()
    }
}

pub fn build_polyhedron(poly: &SparsePolynomial) -> Result<NewtonPolyhedron> {
    NewtonPolyhedron::from_polynomial(poly)
}

impl NewtonPolyhedron {
    pub fn from_polynomial(poly: &SparsePolynomial) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::Input(
                "the zero polynomial has no Newton polyhedron".into(),
            ));
        }
        Self::from_points(poly.dim(), poly.exponents().map(|e| e.to_point()).collect())
    }

    /// Newton polyhedron of an arbitrary finite set of nonnegative points.
    pub fn from_points(dim: usize, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPolyhedron("no generating points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidPolyhedron(
                    "generating points must be nonnegative".into(),
                ));
            }
        }
        let points: Vec<Point> = points
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let vertices = points
            .iter()
            .enumerate()
            .filter(|(i, p)| {
                let others: Vec<&Point> = points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j != i)
                    .map(|(_, q)| q)
                    .collect();
                !in_upper_hull(dim, p, &others)
            })
            .map(|(_, p)| p.clone())
            .collect();
        Ok(Self {
            dim,
            points,
            vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Whether `x` lies in `conv(vertices) + R^n_+`.
    pub fn contains(&self, x: &[Q]) -> bool {
        let refs: Vec<&Point> = self.vertices.iter().collect();
        in_upper_hull(self.dim, x, &refs)
    }

    /// Smallest `t` with `(t, ..., t)` in the polyhedron.
    pub fn newton_distance(&self) -> Q {
        let n = self.dim;
        let k = self.vertices.len();
        // variables: t, lambda_1..k, mu_1..n
        let nv = 1 + k + n;
        let mut obj = vec![Q::zero(); nv];
        obj[0] = Q::one();
        let mut lp = LinearProgram::new(nv).minimize(obj);
        for i in 0..n {
            let mut row = vec![Q::zero(); nv];
            row[0] = Q::one();
            for (j, v) in self.vertices.iter().enumerate() {
                row[1 + j] = -v[i].clone();
            }
            row[1 + k + i] = -Q::one();
            lp.constrain(row, Relation::Eq, Q::zero());
        }
        let mut sum = vec![Q::zero(); nv];
        for c in sum.iter_mut().skip(1).take(k) {
            *c = Q::one();
        }
        lp.constrain(sum, Relation::Eq, Q::one());
        let (_, value) = lp
            .solve()
            .optimal()
            .expect("the diagonal always meets a Newton polyhedron");
        value
    }

    /// Lexicographically smallest `b >= 0`, `sum b = 1`, with `b . v >= d` on every vertex.
    pub fn diagonal_support(&self) -> DiagonalSupport {
        let d = self.newton_distance();
        let n = self.dim;
        let mut fixed: Vec<Q> = Vec::with_capacity(n);
        for i in 0..n {
            let mut obj = vec![Q::zero(); n];
            obj[i] = Q::one();
            let mut lp = LinearProgram::new(n).minimize(obj);
            lp.constrain(vec![Q::one(); n], Relation::Eq, Q::one());
            for v in &self.vertices {
                lp.constrain(v.clone(), Relation::Ge, d.clone());
            }
            for (j, val) in fixed.iter().enumerate() {
                let mut row = vec![Q::zero(); n];
                row[j] = Q::one();
                lp.constrain(row, Relation::Eq, val.clone());
            }
            let (x, _) = lp
                .solve()
                .optimal()
                .expect("LP duality guarantees a supporting normal through (d,...,d)");
            fixed.push(x[i].clone());
        }
        let value = self
            .vertices
            .iter()
            .map(|v| dot(&fixed, v))
            .min()
            .expect("nonempty vertex set");
        debug_assert_eq!(value, &d * fixed.iter().sum::<Q>());
        DiagonalSupport {
            d,
            b: fixed,
            value,
        }
    }

    /// All compact faces, each listed once, sorted by dimension then vertex set.
    pub fn compact_faces(&self) -> Vec<Face> {
        let nv = self.vertices.len();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
        let mut faces: Vec<(Vec<usize>, Vec<Q>)> = Vec::new();

        for i in 0..nv {
            if let Some((set, normal)) = self.face_closure(&[i]) {
                if seen.insert(set.clone()) {
                    queue.push_back(set.clone());
                    faces.push((set, normal));
                }
            }
        }
        while let Some(face) = queue.pop_front() {
            for j in 0..nv {
                if face.contains(&j) {
                    continue;
                }
                let mut candidate = face.clone();
                candidate.push(j);
                candidate.sort_unstable();
                if seen.contains(&candidate) {
                    continue;
                }
                if let Some((set, normal)) = self.face_closure(&candidate) {
                    if seen.insert(set.clone()) {
                        queue.push_back(set.clone());
                        faces.push((set, normal));
                    }
                }
            }
        }

        let mut out: Vec<Face> = faces
            .into_iter()
            .map(|(set, normal)| self.make_face(&set, normal))
            .collect();
        out.sort_by(|a, b| {
            a.dimension
                .cmp(&b.dimension)
                .then_with(|| a.vertices.cmp(&b.vertices))
        });
        out
    }

    fn make_face(&self, vertex_set: &[usize], normal: Vec<Q>) -> Face {
        let normal = primitive_integer_ray(&normal);
        let vertices: Vec<Point> = vertex_set.iter().map(|&i| self.vertices[i].clone()).collect();
        let value = dot(&normal, &vertices[0]);
        let members: Vec<Point> = self
            .points
            .iter()
            .filter(|p| dot(&normal, p) == value)
            .cloned()
            .collect();
        let base = &members[0];
        let diffs: Vec<Vec<Q>> = members
            .iter()
            .skip(1)
            .map(|m| m.iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let dimension = rational::rank(&diffs);
        Face {
            normal,
            value,
            vertices,
            members,
            dimension,
        }
    }

    /// Smallest compact face containing the given vertices, with an exposing
    /// strictly positive normal; `None` when no compact face contains them.
    fn face_closure(&self, set: &[usize]) -> Option<(Vec<usize>, Vec<Q>)> {
        let n = self.dim;
        let base = &self.vertices[set[0]];
        let outside: Vec<usize> = (0..self.vertices.len())
            .filter(|j| !set.contains(j))
            .collect();
        // variables: w' (n) with w = 1 + w', then slack caps y_j for outside vertices
        let nv = n + outside.len();
        let mut obj = vec![Q::zero(); nv];
        for c in obj.iter_mut().skip(n) {
            *c = -Q::one();
        }
        let mut lp = LinearProgram::new(nv).minimize(obj);
        for &i in &set[1..] {
            let diff: Vec<Q> = self.vertices[i].iter().zip(base).map(|(a, b)| a - b).collect();
            let shift: Q = -diff.iter().sum::<Q>();
            let mut row = vec![Q::zero(); nv];
            row[..n].clone_from_slice(&diff);
            lp.constrain(row, Relation::Eq, shift);
        }
        for (slot, &j) in outside.iter().enumerate() {
            let diff: Vec<Q> = self.vertices[j].iter().zip(base).map(|(a, b)| a - b).collect();
            let shift: Q = -diff.iter().sum::<Q>();
            let mut row = vec![Q::zero(); nv];
            row[..n].clone_from_slice(&diff);
            row[n + slot] = -Q::one();
            lp.constrain(row, Relation::Ge, shift);
            let mut cap = vec![Q::zero(); nv];
            cap[n + slot] = Q::one();
            lp.constrain(cap, Relation::Le, Q::one());
        }
        let (x, _) = lp.solve().optimal()?;
        let mut members: Vec<usize> = set.to_vec();
        for (slot, &j) in outside.iter().enumerate() {
            if x[n + slot].is_zero() {
                members.push(j);
            }
        }
        members.sort_unstable();
        let normal: Vec<Q> = x[..n].iter().map(|w| w + Q::one()).collect();
        Some((members, normal))
    }

    /// Image under `beta_i -> beta_i / (1 - alpha_i)`; needs one-dimensional blocks.
    pub fn rescale(&self, blocks: &BlockStructure) -> Result<Self> {
        if blocks.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: blocks.dim(),
            });
        }
        if !blocks.all_singletons() {
            return Err(Error::UnsupportedStructure(
                "rescaling needs every block to be one-dimensional (l_i = 1)".into(),
            ));
        }
        self.rescale_by(&blocks.per_variable_alphas()?)
    }

    pub fn rescale_by(&self, alphas: &[Q]) -> Result<Self> {
        if alphas.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alphas.len(),
            });
        }
        if alphas.iter().any(|a| a.is_negative() || *a >= Q::one()) {
            return Err(Error::Input("rescaling exponents must lie in [0, 1)".into()));
        }
        let factors: Vec<Q> = alphas.iter().map(|a| Q::one() / (Q::one() - a)).collect();
        let map = |p: &Point| -> Point { p.iter().zip(&factors).map(|(x, f)| x * f).collect() };
        let mut points: Vec<Point> = self.points.iter().map(map).collect();
        let mut vertices: Vec<Point> = self.vertices.iter().map(map).collect();
        points.sort();
        vertices.sort();
        Ok(Self {
            dim: self.dim,
            points,
            vertices,
        })
    }
}

/// Exact feasibility of `x = sum lambda_j p_j + mu`, `lambda` in the simplex, `mu >= 0`.
fn in_upper_hull(dim: usize, x: &[Q], pts: &[&Point]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let k = pts.len();
    let nv = k + dim;
    let mut lp = LinearProgram::new(nv);
    for i in 0..dim {
        let mut row = vec![Q::zero(); nv];
        for (j, p) in pts.iter().enumerate() {
            row[j] = p[i].clone();
        }
        row[k + i] = Q::one();
        lp.constrain(row, Relation::Eq, x[i].clone());
    }
    let mut sum = vec![Q::zero(); nv];
    for c in sum.iter_mut().take(k) {
        *c = Q::one();
    }
    lp.constrain(sum, Relation::Eq, Q::one());
    lp.solve().is_feasible()
}

/// `f_F`: the terms of `poly` whose exponents lie on `face`.
pub fn face_polynomial(poly: &SparsePolynomial, face: &Face) -> Result<SparsePolynomial> {
    if face.normal.len() != poly.dim() {
        return Err(Error::DimensionMismatch {
            expected: poly.dim(),
            got: face.normal.len(),
        });
    }
    let restricted = poly.restrict(|e| dot(&face.normal, &e.to_point()) == face.value);
    let on_face: BTreeSet<Point> = restricted.exponents().map(|e| e.to_point()).collect();
    let members: BTreeSet<Point> = face.members.iter().cloned().collect();
    if restricted.is_zero() || on_face != members {
        return Err(Error::Input(
            "face does not belong to this polynomial's Newton polyhedron".into(),
        ));
    }
    Ok(restricted)
}

/// Sum of `|t|^v` over the vertices, for convenience.
pub fn star_of(n: &NewtonPolyhedron) -> Result<crate::poly::StarFunction> {
    crate::poly::StarFunction::new(n.vertices())
}

#[allow(dead_code)]
pub(crate) fn diagonal(dim: usize, t: &Q) -> Point {
    vec![t.clone(); dim]
}
