//! Vanishing orders of compact-face polynomials on `(R \ {0})^n`.
//!
//! The order of a zero is read as the smallest `k` for which some `k`-th
//! directional derivative is nonzero there. Faces of dimension at most one
//! reduce to a univariate polynomial and are handled exactly; larger faces
//! are sampled numerically and the result is tagged as such.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{face_polynomial, Face, NewtonPolyhedron};
use crate::poly::SparsePolynomial;
use crate::rational::{dot, primitive_integer_ray, to_f64, Q};
use crate::univariate::UPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Numeric,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceOrder {
    pub face: Face,
    pub order: u32,
    pub method: Method,
    /// Set when a numeric estimate sat close to the decision threshold.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroOrderReport {
    pub per_face: Vec<FaceOrder>,
    /// Maximum of the per-face orders.
    pub computed: u32,
    /// The value used downstream: the override when given, else `computed`.
    #[serde(rename = "o")]
    pub o_of_s: u32,
    pub method: Method,
}

/// Tuning for the sampled path.
#[derive(Debug, Clone, Copy)]
pub struct NumericOptions {
    pub tau: f64,
    pub starts_per_orthant: usize,
    pub directions: usize,
    pub seed: u64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            tau: 1e-6,
            starts_per_orthant: 24,
            directions: 6,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumericOrder {
    pub order: u32,
    pub low_confidence: bool,
    /// Number of converged zeros found across all orthants.
    pub zeros_found: usize,
}

/// Exact path for faces of dimension 0 or 1, numeric otherwise.
pub fn zero_order_on_face(f_face: &SparsePolynomial, face: &Face) -> Result<FaceOrder> {
    if face.dimension <= 1 {
        Ok(FaceOrder {
            face: face.clone(),
            order: zero_order_exact(f_face, face)?,
            method: Method::Exact,
            low_confidence: false,
        })
    } else {
        let r = zero_order_numeric(f_face, face, &NumericOptions::default())?;
        Ok(FaceOrder {
            face: face.clone(),
            order: r.order,
            method: Method::Numeric,
            low_confidence: r.low_confidence,
        })
    }
}

/// Every term of `f_face` has weighted degree `face.value` under `face.normal`.
pub fn is_quasi_homogeneous(f_face: &SparsePolynomial, face: &Face) -> bool {
    f_face
        .exponents()
        .all(|e| dot(&face.normal, &e.to_point()) == face.value)
}

/// Reduces a face polynomial supported on a line `base + j e` to `g(u) = sum c_j u^j`,
/// where `u = t^e`. Returns `g` and the primitive step `e`.
pub fn univariate_reduction(f_face: &SparsePolynomial) -> Result<(UPoly, Vec<Q>)> {
    let pts: Vec<(Vec<Q>, Q)> = f_face
        .terms()
        .map(|(e, c)| (e.to_point(), c.clone()))
        .collect();
    let Some((base, _)) = pts.first() else {
        return Err(Error::Input("empty face polynomial".into()));
    };
    if pts.len() == 1 {
        return Ok((UPoly::new(vec![pts[0].1.clone()]), vec![Q::zero(); base.len()]));
    }
    let diff: Vec<Q> = pts[1].0.iter().zip(base).map(|(a, b)| a - b).collect();
    let step = primitive_integer_ray(&diff);
    let norm2 = dot(&step, &step);
    let mut indexed = Vec::with_capacity(pts.len());
    for (p, c) in &pts {
        let rel: Vec<Q> = p.iter().zip(base).map(|(a, b)| a - b).collect();
        let j = dot(&rel, &step) / &norm2;
        let back: Vec<Q> = step.iter().map(|s| s * &j).collect();
        if back != rel || !j.is_integer() {
            return Err(Error::Input(
                "face polynomial exponents are not collinear".into(),
            ));
        }
        indexed.push((j.to_integer(), c.clone()));
    }
    let jmin = indexed.iter().map(|(j, _)| j.clone()).min().expect("nonempty");
    let len = indexed
        .iter()
        .map(|(j, _)| usize::try_from(j - &jmin).expect("small exponent"))
        .max()
        .expect("nonempty")
        + 1;
    let mut coeffs = vec![Q::zero(); len];
    for (j, c) in indexed {
        coeffs[usize::try_from(j - &jmin).expect("small exponent")] = c;
    }
    Ok((UPoly::new(coeffs), step))
}

/// Exact order for a face polynomial whose exponents are collinear.
pub fn zero_order_exact(f_face: &SparsePolynomial, face: &Face) -> Result<u32> {
    if face.dimension > 1 {
        return Err(Error::Input(format!(
            "exact zero order needs a face of dimension <= 1, got {}",
            face.dimension
        )));
    }
    let (g, step) = univariate_reduction(f_face)?;
    // u = t^step ranges over (0, inf), and over all of R \ {0} when some step entry is odd.
    let negative_reachable = step
        .iter()
        .any(|s| s.to_integer() % num_bigint::BigInt::from(2) != num_bigint::BigInt::zero());
    let (_, g) = g.split_zero_root();
    let mut order = 0u32;
    for (i, part) in g.square_free_decomposition().iter().enumerate() {
        let hits =
            part.count_positive_roots() > 0 || (negative_reachable && part.count_negative_roots() > 0);
        if hits {
            order = (i + 1) as u32;
        }
    }
    Ok(order)
}

/// Sampled order estimate: Newton iterations from random starts on the slice
/// `w . log|t| = 0` in each open orthant, then Taylor coefficients along
/// random directions at every zero found.
pub fn zero_order_numeric(
    f_face: &SparsePolynomial,
    face: &Face,
    opts: &NumericOptions,
) -> Result<NumericOrder> {
    let n = f_face.dim();
    if face.normal.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: face.normal.len(),
        });
    }
    let terms = f_face.float_terms();
    let w: Vec<f64> = face.normal.iter().map(to_f64).collect();
    let cap = f_face.max_degree();
    if terms.len() == 1 {
        return Ok(NumericOrder {
            order: 0,
            low_confidence: false,
            zeros_found: 0,
        });
    }

    let mut best = NumericOrder {
        order: 0,
        low_confidence: false,
        zeros_found: 0,
    };
    for orthant in 0..(1u64 << n) {
        let signs: Vec<f64> = (0..n)
            .map(|i| if orthant >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(orthant);
        for _ in 0..opts.starts_per_orthant {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut t: Vec<f64> = x.iter().zip(&signs).map(|(xi, s)| s * xi.exp()).collect();
            normalize_to_slice(&mut t, &w);
            let Some(root) = newton_polish(&terms, &w, t) else {
                continue;
            };
            best.zeros_found += 1;
            let (order, shaky) = order_at(&terms, &root, cap, opts, &mut rng);
            if order > best.order {
                best.order = order;
                best.low_confidence = shaky;
            } else if order == best.order {
                best.low_confidence |= shaky;
            }
        }
    }
    Ok(best)
}

fn eval_with_scale(terms: &[(Vec<u32>, f64)], t: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = t.len();
    let mut f = 0.0;
    let mut scale = 0.0;
    let mut grad = vec![0.0; n];
    for (e, c) in terms {
        let m: f64 = e.iter().zip(t).map(|(&a, &x)| x.powi(a as i32)).product();
        f += c * m;
        scale += (c * m).abs();
        for i in 0..n {
            if e[i] == 0 {
                continue;
            }
            let mut d = c * e[i] as f64;
            for (j, (&a, &x)) in e.iter().zip(t).enumerate() {
                let p = if j == i { a - 1 } else { a };
                d *= x.powi(p as i32);
            }
            grad[i] += d;
        }
    }
    (f, scale, grad)
}

fn normalize_to_slice(t: &mut [f64], w: &[f64]) {
    let wx: f64 = t.iter().zip(w).map(|(x, wi)| wi * x.abs().ln()).sum();
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let s = -wx / ww;
    for (x, wi) in t.iter_mut().zip(w) {
        *x *= (s * wi).exp();
    }
}

/// Damped Newton on `f = 0`, kept on the slice and inside the orthant.
fn newton_polish(terms: &[(Vec<u32>, f64)], w: &[f64], mut t: Vec<f64>) -> Option<Vec<f64>> {
    const MAX_ITERS: usize = 400;
    let (mut f, mut scale, mut grad) = eval_with_scale(terms, &t);
    let mut converged_at = None;
    for iter in 0..MAX_ITERS {
        if f == 0.0 {
            return Some(t);
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 || !g2.is_finite() {
            break;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let mut cand: Vec<f64> = t
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - step * f * g / g2)
                .collect();
            if cand.iter().zip(&t).any(|(a, b)| a.signum() != b.signum() || *a == 0.0) {
                step *= 0.5;
                continue;
            }
            normalize_to_slice(&mut cand, w);
            let (fc, sc, gc) = eval_with_scale(terms, &cand);
            if fc.abs() < f.abs() {
                t = cand;
                f = fc;
                scale = sc;
                grad = gc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if t.iter().any(|x| x.abs().ln().abs() > 40.0) {
            return None;
        }
        if f.abs() <= 1e-12 * scale && converged_at.is_none() {
            converged_at = Some(iter);
        }
        if !improved || converged_at.is_some_and(|c| iter > c + 60) {
            break;
        }
    }
    converged_at.map(|_| t)
}

/// Taylor coefficients of `h -> sum c_e prod (t_i + h v_i)^{e_i}` up to `cap`,
/// and the same with every quantity replaced by its absolute value.
fn taylor(terms: &[(Vec<u32>, f64)], t: &[f64], v: &[f64], cap: usize) -> (Vec<f64>, Vec<f64>) {
    let mut total = vec![0.0; cap + 1];
    let mut abs_total = vec![0.0; cap + 1];
    for (e, c) in terms {
        let mut prod = vec![0.0; cap + 1];
        let mut abs_prod = vec![0.0; cap + 1];
        prod[0] = *c;
        abs_prod[0] = c.abs();
        for (i, &a) in e.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let factor = binomial_expansion(t[i], v[i], a, cap);
            let abs_factor = binomial_expansion(t[i].abs(), v[i].abs(), a, cap);
            prod = truncated_mul(&prod, &factor, cap);
            abs_prod = truncated_mul(&abs_prod, &abs_factor, cap);
        }
        for k in 0..=cap {
            total[k] += prod[k];
            abs_total[k] += abs_prod[k];
        }
    }
    (total, abs_total)
}

fn binomial_expansion(x: f64, v: f64, a: u32, cap: usize) -> Vec<f64> {
    let mut out = vec![0.0; cap + 1];
    let mut binom = 1.0;
    for k in 0..=(a as usize).min(cap) {
        out[k] = binom * x.powi((a as usize - k) as i32) * v.powi(k as i32);
        binom = binom * (a as usize - k) as f64 / (k + 1) as f64;
    }
    out
}

fn truncated_mul(a: &[f64], b: &[f64], cap: usize) -> Vec<f64> {
    let mut out = vec![0.0; cap + 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(cap + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn order_at(
    terms: &[(Vec<u32>, f64)],
    t: &[f64],
    cap: u32,
    opts: &NumericOptions,
    rng: &mut ChaCha8Rng,
) -> (u32, bool) {
    let n = t.len();
    let cap_us = cap as usize;
    let mut best: Option<(u32, bool)> = None;
    for _ in 0..opts.directions {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        // scale the direction to the point so every coordinate moves comparably
        for (vi, ti) in v.iter_mut().zip(t) {
            *vi = *vi / norm * ti.abs();
        }
        let (c, a) = taylor(terms, t, &v, cap_us);
        let ratio = |k: usize| if a[k] > 0.0 { c[k].abs() / a[k] } else { 0.0 };
        let found = (0..=cap_us).find(|&k| ratio(k) > opts.tau);
        let (k, shaky) = match found {
            Some(k) => {
                let below = (0..k).any(|j| ratio(j) > opts.tau * 1e-3);
                (k as u32, below || ratio(k) < opts.tau * 1e3)
            }
            None => (cap, true),
        };
        best = match best {
            Some((bk, bs)) if bk < k => Some((bk, bs)),
            Some((bk, bs)) if bk == k => Some((k, bs && shaky)),
            _ => Some((k, shaky)),
        };
    }
    best.unwrap_or((0, true))
}

/// `o(S)` over all compact faces; `override_o` replaces the reported value.
pub fn o_of(
    poly: &SparsePolynomial,
    polyhedron: &NewtonPolyhedron,
    override_o: Option<u32>,
) -> Result<ZeroOrderReport> {
    let faces = polyhedron.compact_faces();
    let per_face = faces
        .par_iter()
        .map(|face| {
            let fp = face_polynomial(poly, face)?;
            zero_order_on_face(&fp, face)
        })
        .collect::<Result<Vec<_>>>()?;
    let computed = per_face.iter().map(|f| f.order).max().unwrap_or(0);
    let (o_of_s, method) = match override_o {
        Some(o) => (o, Method::UserSupplied),
        None => (
            computed,
            if per_face.iter().any(|f| f.method == Method::Numeric) {
                Method::Numeric
            } else {
                Method::Exact
            },
        ),
    };
    Ok(ZeroOrderReport {
        per_face,
        computed,
        o_of_s,
        method,
    })
}

/// Whether `value` is a strictly positive vector (used by checks on face normals).
pub fn strictly_positive(v: &[Q]) -> bool {
    v.iter().all(Signed::is_positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_polyhedron;

    fn poly(dim: usize, terms: &[(&[u32], i64)]) -> SparsePolynomial {
        SparsePolynomial::from_int_terms(dim, terms).unwrap()
    }

    fn edge_of(p: &SparsePolynomial) -> Face {
        build_polyhedron(p)
            .unwrap()
            .compact_faces()
            .into_iter()
            .find(|f| f.dimension == 1)
            .unwrap()
    }

    #[test]
    fn squared_parabola_has_order_two() {
        let p = poly(2, &[(&[4, 0], 1), (&[2, 1], -2), (&[0, 2], 1)]);
        let face = edge_of(&p);
        let (g, _) = univariate_reduction(&p).unwrap();
        assert_eq!(g.square_free_decomposition().len(), 2);
        assert_eq!(zero_order_exact(&p, &face).unwrap(), 2);
        let num = zero_order_numeric(&p, &face, &NumericOptions::default()).unwrap();
        assert_eq!(num.order, 2);
        assert!(num.zeros_found > 0);
        let rep = o_of(&p, &build_polyhedron(&p).unwrap(), None).unwrap();
        assert_eq!(rep.o_of_s, 2);
        assert_eq!(rep.method, Method::Exact);
    }

    #[test]
    fn elliptic_and_monomial_phases_have_no_zeros() {
        let p = poly(2, &[(&[2, 0], 1), (&[0, 2], 1)]);
        let face = edge_of(&p);
        assert_eq!(zero_order_exact(&p, &face).unwrap(), 0);
        let num = zero_order_numeric(&p, &face, &NumericOptions::default()).unwrap();
        assert_eq!((num.order, num.zeros_found), (0, 0));

        let m = poly(2, &[(&[2, 1], 1)]);
        let rep = o_of(&m, &build_polyhedron(&m).unwrap(), None).unwrap();
        assert_eq!(rep.o_of_s, 0);
        let cube = poly(1, &[(&[3], 1)]);
        assert_eq!(o_of(&cube, &build_polyhedron(&cube).unwrap(), None).unwrap().o_of_s, 0);
    }

    #[test]
    fn simple_zero_in_a_negative_chart() {
        // t1^2 t2 + t1 t2^3 = t1 t2 (t1 + t2^2): u = t2^2 / t1 takes value -1
        let p = poly(2, &[(&[2, 1], 1), (&[1, 3], 1)]);
        let face = edge_of(&p);
        assert_eq!(zero_order_exact(&p, &face).unwrap(), 1);
        let num = zero_order_numeric(&p, &face, &NumericOptions::default()).unwrap();
        assert_eq!(num.order, 1);
    }

    #[test]
    fn even_steps_cannot_reach_negative_u() {
        // (t1 + t2)^2: step (-1, 1) is odd, double zero at u = -1
        let p = poly(2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        assert_eq!(zero_order_exact(&p, &edge_of(&p)).unwrap(), 2);
        // t1^4 + t2^2: u = t2^2/t1^4 > 0 only, g = 1 + u has no positive root
        let p = poly(2, &[(&[4, 0], 1), (&[0, 2], 1)]);
        assert_eq!(zero_order_exact(&p, &edge_of(&p)).unwrap(), 0);
        // t1^2 - t2^2 = (t1 - t2)(t1 + t2): simple zeros
        let p = poly(2, &[(&[2, 0], 1), (&[0, 2], -1)]);
        assert_eq!(zero_order_exact(&p, &edge_of(&p)).unwrap(), 1);
    }

    #[test]
    fn override_is_reported() {
        let p = poly(2, &[(&[2, 0], 1), (&[0, 2], 1)]);
        let rep = o_of(&p, &build_polyhedron(&p).unwrap(), Some(3)).unwrap();
        assert_eq!(rep.o_of_s, 3);
        assert_eq!(rep.computed, 0);
        assert_eq!(rep.method, Method::UserSupplied);
    }

    #[test]
    fn numeric_path_on_a_triangle_face() {
        // t1^2 + t2^2 - t3^2 vanishes simply on a cone that avoids the axes
        let cone = poly(3, &[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], -1)]);
        let tri = build_polyhedron(&cone)
            .unwrap()
            .compact_faces()
            .into_iter()
            .find(|f| f.dimension == 2)
            .unwrap();
        assert!(is_quasi_homogeneous(&cone, &tri));
        let r = zero_order_numeric(&cone, &tri, &NumericOptions::default()).unwrap();
        assert_eq!(r.order, 1);
        let rep = o_of(&cone, &build_polyhedron(&cone).unwrap(), None).unwrap();
        assert_eq!(rep.method, Method::Numeric);
        assert_eq!(rep.o_of_s, 1);
    }
}
