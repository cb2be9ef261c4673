//! Brute-force rational oracles shared by the integration tests. Every LP here
//! is solved by enumerating basic solutions, independently of the simplex code.

#![allow(dead_code)]

use newton_radon::poly::SparsePolynomial;
use newton_radon::rational::{qi, Q};
use num_traits::{Signed, Zero};

pub fn poly(dim: usize, terms: &[(&[u32], i64)]) -> SparsePolynomial {
    SparsePolynomial::from_int_terms(dim, terms).unwrap()
}

/// Twenty phases in dimensions 1 to 3, with a label each.
pub fn corpus() -> Vec<(&'static str, SparsePolynomial)> {
    vec![
        ("t^2", poly(1, &[(&[2], 1)])),
        ("t^3", poly(1, &[(&[3], 1)])),
        ("t^4", poly(1, &[(&[4], 1)])),
        ("t1^3 + t2^3", poly(2, &[(&[3, 0], 1), (&[0, 3], 1)])),
        ("t1^4 + t2^4", poly(2, &[(&[4, 0], 1), (&[0, 4], 1)])),
        ("t1^2 t2 + t1 t2^3", poly(2, &[(&[2, 1], 1), (&[1, 3], 1)])),
        ("(t2 - t1^2)^2", poly(2, &[(&[4, 0], 1), (&[2, 1], -2), (&[0, 2], 1)])),
        ("t1^2 + t2^2", poly(2, &[(&[2, 0], 1), (&[0, 2], 1)])),
        ("t1^2 t2^2", poly(2, &[(&[2, 2], 1)])),
        ("t1^2 - t2^2", poly(2, &[(&[2, 0], 1), (&[0, 2], -1)])),
        ("t1^4 + t2^2", poly(2, &[(&[4, 0], 1), (&[0, 2], 1)])),
        ("t1^5 + t1^2 t2^2 + t2^6", poly(2, &[(&[5, 0], 1), (&[2, 2], 1), (&[0, 6], 1)])),
        ("t1^3 t2 + t1^2 t2^2 + t1 t2^3", poly(2, &[(&[3, 1], 1), (&[2, 2], 3), (&[1, 3], 1)])),
        ("(t1 + t2)^2", poly(2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)])),
        ("t1^2 + t2^3", poly(2, &[(&[2, 0], 1), (&[0, 3], 1)])),
        ("t1^2 + t2^2 + t3^2", poly(3, &[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], 1)])),
        ("t1 t2 t3", poly(3, &[(&[1, 1, 1], 1)])),
        (
            "t1^2 t2 + t2^2 t3 + t3^2 t1",
            poly(3, &[(&[2, 1, 0], 1), (&[0, 2, 1], 1), (&[1, 0, 2], 1)]),
        ),
        (
            "t1^6 + t2^4 + t3^3 + t1 t2 t3",
            poly(3, &[(&[6, 0, 0], 1), (&[0, 4, 0], 1), (&[0, 0, 3], 1), (&[1, 1, 1], 2)]),
        ),
        (
            "t1^4 + t2^4 + t3^4 + t1^2 t2^2 t3^2 + t1 t2^2",
            poly(
                3,
                &[(&[4, 0, 0], 1), (&[0, 4, 0], 1), (&[0, 0, 4], 1), (&[2, 2, 2], 1), (&[1, 2, 0], -1)],
            ),
        ),
    ]
}

pub fn exponent_points(p: &SparsePolynomial) -> Vec<Vec<Q>> {
    p.exponents().map(|e| e.to_point()).collect()
}

/// Solves the square system `m x = rhs` exactly; `None` when singular.
fn solve(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
                let delta = &f * &rhs[col];
                rhs[r] -= delta;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All basic feasible solutions of `{x : le_rows . x <= le_rhs, eq_rows . x = eq_rhs}`.
pub fn basic_solutions(
    dim: usize,
    le: &[(Vec<Q>, Q)],
    eq: &[(Vec<Q>, Q)],
) -> Vec<Vec<Q>> {
    let mut out = Vec::new();
    if eq.len() > dim {
        return out;
    }
    for pick in combinations(le.len(), dim - eq.len()) {
        let mut m: Vec<Vec<Q>> = eq.iter().map(|(r, _)| r.clone()).collect();
        let mut rhs: Vec<Q> = eq.iter().map(|(_, b)| b.clone()).collect();
        for &i in &pick {
            m.push(le[i].0.clone());
            rhs.push(le[i].1.clone());
        }
        if let Some(x) = solve(m, rhs) {
            let dot = |r: &[Q]| r.iter().zip(&x).map(|(a, b)| a * b).sum::<Q>();
            if le.iter().all(|(r, b)| dot(r) <= *b) && eq.iter().all(|(r, b)| dot(r) == *b) {
                out.push(x);
            }
        }
    }
    out
}

/// Is `v` in `conv(others) + R^n_+`? Caratheodory: subsets of at most `n + 1` points suffice.
fn dominated(v: &[Q], others: &[Vec<Q>]) -> bool {
    let n = v.len();
    for k in 1..=(n + 1).min(others.len()) {
        for subset in combinations(others.len(), k) {
            let mut le = Vec::new();
            for i in 0..k {
                let mut row = vec![Q::zero(); k];
                row[i] = qi(-1);
                le.push((row, Q::zero()));
            }
            for j in 0..n {
                le.push((subset.iter().map(|&s| others[s][j].clone()).collect(), v[j].clone()));
            }
            let eq = vec![(vec![qi(1); k], qi(1))];
            if !basic_solutions(k, &le, &eq).is_empty() {
                return true;
            }
        }
    }
    false
}

pub fn brute_vertices(points: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let mut out: Vec<Vec<Q>> = pts
        .iter()
        .enumerate()
        .filter(|(i, v)| {
            let others: Vec<Vec<Q>> = pts
                .iter()
                .enumerate()
                .filter(|(j, _)| j != i)
                .map(|(_, p)| p.clone())
                .collect();
            !dominated(v, &others)
        })
        .map(|(_, v)| v.clone())
        .collect();
    out.sort();
    out
}

/// `min over conv(points)` of `max_i p_i`, by enumeration over small subsets.
pub fn brute_distance(points: &[Vec<Q>]) -> Q {
    let n = points[0].len();
    let mut best: Option<Q> = None;
    for k in 1..=(n + 1).min(points.len()) {
        for subset in combinations(points.len(), k) {
            // variables (lambda_1..lambda_k, t)
            let mut le = Vec::new();
            for i in 0..k {
                let mut row = vec![Q::zero(); k + 1];
                row[i] = qi(-1);
                le.push((row, Q::zero()));
            }
            for j in 0..n {
                let mut row: Vec<Q> = subset.iter().map(|&s| points[s][j].clone()).collect();
                row.push(qi(-1));
                le.push((row, Q::zero()));
            }
            let mut eq_row = vec![qi(1); k];
            eq_row.push(Q::zero());
            for x in basic_solutions(k + 1, &le, &[(eq_row, qi(1))]) {
                let t = x[k].clone();
                if best.as_ref().map_or(true, |b| t < *b) {
                    best = Some(t);
                }
            }
        }
    }
    best.expect("nonempty")
}

/// Lexicographically smallest `b >= 0`, `sum b = 1`, with `b . v >= d` on every vertex.
pub fn brute_diagonal_support(vertices: &[Vec<Q>], d: &Q) -> Vec<Q> {
    let n = vertices[0].len();
    let mut le = Vec::new();
    for i in 0..n {
        let mut row = vec![Q::zero(); n];
        row[i] = qi(-1);
        le.push((row, Q::zero()));
    }
    for v in vertices {
        le.push((v.iter().map(|x| -x).collect(), -d.clone()));
    }
    let eq = vec![(vec![qi(1); n], qi(1))];
    let mut sols = basic_solutions(n, &le, &eq);
    sols.sort();
    sols.into_iter().next().expect("a supporting normal exists")
}

pub fn is_nonnegative(v: &[Q]) -> bool {
    v.iter().all(|x| !x.is_negative())
}
