//! Sparse multivariate polynomials with exact rational coefficients, the
//! star function `f*` built from Newton-polyhedron vertices, and the block
//! structure of the singular kernel weight.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, parse_rational, qi, Q};

/// Monomial exponents `(e_1, ..., e_n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// The exponent as a point of `Q^n`.
    pub fn to_point(&self) -> Vec<Q> {
        self.0.iter().map(|&e| qi(e as i64)).collect()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One term as it appears in a problem-spec file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exps: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    dim: usize,
    terms: BTreeMap<ExponentVector, Q>,
}

impl SparsePolynomial {
    /// Builds a polynomial, rejecting zero coefficients, repeated exponents
    /// and exponent vectors of the wrong length.
    pub fn new<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Q)>,
    {
        if dim == 0 {
            return Err(Error::Input("polynomial dimension must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (exps, coeff) in terms {
            if exps.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: exps.len(),
                });
            }
            if coeff.is_zero() {
                return Err(Error::Input(format!(
                    "zero coefficient for monomial {}",
                    ExponentVector(exps)
                )));
            }
            let key = ExponentVector(exps);
            if map.contains_key(&key) {
                return Err(Error::Input(format!("repeated monomial {key}")));
            }
            map.insert(key, coeff);
        }
        Ok(Self { dim, terms: map })
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(dim: usize, terms: &[(&[u32], i64)]) -> Result<Self> {
        Self::new(
            dim,
            terms.iter().map(|(e, c)| (e.to_vec(), qi(*c))),
        )
    }

    pub fn from_records(dim: usize, records: &[TermRecord]) -> Result<Self> {
        let terms = records
            .iter()
            .map(|r| Ok((r.exps.clone(), parse_rational(&r.coeff)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, terms)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(e, c)| TermRecord {
                exps: e.0.clone(),
                coeff: format_rational(c),
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &ExponentVector) -> Option<&Q> {
        self.terms.get(exps)
    }

    pub fn exponents(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.keys()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    /// Checks that the polynomial can serve as a phase: nonzero, and both the
    /// value and the gradient vanish at the origin.
    pub fn validate_phase(&self) -> Result<()> {
        if self.is_zero() {
            return Err(Error::Input("phase must not be identically zero".into()));
        }
        if let Some(bad) = self.terms.keys().find(|e| e.degree() <= 1) {
            return Err(Error::Input(format!(
                "phase must vanish to second order at 0 (S(0) = 0 and grad S(0) = 0); offending monomial {bad}"
            )));
        }
        Ok(())
    }

    /// Keeps the terms whose exponents satisfy `keep`.
    pub fn restrict<F: Fn(&ExponentVector) -> bool>(&self, keep: F) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Q) -> Result<Self> {
        if factor.is_zero() {
            return Err(Error::Input("scaling by zero".into()));
        }
        Ok(Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * factor))
                .collect(),
        })
    }

    /// Reorders the variables: variable `i` of the result is variable `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: perm.len(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (perm.iter().map(|&p| e.0[p]).collect(), c.clone()));
        Self::new(self.dim, terms)
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| rational::to_f64(c) * monomial(&e.0, point))
            .sum()
    }

    /// Coefficients as floats, paired with exponents; cached form for hot loops.
    pub fn float_terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.0.clone(), rational::to_f64(c)))
            .collect()
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            write!(f, "{}", format_rational(&c.abs()))?;
            for (i, p) in e.0.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*t{}", i + 1)?,
                    _ => write!(f, "*t{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn monomial(exps: &[u32], point: &[f64]) -> f64 {
    exps.iter()
        .zip(point)
        .map(|(&e, &x)| x.powi(e as i32))
        .product()
}

/// `f*(t) = sum over vertices v of |t_1|^{v_1} ... |t_n|^{v_n}`.
///
/// Vertices may carry rational coordinates (rescaled polyhedra).
pub fn star_evaluate(vertices: &[Vec<Q>], point: &[f64]) -> Result<f64> {
    let star = StarFunction::new(vertices)?;
    if point.len() != star.dim() {
        return Err(Error::DimensionMismatch {
            expected: star.dim(),
            got: point.len(),
        });
    }
    Ok(star.eval(point))
}

/// Float form of `f*` for repeated evaluation.
#[derive(Debug, Clone)]
pub struct StarFunction {
    vertices: Vec<Vec<f64>>,
}

impl StarFunction {
    pub fn new(vertices: &[Vec<Q>]) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidPolyhedron("empty vertex list".into()))?;
        let dim = first.len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidPolyhedron(
                "vertices of differing dimension".into(),
            ));
        }
        Ok(Self {
            vertices: vertices
                .iter()
                .map(|v| v.iter().map(rational::to_f64).collect())
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(point)
                    .map(|(&e, &x)| abs_pow(x.abs(), e))
                    .product::<f64>()
            })
            .sum()
    }
}

fn abs_pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && e.abs() < 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// One group `t_k` of the variables and its singularity exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// 0-based variable indices.
    pub vars: Vec<usize>,
    #[serde(with = "crate::rational::serde_q")]
    pub alpha: Q,
}

impl Block {
    pub fn size(&self) -> usize {
        self.vars.len()
    }
}

/// Ordered partition of the variables into blocks with weights `|t_k|^{-alpha_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    dim: usize,
    blocks: Vec<Block>,
}

impl BlockStructure {
    pub fn new(dim: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for (i, b) in blocks.iter().enumerate() {
            if b.vars.is_empty() {
                return Err(Error::Input(format!("block {} is empty", i + 1)));
            }
            for &v in &b.vars {
                if v >= dim {
                    return Err(Error::Input(format!(
                        "block {} names variable {} but n = {dim}",
                        i + 1,
                        v + 1
                    )));
                }
                if seen[v] {
                    return Err(Error::Input(format!(
                        "variable {} appears in more than one block",
                        v + 1
                    )));
                }
                seen[v] = true;
            }
            if b.alpha.is_negative() || b.alpha >= qi(b.size() as i64) {
                return Err(Error::Input(format!(
                    "block {}: alpha = {} must satisfy 0 <= alpha < l = {}",
                    i + 1,
                    format_rational(&b.alpha),
                    b.size()
                )));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Input(format!(
                "variable {} is not covered by any block",
                missing + 1
            )));
        }
        Ok(Self { dim, blocks })
    }

    /// Every variable in its own block with the given exponents.
    pub fn singletons(alphas: &[Q]) -> Result<Self> {
        Self::new(
            alphas.len(),
            alphas
                .iter()
                .enumerate()
                .map(|(i, a)| Block {
                    vars: vec![i],
                    alpha: a.clone(),
                })
                .collect(),
        )
    }

    /// Nonsingular weight: one block per variable, all exponents zero.
    pub fn unweighted(dim: usize) -> Self {
        Self::singletons(&vec![Q::zero(); dim]).expect("valid singleton blocks")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }

    pub fn alphas(&self) -> Vec<Q> {
        self.blocks.iter().map(|b| b.alpha.clone()).collect()
    }

    /// `k = 1 + sum alpha_i`.
    pub fn k(&self) -> Q {
        self.blocks.iter().fold(qi(1), |acc, b| acc + &b.alpha)
    }

    pub fn all_alpha_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.alpha.is_zero())
    }

    pub fn all_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.size() == 1)
    }

    /// Per-variable exponents, defined only when every block is one-dimensional.
    pub fn per_variable_alphas(&self) -> Result<Vec<Q>> {
        if !self.all_singletons() {
            return Err(Error::UnsupportedStructure(
                "per-variable exponents need every block to be one-dimensional".into(),
            ));
        }
        let mut out = vec![Q::zero(); self.dim];
        for b in &self.blocks {
            out[b.vars[0]] = b.alpha.clone();
        }
        Ok(out)
    }

    /// `prod_k |t_k|^{-alpha_k}` with Euclidean block norms.
    pub fn weight(&self, t: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let a = rational::to_f64(&b.alpha);
                if a == 0.0 {
                    return 1.0;
                }
                let norm = b.vars.iter().map(|&v| t[v] * t[v]).sum::<f64>().sqrt();
                norm.powf(-a)
            })
            .product()
    }
}
