//! Exact rational helpers shared by the geometry, LP and region code.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the polyhedral code.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Input("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad numerator in '{s}'")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad denominator in '{s}'")))?;
        if d.is_zero() {
            return Err(Error::Input(format!("zero denominator in '{s}'")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
        {
            return Err(Error::Input(format!("bad decimal literal '{s}'")));
        }
        let digits = format!("{int_digits}{frac_part}");
        let mut n: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| Error::Input(format!("bad decimal literal '{s}'")))?
        };
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        return Ok(Q::new(n, d));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Input(format!("bad rational literal '{s}'")))?;
    Ok(Q::from_integer(n))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Input(format!("non-finite value {x}")))
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scales a nonzero rational vector to the primitive integer vector on the same ray.
pub fn primitive_integer_ray(v: &[Q]) -> Vec<Q> {
    use num_integer::Integer;
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let gcd = ints
        .iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v.to_vec();
    }
    ints.into_iter()
        .map(|x| Q::from_integer(x / &gcd))
        .collect()
}

/// Rank of a set of rational row vectors (exact Gaussian elimination).
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = &row[col] / &pivot_row[col];
                for (c, entry) in row.iter_mut().enumerate().skip(col) {
                    *entry -= &factor * &pivot_row[c];
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

pub fn min_q<'a>(values: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    values.into_iter().min().cloned()
}

pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}

/// Serde adapter writing a rational as its canonical fraction string.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod serde_qvec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format_rational(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
