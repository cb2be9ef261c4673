//! Dense univariate polynomials over the rationals: gcd, square-free
//! factorisation and Sturm root counting. Used to find the exact zero order
//! of one-parameter face polynomials.

use num_traits::{One, Signed, Zero};

use crate::rational::{qi, Q};

/// Coefficients in increasing degree; never has a trailing zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<Q>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| qi(x)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![Q::one()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * qi(i as i64))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(lc) => {
                let lc = lc.clone();
                Self::new(self.coeffs.iter().map(|c| c / &lc).collect())
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &c * d;
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs
            .iter()
            .rev()
            .fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// Sign of the polynomial as `x -> +inf` (`positive`) or `x -> -inf`.
    fn sign_at_infinity(&self, positive: bool) -> i32 {
        match self.leading() {
            None => 0,
            Some(lc) => {
                let s = if lc.is_positive() { 1 } else { -1 };
                let odd = self.coeffs.len() % 2 == 0;
                if positive || !odd {
                    s
                } else {
                    -s
                }
            }
        }
    }

    fn sign_at(&self, x: &Q) -> i32 {
        let v = self.eval(x);
        if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Multiplicity of 0 as a root, and the cofactor with nonzero constant term.
    pub fn split_zero_root(&self) -> (usize, Self) {
        let m = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        (m, Self::new(self.coeffs[m..].to_vec()))
    }

    /// Yun's algorithm: `self = c * a_1 a_2^2 ... a_m^m` with each `a_i`
    /// square-free and pairwise coprime. Entry `i` of the result is `a_{i+1}`.
    pub fn square_free_decomposition(&self) -> Vec<Self> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let mut c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        loop {
            let a = b.gcd(&d);
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            out.push(a);
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            d = c.sub(&b.derivative());
        }
        while out.last().is_some_and(|p| p.degree() == Some(0)) {
            out.pop();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Q::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Self::new(out)
    }

    fn sturm_chain(&self) -> Vec<Self> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(Self::new(r.coeffs.iter().map(|c| -c).collect()));
        }
        chain
    }

    /// Number of distinct real roots in `(lo, hi]`, with `None` meaning infinity.
    /// Requires a square-free polynomial for a meaningful count.
    pub fn count_roots(&self, lo: Option<&Q>, hi: Option<&Q>) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.sturm_chain();
        let variations = |signs: Vec<i32>| -> usize {
            let nz: Vec<i32> = signs.into_iter().filter(|&s| s != 0).collect();
            nz.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let at = |x: Option<&Q>, positive: bool| -> usize {
            variations(
                chain
                    .iter()
                    .map(|p| match x {
                        Some(x) => p.sign_at(x),
                        None => p.sign_at_infinity(positive),
                    })
                    .collect(),
            )
        };
        let v_lo = at(lo, false);
        let v_hi = at(hi, true);
        v_lo.saturating_sub(v_hi)
    }

    pub fn count_positive_roots(&self) -> usize {
        self.count_roots(Some(&Q::zero()), None)
    }

    pub fn count_negative_roots(&self) -> usize {
        let zero = Q::zero();
        self.count_roots(None, Some(&zero)) - usize::from(self.eval(&zero).is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_gcd() {
        // (u - 1)^2 (u + 2) and (u - 1)(u + 3)
        let a = UPoly::from_ints(&[1, -2, 1]).mul(&UPoly::from_ints(&[2, 1]));
        let b = UPoly::from_ints(&[-1, 1]).mul(&UPoly::from_ints(&[3, 1]));
        assert_eq!(a.gcd(&b), UPoly::from_ints(&[-1, 1]));
        let (qt, r) = a.div_rem(&b);
        assert_eq!(qt.mul(&b).sub(&a.sub(&r)), UPoly::zero());
    }

    #[test]
    fn yun_decomposition() {
        // u (u - 1)^2 (u + 1)^3
        let p = UPoly::from_ints(&[0, 1])
            .mul(&UPoly::from_ints(&[1, -2, 1]))
            .mul(&UPoly::from_ints(&[1, 3, 3, 1]));
        let parts = p.square_free_decomposition();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], UPoly::from_ints(&[0, 1]));
        assert_eq!(parts[1], UPoly::from_ints(&[-1, 1]));
        assert_eq!(parts[2], UPoly::from_ints(&[1, 1]));
        assert!(UPoly::from_ints(&[5]).square_free_decomposition().is_empty());
    }

    #[test]
    fn sturm_counts() {
        // (u - 1)(u - 2)(u + 3)
        let p = UPoly::from_ints(&[-1, 1])
            .mul(&UPoly::from_ints(&[-2, 1]))
            .mul(&UPoly::from_ints(&[3, 1]));
        assert_eq!(p.count_positive_roots(), 2);
        assert_eq!(p.count_negative_roots(), 1);
        assert_eq!(UPoly::from_ints(&[1, 0, 1]).count_roots(None, None), 0);
        assert_eq!(UPoly::from_ints(&[0, 1]).count_positive_roots(), 0);
        assert_eq!(
            p.count_roots(Some(&qi(0)), Some(&qi(1))),
            1,
            "root at the closed right end counts"
        );
    }

    #[test]
    fn zero_root_split() {
        let (m, rest) = UPoly::from_ints(&[0, 0, 3, 1]).split_zero_root();
        assert_eq!(m, 2);
        assert_eq!(rest, UPoly::from_ints(&[3, 1]));
    }
}
