//! Univariate polynomials over an exact field, with GF(p) factorization.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::MatrixError;
use crate::field::{Field, Scalar};
use crate::matrix::Matrix;

/// Coefficients lowest degree first; the leading coefficient is nonzero
/// unless the polynomial is zero (empty coefficient list).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    field: Field,
    coeffs: Vec<Scalar>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{c}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Polynomial {
    pub fn new(field: Field, coeffs: Vec<Scalar>) -> Self {
        let mut p = Polynomial { field, coeffs };
        p.trim();
        p
    }

    pub fn from_i64(field: Field, coeffs: &[i64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: Field) -> Self {
        Polynomial {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(c.field(), vec![c])
    }

    pub fn one(field: Field) -> Self {
        Self::constant(field.one())
    }

    /// The monomial `x`.
    pub fn x(field: Field) -> Self {
        Self::new(field, vec![field.zero(), field.one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero leading")),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self::new(self.field, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new(self.field, (0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new(self.field, (0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(self.field, out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.field), |acc, _| acc.mul(self))
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("division by zero polynomial");
        let lead_inv = divisor.leading().unwrap().inv().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Self::zero(self.field), self.clone());
        }
        let mut quot = vec![self.field.zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + d] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dc);
            }
            quot[k] = c;
        }
        rem.truncate(d);
        (Self::new(self.field, quot), Self::new(self.field, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, rhs: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, u, v)` with `u*self + v*rhs = g`, `g` monic.
    pub fn xgcd(&self, rhs: &Self) -> (Self, Self, Self) {
        let f = self.field;
        let (mut r0, mut r1) = (self.clone(), rhs.clone());
        let (mut s0, mut s1) = (Self::one(f), Self::zero(f));
        let (mut t0, mut t1) = (Self::zero(f), Self::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.leading().cloned() {
            None => (r0, s0, t0),
            Some(l) => {
                let inv = l.inv().unwrap();
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &self.field.from_i64(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    /// `p(m)` by Horner's rule.
    pub fn eval_matrix(&self, m: &Matrix) -> Result<Matrix, MatrixError> {
        if !m.is_square() {
            return Err(MatrixError::NotSquare(m.rows(), m.cols()));
        }
        let n = m.rows();
        let mut acc = Matrix::zeros(self.field, n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.multiply(m)?.add(&Matrix::identity(self.field, n).scale(c)?)?;
        }
        Ok(acc)
    }

    fn pow_mod(&self, mut k: u64, modulus: &Self) -> Self {
        let mut acc = Self::one(self.field).rem(modulus);
        let mut base = self.rem(modulus);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            k >>= 1;
        }
        acc
    }

    /// Squarefree decomposition followed by Berlekamp splitting over GF(p).
    ///
    /// Returns monic irreducible factors with multiplicities, sorted by degree
    /// then coefficients; their product equals `self` up to a unit.
    pub fn factor_squarefree_gfp(&self) -> Result<Vec<(Polynomial, usize)>, MatrixError> {
        let Field::Prime(p) = self.field else {
            return Err(MatrixError::UnsupportedField {
                op: "factor_squarefree_gfp",
                field: self.field,
            });
        };
        let mut out = Vec::new();
        if self.is_constant() {
            return Ok(out);
        }
        for (part, mult) in squarefree_parts(&self.monic(), p) {
            for f in berlekamp(&part, p) {
                out.push((f, mult));
            }
        }
        out.sort_by(|a, b| {
            a.0.degree()
                .cmp(&b.0.degree())
                .then_with(|| poly_key(&a.0).cmp(&poly_key(&b.0)))
        });
        Ok(out)
    }

    /// Distinct rational roots of a rational polynomial with their
    /// multiplicities. Coefficients whose integer form exceeds `u64` are not
    /// searched, so the result can be incomplete; the flag reports that.
    pub fn rational_roots(&self) -> Result<(Vec<(BigRational, usize)>, bool), MatrixError> {
        if self.field != Field::Rational {
            return Err(MatrixError::UnsupportedField {
                op: "rational_roots",
                field: self.field,
            });
        }
        let mut roots = Vec::new();
        if self.is_constant() {
            return Ok((roots, true));
        }
        let mut rest = self.clone();
        // roots at zero
        let zero = Field::Rational.zero();
        let x = Self::x(Field::Rational);
        let mut m0 = 0;
        while !rest.is_constant() && rest.eval(&zero).is_zero() {
            rest = rest.div_rem(&x).0;
            m0 += 1;
        }
        if m0 > 0 {
            roots.push((BigRational::zero(), m0));
        }
        if rest.is_constant() {
            return Ok((roots, true));
        }
        // clear denominators
        let lcm = rest
            .coeffs
            .iter()
            .map(|c| c.as_rational().unwrap().denom().clone())
            .fold(BigInt::one(), |a, b| a.lcm(&b));
        let ints: Vec<BigInt> = rest
            .coeffs
            .iter()
            .map(|c| (c.as_rational().unwrap() * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let (Some(c0), Some(cn)) = (ints[0].abs().to_u64(), ints.last().unwrap().abs().to_u64()) else {
            return Ok((roots, false));
        };
        let mut candidates = Vec::new();
        for num in divisors(c0) {
            for den in divisors(cn) {
                for sign in [1i64, -1] {
                    let r = BigRational::new(BigInt::from(num) * sign, BigInt::from(den));
                    if !candidates.contains(&r) {
                        candidates.push(r);
                    }
                }
            }
        }
        candidates.sort();
        let complete = c0 <= 1_000_000_000_000 && cn <= 1_000_000_000_000;
        for r in candidates {
            let s = Scalar::Rational(Box::new(r.clone()));
            let lin = Self::new(Field::Rational, vec![-&s, Field::Rational.one()]);
            let mut m = 0;
            while !rest.is_constant() && rest.eval(&s).is_zero() {
                rest = rest.div_rem(&lin).0;
                m += 1;
            }
            if m > 0 {
                roots.push((r, m));
            }
        }
        Ok((roots, complete))
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
        if d > 2_000_000 {
            break;
        }
    }
    out.sort_unstable();
    out
}

fn poly_key(p: &Polynomial) -> Vec<u32> {
    p.coeffs.iter().rev().map(|c| c.as_mod().unwrap_or(0)).collect()
}

/// `f^(1/p)` over GF(p) for `f` with `f' = 0` (all exponents divisible by p).
fn pth_root(f: &Polynomial, p: u32) -> Polynomial {
    let p = p as usize;
    Polynomial::new(f.field, f.coeffs.iter().step_by(p).cloned().collect())
}

/// Yun-style squarefree decomposition in characteristic p: monic squarefree
/// parts with their multiplicities.
fn squarefree_parts(f: &Polynomial, p: u32) -> Vec<(Polynomial, usize)> {
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    let d = f.derivative();
    if d.is_zero() {
        for (g, m) in squarefree_parts(&pth_root(f, p), p) {
            out.push((g, m * p as usize));
        }
        return out;
    }
    let mut c = f.gcd(&d);
    let mut w = f.div_rem(&c).0;
    let mut i = 1;
    while !w.is_constant() {
        let y = w.gcd(&c);
        let z = w.div_rem(&y).0;
        if !z.is_constant() {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.div_rem(&w).0;
    }
    if !c.is_constant() {
        for (g, m) in squarefree_parts(&pth_root(&c.monic(), p), p) {
            out.push((g, m * p as usize));
        }
    }
    out
}

/// Berlekamp splitting of a monic squarefree polynomial over GF(p).
fn berlekamp(f: &Polynomial, p: u32) -> Vec<Polynomial> {
    let field = f.field;
    let n = f.degree().unwrap_or(0);
    if n <= 1 {
        return vec![f.clone()];
    }
    // Row i of Q holds x^(i p) mod f.
    let xp = Polynomial::x(field).pow_mod(p as u64, f);
    let mut q = Matrix::zeros(field, n, n);
    let mut cur = Polynomial::one(field);
    for i in 0..n {
        for j in 0..n {
            q.set(i, j, cur.coeff(j));
        }
        cur = cur.mul(&xp).rem(f);
    }
    let qi = q.sub(&Matrix::identity(field, n)).unwrap();
    // v (Q - I) = 0  <=>  (Q - I)^T v^T = 0
    let kernel = qi.transpose().kernel_basis();
    let count = kernel.len();
    let mut factors = vec![f.clone()];
    for v in kernel {
        if factors.len() == count {
            break;
        }
        let g = Polynomial::new(field, v);
        if g.is_constant() {
            continue;
        }
        let mut next = Vec::new();
        for h in factors {
            if h.degree() == Some(1) {
                next.push(h);
                continue;
            }
            let mut h = h;
            for s in 0..p {
                if h.degree() == Some(1) {
                    break;
                }
                let shifted = g.sub(&Polynomial::constant(field.element(s)));
                let d = h.gcd(&shifted);
                if !d.is_constant() && d.degree() < h.degree() {
                    h = h.div_rem(&d).0.monic();
                    next.push(d);
                }
            }
            next.push(h);
        }
        factors = next;
    }
    factors
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF2: Field = Field::GF2;

    fn product(factors: &[(Polynomial, usize)], field: Field) -> Polynomial {
        factors
            .iter()
            .fold(Polynomial::one(field), |acc, (f, m)| acc.mul(&f.pow(*m)))
    }

    #[test]
    fn factor_examples() {
        // x^2 + x = x (x + 1)
        let f = Polynomial::from_i64(GF2, &[0, 1, 1]);
        let fs = f.factor_squarefree_gfp().unwrap();
        assert_eq!(
            fs,
            vec![
                (Polynomial::from_i64(GF2, &[0, 1]), 1),
                (Polynomial::from_i64(GF2, &[1, 1]), 1)
            ]
        );
        assert_eq!(product(&fs, GF2), f);
        // x^2 + x + 1 has no root in GF(2)
        let g = Polynomial::from_i64(GF2, &[1, 1, 1]);
        assert_eq!(g.factor_squarefree_gfp().unwrap(), vec![(g.clone(), 1)]);
        let sq = Polynomial::from_i64(GF2, &[0, 0, 1]);
        assert_eq!(
            sq.factor_squarefree_gfp().unwrap(),
            vec![(Polynomial::from_i64(GF2, &[0, 1]), 2)]
        );
    }

    #[test]
    fn factor_mixed_multiplicities_gf3() {
        let f3 = Field::Prime(3);
        // (x+1)^3 (x^2+1) (x+2)^2 over GF(3); x^2+1 is irreducible mod 3
        let a = Polynomial::from_i64(f3, &[1, 1]);
        let b = Polynomial::from_i64(f3, &[1, 0, 1]);
        let c = Polynomial::from_i64(f3, &[2, 1]);
        let f = a.pow(3).mul(&b).mul(&c.pow(2));
        let fs = f.factor_squarefree_gfp().unwrap();
        assert_eq!(product(&fs, f3), f);
        let mut got: Vec<(String, usize)> = fs.iter().map(|(p, m)| (p.to_string(), *m)).collect();
        got.sort();
        let mut want = vec![(a.to_string(), 3), (b.to_string(), 1), (c.to_string(), 2)];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn rational_field_rejected() {
        let f = Polynomial::from_i64(Field::Rational, &[0, 1]);
        assert!(f.factor_squarefree_gfp().is_err());
    }

    #[test]
    fn xgcd_identity() {
        let q = Field::Rational;
        let a = Polynomial::from_i64(q, &[-1, 0, 1]);
        let b = Polynomial::from_i64(q, &[-2, 1]);
        let (g, u, v) = a.xgcd(&b);
        assert_eq!(g, Polynomial::one(q));
        assert_eq!(u.mul(&a).add(&v.mul(&b)), g);
    }

    #[test]
    fn rational_roots_found() {
        let q = Field::Rational;
        // (x - 1/2)^2 (x + 3) x
        let f = Polynomial::new(q, vec![Field::rational(-1, 2), q.one()])
            .pow(2)
            .mul(&Polynomial::from_i64(q, &[3, 1]))
            .mul(&Polynomial::x(q));
        let (roots, complete) = f.rational_roots().unwrap();
        assert!(complete);
        let mut got: Vec<(String, usize)> = roots.iter().map(|(r, m)| (r.to_string(), *m)).collect();
        got.sort();
        assert_eq!(
            got,
            vec![("-3".to_string(), 1), ("0".to_string(), 1), ("1/2".to_string(), 2)]
        );
    }

    /// No monic divisor of degree 1..=deg/2, by enumerating all candidates.
    fn irreducible_by_trial_division(g: &Polynomial, p: u32) -> bool {
        let n = g.degree().unwrap();
        for d in 1..=n / 2 {
            for code in 0..(p as usize).pow(d as u32) {
                let mut c = Vec::new();
                let mut k = code;
                for _ in 0..d {
                    c.push((k % p as usize) as i64);
                    k /= p as usize;
                }
                c.push(1);
                let cand = Polynomial::from_i64(Field::Prime(p), &c);
                if g.rem(&cand).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    proptest::proptest! {
        #[test]
        fn gf5_factorization_multiplies_back(coeffs in proptest::collection::vec(0i64..5, 2..8)) {
            let f5 = Field::Prime(5);
            let f = Polynomial::from_i64(f5, &coeffs);
            if f.degree().unwrap_or(0) >= 1 {
                let fs = f.factor_squarefree_gfp().unwrap();
                proptest::prop_assert_eq!(product(&fs, f5), f.monic());
                for (g, _) in &fs {
                    proptest::prop_assert!(irreducible_by_trial_division(g, 5));
                }
            }
        }
    }
}
