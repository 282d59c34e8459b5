use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense univariate polynomial in `q` with integer coefficients.
///
/// Coefficients are stored lowest degree first with no trailing zeros, so the
/// zero polynomial is the empty vector and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * q^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.push(c);
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::from_coeffs(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Multiplicity of `q` as a factor; zero for the zero polynomial.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Divides by `q^k`; the caller guarantees `k <= valuation`.
    pub fn shift_down(&self, k: usize) -> Self {
        debug_assert!(self.is_zero() || k <= self.valuation());
        ZPoly::from_coeffs(self.coeffs.iter().skip(k).cloned().collect())
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        ZPoly { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k);
            let b = other.coeffs.get(k);
            out.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Self::from_coeffs(out)
    }

    pub fn neg(&self) -> Self {
        ZPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if other.coeffs.len() == 1 {
            return self.scale(&other.coeffs[0]);
        }
        if self.coeffs.len() == 1 {
            return other.scale(&self.coeffs[0]);
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ZPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Exact division by an integer; `None` if some coefficient is not divisible.
    pub fn div_scalar_exact(&self, c: &BigInt) -> Option<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            let (quo, rem) = a.div_rem(c);
            if !rem.is_zero() {
                return None;
            }
            out.push(quo);
        }
        Some(ZPoly { coeffs: out })
    }

    /// Gcd of the coefficients, nonnegative; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.content();
        if self.lc().is_some_and(|l| l.is_negative()) {
            c = -c;
        }
        self.div_scalar_exact(&c).expect("content divides every coefficient")
    }

    /// Exact quotient `self / other` in `Z[q]`, or `None` when `other` does not divide.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        assert!(!other.is_zero(), "polynomial division by zero");
        if self.is_zero() {
            return Some(Self::zero());
        }
        let dn = other.coeffs.len() - 1;
        if self.coeffs.len() - 1 < dn {
            return None;
        }
        if other.coeffs.len() == 1 {
            return self.div_scalar_exact(&other.coeffs[0]);
        }
        let lc = other.lc().unwrap();
        let mut rem = self.coeffs.clone();
        let qlen = rem.len() - dn;
        let mut quo = vec![BigInt::zero(); qlen];
        for k in (0..qlen).rev() {
            let top = &rem[k + dn];
            if top.is_zero() {
                continue;
            }
            let (c, r) = top.div_rem(lc);
            if !r.is_zero() {
                return None;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                rem[k + j] -= &c * b;
            }
            quo[k] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::from_coeffs(quo))
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.coeffs.len() - 1;
        let lc = b.lc().unwrap().clone();
        let mut r = self.clone();
        while !r.is_zero() && r.coeffs.len() - 1 >= db {
            let shift = r.coeffs.len() - 1 - db;
            let top = r.lc().unwrap().clone();
            r = r.scale(&lc).sub(&b.scale(&top).shift_up(shift));
        }
        r
    }

    /// Gcd in `Z[q]`, normalized to a positive leading coefficient.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.primitive_part().scale(&other.content());
        }
        if other.is_zero() {
            return self.primitive_part().scale(&self.content());
        }
        let content = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.coeffs.len() < b.coeffs.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.coeffs.len() == 1 {
                return ZPoly::constant(content);
            }
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().scale(&content)
    }

    /// Evaluates modulo a prime `p < 2^63`.
    pub fn eval_mod(&self, x: u64, p: u64) -> u64 {
        let pb = BigInt::from(p);
        let mut acc: u64 = 0;
        for c in self.coeffs.iter().rev() {
            let c = c.mod_floor(&pb);
            let c = u64::try_from(c).expect("residue fits in u64");
            acc = ((acc as u128 * x as u128 + c as u128) % p as u128) as u64;
        }
        acc
    }

    /// Size metric used for pivot choice: degree then total coefficient bit length.
    pub fn size_metric(&self) -> (usize, u64) {
        (self.coeffs.len(), self.coeffs.iter().map(|c| c.bits()).sum())
    }

    pub fn cmp_by_size(&self, other: &Self) -> Ordering {
        self.size_metric().cmp(&other.size_metric())
    }
}

impl fmt::Debug for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZPoly({})", self)
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_laurent(f, self, 0)
    }
}

/// Writes `q^shift * p` in descending powers, e.g. `q^2+1` or `-q^-1+3`.
pub(crate) fn write_laurent(f: &mut impl fmt::Write, p: &ZPoly, shift: i64) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    let mut first = true;
    for (k, c) in p.coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let e = k as i64 + shift;
        let neg = c.is_negative();
        let abs = c.abs();
        if neg {
            f.write_str("-")?;
        } else if !first {
            f.write_str("+")?;
        }
        first = false;
        if e == 0 {
            write!(f, "{}", abs)?;
            continue;
        }
        if !abs.is_one() {
            write!(f, "{}*", abs)?;
        }
        if e == 1 {
            f.write_str("q")?;
        } else {
            write!(f, "q^{}", e)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> ZPoly {
        ZPoly::from_i64s(cs)
    }

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
    }

    #[test]
    fn gcd_of_cyclotomic_products() {
        // (q-1)(q+1) and (q-1)(q^2+q+1)
        let a = p(&[-1, 0, 1]);
        let b = p(&[-1, 0, 0, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
    }

    #[test]
    fn gcd_keeps_integer_content() {
        let a = p(&[4, 4]);
        let b = p(&[6, 6]);
        assert_eq!(a.gcd(&b), p(&[2, 2]));
    }

    #[test]
    fn exact_division() {
        let a = p(&[-1, 0, 1]);
        assert_eq!(a.div_exact(&p(&[1, 1])), Some(p(&[-1, 1])));
        assert_eq!(a.div_exact(&p(&[2, 1])), None);
    }

    #[test]
    fn display_descending() {
        assert_eq!(p(&[1, 0, 1]).to_string(), "q^2+1");
        assert_eq!(p(&[3, -1]).to_string(), "-q+3");
        assert_eq!(p(&[0, 2]).to_string(), "2*q");
    }

    #[test]
    fn eval_mod_small_prime() {
        assert_eq!(p(&[1, 1]).eval_mod(5, 101), 6);
        assert_eq!(p(&[-1, 0, 1]).eval_mod(2, 7), 3);
    }
}
