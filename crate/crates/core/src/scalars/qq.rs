use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::modular::{inv_mod, pow_mod};
use super::poly::{write_laurent, ZPoly};
use super::ScalarError;

/// Exact element of the rational function field `Q(q)`.
///
/// Canonical form `q^shift * num / den` with `num(0) != 0`, `den(0) != 0`,
/// `gcd(num, den) = 1` in `Z[q]` and `lc(den) > 0`. Zero is `shift = 0`,
/// `num = 0`, `den = 1`. Canonical form makes structural equality field equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Qq {
    shift: i64,
    num: ZPoly,
    den: ZPoly,
}

impl Qq {
    pub fn zero() -> Self {
        Qq { shift: 0, num: ZPoly::zero(), den: ZPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_bigint(BigInt::from(c))
    }

    pub fn from_bigint(c: BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Qq { shift: 0, num: ZPoly::constant(c), den: ZPoly::one() }
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i64) -> Self {
        Qq { shift: k, num: ZPoly::one(), den: ZPoly::one() }
    }

    /// `q^shift * p` for an integer polynomial `p`.
    pub fn from_laurent(p: ZPoly, shift: i64) -> Self {
        Self::from_parts(shift, p, ZPoly::one())
    }

    /// `q^shift * num / den`, reduced to canonical form.
    pub fn from_parts(shift: i64, num: ZPoly, den: ZPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let vn = num.valuation();
        let vd = den.valuation();
        let shift = shift + vn as i64 - vd as i64;
        let mut num = num.shift_down(vn);
        let mut den = den.shift_down(vd);
        if !den.is_one() {
            let g = num.gcd(&den);
            if !g.is_one() {
                num = num.div_exact(&g).expect("gcd divides numerator");
                den = den.div_exact(&g).expect("gcd divides denominator");
            }
            if den.lc().is_some_and(|c| c.is_negative()) {
                num = num.neg();
                den = den.neg();
            }
        }
        Qq { shift, num, den }
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn numer(&self) -> &ZPoly {
        &self.num
    }

    pub fn denom(&self) -> &ZPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.num.is_one() && self.den.is_one()
    }

    /// True when the value is a Laurent polynomial in `q`.
    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    pub fn neg(&self) -> Self {
        Qq { shift: self.shift, num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let s = self.shift.min(other.shift);
        let a = self.num.shift_up((self.shift - s) as usize);
        let b = other.num.shift_up((other.shift - s) as usize);
        if self.den == other.den {
            return Self::from_parts(s, a.add(&b), self.den.clone());
        }
        let num = a.mul(&other.den).add(&b.mul(&self.den));
        Self::from_parts(s, num, self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let shift = self.shift + other.shift;
        if self.den.is_one() && other.den.is_one() {
            // Product of polynomials with nonzero constant terms keeps that property.
            return Qq { shift, num: self.num.mul(&other.num), den: ZPoly::one() };
        }
        // Cross-cancel so the product needs no further gcd.
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let mut num = n1.mul(&n2);
        let mut den = d1.mul(&d2);
        if den.lc().is_some_and(|c| c.is_negative()) {
            num = num.neg();
            den = den.neg();
        }
        Qq { shift, num, den }
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let (mut num, mut den) = (self.den.clone(), self.num.clone());
        if den.lc().is_some_and(|c| c.is_negative()) {
            num = num.neg();
            den = den.neg();
        }
        Ok(Qq { shift: -self.shift, num, den })
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Returns `(q^e, p)` with `self = q^e * p` when `self` is a Laurent polynomial.
    pub fn as_laurent(&self) -> Option<(i64, &ZPoly)> {
        self.den.is_one().then_some((self.shift, &self.num))
    }

    /// The integer value when `self` is a constant integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        (self.shift == 0 && self.den.is_one() && self.num.degree() == Some(0))
            .then(|| self.num.coeff(0))
    }

    /// Value at `q = q_value` modulo `prime`.
    pub fn specialize_at(&self, q_value: u64, prime: u64) -> Result<u64, ScalarError> {
        if self.is_zero() {
            return Ok(0);
        }
        let qv = q_value % prime;
        let den = self.den.eval_mod(qv, prime);
        if den == 0 {
            return Err(ScalarError::BadSpecialization);
        }
        if qv == 0 && self.shift != 0 {
            return Err(ScalarError::BadSpecialization);
        }
        let num = self.num.eval_mod(qv, prime);
        let qs = if self.shift >= 0 {
            pow_mod(qv, self.shift as u64, prime)
        } else {
            inv_mod(pow_mod(qv, self.shift.unsigned_abs(), prime), prime)
        };
        let v = (num as u128 * inv_mod(den, prime) as u128 % prime as u128) as u64;
        Ok((v as u128 * qs as u128 % prime as u128) as u64)
    }

    /// Degree-based size used to prefer small pivots.
    pub fn size_metric(&self) -> (usize, u64) {
        let (a, b) = self.num.size_metric();
        let (c, d) = self.den.size_metric();
        (a + c, b + d)
    }
}

impl Default for Qq {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Qq {
    fn from(c: i64) -> Self {
        Self::from_int(c)
    }
}

impl fmt::Display for Qq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write_laurent(f, &self.num, self.shift);
        }
        let mut num = String::new();
        write_laurent(&mut num, &self.num, self.shift)?;
        let num_is_atom = self.num.coeffs().iter().filter(|c| !c.is_zero()).count() == 1
            && !num.starts_with('-');
        if num_is_atom {
            write!(f, "{}/", num)?;
        } else {
            write!(f, "({})/", num)?;
        }
        let mut den = String::new();
        write_laurent(&mut den, &self.den, 0)?;
        if self.den.coeffs().iter().filter(|c| !c.is_zero()).count() == 1 && !den.contains('*') {
            write!(f, "{}", den)
        } else {
            write!(f, "({})", den)
        }
    }
}

impl fmt::Debug for Qq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Qq({})", self)
    }
}

impl FromStr for Qq {
    type Err = crate::literal::LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::literal::parse_scalar(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(cs: &[i64]) -> ZPoly {
        ZPoly::from_i64s(cs)
    }

    #[test]
    fn additive_identity_keeps_form() {
        let a = Qq::from_parts(0, z(&[-1, 0, 1]), z(&[0, 1]));
        assert_eq!(a.add(&Qq::zero()), a);
        assert_eq!(a.to_string(), "q-q^-1");
    }

    #[test]
    fn reduces_common_factor() {
        let a = Qq::from_parts(0, z(&[-1, 0, 1]), z(&[-1, 1]));
        assert_eq!(a, Qq::from_laurent(z(&[1, 1]), 0));
        assert!(a.is_laurent());
    }

    #[test]
    fn q_power_inverse() {
        let a = Qq::q_pow(-2);
        assert_eq!(a, Qq::one().div(&Qq::q_pow(2)).unwrap());
        assert_eq!(a.to_string(), "q^-2");
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(Qq::one().div(&Qq::zero()), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn specialization_examples() {
        let a = Qq::from_laurent(z(&[1, 1]), 0);
        assert_eq!(a.specialize_at(5, 101), Ok(6));
        let b = Qq::one().div(&Qq::from_laurent(z(&[-5, 1]), 0)).unwrap();
        assert_eq!(b.specialize_at(5, 101), Err(ScalarError::BadSpecialization));
        let c = Qq::from_parts(0, z(&[-1, 0, 1]), z(&[0, 1]));
        assert_eq!(c.specialize_at(2, 7), Ok(5));
    }

    #[test]
    fn rational_display() {
        let a = Qq::one().div(&Qq::from_laurent(z(&[-5, 1]), 0)).unwrap();
        assert_eq!(a.to_string(), "1/(q-5)");
        let b = Qq::from_parts(1, z(&[1, 1]), z(&[1, 0, 1]));
        assert_eq!(b.to_string(), "(q^2+q)/(q^2+1)");
    }

    #[test]
    fn negative_denominator_normalized() {
        let a = Qq::from_parts(0, z(&[1]), z(&[1, -1]));
        assert!(a.denom().lc().unwrap().is_positive());
        assert_eq!(a.neg(), Qq::from_parts(0, z(&[1]), z(&[-1, 1])));
    }
}
