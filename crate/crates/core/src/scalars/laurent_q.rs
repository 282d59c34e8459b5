use num_bigint::BigInt;

use super::{Coeff, Qq, ZPoly};

/// Laurent polynomial in `q` with machine-integer coefficients.
///
/// Fast coefficient ring for constant-term kernels whose data are all powers
/// of `q`. Both ends are trimmed, so equality is structural. Arithmetic
/// overflow panics rather than wrapping.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QLaurent {
    low: i32,
    coeffs: Vec<i128>,
}

fn checked_add(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("QLaurent coefficient overflow")
}

fn checked_mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("QLaurent coefficient overflow")
}

impl QLaurent {
    pub fn monomial(c: i128, k: i32) -> Self {
        Self::from_raw(k, vec![c])
    }

    pub fn q_pow(k: i32) -> Self {
        Self::monomial(1, k)
    }

    fn from_raw(mut low: i32, mut coeffs: Vec<i128>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|&&c| c == 0).count();
        if lead == coeffs.len() {
            return QLaurent { low: 0, coeffs: Vec::new() };
        }
        coeffs.drain(..lead);
        low += lead as i32;
        QLaurent { low, coeffs }
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn scale(&self, c: i128) -> Self {
        Self::from_raw(self.low, self.coeffs.iter().map(|&a| checked_mul(a, c)).collect())
    }

    pub fn shift(&self, k: i32) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        QLaurent { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    /// Value at `q = x` modulo the prime `p`.
    pub fn eval_mod(&self, x: u64, p: u64) -> u64 {
        use super::modular::{inv_mod, mul_mod, pow_mod};
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            let c = c.rem_euclid(p as i128) as u64;
            acc = ((mul_mod(acc, x, p) as u128 + c as u128) % p as u128) as u64;
        }
        let xs = if self.low >= 0 {
            pow_mod(x, self.low as u64, p)
        } else {
            inv_mod(pow_mod(x, self.low.unsigned_abs() as u64, p), p)
        };
        mul_mod(acc, xs, p)
    }
}

impl Coeff for QLaurent {
    fn zero() -> Self {
        QLaurent::default()
    }

    fn one() -> Self {
        QLaurent::monomial(1, 0)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() {
            return other.clone();
        }
        if other.coeffs.is_empty() {
            return self.clone();
        }
        let low = self.low.min(other.low);
        let high = (self.low + self.coeffs.len() as i32).max(other.low + other.coeffs.len() as i32);
        let mut out = vec![0i128; (high - low) as usize];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let slot = &mut out[(self.low - low) as usize + k];
            *slot = checked_add(*slot, c);
        }
        for (k, &c) in other.coeffs.iter().enumerate() {
            let slot = &mut out[(other.low - low) as usize + k];
            *slot = checked_add(*slot, c);
        }
        Self::from_raw(low, out)
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = checked_add(out[i + j], checked_mul(a, b));
            }
        }
        Self::from_raw(self.low + other.low, out)
    }

    fn neg(&self) -> Self {
        QLaurent { low: self.low, coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }

    fn from_qq(x: &Qq) -> Option<Self> {
        let (shift, p) = x.as_laurent()?;
        let coeffs = p
            .coeffs()
            .iter()
            .map(|c| i128::try_from(c).ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_raw(i32::try_from(shift).ok()?, coeffs))
    }

    fn to_qq(&self) -> Qq {
        let p = ZPoly::from_coeffs(self.coeffs.iter().map(|&c| BigInt::from(c)).collect());
        Qq::from_laurent(p, self.low as i64)
    }
}
