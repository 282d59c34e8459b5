//! Exact coefficient arithmetic over `Q(q)` and its prime-field specializations.

mod laurent_q;
mod modular;
mod poly;
mod qq;

pub use laurent_q::QLaurent;
pub use modular::{add_mod, inv_mod, is_prime, mul_mod, pow_mod, sub_mod, ModEval, DEFAULT_PRIMES};
pub use poly::ZPoly;
pub use qq::Qq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero in Q(q)")]
    DivisionByZero,
    #[error("denominator vanishes at the chosen specialization point")]
    BadSpecialization,
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
}

/// Coefficient ring used by the constant-term engine.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Embeds a `Q(q)` value, or `None` when it has no representative here.
    fn from_qq(x: &Qq) -> Option<Self>;
    fn to_qq(&self) -> Qq;
}

impl Coeff for Qq {
    fn zero() -> Self {
        Qq::zero()
    }
    fn one() -> Self {
        Qq::one()
    }
    fn is_zero(&self) -> bool {
        Qq::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Qq::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Qq::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Qq::mul(self, other)
    }
    fn neg(&self) -> Self {
        Qq::neg(self)
    }
    fn from_qq(x: &Qq) -> Option<Self> {
        Some(x.clone())
    }
    fn to_qq(&self) -> Qq {
        self.clone()
    }
}
