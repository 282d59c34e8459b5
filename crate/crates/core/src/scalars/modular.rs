use serde::{Deserialize, Serialize};

use super::ScalarError;

/// Default evaluation primes: the Mersenne primes `2^61 - 1` and `2^31 - 1`.
pub const DEFAULT_PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 2_147_483_647];

const PRIME_FLOOR: u64 = 1 << 30;

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime; the caller guarantees `a != 0 mod p`.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Validated specialization point `q -> q_value` in `F_prime`.
///
/// Invariants: `prime` is prime and exceeds `2^30`; `q_value^k != 1` for
/// `1 <= k <= order_guard`, so `q_value` behaves like a non-root-of-unity up to
/// the degrees in play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModEval {
    prime: u64,
    q_value: u64,
    order_guard: u32,
}

impl ModEval {
    pub fn new(prime: u64, q_value: u64, order_guard: u32) -> Result<Self, ScalarError> {
        if prime <= PRIME_FLOOR || prime >= 1 << 63 {
            return Err(ScalarError::InvalidModulus(format!(
                "prime {prime} must lie in (2^30, 2^63)"
            )));
        }
        if !is_prime(prime) {
            return Err(ScalarError::InvalidModulus(format!("{prime} is not prime")));
        }
        let q_value = q_value % prime;
        if q_value == 0 {
            return Err(ScalarError::InvalidModulus("q_value is zero mod prime".into()));
        }
        let mut x = 1;
        for k in 1..=order_guard {
            x = mul_mod(x, q_value, prime);
            if x == 1 {
                return Err(ScalarError::InvalidModulus(format!(
                    "q_value has multiplicative order {k} <= guard {order_guard}"
                )));
            }
        }
        Ok(ModEval { prime, q_value, order_guard })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn q_value(&self) -> u64 {
        self.q_value
    }

    pub fn order_guard(&self) -> u32 {
        self.order_guard
    }

    pub fn specialize(&self, a: &super::Qq) -> Result<u64, ScalarError> {
        a.specialize_at(self.q_value, self.prime)
    }
}
