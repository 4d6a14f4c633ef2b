//! Inputs shared by the benchmarks: the flagship quaternion discriminant
//! and runs of negative fundamental discriminants at chosen sizes.

use shimura_core::arith::is_fundamental_discriminant;
use shimura_core::QuaternionDisc;

pub const ELL: u64 = 23;
pub const M: u64 = 107;

pub fn flagship() -> QuaternionDisc {
    QuaternionDisc::new(ELL * M).expect("23 * 107 is a valid discriminant")
}

/// The first `count` negative fundamental discriminants at or below `-size`.
pub fn fundamental_discs_below(size: i64, count: usize) -> Vec<i64> {
    (size..)
        .map(|n| -n)
        .filter(|&d| is_fundamental_discriminant(d))
        .take(count)
        .collect()
}

/// The first prime at or above `n`.
pub fn prime_at_least(n: u64) -> u64 {
    (n..)
        .find(|&p| shimura_core::arith::is_prime_u64(p))
        .expect("primes are unbounded")
}
