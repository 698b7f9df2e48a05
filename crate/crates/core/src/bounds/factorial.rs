use num_bigint::BigUint;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::sync::RwLock;

/// Hard cap on the cached factorial table.
pub const MAX_FACTORIAL: usize = 100_000;

static CACHE: Lazy<RwLock<Vec<BigUint>>> = Lazy::new(|| RwLock::new(vec![BigUint::one()]));

/// Exact n!, memoized. The table only ever grows, so concurrent readers see
/// either a complete prefix or trigger the (idempotent) extension.
pub fn factorial(n: usize) -> BigUint {
    assert!(n <= MAX_FACTORIAL, "factorial({n}) beyond supported range");
    {
        let cache = CACHE.read().unwrap();
        if n < cache.len() {
            return cache[n].clone();
        }
    }
    let mut cache = CACHE.write().unwrap();
    while cache.len() <= n {
        let k = cache.len();
        let next = cache[k - 1].clone() * BigUint::from(k);
        cache.push(next);
    }
    cache[n].clone()
}

/// Exact derangement number D_m as a big integer, by the recurrence
/// D_m = (m-1)(D_{m-1} + D_{m-2}).
pub fn derangement_big(m: usize) -> BigUint {
    let mut prev2 = BigUint::one(); // D_0
    let mut prev1 = BigUint::zero(); // D_1
    if m == 0 {
        return prev2;
    }
    for k in 2..=m {
        let next = (prev1.clone() + &prev2) * BigUint::from(k - 1);
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}
