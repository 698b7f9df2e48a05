//! Exact rational interval arithmetic and certified enclosures of the
//! irrational quantities the inequality checks consume: log2, binary
//! entropy, e, square roots, and powers of two.
//!
//! log2 uses argument reduction to [1,2) followed by bit-by-bit squaring in
//! big-integer fixed point; e uses the series sum 1/k! with the explicit
//! tail bound 2/(N+1)!. Both produce nested enclosures as the requested
//! precision grows, so a comparison decided at some precision stays decided.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bounds::factorial::factorial;
use crate::error::{Error, Result};

/// Precision ceiling for automatic refinement, in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 512;

/// An exact rational interval [lo, hi] guaranteed to contain a real value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalEnclosure {
    lo: BigRational,
    hi: BigRational,
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl RationalEnclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvariantViolation(format!(
                "enclosure endpoints out of order: {lo} > {hi}"
            )));
        }
        Ok(RationalEnclosure { lo, hi })
    }

    pub fn exact(v: BigRational) -> Self {
        RationalEnclosure { lo: v.clone(), hi: v }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_enclosure(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalEnclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RationalEnclosure {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Self {
        RationalEnclosure {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn add_rational(&self, v: &BigRational) -> Self {
        RationalEnclosure {
            lo: &self.lo + v,
            hi: &self.hi + v,
        }
    }

    /// Multiply by an exact rational, sign-aware.
    pub fn scale(&self, v: &BigRational) -> Self {
        if v.is_negative() {
            RationalEnclosure {
                lo: &self.hi * v,
                hi: &self.lo * v,
            }
        } else {
            RationalEnclosure {
                lo: &self.lo * v,
                hi: &self.hi * v,
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let c: [BigRational; 4] = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RationalEnclosure { lo, hi }
    }

    /// Reciprocal; the interval must not contain zero.
    pub fn recip(&self) -> Result<Self> {
        if self.lo.is_negative() != self.hi.is_negative() || self.lo.is_zero() || self.hi.is_zero()
        {
            return Err(Error::InvariantViolation(
                "reciprocal of an interval containing zero".into(),
            ));
        }
        Ok(RationalEnclosure {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    /// Integer power of a non-negative interval.
    pub fn powi(&self, e: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::InvariantViolation(
                "powi requires a non-negative interval".into(),
            ));
        }
        let p = |v: &BigRational| -> BigRational {
            let mut acc = BigRational::one();
            for _ in 0..e {
                acc *= v;
            }
            acc
        };
        Ok(RationalEnclosure {
            lo: p(&self.lo),
            hi: p(&self.hi),
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    /// Entire interval <= c?
    pub fn le_rational(&self, c: &BigRational) -> Option<bool> {
        if &self.hi <= c {
            Some(true)
        } else if &self.lo > c {
            Some(false)
        } else {
            None
        }
    }

    pub fn lt_rational(&self, c: &BigRational) -> Option<bool> {
        if &self.hi < c {
            Some(true)
        } else if &self.lo >= c {
            Some(false)
        } else {
            None
        }
    }

    pub fn ge_rational(&self, c: &BigRational) -> Option<bool> {
        if &self.lo >= c {
            Some(true)
        } else if &self.hi < c {
            Some(false)
        } else {
            None
        }
    }

    /// Is self <= other certain (or certainly false)?
    pub fn le(&self, other: &Self) -> Option<bool> {
        if self.hi <= other.lo {
            Some(true)
        } else if self.lo > other.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn lt(&self, other: &Self) -> Option<bool> {
        if self.hi < other.lo {
            Some(true)
        } else if self.lo >= other.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn ge(&self, other: &Self) -> Option<bool> {
        other.le(self)
    }

    pub fn endpoint_strings(&self) -> (String, String) {
        (self.lo.to_string(), self.hi.to_string())
    }
}

fn is_power_of_two(v: &BigUint) -> bool {
    !v.is_zero() && v.count_ones() == 1
}

fn pow2_exact(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// floor(log2 x) for x > 0, by exact comparison against powers of two.
fn floor_log2(x: &BigRational) -> i64 {
    let p = x.numer().magnitude();
    let q = x.denom().magnitude();
    let mut k = p.bits() as i64 - q.bits() as i64;
    // x / 2^k is within a factor 2 of [1,2); fix up by exact comparison.
    let ge_pow = |k: i64| -> bool {
        // x >= 2^k ?
        if k >= 0 {
            *x.numer().magnitude() >= q.clone() << k as usize
        } else {
            p.clone() << (-k) as usize >= *q
        }
    };
    while !ge_pow(k) {
        k -= 1;
    }
    while ge_pow(k + 1) {
        k += 1;
    }
    k
}

/// Enclosure of log2(x) with width <= 2^-precision, exact on powers of two.
pub fn log2_enclosure(x: &BigRational, precision: u32) -> Result<RationalEnclosure> {
    if !x.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "log2 requires a positive argument, got {x}"
        )));
    }
    let p = x.numer().magnitude();
    let q = x.denom().magnitude();
    if is_power_of_two(p) && is_power_of_two(q) {
        let k = p.bits() as i64 - q.bits() as i64;
        return Ok(RationalEnclosure::exact(rat_int(k)));
    }
    let k = floor_log2(x);
    let m = x / pow2_exact(k); // in [1, 2)
    let mp = m.numer().magnitude().clone();
    let mq = m.denom().magnitude().clone();

    let mut w: usize = 2 * precision as usize + 64;
    'restart: for _attempt in 0..8 {
        let scale_bits = w;
        let two_scaled: BigUint = BigUint::one() << (scale_bits + 1);
        let scaled_num: BigUint = mp.clone() << scale_bits;
        let mut ylo: BigUint = &scaled_num / &mq;
        let mut yhi: BigUint = if (&scaled_num % &mq).is_zero() {
            ylo.clone()
        } else {
            &ylo + 1u32
        };
        let mut acc = BigUint::zero();
        for _bit in 0..precision {
            ylo = (&ylo * &ylo) >> scale_bits;
            yhi = ((&yhi * &yhi) + ((BigUint::one() << scale_bits) - 1u32)) >> scale_bits;
            if ylo >= two_scaled {
                acc = (acc << 1) | BigUint::one();
                ylo >>= 1;
                yhi = (&yhi + 1u32) >> 1;
            } else if yhi < two_scaled {
                acc <<= 1;
            } else {
                // interval straddles 2: not enough working precision
                w *= 2;
                continue 'restart;
            }
        }
        let denom = BigInt::one() << precision as usize;
        let frac_lo = BigRational::new(BigInt::from(acc.clone()), denom.clone());
        let frac_hi = BigRational::new(BigInt::from(acc + 1u32), denom);
        let base = rat_int(k);
        return RationalEnclosure::new(&base + frac_lo, base + frac_hi);
    }
    Err(Error::InvariantViolation(
        "log2 bit extraction failed to converge".into(),
    ))
}

/// Enclosure of log2 over a positive interval (log2 is increasing).
pub fn log2_on_interval(x: &RationalEnclosure, precision: u32) -> Result<RationalEnclosure> {
    let lo = log2_enclosure(x.lo(), precision)?;
    let hi = log2_enclosure(x.hi(), precision)?;
    RationalEnclosure::new(lo.lo().clone(), hi.hi().clone())
}

/// Enclosure of the binary entropy H(d) = -d log2 d - (1-d) log2(1-d) for
/// rational d in (0,1); width <= 2^(-precision+2).
pub fn entropy_enclosure(delta: &BigRational, precision: u32) -> Result<RationalEnclosure> {
    let one = BigRational::one();
    if !delta.is_positive() || delta >= &one {
        return Err(Error::InvalidParameter(format!(
            "entropy requires 0 < delta < 1, got {delta}"
        )));
    }
    let comp = &one - delta;
    let l1 = log2_enclosure(delta, precision + 4)?;
    let l2 = log2_enclosure(&comp, precision + 4)?;
    Ok(l1.scale(delta).add(&l2.scale(&comp)).neg())
}

/// Entropy over an interval of arguments inside (0,1). Uses monotonicity on
/// either side of 1/2 and the global maximum H = 1 when the interval
/// straddles it.
pub fn entropy_on_interval(d: &RationalEnclosure, precision: u32) -> Result<RationalEnclosure> {
    let half = rat(1, 2);
    let h_lo = entropy_enclosure(d.lo(), precision)?;
    let h_hi = entropy_enclosure(d.hi(), precision)?;
    if d.hi() <= &half {
        RationalEnclosure::new(h_lo.lo().clone(), h_hi.hi().clone())
    } else if d.lo() >= &half {
        RationalEnclosure::new(h_hi.lo().clone(), h_lo.hi().clone())
    } else {
        let lo = h_lo.lo().min(h_hi.lo()).clone();
        RationalEnclosure::new(lo, BigRational::one())
    }
}

/// Enclosure of e by partial sums of 1/k! with tail bound 2/(N+1)!;
/// width <= 2^-precision.
pub fn euler_enclosure(precision: u32) -> RationalEnclosure {
    // smallest N with 2/(N+1)! <= 2^-precision, i.e. (N+1)! >= 2^(precision+1)
    let mut n = 1usize;
    while factorial(n + 1).bits() <= precision as u64 + 1 {
        n += 1;
    }
    // U_N = sum_{k<=N} N!/k! via U_k = k*U_{k-1} + 1
    let mut u = BigUint::one();
    for k in 1..=n {
        u = u * BigUint::from(k) + BigUint::one();
    }
    let nfact = factorial(n);
    let lo = BigRational::new(BigInt::from(u), BigInt::from(nfact));
    let tail = BigRational::new(BigInt::from(2), BigInt::from(factorial(n + 1)));
    let hi = &lo + tail;
    RationalEnclosure { lo, hi }
}

/// Enclosure of sqrt(x) for x >= 0 with width <= 2^-precision.
pub fn sqrt_enclosure(x: &BigRational, precision: u32) -> Result<RationalEnclosure> {
    if x.is_negative() {
        return Err(Error::InvalidParameter(format!(
            "sqrt requires a non-negative argument, got {x}"
        )));
    }
    let w = precision as u64 + 2;
    // floor(x * 4^w) then integer sqrt
    let scaled = (x.numer().magnitude() << (2 * w)) / x.denom().magnitude();
    let root = scaled.sqrt();
    let denom = BigInt::one() << w as usize;
    let lo = BigRational::new(BigInt::from(root.clone()), denom.clone());
    let hi = BigRational::new(BigInt::from(root + 1u32), denom);
    RationalEnclosure::new(lo, hi)
}

/// Enclosure of 2^y for rational y, width <= 2^(-precision) * 2^ceil(y).
pub fn pow2_rational(y: &BigRational, precision: u32) -> Result<RationalEnclosure> {
    let j = y.floor();
    let frac = y - &j;
    let j_int: i64 = j
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!("exponent {y} out of range")))?;
    let base = pow2_exact(j_int);
    if frac.is_zero() {
        return Ok(RationalEnclosure::exact(base));
    }
    // bisection for 2^frac in [1,2]; mid is dyadic so log2(mid) is irrational
    // (mid is never a power of two strictly inside (1,2)) and each comparison
    // against the rational frac is decidable at finite precision.
    let mut lo = BigRational::one();
    let mut hi = rat_int(2);
    for _ in 0..=precision {
        let mid = (&lo + &hi) / rat_int(2);
        let mut p = 32;
        loop {
            let enc = log2_enclosure(&mid, p)?;
            if enc.hi() <= &frac {
                lo = mid;
                break;
            } else if enc.lo() >= &frac {
                hi = mid;
                break;
            }
            p *= 2;
            if p > 1 << 16 {
                return Err(Error::InvariantViolation(
                    "pow2 bisection failed to separate".into(),
                ));
            }
        }
    }
    Ok(RationalEnclosure {
        lo: &base * lo,
        hi: base * hi,
    })
}

/// Enclosure of 2^y over an interval of exponents (monotone).
pub fn pow2_on_interval(y: &RationalEnclosure, precision: u32) -> Result<RationalEnclosure> {
    let lo = pow2_rational(y.lo(), precision)?;
    let hi = pow2_rational(y.hi(), precision)?;
    RationalEnclosure::new(lo.lo().clone(), hi.hi().clone())
}

/// Enclosure of base^e for a positive interval base and rational exponent.
/// Integer exponents are handled exactly; otherwise 2^(e*log2 base).
pub fn pow_enclosure(
    base: &RationalEnclosure,
    e: &BigRational,
    precision: u32,
) -> Result<RationalEnclosure> {
    if !base.lo().is_positive() {
        return Err(Error::InvalidParameter(
            "pow_enclosure requires a positive base interval".into(),
        ));
    }
    if e.is_integer() {
        let k: i64 = e
            .to_integer()
            .try_into()
            .map_err(|_| Error::InvalidParameter(format!("exponent {e} out of range")))?;
        return if k >= 0 {
            base.powi(k as u32)
        } else {
            base.powi((-k) as u32)?.recip()
        };
    }
    let lg = log2_on_interval(base, precision + 8)?;
    pow2_on_interval(&lg.scale(e), precision)
}

/// Decide floor of the real enclosed by `enc`, if the enclosure pins it.
pub fn decide_floor(enc: &RationalEnclosure) -> Option<BigInt> {
    let f_lo = enc.lo().floor().to_integer();
    let f_hi = enc.hi().floor().to_integer();
    // exact integer upper endpoint belongs to the same floor bucket unless
    // the value could equal hi itself; floor is still f_lo when they agree.
    if f_lo == f_hi {
        Some(f_lo)
    } else if &f_hi - &f_lo == BigInt::one() && enc.hi().is_integer() {
        // [lo, hi] with hi an exact integer: value could be hi, floor ambiguous
        None
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_f64(r: &BigRational) -> f64 {
        let num = r.numer().to_string().parse::<f64>().unwrap();
        let den = r.denom().to_string().parse::<f64>().unwrap();
        num / den
    }

    #[test]
    fn log2_exact_powers() {
        let e = log2_enclosure(&rat_int(8), 40).unwrap();
        assert_eq!(e.lo(), &rat_int(3));
        assert_eq!(e.hi(), &rat_int(3));
        let e = log2_enclosure(&rat_int(1), 40).unwrap();
        assert_eq!(e.lo(), &rat_int(0));
        let e = log2_enclosure(&rat(1, 4), 40).unwrap();
        assert_eq!(e.lo(), &rat_int(-2));
    }

    #[test]
    fn log2_ten_squaring_cross_check() {
        let p = 44;
        let l10 = log2_enclosure(&rat_int(10), p).unwrap();
        assert!(l10.width() <= pow2_exact(-40));
        // log2(100) = 2*log2(10): enclosures of the same value must intersect
        let l100 = log2_enclosure(&rat_int(100), p).unwrap();
        let doubled = l10.scale(&rat_int(2));
        assert!(l100.intersects(&doubled));
        // sanity against double-precision evaluation
        let mid = to_f64(l10.lo());
        assert!((mid - 10f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn log2_width_and_nesting() {
        let x = rat(7, 3);
        let mut prev: Option<RationalEnclosure> = None;
        for p in [8u32, 16, 24, 40] {
            let e = log2_enclosure(&x, p).unwrap();
            assert!(e.width() <= pow2_exact(-(p as i64)));
            if let Some(prev) = &prev {
                assert!(prev.contains_enclosure(&e));
            }
            prev = Some(e);
        }
    }

    #[test]
    fn entropy_half_is_one() {
        let e = entropy_enclosure(&rat(1, 2), 50).unwrap();
        assert_eq!(e.lo(), &rat_int(1));
        assert_eq!(e.hi(), &rat_int(1));
    }

    #[test]
    fn entropy_quarter_identity() {
        // H(1/4) = 2 - (3/4) log2 3
        let h = entropy_enclosure(&rat(1, 4), 48).unwrap();
        let rhs = RationalEnclosure::exact(rat_int(2))
            .sub(&log2_enclosure(&rat_int(3), 48).unwrap().scale(&rat(3, 4)));
        assert!(h.intersects(&rhs));
        assert!(h.width() <= pow2_exact(-44));
    }

    #[test]
    fn euler_low_precision_bracket() {
        let e = euler_enclosure(16);
        assert!(e.lo() >= &rat(27, 10));
        assert!(e.hi() <= &rat(272, 100));
        assert!(e.width() <= pow2_exact(-16));
    }

    #[test]
    fn euler_nesting() {
        let a = euler_enclosure(20);
        let b = euler_enclosure(40);
        assert!(a.contains_enclosure(&b));
    }

    #[test]
    fn sqrt_basics() {
        let s = sqrt_enclosure(&rat_int(2), 40).unwrap();
        let two = s.mul(&s);
        assert!(two.contains(&rat_int(2)));
        let s = sqrt_enclosure(&rat_int(9), 40).unwrap();
        assert!(s.contains(&rat_int(3)));
    }

    #[test]
    fn pow2_rational_values() {
        let p = pow2_rational(&rat_int(5), 30).unwrap();
        assert_eq!(p.lo(), &rat_int(32));
        let p = pow2_rational(&rat(1, 2), 40).unwrap();
        // 2^(1/2) = sqrt(2)
        let s = sqrt_enclosure(&rat_int(2), 40).unwrap();
        assert!(p.intersects(&s));
        let p = pow2_rational(&rat(-3, 2), 40).unwrap();
        let expect = 2f64.powf(-1.5);
        assert!(to_f64(p.lo()) <= expect && expect <= to_f64(p.hi()) + 1e-12);
    }

    #[test]
    fn random_log2_against_f64() {
        // cheap pseudo-random rationals; f64 log2 has ~1e-15 relative error,
        // far inside the interval width at precision 30
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for _ in 0..100 {
            let num = (next() % 10_000 + 1) as i64;
            let den = (next() % 10_000 + 1) as i64;
            let x = rat(num, den);
            let enc = log2_enclosure(&x, 30).unwrap();
            let truth = (num as f64 / den as f64).log2();
            assert!(
                to_f64(enc.lo()) - 1e-6 <= truth && truth <= to_f64(enc.hi()) + 1e-6,
                "log2({num}/{den})"
            );
        }
    }

    #[test]
    fn floor_decision() {
        let e = RationalEnclosure::new(rat(29, 10), rat(299, 100)).unwrap();
        assert_eq!(decide_floor(&e), Some(BigInt::from(2)));
        let e = RationalEnclosure::new(rat(29, 10), rat(31, 10)).unwrap();
        assert_eq!(decide_floor(&e), None);
    }
}
