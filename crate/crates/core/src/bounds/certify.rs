//! Certified verdicts for the numeric inequalities the diversity bound
//! rests on. Every comparison against an irrational quantity goes through a
//! rational enclosure with automatic precision doubling up to a cap; every
//! comparison between factorial-sized integers is done exactly. A claim is
//! only ever `Proved` or `Refuted` when the enclosures strictly separate the
//! two sides.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::bounds::enclosure::{
    decide_floor, entropy_enclosure, entropy_on_interval, euler_enclosure, log2_enclosure,
    log2_on_interval, pow_enclosure, rat, rat_int, RationalEnclosure,
};
use crate::bounds::factorial::{derangement_big, factorial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Proved,
    Refuted,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnclosureRecord {
    pub name: String,
    pub lo: String,
    pub hi: String,
}

impl EnclosureRecord {
    fn new(name: &str, e: &RationalEnclosure) -> Self {
        let (lo, hi) = e.endpoint_strings();
        EnclosureRecord {
            name: name.to_string(),
            lo,
            hi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub claim: String,
    pub params: String,
    pub verdict: Verdict,
    pub note: Option<String>,
    pub enclosures: Vec<EnclosureRecord>,
    pub precision: u32,
}

impl CertificateReport {
    fn exact(claim: &str, params: &str, holds: bool) -> Self {
        CertificateReport {
            claim: claim.to_string(),
            params: params.to_string(),
            verdict: if holds { Verdict::Proved } else { Verdict::Refuted },
            note: Some("exact integer arithmetic".into()),
            enclosures: Vec::new(),
            precision: 0,
        }
    }
}

pub fn all_proved(reports: &[CertificateReport]) -> bool {
    !reports.is_empty() && reports.iter().all(|r| r.verdict == Verdict::Proved)
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn rat_big(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Run a decision procedure with doubling precision until it separates or
/// the cap is reached.
fn decide<F>(cap: u32, mut f: F) -> Result<(Verdict, u32, Vec<EnclosureRecord>)>
where
    F: FnMut(u32) -> Result<(Option<bool>, Vec<EnclosureRecord>)>,
{
    let mut p = 64u32.min(cap);
    loop {
        let (d, encs) = f(p)?;
        if let Some(v) = d {
            let verdict = if v { Verdict::Proved } else { Verdict::Refuted };
            return Ok((verdict, p, encs));
        }
        if p >= cap {
            return Ok((Verdict::Undecided, p, encs));
        }
        p = (p * 2).min(cap);
    }
}

fn report_decided(
    claim: &str,
    params: &str,
    note: &str,
    cap: u32,
    f: impl FnMut(u32) -> Result<(Option<bool>, Vec<EnclosureRecord>)>,
) -> Result<CertificateReport> {
    let (verdict, precision, enclosures) = decide(cap, f)?;
    Ok(CertificateReport {
        claim: claim.to_string(),
        params: params.to_string(),
        verdict,
        note: Some(note.to_string()),
        enclosures,
        precision,
    })
}

/// Enclosure of q = 4 log2 n.
pub fn q_enclosure(n: u64, precision: u32) -> Result<RationalEnclosure> {
    Ok(log2_enclosure(&rat_int(n as i64), precision)?.scale(&rat_int(4)))
}

/// floor(4 log2 n), decided by enclosure refinement.
pub fn q_floor(n: u64, cap: u32) -> Result<u64> {
    let mut p = 64u32.min(cap);
    loop {
        let q = q_enclosure(n, p)?;
        if let Some(f) = decide_floor(&q) {
            return Ok(f.to_u64().ok_or_else(|| {
                Error::InvalidParameter("q out of u64 range".into())
            })?);
        }
        if p >= cap {
            return Err(Error::InvariantViolation(format!(
                "floor(4 log2 {n}) undecided at precision {cap}"
            )));
        }
        p = (p * 2).min(cap);
    }
}

/// Enclosure of delta = 1/(2 log2 (2n)).
fn delta_enclosure(n: u64, precision: u32) -> Result<RationalEnclosure> {
    let log2_2n = log2_enclosure(&rat_int(n as i64), precision)?.add_rational(&rat_int(1));
    log2_2n.scale(&rat_int(2)).recip()
}

fn hypothesis_report(claim: &str, n: u64) -> CertificateReport {
    CertificateReport {
        claim: claim.to_string(),
        params: format!("n={n}"),
        verdict: Verdict::Undecided,
        note: Some("hypothesis not met: requires n >= 500".into()),
        enclosures: Vec::new(),
        precision: 0,
    }
}

/// Certify the preliminary inequalities used with r = n/3,
/// delta = 1/(2 log2 (2n)), q = 4 log2 n and f(x) = r^x (n-x)!:
/// the entropy bound, the spreadness threshold, the unimodality of f at
/// integer points, and f(x) <= (n-4)! at both ends of the integer range
/// (q, n]. Requires n >= 500; smaller n yields an undecided
/// hypothesis-not-met report.
pub fn check_decomposition_bounds(n: u64, precision_cap: u32) -> Result<Vec<CertificateReport>> {
    if n as usize > crate::bounds::factorial::MAX_FACTORIAL {
        return Err(Error::InvalidParameter(format!(
            "n={n} beyond factorial table limit"
        )));
    }
    if n < 500 {
        return Ok(vec![hypothesis_report("decomp.hypothesis", n)]);
    }
    let params = format!("n={n}");
    let mut out = Vec::new();
    let threshold = rat(36, 125); // 0.288

    // (a) H(delta) <= 0.288
    out.push(report_decided(
        "decomp.a",
        &params,
        "H(1/(2 log2 2n)) <= 0.288",
        precision_cap,
        |p| {
            let d = delta_enclosure(n, p)?;
            if d.hi() >= &rat(1, 2) {
                return Ok((None, vec![EnclosureRecord::new("delta", &d)]));
            }
            let h = entropy_on_interval(&d, p)?;
            let encs = vec![
                EnclosureRecord::new("delta", &d),
                EnclosureRecord::new("H(delta)", &h),
            ];
            Ok((h.le_rational(&threshold), encs))
        },
    )?);

    // (b) r >= 2^(2(1+H(delta)))/delta, certified in log form:
    //     log2 r + log2 delta >= 2 + 2 H(delta)
    out.push(report_decided(
        "decomp.b",
        &params,
        "r >= 2^(2(1+H))/delta, via log2 r + log2 delta >= 2 + 2 H(delta)",
        precision_cap,
        |p| {
            let d = delta_enclosure(n, p)?;
            if d.hi() >= &rat(1, 2) {
                return Ok((None, vec![]));
            }
            let h = entropy_on_interval(&d, p)?;
            let lhs = log2_enclosure(&rat(n as i64, 3), p)?.add(&log2_on_interval(&d, p)?);
            let rhs = h.scale(&rat_int(2)).add_rational(&rat_int(2));
            let encs = vec![
                EnclosureRecord::new("lhs=log2(r)+log2(delta)", &lhs),
                EnclosureRecord::new("rhs=2+2H(delta)", &rhs),
            ];
            Ok((lhs.ge(&rhs), encs))
        },
    )?);

    // (c) the ratio identity f(i+1)/f(i) = n/(3(n-i)), exact at sampled
    //     integers, and the sign pattern ratio < 1 iff i < 2n/3 at all i.
    {
        let two_thirds = (2 * n) / 3;
        let mut samples: Vec<u64> = vec![1, 2, two_thirds.saturating_sub(1), two_thirds,
            two_thirds + 1, n - 2, n - 1];
        samples.retain(|&i| i >= 1 && i < n);
        samples.dedup();
        let r = rat(n as i64, 3);
        let mut identity_ok = true;
        for &i in &samples {
            let f_i = r.pow(i as i32) * rat_big(factorial((n - i) as usize));
            let f_i1 = r.pow(i as i32 + 1) * rat_big(factorial((n - i - 1) as usize));
            let ratio = f_i1 / f_i;
            let claim = rat(n as i64, 3 * (n - i) as i64);
            if ratio != claim {
                identity_ok = false;
            }
        }
        let mut pattern_ok = true;
        for i in 1..n {
            let decreasing = 3 * (n - i) > n; // ratio < 1
            if decreasing != (3 * i < 2 * n) {
                pattern_ok = false;
            }
        }
        out.push(CertificateReport::exact(
            "decomp.c",
            &params,
            identity_ok && pattern_ok,
        ));
    }

    // (d) f at the first integer past q, certified link by link:
    //     f(x*) <= 2^-x* n! < n^-4 n! <= (n-4)! where x* = floor(q)+1.
    let q_int = q_floor(n, precision_cap)?;
    let x_star = q_int + 1;
    out.push(report_decided(
        "decomp.d.x-exceeds-q",
        &params,
        "x* = floor(q)+1 > q",
        precision_cap,
        |p| {
            let q = q_enclosure(n, p)?;
            let encs = vec![EnclosureRecord::new("q=4log2(n)", &q)];
            Ok((q.lt_rational(&rat_int(x_star as i64)), encs))
        },
    )?);
    out.push(CertificateReport::exact(
        "decomp.d.tail-room",
        &params,
        // 2n/3 <= n - x*, the factor comparison behind (2n/3)^x (n-x)! <= n!
        rat_int(2 * n as i64) <= rat_int(3 * (n - x_star) as i64),
    ));
    {
        // f(x*) <= 2^-x* n!  <=>  2^x* n^x* (n-x*)! <= 3^x* n!
        let lhs = big(2).pow(x_star as u32) * big(n).pow(x_star as u32)
            * factorial((n - x_star) as usize);
        let rhs = big(3).pow(x_star as u32) * factorial(n as usize);
        out.push(CertificateReport::exact(
            "decomp.d.f-below-halving",
            &params,
            lhs <= rhs,
        ));
    }
    out.push(CertificateReport::exact(
        "decomp.d.halving-below-poly",
        &params,
        // 2^-x* < n^-4  <=>  n^4 < 2^x*
        big(n).pow(4) < BigUint::one() << (x_star as usize),
    ));
    out.push(CertificateReport::exact(
        "decomp.d.poly-below-factorial",
        &params,
        // n^-4 n! <= (n-4)!  <=>  n(n-1)(n-2)(n-3) <= n^4
        factorial(n as usize) <= big(n).pow(4) * factorial((n - 4) as usize),
    ));
    {
        // direct: f(x*) <= (n-4)!  <=>  n^x* (n-x*)! <= 3^x* (n-4)!
        let lhs = big(n).pow(x_star as u32) * factorial((n - x_star) as usize);
        let rhs = big(3).pow(x_star as u32) * factorial((n - 4) as usize);
        out.push(CertificateReport::exact(
            "decomp.d.direct",
            &params,
            lhs <= rhs,
        ));
    }

    // (e) f(n) = (n/3)^n <= n^-4 n! <= (n-4)!
    out.push(CertificateReport::exact(
        "decomp.e",
        &params,
        // (n/3)^n <= n^-4 n!  <=>  n^(n+4) <= 3^n n!
        big(n).pow(n as u32 + 4) <= big(3).pow(n as u32) * factorial(n as usize),
    ));
    Ok(out)
}

/// Certify the inequality chain of the concluding argument. Requires
/// n >= 500; smaller n yields an undecided hypothesis-not-met report.
pub fn check_diversity_chain(n: u64, precision_cap: u32) -> Result<Vec<CertificateReport>> {
    if n as usize > crate::bounds::factorial::MAX_FACTORIAL {
        return Err(Error::InvalidParameter(format!(
            "n={n} beyond factorial table limit"
        )));
    }
    if n < 500 {
        return Ok(vec![hypothesis_report("chain.hypothesis", n)]);
    }
    let params = format!("n={n}");
    let mut out = Vec::new();
    let q_int = q_floor(n, precision_cap)?;

    // (a) e (q+1)/(n-q) <= 1/2
    out.push(report_decided(
        "chain.a",
        &params,
        "e(q+1)/(n-q) <= 1/2",
        precision_cap,
        |p| {
            let q = q_enclosure(n, p)?;
            let num = q.add_rational(&rat_int(1));
            let den = q.neg().add_rational(&rat_int(n as i64));
            if !den.lo().is_positive() {
                return Ok((None, vec![]));
            }
            let e = euler_enclosure(p);
            let v = e.mul(&num.div(&den)?);
            let encs = vec![EnclosureRecord::new("e(q+1)/(n-q)", &v)];
            Ok((v.le_rational(&rat(1, 2)), encs))
        },
    )?);

    // (b) sum_{3<=i<=q} i^i (n-i)! <= 54 (n-3)!, twice:
    // exact summation, and the telescoping premise term ratio <= 1/2.
    let bound54 = big(54) * factorial((n - 3) as usize);
    {
        let mut sum = BigUint::zero();
        for i in 3..=q_int {
            sum += big(i).pow(i as u32) * factorial((n - i) as usize);
        }
        out.push(CertificateReport::exact(
            "chain.b.direct",
            &params,
            sum <= bound54,
        ));
    }
    {
        // 2 (i+1)^(i+1) (n-i-1)! <= i^i (n-i)!  for 3 <= i < q
        let mut ok = true;
        for i in 3..q_int {
            let lhs = big(2) * big(i + 1).pow(i as u32 + 1) * factorial((n - i - 1) as usize);
            let rhs = big(i).pow(i as u32) * factorial((n - i) as usize);
            if lhs > rhs {
                ok = false;
            }
        }
        out.push(CertificateReport::exact("chain.b.ratio", &params, ok));
    }

    // (c) 54(n-3)! + (n-4)! < (n-3)(n-3)!
    let head_bound = big(n - 3) * factorial((n - 3) as usize);
    out.push(CertificateReport::exact(
        "chain.c",
        &params,
        bound54.clone() + factorial((n - 4) as usize) < head_bound,
    ));

    // (d) (1-1/e)(n-2)! + 54(n-3)! + (n-4)! < (n-3)(n-3)!
    let tail_exact = rat_big(bound54.clone() + factorial((n - 4) as usize));
    let rhs_exact = rat_big(head_bound.clone());
    out.push(report_decided(
        "chain.d",
        &params,
        "(1-1/e)(n-2)! + 54(n-3)! + (n-4)! < (n-3)(n-3)!",
        precision_cap,
        |p| {
            let one_minus = one_minus_inv_e(p)?;
            let lhs = one_minus
                .scale(&rat_big(factorial((n - 2) as usize)))
                .add_rational(&tail_exact);
            let encs = vec![EnclosureRecord::new("lhs", &lhs)];
            Ok((lhs.lt_rational(&rhs_exact), encs))
        },
    )?);

    // (d') the same display with the star-side count replaced by the exact
    // derangement bound (1-1/e)((n-2)!+1); this is the form (f) feeds.
    out.push(report_decided(
        "chain.d.slack",
        &params,
        "(1-1/e)((n-2)!+1) + 54(n-3)! + (n-4)! < (n-3)(n-3)!",
        precision_cap,
        |p| {
            let one_minus = one_minus_inv_e(p)?;
            let lhs = one_minus
                .scale(&(rat_big(factorial((n - 2) as usize)) + rat_int(1)))
                .add_rational(&tail_exact);
            let encs = vec![EnclosureRecord::new("lhs", &lhs)];
            Ok((lhs.lt_rational(&rhs_exact), encs))
        },
    )?);

    // (e) (1-1/e)(n-2) + 55 < n-3
    out.push(report_decided(
        "chain.e",
        &params,
        "(1-1/e)(n-2) + 55 < n-3",
        precision_cap,
        |p| {
            let lhs = one_minus_inv_e(p)?
                .scale(&rat_int(n as i64 - 2))
                .add_rational(&rat_int(55));
            let encs = vec![EnclosureRecord::new("lhs", &lhs)];
            Ok((lhs.lt_rational(&rat_int(n as i64 - 3)), encs))
        },
    )?);

    // (f) (n-2)! - D_{n-2} <= (1-1/e)((n-2)!+1). This cannot be separated by
    // a fixed-width enclosure of e (the two sides differ by O(1) on
    // factorial-sized numbers), so it is certified exactly: D_m >= (m!+1)/e - 1
    // follows from (m!+1) <= e (D_m+1), checked against the rational lower
    // partial sum S_N <= e with N = m+2, where the tail loss is negligible.
    {
        let m = (n - 2) as usize;
        let d = derangement_big(m);
        let level = m + 2;
        let mut u = BigUint::one(); // sum_{k<=N} N!/k! via U_k = k U_{k-1} + 1
        for k in 1..=level {
            u = u * BigUint::from(k) + BigUint::one();
        }
        let n_fact = factorial(level);
        // (m! - D_m) U_N <= (U_N - N!) (m!+1), i.e. LHS <= (1-1/S_N)(m!+1)
        let lhs = (factorial(m) - &d) * &u;
        let rhs = (&u - &n_fact) * (factorial(m) + BigUint::one());
        out.push(CertificateReport::exact(
            "chain.f",
            &params,
            lhs <= rhs,
        ));
    }
    Ok(out)
}

/// Enclosure of (1 - 1/e).
fn one_minus_inv_e(precision: u32) -> Result<RationalEnclosure> {
    let inv = euler_enclosure(precision).recip()?;
    Ok(inv.neg().add_rational(&rat_int(1)))
}

#[derive(Debug, Clone)]
pub struct SpreadLemmaBound {
    pub enclosure: Option<RationalEnclosure>,
    pub vacuous: bool,
    pub r_delta: BigRational,
}

/// Enclosure of 1 - ((1+H(delta))/log2(r delta))^m * k, with a vacuity flag.
/// The bound is only meaningful when r*delta > 2 and the enclosure is
/// positive; r*delta <= 1 yields no enclosure at all (the logarithm is not
/// positive).
pub fn spread_lemma_bound(
    r: &BigRational,
    delta: &BigRational,
    m: &BigRational,
    k: u64,
    precision: u32,
) -> Result<SpreadLemmaBound> {
    if !r.is_positive() || !m.is_positive() {
        return Err(Error::InvalidParameter("r and m must be positive".into()));
    }
    if !delta.is_positive() || delta >= &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    let r_delta = r * delta;
    if r_delta <= BigRational::one() {
        return Ok(SpreadLemmaBound {
            enclosure: None,
            vacuous: true,
            r_delta,
        });
    }
    let shallow = r_delta <= rat_int(2);
    if k == 0 {
        return Ok(SpreadLemmaBound {
            enclosure: Some(RationalEnclosure::exact(rat_int(1))),
            vacuous: shallow,
            r_delta,
        });
    }
    let mut p = precision.max(16);
    let enc = loop {
        let h = entropy_enclosure(delta, p)?;
        let log_rd = log2_enclosure(&r_delta, p)?;
        if log_rd.lo().is_positive() {
            let base = h.add_rational(&rat_int(1)).div(&log_rd)?;
            break pow_enclosure(&base, m, p)?
                .scale(&rat_int(k as i64))
                .neg()
                .add_rational(&rat_int(1));
        }
        p *= 2;
        if p > 1 << 14 {
            return Err(Error::InvariantViolation(
                "log2(r delta) enclosure failed to separate from zero".into(),
            ));
        }
    };
    let vacuous = shallow || !enc.hi().is_positive();
    Ok(SpreadLemmaBound {
        enclosure: Some(enc),
        vacuous,
        r_delta,
    })
}

/// floor((m!+1)/e), decided by enclosure refinement.
pub fn derangement_floor(m: usize, precision_cap: u32) -> Result<BigUint> {
    let x = rat_big(factorial(m) + BigUint::one());
    let mut p = 64u32.min(precision_cap);
    loop {
        let val = euler_enclosure(p).recip()?.scale(&x);
        if let Some(f) = decide_floor(&val) {
            return f
                .to_biguint()
                .ok_or_else(|| Error::InvariantViolation("negative floor of (m!+1)/e".into()));
        }
        if p >= precision_cap {
            return Err(Error::InvariantViolation(format!(
                "floor((({m})!+1)/e) undecided at precision {precision_cap}"
            )));
        }
        p = (p * 2).min(precision_cap);
    }
}

/// The derangement identity D_m = floor((m!+1)/e), decided by enclosure.
pub fn derangement_identity_holds(m: usize, precision_cap: u32) -> Result<bool> {
    Ok(derangement_floor(m, precision_cap)? == derangement_big(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::enclosure::DEFAULT_PRECISION_CAP;

    #[test]
    fn decomposition_bounds_at_500_proved() {
        let reports = check_decomposition_bounds(500, DEFAULT_PRECISION_CAP).unwrap();
        for r in &reports {
            assert_eq!(r.verdict, Verdict::Proved, "{}: {:?}", r.claim, r.note);
        }
        assert!(all_proved(&reports));
    }

    #[test]
    fn decomposition_bounds_at_1000_proved() {
        assert!(all_proved(&check_decomposition_bounds(1000, DEFAULT_PRECISION_CAP).unwrap()));
    }

    #[test]
    fn decomposition_bounds_below_hypothesis() {
        let reports = check_decomposition_bounds(499, DEFAULT_PRECISION_CAP).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].verdict, Verdict::Undecided);
        assert!(reports[0].note.as_deref().unwrap().contains("hypothesis"));
        assert!(!all_proved(&reports));
    }

    #[test]
    fn diversity_chain_at_500_proved() {
        let reports = check_diversity_chain(500, DEFAULT_PRECISION_CAP).unwrap();
        for r in &reports {
            assert_eq!(r.verdict, Verdict::Proved, "{}: {:?}", r.claim, r.note);
        }
    }

    #[test]
    fn diversity_chain_odd_n_proved() {
        // odd n makes the derangement remainder term positive; the exact
        // floor-identity form of claim (f) must still prove
        assert!(all_proved(&check_diversity_chain(501, DEFAULT_PRECISION_CAP).unwrap()));
        assert!(all_proved(&check_diversity_chain(503, DEFAULT_PRECISION_CAP).unwrap()));
    }

    #[test]
    fn diversity_chain_direct_and_ratio_agree() {
        for n in [500u64, 512, 777, 1000] {
            let reports = check_diversity_chain(n, DEFAULT_PRECISION_CAP).unwrap();
            let get = |id: &str| {
                reports
                    .iter()
                    .find(|r| r.claim == id)
                    .map(|r| r.verdict)
                    .unwrap()
            };
            assert_eq!(get("chain.b.direct"), get("chain.b.ratio"), "n={n}");
        }
    }

    #[test]
    fn q_floor_matches_f64() {
        for n in [500u64, 512, 1000, 4096, 10_000] {
            let expect = (4.0 * (n as f64).log2()).floor() as u64;
            assert_eq!(q_floor(n, DEFAULT_PRECISION_CAP).unwrap(), expect, "n={n}");
        }
    }

    #[test]
    fn derangement_floor_matches_recurrence() {
        for m in 1..=20usize {
            assert!(
                derangement_identity_holds(m, DEFAULT_PRECISION_CAP).unwrap(),
                "m={m}"
            );
        }
        // spot values from the recurrence oracle
        assert_eq!(
            derangement_floor(4, DEFAULT_PRECISION_CAP).unwrap(),
            BigUint::from(9u32)
        );
        assert_eq!(
            derangement_floor(1, DEFAULT_PRECISION_CAP).unwrap(),
            BigUint::zero()
        );
    }

    #[test]
    fn lemma_bound_vacuous_cases() {
        // r delta = 2 -> vacuous flag, enclosure still produced
        let b = spread_lemma_bound(&rat_int(4), &rat(1, 2), &rat_int(3), 5, 40).unwrap();
        assert!(b.vacuous);
        assert!(b.enclosure.is_some());
        // r delta <= 1 -> no enclosure
        let b = spread_lemma_bound(&rat_int(2), &rat(1, 4), &rat_int(3), 5, 40).unwrap();
        assert!(b.vacuous);
        assert!(b.enclosure.is_none());
        // k = 0 -> exactly 1
        let b = spread_lemma_bound(&rat_int(64), &rat(1, 8), &rat_int(3), 0, 40).unwrap();
        let e = b.enclosure.unwrap();
        assert_eq!(e.lo(), &rat_int(1));
        assert_eq!(e.hi(), &rat_int(1));
    }

    #[test]
    fn lemma_bound_against_f64_oracle() {
        let b = spread_lemma_bound(&rat_int(64), &rat(1, 8), &rat_int(8), 6, 60).unwrap();
        assert!(!b.vacuous);
        let enc = b.enclosure.unwrap();
        assert!(enc.lo().is_positive());
        let delta = 0.125f64;
        let h = -delta * delta.log2() - (1.0 - delta) * (1.0 - delta).log2();
        let oracle = 1.0 - ((1.0 + h) / 3.0f64).powi(8) * 6.0;
        let lo = enc.lo().to_f64().unwrap();
        let hi = enc.hi().to_f64().unwrap();
        assert!(lo - 1e-9 <= oracle && oracle <= hi + 1e-9);
    }

    #[test]
    fn lemma_bound_rational_exponent() {
        // m = 3/2 exercises the pow2/log2 route
        let b = spread_lemma_bound(&rat_int(64), &rat(1, 8), &rat(3, 2), 1, 48).unwrap();
        let enc = b.enclosure.unwrap();
        let delta = 0.125f64;
        let h = -delta * delta.log2() - (1.0 - delta) * (1.0 - delta).log2();
        let oracle = 1.0 - ((1.0 + h) / 3.0f64).powf(1.5);
        let lo = enc.lo().to_f64().unwrap();
        let hi = enc.hi().to_f64().unwrap();
        assert!(lo - 1e-9 <= oracle && oracle <= hi + 1e-9, "[{lo},{hi}] vs {oracle}");
    }

    #[test]
    fn entropy_paper_constant() {
        // H over the enclosure of 1/(2 log2 1000) stays below 0.288
        let l = log2_enclosure(&rat_int(1000), 64).unwrap();
        let d = l.scale(&rat_int(2)).recip().unwrap();
        let h = entropy_on_interval(&d, 64).unwrap();
        assert_eq!(h.le_rational(&rat(36, 125)), Some(true));
    }
}
