//! Seeded Monte Carlo experiments over p-random subsets of the n x n grid.
//!
//! Randomness contract: every trial gets its own ChaCha8 stream (base seed,
//! stream = trial index) and consumes exactly one u64 per grid cell in
//! row-major order. A cell is included when u * den < num * 2^64, so the
//! effective inclusion probability is p quantized to 64-bit resolution
//! (exact for dyadic p, in particular 0, 1/2 and 1), and runs with a shared
//! seed are coupled monotonically in p. Success counts are therefore a pure
//! function of (p, trials, seed), independent of the worker count.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::certify::{spread_lemma_bound, SpreadLemmaBound};
use crate::bounds::enclosure::{rat, sqrt_enclosure, RationalEnclosure};
use crate::error::{Error, Result};
use crate::family::{Cell, PermFamily};
use crate::spread::is_r_spread;

/// Identifier of the randomness contract, echoed in reports.
pub const GENERATOR_ID: &str = "chacha8/seed64/stream-per-trial";

/// An exact rational probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probability {
    num: u64,
    den: u64,
}

impl Probability {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidParameter(format!(
                "probability {num}/{den} outside [0,1]"
            )));
        }
        Ok(Probability { num, den })
    }

    pub fn zero() -> Self {
        Probability { num: 0, den: 1 }
    }

    pub fn one() -> Self {
        Probability { num: 1, den: 1 }
    }

    pub fn half() -> Self {
        Probability { num: 1, den: 2 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_rational(&self) -> BigRational {
        rat(self.num as i64, self.den as i64)
    }

    #[inline]
    fn includes(&self, draw: u64) -> bool {
        (draw as u128) * (self.den as u128) < (self.num as u128) << 64
    }

    pub fn from_rational(p: &BigRational) -> Result<Self> {
        if p.is_negative() || p > &BigRational::one() {
            return Err(Error::InvalidParameter(format!(
                "probability {p} outside [0,1]"
            )));
        }
        let num = p.numer().to_u64();
        let den = p.denom().to_u64();
        match (num, den) {
            (Some(num), Some(den)) => Probability::new(num, den),
            _ => Err(Error::InvalidParameter(format!(
                "probability {p} does not fit 64-bit numerator/denominator"
            ))),
        }
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub p: Probability,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl TrialConfig {
    pub fn new(p: Probability, trials: u64, seed: u64, workers: usize) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        if workers == 0 {
            return Err(Error::InvalidParameter("workers must be positive".into()));
        }
        Ok(TrialConfig {
            p,
            trials,
            seed,
            workers,
        })
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A p-random subset of {0..ground_size-1}: each index independently with
/// probability p, one u64 draw per index.
pub fn sample_random_subset(
    ground_size: usize,
    p: Probability,
    rng: &mut ChaCha8Rng,
) -> Vec<u32> {
    let mut out = Vec::new();
    for i in 0..ground_size {
        if p.includes(rng.next_u64()) {
            out.push(i as u32);
        }
    }
    out
}

fn sample_mask(ground_size: usize, p: Probability, rng: &mut ChaCha8Rng) -> u128 {
    let mut m = 0u128;
    for i in 0..ground_size {
        if p.includes(rng.next_u64()) {
            m |= 1u128 << i;
        }
    }
    m
}

/// True iff some member's cell set is contained in `w`.
pub fn covers_member(f: &PermFamily, w: &[Cell]) -> bool {
    let n = f.degree();
    let mut wm = 0u128;
    for c in w {
        wm |= 1u128 << c.bit(n);
    }
    covers_member_mask(&f.masks(), wm)
}

#[inline]
fn covers_member_mask(masks: &[u128], w: u128) -> bool {
    masks.iter().any(|&m| m & !w == 0)
}

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub successes: u64,
    pub trials: u64,
    pub estimate: BigRational,
    pub stderr: RationalEnclosure,
    pub bound: Option<RationalEnclosure>,
    pub bound_vacuous: bool,
    /// Effective inclusion probability after any clamping.
    pub p_effective: Probability,
    pub p_clamped: bool,
    /// For the spread-lemma run: estimate + 3 stderr >= bound.lo, or bound
    /// vacuous.
    pub lemma_consistent: Option<bool>,
    pub generator: &'static str,
    pub seed: u64,
}

fn run_trials<F>(cfg: &TrialConfig, trial: F) -> Result<u64>
where
    F: Fn(u64) -> bool + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let successes = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .filter(|&t| trial(t))
            .count() as u64
    });
    Ok(successes)
}

fn base_report(cfg: &TrialConfig, p: Probability, successes: u64) -> Result<EstimateReport> {
    let estimate = rat(successes as i64, 1) / rat(cfg.trials as i64, 1);
    let variance = &estimate * (BigRational::one() - &estimate)
        / BigRational::from_integer(cfg.trials.into());
    let stderr = sqrt_enclosure(&variance, 40)?;
    Ok(EstimateReport {
        successes,
        trials: cfg.trials,
        estimate,
        stderr,
        bound: None,
        bound_vacuous: false,
        p_effective: p,
        p_clamped: false,
        lemma_consistent: None,
        generator: GENERATOR_ID,
        seed: cfg.seed,
    })
}

/// Monte Carlo estimate of Pr[some member is contained in a p-random subset
/// of the n^2 grid cells].
pub fn estimate_cover_probability(f: &PermFamily, cfg: &TrialConfig) -> Result<EstimateReport> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let masks = f.masks();
    let ground = f.degree() * f.degree();
    let (p, seed) = (cfg.p, cfg.seed);
    let successes = run_trials(cfg, move |t| {
        let mut rng = trial_rng(seed, t);
        let w = sample_mask(ground, p, &mut rng);
        covers_member_mask(&masks, w)
    })?;
    base_report(cfg, p, successes)
}

/// Run the cover experiment at p = m*delta against the certified failure
/// bound. Refuses to run when `f` is not r-spread (the hypothesis of the
/// guarantee); k is instantiated as the member size n.
pub fn verify_spread_lemma(
    f: &PermFamily,
    r: &BigRational,
    delta: &BigRational,
    m: &BigRational,
    cfg: &TrialConfig,
) -> Result<EstimateReport> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let verdict = is_r_spread(f, r)?;
    if !verdict.spread {
        return Err(Error::HypothesisNotMet(format!(
            "family is not {r}-spread (witness {})",
            verdict.witness.map(|w| w.set.to_string()).unwrap_or_default()
        )));
    }
    let p_exact = m * delta;
    let (p, clamped) = if p_exact > BigRational::one() {
        (Probability::one(), true)
    } else {
        (Probability::from_rational(&p_exact)?, false)
    };
    let k = f.degree() as u64;
    let SpreadLemmaBound {
        enclosure, vacuous, ..
    } = spread_lemma_bound(r, delta, m, k, 64)?;
    let run_cfg = TrialConfig { p, ..cfg.clone() };
    let mut report = estimate_cover_probability(f, &run_cfg)?;
    report.p_clamped = clamped;
    let consistent = match &enclosure {
        Some(enc) if !vacuous => {
            let reach = &report.estimate + report.stderr.hi() * rat(3, 1);
            &reach >= enc.lo()
        }
        _ => true,
    };
    report.lemma_consistent = Some(consistent);
    report.bound = enclosure;
    report.bound_vacuous = vacuous;
    Ok(report)
}

/// Estimate Pr[one member inside a uniform half U1 and another inside the
/// complement U2]. For an intersecting family two disjoint members cannot
/// exist, so every trial must fail; the estimate is exactly 0.
pub fn disjoint_split_experiment(f: &PermFamily, cfg: &TrialConfig) -> Result<EstimateReport> {
    let masks = f.masks();
    let ground = f.degree() * f.degree();
    let seed = cfg.seed;
    let half = Probability::half();
    let successes = if masks.is_empty() {
        0
    } else {
        let full: u128 = if ground == 128 { !0 } else { (1u128 << ground) - 1 };
        run_trials(cfg, move |t| {
            let mut rng = trial_rng(seed, t);
            let u1 = sample_mask(ground, half, &mut rng);
            let u2 = full & !u1;
            covers_member_mask(&masks, u1) && covers_member_mask(&masks, u2)
        })?
    };
    base_report(cfg, half, successes)
}
