//! Exact big-integer and rational-enclosure arithmetic, and the certified
//! inequality suite built on it.

pub mod certify;
pub mod enclosure;
pub mod factorial;

pub use certify::{
    all_proved, check_decomposition_bounds, check_diversity_chain, derangement_floor, derangement_identity_holds,
    q_floor, spread_lemma_bound, CertificateReport, EnclosureRecord, SpreadLemmaBound, Verdict,
};
pub use enclosure::{
    entropy_enclosure, euler_enclosure, log2_enclosure, pow2_rational, sqrt_enclosure,
    RationalEnclosure, DEFAULT_PRECISION_CAP,
};
pub use factorial::{derangement_big, factorial};
