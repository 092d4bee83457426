//! Disentanglement and compositionality metrics for encoder embedding spaces.
//!
//! The crate reads embedding tables and factor annotations from disk
//! ([`store`]), fits small self-contained linear learners ([`learners`]),
//! and computes the DCI triple, Z-diff, explicitness and soft rank
//! ([`metrics`]). Task-level evaluations such as zero-shot accuracy,
//! composed retrieval, dimension switching and linear decomposition live in
//! [`compose`]; cross-model aggregation lives in [`analysis`]. Deterministic
//! synthetic bundles used as test oracles come from [`synth`].

// `!(x >= 0.0)` is used on purpose to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod compose;
pub mod error;
pub mod learners;
pub mod linalg;
pub mod metrics;
pub mod store;
pub mod synth;

pub use error::{Error, Result};

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
