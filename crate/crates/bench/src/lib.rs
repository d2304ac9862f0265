//! Shared inputs for the criterion benches.

use rsalab_core::bench::{TABLE1_MODULUS, TABLE_EXPONENT};
use rsalab_core::{generate_payload, AlgorithmSelector, PublicKey};

pub fn table1_key() -> PublicKey {
    PublicKey {
        n: TABLE1_MODULUS,
        e: TABLE_EXPONENT,
    }
}

pub fn payload(size: usize) -> Vec<u64> {
    generate_payload(size, 1).blocks
}

/// One of each strategy, windows at 4.
pub fn strategies() -> Vec<AlgorithmSelector> {
    vec![
        AlgorithmSelector::naive(),
        AlgorithmSelector::r2l(),
        AlgorithmSelector::l2r(),
        AlgorithmSelector::kary(4),
        AlgorithmSelector::sliding(4),
        AlgorithmSelector::halving(false),
    ]
}
