//! Textbook RSA lab built around data-parallel block encryption.
//!
//! - [`modmath`]: modular arithmetic and six exponentiation strategies, with
//!   an arbitrary-precision oracle in [`modmath::oracle`].
//! - [`rsa`]: key generation, validation, block encrypt/decrypt, key files.
//! - [`codec`]: letter-pair packets and the packet stream text format.
//! - [`spmd`]: grid/block/thread parallel map with deterministic output.
//! - [`bench`]: sequential vs parallel timing sweeps and CSV/Markdown output.
//!
//! Nothing here is secure. There is no padding, keys are tiny and none of
//! the arithmetic is constant time.

pub mod bench;
pub mod codec;
pub mod modmath;
pub mod rsa;
pub mod selftest;
pub mod spmd;

pub use bench::{run_bench, BenchPlan, BenchRecord};
pub use codec::{decode_packets, encode_text, generate_payload, MessagePayload, Packet};
pub use modmath::{AlgorithmSelector, ModError, Residue, Strategy};
pub use rsa::{
    decrypt_block, encrypt_block, keygen, validate_keypair, KeyPair, PrivateKey, PublicKey,
    RsaError,
};
pub use spmd::{launch_map, sequential_map, LaunchConfig, LaunchError, LaunchTiming};
