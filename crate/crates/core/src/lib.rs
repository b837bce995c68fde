//! Coset states over GF(2) and the cryptographic toys built on them: one-shot
//! signatures, publicly-verifiable commitments with Hadamard openings, a
//! Merkle-tree SNARK, a publicly-verifiable quantum FHE compiler and
//! obfuscation layers on top, all simulated classically at small sizes.

pub mod densesim;
pub mod gf2;
pub mod oracle;
pub mod cosetstates;
pub mod oss;
pub mod pfc;
pub mod collapsing;
pub mod snark;
pub mod homenc;
pub mod pvqfhe;
pub mod obfuscate;
