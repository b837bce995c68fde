//! Obfuscation in the classical oracle model.
//!
//! [`sobf`] obfuscates a classical program as an FHE encryption of it plus an
//! oracle that decrypts an evaluated ciphertext only next to a SNARK showing
//! it was evaluated honestly. [`qobf`] obfuscates a pseudo-deterministic
//! quantum circuit with the publicly-verifiable QFHE scheme, wrapping its
//! verify-then-decrypt key with [`sobf`].
//!
//! Oracles are in-process handles: callers only get evaluate access. Nothing
//! here is hidden cryptographically, since the reference FHE is transparent.

pub mod qobf;
pub mod sobf;
pub mod tm;

pub use qobf::{qobf_eval, qobf_eval_tampered, qobf_obfuscate, DkProgram, ObfuscatedQuantumProgram, QobfParams, Tamper, UniversalCircuit};
pub use sobf::{pp_size_bound, sobf_eval, sobf_obfuscate, sobf_prove, GuardCounters, ObfuscatedProgram, SobfParams, SobfPublic};
pub use tm::{TmProgram, TmRule};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homenc::{ClassicalComputation, FheError};
use crate::pvqfhe::{bits_to_bytes, bytes_to_bits, PvError};
use crate::snark::SnarkError;

/// Where an evaluation stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    /// The homomorphic evaluation itself failed.
    Evaluate,
    /// The oracle rejected the SNARK.
    Snark,
    /// The obfuscated key rejected the QFHE proof.
    Verify,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Evaluate => "evaluate",
            Stage::Snark => "snark",
            Stage::Verify => "verify",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObfError {
    #[error(transparent)]
    Fhe(#[from] FheError),
    #[error(transparent)]
    Pv(#[from] PvError),
    #[error(transparent)]
    Snark(#[from] SnarkError),
    #[error("bad program: {0}")]
    Program(String),
    #[error("outside the obfuscation bounds: {0}")]
    Bounds(String),
    #[error("evaluation returned bottom at stage {0}")]
    Bottom(Stage),
}

pub type Result<T> = std::result::Result<T, ObfError>;

/// Programs understood by the universal evaluator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Program {
    /// Inputs and outputs are one byte per bit.
    Tm(TmProgram),
    VerifyThenDecrypt(DkProgram),
}

impl Program {
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("program serialises")
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        serde_json::from_slice(b).map_err(|e| ObfError::Program(e.to_string()))
    }

    /// Evaluation cost charged against the FHE depth bound.
    pub fn cost(&self) -> u32 {
        match self {
            Program::Tm(p) => p.max_steps,
            Program::VerifyThenDecrypt(dk) => 1 + dk.max_gates,
        }
    }

    pub fn run(&self, input: &[u8]) -> Result<Vec<u8>> {
        match self {
            Program::Tm(p) => {
                if !p.is_well_formed() {
                    return Err(ObfError::Program("malformed rule table".into()));
                }
                let x = bytes_to_bits(input)?;
                if x.len() != p.input_len {
                    return Err(ObfError::Program(format!("expected {} input bits, got {}", p.input_len, x.len())));
                }
                Ok(bits_to_bytes(&p.run(&x).0))
            }
            Program::VerifyThenDecrypt(dk) => dk.run(input),
        }
    }
}

/// `U_x`: runs the decrypted program on the hardwired input `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramEvaluator {
    pub input: Vec<u8>,
    pub depth: u32,
}

impl ClassicalComputation for ProgramEvaluator {
    fn depth(&self) -> u32 {
        self.depth
    }

    fn eval_plain(&self, plaintext: &[u8]) -> crate::homenc::Result<Vec<u8>> {
        let p = Program::from_bytes(plaintext).map_err(|e| FheError::BadInput(e.to_string()))?;
        if p.cost() > self.depth {
            return Err(FheError::BadInput(format!("program cost {} exceeds {}", p.cost(), self.depth)));
        }
        p.run(&self.input).map_err(|e| FheError::BadInput(e.to_string()))
    }
}
