//! Seed fan-out.
//!
//! Every random draw of an experiment comes from a ChaCha8 generator keyed by
//! the master seed, on a stream chosen by what the draw is for:
//!
//! ```text
//! stream = purpose << 48 | matrix << 32 | policy << 16 | repetition
//! ```
//!
//! with 16 bits per field. A stream depends only on its own coordinates, so
//! jobs can run in any order (or concurrently) without changing any output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::policy::PolicyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Random graph draws.
    Graph = 1,
    /// `M★` draws.
    Matrix = 2,
    /// Policy runs (noise and exploration).
    Run = 3,
}

pub fn policy_index(p: PolicyKind) -> u64 {
    match p {
        PolicyKind::Oful => 0,
        PolicyKind::Improved => 1,
        PolicyKind::Etc => 2,
    }
}

pub fn stream_id(purpose: Purpose, matrix: usize, policy: u64, repetition: usize) -> u64 {
    debug_assert!(matrix < 1 << 16 && repetition < 1 << 16 && policy < 1 << 16);
    (purpose as u64) << 48 | (matrix as u64) << 32 | policy << 16 | repetition as u64
}

pub fn stream(master: u64, purpose: Purpose, matrix: usize, policy: u64, repetition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(purpose, matrix, policy, repetition));
    rng
}

pub fn graph_rng(master: u64, draw: usize) -> ChaCha8Rng {
    stream(master, Purpose::Graph, 0, 0, draw)
}

pub fn matrix_rng(master: u64, matrix: usize) -> ChaCha8Rng {
    stream(master, Purpose::Matrix, matrix, 0, 0)
}

pub fn run_rng(master: u64, matrix: usize, policy: PolicyKind, repetition: usize) -> ChaCha8Rng {
    stream(master, Purpose::Run, matrix, policy_index(policy), repetition)
}
