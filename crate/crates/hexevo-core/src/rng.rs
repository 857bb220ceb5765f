//! Deterministic random-stream plumbing.
//!
//! Every random decision draws from a ChaCha8 generator keyed by the master
//! seed plus a fixed stream id, so each stage (population init, course
//! generation, reproduction into a given generation) can be replayed in
//! isolation. Resuming a run from its last generation file therefore yields
//! bit-identical results to an uninterrupted run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for initial-population sampling.
pub const STREAM_INIT: u64 = 1;
/// Stream id for obstacle-course generation.
pub const STREAM_TERRAIN: u64 = 2;
/// Streams `BASE + g` drive reproduction that produces generation `g`.
pub const STREAM_REPRODUCTION_BASE: u64 = 0x100;

/// Generator keyed by (`master_seed`, `stream`).
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of the reproduction step that produces generation `generation`.
pub fn reproduction_stream(generation: u32) -> u64 {
    STREAM_REPRODUCTION_BASE + generation as u64
}
