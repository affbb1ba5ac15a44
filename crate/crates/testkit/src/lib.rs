//! Independent reference computations and random fixtures for tests.
//!
//! The geometry and geodesy here deliberately avoid the library's own
//! routines so that agreement between the two means something.

pub mod geodesy;
pub mod geometry;
pub mod traces;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use geodesy::vincenty_inverse;
pub use traces::random_trace;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
