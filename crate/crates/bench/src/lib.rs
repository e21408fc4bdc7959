//! Fixtures shared by the benchmarks.

use bkp_core::{generate, generate_relaxed, GenSpec, Instance};

/// A valid generated instance in efficiency order.
pub fn sorted_instance(n: usize, ins: u32, seed: u64) -> Instance {
    generate(&GenSpec::new(n, ins, seed).expect("valid spec"))
        .expect("generation succeeds")
        .sorted
}

/// A well-posed instance small enough for the oracle, in draw order.
pub fn small_instance(n: usize, ins: u32, seed: u64) -> Instance {
    generate_relaxed(&GenSpec::new(n, ins, seed).expect("valid spec"))
        .expect("generation succeeds")
        .instance
}
