//! Reproducible random instances: item data uniform in `[1, 100]`, follower
//! capacity `⌈INS·Σw / 11⌉` and leader capacity uniform within ±10 of it.

use serde::{Deserialize, Serialize};

use crate::error::{BkpError, Result};
use crate::instance::{sort_by_efficiency, Instance, Permutation};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MAX_ATTEMPTS: u32 = 100;
const DATUM_MAX: i64 = 100;

/// SplitMix64 generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Generator for retry `substream` of `seed`. Substream 0 is the plain
    /// seed.
    pub fn substream(seed: u64, substream: u32) -> Self {
        if substream == 0 {
            Self::new(seed)
        } else {
            Self::new(seed ^ mix64(substream as u64))
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform integer in `[lo, hi]`: the high word of `x · span`, rejecting
    /// the biased low words.
    pub fn next_uniform(&mut self, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return Err(BkpError::Argument(format!("empty range [{lo}, {hi}]")));
        }
        let span = (hi as i128 - lo as i128 + 1) as u128;
        if span > u64::MAX as u128 {
            return Ok(self.next_u64() as i64);
        }
        let span = span as u64;
        let threshold = span.wrapping_neg() % span;
        loop {
            let m = self.next_u64() as u128 * span as u128;
            if (m as u64) >= threshold {
                return Ok((lo as i128 + (m >> 64) as i128) as i64);
            }
        }
    }
}

/// Identity of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    /// Instance class, 1..=10.
    pub ins: u32,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(n: usize, ins: u32, seed: u64) -> Result<Self> {
        let spec = Self { n, ins, seed };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if !(1..=10).contains(&self.ins) {
            return Err(BkpError::Argument(format!(
                "instance class {} outside 1..=10",
                self.ins
            )));
        }
        if self.n < 2 {
            return Err(BkpError::Argument(format!(
                "n = {} must be at least 2",
                self.n
            )));
        }
        Ok(())
    }

    /// `bkp_n{n}_ins{INS}_s{seed}.txt`
    pub fn file_name(&self) -> String {
        format!("bkp_n{}_ins{}_s{}.txt", self.n, self.ins, self.seed)
    }

    /// Inverse of [`GenSpec::file_name`].
    pub fn from_file_name(name: &str) -> Option<Self> {
        let rest = name.strip_prefix("bkp_n")?.strip_suffix(".txt")?;
        let (n, rest) = rest.split_once("_ins")?;
        let (ins, seed) = rest.split_once("_s")?;
        Some(Self {
            n: n.parse().ok()?,
            ins: ins.parse().ok()?,
            seed: seed.parse().ok()?,
        })
    }
}

/// A generated instance in original and efficiency order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub spec: GenSpec,
    /// Items in draw order; this is what gets written to disk.
    pub instance: Instance,
    pub sorted: Instance,
    pub permutation: Permutation,
    /// Substream that produced the instance.
    pub substream: u32,
}

/// Follower capacity for class `ins`, exact `⌈ins·total_weight / 11⌉`.
pub fn follower_capacity(ins: u32, total_weight: i64) -> i64 {
    let num = ins as i64 * total_weight;
    (num + 10).div_euclid(11)
}

/// Draws one instance from the given substream without any validity check.
pub fn draw(spec: &GenSpec, substream: u32) -> Result<Instance> {
    spec.check()?;
    let mut rng = SplitMix64::substream(spec.seed, substream);
    let mut profits = Vec::with_capacity(spec.n);
    let mut weights = Vec::with_capacity(spec.n);
    let mut leader_weights = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        profits.push(rng.next_uniform(1, DATUM_MAX)?);
        weights.push(rng.next_uniform(1, DATUM_MAX)?);
        leader_weights.push(rng.next_uniform(1, DATUM_MAX)?);
    }
    let follower = follower_capacity(spec.ins, weights.iter().sum());
    let leader = rng.next_uniform(follower - 10, follower + 10)?;
    Instance::new(profits, weights, leader_weights, leader, follower)
}

/// Generates a valid instance, retrying on fresh substreams when a draw
/// violates an assumption.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    let mut last = String::new();
    for substream in 0..MAX_ATTEMPTS {
        let instance = draw(spec, substream)?;
        let report = instance.validate();
        if report.is_empty() {
            return Ok(finish(*spec, instance, substream));
        }
        last = report[0].to_string();
    }
    Err(BkpError::Generation {
        attempts: MAX_ATTEMPTS,
        reason: last,
    })
}

/// Like [`generate`] but only insists on a well-posed problem (non-negative
/// capacities). Small `n` with a low instance class almost never satisfies
/// `w_i < C_l` for every item; the oracle test suites use this variant.
pub fn generate_relaxed(spec: &GenSpec) -> Result<Generated> {
    for substream in 0..MAX_ATTEMPTS {
        let instance = draw(spec, substream)?;
        if instance.is_well_posed() {
            return Ok(finish(*spec, instance, substream));
        }
    }
    Err(BkpError::Generation {
        attempts: MAX_ATTEMPTS,
        reason: "negative leader capacity".into(),
    })
}

fn finish(spec: GenSpec, instance: Instance, substream: u32) -> Generated {
    let (sorted, permutation) = sort_by_efficiency(&instance);
    Generated {
        spec,
        instance,
        sorted,
        permutation,
        substream,
    }
}
