//! Exhaustive bilevel solver for small instances.

use serde::{Deserialize, Serialize};

use crate::error::{BkpError, Result};
use crate::instance::Instance;
use crate::knapsack::{follower_set, kp_value, solve_kp};

/// Largest `n` accepted by default.
pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: i64,
    pub x: Vec<bool>,
    pub y: Vec<bool>,
    /// Number of leader vectors within the leader capacity.
    pub enumerated: u64,
}

/// Enumerates every leader vector that fits into `C_u` and answers each with
/// an optimal follower knapsack. Ties go to the `x` that comes first when
/// vectors are compared position by position with an interdicted item ranked
/// before a kept one; the search meets that vector first.
pub fn brute_force(inst: &Instance, hard_limit: usize) -> Result<OracleResult> {
    let n = inst.len();
    if n > hard_limit {
        return Err(BkpError::TooLarge {
            n,
            limit: hard_limit,
        });
    }
    if !inst.is_well_posed() {
        return Err(BkpError::IllPosed(
            "capacities must be non-negative and item data positive".into(),
        ));
    }
    let mut search = Search {
        inst,
        x: vec![false; n],
        best: None,
        enumerated: 0,
    };
    search.visit(0, inst.leader_capacity);
    let (value, x) = search.best.expect("the empty interdiction always fits");
    let y = solve_kp(&follower_set(inst, &x), inst.follower_capacity).indicator(n);
    Ok(OracleResult {
        value,
        x,
        y,
        enumerated: search.enumerated,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    x: Vec<bool>,
    best: Option<(i64, Vec<bool>)>,
    enumerated: u64,
}

impl Search<'_> {
    fn visit(&mut self, i: usize, room: i64) {
        if i == self.inst.len() {
            self.enumerated += 1;
            let value = kp_value(
                &follower_set(self.inst, &self.x),
                self.inst.follower_capacity,
            );
            if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
                self.best = Some((value, self.x.clone()));
            }
            return;
        }
        let v = self.inst.leader_weights[i];
        if v <= room {
            self.x[i] = true;
            self.visit(i + 1, room - v);
            self.x[i] = false;
        }
        self.visit(i + 1, room);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_relaxed, GenSpec};
    use crate::instance::sort_by_efficiency;

    fn tiny() -> Instance {
        Instance::new(vec![4, 5, 3], vec![3, 4, 3], vec![2, 2, 2], 3, 6).unwrap()
    }

    #[test]
    fn tiny_instance() {
        let r = brute_force(&tiny(), DEFAULT_LIMIT).unwrap();
        assert_eq!(r.value, 5);
        assert_eq!(r.x, vec![true, false, false]);
        assert_eq!(r.y, vec![false, true, false]);
        assert_eq!(r.enumerated, 4);
    }

    #[test]
    fn leader_can_take_everything() {
        let inst = Instance::new(vec![4, 5, 3], vec![3, 4, 3], vec![2, 2, 2], 6, 6).unwrap();
        let r = brute_force(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.value, 0);
    }

    #[test]
    fn single_item() {
        let fits = Instance::new(vec![7], vec![3], vec![5], 4, 3).unwrap();
        assert_eq!(brute_force(&fits, DEFAULT_LIMIT).unwrap().value, 7);
        let too_heavy = Instance::new(vec![7], vec![4], vec![5], 4, 3).unwrap();
        assert_eq!(brute_force(&too_heavy, DEFAULT_LIMIT).unwrap().value, 0);
        let interdicted = Instance::new(vec![7], vec![3], vec![5], 5, 3).unwrap();
        assert_eq!(brute_force(&interdicted, DEFAULT_LIMIT).unwrap().value, 0);
    }

    #[test]
    fn refuses_large_instances() {
        let inst = Instance::new(vec![1; 21], vec![1; 21], vec![1; 21], 3, 3).unwrap();
        assert_eq!(
            brute_force(&inst, DEFAULT_LIMIT),
            Err(BkpError::TooLarge { n: 21, limit: 20 })
        );
    }

    #[test]
    fn sorting_does_not_change_the_value() {
        for seed in 0..30 {
            let g =
                generate_relaxed(&GenSpec::new(9, (seed % 10 + 1) as u32, seed).unwrap()).unwrap();
            let a = brute_force(&g.instance, DEFAULT_LIMIT).unwrap();
            let (sorted, _) = sort_by_efficiency(&g.instance);
            let b = brute_force(&sorted, DEFAULT_LIMIT).unwrap();
            assert_eq!(a.value, b.value);
            assert_eq!(a.enumerated, b.enumerated);
        }
    }
}
