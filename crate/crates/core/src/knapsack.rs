//! The follower's 0-1 knapsack problem `KP(x)`: exact dynamic programming
//! with traceback, and the split (critical) item of its LP relaxation.

use crate::instance::Instance;

/// Items available to the follower, i.e. the non-interdicted ones.
#[derive(Debug, Clone)]
pub struct ItemSet<'a> {
    inst: &'a Instance,
    indices: Vec<usize>,
}

impl<'a> ItemSet<'a> {
    /// Panics if `indices` is not strictly increasing or out of range.
    pub fn new(inst: &'a Instance, indices: Vec<usize>) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "item indices must be strictly increasing"
        );
        assert!(
            indices.iter().all(|&i| i < inst.len()),
            "item index out of range"
        );
        Self { inst, indices }
    }

    pub fn all(inst: &'a Instance) -> Self {
        Self {
            inst,
            indices: (0..inst.len()).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn total_weight(&self) -> i64 {
        self.indices.iter().map(|&i| self.inst.weights[i]).sum()
    }

    pub fn total_profit(&self) -> i64 {
        self.indices.iter().map(|&i| self.inst.profits[i]).sum()
    }
}

/// `S = {i : x_i = 0}`.
pub fn follower_set<'a>(inst: &'a Instance, interdicted: &[bool]) -> ItemSet<'a> {
    assert_eq!(
        interdicted.len(),
        inst.len(),
        "leader vector has wrong length"
    );
    let indices = interdicted
        .iter()
        .enumerate()
        .filter(|(_, &x)| !x)
        .map(|(i, _)| i)
        .collect();
    ItemSet { inst, indices }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KpResult {
    pub value: i64,
    /// Chosen item indices, increasing.
    pub selection: Vec<usize>,
}

impl KpResult {
    /// Selection as a 0/1 vector over all `n` items.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut y = vec![false; n];
        for &i in &self.selection {
            y[i] = true;
        }
        y
    }
}

/// Exact 0-1 knapsack over `items` by DP on capacities `0..=capacity`.
/// Each item keeps a bitset of the capacities at which it was taken, which
/// drives the traceback.
pub fn solve_kp(items: &ItemSet<'_>, capacity: i64) -> KpResult {
    let inst = items.inst;
    let cap = capacity.clamp(0, items.total_weight().max(0)) as usize;
    if cap == 0 || items.is_empty() {
        return KpResult {
            value: 0,
            selection: Vec::new(),
        };
    }

    let words = cap / 64 + 1;
    let mut best = vec![0i64; cap + 1];
    let mut taken = vec![0u64; words * items.len()];
    for (k, &i) in items.indices.iter().enumerate() {
        let w = inst.weights[i] as usize;
        let p = inst.profits[i];
        if w > cap {
            continue;
        }
        let bits = &mut taken[k * words..(k + 1) * words];
        for c in (w..=cap).rev() {
            let with = best[c - w] + p;
            if with > best[c] {
                best[c] = with;
                bits[c / 64] |= 1 << (c % 64);
            }
        }
    }

    let mut selection = Vec::new();
    let mut c = cap;
    for (k, &i) in items.indices.iter().enumerate().rev() {
        if taken[k * words + c / 64] >> (c % 64) & 1 == 1 {
            selection.push(i);
            c -= inst.weights[i] as usize;
        }
    }
    selection.reverse();
    KpResult {
        value: best[cap],
        selection,
    }
}

/// Optimal value only; skips the traceback storage of [`solve_kp`].
pub fn kp_value(items: &ItemSet<'_>, capacity: i64) -> i64 {
    let cap = capacity.clamp(0, items.total_weight().max(0)) as usize;
    let mut best = vec![0i64; cap + 1];
    for &i in &items.indices {
        let w = items.inst.weights[i] as usize;
        let p = items.inst.profits[i];
        for c in (w..=cap).rev() {
            best[c] = best[c].max(best[c - w] + p);
        }
    }
    best[cap]
}

/// The greedy LP fill of `items` in their given order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitInfo {
    /// Last item with positive LP value when the set overflows the capacity.
    pub critical: Option<usize>,
    /// Profit of the items packed before the critical item.
    pub split_profit: i64,
    pub split_weight: i64,
    /// `capacity - split_weight`.
    pub residual: i64,
}

/// Fills items in order until the cumulative weight reaches `capacity`.
/// The item that reaches it is critical, unless the whole set fits.
pub fn split_info(items: &ItemSet<'_>, capacity: i64) -> SplitInfo {
    let inst = items.inst;
    let mut profit = 0;
    let mut weight = 0;
    if items.total_weight() > capacity {
        for &i in &items.indices {
            if weight + inst.weights[i] >= capacity {
                return SplitInfo {
                    critical: Some(i),
                    split_profit: profit,
                    split_weight: weight,
                    residual: capacity - weight,
                };
            }
            profit += inst.profits[i];
            weight += inst.weights[i];
        }
    }
    profit = items.total_profit();
    weight = items.total_weight();
    SplitInfo {
        critical: None,
        split_profit: profit,
        split_weight: weight,
        residual: capacity - weight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        Instance::new(vec![4, 5, 3], vec![3, 4, 3], vec![2, 2, 2], 3, 6).unwrap()
    }

    fn brute(items: &ItemSet<'_>, capacity: i64) -> i64 {
        let idx = items.indices();
        let inst = items.instance();
        (0u32..1 << idx.len())
            .filter_map(|mask| {
                let (mut p, mut w) = (0, 0);
                for (k, &i) in idx.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        p += inst.profits[i];
                        w += inst.weights[i];
                    }
                }
                (w <= capacity).then_some(p)
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn tiny_optimum() {
        let inst = tiny();
        let r = solve_kp(&ItemSet::all(&inst), 6);
        assert_eq!(r.value, 7);
        assert_eq!(r.selection, vec![0, 2]);
    }

    #[test]
    fn zero_capacity() {
        let inst = tiny();
        let r = solve_kp(&ItemSet::all(&inst), 0);
        assert_eq!(
            r,
            KpResult {
                value: 0,
                selection: vec![]
            }
        );
    }

    #[test]
    fn singleton() {
        let inst = tiny();
        let r = solve_kp(&ItemSet::new(&inst, vec![1]), 6);
        assert_eq!(r.selection, vec![1]);
        assert_eq!(r.value, 5);
    }

    #[test]
    fn split_of_subset() {
        let inst = tiny();
        let s = split_info(&ItemSet::new(&inst, vec![1, 2]), 6);
        assert_eq!(s.critical, Some(2));
        assert_eq!(s.split_profit, 5);
        assert_eq!(s.residual, 2);
    }

    #[test]
    fn split_of_full_set() {
        let inst = tiny();
        let s = split_info(&ItemSet::all(&inst), 6);
        assert_eq!(s.critical, Some(1));
        assert_eq!(s.split_profit, 4);
        assert_eq!(s.residual, 3);
    }

    #[test]
    fn no_critical_when_everything_fits() {
        let inst = tiny();
        let s = split_info(&ItemSet::new(&inst, vec![0, 2]), 6);
        assert_eq!(s.critical, None);
        assert_eq!(s.split_profit, 7);
        assert_eq!(s.residual, 0);
    }

    #[test]
    fn exact_fill_makes_the_filling_item_critical() {
        // Items 0 and 1 fill capacity 7 exactly, item 2 remains.
        let inst = tiny();
        let s = split_info(&ItemSet::all(&inst), 7);
        assert_eq!(s.critical, Some(1));
        assert_eq!(s.residual, 4);
    }

    #[test]
    fn follower_sets() {
        let inst = tiny();
        assert_eq!(
            follower_set(&inst, &[false, false, false]).indices(),
            &[0, 1, 2]
        );
        assert_eq!(follower_set(&inst, &[true, false, true]).indices(), &[1]);
        assert!(follower_set(&inst, &[true, true, true]).is_empty());
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = crate::generator::SplitMix64::new(99);
        for _ in 0..500 {
            let n = rng.next_uniform(1, 15).unwrap() as usize;
            let mut u = |lo, hi| rng.next_uniform(lo, hi).unwrap();
            let profits = (0..n).map(|_| u(1, 60)).collect();
            let weights: Vec<i64> = (0..n).map(|_| u(1, 40)).collect();
            let cap = u(0, weights.iter().sum::<i64>());
            let inst = Instance::new(profits, weights, vec![1; n], 1, cap).unwrap();
            let mask = u(0, (1 << n) - 1);
            let x: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let items = follower_set(&inst, &x);
            let r = solve_kp(&items, cap);
            assert_eq!(r.value, brute(&items, cap));
            assert_eq!(kp_value(&items, cap), r.value);
            let w: i64 = r.selection.iter().map(|&i| inst.weights[i]).sum();
            let p: i64 = r.selection.iter().map(|&i| inst.profits[i]).sum();
            assert!(w <= cap);
            assert_eq!(p, r.value);
            assert!(r.selection.iter().all(|&i| !x[i]));
        }
    }
}
