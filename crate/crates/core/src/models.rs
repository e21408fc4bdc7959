//! Integer programs that bound the bilevel optimum.
//!
//! All builders expect an instance in efficiency order. Item `i` is the
//! variable `x_{i+1}`; in critical-item models `k_j` (for `j = 1..=w_c`)
//! says the split solution leaves exactly `j` units of follower capacity.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::milp::{LinearModel, Relation, Row, VarId};

/// `min Σ p_i (1 - x_i)` subject to both capacities: the follower packs
/// every item the leader leaves.
pub fn build_ncr(inst: &Instance) -> LinearModel {
    let mut model = LinearModel::new();
    let x = add_leader_vars(&mut model, inst);
    for (i, &v) in x.iter().enumerate() {
        model.set_objective(v, -(inst.profits[i] as f64)).unwrap();
    }
    model.set_offset(inst.total_profit() as f64);
    model.add_row(leader_capacity_row(inst, &x)).unwrap();
    // Σ w_i (1 - x_i) ≤ C_l
    model
        .add_row(Row::new(
            x.iter()
                .zip(&inst.weights)
                .map(|(&v, &w)| (v, -(w as f64)))
                .collect(),
            Relation::Le,
            (inst.follower_capacity - inst.total_weight()) as f64,
        ))
        .unwrap();
    model.set_integral_objective(true);
    model
}

/// Maximum follower weight the leader can interdict, as the minimization
/// `min -Σ w_i x_i` subject to the leader capacity.
pub fn build_lw(inst: &Instance) -> LinearModel {
    let mut model = LinearModel::new();
    let x = add_leader_vars(&mut model, inst);
    for (i, &v) in x.iter().enumerate() {
        model.set_objective(v, -(inst.weights[i] as f64)).unwrap();
    }
    model.add_row(leader_capacity_row(inst, &x)).unwrap();
    model.set_integral_objective(true);
    model
}

/// First and last items that can be critical, or `None` when the whole item
/// set fits into the follower knapsack. `l` is the first prefix reaching
/// `C_l`, `r` the first reaching `C_l + z_lw` (clamped to the last item).
pub fn critical_range(inst: &Instance, z_lw: i64) -> Option<(usize, usize)> {
    if inst.total_weight() <= inst.follower_capacity || inst.is_empty() {
        return None;
    }
    let first_reaching = |target: i64| {
        let mut acc = 0;
        inst.weights
            .iter()
            .position(|&w| {
                acc += w;
                acc >= target
            })
            .unwrap_or(inst.len() - 1)
    };
    let l = first_reaching(inst.follower_capacity);
    let r = first_reaching(inst.follower_capacity + z_lw.max(0));
    Some((l, r))
}

/// Caps for tuple generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleGenParams {
    /// Maximum number of backward sets.
    pub alpha: usize,
    /// Maximum number of forward sets.
    pub beta: usize,
    /// Core half-width.
    pub delta: usize,
    /// Maximum number of merged tuple constraints.
    pub mu: usize,
}

/// An improving change to the split solution: drop the members before the
/// critical item, add the others.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TupleConstraint {
    /// Item indices, increasing.
    pub members: Vec<usize>,
    pub profit_delta: i64,
    pub weight_delta: i64,
}

impl TupleConstraint {
    pub fn new(inst: &Instance, critical: usize, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        let sign = |i: usize| if i < critical { -1 } else { 1 };
        Self {
            profit_delta: members.iter().map(|&i| sign(i) * inst.profits[i]).sum(),
            weight_delta: members.iter().map(|&i| sign(i) * inst.weights[i]).sum(),
            members,
        }
    }
}

/// A critical-item model together with the handles into it.
#[derive(Debug, Clone)]
pub struct CritModel {
    pub critical: usize,
    pub model: LinearModel,
    pub tuples: Vec<TupleConstraint>,
    /// Leader variables, one per item.
    pub x: Vec<VarId>,
    /// `k[j - 1]` is the residual-capacity indicator `k_j`.
    pub k: Vec<VarId>,
    /// Improvement variable; only present in the tuple-strengthened model.
    pub pi: Option<VarId>,
}

impl CritModel {
    /// The `x` and `k` variables, which are the candidates for fixing.
    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.x.iter().chain(self.k.iter()).copied()
    }
}

/// Minimum split-solution profit when item `c` is forced to be critical.
pub fn build_crit1(inst: &Instance, c: usize) -> CritModel {
    assert!(c < inst.len(), "critical item out of range");
    let mut model = LinearModel::new();
    let x = add_leader_vars(&mut model, inst);
    let wc = inst.weights[c];
    let k: Vec<VarId> = (1..=wc)
        .map(|j| model.add_binary(format!("k{j}")))
        .collect();

    let prefix_profit: i64 = inst.profits[..c].iter().sum();
    let prefix_weight: i64 = inst.weights[..c].iter().sum();
    for (&v, &p) in x[..c].iter().zip(&inst.profits) {
        model.set_objective(v, -(p as f64)).unwrap();
    }
    model.set_offset(prefix_profit as f64);

    model.add_row(leader_capacity_row(inst, &x)).unwrap();
    // Σ_{i<c} w_i (1 - x_i) + Σ_j j k_j = C_l
    let mut coeffs: Vec<(VarId, f64)> = (0..c).map(|i| (x[i], -(inst.weights[i] as f64))).collect();
    coeffs.extend(k.iter().enumerate().map(|(j, &v)| (v, (j + 1) as f64)));
    model
        .add_row(Row::new(
            coeffs,
            Relation::Eq,
            (inst.follower_capacity - prefix_weight) as f64,
        ))
        .unwrap();
    model
        .add_row(Row::new(
            k.iter().map(|&v| (v, 1.0)).collect(),
            Relation::Eq,
            1.0,
        ))
        .unwrap();
    model
        .add_row(Row::new(vec![(x[c], 1.0)], Relation::Eq, 0.0))
        .unwrap();
    model.set_integral_objective(true);

    CritModel {
        critical: c,
        model,
        tuples: Vec::new(),
        x,
        k,
        pi: None,
    }
}

/// Adds the improvement variable `π` and one row per tuple,
/// `π ≥ p^τ (Σ_{j ≥ max(1, w^τ)} k_j - Σ_{i∈τ} x_i)`.
pub fn build_crit2(inst: &Instance, c: usize, tuples: Vec<TupleConstraint>) -> CritModel {
    let mut crit = build_crit1(inst, c);
    let pi = crit.model.add_continuous("pi", f64::INFINITY);
    crit.model.set_objective(pi, 1.0).unwrap();
    let wc = inst.weights[c];
    for tuple in &tuples {
        debug_assert!(tuple.profit_delta > 0 && tuple.weight_delta <= wc);
        let p = tuple.profit_delta as f64;
        let from = tuple.weight_delta.max(1);
        let mut coeffs = vec![(pi, 1.0)];
        coeffs.extend((from..=wc).map(|j| (crit.k[(j - 1) as usize], -p)));
        coeffs.extend(tuple.members.iter().map(|&i| (crit.x[i], p)));
        crit.model
            .add_row(Row::new(coeffs, Relation::Ge, 0.0))
            .unwrap();
    }
    crit.tuples = tuples;
    crit.pi = Some(pi);
    crit
}

#[derive(Debug, Clone)]
struct ItemGroup {
    members: Vec<usize>,
    profit: i64,
    weight: i64,
}

/// Subsets of `items` in increasing size, lexicographic (in the given item
/// order) within a size. At most `limit` subsets satisfying `keep` are
/// returned. Once a whole size level is rejected by a monotone `keep`, larger
/// sizes are not visited.
fn enumerate_groups(
    inst: &Instance,
    items: &[usize],
    limit: usize,
    keep: impl Fn(&ItemGroup) -> bool,
) -> Vec<ItemGroup> {
    let mut out = Vec::new();
    for size in 0..=items.len() {
        let mut kept_any = false;
        let mut pos: Vec<usize> = (0..size).collect();
        loop {
            if out.len() >= limit {
                return out;
            }
            let members: Vec<usize> = pos.iter().map(|&p| items[p]).collect();
            let group = ItemGroup {
                profit: members.iter().map(|&i| inst.profits[i]).sum(),
                weight: members.iter().map(|&i| inst.weights[i]).sum(),
                members,
            };
            if keep(&group) {
                kept_any = true;
                out.push(group);
            }
            // Next combination in lexicographic order.
            let Some(i) = (0..size).rev().find(|&i| pos[i] < items.len() - size + i) else {
                break;
            };
            pos[i] += 1;
            for j in i + 1..size {
                pos[j] = pos[j - 1] + 1;
            }
        }
        if !kept_any {
            break;
        }
    }
    out
}

/// Greedy selection of tuple constraints for candidate critical item `c`.
///
/// Backward sets are drawn from items `c-1, c-2, …, a` and forward sets from
/// `c, c+1, …, b`, both starting with the empty set. Forward sets heavier
/// than the heaviest backward set are skipped. Backward sets are visited by
/// increasing profit, and for each one the forward sets by decreasing
/// profit; every improving merge that fits into `w_c` is emitted until `mu`
/// tuples exist. The tuple `{c}` closes the list if it is not already there.
pub fn compute_tuples(inst: &Instance, c: usize, params: &TupleGenParams) -> Vec<TupleConstraint> {
    let n = inst.len();
    let a = c.saturating_sub(params.delta);
    let b = (c + params.delta).min(n - 1);
    let wc = inst.weights[c];

    let backward_items: Vec<usize> = (a..c).rev().collect();
    let mut backward = enumerate_groups(inst, &backward_items, params.alpha, |_| true);
    let w_max = backward.iter().map(|g| g.weight).max().unwrap_or(0);

    let forward_items: Vec<usize> = (c..=b).collect();
    let mut forward = enumerate_groups(inst, &forward_items, params.beta, |g| g.weight <= w_max);

    backward.sort_by_key(|g| g.profit);
    forward.sort_by_key(|g| std::cmp::Reverse(g.profit));

    let mut tuples = Vec::new();
    let mut seen = HashSet::new();
    'merge: for back in &backward {
        for fwd in &forward {
            if tuples.len() >= params.mu {
                break 'merge;
            }
            let profit = fwd.profit - back.profit;
            let weight = fwd.weight - back.weight;
            if profit <= 0 || weight > wc {
                continue;
            }
            let mut members = back.members.clone();
            members.extend_from_slice(&fwd.members);
            let tuple = TupleConstraint::new(inst, c, members);
            if seen.insert(tuple.members.clone()) {
                tuples.push(tuple);
            }
        }
    }
    if !seen.contains(&vec![c]) {
        tuples.push(TupleConstraint::new(inst, c, vec![c]));
    }
    tuples
}

fn add_leader_vars(model: &mut LinearModel, inst: &Instance) -> Vec<VarId> {
    (0..inst.len())
        .map(|i| model.add_binary(format!("x{}", i + 1)))
        .collect()
}

fn leader_capacity_row(inst: &Instance, x: &[VarId]) -> Row {
    Row::new(
        x.iter()
            .zip(&inst.leader_weights)
            .map(|(&v, &w)| (v, w as f64))
            .collect(),
        Relation::Le,
        inst.leader_capacity as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{DenseEngine, MilpBackend, MipStatus};

    fn tiny() -> Instance {
        Instance::new(vec![4, 5, 3], vec![3, 4, 3], vec![2, 2, 2], 3, 6).unwrap()
    }

    fn mip_value(model: &LinearModel) -> Option<i64> {
        let r = DenseEngine::default().solve_mip(model, None);
        match r.status {
            MipStatus::Optimal => Some(r.objective as i64),
            MipStatus::Infeasible => None,
            s => panic!("unexpected status {s:?}"),
        }
    }

    /// Enumerates leader vectors and residuals directly from the model
    /// definitions: split profit plus the best applicable tuple gain.
    fn crit_oracle(inst: &Instance, c: usize, tuples: &[TupleConstraint]) -> Option<i64> {
        let n = inst.len();
        let mut best: Option<i64> = None;
        for mask in 0u32..1 << n {
            let x: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if x[c] {
                continue;
            }
            let lead: i64 = (0..n)
                .filter(|&i| x[i])
                .map(|i| inst.leader_weights[i])
                .sum();
            if lead > inst.leader_capacity {
                continue;
            }
            let split_w: i64 = (0..c).filter(|&i| !x[i]).map(|i| inst.weights[i]).sum();
            let split_p: i64 = (0..c).filter(|&i| !x[i]).map(|i| inst.profits[i]).sum();
            let residual = inst.follower_capacity - split_w;
            if residual < 1 || residual > inst.weights[c] {
                continue;
            }
            let gain = tuples
                .iter()
                .filter(|t| t.weight_delta <= residual && t.members.iter().all(|&i| !x[i]))
                .map(|t| t.profit_delta)
                .max()
                .unwrap_or(0)
                .max(0);
            let value = split_p + gain;
            best = Some(best.map_or(value, |b: i64| b.min(value)));
        }
        best
    }

    #[test]
    fn ncr_interdicts_the_valuable_item() {
        let inst = Instance::new(vec![10, 1], vec![5, 5], vec![2, 3], 3, 6).unwrap();
        assert_eq!(mip_value(&build_ncr(&inst)), Some(1));
    }

    #[test]
    fn ncr_with_room_to_interdict_everything() {
        let inst = Instance::new(vec![10, 1], vec![5, 5], vec![2, 3], 5, 6).unwrap();
        assert_eq!(mip_value(&build_ncr(&inst)), Some(0));
    }

    #[test]
    fn ncr_infeasible_without_leader_room() {
        let inst = Instance::new(vec![10, 1], vec![5, 5], vec![2, 3], 1, 6).unwrap();
        assert_eq!(mip_value(&build_ncr(&inst)), None);
    }

    #[test]
    fn lw_values() {
        assert_eq!(mip_value(&build_lw(&tiny())), Some(-4));
        let mut all = tiny();
        all.leader_capacity = 6;
        assert_eq!(mip_value(&build_lw(&all)), Some(-10));
        let single = Instance::new(vec![1, 1], vec![7, 2], vec![3, 9], 3, 5).unwrap();
        assert_eq!(mip_value(&build_lw(&single)), Some(-7));
    }

    #[test]
    fn critical_range_examples() {
        let inst = tiny();
        assert_eq!(critical_range(&inst, 4), Some((1, 2)));
        assert_eq!(critical_range(&inst, 0), Some((1, 1)));
        assert_eq!(critical_range(&inst, 100), Some((1, 2)));
        let mut fits = inst.clone();
        fits.follower_capacity = 10;
        assert_eq!(critical_range(&fits, 0), None);
    }

    #[test]
    fn crit1_examples() {
        let inst = tiny();
        let m3 = build_crit1(&inst, 2);
        let r = DenseEngine::default().solve_mip(&m3.model, None);
        assert_eq!(r.objective, 4.0);
        assert_eq!(r.binary([m3.x[1]]), vec![true]);
        assert_eq!(r.binary([m3.k[2]]), vec![true]);
        assert_eq!(mip_value(&build_crit1(&inst, 1).model), Some(4));
    }

    #[test]
    fn crit1_with_empty_prefix() {
        // c = 1 in 1-based terms: zero objective, residual must equal C_l.
        let inst = tiny();
        assert_eq!(mip_value(&build_crit1(&inst, 0).model), None);
        let inst = Instance::new(vec![6, 1], vec![6, 1], vec![1, 1], 1, 5).unwrap();
        assert_eq!(mip_value(&build_crit1(&inst, 0).model), Some(0));
    }

    fn params(alpha: usize, beta: usize, delta: usize, mu: usize) -> TupleGenParams {
        TupleGenParams {
            alpha,
            beta,
            delta,
            mu,
        }
    }

    #[test]
    fn tuples_for_the_tiny_instance() {
        let tuples = compute_tuples(&tiny(), 1, &params(10, 10, 1, 10));
        assert_eq!(
            tuples,
            vec![
                TupleConstraint {
                    members: vec![2],
                    profit_delta: 3,
                    weight_delta: 3
                },
                TupleConstraint {
                    members: vec![1],
                    profit_delta: 5,
                    weight_delta: 4
                },
            ]
        );
    }

    #[test]
    fn first_item_has_no_backward_side() {
        let inst = Instance::new(vec![9, 5, 3, 2], vec![4, 4, 3, 3], vec![1; 4], 2, 6).unwrap();
        let tuples = compute_tuples(&inst, 0, &params(10, 10, 2, 10));
        for t in &tuples {
            let added: i64 = t.members.iter().map(|&i| inst.profits[i]).sum();
            assert_eq!(t.profit_delta, added);
        }
        assert_eq!(tuples.last().unwrap().members, vec![0]);
    }

    #[test]
    fn mu_caps_merged_tuples() {
        let inst = Instance::new(
            vec![6, 3, 10, 3, 1, 1],
            vec![2, 1, 5, 2, 1, 1],
            vec![1; 6],
            3,
            8,
        )
        .unwrap();
        let all = compute_tuples(&inst, 2, &params(50, 50, 3, 100));
        assert!(all.len() > 2);
        assert_eq!(all[0].members, vec![3, 4]);
        let capped = compute_tuples(&inst, 2, &params(50, 50, 3, 1));
        assert_eq!(capped.len(), 2);
        assert_eq!(capped[0], all[0]);
        assert_eq!(capped[1].members, vec![2]);
    }

    #[test]
    fn emitted_tuples_improve_and_fit() {
        let g = crate::generator::generate(&crate::generator::GenSpec::new(40, 2, 11).unwrap())
            .unwrap();
        let inst = &g.sorted;
        for c in 5..30 {
            let tuples = compute_tuples(inst, c, &params(100, 100, 10, 150));
            assert!(tuples.len() <= 151);
            for t in &tuples {
                assert!(t.profit_delta >= 1);
                assert!(t.weight_delta <= inst.weights[c]);
                assert_eq!(t, &TupleConstraint::new(inst, c, t.members.clone()));
            }
            assert_eq!(tuples, compute_tuples(inst, c, &params(100, 100, 10, 150)));
        }
    }

    #[test]
    fn crit2_without_tuples_equals_crit1() {
        let inst = tiny();
        for c in 0..3 {
            assert_eq!(
                mip_value(&build_crit2(&inst, c, Vec::new()).model),
                mip_value(&build_crit1(&inst, c).model)
            );
        }
    }

    #[test]
    fn crit2_on_tiny_instance() {
        let inst = tiny();
        let tuples = compute_tuples(&inst, 2, &params(10, 10, 1, 10));
        let z2 = mip_value(&build_crit2(&inst, 2, tuples.clone()).model).unwrap();
        assert_eq!(Some(z2), crit_oracle(&inst, 2, &tuples));
        assert!(z2 >= 4);
    }

    #[test]
    fn non_positive_tuple_weight_sums_all_k() {
        let inst = tiny();
        let tuple = TupleConstraint {
            members: vec![0, 2],
            profit_delta: 3,
            weight_delta: -2,
        };
        let crit = build_crit2(&inst, 1, vec![tuple]);
        let row = crit.model.rows().last().unwrap();
        let k_terms = row
            .coeffs
            .iter()
            .filter(|(v, _)| crit.k.contains(v))
            .count();
        assert_eq!(k_terms, inst.weights[1] as usize);
    }

    #[test]
    fn crit_models_match_enumeration() {
        let mut rng = crate::generator::SplitMix64::new(4);
        for _ in 0..60 {
            let mut u = |lo, hi| rng.next_uniform(lo, hi).unwrap();
            let n = u(3, 8) as usize;
            let profits: Vec<i64> = (0..n).map(|_| u(1, 30)).collect();
            let weights: Vec<i64> = (0..n).map(|_| u(1, 12)).collect();
            let leader: Vec<i64> = (0..n).map(|_| u(1, 12)).collect();
            let cl = u(1, weights.iter().sum::<i64>() - 1);
            let cu = u(0, leader.iter().sum::<i64>());
            let raw = Instance::new(profits, weights, leader, cu, cl).unwrap();
            let (inst, _) = crate::instance::sort_by_efficiency(&raw);
            for c in 0..n {
                assert_eq!(
                    mip_value(&build_crit1(&inst, c).model),
                    crit_oracle(&inst, c, &[])
                );
                let tuples = compute_tuples(&inst, c, &params(20, 20, 2, 30));
                let z2 = mip_value(&build_crit2(&inst, c, tuples.clone()).model);
                assert_eq!(z2, crit_oracle(&inst, c, &tuples));
            }
        }
    }
}
