use super::*;
use crate::generator::SplitMix64;

fn engine() -> DenseEngine {
    DenseEngine::default()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6
}

#[test]
fn single_variable_lp() {
    let mut m = LinearModel::new();
    let x = m.add_continuous("x", 1.0);
    m.set_objective(x, -1.0).unwrap();
    m.add_row(Row::new(vec![(x, 1.0)], Relation::Le, 0.5))
        .unwrap();
    let lp = engine().solve_lp(&m);
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!(close(lp.objective, -0.5));
    assert!(close(lp.values[0], 0.5));
}

#[test]
fn contradictory_row_is_infeasible() {
    let mut m = LinearModel::new();
    let x = m.add_continuous("x", 1.0);
    m.add_row(Row::new(vec![(x, 0.0)], Relation::Ge, 1.0))
        .unwrap();
    assert_eq!(engine().solve_lp(&m).status, LpStatus::Infeasible);
}

#[test]
fn textbook_lps() {
    // Optima from an independent LP code.
    let mut m = LinearModel::new();
    let x: Vec<VarId> = (0..3)
        .map(|i| m.add_continuous(format!("x{i}"), f64::INFINITY))
        .collect();
    for (v, c) in x.iter().zip([-2.0, -3.0, -4.0]) {
        m.set_objective(*v, c).unwrap();
    }
    m.add_row(Row::new(
        vec![(x[0], 3.0), (x[1], 2.0), (x[2], 1.0)],
        Relation::Le,
        10.0,
    ))
    .unwrap();
    m.add_row(Row::new(
        vec![(x[0], 2.0), (x[1], 5.0), (x[2], 3.0)],
        Relation::Le,
        15.0,
    ))
    .unwrap();
    let lp = engine().solve_lp(&m);
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!(close(lp.objective, -20.0), "{}", lp.objective);
    assert!(close(lp.values[2], 5.0));

    let mut m = LinearModel::new();
    let a = m.add_continuous("a", f64::INFINITY);
    let b = m.add_continuous("b", f64::INFINITY);
    m.set_objective(a, -3.0).unwrap();
    m.set_objective(b, -5.0).unwrap();
    m.add_row(Row::new(vec![(a, 1.0)], Relation::Le, 4.0))
        .unwrap();
    m.add_row(Row::new(vec![(b, 2.0)], Relation::Le, 12.0))
        .unwrap();
    m.add_row(Row::new(vec![(a, 3.0), (b, 2.0)], Relation::Le, 18.0))
        .unwrap();
    let lp = engine().solve_lp(&m);
    assert!(close(lp.objective, -36.0));
    assert!(close(lp.values[0], 2.0) && close(lp.values[1], 6.0));
}

#[test]
fn unbounded_lp_is_reported() {
    let mut m = LinearModel::new();
    let x = m.add_continuous("x", f64::INFINITY);
    let y = m.add_continuous("y", f64::INFINITY);
    m.set_objective(x, -1.0).unwrap();
    m.add_row(Row::new(vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0))
        .unwrap();
    assert_eq!(engine().solve_lp(&m).status, LpStatus::Unbounded);
}

#[test]
fn two_binaries_one_row() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x");
    let y = m.add_binary("y");
    m.set_objective(x, -1.0).unwrap();
    m.set_objective(y, -1.0).unwrap();
    m.add_row(Row::new(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0))
        .unwrap();
    let r = engine().solve_mip(&m, None);
    assert!(r.is_optimal());
    assert!(close(r.objective, -1.0));
}

#[test]
fn integral_root_needs_one_node() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x");
    let y = m.add_binary("y");
    m.set_objective(x, 2.0).unwrap();
    m.set_objective(y, 3.0).unwrap();
    m.add_row(Row::new(vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.0))
        .unwrap();
    let r = engine().solve_mip(&m, None);
    assert_eq!(r.nodes, 1);
    assert_eq!(r.values, vec![1.0, 0.0]);
}

#[test]
fn fixed_variable_is_forced() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x");
    m.set_objective(x, 1.0).unwrap();
    m.fix_variable(x, 1.0).unwrap();
    assert!(close(engine().solve_mip(&m, None).objective, 1.0));
    assert!(m.fix_variable(VarId(7), 1.0).is_err());
    assert!(m.fix_variable(x, 0.5).is_err());
}

#[test]
fn added_row_is_enforced() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x");
    m.set_objective(x, 1.0).unwrap();
    assert!(close(engine().solve_mip(&m, None).objective, 0.0));
    m.add_rows([Row::new(vec![(x, 1.0)], Relation::Ge, 1.0)])
        .unwrap();
    assert!(close(engine().solve_mip(&m, None).objective, 1.0));
    assert!(m
        .add_row(Row::new(vec![(VarId(3), 1.0)], Relation::Ge, 1.0))
        .is_err());
}

#[test]
fn fully_fixed_model_is_a_constant_check() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x");
    let y = m.add_binary("y");
    m.set_objective(x, 4.0).unwrap();
    m.set_objective(y, -1.0).unwrap();
    m.set_offset(10.0);
    m.fix_variable(x, 1.0).unwrap();
    m.fix_variable(y, 1.0).unwrap();
    m.add_row(Row::new(vec![(x, 1.0), (y, 1.0)], Relation::Le, 2.0))
        .unwrap();
    let lp = engine().solve_lp(&m);
    assert!(close(lp.objective, 13.0));
    m.add_row(Row::new(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0))
        .unwrap();
    assert_eq!(engine().solve_lp(&m).status, LpStatus::Infeasible);
}

#[test]
fn cutoff_reports_no_better_solution() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x");
    m.set_objective(x, 1.0).unwrap();
    m.add_row(Row::new(vec![(x, 1.0)], Relation::Ge, 1.0))
        .unwrap();
    m.set_integral_objective(true);
    assert_eq!(engine().solve_mip(&m, Some(1.0)).status, MipStatus::Cutoff);
    assert!(engine().solve_mip(&m, Some(2.0)).is_optimal());
}

#[test]
fn node_limit_is_reported() {
    let mut m = LinearModel::new();
    let vars: Vec<VarId> = (0..8).map(|i| m.add_binary(format!("x{i}"))).collect();
    for &v in &vars {
        m.set_objective(v, -1.0).unwrap();
    }
    m.add_row(Row::new(
        vars.iter().map(|&v| (v, 2.0)).collect(),
        Relation::Le,
        7.0,
    ))
    .unwrap();
    let r = DenseEngine { node_limit: 1 }.solve_mip(&m, None);
    assert_eq!(r.status, MipStatus::ResourceExhausted);
}

#[test]
fn lp_dump_lists_all_sections() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x1");
    let p = m.add_continuous("pi", f64::INFINITY);
    m.set_objective(x, -3.0).unwrap();
    m.set_objective(p, 1.0).unwrap();
    m.set_offset(3.0);
    m.add_row(Row::new(vec![(p, 1.0), (x, 2.0)], Relation::Ge, 0.0))
        .unwrap();
    let text = m.to_lp_format();
    assert!(text.contains("Minimize\n obj: - 3 x1 + 1 pi + 3"), "{text}");
    assert!(text.contains(" r0: 1 pi + 2 x1 >= 0"), "{text}");
    assert!(text.contains("Binaries\n x1\n"));
    assert!(text.ends_with("End\n"));
}

/// Random pure 0-1 model with small integer data.
fn random_binary_model(rng: &mut SplitMix64) -> LinearModel {
    let mut u = |lo, hi| rng.next_uniform(lo, hi).unwrap();
    let k = u(1, 12) as usize;
    let rows = u(0, 8) as usize;
    let mut m = LinearModel::new();
    let vars: Vec<VarId> = (0..k).map(|i| m.add_binary(format!("x{i}"))).collect();
    for &v in &vars {
        m.set_objective(v, u(-10, 10) as f64).unwrap();
    }
    for _ in 0..rows {
        let mut coeffs = Vec::new();
        for &v in &vars {
            if u(0, 2) > 0 {
                coeffs.push((v, u(-5, 5) as f64));
            }
        }
        let relation = match u(0, 4) {
            0 => Relation::Ge,
            1 => Relation::Eq,
            _ => Relation::Le,
        };
        let scale = coeffs.len() as i64 * 2;
        let rhs = u(-scale, scale) as f64;
        m.add_row(Row::new(coeffs, relation, rhs)).unwrap();
    }
    m.set_integral_objective(u(0, 1) == 1);
    m
}

fn enumerate(m: &LinearModel) -> Option<f64> {
    let k = m.num_vars();
    (0u32..1 << k)
        .filter_map(|mask| {
            let x: Vec<f64> = (0..k).map(|i| (mask >> i & 1) as f64).collect();
            m.is_feasible(&x, 1e-9).then(|| m.evaluate(&x))
        })
        .min_by(f64::total_cmp)
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = SplitMix64::new(77);
    for trial in 0..200 {
        let m = random_binary_model(&mut rng);
        let r = engine().solve_mip(&m, None);
        match enumerate(&m) {
            Some(best) => {
                assert_eq!(r.status, MipStatus::Optimal, "trial {trial}");
                assert!(
                    close(r.objective, best),
                    "trial {trial}: {} vs {best}",
                    r.objective
                );
                assert!(m.is_feasible(&r.values, 1e-9));
                assert!(close(m.evaluate(&r.values), r.objective));
                let lp = engine().solve_lp(&m);
                assert!(lp.objective <= r.objective + 1e-6);
            }
            None => assert_eq!(r.status, MipStatus::Infeasible, "trial {trial}"),
        }
    }
}

#[test]
fn resolving_is_reproducible() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..20 {
        let m = random_binary_model(&mut rng);
        let a = engine().solve_lp(&m);
        let b = engine().solve_lp(&m);
        assert_eq!(a.status, b.status);
        assert!(a.objective.to_bits() == b.objective.to_bits() || a.objective.is_nan());
        let a = engine().solve_mip(&m, None);
        let b = engine().solve_mip(&m, None);
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.values, b.values);
    }
}

/// Random boxed LP that is feasible by construction.
pub(crate) fn random_boxed_lp(rng: &mut SplitMix64) -> LinearModel {
    let mut f = |lo: i64, hi: i64| rng.next_uniform(lo * 1000, hi * 1000).unwrap() as f64 / 1000.0;
    let n = 6;
    let mut m = LinearModel::new();
    let vars: Vec<VarId> = (0..n)
        .map(|i| m.add_continuous(format!("x{i}"), f(1, 5)))
        .collect();
    let anchor: Vec<f64> = vars.iter().map(|&v| m.variable(v).upper * 0.5).collect();
    for &v in &vars {
        m.set_objective(v, f(-5, 5)).unwrap();
    }
    for _ in 0..4 {
        let coeffs: Vec<(VarId, f64)> = vars.iter().map(|&v| (v, f(-3, 3))).collect();
        let at: f64 = coeffs.iter().map(|&(v, c)| c * anchor[v.0]).sum();
        if f(0, 1) < 0.5 {
            m.add_row(Row::new(coeffs, Relation::Le, at + f(0, 2)))
                .unwrap();
        } else {
            m.add_row(Row::new(coeffs, Relation::Ge, at - f(0, 2)))
                .unwrap();
        }
    }
    m
}

#[test]
fn reduced_costs_match_finite_differences() {
    let mut rng = SplitMix64::new(31);
    let eps = 1e-5;
    for _ in 0..50 {
        let m = random_boxed_lp(&mut rng);
        let lp = engine().solve_lp(&m);
        assert_eq!(lp.status, LpStatus::Optimal);
        for j in 0..m.num_vars() {
            let (step, rc) = match lp.basis[j] {
                BasisStatus::Basic => {
                    assert_eq!(lp.reduced_costs[j], 0.0);
                    continue;
                }
                BasisStatus::AtLower => {
                    assert!(lp.reduced_costs[j] >= -1e-9);
                    (eps, lp.reduced_costs[j])
                }
                BasisStatus::AtUpper => {
                    assert!(lp.reduced_costs[j] <= 1e-9);
                    (-eps, lp.reduced_costs[j])
                }
            };
            let mut moved = m.clone();
            moved.fix_variable(VarId(j), lp.values[j] + step).unwrap();
            let again = engine().solve_lp(&moved);
            assert_eq!(again.status, LpStatus::Optimal);
            let slope = (again.objective - lp.objective) / step;
            assert!(
                (slope - rc).abs() <= 1e-3,
                "var {j}: slope {slope} vs reduced cost {rc}"
            );
        }
    }
}
