use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::plant::{Plant, PlantConfig};
use crate::sim::SimOptions;

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, left: usize) -> f64 {
        if left == 0 {
            return 0.0;
        }
        if cost.len() - row < left {
            return f64::INFINITY;
        }
        // Skip this row (only useful when rows outnumber the matching size).
        let mut best = go(cost, row + 1, used, left);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.min(cost[row][c] + go(cost, row + 1, used, left - 1));
                used[c] = false;
            }
        }
        best
    }
    let cols = cost[0].len();
    go(cost, 0, &mut vec![false; cols], cost.len().min(cols))
}

fn is_matching(a: &Assignment, rows: usize, cols: usize) -> bool {
    let mut rs: Vec<usize> = a.pairs.iter().map(|p| p.0).collect();
    let mut cs: Vec<usize> = a.pairs.iter().map(|p| p.1).collect();
    rs.sort_unstable();
    cs.sort_unstable();
    rs.dedup();
    cs.dedup();
    rs.len() == a.pairs.len()
        && cs.len() == a.pairs.len()
        && a.pairs.len() == rows.min(cols)
        && a.pairs.iter().all(|&(r, c)| r < rows && c < cols)
}

fn matrix(int: bool) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6, 1usize..=6).prop_flat_map(move |(r, c)| {
        let cell = if int {
            (0i32..10).prop_map(f64::from).boxed()
        } else {
            (0.0f64..100.0).boxed()
        };
        prop::collection::vec(prop::collection::vec(cell, c), r)
    })
}

proptest! {
    #[test]
    fn lsa_matches_brute_force_on_integers(cost in matrix(true)) {
        let a = linear_sum_assignment(&cost).unwrap();
        prop_assert!(is_matching(&a, cost.len(), cost[0].len()));
        prop_assert_eq!(a.total_cost, brute_force(&cost));
    }

    #[test]
    fn lsa_matches_brute_force_on_floats(cost in matrix(false)) {
        let a = linear_sum_assignment(&cost).unwrap();
        prop_assert!(is_matching(&a, cost.len(), cost[0].len()));
        prop_assert!((a.total_cost - brute_force(&cost)).abs() < 1e-9);
    }

    #[test]
    fn scaling_keeps_the_pairs(cost in matrix(true), k in 1u32..50) {
        let scaled: Vec<Vec<f64>> = cost
            .iter()
            .map(|r| r.iter().map(|c| c * f64::from(k)).collect())
            .collect();
        prop_assert_eq!(
            linear_sum_assignment(&cost).unwrap().pairs,
            linear_sum_assignment(&scaled).unwrap().pairs
        );
    }
}

#[test]
fn oldest_entry_wins() {
    // M1 (index 1) has waited 30 s, the source (index 0) 50 s.
    assert_eq!(oldest(&[(1, 20.0), (0, 0.0)]), Some(0));
    assert_eq!(oldest(&[(3, 7.0)]), Some(3));
    assert_eq!(oldest(&[(2, 5.0), (1, 5.0)]), Some(1));
    assert_eq!(oldest(&[]), None);
}

#[test]
fn fastest_estimate() {
    // Idle AGV 5 s away, active AGV 8 s: the idle one.
    assert_eq!(fastest(&[5.0, 8.0]), Some(0));
    // Idle AGV 10 s away, active AGV 3 s: the active one.
    assert_eq!(fastest(&[10.0, 3.0]), Some(1));
    assert_eq!(fastest(&[4.0, 4.0]), Some(0));
    assert_eq!(fastest(&[f64::INFINITY, 9.0]), Some(1));
    assert_eq!(fastest(&[f64::INFINITY]), None);
}

#[test]
fn cost_table_pair_for_longest_waiting_agv() {
    let cells = vec![vec![10.0, 20.0], vec![15.0, 12.0]];
    assert_eq!(
        linear_sum_assignment(&cells).unwrap().pairs,
        vec![(0, 0), (1, 1)]
    );
    assert_eq!(select_pair(&cells, &[0.0, 5.0]), Some((0, 0)));
    assert_eq!(select_pair(&cells, &[5.0, 0.0]), Some((1, 1)));
    assert_eq!(select_pair(&[vec![7.0, 2.0, 9.0]], &[0.0]), Some((0, 1)));
}

#[test]
fn unreachable_cells_are_never_chosen() {
    let inf = f64::INFINITY;
    assert_eq!(select_pair(&[vec![inf, 3.0]], &[0.0]), Some((0, 1)));
    assert_eq!(select_pair(&[vec![inf], vec![inf]], &[0.0, 1.0]), None);
    assert_eq!(
        select_pair(&[vec![inf, 1.0], vec![2.0, inf]], &[9.0, 1.0]),
        Some((1, 0))
    );
}

fn mayer() -> Simulation {
    let config = PlantConfig::from_json(include_str!("../../scenarios/mayer.json")).unwrap();
    let mut sim = Simulation::new(Arc::new(Plant::new(config).unwrap()), SimOptions::default());
    sim.reset(0);
    sim
}

#[test]
fn first_decision_targets_the_source() {
    let sim = mayer();
    assert!(sim.decision_pending());
    let source = sim.actions().index_of(sim.plant().source()).unwrap();
    assert_eq!(fifo_act(&sim), Decision::pinned(source, 0));
    assert_eq!(nearest_neighbor_act(&sim), Decision::new(source));
    assert_eq!(cost_table_act(&sim), Decision::pinned(source, 0));
}

#[test]
fn agents_do_nothing_without_waiting_parts_or_agvs() {
    let mut sim = mayer();
    let source = sim.actions().index_of(sim.plant().source()).unwrap();
    sim.controller_dispatch(Decision::new(source));
    // The only AGV is busy and the only part is claimed.
    assert_eq!(sim.inactive_agvs().count(), 0);
    let idle = Decision::new(sim.actions().do_nothing());
    assert_eq!(fifo_act(&sim), idle);
    assert_eq!(nearest_neighbor_act(&sim), idle);
    assert_eq!(cost_table_act(&sim), idle);
}

#[test]
fn agents_are_pure() {
    let mut sim = mayer();
    for _ in 0..200 {
        if sim.is_done() {
            break;
        }
        for h in Heuristic::ALL {
            assert_eq!(h.act(&sim), h.act(&sim));
        }
        let d = Heuristic::CostTable.act(&sim);
        if let Some(s) = sim.actions().station(d.action) {
            assert!(sim.output_unit(s).unwrap().first_unclaimed().is_some());
        }
        sim.step(d).unwrap();
    }
}
