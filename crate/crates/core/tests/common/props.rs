//! Property bodies shared by the proptest suite and the acceptance report.

use std::collections::BTreeMap;

use confluence::confsearch::{run_partial, walk, Criteria, ExhaustionPolicy, GapTable, RunConfig, WalkStop};
use confluence::modspace::{base_set, brute_force_base, fast_path_threshold, BaseSetParams};
use confluence::precision::turns::PhaseKernel;
use confluence::precision::{residue, residue_at, ExactT, PrimePair};
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const PAIR: PrimePair = PrimePair::TWO_THREE;
pub const LATTICE_TOL: f64 = 1e-12;
pub const ESCALATION_TOL: f64 = 1e-15;

pub fn even_q(max: u128) -> impl Strategy<Value = u128> {
    (1..=max / 2).prop_map(|h| 2 * h)
}

/// residue(qk, 2) and residue(qk, 3) coincide for even q.
pub fn lattice_residues_agree(q: u128) -> Result<(), TestCaseError> {
    let t = ExactT::new(BigUint::from(q), PAIR);
    let a = residue(&t, 2).unwrap().to_f64();
    let b = residue(&t, 3).unwrap().to_f64();
    prop_assert!((a - b).abs() < LATTICE_TOL, "q={q}: {a} vs {b}");
    Ok(())
}

/// The R-line neighbours accepted without residue checks are exactly the
/// even q whose residues pass an explicit extended-precision check.
pub fn fast_path_sound(q_max: u64, delta: f64) -> Result<(), TestCaseError> {
    prop_assume!(delta > fast_path_threshold());
    let fast: Vec<BigUint> = base_set(&BaseSetParams::new(PAIR, delta).with_q_max(q_max))
        .unwrap()
        .into_iter()
        .map(|p| p.q().clone())
        .collect();
    let h = fast_path_threshold();
    for q in &fast {
        let r = residue(&ExactT::new(q.clone(), PAIR), 2).unwrap().to_f64();
        prop_assert!((-h..h).contains(&r), "q={q}: residue {r}");
    }
    let brute: Vec<BigUint> = brute_force_base(q_max, delta, PAIR)
        .unwrap()
        .into_iter()
        .map(|p| p.q().clone())
        .collect();
    prop_assert_eq!(fast, brute);
    Ok(())
}

pub fn run_config(max_order: usize, steps: u64) -> RunConfig {
    let mut c = RunConfig::new(PAIR, 0.1, max_order);
    c.budgets = BTreeMap::from([(2, 1500), (3, steps)]);
    c.exhaustion = ExhaustionPolicy::Relax { step: 0.1, retries: 1 };
    c
}

/// A run stopped after `first_order` orders and `first_steps` steps, then
/// resumed, equals the uninterrupted run.
pub fn split_resume_equivalent(first_order: usize, first_steps: u64, steps: u64) -> Result<(), TestCaseError> {
    let whole = run_partial(&run_config(5, steps), None).unwrap();
    let part = run_partial(&run_config(first_order, first_steps.min(steps)), None).unwrap();
    let resumed = run_partial(&run_config(5, steps), Some(&part)).unwrap();
    prop_assert_eq!(&resumed.orders, &whole.orders);
    prop_assert_eq!(&resumed.log, &whole.log);
    Ok(())
}

/// Raising the precision by 20 digits changes a residue by less than
/// ESCALATION_TOL, and the lattice kernel agrees with the escalated value.
pub fn escalation_stable(q: u128, prime: u64) -> Result<(), TestCaseError> {
    let t = ExactT::new(BigUint::from(q), PAIR);
    let d = t.working_digits();
    let a = residue_at(&t, prime, d).unwrap().to_f64();
    let b = residue_at(&t, prime, d + 20).unwrap().to_f64();
    prop_assert!((a - b).abs() < ESCALATION_TOL, "q={q} p={prime}: {a} vs {b}");
    let kernel = PhaseKernel::new(PAIR, &[prime], t.q().bits() + 8);
    let k = kernel.residues(t.q())[0];
    prop_assert!((k - b).abs() < LATTICE_TOL, "kernel {k} vs {b}");
    Ok(())
}

/// At a fixed delta every order-(n+1) point below the last order-n point is
/// an order-n point, and satisfies the order-n windows.
pub fn orders_nest(delta: f64, steps: u64) -> Result<(), TestCaseError> {
    let mut c = RunConfig::new(PAIR, delta, 5);
    c.budgets = BTreeMap::from([(2, 1500), (3, steps)]);
    c.exhaustion = ExhaustionPolicy::Abort;
    let r = run_partial(&c, None).unwrap();
    for (order, res) in r.orders.range(3..) {
        let lower = &r.orders[&(order - 1)];
        let set: std::collections::BTreeSet<&BigUint> = lower.points.iter().map(|p| p.q()).collect();
        let last = lower.last_visited.as_ref().map(|t| t.q().clone()).unwrap_or_default();
        for p in &res.points {
            prop_assert!(lower.criteria.accepts(&p.residues));
            if lower.order > 2 && p.q() <= &last {
                prop_assert!(set.contains(p.q()), "order {order} point {} missing below", p.q());
            }
        }
    }
    Ok(())
}

/// Walks `steps` steps from an even q near `q0` with a table of every even
/// gap up to 4000 and checks each visited point against extended precision.
pub struct SyntheticWalk {
    pub start: BigUint,
    pub end: BigUint,
    pub steps: u64,
    pub gap_sum: BigUint,
    pub points: usize,
    pub max_residue_error: f64,
    pub first_step_matches_scan: bool,
}

pub fn synthetic_walk(q0: &BigUint, steps: u64) -> SyntheticWalk {
    let gaps: Vec<u64> = (1..=2000).map(|i| 2 * i).collect();
    let table = GapTable::from_gaps(2, &gaps, 0.0).unwrap();
    let start = q0 - (q0 % 2u8);
    let t = ExactT::new(start.clone(), PAIR);
    let check = Criteria::base(PAIR, 0.1);
    let w = walk(&t, &table, &check, 5, 0.1, steps, true).unwrap();
    assert_eq!(w.stop, WalkStop::Budget);

    let h = fast_path_threshold();
    let in_band = |q: &BigUint| {
        let r = residue(&ExactT::new(q.clone(), PAIR), 2).unwrap().to_f64();
        -h <= r && r < h
    };
    let first_scan = (1..=2000u64).map(|i| &start + 2 * i).find(|q| in_band(q));
    let one = walk(&t, &table, &check, 5, 0.1, 1, false).unwrap();
    let first_step_matches_scan = first_scan.as_ref() == Some(one.last_visited.q());

    let mut max_err: f64 = 0.0;
    for p in &w.points {
        for (prime, r) in [2u64, 3, 5].iter().zip(&p.residues) {
            let exact = residue(&p.t, *prime).unwrap().to_f64();
            max_err = max_err.max((exact - r).abs());
        }
    }
    SyntheticWalk {
        gap_sum: w.last_visited.q() - &start,
        end: w.last_visited.q().clone(),
        start,
        steps: w.steps,
        points: w.points.len(),
        max_residue_error: max_err,
        first_step_matches_scan,
    }
}
