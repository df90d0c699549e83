use std::collections::BTreeMap;

use confluence::confsearch::{build_gap_table, next_order_search, run, Criteria, ExhaustionPolicy, RunConfig, RunEvent, WalkStop};
use confluence::error::Error;
use confluence::modspace::{base_set, BaseSetParams};
use confluence::precision::{residue, ExactT, PrimePair};
use num_bigint::BigUint;

const PAIR: PrimePair = PrimePair::TWO_THREE;

fn config(delta: f64, max_order: usize, steps: u64) -> RunConfig {
    let mut c = RunConfig::new(PAIR, delta, max_order);
    c.budgets = BTreeMap::from([(2, 1500), (3, steps)]);
    c
}

fn first(r: &confluence::confsearch::RunResult, order: usize) -> u64 {
    r.orders[&order].first().unwrap().q().try_into().unwrap()
}

#[test]
fn chain_to_order_four_at_tenth() {
    let r = run(&config(0.1, 4, 50_000)).unwrap();
    assert_eq!(first(&r, 3), 8274);
    assert_eq!(first(&r, 4), 171406);
    for p in &r.orders[&4].points {
        for (prime, res) in p.primes().iter().zip(&p.residues) {
            let exact = residue(&p.t, *prime).unwrap().to_f64();
            assert!((exact - res).abs() < 1e-12);
        }
        assert!(r.orders[&4].criteria.accepts(&p.residues));
    }
}

#[test]
fn order_five_relaxes_after_exhaustion() {
    let mut c = config(0.1, 5, 50_000);
    c.exhaustion = ExhaustionPolicy::Relax { step: 0.1, retries: 1 };
    let r = run(&c).unwrap();
    let o5 = &r.orders[&5];
    assert_eq!(first(&r, 5), 6538724);
    assert!((o5.delta_used - 0.2).abs() < 1e-12);
    assert!(r.log.iter().any(|e| matches!(e,
        RunEvent::Exhausted { order: 5, stranded, .. } if *stranded == BigUint::from(1823999714u64))));
}

#[test]
fn abort_policy_reports_the_stranded_point() {
    let mut c = config(0.1, 5, 50_000);
    c.exhaustion = ExhaustionPolicy::Abort;
    match run(&c) {
        Err(Error::GapTableExhausted { order, stranded, .. }) => {
            assert_eq!(order, 5);
            assert_eq!(stranded, "1823999714");
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}

#[test]
fn order_three_from_hundredth_base() {
    let b = base_set(&BaseSetParams::new(PAIR, 0.01).with_max_points(1500)).unwrap();
    let table = build_gap_table(&b).unwrap();
    let w = next_order_search(&b[0].t, &table, &Criteria::base(PAIR, 0.01), 5, 0.05, 50_000).unwrap();
    assert_eq!(w.points[0].q(), &BigUint::from(118922u32));
    assert_eq!(w.stop, WalkStop::Budget);
}

#[test]
fn tighter_delta_than_the_table_is_rejected() {
    let b = base_set(&BaseSetParams::new(PAIR, 0.1).with_max_points(100)).unwrap();
    let table = build_gap_table(&b).unwrap();
    let start = ExactT::from_u64(b[0].q().try_into().unwrap(), PAIR);
    let e = next_order_search(&start, &table, &Criteria::base(PAIR, 0.1), 5, 0.05, 10).unwrap_err();
    assert_eq!(e.category(), "invalid-argument");
}
