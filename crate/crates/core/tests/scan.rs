use confluence::modspace::ConfluencePoint;
use confluence::precision::{ExactT, PrimePair};
use confluence::scanner::{brute_scan, revalidate, scan_window, BruteScan, ScanConfig, WindowScan};
use num_rational::Ratio;

fn point(q: u64, order: usize) -> ConfluencePoint {
    ConfluencePoint {
        order,
        t: ExactT::from_u64(q, PrimePair::TWO_THREE),
        delta: 0.1,
        residues: Vec::new(),
    }
}

#[test]
fn first_negative_sample_on_the_axis() {
    let hit = brute_scan("682100", "682120", "0.1").unwrap().unwrap();
    assert_eq!(hit.t.to_string(), "682112.9");
    let (re, im) = hit.value.to_f64();
    assert!((re + 0.00158317678141345810).abs() < 1e-9);
    assert!((im + 1.27085628559369888989).abs() < 1e-9);
    assert!(revalidate(&hit.as_region_hit(), &ScanConfig::default()).unwrap());
}

#[test]
fn refinement_window_has_a_negative_sample() {
    let hit = brute_scan("682112.85", "682112.95", "0.01").unwrap().unwrap();
    assert!(hit.value.re.to_f64() < 0.0);
}

#[test]
fn low_heights_are_positive() {
    assert!(brute_scan("0", "1000", "0.1").unwrap().is_none());
}

#[test]
fn resumed_scan_matches_a_single_pass() {
    let c = ScanConfig::default();
    let mut split = BruteScan::new("682105", "682120", "0.1").unwrap();
    assert!(split.advance(40, &c).unwrap().is_none());
    let saved = split.next;
    let mut resumed = BruteScan::new("682105", "682120", "0.1").unwrap();
    resumed.next = saved;
    let a = resumed.run(&c).unwrap().unwrap();
    let b = BruteScan::new("682105", "682120", "0.1").unwrap().run(&c).unwrap().unwrap();
    assert_eq!(a.t, b.t);
}

#[test]
fn order_three_window_finds_the_negative_region() {
    let scan = scan_window(&point(4378640, 3), 21, &ScanConfig::default()).unwrap();
    let WindowScan::Evaluated { samples, hit } = scan else { panic!("evaluated expected") };
    assert_eq!(samples.len(), 21);
    let at = samples.iter().find(|s| s.offset == Ratio::new(-2, 5)).unwrap();
    let (re, im) = at.value.to_f64();
    assert!((re + 0.0094009531).abs() < 1e-8);
    assert!((im + 1.2166037620).abs() < 1e-8);
    let hit = hit.unwrap();
    assert!(hit.min_re < 0.0 && hit.zeta.im.to_f64() < 0.0);
}

#[test]
fn points_above_the_ceiling_are_reported() {
    let c = ScanConfig {
        ceiling: 1e6,
        ..ScanConfig::default()
    };
    let scan = scan_window(&point(4378640, 3), 21, &c).unwrap();
    assert!(matches!(scan, WindowScan::Unverifiable { .. }));
}

#[test]
fn smallest_real_part_below_a_thousand() {
    use confluence::zeta::{zeta, Abscissa, EvalRequest};
    use confluence::precision::BigReal;
    let req = EvalRequest::new(BigReal::from_i64(1, 30), Abscissa::parse("822.4").unwrap(), 15).unwrap();
    let re = zeta(&req).unwrap().re.to_f64();
    assert!((re - 0.2102350051528597).abs() < 1e-12);
}
