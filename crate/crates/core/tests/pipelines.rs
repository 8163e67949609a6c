//! Integration tests for the search pipelines.

use normal_coloring::catalog;
use normal_coloring::coloring::{is_normal, poor_edges};
use normal_coloring::search::pipelines::{
    self, cycle_poor_scan, max_poor, min_poor, verify_prop_odd, MaxPoorOutcome,
};
use normal_coloring::search::{
    solve, SearchConfig, SearchMode, SearchOutcome, SearchProblem, Symmetry,
};

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

#[test]
fn petersen_normal_coloring_counts() {
    let p10 = catalog::petersen();
    let mut p = SearchProblem::new(&p10, 5, true, SearchMode::Count);
    p.symmetry = Symmetry::UpToColorPermutation;
    let classes = match solve(&p, &cfg()).expect("ok").outcome.expect("done") {
        SearchOutcome::Count(n) => n,
        _ => unreachable!(),
    };
    assert_eq!(classes, 1);
    p.symmetry = Symmetry::Labeled;
    let labeled = match solve(&p, &cfg()).expect("ok").outcome.expect("done") {
        SearchOutcome::Count(n) => n,
        _ => unreachable!(),
    };
    assert_eq!(labeled, 120);
}

#[test]
fn petersen_unique_coloring_is_strong() {
    let p10 = catalog::petersen();
    let c = pipelines::petersen_normal_coloring(&cfg()).expect("unique");
    assert!(is_normal(&p10, &c));
    assert_eq!(poor_edges(&p10, &c).len(), 0);
}

#[test]
fn poor_values_for_petersen_and_truncation() {
    match max_poor(&catalog::petersen(), &cfg()) {
        MaxPoorOutcome::Exact { poor, .. } => assert_eq!(poor, 0),
        other => panic!("unexpected outcome {other:?}"),
    }
    match max_poor(&catalog::petersen_truncated(), &cfg()) {
        MaxPoorOutcome::Exact { poor, witness } => {
            assert_eq!(poor, 3);
            let t = catalog::petersen_truncated();
            assert!(is_normal(&t, &witness));
            assert_eq!(poor_edges(&t, &witness).len(), 3);
        }
        other => panic!("unexpected outcome {other:?}"),
    }
    assert_eq!(min_poor(&catalog::petersen_truncated(), &cfg()), Some(3));
}

#[test]
fn three_colorable_graph_poor_is_edge_count() {
    match max_poor(&catalog::cube_q3(), &cfg()) {
        MaxPoorOutcome::Exact { poor, .. } => assert_eq!(poor, 12),
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn prop_odd_counts() {
    let report = verify_prop_odd(&cfg()).expect("completes");
    assert_eq!(report.ext_extensions, 1);
    assert_eq!(report.m123_compatible, 0);
}

#[test]
fn interior_restriction_is_normal_multipole() {
    assert!(pipelines::interior_restriction_is_normal(&cfg()).expect("completes"));
}

#[test]
fn cycle_scan_on_truncation_and_cube() {
    let r = cycle_poor_scan(&catalog::petersen_truncated(), &cfg()).expect("completes");
    assert_eq!(r.triangles, 1);
    assert!(r.triangle_violations.is_empty());
    assert!(r.four_cycle_violations.is_empty());

    let r = cycle_poor_scan(&catalog::cube_q3(), &cfg()).expect("completes");
    assert!(r.triangles == 0);
    assert_eq!(r.four_cycles, 6);
    assert!(r.four_cycle_violations.is_empty());
    assert!(r.four_cycle_poor_counts_seen.iter().all(|c| *c == 2 || *c == 4));

    let r = cycle_poor_scan(&catalog::k4(), &cfg()).expect("completes");
    assert!(r.triangle_violations.is_empty());
    assert!(r.four_cycle_violations.is_empty());
}

#[test]
fn snark_detection() {
    use normal_coloring::search::pipelines::is_3_edge_colorable;
    assert_eq!(is_3_edge_colorable(&catalog::petersen(), &cfg()), Some(false));
    assert_eq!(is_3_edge_colorable(&catalog::cube_q3(), &cfg()), Some(true));
    assert_eq!(is_3_edge_colorable(&catalog::blanusa_first(), &cfg()), Some(false));
    assert_eq!(is_3_edge_colorable(&catalog::blanusa_second(), &cfg()), Some(false));
    assert_eq!(is_3_edge_colorable(&catalog::flower_j5(), &cfg()), Some(false));
}
