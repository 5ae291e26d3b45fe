mod common;

use common::*;
use specforge_core::equivalence::{compute_threshold, ThresholdEncoding, ThresholdVerdict};

use specforge_core::theory::parse_theory;
use specforge_core::synthesis::DerivedRegistry;

fn threshold(theory: &str, max: u32) -> (u32, Vec<(u32, ThresholdVerdict)>) {
    let t = parse_theory(&read(&format!("theories/{theory}")), &DerivedRegistry::new()).unwrap();
    let r = compute_threshold(&t.equivalence.unwrap(), max, ThresholdEncoding::PerSide, &mut solver()).unwrap();
    (r.theta, r.verdicts)
}

#[test]
fn search_classes_settle_at_two() {
    let (theta, verdicts) = threshold("search-equiv.thy", 5);
    assert_eq!(theta, 2);
    assert_eq!(verdicts, vec![(1, ThresholdVerdict::Invalid), (2, ThresholdVerdict::Valid)]);
}

#[test]
fn a_gap_clause_needs_three() {
    let (theta, verdicts) = threshold("search-equiv-gap.thy", 5);
    assert_eq!(theta, 3);
    assert_eq!(verdicts, vec![(1, ThresholdVerdict::Invalid), (2, ThresholdVerdict::Invalid), (3, ThresholdVerdict::Valid)]);
}

#[test]
fn a_low_cap_is_exhausted() {
    let t = parse_theory(&read("theories/search-equiv-gap.thy"), &DerivedRegistry::new()).unwrap();
    assert!(compute_threshold(&t.equivalence.unwrap(), 2, ThresholdEncoding::PerSide, &mut solver()).is_err());
}
