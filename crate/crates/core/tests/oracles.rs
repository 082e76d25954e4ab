//! Checks of library values against independently computed references.

use std::collections::BTreeMap;

use proptest::prelude::*;
use trimlab::dynamics::OrbitState;
use trimlab::harness::stats::{ks_distance, quantile};
use trimlab::harness::{
    iid_oracle_sample, run_weak_convergence, write_summary, Experiment, ExperimentConfig,
};
use trimlab::observables::expect_chi_trunc_f64;

fn freq(digits: &[u64], pred: impl Fn(u64) -> bool) -> f64 {
    digits.iter().filter(|&&a| pred(a)).count() as f64 / digits.len() as f64
}

#[test]
fn iid_oracle_digit_law() {
    let d = iid_oracle_sample(7, 1_000_000).unwrap();
    // P(a = k) = 1/(k(k+1))
    assert!((freq(&d, |a| a == 1) - 0.5).abs() < 3e-3);
    assert!((freq(&d, |a| a == 2) - 1.0 / 6.0).abs() < 3e-3);
    assert!((freq(&d, |a| a >= 10) - 0.1).abs() < 3e-3);
}

#[test]
fn orbit_digits_follow_the_invariant_law() {
    let mut ones = 0u64;
    let mut big = 0u64;
    let total = 10 * 100_000u64;
    for seed in 0..10 {
        let mut o = OrbitState::from_seed(seed);
        for _ in 0..100_000 {
            let a = o.next_digit().unwrap();
            ones += (a == 1) as u64;
            big += (a >= 10) as u64;
        }
    }
    assert!((ones as f64 / total as f64 - 0.5).abs() < 5e-3);
    assert!((big as f64 / total as f64 - 0.1).abs() < 5e-3);
}

#[test]
fn truncated_mean_asymptotic_matches_direct_sum() {
    for r in [1_000_000u64, 2_500_000, 10_000_000] {
        let mut s = 0.0f64;
        for k in (2..=r + 1).rev() {
            s += 1.0 / k as f64;
        }
        assert!((expect_chi_trunc_f64(r) - s).abs() < 1e-9, "r = {r}");
    }
}

fn weak_json(workers: usize) -> String {
    let mut kv = BTreeMap::new();
    kv.insert("seeds".to_string(), "24".to_string());
    kv.insert("grid".to_string(), "1000,5000".to_string());
    let cfg = ExperimentConfig::from_pairs(Experiment::WeakConvergence, &kv).unwrap();
    let run = run_weak_convergence(&cfg, workers).unwrap();
    let mut buf = Vec::new();
    write_summary(&mut buf, &run.summary).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn summary_bytes_do_not_depend_on_workers() {
    let one = weak_json(1);
    assert_eq!(one, weak_json(3));
    assert_eq!(one, weak_json(8));
}

#[test]
fn cli_values_override_file() {
    let file = "seeds = 9\ngrid=1000,2000\n# comment\nepsilon=1\n";
    let mut cli = BTreeMap::new();
    cli.insert("--seeds".to_string(), "4".to_string());
    let cfg = ExperimentConfig::from_file_and_overrides(Experiment::TrimmedLaw, Some(file), &cli).unwrap();
    assert_eq!(cfg.seeds, 4);
    assert_eq!(cfg.n_grid, vec![1000, 2000]);
    assert_eq!(cfg.echo()["epsilon"], "1");
}

proptest! {
    #[test]
    fn quantiles_are_monotone(mut v in proptest::collection::vec(-1e6f64..1e6, 1..200), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        v.sort_by(f64::total_cmp);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(quantile(&v, lo) <= quantile(&v, hi));
        prop_assert!(quantile(&v, 0.0) == v[0] && quantile(&v, 1.0) == v[v.len() - 1]);
    }

    #[test]
    fn ks_is_a_symmetric_distance(a in proptest::collection::vec(0.0f64..1.0, 1..100), b in proptest::collection::vec(0.0f64..1.0, 1..100)) {
        let d = ks_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&b, &a));
        prop_assert_eq!(ks_distance(&a, &a), 0.0);
    }
}
