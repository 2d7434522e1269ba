use bsft::circuits::{build_exrec, build_steane_ec, EcMethod, ExRec, ExRecOptions};
use bsft::malignancy::{
    binomial, colex_next, colex_rank, colex_unrank, is_malignant_naive, Analyzer, Estimate,
    MalignancyReport, RunOptions,
};
use bsft::{BaconShorCode, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exrec(n: usize, m: EcMethod) -> ExRec {
    build_exrec(&BaconShorCode::new(n).unwrap(), m, &ExRecOptions::default()).unwrap()
}

fn serial() -> RunOptions {
    RunOptions {
        jobs: 1,
        ..RunOptions::default()
    }
}

#[test]
fn analyzer_agrees_with_naive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for m in EcMethod::ALL {
        let e = exrec(3, m);
        let an = Analyzer::new(&e).unwrap();
        let l = an.num_locations();
        let (mut bad, mut good) = (0, 0);
        while bad < 25 || good < 25 {
            let a = rng.random_range(0..l);
            let b = rng.random_range(0..l);
            if a == b {
                continue;
            }
            let fast = an.is_malignant(&[a, b]).unwrap();
            if (fast && bad >= 25) || (!fast && good >= 25) {
                continue;
            }
            assert_eq!(
                fast,
                is_malignant_naive(&e, &[a, b]).unwrap(),
                "{m} {a} {b}"
            );
            if fast {
                bad += 1;
            } else {
                good += 1;
            }
        }
    }
}

#[test]
fn witnesses_are_supported_on_the_set() {
    let e = exrec(3, EcMethod::Knill);
    let an = Analyzer::new(&e).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut seen = 0;
    while seen < 10 {
        let set = [rng.random_range(0..150), rng.random_range(150..297)];
        if let Some(w) = an.witness(&set).unwrap() {
            let locs: Vec<usize> = w.entries().keys().copied().collect();
            assert_eq!(locs, set.to_vec());
            assert!(!bsft::faultsim::exrec_correct(&e, &w).unwrap());
            seen += 1;
        }
    }
    assert!(matches!(
        an.is_malignant(&[0, 297]),
        Err(Error::UnknownId { .. })
    ));
}

#[test]
fn single_locations_are_benign_at_n3() {
    for m in EcMethod::ALL {
        let r = Analyzer::new(&exrec(3, m))
            .unwrap()
            .enumerate_exact(1, &serial())
            .unwrap();
        assert_eq!(r.method, Estimate::Exact { malignant_count: 0 }, "{m}");
        assert_eq!(r.total_sets, r.locations as u128);
    }
}

#[test]
fn relabeling_qubits_preserves_malignancy() {
    let c = build_steane_ec(&BaconShorCode::new(3).unwrap()).unwrap();
    let mut perm: Vec<usize> = (0..c.num_qubits()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let r = c.relabel(&perm).unwrap();
    let a = Analyzer::from_circuit(&c, "a").unwrap();
    let b = Analyzer::from_circuit(&r, "b").unwrap();
    let (ra, rb) = (
        a.enumerate_exact(2, &serial()).unwrap(),
        b.enumerate_exact(2, &serial()).unwrap(),
    );
    assert_eq!(ra.method, rb.method);
    assert_ne!(ra.circuit_hash, rb.circuit_hash);
}

#[test]
fn monte_carlo_is_reproducible_and_merges() {
    let an = Analyzer::new(&exrec(3, EcMethod::Steane)).unwrap();
    let a = an.sample_mc(2, 10_000, 5, &serial()).unwrap();
    let b = an.sample_mc(2, 10_000, 5, &RunOptions::default()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let c = an.sample_mc(2, 10_000, 6, &serial()).unwrap();
    assert_ne!(a.method, c.method);
    let m = a.merge(&c).unwrap();
    match &m.method {
        Estimate::MonteCarlo { samples, seeds, .. } => {
            assert_eq!(*samples, 20_000);
            assert_eq!(seeds, &vec![5, 6]);
        }
        _ => panic!("merged report is not Monte-Carlo"),
    }
    let exact = an.enumerate_exact(2, &serial()).unwrap();
    assert!(a.merge(&exact).is_err());
    assert!((m.fraction() - exact.fraction()).abs() < 4.0 * m.sigma());
}

#[test]
fn parallel_and_serial_exact_runs_match() {
    let an = Analyzer::new(&exrec(3, EcMethod::Knill)).unwrap();
    let opts = |jobs| RunOptions {
        jobs,
        chunk_size: 5000,
        ..RunOptions::default()
    };
    assert_eq!(
        an.enumerate_exact(2, &opts(1)).unwrap().to_json(),
        an.enumerate_exact(2, &opts(4)).unwrap().to_json()
    );
}

#[test]
fn interrupted_runs_resume_from_checkpoints() {
    let an = Analyzer::new(&exrec(3, EcMethod::Steane)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        jobs: 1,
        chunk_size: 4000,
        checkpoint: Some(dir.path().join("run")),
        stop_after_chunks: Some(3),
        ..RunOptions::default()
    };
    match an.enumerate_exact(2, &opts) {
        Err(Error::Interrupted(3)) => {}
        other => panic!("expected interruption, got {other:?}"),
    }
    let resumed = an
        .enumerate_exact(
            2,
            &RunOptions {
                stop_after_chunks: None,
                ..opts.clone()
            },
        )
        .unwrap();
    assert_eq!(
        resumed.to_json(),
        an.enumerate_exact(2, &serial()).unwrap().to_json()
    );

    // a checkpoint of another run is refused
    assert!(matches!(
        an.enumerate_exact(1, &opts),
        Err(Error::Checkpoint(_))
    ));
}

#[test]
fn resource_guard_refuses_huge_exact_runs() {
    let an = Analyzer::new(&exrec(5, EcMethod::Steane)).unwrap();
    assert!(matches!(
        an.enumerate_exact(3, &serial()),
        Err(Error::ResourceGuard(_))
    ));
    assert!(an.enumerate_exact(0, &serial()).is_err());
    assert!(an.sample_mc(2, 0, 1, &serial()).is_err());
}

#[test]
fn reports_round_trip_through_json() {
    let r = MalignancyReport {
        tool_version: "t".into(),
        circuit_hash: "h".into(),
        exrec: "e".into(),
        locations: 10_000,
        order: 9,
        total_sets: u128::MAX / 3,
        method: Estimate::Exact {
            malignant_count: u128::MAX / 7,
        },
    };
    assert_eq!(MalignancyReport::from_json(&r.to_json()).unwrap(), r);
    assert!(r.to_json().ends_with('\n'));
}

proptest! {
    #[test]
    fn colex_rank_inverts_unrank(rank in 0u64..2_000_000, k in 1usize..5) {
        let set = colex_unrank(rank as u128, k);
        prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(colex_rank(&set), rank as u128);
        let mut next = set.clone();
        if colex_next(&mut next, usize::MAX) {
            prop_assert_eq!(colex_rank(&next), rank as u128 + 1);
        }
    }

    #[test]
    fn mc_sigma_matches_binomial_formula(n in 1u64..1_000_000, frac in 0.0f64..1.0) {
        let m = (n as f64 * frac) as u64;
        let e = Estimate::monte_carlo(n, m, vec![0]);
        if let Estimate::MonteCarlo { f_hat, sigma, upper_bound_only, .. } = e {
            let f = m as f64 / n as f64;
            prop_assert!((f_hat - f).abs() < 1e-15);
            prop_assert!((sigma - (f * (1.0 - f) / n as f64).sqrt()).abs() < 1e-15);
            prop_assert_eq!(upper_bound_only, m == 0);
        }
    }

    #[test]
    fn binomial_recurrence(n in 1usize..200, k in 1usize..12) {
        let lhs = binomial(n, k).unwrap();
        let rhs = binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
