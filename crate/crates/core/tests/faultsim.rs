use bsft::circuits::build_prep_zero_L;
use bsft::circuits::{
    build_exrec, build_gauge_meas, build_knill_ec, build_steane_ec, Circuit, Criterion, EcMethod,
    ExRec, ExRecOptions, OpKind, SectionKind,
};
use bsft::faultsim::{
    circuit_correct, exrec_correct, propagate, select_round, CompiledCircuit, FaultAction,
    FaultAssignment, Scratch,
};
use bsft::{BaconShorCode, Pauli1, PauliOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn code(n: usize) -> BaconShorCode {
    BaconShorCode::new(n).unwrap()
}

fn exrec(n: usize, m: EcMethod) -> Circuit {
    full(n, m).circuit().clone()
}

fn full(n: usize, m: EcMethod) -> ExRec {
    build_exrec(&code(n), m, &ExRecOptions::default()).unwrap()
}

/// Location of the op on `qubit` at layer `t`.
fn loc_of(c: &Circuit, t: usize, qubit: usize) -> usize {
    c.iter_ops()
        .find(|(_, lt, op)| *lt == t && op.targets().contains(&qubit))
        .map(|(id, _, _)| id)
        .unwrap()
}

fn all_actions(kind: OpKind) -> Vec<FaultAction> {
    use Pauli1::*;
    match kind {
        OpKind::MeasZ | OpKind::MeasX => vec![FaultAction::Flip],
        OpKind::Cnot => [I, X, Y, Z]
            .iter()
            .flat_map(|&a| [I, X, Y, Z].map(move |b| FaultAction::Pair(a, b)))
            .filter(|f| !f.is_identity())
            .collect(),
        _ => vec![
            FaultAction::Single(X),
            FaultAction::Single(Y),
            FaultAction::Single(Z),
        ],
    }
}

fn random_assignment(c: &Circuit, k: usize, rng: &mut ChaCha8Rng) -> FaultAssignment {
    let mut a = FaultAssignment::new();
    while a.len() < k {
        let loc = rng.random_range(0..c.num_locations());
        if a.entries().contains_key(&loc) {
            continue;
        }
        let acts = all_actions(c.op_at(loc).unwrap().kind);
        a.insert(loc, acts[rng.random_range(0..acts.len())])
            .unwrap();
    }
    a
}

#[test]
fn empty_assignment_is_clean() {
    let c = exrec(3, EcMethod::Steane);
    let r = propagate(&c, &FaultAssignment::new()).unwrap();
    assert!(r.outcome_flips.is_zero());
    assert!(r.residual.iter().all(|p| p.is_identity()));
    assert!(r.applied_corrections.iter().all(|p| p.is_identity()));
    assert!(circuit_correct(&c, &FaultAssignment::new()).unwrap());
}

#[test]
fn x_before_z_check_propagates_to_ancilla() {
    let cd = code(3);
    // Z-type gauge generator Z_{0,0} Z_{0,1}
    let id = 3 * 2;
    let c = build_gauge_meas(&cd, id, 9).unwrap();
    let data_loc = loc_of(&c, 0, 0);
    let a = FaultAssignment::new()
        .with(data_loc, FaultAction::Single(Pauli1::X))
        .unwrap();
    let r = propagate(&c, &a).unwrap();
    assert_eq!(r.outcome_flips.count_ones(), 1);
    assert_eq!(r.residual[0], PauliOp::parse_sparse(9, "X0").unwrap());

    // X on the ancilla after the first CNOT flips the outcome only
    let cnot = loc_of(&c, 1, 9);
    let a = FaultAssignment::new()
        .with(cnot, FaultAction::Pair(Pauli1::I, Pauli1::X))
        .unwrap();
    let r = propagate(&c, &a).unwrap();
    assert_eq!(r.outcome_flips.count_ones(), 1);
    assert!(r.residual[0].is_identity());
}

#[test]
fn ancilla_fault_spreads_to_one_data_qubit() {
    let cd = code(3);
    // X-type gauge generator X_{0,0} X_{1,0}
    let c = build_gauge_meas(&cd, 0, 9).unwrap();
    let first = loc_of(&c, 1, 9);
    let a = FaultAssignment::new()
        .with(first, FaultAction::Pair(Pauli1::X, Pauli1::I))
        .unwrap();
    let r = propagate(&c, &a).unwrap();
    assert_eq!(r.residual[0], PauliOp::parse_sparse(9, "X3").unwrap());
    assert!(r.outcome_flips.is_zero());
    assert!(circuit_correct(&c, &a).unwrap());
}

#[test]
fn weight_two_column_error_at_the_gate_fails() {
    let e = build_exrec(&code(3), EcMethod::Steane, &ExRecOptions::default()).unwrap();
    let c = e.circuit();
    let ctl = &c.inputs()[0];
    let gate_loc = |q: usize| {
        c.iter_ops()
            .find(|(l, _, op)| {
                op.kind == OpKind::Cnot
                    && op.qubits[0] == q
                    && e.section_of(*l).unwrap() == SectionKind::Gate
            })
            .unwrap()
            .0
    };
    let col0: Vec<usize> = (0..3).map(|i| gate_loc(ctl[i * 3])).collect();
    let z = FaultAction::Pair(Pauli1::Z, Pauli1::I);
    let mut a = FaultAssignment::new().with(col0[0], z).unwrap();
    assert!(circuit_correct(c, &a).unwrap());
    a.insert(col0[1], z).unwrap();
    assert!(!circuit_correct(c, &a).unwrap());
    a.insert(col0[2], z).unwrap();
    assert!(!circuit_correct(c, &a).unwrap());
}

#[test]
fn assignments_reject_mismatched_actions() {
    let c = build_steane_ec(&code(2)).unwrap();
    let meas = c.iter_ops().find(|(_, _, op)| op.kind.is_meas()).unwrap().0;
    let a = FaultAssignment::new()
        .with(meas, FaultAction::Single(Pauli1::X))
        .unwrap();
    assert!(propagate(&c, &a).is_err());
    let a = FaultAssignment::new()
        .with(c.num_locations(), FaultAction::Flip)
        .unwrap();
    assert!(propagate(&c, &a).is_err());
    assert!(FaultAssignment::new()
        .with(0, FaultAction::Single(Pauli1::I))
        .is_err());
    assert!(FaultAssignment::parse("3:X,3:Z").is_err());
}

#[test]
fn assignment_text_round_trips() {
    let a = FaultAssignment::parse("12:X, 40:XZ 7:F").unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(FaultAssignment::parse(&a.to_string()).unwrap(), a);
}

#[test]
fn compiled_matches_direct_on_random_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2, 3] {
        for m in EcMethod::ALL {
            let c = exrec(n, m);
            let cc = CompiledCircuit::new(&c).unwrap();
            for trial in 0..300 {
                let k = 1 + trial % 6;
                let a = random_assignment(&c, k, &mut rng);
                assert_eq!(
                    cc.evaluate_assignment(&a).unwrap(),
                    circuit_correct(&c, &a).unwrap(),
                    "n={n} {m} {a}"
                );
            }
        }
    }
}

#[test]
fn compiled_rectangle_criterion_matches_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [2, 3] {
        for m in EcMethod::ALL {
            let e = full(n, m);
            let cc = CompiledCircuit::for_exrec(&e).unwrap();
            for trial in 0..300 {
                let a = random_assignment(e.circuit(), 1 + trial % 6, &mut rng);
                assert_eq!(
                    cc.evaluate_assignment(&a).unwrap(),
                    exrec_correct(&e, &a).unwrap(),
                    "n={n} {m} {a}"
                );
            }
        }
    }
}

#[test]
fn strict_criterion_is_at_least_as_demanding() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rect = full(3, EcMethod::Steane);
    let strict = build_exrec(
        &code(3),
        EcMethod::Steane,
        &ExRecOptions {
            criterion: Criterion::Strict,
            ..ExRecOptions::default()
        },
    )
    .unwrap();
    assert!(strict.descriptor().ends_with("/strict"));
    let (cr, cs) = (
        CompiledCircuit::for_exrec(&rect).unwrap(),
        CompiledCircuit::for_exrec(&strict).unwrap(),
    );
    for _ in 0..2000 {
        let a = random_assignment(rect.circuit(), 2, &mut rng);
        let s_ok = cs.evaluate_assignment(&a).unwrap();
        // a fault set that leaves both outputs clean also leaves the rectangle clean
        if s_ok {
            assert!(cr.evaluate_assignment(&a).unwrap(), "{a}");
        }
    }
}

#[test]
fn compiled_matches_direct_on_single_gadgets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for c in [
        build_steane_ec(&code(4)).unwrap(),
        build_knill_ec(&code(4)).unwrap(),
    ] {
        let cc = CompiledCircuit::new(&c).unwrap();
        for _ in 0..200 {
            let a = random_assignment(&c, 3, &mut rng);
            assert_eq!(
                cc.evaluate_assignment(&a).unwrap(),
                circuit_correct(&c, &a).unwrap(),
                "{} {a}",
                c.sections()[0]
            );
        }
    }
}

#[test]
fn single_faults_are_benign_at_n3() {
    for m in EcMethod::ALL {
        let e = full(3, m);
        for (loc, _, op) in e.circuit().iter_ops() {
            for act in all_actions(op.kind) {
                let a = FaultAssignment::new().with(loc, act).unwrap();
                assert!(exrec_correct(&e, &a).unwrap(), "{m}: {a}");
            }
        }
    }
}

#[test]
fn reduced_prep_actions_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [3, 4] {
        for m in EcMethod::ALL {
            let c = exrec(n, m);
            let cc = CompiledCircuit::new(&c).unwrap();
            let preps: Vec<(usize, OpKind)> = c
                .iter_ops()
                .filter(|(_, _, op)| op.kind.is_prep())
                .map(|(l, _, op)| (l, op.kind))
                .collect();
            for trial in 0..400 {
                let (loc, kind) = preps[trial % preps.len()];
                let (trivial, kept) = match kind {
                    OpKind::PrepZero => (Pauli1::Z, Pauli1::X),
                    _ => (Pauli1::X, Pauli1::Z),
                };
                assert_eq!(
                    cc.actions(loc),
                    &[FaultAction::Single(kept), FaultAction::Single(trivial)]
                );
                let mut bg = random_assignment(&c, trial % 3, &mut rng);
                while bg.entries().contains_key(&loc) {
                    bg = random_assignment(&c, trial % 3, &mut rng);
                }
                let with = |p| {
                    let mut a = bg.clone();
                    a.insert(loc, FaultAction::Single(p)).unwrap();
                    circuit_correct(&c, &a).unwrap()
                };
                assert_eq!(
                    with(trivial),
                    circuit_correct(&c, &bg).unwrap(),
                    "n={n} {m} {bg} + {loc}"
                );
                assert_eq!(with(Pauli1::Y), with(kept), "n={n} {m} {bg} + {loc}");
            }
        }
    }
}

#[test]
fn found_failures_are_confirmed_by_direct_propagation() {
    let c = exrec(3, EcMethod::Steane);
    let cc = CompiledCircuit::new(&c).unwrap();
    let mut scratch = Scratch::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut found = 0;
    for _ in 0..3000 {
        let a = rng.random_range(0..c.num_locations());
        let b = rng.random_range(0..c.num_locations());
        if a == b {
            continue;
        }
        let locs = [a.min(b), a.max(b)];
        if let Some(choice) = cc.find_failure(&locs, &mut scratch) {
            let asg = cc.assignment(&locs, &choice).unwrap();
            assert!(!circuit_correct(&c, &asg).unwrap());
            found += 1;
        }
    }
    assert!(found > 0);
}

#[test]
fn round_selection_needs_a_full_run() {
    assert_eq!(select_round(&[1, 2, 2, 3], 2), 1);
    assert_eq!(select_round(&[1, 2, 2, 3], 3), 3);
    assert_eq!(select_round(&[1, 2, 2, 2, 3], 3), 1);
    assert_eq!(select_round(&[4], 3), 0);
    assert_eq!(select_round(&[1, 2], 1), 0);
}

#[test]
fn compiled_matches_direct_on_distance_five_gauge() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let e = full(5, EcMethod::Gauge);
    assert!(e.descriptor().contains("rounds=7/agree=3"));
    let cc = CompiledCircuit::for_exrec(&e).unwrap();
    for trial in 0..60 {
        let a = random_assignment(e.circuit(), 2 + trial % 4, &mut rng);
        assert_eq!(
            cc.evaluate_assignment(&a).unwrap(),
            exrec_correct(&e, &a).unwrap(),
            "{a}"
        );
    }
}

#[test]
fn frames_compose_linearly_without_classical_nodes() {
    let cd = code(3);
    let circuits = [
        build_gauge_meas(&cd, 2, 9).unwrap(),
        build_prep_zero_L(&cd).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for c in &circuits {
        assert!(c.nodes().is_empty());
        for _ in 0..100 {
            let both = random_assignment(c, 4, &mut rng);
            let (mut a, mut b) = (FaultAssignment::new(), FaultAssignment::new());
            for (i, (&loc, &act)) in both.entries().iter().enumerate() {
                if i % 2 == 0 {
                    a.insert(loc, act).unwrap()
                } else {
                    b.insert(loc, act).unwrap()
                }
            }
            let (ra, rb, rab) = (
                propagate(c, &a).unwrap(),
                propagate(c, &b).unwrap(),
                propagate(c, &both).unwrap(),
            );
            let mut flips = ra.outcome_flips.clone();
            flips.xor_assign(&rb.outcome_flips);
            assert_eq!(flips, rab.outcome_flips);
            for k in 0..rab.residual.len() {
                assert_eq!(
                    ra.residual[k].multiply(&rb.residual[k]).unwrap(),
                    rab.residual[k]
                );
            }
        }
    }
}
