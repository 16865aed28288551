use std::f64::consts::FRAC_PI_2;

use gauge_circuits::ansatz::{self, AnsatzSpec, Entanglement, HeuristicKind};
use gauge_circuits::circuit::{Angle, Circuit, Gate};
use gauge_circuits::encoding::default_layout;
use gauge_circuits::lattice::Lattice;
use gauge_circuits::model::ModelParams;
use gauge_circuits::statesim::{self, StateVector};
use gauge_circuits::{oracle, qasm};
use proptest::prelude::*;

fn chain_spec(sites: usize) -> AnsatzSpec {
    let lat = Lattice::with_default_boundary(1, &[sites]).unwrap();
    let p = ModelParams::standard(1, 0.0);
    let layout = default_layout(&lat, p.trunc);
    ansatz::build_1d_ansatz(&lat, &layout, p.trunc).unwrap()
}

/// Hand-written three-parameter circuit for two sites, gate for gate,
/// without the two vacuum-preparing X gates. Each commuting hop string gets
/// its own basis change and CNOT ladder.
fn hand_written(l0: f64, l1: f64, t0: f64) -> Circuit {
    let f = Angle::fixed;
    let s = 3f64.sqrt() / 3.0;
    let mut c = Circuit::new(5);
    let ladder = |c: &mut Circuit, a: f64| {
        for g in [
            Gate::Cnot(1, 2),
            Gate::Cnot(2, 4),
            Gate::Rz(4, f(a)),
            Gate::Cnot(2, 4),
            Gate::Cnot(1, 2),
        ] {
            c.push(g);
        }
    };
    let seq = |c: &mut Circuit, gates: &[Gate]| gates.iter().for_each(|g| c.push(*g));
    seq(&mut c, &[Gate::H(1), Gate::Rx(2, f(FRAC_PI_2)), Gate::Rz(3, f(l1)), Gate::Rx(4, f(FRAC_PI_2))]);
    ladder(&mut c, -s * t0);
    seq(&mut c, &[Gate::Rx(2, f(-FRAC_PI_2)), Gate::Rx(4, f(-FRAC_PI_2)), Gate::H(4), Gate::H(2)]);
    ladder(&mut c, -s * t0);
    seq(&mut c, &[Gate::H(1), Gate::H(2), Gate::Rx(1, f(FRAC_PI_2)), Gate::Rx(2, f(FRAC_PI_2))]);
    ladder(&mut c, -s * t0);
    seq(&mut c, &[Gate::H(4), Gate::Rx(2, f(-FRAC_PI_2)), Gate::H(2), Gate::Rx(4, f(FRAC_PI_2))]);
    ladder(&mut c, s * t0);
    seq(&mut c, &[Gate::Rx(1, f(-FRAC_PI_2)), Gate::Rz(1, f(l0)), Gate::H(2), Gate::Rx(4, f(-FRAC_PI_2))]);
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compiled_chain_equals_exponential(theta in prop::collection::vec(-3.2f64..3.2, 3)) {
        let spec = chain_spec(2);
        let c = ansatz::compile(&spec, &theta).unwrap();
        let err = oracle::phase_distance(&statesim::circuit_unitary(&c).unwrap(), &oracle::ansatz_unitary(&spec, &theta).unwrap());
        prop_assert!(err < 1e-9, "{err}");
        let v = StateVector::zero_state(5).unwrap();
        let by_gates = statesim::apply_circuit(&c, &v).unwrap();
        let by_rotations = spec.apply(&theta, &v).unwrap();
        prop_assert!((by_gates.overlap(&by_rotations) - 1.0).abs() < 1e-10);
    }

    /// Mass angles enter the hand-written circuit with the opposite sign.
    #[test]
    fn hand_written_circuit_matches_up_to_mass_sign(l0 in -3.0f64..3.0, l1 in -3.0f64..3.0, t0 in -3.0f64..3.0) {
        let spec = chain_spec(2);
        let ours = statesim::circuit_unitary(&ansatz::compile(&spec, &[t0, -l0, -l1]).unwrap()).unwrap();
        let theirs = statesim::circuit_unitary(&hand_written(l0, l1, t0)).unwrap();
        prop_assert!(oracle::phase_distance(&ours, &theirs) < 1e-9);
    }

    #[test]
    fn qasm_round_trip(theta in prop::collection::vec(-10.0f64..10.0, 5)) {
        let c = ansatz::compile(&chain_spec(3), &theta).unwrap();
        let back = qasm::parse_qasm(&qasm::to_qasm(&c)).unwrap();
        prop_assert_eq!(back.bound_gates(), c.bound_gates());
    }
}

#[test]
fn resource_counts() {
    let two = ansatz::compile(&chain_spec(2), &[0.1, 0.2, 0.3]).unwrap();
    assert_eq!((two.cnot_count(), two.n_params(), two.n_qubits), (16, 3, 5));
    // The corner qubits of the outer spinor components never entangle.
    assert_eq!(two.entangled_qubits(), vec![1, 2, 4]);
    let three = ansatz::compile(&chain_spec(3), &[0.1; 5]).unwrap();
    assert_eq!((three.cnot_count(), three.n_params()), (32, 5));
    let one = chain_spec(1);
    assert_eq!(one.n_params(), 1);
    assert_eq!(ansatz::compile(&one, &[0.4]).unwrap().cnot_count(), 0);
}

#[test]
fn heuristic_shapes() {
    assert_eq!(ansatz::build_heuristic(HeuristicKind::Ry, 5, 1, Entanglement::Full).n_params(), 10);
    assert_eq!(ansatz::build_heuristic(HeuristicKind::Ryrz, 5, 1, Entanglement::Full).n_params(), 20);
    let flat = ansatz::build_heuristic(HeuristicKind::Ry, 5, 0, Entanglement::Full);
    assert_eq!(ansatz::compile(&flat, &vec![0.2; flat.n_params()]).unwrap().cnot_count(), 0);
}

#[test]
fn zero_angles_leave_the_vacuum() {
    let lat = Lattice::with_default_boundary(1, &[2]).unwrap();
    let p = ModelParams::standard(1, 0.0);
    let layout = default_layout(&lat, p.trunc);
    let vac = statesim::bare_vacuum(&lat, &layout, p.trunc).unwrap();
    // X on fermionic qubits 0 and 2.
    assert_eq!(vac, StateVector::basis(5, 0b00101).unwrap());
    let out = statesim::apply_circuit(&hand_written(0.0, 0.0, 0.0), &vac).unwrap();
    assert!((out.overlap(&vac) - 1.0).abs() < 1e-12);
}
