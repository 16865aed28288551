use gauge_circuits::ansatz;
use gauge_circuits::dynamics::{self, DynamicsSetup};
use gauge_circuits::encoding::{default_layout, QubitLayout};
use gauge_circuits::lattice::Lattice;
use gauge_circuits::model::{self, HamiltonianSet, ModelParams};
use gauge_circuits::oracle::{self, PhysicalSubspace};
use gauge_circuits::statesim::{self, Grouping, ShotPlan, StateVector};
use gauge_circuits::vqe::{self, EnergyMode, OptimizerConfig, VqeProblem};
use gauge_circuits::C64;
use proptest::prelude::*;

struct Chain {
    lat: Lattice,
    layout: QubitLayout,
    params: ModelParams,
    hs: HamiltonianSet,
    phys: PhysicalSubspace,
}

fn chain(m: f64) -> Chain {
    let lat = Lattice::with_default_boundary(1, &[2]).unwrap();
    let params = ModelParams::standard(1, m);
    let layout = default_layout(&lat, params.trunc);
    let hs = model::build_hamiltonian(&lat, &layout, &params).unwrap();
    let phys = oracle::physical_projector(&hs.gauss, layout.total_qubits).unwrap();
    Chain {
        lat,
        layout,
        params,
        hs,
        phys,
    }
}

fn number(c: &Chain) -> gauge_circuits::pauli::PauliSum {
    model::particle_number(&c.lat, &c.layout).unwrap()
}

fn problem(c: &Chain) -> VqeProblem {
    let ansatz = ansatz::build_1d_ansatz(&c.lat, &c.layout, c.params.trunc).unwrap();
    VqeProblem {
        hamiltonian: c.hs.total.clone(),
        ansatz,
        initial: statesim::bare_vacuum(&c.lat, &c.layout, c.params.trunc).unwrap(),
        number: number(c),
        links: vec![model::link_flux_observable(0, &c.layout, c.params.trunc).unwrap()],
        physical: c.phys.clone(),
    }
}

#[test]
fn ground_state_phases() {
    for (m, lo, hi) in [(6.0, 0.0, 0.1), (0.0, 1.9, 2.0 + 1e-9)] {
        let c = chain(m);
        let (e, psi) = oracle::physical_ground_state(&c.hs.total, &c.phys).unwrap();
        let n = statesim::expectation(&number(&c), &psi).unwrap();
        assert!(n > lo && n < hi, "m={m}: N={n}");
        assert!((statesim::expectation(&c.hs.total, &psi).unwrap() - e).abs() < 1e-10);
    }
}

#[test]
fn string_phase_without_hopping() {
    let c = chain(6.0);
    let h = &(&c.hs.mass + &c.hs.wilson_shift) + &c.hs.electric;
    let (_, psi) = oracle::physical_ground_state(&h, &c.phys).unwrap();
    assert!(statesim::expectation(&number(&c), &psi).unwrap().abs() < 1e-12);
}

#[test]
fn number_on_reference_states() {
    let c = chain(0.0);
    let n = number(&c);
    let vac = statesim::bare_vacuum(&c.lat, &c.layout, c.params.trunc).unwrap();
    assert!(statesim::expectation(&n, &vac).unwrap().abs() < 1e-12);
    let flux = model::link_flux_observable(0, &c.layout, c.params.trunc).unwrap();
    assert!((statesim::expectation(&flux, &vac).unwrap() - 1.0).abs() < 1e-12);
    let pair = statesim::pair_state(&c.lat, &c.layout, c.params.trunc, 0).unwrap();
    assert!((statesim::expectation(&n, &pair).unwrap() - 2.0).abs() < 1e-12);
    assert!((n.trace_per_dim().re - 2.0).abs() < 1e-12);
}

#[test]
fn full_register_agrees_with_physical_restriction() {
    let c = chain(2.0);
    let (e_phys, _) = oracle::physical_ground_state(&c.hs.total, &c.phys).unwrap();
    let (e_full, _) = oracle::ground_state(&c.hs.total).unwrap();
    assert!((e_full - e_phys).abs() < 1e-9);
    let (e_lanczos, _) = oracle::lanczos_ground(&c.hs.total.to_sparse().unwrap(), 3).unwrap();
    assert!((e_lanczos - e_phys).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trial_energy_is_bounded_by_ground(theta in prop::collection::vec(-3.2f64..3.2, 3), m in 0.0f64..6.0) {
        let c = chain(m);
        let p = problem(&c);
        let e = p.energy_fn(EnergyMode::Exact)(&theta);
        let (e0, _) = oracle::physical_ground_state(&c.hs.total, &c.phys).unwrap();
        prop_assert!(e >= e0 - 1e-9);
    }
}

#[test]
fn structured_vqe_tracks_the_string_phase() {
    let c = chain(6.0);
    let cfg = OptimizerConfig {
        restarts: 3,
        max_iters: 600,
        ..Default::default()
    };
    let r = problem(&c).run(EnergyMode::Exact, &cfg).unwrap();
    assert!(r.relative_error < 1e-3, "{}", r.relative_error);
    assert!(r.number < 0.1);
}

#[test]
fn empty_mass_list_gives_empty_sweep() {
    let rows = vqe::mass_sweep(|m| Ok(problem(&chain(m))), &[], EnergyMode::Exact, &OptimizerConfig::default()).unwrap();
    assert!(rows.is_empty());
}

#[test]
fn shot_noise_scales_as_inverse_root() {
    let c = chain(0.0);
    let idx = oracle::physical_configurations(&c.hs.gauss, c.layout.total_qubits).unwrap();
    let mut amps = vec![C64::default(); 32];
    for i in idx {
        amps[i] = C64::new(1.0, 0.0);
    }
    let s = StateVector::from_amplitudes(amps).unwrap();
    let sd = |shots| {
        let plan = ShotPlan {
            shots,
            grouping: Grouping::PerTerm,
            seed: 4,
        };
        statesim::sampled_expectation(&c.hs.penalty, &s, &plan).unwrap()
    };
    let (a, b) = (sd(100), sd(10_000));
    let ratio = a.stddev / b.stddev;
    assert!((ratio - 10.0).abs() < 2.0, "{ratio}");
    assert!(b.mean.abs() < 3.0 * b.stddev);
    // Grouped measurement of a diagonal operator on an eigenstate has no spread.
    let vac = statesim::bare_vacuum(&c.lat, &c.layout, c.params.trunc).unwrap();
    let plan = ShotPlan {
        shots: 50,
        grouping: Grouping::Grouped,
        seed: 1,
    };
    let e = statesim::sampled_expectation(&c.hs.penalty, &vac, &plan).unwrap();
    assert_eq!((e.mean, e.stddev), (0.0, 0.0));
}

#[test]
fn evolution_conserves_energy_and_gauss() {
    let c = chain(1.0);
    let psi0 = statesim::bare_vacuum(&c.lat, &c.layout, c.params.trunc).unwrap();
    let times: Vec<f64> = (0..20).map(|k| 0.25 * k as f64).collect();
    let states = oracle::evolve(&c.hs.total, &psi0, &times).unwrap();
    assert!((states[0].overlap(&psi0) - 1.0).abs() < 1e-12);
    let e0 = statesim::expectation(&c.hs.total, &psi0).unwrap();
    for s in &states {
        assert!((statesim::expectation(&c.hs.total, s).unwrap() - e0).abs() < 1e-9);
        assert!(statesim::gauge_violation(&c.hs.gauss, s).unwrap() < 1e-9);
    }
    let n = number(&c);
    let ns: Vec<f64> = states.iter().map(|s| statesim::expectation(&n, s).unwrap()).collect();
    assert!(ns.iter().copied().fold(0.0, f64::max) > 0.1, "pairs are produced");
}

#[test]
fn overlap_with_the_initial_state_is_one() {
    let c = chain(1.0);
    let spec = ansatz::build_1d_ansatz(&c.lat, &c.layout, c.params.trunc).unwrap();
    let vac = statesim::bare_vacuum(&c.lat, &c.layout, c.params.trunc).unwrap();
    let cfg = OptimizerConfig {
        restarts: 1,
        max_iters: 50,
        ..Default::default()
    };
    let (theta, ov) = dynamics::overlap_maximize(&spec, &vac, &vac, &cfg, Some(&[0.0; 3])).unwrap();
    assert!((ov - 1.0).abs() < 1e-12 && theta.len() == 3);
    // Outside the reachable family the best overlap stays below one.
    let bad = StateVector::basis(5, 0).unwrap();
    let (_, ov) = dynamics::overlap_maximize(&spec, &vac, &bad, &cfg, None).unwrap();
    assert!(ov < 1.0);
}

#[test]
fn three_site_labels() {
    let params = ModelParams {
        g: 3.0,
        ..ModelParams::standard(1, 1.0)
    };
    let setup = DynamicsSetup::chain(3, params).unwrap();
    let probs =
        dynamics::configuration_probabilities(&setup.initial, &setup.lattice, &setup.layout, setup.params.trunc).unwrap();
    assert_eq!(probs.len(), 1);
    assert_eq!(probs.keys().next().unwrap(), "o→o→o");
    let t = [0.0, 0.7, 1.9];
    for s in oracle::evolve(&setup.hamiltonian, &setup.initial, &t).unwrap() {
        let p = dynamics::configuration_probabilities(&s, &setup.lattice, &setup.layout, setup.params.trunc).unwrap();
        assert!((p.values().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn zero_length_run_is_one_row() {
    let params = ModelParams {
        g: 3.0,
        ..ModelParams::standard(1, 1.0)
    };
    let setup = DynamicsSetup::chain(2, params).unwrap();
    let spec = ansatz::build_1d_ansatz(&setup.lattice, &setup.layout, setup.params.trunc).unwrap();
    let run = dynamics::representability_run(&setup, &spec, 0.0, 0.1, &OptimizerConfig::default()).unwrap();
    assert_eq!(run.rows.len(), 1);
    assert!((run.rows[0].overlap - 1.0).abs() < 1e-9);
}

#[test]
fn critical_mass_formula() {
    let p = |g| ModelParams {
        g,
        ..ModelParams::standard(1, 0.0)
    };
    assert_eq!(model::critical_mass(&p(4.0), 1, 1), 3.0);
    assert_eq!(model::critical_mass(&p(3.0), 2, 1), 3.5);
    assert_eq!(model::critical_mass(&p(2.0), 1, 1), 0.0);
}
