//! Hot kernels on one worker against the full pool.
//!
//! `cargo bench -p gauge-circuits` compares pool sizes; adding
//! `--no-default-features` measures the rayon-free build.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gauge_circuits::ansatz;
use gauge_circuits::encoding::default_layout;
use gauge_circuits::lattice::Lattice;
use gauge_circuits::model::{self, HamiltonianSet, ModelParams};
use gauge_circuits::oracle;
use gauge_circuits::par;
use gauge_circuits::pauli::PauliOperator;
use gauge_circuits::sparse::CsrMatrix;
use gauge_circuits::statesim::{self, Grouping, ShotPlan, StateVector};
use gauge_circuits::vqe::{self, EnergyMode, Method, OptimizerConfig, VqeProblem};

const POOLS: [(&str, Option<usize>); 2] = [("one", Some(1)), ("all", None)];

fn plaquette() -> (HamiltonianSet, StateVector) {
    let lat = Lattice::with_default_boundary(2, &[2, 2]).unwrap();
    let p = ModelParams::standard(2, 1.0);
    let layout = default_layout(&lat, p.trunc);
    let hs = model::build_hamiltonian(&lat, &layout, &p).unwrap();
    let spec = ansatz::build_2d_ansatz(&lat, &layout, p.trunc).unwrap();
    let vac = statesim::bare_vacuum(&lat, &layout, p.trunc).unwrap();
    let theta: Vec<f64> = (0..spec.n_params()).map(|k| 0.2 + 0.1 * k as f64).collect();
    let psi = spec.apply(&theta, &vac).unwrap();
    (hs, psi)
}

fn chain_problem() -> VqeProblem {
    let lat = Lattice::with_default_boundary(1, &[2]).unwrap();
    let p = ModelParams::standard(1, 1.0);
    let layout = default_layout(&lat, p.trunc);
    let hs = model::build_hamiltonian(&lat, &layout, &p).unwrap();
    VqeProblem {
        hamiltonian: hs.total.clone(),
        ansatz: ansatz::build_1d_ansatz(&lat, &layout, p.trunc).unwrap(),
        initial: statesim::bare_vacuum(&lat, &layout, p.trunc).unwrap(),
        number: model::particle_number(&lat, &layout).unwrap(),
        links: vec![],
        physical: oracle::physical_projector(&hs.gauss, layout.total_qubits).unwrap(),
    }
}

fn kernels(c: &mut Criterion) {
    let (hs, psi) = plaquette();
    let op = PauliOperator::new(&hs.total);
    let csr = CsrMatrix::from_pauli(&op);
    let amps = psi.amplitudes();

    let mut g = c.benchmark_group("matvec_12q");
    for (name, w) in POOLS {
        g.bench_with_input(BenchmarkId::new("pauli", name), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || black_box(op.apply(amps))))
        });
        g.bench_with_input(BenchmarkId::new("csr", name), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || black_box(csr.matvec(amps))))
        });
        g.bench_with_input(BenchmarkId::new("csr_expectation", name), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || black_box(csr.expectation(amps))))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("sampling_penalty_12q");
    g.sample_size(10);
    let plan = ShotPlan {
        shots: 1000,
        grouping: Grouping::PerTerm,
        seed: 1,
    };
    for (name, w) in POOLS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || black_box(statesim::sampled_expectation(&hs.penalty, &psi, &plan).unwrap())))
        });
    }
    g.finish();

    let problem = chain_problem();
    let energy = problem.energy_fn(EnergyMode::Exact);
    let cfg = OptimizerConfig {
        method: Method::Simplex,
        max_iters: 200,
        restarts: 8,
        ..Default::default()
    };
    let mut g = c.benchmark_group("vqe_restarts");
    g.sample_size(10);
    for (name, w) in POOLS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || black_box(vqe::minimize(&energy, 3, &cfg).unwrap())))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
