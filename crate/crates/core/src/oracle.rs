//! Exact references: eigensolvers, the physical subspace, and time evolution.
//!
//! Registers up to [`DENSE_LIMIT`] qubits are diagonalized densely; larger
//! registers up to [`pauli::MAX_MATRIX_QUBITS`] use Lanczos iteration with
//! full re-orthogonalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{self, PauliSum};
use crate::sparse::CsrMatrix;
use crate::statesim::StateVector;
use crate::C64;

/// Largest register diagonalized densely.
pub const DENSE_LIMIT: usize = 10;
/// Eigenvalues of `sum G^2` below this count as zero.
pub const KERNEL_TOL: f64 = 1e-9;
/// Residual tolerance of the Lanczos solver.
pub const LANCZOS_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

fn guard(n: usize) -> Result<()> {
    if n > pauli::MAX_MATRIX_QUBITS {
        Err(Error::TooLarge {
            n,
            max: pauli::MAX_MATRIX_QUBITS,
        })
    } else {
        Ok(())
    }
}

/// Rotates `v` so its largest-magnitude entry (lowest index on ties) is real positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    for (i, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let a = v[best];
    if a.norm() > 0.0 {
        let ph = a.conj() / a.norm();
        v.iter_mut().for_each(|x| *x *= ph);
    }
}

/// Eigen-decomposition with ascending eigenvalues.
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: DMatrix<C64>,
}

/// Dense Hermitian eigen-decomposition, sorted ascending.
pub fn eigh(m: DMatrix<C64>) -> Spectrum {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k)).collect::<Vec<_>>());
    Spectrum { values, vectors }
}

/// `exp(i t M)` for a Hermitian dense matrix.
pub fn expm_i(m: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let s = eigh(m.clone());
    let d = DVector::from_iterator(s.values.len(), s.values.iter().map(|&e| C64::from_polar(1.0, t * e)));
    &s.vectors * DMatrix::from_diagonal(&d) * s.vectors.adjoint()
}

/// Dense product of `exp(i theta_k G_k)` over the factors, first factor rightmost.
pub fn ansatz_unitary(spec: &crate::ansatz::AnsatzSpec, params: &[f64]) -> Result<DMatrix<C64>> {
    if spec.n_qubits > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n: spec.n_qubits,
            max: DENSE_LIMIT,
        });
    }
    if params.len() != spec.n_params() {
        return Err(Error::ParamLength {
            got: params.len(),
            expected: spec.n_params(),
        });
    }
    let mut u = DMatrix::<C64>::identity(1 << spec.n_qubits, 1 << spec.n_qubits);
    for f in &spec.factors {
        u = expm_i(&f.exponent(params).to_dense()?, 1.0) * u;
    }
    Ok(u)
}

/// `min_phi max_ij |a_ij - e^{i phi} b_ij|`, with `phi` from the trace overlap.
pub fn phase_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let tr: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let ph = if tr.norm() > 0.0 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x - ph * y).norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the joint Gauss kernel.
#[derive(Clone, Debug)]
pub enum PhysicalSubspace {
    /// Spanned by computational basis states (diagonal Gauss operators).
    Basis { n_qubits: usize, indices: Vec<usize> },
    /// General orthonormal columns.
    Dense { n_qubits: usize, vectors: DMatrix<C64> },
}

impl PhysicalSubspace {
    pub fn dim(&self) -> usize {
        match self {
            Self::Basis { indices, .. } => indices.len(),
            Self::Dense { vectors, .. } => vectors.ncols(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::Basis { n_qubits, .. } | Self::Dense { n_qubits, .. } => *n_qubits,
        }
    }

    /// Basis vectors as states.
    pub fn states(&self) -> Vec<StateVector> {
        match self {
            Self::Basis { n_qubits, indices } => indices
                .iter()
                .map(|&i| StateVector::basis(*n_qubits, i as u64).expect("index in range"))
                .collect(),
            Self::Dense { vectors, .. } => vectors
                .column_iter()
                .map(|c| StateVector::from_amplitudes(c.iter().copied().collect()).expect("unit column"))
                .collect(),
        }
    }

    /// `P^dagger H P`.
    pub fn restrict(&self, h: &PauliSum) -> Result<DMatrix<C64>> {
        match self {
            Self::Basis { indices, .. } => Ok(h.to_sparse()?.restrict(indices)),
            Self::Dense { vectors, .. } => {
                let sp = h.to_sparse()?;
                let hv = DMatrix::from_columns(
                    &vectors
                        .column_iter()
                        .map(|c| DVector::from_vec(sp.matvec(c.as_slice())))
                        .collect::<Vec<_>>(),
                );
                Ok(vectors.adjoint() * hv)
            }
        }
    }

    /// Embeds subspace coordinates into the full register.
    pub fn embed(&self, coords: &[C64]) -> Result<StateVector> {
        let dim = 1usize << self.n_qubits();
        let amps = match self {
            Self::Basis { indices, .. } => {
                let mut a = vec![C64::default(); dim];
                for (&i, &c) in indices.iter().zip(coords) {
                    a[i] = c;
                }
                a
            }
            Self::Dense { vectors, .. } => (vectors * DVector::from_column_slice(coords)).as_slice().to_vec(),
        };
        StateVector::from_amplitudes(amps)
    }

    /// Squared norm of the projection of `s` onto the subspace.
    pub fn weight(&self, s: &StateVector) -> f64 {
        match self {
            Self::Basis { indices, .. } => indices.iter().map(|&i| s.amplitudes()[i].norm_sqr()).sum(),
            Self::Dense { vectors, .. } => {
                let v = DVector::from_column_slice(s.amplitudes());
                (vectors.adjoint() * v).norm_squared()
            }
        }
    }
}

/// Kernel of `sum_x G_x^2`.
pub fn physical_projector(gauss: &[PauliSum], n_qubits: usize) -> Result<PhysicalSubspace> {
    guard(n_qubits)?;
    let mut g2 = PauliSum::zero(n_qubits);
    for g in gauss {
        if g.n_qubits() != n_qubits {
            return Err(Error::SizeMismatch {
                left: n_qubits,
                right: g.n_qubits(),
            });
        }
        g2 += &(g * g);
    }
    if g2.is_diagonal() {
        let diag = g2.diagonal()?;
        let indices = (0..diag.len()).filter(|&i| diag[i].re.abs() < KERNEL_TOL).collect();
        return Ok(PhysicalSubspace::Basis { n_qubits, indices });
    }
    if n_qubits > pauli::MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            n: n_qubits,
            max: pauli::MAX_DENSE_QUBITS,
        });
    }
    let s = eigh(g2.to_dense()?);
    let keep: Vec<usize> = (0..s.values.len()).filter(|&k| s.values[k] < KERNEL_TOL).collect();
    let cols: Vec<_> = keep.iter().map(|&k| s.vectors.column(k).into_owned()).collect();
    let vectors = if cols.is_empty() {
        DMatrix::zeros(1usize << n_qubits, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(PhysicalSubspace::Dense { n_qubits, vectors })
}

/// Basis indices in the joint kernel of diagonal Gauss operators.
///
/// Unlike [`physical_projector`] this never builds a matrix, so it reaches
/// registers up to 24 qubits.
pub fn physical_configurations(gauss: &[PauliSum], n_qubits: usize) -> Result<Vec<usize>> {
    let mut g2 = PauliSum::zero(n_qubits);
    for g in gauss {
        if g.n_qubits() != n_qubits {
            return Err(Error::SizeMismatch {
                left: n_qubits,
                right: g.n_qubits(),
            });
        }
        g2 += &(g * g);
    }
    let diag = g2.diagonal()?;
    Ok((0..diag.len()).filter(|&i| diag[i].re.abs() < KERNEL_TOL).collect())
}

/// Lowest eigenpair of `h`.
pub fn ground_state(h: &PauliSum) -> Result<(f64, StateVector)> {
    ground_state_in(h, None)
}

/// Lowest eigenpair; within a degenerate ground space the vector with the
/// largest weight on `physical` is returned.
pub fn ground_state_in(h: &PauliSum, physical: Option<&PhysicalSubspace>) -> Result<(f64, StateVector)> {
    let n = h.n_qubits();
    guard(n)?;
    h.ensure_hermitian(1e-10)?;
    if n <= DENSE_LIMIT {
        let s = eigh(h.to_dense()?);
        let e0 = s.values[0];
        let deg: Vec<usize> = (0..s.values.len()).take_while(|&k| s.values[k] - e0 < DEGENERACY_TOL).collect();
        let mut v: Vec<C64> = match (physical, deg.len()) {
            (Some(p), d) if d > 1 => best_physical(&s.vectors, &deg, p),
            _ => s.vectors.column(0).iter().copied().collect(),
        };
        fix_phase(&mut v);
        return Ok((e0, StateVector::from_amplitudes(v)?));
    }
    let (e0, mut v) = lanczos_ground(&h.to_sparse()?, 0x5eed)?;
    fix_phase(&mut v);
    Ok((e0, StateVector::from_amplitudes(v)?))
}

/// Projects the physical subspace onto the degenerate block and returns the
/// dominant direction.
fn best_physical(vecs: &DMatrix<C64>, deg: &[usize], p: &PhysicalSubspace) -> Vec<C64> {
    let block = DMatrix::from_columns(&deg.iter().map(|&k| vecs.column(k)).collect::<Vec<_>>());
    let states = p.states();
    let mut gram = DMatrix::<C64>::zeros(deg.len(), deg.len());
    for s in &states {
        let o = block.adjoint() * DVector::from_column_slice(s.amplitudes());
        gram += &o * o.adjoint();
    }
    let sp = eigh(gram);
    let top = sp.vectors.column(deg.len() - 1);
    (block * top).as_slice().to_vec()
}

/// Spectrum of `h` restricted to the physical subspace, with full-register vectors.
pub struct PhysicalSpectrum {
    pub values: Vec<f64>,
    pub coords: DMatrix<C64>,
}

pub fn physical_spectrum(h: &PauliSum, p: &PhysicalSubspace) -> Result<PhysicalSpectrum> {
    h.ensure_hermitian(1e-10)?;
    let s = eigh(p.restrict(h)?);
    Ok(PhysicalSpectrum {
        values: s.values,
        coords: s.vectors,
    })
}

/// Ground state of `h` inside the physical subspace.
pub fn physical_ground_state(h: &PauliSum, p: &PhysicalSubspace) -> Result<(f64, StateVector)> {
    if p.dim() == 0 {
        return Err(Error::InvalidParam("physical subspace is empty".into()));
    }
    let s = physical_spectrum(h, p)?;
    let mut v = p.embed(s.coords.column(0).as_slice())?.into_amplitudes();
    fix_phase(&mut v);
    Ok((s.values[0], StateVector::from_amplitudes(v)?))
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

/// Lanczos basis and tridiagonal coefficients started from `v0`.
struct Krylov {
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn krylov(a: &CsrMatrix, v0: &[C64], max_dim: usize) -> Krylov {
    let mut v = v0.to_vec();
    normalize(&mut v);
    let mut basis = vec![v];
    let mut alpha = vec![];
    let mut beta = vec![];
    loop {
        let k = basis.len() - 1;
        let mut w = a.matvec(&basis[k]);
        let ak = dot(&basis[k], &w).re;
        alpha.push(ak);
        // Full re-orthogonalization, twice for stability.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(&mut w, -c, b);
            }
        }
        let bk = normalize(&mut w);
        beta.push(bk);
        if basis.len() >= max_dim || bk < 1e-13 {
            break;
        }
        basis.push(w);
    }
    Krylov { basis, alpha, beta }
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<C64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = C64::new(alpha[i], 0.0);
        if i + 1 < m {
            t[(i, i + 1)] = C64::new(beta[i], 0.0);
            t[(i + 1, i)] = C64::new(beta[i], 0.0);
        }
    }
    t
}

fn combine(basis: &[Vec<C64>], coeffs: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); basis[0].len()];
    for (b, &c) in basis.iter().zip(coeffs) {
        axpy(&mut out, c, b);
    }
    out
}

/// Lowest eigenpair by restarted Lanczos with full re-orthogonalization.
pub fn lanczos_ground(a: &CsrMatrix, seed: u64) -> Result<(f64, Vec<C64>)> {
    let dim = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let max_dim = dim.min(160);
    for _ in 0..50 {
        let k = krylov(a, &v, max_dim);
        let s = eigh(tridiagonal(&k.alpha, &k.beta));
        let coeffs: Vec<C64> = s.vectors.column(0).iter().copied().collect();
        let mut x = combine(&k.basis, &coeffs);
        normalize(&mut x);
        let e = s.values[0];
        let ax = a.matvec(&x);
        let res: f64 = ax.iter().zip(&x).map(|(p, q)| (p - e * q).norm_sqr()).sum::<f64>().sqrt();
        if res < LANCZOS_TOL * e.abs().max(1.0) || k.basis.len() == dim {
            return Ok((e, x));
        }
        v = x;
    }
    Err(Error::InvalidParam("Lanczos did not converge".into()))
}

/// `exp(-i H t) psi0` at each requested time.
///
/// Dense spectral decomposition up to [`DENSE_LIMIT`] qubits, short-time
/// Krylov propagation beyond.
pub fn evolve(h: &PauliSum, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    let n = h.n_qubits();
    guard(n)?;
    h.ensure_hermitian(1e-10)?;
    if psi0.n_qubits() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: psi0.n_qubits(),
        });
    }
    if n <= DENSE_LIMIT {
        let s = eigh(h.to_dense()?);
        let c = s.vectors.adjoint() * DVector::from_column_slice(psi0.amplitudes());
        return times
            .iter()
            .map(|&t| {
                let ct = DVector::from_iterator(
                    c.len(),
                    c.iter().zip(&s.values).map(|(a, &e)| a * C64::from_polar(1.0, -e * t)),
                );
                StateVector::from_amplitudes((&s.vectors * ct).as_slice().to_vec())
            })
            .collect();
    }
    let a = h.to_sparse()?;
    let mut out = Vec::with_capacity(times.len());
    let mut t_now = 0.0;
    let mut v = psi0.amplitudes().to_vec();
    for &t in times {
        let mut remaining = t - t_now;
        while remaining.abs() > 0.0 {
            let mut dt = remaining;
            loop {
                let k = krylov(&a, &v, 40);
                let s = eigh(tridiagonal(&k.alpha, &k.beta));
                let m = k.alpha.len();
                let coeffs: Vec<C64> = (0..m)
                    .map(|i| {
                        (0..m)
                            .map(|j| s.vectors[(i, j)] * C64::from_polar(1.0, -s.values[j] * dt) * s.vectors[(0, j)].conj())
                            .sum()
                    })
                    .collect();
                let err = k.beta.last().copied().unwrap_or(0.0) * coeffs[m - 1].norm();
                if err < 1e-13 || m == a.dim() || k.beta.last().copied().unwrap_or(0.0) < 1e-13 {
                    let norm = normalize(&mut v.clone());
                    v = combine(&k.basis, &coeffs).into_iter().map(|x| x * norm).collect();
                    break;
                }
                dt /= 2.0;
            }
            remaining -= dt;
            t_now += dt;
        }
        out.push(StateVector::from_amplitudes(v.clone())?);
    }
    Ok(out)
}
