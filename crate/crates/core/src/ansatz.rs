//! Gauge-invariant variational forms and their compilation to gates.
//!
//! An [`AnsatzSpec`] is an ordered list of factors `exp(i theta_p G)` with
//! Hermitian generators `G`. Factors are stored in application order: factor
//! 0 acts on the initial state first.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Gate};
use crate::encoding::{jw_annihilation, link_operators, QubitLayout, SpinTruncation};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Step};
use crate::model::link_flux_observable;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::statesim::StateVector;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    MassLike,
    HopLeft,
    HopRight,
    FluxLeft,
    FluxRight,
    StringLike,
    LoopLike,
    /// Symmetrized product of two Hermitized strings with shared endpoints.
    StringProduct,
    /// Single-qubit rotation of a heuristic form.
    Rotation,
    /// Fixed CNOT of a heuristic form.
    Entangler,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Location {
    Site(usize),
    Link(usize),
    Path(Vec<Step>),
    Loop(Vec<Step>),
    PathPair(Vec<Step>, Vec<Step>),
    Qubit(usize),
    Qubits(usize, usize),
    Unspecified,
}

/// Spinor coupling matrix `A` or scalar `Lambda` at unit parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    Matrix([[C64; 2]; 2]),
    Scalar(f64),
}

impl Coupling {
    /// `((0,0),(1,0))`: lower component at the first site, upper at the second.
    pub fn lower_to_upper() -> Self {
        let z = C64::new(0.0, 0.0);
        Coupling::Matrix([[z, z], [C64::new(1.0, 0.0), z]])
    }

    /// `((0,0),(0,1))`: lower-component occupation.
    pub fn lower_diagonal() -> Self {
        let z = C64::new(0.0, 0.0);
        Coupling::Matrix([[z, z], [z, C64::new(1.0, 0.0)]])
    }
}

/// One factor `exp(i theta G)`, or `exp(i G)` when no parameter is attached.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorTerm {
    pub kind: GeneratorKind,
    pub location: Location,
    pub coupling: Coupling,
    pub param: Option<usize>,
    generator: PauliSum,
}

/// Lattice context needed to build toolbox generators.
#[derive(Clone, Copy, Debug)]
pub struct Context<'a> {
    pub lat: &'a Lattice,
    pub layout: &'a QubitLayout,
    pub trunc: SpinTruncation,
}

impl<'a> Context<'a> {
    pub fn new(lat: &'a Lattice, layout: &'a QubitLayout, trunc: SpinTruncation) -> Self {
        Self { lat, layout, trunc }
    }

    fn n(&self) -> usize {
        self.layout.total_qubits
    }

    fn u_step(&self, s: Step) -> Result<PauliSum> {
        let u = self.layout.on_link(s.link, &link_operators(self.trunc).u)?;
        Ok(if s.forward { u } else { u.adjoint() })
    }

    /// `sum_ij A_ij a_{x,i}^dagger W a_{y,j}` with `W` acting on links only.
    fn bilinear(&self, a: &[[C64; 2]; 2], x: usize, w: &PauliSum, y: usize) -> Result<PauliSum> {
        let mut f = PauliSum::zero(self.n());
        for (i, row) in a.iter().enumerate() {
            for (j, &aij) in row.iter().enumerate() {
                if aij.norm() == 0.0 {
                    continue;
                }
                let t = &(&jw_annihilation(self.layout, x, i)?.adjoint() * w) * &jw_annihilation(self.layout, y, j)?;
                f += &t.scale(aij);
            }
        }
        Ok(f)
    }

    fn path_string(&self, a: &[[C64; 2]; 2], steps: &[Step]) -> Result<PauliSum> {
        let (start, end) = self.lat.check_path(steps)?;
        let mut w = PauliSum::identity(self.n());
        for &s in steps {
            w = &w * &self.u_step(s)?;
        }
        let f = self.bilinear(a, start, &w, end)?;
        Ok(&f + &f.adjoint())
    }
}

fn matrix(c: &Coupling) -> Result<&[[C64; 2]; 2]> {
    match c {
        Coupling::Matrix(m) => Ok(m),
        Coupling::Scalar(_) => Err(Error::InvalidParam("term needs a coupling matrix".into())),
    }
}

fn scalar(c: &Coupling) -> Result<f64> {
    match c {
        Coupling::Scalar(v) => Ok(*v),
        Coupling::Matrix(_) => Err(Error::InvalidParam("term needs a scalar coupling".into())),
    }
}

fn bad_location(kind: GeneratorKind) -> Error {
    Error::InvalidParam(format!("location does not fit a {kind:?} term"))
}

/// Builds a toolbox generator.
///
/// Mass-like and flux-like terms use the Hermitian part of `F`; hopping,
/// string and loop terms use `F + F^dagger`; a string product uses
/// `(H_1 H_2 + H_2 H_1)/2` for the two Hermitized strings.
pub fn make_generator(
    ctx: &Context<'_>,
    kind: GeneratorKind,
    location: Location,
    coupling: Coupling,
    param: Option<usize>,
) -> Result<GeneratorTerm> {
    if ctx.layout.spinor_components != 2 || !ctx.layout.matches(ctx.lat) {
        return Err(Error::LayoutMismatch);
    }
    let n = ctx.n();
    let generator = match (kind, &location) {
        (GeneratorKind::MassLike, Location::Site(x)) => {
            if *x >= ctx.lat.n_sites() {
                return Err(Error::UnknownSite(*x));
            }
            ctx.bilinear(matrix(&coupling)?, *x, &PauliSum::identity(n), *x)?
                .hermitian_part()
        }
        (GeneratorKind::HopLeft | GeneratorKind::HopRight, Location::Link(l)) => {
            let link = *ctx.lat.link(*l)?;
            let fwd = Step { link: *l, forward: true };
            let steps = if kind == GeneratorKind::HopLeft {
                vec![fwd]
            } else {
                vec![Step { forward: false, ..fwd }]
            };
            let _ = link;
            ctx.path_string(matrix(&coupling)?, &steps)?
        }
        (GeneratorKind::FluxLeft | GeneratorKind::FluxRight, Location::Link(l)) => {
            ctx.lat.link(*l)?;
            let f = link_flux_observable(*l, ctx.layout, ctx.trunc)?;
            (&f * &f).scale(scalar(&coupling)?)
        }
        (GeneratorKind::StringLike, Location::Path(steps)) => ctx.path_string(matrix(&coupling)?, steps)?,
        (GeneratorKind::LoopLike, Location::Loop(steps)) => {
            let (s, e) = ctx.lat.check_path(steps)?;
            if s != e {
                return Err(Error::InvalidPath("loop is not closed".into()));
            }
            let mut w = PauliSum::identity(n);
            for &st in steps {
                w = &w * &ctx.u_step(st)?;
            }
            let w = w.scale(scalar(&coupling)?);
            &w + &w.adjoint()
        }
        (GeneratorKind::StringProduct, Location::PathPair(p1, p2)) => {
            let ends1 = ctx.lat.check_path(p1)?;
            let ends2 = ctx.lat.check_path(p2)?;
            if ends1 != ends2 {
                return Err(Error::InvalidPath("paired strings must share endpoints".into()));
            }
            let a = matrix(&coupling)?;
            let h1 = ctx.path_string(a, p1)?;
            let h2 = ctx.path_string(a, p2)?;
            (&(&h1 * &h2) + &(&h2 * &h1)).scale(0.5)
        }
        _ => return Err(bad_location(kind)),
    };
    Ok(GeneratorTerm {
        kind,
        location,
        coupling,
        param,
        generator,
    })
}

impl GeneratorTerm {
    /// Arbitrary Hermitian generator; used for baselines and mutation tests.
    pub fn custom(generator: PauliSum, param: Option<usize>) -> Result<Self> {
        generator.ensure_hermitian(1e-12)?;
        Ok(Self {
            kind: GeneratorKind::Custom,
            location: Location::Unspecified,
            coupling: Coupling::Scalar(1.0),
            param,
            generator: PauliSum::from_terms(
                generator.n_qubits(),
                generator.iter().map(|(p, c)| (*p, C64::new(c.re, 0.0))),
            )?,
        })
    }

    /// `R_p(theta) = exp(-i theta p / 2)` on qubit `q`.
    pub fn rotation(n: usize, q: usize, p: Pauli, param: usize) -> Self {
        Self {
            kind: GeneratorKind::Rotation,
            location: Location::Qubit(q),
            coupling: Coupling::Scalar(-0.5),
            param: Some(param),
            generator: PauliSum::single(n, q, p, -0.5),
        }
    }

    /// CNOT written as `exp(i pi (I - Z_c)(I - X_t)/4)`.
    pub fn entangler(n: usize, c: usize, t: usize) -> Self {
        let zc = &PauliSum::identity(n) - &PauliSum::single(n, c, Pauli::Z, 1.0);
        let xt = &PauliSum::identity(n) - &PauliSum::single(n, t, Pauli::X, 1.0);
        Self {
            kind: GeneratorKind::Entangler,
            location: Location::Qubits(c, t),
            coupling: Coupling::Scalar(PI),
            param: None,
            generator: (&zc * &xt).scale(PI / 4.0),
        }
    }

    /// Hermitian generator at unit parameter.
    pub fn generator(&self) -> &PauliSum {
        &self.generator
    }

    /// Hermitian exponent `theta G` (or `G` for fixed factors).
    pub fn exponent(&self, params: &[f64]) -> PauliSum {
        match self.param {
            Some(p) => self.generator.scale(params[p]),
            None => self.generator.clone(),
        }
    }

    /// Non-identity strings of the generator with real coefficients.
    pub fn strings(&self) -> Vec<(PauliString, f64)> {
        self.generator
            .iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(p, c)| (*p, c.re))
            .collect()
    }

    /// True when every pair of strings commutes, so the factor is exact.
    pub fn strings_commute(&self) -> bool {
        let s = self.strings();
        s.iter().all(|(p, _)| s.iter().all(|(q, _)| p.commutes(q)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub factors: Vec<GeneratorTerm>,
    pub param_names: Vec<String>,
    pub trotter_steps: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            factors: vec![],
            param_names: vec![],
            trotter_steps: 1,
        }
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    /// Registers a parameter and returns its index.
    pub fn add_param(&mut self, name: impl Into<String>) -> usize {
        self.param_names.push(name.into());
        self.param_names.len() - 1
    }

    pub fn push(&mut self, f: GeneratorTerm) -> Result<()> {
        if f.generator.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: f.generator.n_qubits(),
            });
        }
        if let Some(p) = f.param {
            if p >= self.n_params() {
                return Err(Error::InvalidParam(format!("parameter {p} is not registered")));
            }
        }
        self.factors.push(f);
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::ParamLength {
                got: params.len(),
                expected: self.n_params(),
            });
        }
        Ok(())
    }

    /// Applies the unitary to `init` by exact Pauli rotations.
    ///
    /// Identity components only contribute a global phase and are skipped,
    /// matching [`compile`].
    pub fn apply(&self, params: &[f64], init: &StateVector) -> Result<StateVector> {
        self.check_params(params)?;
        if init.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: init.n_qubits(),
            });
        }
        let mut s = init.clone();
        for f in &self.factors {
            if let (GeneratorKind::Entangler, Location::Qubits(c, t)) = (f.kind, &f.location) {
                s.apply_gate(&Gate::Cnot(*c, *t), &[]);
                continue;
            }
            let theta = f.param.map_or(1.0, |p| params[p]);
            let steps = if f.strings_commute() { 1 } else { self.trotter_steps.max(1) };
            for _ in 0..steps {
                for (p, c) in f.strings() {
                    s.apply_pauli_rotation(&p, theta * c / steps as f64);
                }
            }
        }
        Ok(s)
    }
}

/// Chain form: one hop per link, then one mass term per site.
pub fn build_1d_ansatz(lat: &Lattice, layout: &QubitLayout, trunc: SpinTruncation) -> Result<AnsatzSpec> {
    if lat.dim() != 1 {
        return Err(Error::UnsupportedDim(lat.dim()));
    }
    let ctx = Context::new(lat, layout, trunc);
    let mut spec = AnsatzSpec::new(layout.total_qubits);
    push_hops(&ctx, &mut spec)?;
    push_masses(&ctx, &mut spec)?;
    Ok(spec)
}

fn push_hops(ctx: &Context<'_>, spec: &mut AnsatzSpec) -> Result<()> {
    for l in 0..ctx.lat.n_links() {
        let p = spec.add_param(format!("theta_{l}"));
        spec.push(make_generator(
            ctx,
            GeneratorKind::HopLeft,
            Location::Link(l),
            Coupling::lower_to_upper(),
            Some(p),
        )?)?;
    }
    Ok(())
}

fn push_masses(ctx: &Context<'_>, spec: &mut AnsatzSpec) -> Result<()> {
    for x in 0..ctx.lat.n_sites() {
        let p = spec.add_param(format!("lambda_{x}"));
        spec.push(make_generator(
            ctx,
            GeneratorKind::MassLike,
            Location::Site(x),
            Coupling::lower_diagonal(),
            Some(p),
        )?)?;
    }
    Ok(())
}

/// Plaquette form: hops, then for each corner pair the two two-link strings
/// and their symmetrized product, then mass terms.
pub fn build_2d_ansatz(lat: &Lattice, layout: &QubitLayout, trunc: SpinTruncation) -> Result<AnsatzSpec> {
    if lat.dim() != 2 {
        return Err(Error::UnsupportedDim(lat.dim()));
    }
    let ctx = Context::new(lat, layout, trunc);
    let mut spec = AnsatzSpec::new(layout.total_qubits);
    push_hops(&ctx, &mut spec)?;
    for x in 0..lat.n_sites() {
        let (Some(xk), Some(xl)) = (lat.shift(x, 0), lat.shift(x, 1)) else {
            continue;
        };
        let step = |s, k| -> Result<Step> {
            let link = lat.link_index(s, k).ok_or_else(|| Error::InvalidPath("missing link".into()))?;
            Ok(Step { link, forward: true })
        };
        let kl = vec![step(x, 0)?, step(xk, 1)?];
        let lk = vec![step(x, 1)?, step(xl, 0)?];
        for (name, path) in [("kl", &kl), ("lk", &lk)] {
            let p = spec.add_param(format!("string_{name}_{x}"));
            spec.push(make_generator(
                &ctx,
                GeneratorKind::StringLike,
                Location::Path(path.clone()),
                Coupling::lower_to_upper(),
                Some(p),
            )?)?;
        }
        let p = spec.add_param(format!("string_product_{x}"));
        spec.push(make_generator(
            &ctx,
            GeneratorKind::StringProduct,
            Location::PathPair(kl, lk),
            Coupling::lower_to_upper(),
            Some(p),
        )?)?;
    }
    push_masses(&ctx, &mut spec)?;
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicKind {
    Ry,
    Ryrz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    Full,
    Linear,
}

/// Layered hardware-style form: rotations, then CNOTs, `depth` times, then a
/// final rotation layer.
pub fn build_heuristic(kind: HeuristicKind, n: usize, depth: usize, ent: Entanglement) -> AnsatzSpec {
    let mut spec = AnsatzSpec::new(n);
    let rotations = |spec: &mut AnsatzSpec, layer: usize| {
        let axes: &[Pauli] = match kind {
            HeuristicKind::Ry => &[Pauli::Y],
            HeuristicKind::Ryrz => &[Pauli::Y, Pauli::Z],
        };
        for q in 0..n {
            for &ax in axes {
                let p = spec.add_param(format!("r{}_{layer}_{q}", ax.as_char().to_ascii_lowercase()));
                spec.factors.push(GeneratorTerm::rotation(n, q, ax, p));
            }
        }
    };
    for layer in 0..depth {
        rotations(&mut spec, layer);
        let pairs: Vec<(usize, usize)> = match ent {
            Entanglement::Full => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
            Entanglement::Linear => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        };
        for (c, t) in pairs {
            spec.factors.push(GeneratorTerm::entangler(n, c, t));
        }
    }
    rotations(&mut spec, depth);
    spec
}

/// Per-factor gauge-invariance result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    /// Largest commutator bound per factor over draws and sites.
    pub per_factor: Vec<f64>,
    pub max_norm: f64,
    pub passed: bool,
}

/// Tolerance on `||[theta G, G_x]||` for a factor to count as gauge invariant.
pub const GAUGE_TOL: f64 = 1e-10;

/// Checks `[theta G, G_x] = 0` for every factor, 10 parameter draws in
/// `[-pi, pi]` and every site.
///
/// The norm reported is the sum of commutator coefficient magnitudes, an
/// upper bound on the operator norm that vanishes only for an exact zero.
pub fn verify_gauge_invariance(spec: &AnsatzSpec, gauss: &[PauliSum], seed: u64) -> Result<GaugeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_factor = Vec::with_capacity(spec.factors.len());
    for f in &spec.factors {
        let base: f64 = gauss
            .iter()
            .map(|g| f.generator.commutator(g).map(|c| c.one_norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let theta = if f.param.is_some() { rng.gen_range(-PI..PI) } else { 1.0 };
            worst = worst.max(theta.abs() * base);
        }
        per_factor.push(worst);
    }
    let max_norm = per_factor.iter().copied().fold(0.0, f64::max);
    Ok(GaugeReport {
        per_factor,
        max_norm,
        passed: max_norm < GAUGE_TOL,
    })
}

/// Compiles the spec into gates at the given parameters.
///
/// Each string `c P` of a factor becomes `exp(i theta c P)`: a basis change
/// (`H` for X, `Rx(pi/2)` for Y), a CNOT ladder over the active qubits in
/// ascending order targeting the highest, `Rz(-2 c theta)`, and the inverse.
/// Single-qubit strings become one rotation. Factors with non-commuting
/// strings are split into `trotter_steps` slices.
pub fn compile(spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    spec.check_params(params)?;
    let mut c = Circuit::new(spec.n_qubits);
    c.params = params.to_vec();
    c.param_names = spec.param_names.clone();
    for f in &spec.factors {
        if let (GeneratorKind::Entangler, Location::Qubits(ctl, tgt)) = (f.kind, &f.location) {
            c.push(Gate::Cnot(*ctl, *tgt));
            continue;
        }
        let steps = if f.strings_commute() { 1 } else { spec.trotter_steps.max(1) };
        for _ in 0..steps {
            for (p, coef) in f.strings() {
                let scale = -2.0 * coef / steps as f64;
                let angle = match f.param {
                    Some(i) => Angle::param(i, scale),
                    None => Angle::fixed(scale),
                };
                push_rotation(&mut c, &p, angle);
            }
        }
    }
    Ok(c)
}

fn push_rotation(c: &mut Circuit, p: &PauliString, angle: Angle) {
    let active: Vec<usize> = (0..p.n_qubits()).filter(|&q| p.get(q) != Pauli::I).collect();
    if let [q] = active[..] {
        c.push(match p.get(q) {
            Pauli::X => Gate::Rx(q, angle),
            Pauli::Y => Gate::Ry(q, angle),
            _ => Gate::Rz(q, angle),
        });
        return;
    }
    for &q in &active {
        match p.get(q) {
            Pauli::X => c.push(Gate::H(q)),
            Pauli::Y => c.push(Gate::Rx(q, Angle::fixed(FRAC_PI_2))),
            _ => {}
        }
    }
    for w in active.windows(2) {
        c.push(Gate::Cnot(w[0], w[1]));
    }
    let target = *active.last().expect("non-identity string");
    c.push(Gate::Rz(target, angle));
    for w in active.windows(2).rev() {
        c.push(Gate::Cnot(w[0], w[1]));
    }
    for &q in &active {
        match p.get(q) {
            Pauli::X => c.push(Gate::H(q)),
            Pauli::Y => c.push(Gate::Rx(q, Angle::fixed(-FRAC_PI_2))),
            _ => {}
        }
    }
}
