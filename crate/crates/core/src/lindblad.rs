//! Lindblad models: the dissipative quantum top, the XXZ-chain variants,
//! their vectorized generators and a direct master-equation propagator.
//!
//! Rates are folded into the jump operators: a channel with rate `γ` and
//! operator `A` is stored as `√γ·A`.

use crate::error::{invalid, Error, Result};
use crate::hilbert::{chain_operator, spin_operators, Axis, PureState, SpinRep};
use crate::linalg::{self, adjoint, conjugate, expm, kron, ComplexMatrix, ONE, ZERO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const HERMITIAN_TOL: f64 = 1e-12;

/// Periodic delta kick `Σ_n δ(t − nτ) H_k`.
#[derive(Debug, Clone)]
pub struct Kick {
    pub generator: ComplexMatrix,
    pub period: f64,
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
    kick: Option<Kick>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<ComplexMatrix>, kick: Option<Kick>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if hamiltonian.ncols() != d {
            return Err(invalid("Hamiltonian must be square"));
        }
        let defect = linalg::hermiticity_defect(&hamiltonian);
        if defect > HERMITIAN_TOL * linalg::max_abs(&hamiltonian).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        for l in &jumps {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: l.nrows() });
            }
        }
        if let Some(k) = &kick {
            if !(k.period > 0.0) {
                return Err(invalid(format!("kick period must be positive, got {}", k.period)));
            }
            if k.generator.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.generator.nrows() });
            }
            let defect = linalg::hermiticity_defect(&k.generator);
            if defect > HERMITIAN_TOL * linalg::max_abs(&k.generator).max(1.0) {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(Self { hamiltonian, jumps, kick })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    pub fn kick(&self) -> Option<&Kick> {
        self.kick.as_ref()
    }

    pub fn without_kick(&self) -> Self {
        Self { kick: None, ..self.clone() }
    }
}

/// Couplings of the dissipative top. A kick exists iff `tau` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopParams {
    pub spin: f64,
    pub omega_z: f64,
    pub g: f64,
    #[serde(default)]
    pub omega_x: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub gamma: f64,
}

/// `H = ω_z S_z + (g/S) S_z² + ω_x S_x`, kick `(k/S) S_y²`, jump `√(γ/S) S₋`.
pub fn quantum_top_model(p: &TopParams) -> Result<LindbladModel> {
    let rep = SpinRep::new(p.spin)?;
    if rep.two_s() == 0 {
        return Err(invalid("the top needs S > 0"));
    }
    if p.gamma < 0.0 {
        return Err(invalid(format!("negative rate γ = {}", p.gamma)));
    }
    if p.k != 0.0 && p.tau.is_none() {
        return Err(invalid("a kick strength k ≠ 0 needs a period τ"));
    }
    let s = rep.spin();
    let ops = spin_operators(rep);
    let sz2 = &ops.sz * &ops.sz;
    let h = linalg::scale_real(p.omega_z, &ops.sz)
        + linalg::scale_real(p.g / s, &sz2)
        + linalg::scale_real(p.omega_x, &ops.sx);
    let mut jumps = Vec::new();
    if p.gamma > 0.0 {
        jumps.push(linalg::scale_real((p.gamma / s).sqrt(), &ops.sminus));
    }
    let kick = match p.tau {
        Some(period) => {
            let sy2 = &ops.sy * &ops.sy;
            // Sy² is real symmetric up to rounding; symmetrize so the
            // Hermiticity check is exact.
            let gen = linalg::scale_real(p.k / s, &sy2);
            let gen = linalg::scale_real(0.5, &(&gen + &adjoint(&gen)));
            Some(Kick { generator: gen, period })
        }
        None => None,
    };
    LindbladModel::new(h, jumps, kick)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainVariant {
    A,
    B,
    C,
    D,
}

/// Prefactor of the bond operator `(σ⃗_j·σ⃗_{j+1} + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondNormalization {
    /// `√γ₁ / 2`
    #[default]
    InText,
    /// `√(γ₁ / 2)`
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub variant: ChainVariant,
    pub sites: usize,
    #[serde(default)]
    pub j1: f64,
    #[serde(default)]
    pub j2: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub gamma0: f64,
    #[serde(default)]
    pub gamma1: f64,
    #[serde(default)]
    pub gamma2: f64,
    #[serde(default)]
    pub gamma3: f64,
    #[serde(default)]
    pub bond_normalization: BondNormalization,
}

impl ChainParams {
    /// Checks the per-variant parameter constraints.
    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(invalid(format!("chain needs at least 2 sites, got {}", self.sites)));
        }
        for (name, v) in [("gamma0", self.gamma0), ("gamma1", self.gamma1), ("gamma2", self.gamma2), ("gamma3", self.gamma3)] {
            if v < 0.0 {
                return Err(invalid(format!("negative rate {name} = {v}")));
            }
        }
        let zero = |name: &str, v: f64| -> Result<()> {
            if v != 0.0 {
                Err(invalid(format!("variant {:?} requires {name} = 0, got {v}", self.variant)))
            } else {
                Ok(())
            }
        };
        match self.variant {
            ChainVariant::A => {
                zero("gamma1", self.gamma1)?;
                zero("gamma2", self.gamma2)?;
                zero("gamma3", self.gamma3)?;
            }
            ChainVariant::B => {
                zero("j1", self.j1)?;
                zero("j2", self.j2)?;
                zero("gamma0", self.gamma0)?;
                zero("gamma2", self.gamma2)?;
                zero("gamma3", self.gamma3)?;
            }
            ChainVariant::C => {
                zero("j2", self.j2)?;
                zero("delta", self.delta)?;
                zero("gamma1", self.gamma1)?;
            }
            ChainVariant::D => {
                zero("j2", self.j2)?;
                zero("gamma0", self.gamma0)?;
                zero("gamma1", self.gamma1)?;
                if self.gamma2 != self.gamma3 {
                    return Err(invalid(format!(
                        "variant D requires gamma2 = gamma3, got {} and {}",
                        self.gamma2, self.gamma3
                    )));
                }
            }
        }
        Ok(())
    }
}

/// XXZ Hamiltonian with next-nearest-neighbour hopping, open boundaries.
pub fn xxz_hamiltonian(sites: usize, j1: f64, j2: f64, delta: f64) -> Result<ComplexMatrix> {
    let dim = 1usize << sites;
    let mut h = linalg::zeros(dim, dim);
    let op = |j: usize, a: Axis| chain_operator(sites, j, a);
    let hop = |a: usize, b: usize| -> Result<ComplexMatrix> {
        Ok(&op(a, Axis::X)? * &op(b, Axis::X)? + &op(a, Axis::Y)? * &op(b, Axis::Y)?)
    };
    for j in 1..sites {
        if j1 != 0.0 {
            h += linalg::scale_real(j1, &hop(j, j + 1)?);
        }
        if delta != 0.0 {
            h += linalg::scale_real(delta, &(&op(j, Axis::Z)? * &op(j + 1, Axis::Z)?));
        }
    }
    if j2 != 0.0 {
        for j in 1..sites - 1 {
            h += linalg::scale_real(j2, &hop(j, j + 2)?);
        }
    }
    Ok(h)
}

/// `(σ⃗_j·σ⃗_{j+1} + 1) / 2`, the permutation of sites j and j+1.
pub fn bond_swap(sites: usize, j: usize) -> Result<ComplexMatrix> {
    let op = |a: Axis, site: usize| chain_operator(sites, site, a);
    let dot = &op(Axis::X, j)? * &op(Axis::X, j + 1)?
        + &op(Axis::Y, j)? * &op(Axis::Y, j + 1)?
        + &op(Axis::Z, j)? * &op(Axis::Z, j + 1)?;
    Ok(linalg::scale_real(0.5, &(dot + linalg::identity(1 << sites))))
}

pub fn chain_model(p: &ChainParams) -> Result<LindbladModel> {
    p.validate()?;
    let l = p.sites;
    let h = xxz_hamiltonian(l, p.j1, p.j2, p.delta)?;
    let mut jumps = Vec::new();
    if p.gamma0 > 0.0 {
        for j in 1..=l {
            jumps.push(linalg::scale_real(p.gamma0.sqrt(), &chain_operator(l, j, Axis::Z)?));
        }
    }
    if p.gamma1 > 0.0 {
        // bond_swap already carries the 1/2 of the in-text form.
        let pref = match p.bond_normalization {
            BondNormalization::InText => p.gamma1.sqrt(),
            BondNormalization::Tabulated => (2.0 * p.gamma1).sqrt(),
        };
        for j in 1..l {
            jumps.push(linalg::scale_real(pref, &bond_swap(l, j)?));
        }
    }
    if p.gamma2 > 0.0 {
        for j in 1..l {
            let a = &chain_operator(l, j, Axis::Plus)? * &chain_operator(l, j + 1, Axis::Minus)?;
            jumps.push(linalg::scale_real(p.gamma2.sqrt(), &a));
        }
    }
    if p.gamma3 > 0.0 {
        for j in 1..l {
            let a = &chain_operator(l, j, Axis::Minus)? * &chain_operator(l, j + 1, Axis::Plus)?;
            jumps.push(linalg::scale_real(p.gamma3.sqrt(), &a));
        }
    }
    LindbladModel::new(h, jumps, None)
}

/// `H − (i/2) Σ L†L`.
pub fn effective_hamiltonian(model: &LindbladModel) -> ComplexMatrix {
    let mut h = model.hamiltonian.clone();
    for l in &model.jumps {
        h -= linalg::scale(C64::new(0.0, 0.5), &(&adjoint(l) * l));
    }
    h
}

/// Density matrix with validated Hermiticity, unit trace and positivity.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(entries: ComplexMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(invalid("density matrix must be square"));
        }
        let defect = linalg::hermiticity_defect(&entries);
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        let tr = linalg::trace(&entries);
        if (tr - ONE).norm() > 1e-10 {
            return Err(invalid(format!("density matrix trace {tr} ≠ 1")));
        }
        let hermitized = linalg::scale_real(0.5, &(&entries + &adjoint(&entries)));
        let min_ev = linalg::hermitian_eigenvalues(&hermitized).first().copied().unwrap_or(0.0);
        if min_ev < -1e-8 {
            return Err(invalid(format!("density matrix has negative eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { entries: hermitized })
    }

    pub fn pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        Self { entries: faer::Mat::from_fn(d, d, |i, j| a[i] * a[j].conj()) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { entries: linalg::scale_real(1.0 / dim as f64, &linalg::identity(dim)) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        linalg::trace(&(&self.entries * op))
    }

    /// Row-major vectorization `|i⟩⟨j| → |i⟩|j⟩`.
    pub fn vectorized(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d * d).map(|k| self.entries[(k / d, k % d)]).collect()
    }

    pub fn from_vectorized(v: &[C64]) -> Result<Self> {
        let d = (v.len() as f64).sqrt().round() as usize;
        if d * d != v.len() {
            return Err(invalid("vectorized density matrix length is not a square"));
        }
        Self::new(faer::Mat::from_fn(d, d, |i, j| v[i * d + j]))
    }
}

/// Matrix acting on vectorized operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    entries: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(entries: ComplexMatrix) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.entries
    }

    pub fn hilbert_dim(&self) -> usize {
        (self.entries.nrows() as f64).sqrt().round() as usize
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_vectorized(&linalg::matvec(&self.entries, &rho.vectorized()))
    }

    /// Norm of `⟨⟨I| 𝓛`, which vanishes for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim();
        let n = self.entries.ncols();
        (0..n)
            .map(|col| (0..d).map(|i| self.entries[(i * d + i, col)]).sum::<C64>().norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn compose(&self, rhs: &Superoperator) -> Superoperator {
        Superoperator { entries: &self.entries * &rhs.entries }
    }
}

fn commutator_super(h: &ComplexMatrix) -> ComplexMatrix {
    let id = linalg::identity(h.nrows());
    kron(h, &id) - kron(&id, &conjugate(h))
}

/// Vectorized autonomous generator `−i(H⊗I − I⊗H*) + Σ[L⊗L* − ½(L†L⊗I + I⊗(L†L)*)]`.
/// The kick, if any, is not included.
pub fn vectorize(model: &LindbladModel) -> Superoperator {
    let d = model.dim();
    let id = linalg::identity(d);
    let mut gen = linalg::scale(C64::new(0.0, -1.0), &commutator_super(&model.hamiltonian));
    for l in &model.jumps {
        let ldl = &adjoint(l) * l;
        gen = gen + kron(l, &conjugate(l))
            - linalg::scale_real(0.5, &(kron(&ldl, &id) + kron(&id, &conjugate(&ldl))));
    }
    Superoperator { entries: gen }
}

/// Kick unitary `e^{−i H_k}`.
pub fn kick_unitary(kick: &Kick) -> ComplexMatrix {
    expm(&linalg::scale(C64::new(0.0, -1.0), &kick.generator))
}

/// One-period map `F_τ = e^{τ𝓛₀} (U_k ⊗ U_k*)`, kick first.
pub fn floquet_map(model: &LindbladModel) -> Result<Superoperator> {
    let kick = model.kick.as_ref().ok_or(Error::MissingKick)?;
    let l0 = vectorize(model);
    let evolve = expm(&linalg::scale_real(kick.period, &l0.entries));
    let u = kick_unitary(kick);
    let kick_map = kron(&u, &conjugate(&u));
    Ok(Superoperator { entries: &evolve * &kick_map })
}

/// `ρ_t` from the master equation. Kicked models need `t` to be a multiple
/// of the period; the kick at `t = nτ` belongs to the following period.
pub fn propagate_density(model: &LindbladModel, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    DensityPropagator::new(model)?.propagate(rho0, t)
}

/// Reusable master-equation propagator; caches the generator and, for
/// kicked models, the one-period map.
#[derive(Debug, Clone)]
pub struct DensityPropagator {
    generator: Superoperator,
    floquet: Option<(f64, Superoperator)>,
}

impl DensityPropagator {
    pub fn new(model: &LindbladModel) -> Result<Self> {
        let generator = vectorize(model);
        let floquet = match model.kick.as_ref() {
            Some(k) => Some((k.period, floquet_map(model)?)),
            None => None,
        };
        Ok(Self { generator, floquet })
    }

    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if !(t >= 0.0) {
            return Err(invalid(format!("negative propagation time {t}")));
        }
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        let v = rho0.vectorized();
        let out = match &self.floquet {
            None => {
                let e = expm(&linalg::scale_real(t, &self.generator.entries));
                linalg::matvec(&e, &v)
            }
            Some((period, f)) => {
                let n = periods(t, *period)?;
                let mut v = v;
                for _ in 0..n {
                    v = linalg::matvec(&f.entries, &v);
                }
                v
            }
        };
        DensityMatrix::from_vectorized(&out)
    }

    /// Densities at each of `times` (ascending), reusing one step map per gap.
    pub fn propagate_series(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        let mut out = Vec::with_capacity(times.len());
        let mut current = rho0.clone();
        let mut t_now = 0.0;
        for &t in times {
            if t < t_now {
                return Err(invalid("times must be non-decreasing"));
            }
            current = self.propagate(&current, t - t_now)?;
            t_now = t;
            out.push(current.clone());
        }
        Ok(out)
    }
}

fn periods(t: f64, period: f64) -> Result<usize> {
    let n = (t / period).round();
    if (n * period - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::PeriodMismatch { period, dt: t });
    }
    Ok(n as usize)
}

/// Shift of each jump operator by a c-number plus an energy offset.
#[derive(Debug, Clone, PartialEq)]
pub struct UnravelingGauge {
    pub shifts: Vec<C64>,
    pub energy_offset: f64,
}

impl UnravelingGauge {
    pub fn identity(channels: usize) -> Self {
        Self { shifts: vec![ZERO; channels], energy_offset: 0.0 }
    }

    pub fn uniform(channels: usize, shift: C64, energy_offset: f64) -> Self {
        Self { shifts: vec![shift; channels], energy_offset }
    }
}

/// `L_α → L_α + ℓ_α`, `H → H − (i/2) Σ (ℓ_α* L_α − ℓ_α L_α†) + r`.
pub fn gauge_transform(model: &LindbladModel, gauge: &UnravelingGauge) -> Result<LindbladModel> {
    if gauge.shifts.len() != model.jumps.len() {
        return Err(Error::DimensionMismatch { expected: model.jumps.len(), found: gauge.shifts.len() });
    }
    let d = model.dim();
    let id = linalg::identity(d);
    let mut h = &model.hamiltonian + linalg::scale_real(gauge.energy_offset, &id);
    let mut jumps = Vec::with_capacity(model.jumps.len());
    for (l, &shift) in model.jumps.iter().zip(&gauge.shifts) {
        let x = linalg::scale(shift.conj(), l) - linalg::scale(shift, &adjoint(l));
        h -= linalg::scale(C64::new(0.0, 0.5), &x);
        jumps.push(l + linalg::scale(shift, &id));
    }
    let h = linalg::scale_real(0.5, &(&h + &adjoint(&h)));
    LindbladModel::new(h, jumps, model.kick.clone())
}

/// Heisenberg-picture dissipator `Σ (L† O L − ½{L†L, O})`.
pub fn adjoint_dissipator(model: &LindbladModel, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    if op.nrows() != model.dim() || op.ncols() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: op.nrows() });
    }
    let d = model.dim();
    let mut out = linalg::zeros(d, d);
    for l in &model.jumps {
        let ld = adjoint(l);
        let ldl = &ld * l;
        out = out + &ld * op * l - linalg::scale_real(0.5, &linalg::anticommutator(&ldl, op));
    }
    Ok(out)
}

/// `⟨ψ|O|ψ⟩` for a density built from a pure state, convenience for tests.
pub fn pure_expectation(psi: &PureState, op: &ComplexMatrix) -> C64 {
    let a = psi.amplitudes();
    let oa = linalg::matvec(op, a);
    a.iter().zip(&oa).map(|(x, y)| x.conj() * y).sum()
}
