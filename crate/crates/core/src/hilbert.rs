//! Spin-S and spin-1/2 chain operator algebras, pure states and the real
//! embedding used by the geometric analysis.
//!
//! Basis conventions: spin states are ordered `|S, m⟩` with `m` descending
//! (index 0 is `m = S`). Chain states `|s₁ … s_L⟩` put site 1 in the most
//! significant bit, with bit value 0 meaning spin up (`σᶻ = +1`).

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, ComplexMatrix, ONE, ZERO};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Spin quantum number stored as `2S` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinRep {
    two_s: u32,
}

impl SpinRep {
    pub fn from_two_s(two_s: u32) -> Self {
        Self { two_s }
    }

    /// Accepts integer or half-integer `S ≥ 0`.
    pub fn new(spin: f64) -> Result<Self> {
        let two_s = 2.0 * spin;
        if !(two_s >= 0.0) || (two_s - two_s.round()).abs() > 1e-12 {
            return Err(invalid(format!("spin {spin} is not a non-negative half-integer")));
        }
        Ok(Self { two_s: two_s.round() as u32 })
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    pub fn spin(&self) -> f64 {
        f64::from(self.two_s) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// `S(S+1)`.
    pub fn casimir(&self) -> f64 {
        let s = self.spin();
        s * (s + 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
    pub splus: ComplexMatrix,
    pub sminus: ComplexMatrix,
}

pub fn spin_operators(rep: SpinRep) -> SpinOperators {
    let n = rep.dim();
    let s = rep.spin();
    let m = |i: usize| s - i as f64;
    let sz = linalg::diagonal(&(0..n).map(|i| C64::new(m(i), 0.0)).collect::<Vec<_>>());
    // S₊|m⟩ = √(S(S+1) − m(m+1)) |m+1⟩, and |m+1⟩ sits one row above |m⟩.
    let mut splus = linalg::zeros(n, n);
    for i in 1..n {
        let mi = m(i);
        splus[(i - 1, i)] = C64::new((s * (s + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let sminus = linalg::adjoint(&splus);
    let sx = linalg::scale_real(0.5, &(&splus + &sminus));
    let sy = linalg::scale(C64::new(0.0, -0.5), &(&splus - &sminus));
    SpinOperators { sx, sy, sz, splus, sminus }
}

/// Single-site operator label for chain operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    /// `σ⁺ = |↑⟩⟨↓|`
    Plus,
    /// `σ⁻ = |↓⟩⟨↑|`
    Minus,
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => linalg::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
        Axis::Y => linalg::from_rows(&[&[ZERO, -i], &[i, ZERO]]),
        Axis::Z => linalg::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
        Axis::Plus => linalg::from_rows(&[&[ZERO, ONE], &[ZERO, ZERO]]),
        Axis::Minus => linalg::from_rows(&[&[ZERO, ZERO], &[ONE, ZERO]]),
    }
}

/// `I ⊗ … ⊗ σᵅ ⊗ … ⊗ I` with the Pauli factor at 1-based site `site`.
pub fn chain_operator(sites: usize, site: usize, axis: Axis) -> Result<ComplexMatrix> {
    if site == 0 || site > sites {
        return Err(Error::SiteOutOfRange { site, sites });
    }
    let left = 1usize << (site - 1);
    let right = 1usize << (sites - site);
    let p = pauli(axis);
    // Entries of the Kronecker product are nonzero only where the spectator
    // bits agree, which is cheaper to fill directly than to build via kron.
    let dim = left * 2 * right;
    let mut out = linalg::zeros(dim, dim);
    for l in 0..left {
        for r in 0..right {
            for a in 0..2 {
                for b in 0..2 {
                    let v = p[(a, b)];
                    if v != ZERO {
                        out[((l * 2 + a) * right + r, (l * 2 + b) * right + r)] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Total magnetization `½ Σ_j σᶻ_j`, diagonal in the computational basis.
pub fn chain_total_sz(sites: usize) -> ComplexMatrix {
    let dim = 1usize << sites;
    linalg::diagonal(
        &(0..dim)
            .map(|idx| C64::new(sites as f64 / 2.0 - idx.count_ones() as f64, 0.0))
            .collect::<Vec<_>>(),
    )
}

/// Normalized vector in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Normalizes `amps`; fails on the zero vector.
    pub fn new(mut amps: Vec<C64>) -> Result<Self> {
        let norm = norm(&amps);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("state vector has zero or non-finite norm"));
        }
        let inv = 1.0 / norm;
        amps.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { amps })
    }

    pub(crate) fn from_normalized(amps: Vec<C64>) -> Self {
        debug_assert!((norm(&amps) - 1.0).abs() < 1e-9);
        Self { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    /// Haar-random state: normalized i.i.d. complex Gaussian amplitudes.
    pub fn haar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let amps: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(s) = Self::new(amps) {
                return s;
            }
        }
    }

    /// Haar-random state supported on the listed basis indices.
    pub fn haar_in_subspace<R: Rng + ?Sized>(dim: usize, support: &[usize], rng: &mut R) -> Result<Self> {
        if support.is_empty() {
            return Err(invalid("empty subspace"));
        }
        if let Some(&bad) = support.iter().find(|&&i| i >= dim) {
            return Err(invalid(format!("basis index {bad} out of range for dimension {dim}")));
        }
        let local = Self::haar(support.len(), rng);
        let mut amps = vec![ZERO; dim];
        for (&i, &a) in support.iter().zip(&local.amps) {
            amps[i] = a;
        }
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Same state multiplied by `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        let ph = C64::from_polar(1.0, theta);
        Self { amps: self.amps.iter().map(|a| a * ph).collect() }
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Indices of a diagonal operator's basis states with the given eigenvalue.
pub fn diagonal_sector(op: &ComplexMatrix, value: f64) -> Vec<usize> {
    (0..op.nrows()).filter(|&i| (op[(i, i)].re - value).abs() < 1e-9).collect()
}

/// `[Re ψ₁, Im ψ₁, …, Re ψ_d, Im ψ_d]`.
pub fn real_embedding(psi: &PureState) -> Vec<f64> {
    psi.amps.iter().flat_map(|a| [a.re, a.im]).collect()
}

/// Euclidean distance `‖ψ − φ‖` of the state vectors; no phase is quotiented.
pub fn state_distance(psi: &PureState, phi: &PureState) -> Result<f64> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), found: phi.dim() });
    }
    Ok(psi
        .amps
        .iter()
        .zip(&phi.amps)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, max_abs_diff, scale};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = spin_operators(SpinRep::new(0.5).unwrap());
        assert_eq!(ops.sz[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(ops.sz[(1, 1)], C64::new(-0.5, 0.0));
        assert_eq!(ops.sminus[(1, 0)], ONE);
        assert_eq!(ops.sminus[(0, 1)], ZERO);
        assert!(max_abs_diff(&ops.sx, &linalg::scale_real(0.5, &pauli(Axis::X))) < 1e-15);
        assert!(max_abs_diff(&ops.sy, &linalg::scale_real(0.5, &pauli(Axis::Y))) < 1e-15);
    }

    #[test]
    fn su2_algebra_up_to_large_spin() {
        let i = C64::new(0.0, 1.0);
        for two_s in [1u32, 2, 3, 7, 20, 61, 200] {
            let rep = SpinRep::from_two_s(two_s);
            let o = spin_operators(rep);
            let n = rep.dim();
            let tol = 1e-12 * rep.casimir().max(1.0);
            assert!(max_abs(&(commutator(&o.sx, &o.sy) - scale(i, &o.sz))) < tol);
            assert!(max_abs(&(commutator(&o.sy, &o.sz) - scale(i, &o.sx))) < tol);
            assert!(max_abs(&(commutator(&o.sz, &o.sx) - scale(i, &o.sy))) < tol);
            let cas = &o.sx * &o.sx + &o.sy * &o.sy + &o.sz * &o.sz;
            let target = linalg::scale_real(rep.casimir(), &linalg::identity(n));
            assert!(max_abs_diff(&cas, &target) < tol, "2S = {two_s}");
            // Sz entries S, S−1, …, −S
            for k in 0..n {
                assert_eq!(o.sz[(k, k)].re, rep.spin() - k as f64);
            }
        }
    }

    #[test]
    fn rejects_non_half_integer_spin() {
        assert!(SpinRep::new(0.3).is_err());
        assert!(SpinRep::new(-1.0).is_err());
        assert_eq!(SpinRep::new(1.5).unwrap().dim(), 4);
    }

    #[test]
    fn chain_operator_examples() {
        let z = chain_operator(1, 1, Axis::Z).unwrap();
        assert_eq!(z[(0, 0)], ONE);
        assert_eq!(z[(1, 1)], -ONE);

        let zz = &chain_operator(2, 1, Axis::Z).unwrap() * &chain_operator(2, 2, Axis::Z).unwrap();
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(zz[(k, k)].re, *e);
        }
        assert!(chain_operator(3, 0, Axis::X).is_err());
        assert!(matches!(chain_operator(3, 4, Axis::X), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn chain_operator_matches_explicit_kron() {
        let x = pauli(Axis::X);
        let id = linalg::identity(2);
        let expect = linalg::kron(&linalg::kron(&id, &x), &id);
        let got = chain_operator(3, 2, Axis::X).unwrap();
        assert!(max_abs_diff(&expect, &got) < 1e-16);
    }

    #[test]
    fn chain_pauli_algebra() {
        let l = 4;
        for j in 1..=l {
            let zj = chain_operator(l, j, Axis::Z).unwrap();
            assert_eq!(max_abs_diff(&(&zj * &zj), &linalg::identity(1 << l)), 0.0);
            for k in 1..=l {
                if k != j {
                    let xk = chain_operator(l, k, Axis::X).unwrap();
                    assert!(max_abs(&commutator(&zj, &xk)) == 0.0);
                }
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let psi = PureState::basis(2, 0).unwrap();
        assert_eq!(real_embedding(&psi), vec![1.0, 0.0, 0.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(vec![C64::new(0.0, h), C64::new(h, 0.0)]).unwrap();
        let e = real_embedding(&psi);
        for (a, b) in e.iter().zip([0.0, h, h, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn distance_examples() {
        let a = PureState::basis(3, 0).unwrap();
        let b = PureState::basis(3, 1).unwrap();
        assert_eq!(state_distance(&a, &a).unwrap(), 0.0);
        assert!((state_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let flipped = a.with_phase(std::f64::consts::PI);
        assert!((state_distance(&a, &flipped).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            state_distance(&a, &PureState::basis(2, 0).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn total_sz_sector() {
        let sz = chain_total_sz(4);
        assert_eq!(diagonal_sector(&sz, 0.0).len(), 6);
        assert_eq!(diagonal_sector(&sz, 2.0), vec![0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn embedding_is_isometry(seed in any::<u64>(), dim in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = PureState::haar(dim, &mut rng);
            let phi = PureState::haar(dim, &mut rng);
            let ep = real_embedding(&psi);
            let ef = real_embedding(&phi);
            let norm: f64 = ep.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let d: f64 = ep.iter().zip(&ef).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!((d - state_distance(&psi, &phi).unwrap()).abs() < 1e-14);
        }
    }
}
