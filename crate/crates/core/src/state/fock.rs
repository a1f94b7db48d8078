//! Truncated Fock-space operators and the qubit (x) oscillator state used by
//! the interferometry scenarios.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::state::density::{Basis, DensityMatrix};
use crate::C64;

/// Cutoff rule `max(20, ceil(10 (nbar + 1) + 4 |beta|^2))`.
pub fn default_cutoff(nbar: f64, beta_abs: f64) -> usize {
    let rule = (10.0 * (nbar + 1.0) + 4.0 * beta_abs * beta_abs).ceil() as usize;
    rule.max(20)
}

pub fn annihilation(n_fock: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n_fock, n_fock);
    for n in 1..n_fock {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn number_operator(n_fock: usize) -> CMatrix {
    linalg::real_diag(&(0..n_fock).map(|n| n as f64).collect::<Vec<_>>())
}

/// `z0 (a + a^dagger)`.
pub fn position_operator(n_fock: usize, z0: f64) -> CMatrix {
    let a = annihilation(n_fock);
    (&a + a.adjoint()) * C64::new(z0, 0.0)
}

/// `D(beta) = exp(beta a^dagger - beta^* a)`, exponentiated inside the
/// truncated space (exactly unitary; matrix elements near the cutoff are
/// truncation artefacts).
pub fn displacement_operator(beta: C64, n_fock: usize) -> Result<CMatrix> {
    if n_fock < 2 {
        return Err(Error::CutoffTooSmall { cutoff: n_fock, reason: "need at least 2 levels".into() });
    }
    if beta.norm_sqr() > n_fock as f64 / 4.0 {
        return Err(Error::CutoffTooSmall {
            cutoff: n_fock,
            reason: format!("|beta|^2 = {} exceeds N/4", beta.norm_sqr()),
        });
    }
    let a = annihilation(n_fock);
    let generator = a.adjoint() * beta - &a * beta.conj();
    // generator is anti-Hermitian: exp(G) = exp(-i H) with H = i G.
    let h = generator * C64::new(0.0, 1.0);
    Ok(linalg::unitary_propagator(&h, 1.0))
}

/// Bose-Einstein populations, renormalised after truncation.
pub fn thermal_state(nbar: f64, n_fock: usize) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter(format!("mean occupation {nbar} < 0")));
    }
    let needed = (10.0 * (nbar + 1.0)).ceil() as usize;
    if n_fock < needed {
        return Err(Error::CutoffTooSmall {
            cutoff: n_fock,
            reason: format!("thermal state with nbar = {nbar} needs at least {needed} levels"),
        });
    }
    let ratio = if nbar == 0.0 { 0.0 } else { nbar / (nbar + 1.0) };
    let mut pops: Vec<f64> = (0..n_fock).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    DensityMatrix::from_matrix(Basis::Fock(n_fock), linalg::real_diag(&pops))
}

/// Coherent state `|alpha>` by its Fock amplitudes.
pub fn coherent_amplitudes(alpha: C64, n_fock: usize) -> CVector {
    let mut v = CVector::zeros(n_fock);
    let mut term = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..n_fock {
        if n > 0 {
            term *= alpha / (n as f64).sqrt();
        }
        v[n] = term;
    }
    v
}

/// Oscillator mass and frequency, in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub mass: f64,
    pub omega: f64,
}

impl Oscillator {
    /// Zero-point length `sqrt(1 / 2 M omega)`.
    pub fn zero_point_length(&self) -> f64 {
        (1.0 / (2.0 * self.mass * self.omega)).sqrt()
    }

    /// Oscillator whose ground state has position spread `z0`.
    pub fn with_zero_point_length(mass: f64, z0: f64) -> Self {
        Self { mass, omega: 1.0 / (2.0 * mass * z0 * z0) }
    }
}

/// Qubit (x) truncated oscillator, qubit index major (`|L> = 0`, `|R> = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOscillatorState {
    pub rho: DensityMatrix,
    pub oscillator: Oscillator,
    pub nbar: f64,
}

impl QubitOscillatorState {
    pub fn n_fock(&self) -> usize {
        self.rho.dim() / 2
    }

    pub fn z0(&self) -> f64 {
        self.oscillator.zero_point_length()
    }

    /// `rho_qubit (x) rho_osc`.
    pub fn product(qubit: &CMatrix, osc: &DensityMatrix, oscillator: Oscillator, nbar: f64) -> Result<Self> {
        let n = osc.dim();
        let q = DensityMatrix::from_matrix(Basis::Qubit, qubit.clone())?;
        let rho = DensityMatrix::from_matrix_unchecked(Basis::QubitFock(n), q.matrix().kronecker(osc.matrix()))?;
        Ok(Self { rho, oscillator, nbar })
    }

    /// The qubit-conditionally displaced thermal state
    /// `1/2 sum_ij |i><j| (x) D_i rho_T D_j^dagger` with `beta_L = beta`,
    /// `beta_R = -beta`.
    pub fn boosted(beta: C64, nbar: f64, n_fock: usize, oscillator: Oscillator) -> Result<Self> {
        let thermal = thermal_state(nbar, n_fock)?;
        let d = [displacement_operator(beta, n_fock)?, displacement_operator(-beta, n_fock)?];
        let mut m = CMatrix::zeros(2 * n_fock, 2 * n_fock);
        for i in 0..2 {
            for j in 0..2 {
                let block = &d[i] * thermal.matrix() * d[j].adjoint() * C64::new(0.5, 0.0);
                m.view_mut((i * n_fock, j * n_fock), (n_fock, n_fock)).copy_from(&block);
            }
        }
        let rho = DensityMatrix::from_matrix(Basis::QubitFock(n_fock), m)?;
        Ok(Self { rho, oscillator, nbar })
    }

    /// `<sigma_-> = tr(rho |L><R|)`.
    pub fn sigma_minus(&self) -> C64 {
        sigma_minus(&self.rho)
    }
}

/// `tr(rho (|L><R| (x) 1))` for a qubit-major state.
pub fn sigma_minus(rho: &DensityMatrix) -> C64 {
    let n = rho.dim() / 2;
    let m = rho.matrix();
    (0..n).map(|k| m[(n + k, k)]).sum()
}

/// `tr(rho (|L><R| (x) A))` for an operator `A` on the second factor.
pub fn sigma_minus_with(rho: &DensityMatrix, a: &CMatrix) -> C64 {
    let n = rho.dim() / 2;
    let block = rho.matrix().view((n, 0), (n, n));
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += block[(i, j)] * a[(j, i)];
        }
    }
    acc
}
