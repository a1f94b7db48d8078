//! Gaussian position measurements and the two-outcome limit used for the
//! interferometer qubit.
//!
//! Outcomes are the grid points themselves, each carrying the measure `dx`,
//! so completeness reads `sum_x P(x)^2 dx = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::state::{Basis, DensityMatrix, GridSpec, WaveFunction};
use crate::C64;

/// Number of standard deviations a state must keep away from the grid edges.
pub const EDGE_MARGIN_SIGMAS: f64 = 6.0;
/// Largest amplitude tolerated inside the edge margin.
pub const EDGE_AMPLITUDE_TOL: f64 = 1e-12;

/// Gaussian position POVM `P(x) = (2 pi sigma^2)^(-1/4) exp(-(x - x_hat)^2 / 4 sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPovm {
    sigma: f64,
    grid: GridSpec,
}

impl GaussianPovm {
    /// Requires the grid to resolve the measurement: `dx <= sigma / 4`.
    pub fn new(sigma: f64, grid: GridSpec) -> Result<Self> {
        crate::error::require_positive("sigma", sigma)?;
        if grid.spacing() > sigma / 4.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "spacing {} does not resolve sigma = {sigma} (need dx <= sigma/4)",
                grid.spacing()
            )));
        }
        Ok(Self { sigma, grid })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Kernel `P` as a function of the offset `x - x_hat`.
    pub fn amplitude(&self, offset: f64) -> f64 {
        (2.0 * PI * self.sigma * self.sigma).powf(-0.25) * (-offset * offset / (4.0 * self.sigma * self.sigma)).exp()
    }

    /// `P(x)^2` as a function of the offset: a normal density of variance `sigma^2`.
    pub fn weight(&self, offset: f64) -> f64 {
        let a = self.amplitude(offset);
        a * a
    }

    /// Derivative of the kernel with respect to `x_hat`.
    pub fn amplitude_gradient(&self, offset: f64) -> f64 {
        self.amplitude(offset) * offset / (2.0 * self.sigma * self.sigma)
    }

    /// Diagonal of `P(x)` in the grid basis for an outcome on the grid.
    pub fn kraus_at(&self, x: f64) -> Result<Vec<f64>> {
        self.grid.index_of(x).ok_or(Error::OffGrid(x))?;
        Ok(self.grid.points().iter().map(|&xk| self.amplitude(x - xk)).collect())
    }

    pub fn kraus_matrix_at(&self, x: f64) -> Result<CMatrix> {
        Ok(crate::linalg::real_diag(&self.kraus_at(x)?))
    }

    /// `max_k |sum_x P(x)^2 dx - 1|` over grid points at least
    /// `EDGE_MARGIN_SIGMAS * sigma` from the edges (the discretised identity is
    /// diagonal, so this is its operator-norm defect on the interior).
    pub fn completeness_defect(&self) -> f64 {
        let pts = self.grid.points();
        let dx = self.grid.spacing();
        let margin = EDGE_MARGIN_SIGMAS * self.sigma;
        pts.iter()
            .filter(|&&x| x - self.grid.x_min() >= margin && self.grid.x_max() - x >= margin)
            .map(|&xk| {
                let s: f64 = pts.iter().map(|&x| self.weight(x - xk)).sum::<f64>() * dx;
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Outcome probabilities `p(x_j) dx` given cell probabilities of the
    /// measured particle.
    pub fn distribution_from_cells(&self, cells: &[f64]) -> Vec<f64> {
        let pts = self.grid.points();
        let dx = self.grid.spacing();
        pts.iter()
            .map(|&x| dx * cells.iter().zip(&pts).map(|(p, &xk)| p * self.weight(x - xk)).sum::<f64>())
            .collect()
    }

    /// Outcome distribution for a state of one or two particles.
    pub fn outcome_distribution(&self, state: &impl PositionMarginal, particle: usize) -> Result<Vec<f64>> {
        let (grid, cells) = state.position_marginal(particle)?;
        if grid != self.grid {
            return Err(Error::BasisMismatch("state grid differs from measurement grid".into()));
        }
        Ok(self.distribution_from_cells(&cells))
    }

    /// Checks that the marginal of `particle` vanishes near the grid edges.
    pub fn check_support(&self, state: &impl PositionMarginal, particle: usize) -> Result<()> {
        let (grid, cells) = state.position_marginal(particle)?;
        let margin = EDGE_MARGIN_SIGMAS * self.sigma;
        for (x, p) in grid.points().iter().zip(&cells) {
            let inside = x - grid.x_min() >= margin && grid.x_max() - x >= margin;
            if !inside && p.sqrt() > EDGE_AMPLITUDE_TOL {
                return Err(Error::Boundary(format!(
                    "amplitude {:e} at x = {x} within {EDGE_MARGIN_SIGMAS} sigma of the grid edge",
                    p.sqrt()
                )));
            }
        }
        Ok(())
    }

    /// Applies outcome `x` to particle `particle` of a wavefunction. Returns the
    /// renormalised post-measurement state and the probability density
    /// `<P(x)^2>` (the pre-normalisation weight).
    pub fn apply_to_wavefunction(&self, psi: &WaveFunction, particle: usize, x: f64) -> Result<(WaveFunction, f64)> {
        let k = self.kraus_at(x)?;
        let scaled = scale_along(psi.amplitudes(), psi.grids(), particle, &k)?;
        let weight = scaled.norm_squared() * psi.cell_volume();
        if weight < 1e-14 {
            return Err(Error::ZeroProbability(weight));
        }
        let out = WaveFunction::new(psi.grids().to_vec(), scaled)?.normalize()?;
        Ok((out, weight))
    }

    /// Same as [`Self::apply_to_wavefunction`] for a density matrix.
    pub fn apply_to_density(&self, rho: &DensityMatrix, particle: usize, x: f64) -> Result<(DensityMatrix, f64)> {
        let grids = match rho.basis() {
            Basis::Grid(g) => g.clone(),
            other => return Err(Error::BasisMismatch(format!("{other:?} is not a grid basis"))),
        };
        let k = self.kraus_at(x)?;
        let ones = CVector::from_element(rho.dim(), C64::new(1.0, 0.0));
        let d = scale_along(&ones, &grids, particle, &k)?;
        let m = CMatrix::from_fn(rho.dim(), rho.dim(), |i, j| d[i] * rho.matrix()[(i, j)] * d[j]);
        let weight = m.trace().re;
        if weight < 1e-14 {
            return Err(Error::ZeroProbability(weight));
        }
        let out = DensityMatrix::from_matrix_unchecked(rho.basis().clone(), m / C64::new(weight, 0.0))?;
        Ok((out, weight))
    }
}

/// Multiplies `v` elementwise by `factor` acting on the axis of `particle`.
pub(crate) fn scale_along(v: &CVector, grids: &[GridSpec], particle: usize, factor: &[f64]) -> Result<CVector> {
    if particle >= grids.len() {
        return Err(Error::BasisMismatch(format!("no particle {particle} on a {}-grid state", grids.len())));
    }
    let n2 = if grids.len() == 2 { grids[1].len() } else { 1 };
    Ok(CVector::from_fn(v.len(), |idx, _| {
        let k = if particle == 0 { idx / n2 } else { idx % n2 };
        v[idx] * factor[k]
    }))
}

/// Anything with a position distribution per particle.
pub trait PositionMarginal {
    /// Grid of `particle` and its cell probabilities.
    fn position_marginal(&self, particle: usize) -> Result<(GridSpec, Vec<f64>)>;
}

fn marginal(grids: &[GridSpec], diag: &[f64], particle: usize) -> Result<(GridSpec, Vec<f64>)> {
    let g = *grids
        .get(particle)
        .ok_or_else(|| Error::BasisMismatch(format!("no particle {particle}")))?;
    let n2 = if grids.len() == 2 { grids[1].len() } else { 1 };
    let mut out = vec![0.0; g.len()];
    for (idx, p) in diag.iter().enumerate() {
        let k = if grids.len() == 1 {
            idx
        } else if particle == 0 {
            idx / n2
        } else {
            idx % n2
        };
        out[k] += p;
    }
    Ok((g, out))
}

impl PositionMarginal for WaveFunction {
    fn position_marginal(&self, particle: usize) -> Result<(GridSpec, Vec<f64>)> {
        marginal(self.grids(), &self.cell_probabilities(), particle)
    }
}

impl PositionMarginal for DensityMatrix {
    fn position_marginal(&self, particle: usize) -> Result<(GridSpec, Vec<f64>)> {
        match self.basis() {
            Basis::Grid(g) => marginal(g, &self.diagonal(), particle),
            other => Err(Error::BasisMismatch(format!("{other:?} has no position grid"))),
        }
    }
}

/// Two-outcome limit `P_L = |L><L| / sqrt 2`, `P_R = |R><R| / sqrt 2`.
///
/// Each outcome carries measure [`TwoOutcomePovm::OUTCOME_MEASURE`] (the
/// discrete analogue of `dx`), which makes `sum_i w P_i^dagger P_i = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwoOutcomePovm;

impl TwoOutcomePovm {
    pub const OUTCOME_MEASURE: f64 = 2.0;

    pub fn operators(&self) -> [CMatrix; 2] {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        [
            CMatrix::from_row_slice(2, 2, &[s, z, z, z]),
            CMatrix::from_row_slice(2, 2, &[z, z, z, s]),
        ]
    }

    /// `sum_i w P_i^dagger P_i`.
    pub fn completeness(&self) -> CMatrix {
        self.operators()
            .iter()
            .map(|p| p.adjoint() * p * C64::new(Self::OUTCOME_MEASURE, 0.0))
            .fold(CMatrix::zeros(2, 2), |a, b| a + b)
    }

    /// Unnormalised weights `<P_i^dagger P_i>` for a qubit state.
    pub fn weights(&self, qubit: &CMatrix) -> [f64; 2] {
        let ops = self.operators();
        [0, 1].map(|i| (qubit * ops[i].adjoint() * &ops[i]).trace().re)
    }

    /// Outcome probabilities (weights times the outcome measure).
    pub fn probabilities(&self, qubit: &CMatrix) -> [f64; 2] {
        self.weights(qubit).map(|w| w * Self::OUTCOME_MEASURE)
    }
}
