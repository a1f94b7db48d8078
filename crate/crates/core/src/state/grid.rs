//! Uniform position grids and wavefunctions sampled on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::C64;

/// A uniform one-dimensional grid `x_min, x_min + dx, ..., x_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n_points}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!("empty interval [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid of `n_points` with the given spacing, centred on `center`.
    pub fn centered(center: f64, spacing: f64, n_points: usize) -> Result<Self> {
        let half = 0.5 * spacing * (n_points as f64 - 1.0);
        Self::new(center - half, center + half, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points as f64 - 1.0)
    }

    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Index of `x` if it coincides with a grid point (to 1e-6 of a spacing).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let dx = self.spacing();
        let f = (x - self.x_min) / dx;
        let k = f.round();
        if k < 0.0 || k >= self.n_points as f64 || (f - k).abs() > 1e-6 {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Angular wavenumbers of the discrete Fourier modes, in FFT order.
    /// The Nyquist mode of an even grid is reported as zero so that the
    /// first-derivative operator stays Hermitian.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let period = n as f64 * self.spacing();
        (0..n)
            .map(|k| {
                let signed = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
                if n % 2 == 0 && k == n / 2 {
                    0.0
                } else {
                    2.0 * PI * signed / period
                }
            })
            .collect()
    }

    /// Spectral momentum operator `p = -i d/dx` as a dense Hermitian matrix in the
    /// orthonormal grid basis.
    pub fn momentum_matrix(&self) -> CMatrix {
        let n = self.n_points;
        let dx = self.spacing();
        let ks = self.wavenumbers();
        // Circulant: entry depends only on the index offset.
        let offsets: Vec<C64> = (0..n)
            .map(|m| {
                let s: C64 = ks
                    .iter()
                    .map(|&k| C64::from_polar(k, k * m as f64 * dx))
                    .sum();
                s / n as f64
            })
            .collect();
        CMatrix::from_fn(n, n, |j, l| {
            if j >= l {
                offsets[j - l]
            } else {
                offsets[j + n - l]
            }
        })
    }

    /// Kinetic energy `p^2 / 2m` built from the same discrete momentum.
    pub fn kinetic_matrix(&self, mass: f64) -> CMatrix {
        let p = self.momentum_matrix();
        (&p * &p) / C64::new(2.0 * mass, 0.0)
    }
}

/// A pure state sampled on one grid, or on the product of two grids
/// (particle 1 index major). Amplitudes carry continuum normalisation:
/// `sum |psi|^2 dV = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grids: Vec<GridSpec>,
    amplitudes: CVector,
}

impl WaveFunction {
    pub fn new(grids: Vec<GridSpec>, amplitudes: CVector) -> Result<Self> {
        let dim: usize = grids.iter().map(GridSpec::len).product();
        if grids.is_empty() || grids.len() > 2 {
            return Err(Error::BasisMismatch(format!(
                "wavefunctions live on one or two grids, got {}",
                grids.len()
            )));
        }
        if amplitudes.len() != dim {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a {dim}-point grid",
                amplitudes.len()
            )));
        }
        Ok(Self { grids, amplitudes })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        let amps = CVector::from_iterator(grid.len(), grid.points().into_iter().map(f));
        Self { grids: vec![grid], amplitudes: amps }
    }

    /// Normalised Gaussian packet with position standard deviation `width`
    /// and mean momentum `k0`.
    pub fn gaussian(grid: GridSpec, x0: f64, width: f64, k0: f64) -> Result<Self> {
        Self::from_fn(grid, |x| {
            let env = (-(x - x0).powi(2) / (4.0 * width * width)).exp();
            C64::from_polar(env, k0 * (x - x0))
        })
        .normalize()
    }

    /// Product state `psi_1 (x) psi_2` on two single-particle grids.
    pub fn product(a: &WaveFunction, b: &WaveFunction) -> Result<Self> {
        if a.grids.len() != 1 || b.grids.len() != 1 {
            return Err(Error::BasisMismatch("product needs two single-particle states".into()));
        }
        let amps = a.amplitudes.kronecker(&b.amplitudes);
        Ok(Self { grids: vec![a.grids[0], b.grids[0]], amplitudes: amps })
    }

    pub fn grids(&self) -> &[GridSpec] {
        &self.grids
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// Volume element of the grid measure.
    pub fn cell_volume(&self) -> f64 {
        self.grids.iter().map(GridSpec::spacing).product()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared() * self.cell_volume()
    }

    pub fn normalize(self) -> Result<Self> {
        let n2 = self.norm_squared();
        if !(n2.sqrt() >= 1e-14) {
            return Err(Error::ZeroState(n2.sqrt()));
        }
        let s = C64::new(1.0 / n2.sqrt(), 0.0);
        Ok(Self { grids: self.grids, amplitudes: self.amplitudes * s })
    }

    /// Unit vector in the orthonormal grid basis (`psi * sqrt(dV)`).
    pub fn to_unit_vector(&self) -> CVector {
        &self.amplitudes * C64::new(self.cell_volume().sqrt(), 0.0)
    }

    /// Inverse of [`Self::to_unit_vector`].
    pub fn from_unit_vector(grids: Vec<GridSpec>, v: CVector) -> Result<Self> {
        let dv: f64 = grids.iter().map(GridSpec::spacing).product();
        Self::new(grids, v * C64::new(1.0 / dv.sqrt(), 0.0))
    }

    /// Position probability per grid cell (sums to one for a normalised state).
    pub fn cell_probabilities(&self) -> Vec<f64> {
        let dv = self.cell_volume();
        self.amplitudes.iter().map(|a| a.norm_sqr() * dv).collect()
    }
}
