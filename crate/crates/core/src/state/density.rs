//! Density matrices on grid, qubit and Fock bases, with the bipartite tools
//! used for entanglement monitoring.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::grid::{GridSpec, WaveFunction};
use crate::C64;

/// Tolerances enforced by [`DensityMatrix::from_matrix`].
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// One or two position grids (particle 1 major).
    Grid(Vec<GridSpec>),
    /// Two-level system, `|L> = 0`, `|R> = 1`.
    Qubit,
    /// Truncated harmonic-oscillator Fock space.
    Fock(usize),
    /// Qubit (x) Fock, qubit index major.
    QubitFock(usize),
    /// Anything else: just the factor dimensions.
    Generic(Vec<usize>),
}

impl Basis {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Basis::Grid(g) => g.iter().map(GridSpec::len).collect(),
            Basis::Qubit => vec![2],
            Basis::Fock(n) => vec![*n],
            Basis::QubitFock(n) => vec![2, *n],
            Basis::Generic(d) => d.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Split a bipartite basis into its two factors.
    pub fn factors(&self) -> Result<(Basis, Basis)> {
        match self {
            Basis::Grid(g) if g.len() == 2 => Ok((Basis::Grid(vec![g[0]]), Basis::Grid(vec![g[1]]))),
            Basis::QubitFock(n) => Ok((Basis::Qubit, Basis::Fock(*n))),
            Basis::Generic(d) if d.len() == 2 => {
                Ok((Basis::Generic(vec![d[0]]), Basis::Generic(vec![d[1]])))
            }
            other => Err(Error::BasisMismatch(format!("{other:?} is not bipartite"))),
        }
    }

    pub fn product(a: &Basis, b: &Basis) -> Basis {
        match (a, b) {
            (Basis::Grid(x), Basis::Grid(y)) if x.len() == 1 && y.len() == 1 => {
                Basis::Grid(vec![x[0], y[0]])
            }
            (Basis::Qubit, Basis::Fock(n)) => Basis::QubitFock(*n),
            _ => Basis::Generic(vec![a.dim(), b.dim()]),
        }
    }
}

/// Which factor of a bipartite space an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// A density matrix in an orthonormal basis. Grid bases use the unit vectors
/// `sqrt(dV) |x_k>`, so diagonal entries are cell probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: Basis,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace, positive within tolerance.
    pub fn from_matrix(basis: Basis, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(basis, matrix)?;
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Shape-checked but otherwise unvalidated (used for intermediate
    /// integrator states and derivatives).
    pub fn from_matrix_unchecked(basis: Basis, matrix: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch(format!(
                "{}x{} matrix for a {d}-dimensional basis",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { basis, matrix })
    }

    pub fn from_pure(psi: &WaveFunction) -> Self {
        let v = psi.to_unit_vector();
        Self { basis: Basis::Grid(psi.grids().to_vec()), matrix: &v * v.adjoint() }
    }

    pub fn from_vector(basis: Basis, v: &linalg::CVector) -> Result<Self> {
        let n = v.norm();
        if n < 1e-14 {
            return Err(Error::ZeroState(n));
        }
        let u = v / C64::new(n, 0.0);
        Self::from_matrix(basis, &u * u.adjoint())
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(basis: Basis) -> Self {
        let d = basis.dim();
        Self { basis, matrix: CMatrix::identity(d, d) / C64::new(d as f64, 0.0) }
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.matrix);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(Error::PositivityLost { time: f64::NAN, eigenvalue: min });
        }
        Ok(())
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::eigvalsh(&self.matrix).min()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        // tr(rho A) without forming the product.
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            basis: Basis::product(&self.basis, &other.basis),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Trace out `traced`, returning the state of the other factor.
    pub fn partial_trace(&self, traced: Subsystem) -> Result<DensityMatrix> {
        let (ba, bb) = self.basis.factors()?;
        let (da, db) = (ba.dim(), bb.dim());
        let m = &self.matrix;
        match traced {
            Subsystem::Second => {
                let out = CMatrix::from_fn(da, da, |i, j| {
                    (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
                });
                Ok(DensityMatrix { basis: ba, matrix: out })
            }
            Subsystem::First => {
                let out = CMatrix::from_fn(db, db, |i, j| {
                    (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
                });
                Ok(DensityMatrix { basis: bb, matrix: out })
            }
        }
    }

    /// Partial transpose on the second factor.
    pub fn partial_transpose(&self) -> Result<CMatrix> {
        let (ba, bb) = self.basis.factors()?;
        let (da, db) = (ba.dim(), bb.dim());
        let m = &self.matrix;
        Ok(CMatrix::from_fn(da * db, da * db, |r, c| {
            let (i, k) = (r / db, r % db);
            let (j, l) = (c / db, c % db);
            m[(i * db + l, j * db + k)]
        }))
    }

    /// Logarithmic negativity `log2 || rho^{T_B} ||_1` (zero on PPT states).
    pub fn log_negativity(&self) -> Result<f64> {
        let pt = self.partial_transpose()?;
        let trace_norm: f64 = linalg::eigvalsh(&pt).iter().map(|v| v.abs()).sum();
        Ok(trace_norm.log2().max(0.0))
    }

    /// Position probabilities per cell of a single-grid state.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).collect()
    }

    /// Trace distance `1/2 ||a - b||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.basis.dim() != other.basis.dim() {
            return Err(Error::BasisMismatch("trace distance between different spaces".into()));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * linalg::eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>())
    }
}
