//! Small dense linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigen-decomposition of a Hermitian matrix. Only the lower triangle is read.
pub fn eigh(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn eigvalsh(m: &CMatrix) -> DVector<f64> {
    SymmetricEigen::new(m.clone()).eigenvalues
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let phases = vals.map(|e| C64::from_polar(1.0, -e * t));
    scale_columns(&vecs, &phases) * vecs.adjoint()
}

/// `f(H)` for Hermitian `H` and a real scalar function.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let fv = vals.map(f);
    scale_columns(&vecs, &fv) * vecs.adjoint()
}

pub fn scale_columns(m: &CMatrix, s: &CVector) -> CMatrix {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= s[j];
    }
    out
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest entry of `|m - m^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of an arbitrary square matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    let mm = m.adjoint() * m;
    hermitian_norm(&mm).sqrt()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag(v: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(v))
}

pub fn real_diag(v: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
}
