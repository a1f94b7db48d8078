//! State and operator algebra: position grids, density matrices and the
//! qubit (x) Fock space.

pub mod density;
pub mod fock;
pub mod grid;

pub use density::{Basis, DensityMatrix, Subsystem};
pub use fock::{
    annihilation, default_cutoff, displacement_operator, number_operator, position_operator, thermal_state,
    Oscillator, QubitOscillatorState,
};
pub use grid::{GridSpec, WaveFunction};
