//! Exact spin-½ dynamics on small systems: Hamiltonians from explicit
//! models, Heisenberg evolution and commutator norms.

mod norm;
mod operator;
mod scan;
mod spectrum;

pub use norm::{commutator_norm, pauli_commutator_norm, spectral_norm};
pub use operator::{DenseOperator, Pauli};
pub use scan::{fit_velocity, light_cone_scan, CommutatorTrace, LightConeScan, ScanConfig};
pub use spectrum::{build_hamiltonian, evolve, Evolver, Spectrum, MAX_SITES};
