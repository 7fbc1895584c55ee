//! Excitation-energy-transfer dynamics of linear excitonic chains with the
//! high-temperature hierarchical equations of motion, and a deterministic
//! factory for trajectory/Hamiltonian datasets built on top of it.

pub mod dataset;
pub mod error;
pub mod heom;
pub mod hierarchy;
pub mod model;
pub mod units;

pub use error::{Error, Result};
pub use heom::{propagate, propagate_expm, propagate_rk4, Evolution, HeomConfig, HeomSystem, HierarchyState, Integrator};
pub use hierarchy::{enumerate_hierarchy, Hierarchy, HierarchyIndex};
pub use model::{build_hamiltonian_matrix, spectral_density, BathSpec, DensityMatrix, SystemHamiltonian};
pub use units::{thermal_energy, UnitSystem};
