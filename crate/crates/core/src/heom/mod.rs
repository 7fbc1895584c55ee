//! High-temperature hierarchical equations of motion for per-site
//! Drude–Lorentz baths, truncated with a Liouvillian-only deepest tier.

mod expm;
mod operators;
mod propagate;
mod system;

pub use expm::expm;
pub use operators::{liouvillian_apply, phi_apply, theta_apply, SiteBath};
pub use propagate::{evolve_exact, propagate, propagate_expm, propagate_rk4, Evolution, HeomConfig, Integrator};
pub use system::{HeomSystem, HierarchyState, SparseGenerator};
