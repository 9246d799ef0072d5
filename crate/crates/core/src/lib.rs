//! Exact ground-state entanglement entropies of quadratic bosonic lattice
//! Hamiltonians, with emphasis on dispersions that vanish on extended Bose
//! surfaces.

pub mod acceptance;
pub mod analysis;
pub mod chains;
pub mod error;
pub mod gaussian;
pub mod hamiltonian;
pub mod kspace;
mod linalg;
pub mod partition;
pub mod transform;

pub use analysis::{ScalingFit, ScalingModel, ScalingPoint, SsaReport};
pub use chains::{ChainDecomposition, ChainOptions};
pub use error::{Error, Result};
pub use gaussian::{EntropyResult, GroundState, Method};
pub use hamiltonian::CouplingMatrix;
pub use kspace::{Dispersion, LatticeGeometry};
pub use partition::Region;
