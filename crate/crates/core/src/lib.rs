//! Gauge-fixed SU(2) lattice Hamiltonian in the sequestered mixed angular basis.

pub mod angular_ops;
pub mod basis;
pub mod checks;
pub mod coeffs;
pub mod error;
pub mod frames;
pub mod lattice;
pub mod numerics;
pub mod hamiltonian;
pub mod oracle;
pub mod radial;
pub mod resources;
pub mod sparse;

pub use basis::{AngularState, BasisIndex, RodQn, Sector, Truncation};
pub use coeffs::Parity;
pub use error::{Error, Result};
