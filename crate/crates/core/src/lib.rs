pub mod error;
pub mod fibration;
pub mod kummer;
pub mod lattice;
pub mod linalg;
pub mod monodromy;
pub mod scenario;
pub mod torsion;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{make_standard, Lattice, LatticeVector, StandardLattice, Sublattice};
