//! Finite semimodular lattices, their geometries, and the lowering
//! construction that moves a join-irreducible element down while keeping the
//! lattice semimodular and its length unchanged.
//!
//! Elements are plain indices. A [`Poset`] stores its order as bitset rows,
//! a [`FiniteLattice`] adds meets and joins, and a [`Geometry`] is a family
//! of down-sets (flats) of a ground poset. [`lowering`] builds one extension
//! step two independent ways; [`extensions`] iterates it.

pub mod corpus;
pub mod enumeration;
pub mod error;
pub mod extensions;
pub mod families;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod lowering;
pub mod poset;

pub use error::{Error, Result};
pub use extensions::ExtensionTrace;
pub use geometry::{AxiomReport, Geometry};
pub use lattice::{FiniteLattice, JirPoset};
pub use lowering::{LoweringResult, Predicate};
pub use poset::{ChainPartition, Poset, Subset};
