use thiserror::Error;

use crate::extensions::ExtensionTrace;
use crate::geometry::AxiomReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for ground set of size {size}")]
    Index { index: usize, size: usize },

    #[error("order relation has a cycle through {0} and {1}")]
    Cycle(usize, usize),

    #[error("not a chain: {0} and {1} are incomparable")]
    NotAChain(usize, usize),

    #[error("not a lattice: pair ({x}, {y}) {reason}")]
    NotALattice { x: usize, y: usize, reason: String },

    #[error("lattice is not semimodular: {0}")]
    NotSemimodular(String),

    #[error("lattice is not distributive")]
    NotDistributive,

    #[error("geometry axioms fail: {0}")]
    Axiom(Box<AxiomReport>),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("not a chain partition: {0}")]
    NotAPartition(String),

    #[error("size limit {limit} exceeded (next lattice would have {size} elements) after {} steps", .partial.steps.len())]
    SizeLimit {
        limit: usize,
        size: usize,
        partial: Box<ExtensionTrace>,
    },

    #[error("search bound exceeded: need up to {needed} elements, bound is {bound}")]
    BoundExceeded { needed: usize, bound: usize },

    #[error("oracle cap exceeded: {size} elements, cap is {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
