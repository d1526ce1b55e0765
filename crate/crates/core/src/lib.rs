//! Tree-unitary quantum circuits on Cayley trees.
//!
//! Gate predicates and constructions, alternating-projection generation,
//! tree geometry, correlation and OTOC channels, stabilizer entanglement
//! simulation, dense brute-force oracles and light-cone geometry of gate
//! graphs.

pub mod error;
pub mod gate;
pub mod hyperbolicity;
pub mod channels;
pub mod generation;
pub mod linalg;
pub mod oracle;
pub mod pauli;
pub mod stabilizer;
pub mod tree;

pub use error::{Error, Result};
pub use gate::{Gate, GateAssignment, KimParams, PredicateReport};
pub use linalg::{CMat, C64};
pub use pauli::{OperatorBasis, OperatorVector};
