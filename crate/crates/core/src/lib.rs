//! Simulation of monitored quantum circuits.
//!
//! Two backends evolve pure-state trajectories: a matrix-product-state engine
//! for the non-Clifford self-dual hybrid circuit ([`mps`]) and a bit-packed
//! stabilizer tableau for Clifford circuits ([`stabilizer`]). On top of them
//! sit the entanglement, stabilizer Rényi (magic) and participation entropy
//! estimators, the circuit ensembles ([`circuits`]), and the trajectory and
//! scaling-analysis harness ([`harness`]). [`oracle`] is a dense state-vector
//! reference used for validation.

pub mod circuits;
pub mod entropy;
pub mod gates;
pub mod harness;
pub mod mps;
pub mod oracle;
pub mod pauli;
pub mod stabilizer;

pub use entropy::{mutual_information, renyi_entropy, EntropyError, EntropyValue, ProbDist, RenyiOrder};
pub use mps::{MpsError, MpsState, TruncationConfig};
pub use oracle::{Basis, DenseState};
pub use pauli::{Pauli, PauliString};
