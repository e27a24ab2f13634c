//! Davies-generator Gibbs samplers for the 1D ferromagnetic Ising ring
//! and the 2D toric code.
//!
//! The crate constructs the samplers exactly (bit-mask Pauli algebra, no
//! generic eigendecompositions on the hot path), decomposes them into
//! logical/syndrome sectors, and certifies spectral-gap and mixing-time
//! behaviour at desk scale:
//!
//! - [`pauli`], [`sparse`]: exact operator algebra.
//! - [`lattice`], [`model`]: ring/torus geometry, snake and comb layouts,
//!   stabilizer Hamiltonians, ground states, excitation paths.
//! - [`gibbs`], [`bohr`], [`davies`]: thermal states, Bohr-frequency
//!   decompositions (stabilizer-projection and eigendecomposition routes),
//!   Lindbladian assembly, GNS inner product, master-Hamiltonian gauge.
//! - [`sector`]: logical/syndrome splits, flip-sector bases, the exact
//!   4x4 local blocks and the effective chain/comb matrices.
//! - [`stair`], [`eigen`]: the diagonally weighted stair-graph Laplacian
//!   and the dense/iterative spectral engine.
//! - [`dynamics`]: Lindblad time evolution and divergence traces.
//! - [`jobs`]: batch commands behind the `stabgibbs` CLI.

pub mod bohr;
pub mod davies;
pub mod dynamics;
pub mod eigen;
pub mod gibbs;
pub mod jobs;
pub mod lattice;
pub mod model;
pub mod pauli;
pub mod sector;
pub mod sparse;
pub mod stair;

pub use bohr::{bohr_decompose_generic, bohr_decompose_stabilizer, BohrComponent};
pub use davies::{
    davies_lindbladian, dephasing_lindbladian, gns_inner, master_hamiltonian, Gauge, Superoperator,
};
pub use dynamics::{chi2_divergence, evolve, mixing_trace, trace_distance, DensityState, EvolutionTrace};
pub use eigen::{min_eigenvalue, spectral_gap, SpectralResult};
pub use gibbs::{gibbs_state, glauber_rate, GibbsModel};
pub use lattice::{RingLattice, TorusLattice};
pub use model::{build_ising_hamiltonian, build_toric_hamiltonian, StabilizerModel};
pub use pauli::PauliString;
pub use sparse::SparseOperator;
pub use stair::StairGraph;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("operator is not hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator has imaginary entries (max {0:.3e}) where a real matrix is required")]
    NotReal(f64),
    #[error("GNS detailed balance violated (deviation {0:.3e})")]
    DetailedBalance(f64),
    #[error("Bohr clustering failure: {0}")]
    Clustering(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
