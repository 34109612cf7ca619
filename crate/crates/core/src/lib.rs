//! Polynomial SLOCC invariants of pure multipartite quantum states.
//!
//! The crate computes the Wong-Christensen N-tangle (both the literal
//! epsilon-contraction sum and a fast Pauli-form path), the B-contraction
//! invariants, the Luque-Thibon determinants L, M, N of four-qubit states,
//! and the reshaped-coefficient-matrix determinant for any equal-dimension
//! bipartition, together with the G-concurrence derived from it.
//!
//! On top of the invariants sit a two-outcome local POVM simulator and a
//! scalar analysis of the monotonicity inequality for homogeneous invariant
//! functions: degree eta <= 4 never increases on average under local
//! operations, while every eta > 4 admits an explicit violating family.
//! The [`harness`] module packages randomized certification suites for all
//! of these identities with reproducible seeding.
//!
//! Amplitude ordering is big-endian throughout: party 1 is the most
//! significant digit of the flat index. Party indices in the API are
//! 0-based; the CLI name syntax (`b:1,2`, `det:1`) is 1-based.
//!
//! ```
//! use qtangle::{bell, det_invariant, g_concurrence, ghz, n_tangle, w_state};
//!
//! // the three-tangle separates the GHZ and W classes
//! assert!((n_tangle(&ghz(3)?)? - 1.0).abs() < 1e-12);
//! assert!(n_tangle(&w_state(3)?)? < 1e-12);
//!
//! // Bell pair: reshaped determinant 1/2, concurrence 2|nu| = 1
//! let nu = det_invariant(&bell(), &[0])?;
//! assert!((nu.re - 0.5).abs() < 1e-14);
//! assert!((g_concurrence(&bell(), &[0])? - 1.0).abs() < 1e-14);
//! # Ok::<(), qtangle::Error>(())
//! ```

pub mod harness;
pub mod invariants;
pub mod matrix;
pub mod monotone;
pub mod slocc;
pub mod state;

pub use invariants::{
    b_invariant, bilinear_form, det_invariant, g_concurrence, lmn_from_b, luque_thibon,
    n_concurrence, n_tangle, n_tangle_direct, Invariant, InvariantValue, Lmn,
};
pub use matrix::CMat;
pub use monotone::{
    construct_violation, convexity_gap, f_eta, inequality_rhs, sweep, sweep_serial,
    violation_ratio, write_sweep_csv, SweepRecord, ViolationReport,
};
pub use slocc::{
    apply_povm, average_after_povm, derive_seed, make_povm, random_povm, random_sl, random_sl2,
    random_unitary, random_unitary2, PovmOutcome, PovmPair,
};
pub use state::{
    basis_state, bell, ghz, random_state, uniform_product, w_state, DensityMatrix, PureState,
};

/// Errors produced by state construction, invariant evaluation and the
/// measurement machinery.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("amplitude vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("local dimensions must be a nonempty list of positive integers")]
    BadDims,
    #[error("cannot normalize a zero state vector")]
    ZeroNorm,
    #[error("non-finite amplitude at flat index {0}")]
    NonFinite(usize),
    #[error("operation requires qubit parties, found local dimension {0}")]
    NotQubits(usize),
    #[error("party index {party} out of range for {parties} parties")]
    PartyOutOfRange { party: usize, parties: usize },
    #[error("expected {expected} local operators, got {actual}")]
    OperatorCount { expected: usize, actual: usize },
    #[error("operator for party {party} must be {dim}x{dim}")]
    OperatorShape { party: usize, dim: usize },
    #[error("keep set must be a nonempty proper subset of the parties")]
    BadKeepSet,
    #[error("bipartition has dimensions {left}x{right}; equal dimensions required")]
    UnequalBipartition { left: usize, right: usize },
    #[error("{0} requires at least 2 parties")]
    TooFewParties(&'static str),
    #[error("{n} qubits exceeds the brute-force guard (max {max})")]
    TooManyQubits { n: usize, max: usize },
    #[error("invalid contraction positions: {0}")]
    BadContractions(String),
    #[error("operation requires exactly 4 qubits, got {0} parties")]
    NotFourQubits(usize),
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("state must be normalized, got squared norm {0}")]
    NotNormalized(f64),
    #[error("POVM factor {0} is not unitary")]
    NotUnitary(&'static str),
    #[error("inequality right side undefined at (a,b) = (0,0) and (1,1)")]
    DegenerateCorner,
    #[error("invariant vanishes on the constructed state; ratio undefined")]
    VanishingInvariant,
    #[error("unknown invariant name '{0}'")]
    UnknownInvariant(String),
    #[error("invariant '{name}' not applicable: {reason}")]
    NotApplicable { name: String, reason: String },
    #[error("state file: {0}")]
    StateFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Map `f` over `0..n`, preserving index order in the output.
///
/// Runs on the rayon pool when the `parallel` feature is enabled. Callers
/// must keep `f` free of shared mutable state so that results do not depend
/// on the schedule.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
