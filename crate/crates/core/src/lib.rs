//! Indefinite inner product spaces over finite-dimensional complex vector
//! spaces: Gram forms, canonical decompositions, Krein adjoints, definitizable
//! pencils and uncertainty relations with a fundamental symmetry.

pub mod error;
pub mod form;
pub mod geneig;
pub mod json;
pub mod krein;
pub mod linalg;
pub mod ops;
pub mod random;
pub mod sweep;
pub mod tol;
pub mod uncertainty;
pub mod wavepacket;

pub use error::{Error, Result};
pub use form::{GramForm, VectorClass};
pub use geneig::{solve_pencil, GenEigReport, GeneralizedEigenPair};
pub use krein::{decompose_from_basis, decompose_spectral, CanonicalDecomposition, MajorantMetric, SymmetryReport};
pub use linalg::{Matrix, C64};
pub use ops::{krein_adjoint, KreinOperator, RandomSpec};
pub use sweep::{run_sweep, SweepConfig, SweepResult};
pub use uncertainty::{
    verify_relation, CommutatorForm, CommutatorSpec, RelationId, StateVector, UncertaintyReport, Verdict,
};
pub use wavepacket::{Grid, WavePacketParams};
