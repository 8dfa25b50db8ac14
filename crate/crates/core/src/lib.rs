//! Evaluation representations of the quantum affine algebra `A_n^(1)`, its
//! boundary coideal subalgebras, and the bulk and boundary intertwiners
//! between them, solved numerically as nullspaces.
//!
//! Everything numeric is generic over the real scalar ([`scalar::Real`],
//! implemented for `f32` and `f64`); the aliases below fix `f64`.

pub mod cli;
pub mod error;
pub mod intertwiner;
pub mod io;
pub mod linalg;
pub mod report;
pub mod reps;
pub mod scalar;
pub mod toda;
pub mod verify;

pub use error::{Error, Result};
pub use intertwiner::{
    dimension_scan, solve_boundary, solve_bulk, solve_equivalence, solve_vector_boundary, BoundarySystem,
    IntertwinerSolution, ScanKind, ScanResult,
};
pub use linalg::{ComplexMatrix, NullspaceResult, ProjectiveComparison};
pub use report::VerificationReport;
pub use reps::{BoundaryParams, DualConvention, EvaluationRep, Generator};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

pub type CMatrix = ComplexMatrix<f64>;
pub type CMatrix32 = ComplexMatrix<f32>;
pub type Rep64 = EvaluationRep<f64>;
pub type Rep32 = EvaluationRep<f32>;
pub type Params64 = BoundaryParams<f64>;
pub type Solution64 = IntertwinerSolution<f64>;
pub type Report64 = VerificationReport<f64>;
