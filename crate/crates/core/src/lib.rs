//! Discrete spectra of finitely perturbed tridiagonal and tight-binding
//! operators, together with numerical certification of the eigenvalue-moment
//! inequalities that control them.
//!
//! The essential spectrum of the free operator is a band; finitely supported
//! perturbations split off finitely many eigenvalues outside it. This crate
//! computes those eigenvalues through monotone window truncation (Sturm
//! counts plus bisection, cross-checked by an independent dense solver) and
//! evaluates both sides of each inequality with an explicit tolerance budget,
//! so a verdict of "holds" is never an artifact of truncation error.

pub mod birman_schwinger;
pub mod bounds;
pub mod dense;
pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod lattice;
pub mod operator;
pub mod report;
pub mod schema;
mod special;

pub use bounds::{BoundReport, BoundTarget, TheoremId, Verdict};
pub use eigen::{discrete_spectrum, EigenvalueReport};
pub use error::{Error, Result};
pub use operator::{Band, LatticeSpec, LineKind, Perturbation, TruncationPlan, Window};
