//! Noise-disturbance uncertainty relations for quantum measurement models.
//!
//! A measurement couples an object to a probe. Given observables `A_i`, `B_j`
//! on the object and meters `M_i` on the probe, the library builds the noise
//! operators `N_i = M_i^out − A_i^in` and disturbance operators
//! `D_j = B_j^out − B_j^in`, assembles their symmetrized covariance `K`, the
//! cross-commutator matrix `Γ` and the commutator expectation matrix `𝒢`, and
//! certifies `K + (i/2)(Γ + 𝒢) ⪰ 0` alongside the scalar Ozawa, Heisenberg,
//! Robertson and Robertson-Schrödinger relations.
//!
//! Two backends share one report: dense finite-dimensional operators
//! ([`operators`]) and second-moment calculus over canonical quadratures
//! ([`gaussian`]).

pub mod builtin;
pub mod error;
pub mod fuzz;
pub mod gaussian;
pub mod measurement;
pub mod model;
pub mod operators;
pub mod oscillator;
pub mod random;
pub mod report;
pub mod serial;
pub mod symplectic;
pub mod tolerance;

pub use error::{Error, Result};
pub use measurement::{analyze, MeasurementModel, UncertaintyReport};
pub use model::ModelFile;
pub use operators::{Operator, PsdVerdict, QuantumState};
pub use report::ReportDocument;
pub use tolerance::Tolerances;
