//! Quantum states over spacetime for finite-dimensional systems.
//!
//! The crate covers
//!
//! * dense linear algebra on tensor-product spaces ([`linops`]),
//! * density operators, channels, purifications and dilations ([`quantum`]),
//! * the left, right and symmetric (Fullwood–Parzygnat) QSOT products,
//!   mixtures and Markov chains ([`qsot`]),
//! * two-arm interferometry with an independent state-vector simulator and
//!   temporal POVMs ([`interferometer`]),
//! * the compass-qubit protocol and time-reversal fixtures ([`timesym`]),
//! * reconstruction of multi-region states from interference terms
//!   ([`tomography`]),
//! * process matrices and their first-order approximation ([`procmat`]),
//! * checks on probe couplings for causally agnostic measurements ([`cam`]).

pub mod cam;
pub mod error;
pub mod fixtures;
pub mod interferometer;
pub mod linops;
pub mod procmat;
pub mod qsot;
pub mod quantum;
pub mod timesym;
pub mod tomography;

pub use error::{Error, Result};
pub use interferometer::{InterferenceRecord, Intervention, ProbeConfig};
pub use linops::{ComplexMatrix, RectMatrix, StateVector, UnitaryMatrix, C64};
pub use procmat::ProcessMatrix;
pub use qsot::{ProductKind, Provenance, Qsot};
pub use quantum::{DensityOperator, Dilation, Dynamics, LinearMap, QuantumChannel};
pub use timesym::CompassSetup;
