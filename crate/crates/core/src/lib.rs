//! Signature spectra of exact Pauli-error-detecting codes.
//!
//! A rank-K code space detects a Pauli error `E` when `PEP` is a multiple of
//! `P`. The signature of a detecting code is the vector of those multiples
//! over a chosen tuple of Paulis; its Euclidean norm λ* is what the
//! optimizer scans. The crate provides the operator algebra, symmetry sector
//! bases, a catalog of closed-form code families, a penalty optimizer over
//! code frames and the study drivers built on top of it.

pub mod codespace;
pub mod error;
pub mod experiments;
pub mod families;
pub mod numerics;
pub mod optimizer;
pub mod pauli;
pub mod symmetry;

pub use error::{Error, Result};
