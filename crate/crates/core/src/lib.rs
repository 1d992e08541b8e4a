//! Exact enumeration and security analysis for three-party protocols.

pub mod adversary;
pub mod analyzer;
pub mod bgw;
pub mod engine;
pub mod error;
pub mod field;
pub mod hamdist;
pub mod protocol;
pub mod scenario;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldError, FieldSpec};
