//! Ciarlet finite elements on reference cells.
//!
//! The crate builds elements from a cell, a polynomial space and a set of functionals,
//! tabulates their basis functions, classifies their degrees, computes trace spaces on
//! sub-entities and checks whether two element definitions are variants of one another.

pub mod analysis;
pub mod cells;
pub mod elements;
pub mod error;
pub mod linalg;
pub mod mapping;
pub mod numfmt;
pub mod parallel;
pub mod polyset;
pub mod quadrature;
pub mod tabulation;
pub mod verify;

pub use cells::{CellKind, EntityRef, ReferenceCell};
pub use elements::{make_family, CiarletElement, ElementSpec, Family, LagrangeVariant};
pub use error::{Error, Result};
pub use mapping::{GeometricMap, MapKind};
pub use parallel::Execution;
pub use tabulation::{FunctionSet, Tabulation};
pub use verify::{verify_variants, SpanTestConfig, VerificationReport};
