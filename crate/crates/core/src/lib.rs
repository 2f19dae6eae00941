//! Stable compactness over finite measure algebras.
//!
//! A finite atomic probability space stands in for the measure algebra, so
//! the ring `L⁰` becomes per-atom reals, stable sets become per-atom compact
//! sections, and every conditional construction reduces to independent
//! per-atom work glued along partitions. The crate covers the algebraic
//! layer (events, partitions, concatenation, step naturals), stable sets and
//! their selectors, stable linear algebra, the three module topologies, the
//! compactness toolkit, and conditional optimization (argmin, fixed points,
//! separation, conjugation, polars).

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod compactness;
pub mod error;
pub mod family;
pub mod geometry;
pub mod module;
pub mod optimization;
pub mod sampling;
pub mod scalar;
pub mod seminorm;
pub mod stable_set;
pub mod topology;
pub mod vector;

pub use algebra::{Event, MeasureAlgebra, Partition};
pub use error::{Error, Result};
pub use family::StableFiniteFamily;
pub use scalar::{ExtReal, L0Scalar, StepNatural};
pub use stable_set::{CompactRep, StableSet};
pub use vector::L0Vector;
