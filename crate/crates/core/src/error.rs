use alloc::string::String;
use core::fmt;

use crate::algebra::Event;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects live over different measure algebras (or atom counts).
    AlgebraMismatch,
    ArityError {
        expected: usize,
        found: usize,
    },
    InvalidAlgebra(String),
    InvalidPartition(String),
    InvalidInput(String),
    /// Enumeration was requested on a per-atom set that is not a finite point list.
    NotEnumerable {
        atom: usize,
    },
    NotStable,
    DimensionUnsupported {
        dim: usize,
    },
    DimensionOverflow {
        dim: usize,
        limit: usize,
    },
    /// `x` leaves the stable span exactly on this event.
    NotInSpan(Event),
    DominationViolated {
        atom: usize,
    },
    NotSublinear {
        atom: usize,
    },
    /// A non-local seminorm was used where per-atom evaluation is required.
    NonLocal,
    RadiusNotStrictlyPositive {
        atom: usize,
    },
    /// The mass-halving chain could only be built for the first `prefix` scalars.
    ConstructionImpossible {
        prefix: usize,
    },
    GridMismatch(String),
    RateNotContractive {
        atom: usize,
    },
    MaxIterations {
        cap: usize,
        unconverged: Event,
    },
    /// Convex hulls intersect exactly on this event.
    NotDisjoint(Event),
    TranslatorInvalid {
        atom: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AlgebraMismatch => write!(f, "objects belong to different measure algebras"),
            Error::ArityError { expected, found } => {
                write!(f, "arity mismatch: expected {expected}, found {found}")
            }
            Error::InvalidAlgebra(msg) => write!(f, "invalid measure algebra: {msg}"),
            Error::InvalidPartition(msg) => write!(f, "invalid partition: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NotEnumerable { atom } => {
                write!(f, "per-atom set on atom {atom} is a polytope and cannot be enumerated")
            }
            Error::NotStable => write!(f, "set is not closed under concatenation"),
            Error::DimensionUnsupported { dim } => {
                write!(f, "dimension {dim} is not supported by polytope operations (max 3)")
            }
            Error::DimensionOverflow { dim, limit } => {
                write!(f, "product dimension {dim} exceeds the limit {limit}")
            }
            Error::NotInSpan(ev) => write!(f, "vector leaves the stable span on atoms {:?}", ev.atoms().collect::<alloc::vec::Vec<_>>()),
            Error::DominationViolated { atom } => {
                write!(f, "functional is not dominated by the gauge on atom {atom}")
            }
            Error::NotSublinear { atom } => write!(f, "gauge is not sublinear on atom {atom}"),
            Error::NonLocal => write!(f, "seminorm is not per-atom local"),
            Error::RadiusNotStrictlyPositive { atom } => {
                write!(f, "radius is not strictly positive on atom {atom}")
            }
            Error::ConstructionImpossible { prefix } => write!(
                f,
                "mass-halving chain cannot be continued beyond the first {prefix} scalars"
            ),
            Error::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            Error::RateNotContractive { atom } => {
                write!(f, "contraction rate is not below 1 on atom {atom}")
            }
            Error::MaxIterations { cap, unconverged } => write!(
                f,
                "no convergence after {cap} iterations on atoms {:?}",
                unconverged.atoms().collect::<alloc::vec::Vec<_>>()
            ),
            Error::NotDisjoint(ev) => write!(
                f,
                "convex hulls intersect on atoms {:?}",
                ev.atoms().collect::<alloc::vec::Vec<_>>()
            ),
            Error::TranslatorInvalid { atom } => {
                write!(f, "ball translator containment fails on atom {atom}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
