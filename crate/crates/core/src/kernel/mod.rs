//! Computability substrate: codes and pairing, exact dyadic arithmetic,
//! deterministic enumerators, fair dovetailing with fuel, and the registry
//! of indexed partial functions.
//!
//! Everything here is immutable after construction and deterministic: the
//! same query with the same fuel always returns the same outcome, and a
//! confirmed search stays confirmed under any larger budget.

mod dovetail;
mod dyadic;
mod enumerate;
pub mod nat;
mod outcome;
mod registry;
pub mod scan;

pub use dovetail::{dovetail, TaskFamily};
pub use dyadic::{
    bound_code, dyadic_decode, dyadic_encode, dyadic_rank, Dyadic, ParseDyadicError,
};
pub use enumerate::Enumerator;
pub use nat::{nat, pair, pair3, pair4, split3, split4, tuple, unpair, untuple, Nat};
pub use outcome::{Fuel, Outcome};
pub use registry::{Code, DerivedKey, FnRegistry};

/// Errors from the computability substrate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("tuple arity must be at least 2, got {len}")]
    TupleArity { len: usize },
    #[error("unknown registry code #{code}")]
    UnknownCode { code: usize },
}
