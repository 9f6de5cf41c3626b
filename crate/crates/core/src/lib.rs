//! Effective bi-topological spaces and the continuity of effective
//! operators, built over an exact, fuel-bounded computability substrate.
//!
//! The crate provides:
//!
//! - a [`kernel`] of codes, exact dyadic arithmetic, deterministic
//!   enumerators, fair dovetailing, and a registry of indexed partial
//!   functions;
//! - [`numbering`]s of abstract carriers with reducibility, products,
//!   completely enumerable sets, and Lacombe sets;
//! - effective topological [`space`]s with strong bases, normed
//!   enumerations, limit passing, bi-topological joins, and an effective
//!   pairwise-regularity checker;
//! - the computable [`quasimetric`] layer: balls, conjugates, dense-base
//!   numberings, weakly computable and computable points, and the
//!   regularity witnesses;
//! - two fully oracled [`instances`]: the computable reals under the upper
//!   and lower quasi-metrics, and Sierpinski space;
//! - the [`continuity`] suite: effective operators, witnesses for
//!   non-inclusion, pointwise/global continuity conversions, modulus
//!   extraction, and the halting-based diagnostic for the auxiliary
//!   topology requirement;
//! - [`report`] records shared with the command-line front end.
//!
//! Searches never decide negatives: `Exhausted` always means "unknown".
//! Negative facts come only from the exact instance oracles.

pub mod continuity;
pub mod instances;
pub mod kernel;
pub mod numbering;
pub mod quasimetric;
pub mod report;
pub mod space;

pub use kernel::{
    dovetail, nat, pair, unpair, Code, Dyadic, Enumerator, FnRegistry, Fuel, KernelError, Nat,
    Outcome, TaskFamily,
};
