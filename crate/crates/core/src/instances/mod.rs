//! The two fully oracled model spaces: computable reals under the upper
//! and lower quasi-metrics over the dyadic dense base, and Sierpinski
//! space with its halting-point diagnostics.

pub mod reals;
pub mod sierpinski;

pub use reals::{make_reals, RealInstance};
pub use sierpinski::{make_sierpinski, SierpinskiInstance};
