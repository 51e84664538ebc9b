//! Desk-scale numerical toolkit for convex representations of monotone
//! operators: discrete Legendre-Fenchel calculus, Fitzpatrick functions,
//! Gossez enlargements of the duality map, surjectivity/range-density
//! equivalence suites, and the inf-convolution sum rule.

pub mod analysis;
pub mod conjugation;
pub mod error;
pub mod exec;
pub mod numerics;
pub mod operators;
pub mod report;
pub mod representations;
pub mod scenario;
pub mod spaces;
pub mod sumrule;

pub use error::{Error, Result};
