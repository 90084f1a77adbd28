//! Exact finite-stage computations with semi-measures on Cantor space.
//!
//! Values are dyadic rationals held exactly. Semi-measures are finite
//! presentations (tables plus tail rules) that can be evaluated on any binary
//! string, and every construction takes an explicit stage index.

pub mod catalog;
pub mod dyadic;
pub mod enumeration;
pub mod functional;
pub mod mltest;
pub mod scalar;
pub mod semimeasure;
pub mod staged;
pub mod strings;
pub mod trim;

pub use dyadic::{Dyadic, DyadicParseError};
pub use enumeration::StagedFamily;
pub use functional::{MonotoneFunctional, Pair};
pub use mltest::{GeneralizedTest, MlTest};
pub use scalar::Scalar;
pub use semimeasure::{Component, Measure, SemiMeasureStage, TailRule};
pub use staged::{Generator, LeftCeSemiMeasure, StagedSemiMeasure};
pub use strings::{BinString, PrefixFreeStringSet};

use num_rational::BigRational;

/// Presentations with exact dyadic values.
pub type DyadicStage = SemiMeasureStage<Dyadic>;
/// Presentations with exact rational values.
pub type RationalStage = SemiMeasureStage<BigRational>;
/// Presentations with floating-point values, for quick numerical work.
pub type F64Stage = SemiMeasureStage<f64>;
pub type DyadicMeasure = Measure<Dyadic>;
pub type DyadicTest = MlTest<Dyadic>;
