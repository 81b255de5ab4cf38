//! Numerical toolkit for balayage of measures: atomic charges, quadrature
//! for continuous components, harmonic and subharmonic test families, the
//! balayage checker, constructions of balayage measures, grid hulls and the
//! Lyons-type counterexample.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balayage;
pub mod construct;
pub mod error;
pub mod geom;
pub mod hull;
pub mod lyons;
pub mod measure;
pub mod quad;
pub mod testfn;

pub use balayage::{check, Verdict};
pub use error::{Error, Result};
pub use geom::{constants, Ball, DimConstants, Point, SetExpr};
pub use measure::{Atom, BallQuery, DiscreteCharge, ExtendedReal};
pub use quad::{ComponentKind, ContinuousComponent};
pub use testfn::{Family, FamilyDescriptor, FamilyKind, TestFunction};
