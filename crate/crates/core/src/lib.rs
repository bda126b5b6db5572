//! Finite elements and closed-form analytics for the relaxed micromorphic
//! continuum, its further-relaxed variant and the dislocation gauge theory.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod coercivity;
pub mod constitutive;
pub mod dislocation;
pub mod fe;
pub mod green;
pub mod io;
pub mod jet;
pub mod manufactured;
pub mod mesh;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod tensor;
