//! Numerical laboratory for strongly continuous semigroups on locally convex
//! spaces of functions on the line and on metric graphs.
//!
//! The crate samples operators on uniform grids, evaluates families of
//! window seminorms, and checks dissipativity, resolvent contraction and
//! range conditions for concrete generators: the left shift on a half line,
//! the right translation on a left half line, the Laplacian, and transport
//! flows on directed networks. Exact semigroups are available for the shifts
//! and for network transport (by characteristics), so Euler approximations
//! and Laplace-transform resolvents can be compared against them.

pub mod commands;
pub mod error;
pub mod generation;
pub mod grid;
pub mod network;
pub mod operators;
pub mod output;
pub mod parallel;
pub mod samples;
pub mod semigroups;
pub mod seminorms;
pub mod space;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use operators::{Generator, OperatorLabel};
pub use semigroups::Semigroup;
pub use seminorms::{CompactSeminormFamily, SeminormFamily, WindowOrientation};
pub use space::VectorState;
