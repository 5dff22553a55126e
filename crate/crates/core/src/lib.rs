//! Exact facet enumeration for Bell local polytopes, with support for
//! restricting the search to facets whose coefficients obey linear
//! constraints.

pub mod bell;
pub mod cone;
pub mod constrained;
pub mod equivalence;
pub mod io;
pub mod linalg;
pub mod pipeline;
