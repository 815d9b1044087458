//! Exact arithmetic kernel: scalars, polynomials, truncated series, linear algebra,
//! resultants, weighted degrees and generic ranks.

pub mod expseries;
pub mod linalg;
pub mod poly;
pub mod rank;
pub mod resultant;
pub mod scalar;
pub mod series;
pub mod weights;

pub use poly::{conj_name, unconj_name, var_list, Monomial, Poly, VarList};
pub use scalar::{rat, GaussianRational, GQ};
pub use series::Series;
