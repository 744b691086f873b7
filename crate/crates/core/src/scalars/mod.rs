//! Exact coefficient field: Gaussian rationals and rational functions in
//! conjugate-paired parameters.

pub mod expr;
pub mod gauss;
pub mod poly;
pub mod vars;

pub use expr::{Assignment, ParamExpr};
pub use gauss::GaussRat;
pub use poly::{Mono, Poly};
pub use vars::{VarId, VarKind};
