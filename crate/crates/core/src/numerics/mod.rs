//! Numerical kernels: Gaussian quadrature, bracketed roots, damped fixed points,
//! 1-D minimization and polynomial least squares.

mod fixed_point;
mod minimize;
mod polyfit;
mod quadrature;
mod roots;

pub use fixed_point::{fixed_point, FixedPointConfig, FixedPointOutcome};
pub use minimize::{golden_section, golden_section_max_iter};
pub use polyfit::{polyfit, polyval, FitResult};
pub use quadrature::{adaptive_gauss_integral, gauss_integrate, QuadratureKind, QuadratureRule};
pub use roots::{find_root_bracketed, DEFAULT_ROOT_TOL};
