//! Shared numerical infrastructure: quadrature rules, dense complex linear
//! algebra, and argument-principle winding counts.

pub mod linalg;
pub mod quadrature;
pub mod winding;

pub use linalg::{
    complex_determinant, complex_trace, eigenvalues, frobenius_norm, schatten_norm,
    singular_values, ComplexMatrix,
};
pub use quadrature::{composite_gauss, gauss_legendre, QuadratureRule};
pub use winding::{circle_path, rectangle_path, ClosedPathSamples};
