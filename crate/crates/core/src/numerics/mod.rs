//! Dense complex linear algebra and water-filling used by every design routine.

mod hermitian;
mod matrix;
mod svd;
mod waterfill;

pub use hermitian::{is_hermitian, log2_det_hpd, solve_hpd, Cholesky, LogDet};
pub use matrix::ComplexMatrix;
pub use svd::{svd, SvdResult};
pub use waterfill::{waterfill, WaterFilling};
