//! Classical comparison quantizers.

pub mod lbg;
pub mod polar;
pub mod rect;
pub mod scalar;

pub use lbg::{train_lbg, LbgRun};
pub use polar::{build_polar, PolarAllocation};
pub use rect::{build_rect, ProductMode};
pub use scalar::{lloyd_scalar, Density, ScalarQuantizer};
