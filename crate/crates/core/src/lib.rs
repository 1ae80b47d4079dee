// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod cli;
pub mod contour;
pub mod discretize;
pub mod model;
pub mod smooth;
pub mod linalg;
pub mod oracle;
pub mod winding;
pub mod dtn;
pub mod sweep;
