// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod harness;
pub mod lie;
pub mod linalg;
pub mod pbw;
pub mod representation;
pub mod sobolev;
pub mod spectral;
