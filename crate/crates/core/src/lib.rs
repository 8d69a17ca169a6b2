#![no_std]
// `!(x > 0.0)` style checks are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod math;
pub mod pipeline;
pub mod planning;
pub mod scene;
pub mod sensing;
pub mod servoing;
