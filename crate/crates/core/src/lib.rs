// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod cap_threshold;
pub mod cli;
pub mod error;
pub mod half_space_moments;
pub mod montecarlo;
pub mod mountain_pass;
pub mod oracle;
pub mod q_form;
pub mod quadrature;
pub mod report;
pub mod special_functions;
pub mod sphere_moments;
pub mod suites;
