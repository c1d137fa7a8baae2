#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod antenna;
pub mod asymptotics;
pub mod channel;
pub mod config;
pub mod fading;
pub mod montecarlo;
pub mod par;
pub mod quadrature;
pub mod scenarios;
pub mod sweep;
pub mod units;
