//! Fundamental matrix with λ-derivatives, gauge transform and asymptotic checks.

mod asymptotics;
mod fundamental;
mod gauge;
pub mod rk;

pub use asymptotics::{check_asymptotics, AsymptoticReport, AsymptoticSample};
pub use fundamental::{
    fundamental_at_one, integrate_fundamental, integrate_fundamental_with, propagate, FundamentalSolution,
    IntegratorOptions, MAX_ORDER,
};
pub use gauge::{gauge_transform, GaugeTransform, DEFAULT_GAUGE_POINTS};
