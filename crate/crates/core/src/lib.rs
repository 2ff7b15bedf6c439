//! Secrecy outage probability of a two-user mmWave rate-splitting downlink
//! with an external eavesdropper.
//!
//! [`analytic`] holds the closed forms for the four eavesdropper scenarios,
//! [`mc`] the Monte Carlo oracle, [`sweep`] and [`noma`] the batch drivers, and
//! [`config`] the flat TOML loader shared with the command-line front end.
pub mod analytic;
pub mod config;
pub mod mc;
pub mod model;
pub mod noma;
pub mod quadrature;
pub mod specfun;
pub mod sweep;

pub use analytic::{sop, sop_checked, SecrecyResult, SopError};
pub use mc::{estimate_sop, estimate_sop_fullvector, McEstimate};
pub use model::{ConfigError, EveLayout, LinkBudget, Power, Scenario, SystemConfig};
pub use quadrature::{BRule, LambdaRule, QuadratureSpec};
