//! Disparity auditing toolkit.
//!
//! Quantifies how much each input feature contributes to the statistical
//! disparity `I(Z; Yhat)` between a protected attribute and a decision:
//!
//! * **distributional mode** — Shapley attribution over redundant
//!   information from partial information decomposition, computable from
//!   the observed joint distribution alone;
//! * **interventional mode** — Shapley attribution over mutual-information
//!   deltas obtained by imputing features with baseline constants and
//!   re-evaluating a model oracle.

pub mod attribution;
pub mod cli;
pub mod data;
pub mod dist;
pub mod error;
pub mod oracle;
pub mod pid;
pub mod report;
pub mod shapley;

pub use dist::{InfoValue, JointDistribution, Variable};
pub use error::{AuditError, Result};
