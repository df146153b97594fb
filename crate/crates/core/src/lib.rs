//! Exact and Monte Carlo analysis of how randomized response on a binary
//! sensitive attribute changes the group fairness of a majority-vote
//! classifier.

pub mod distribution;
pub mod metrics;
pub mod model;
pub mod prob;
pub mod rr;
pub mod scenarios;
pub mod sim;
pub mod theory;
pub mod verify;

pub use distribution::{parse_distribution, JointDistribution};
pub use metrics::{fairness_report, FairnessReport, MetricsError};
pub use model::{baseline_predictor, ldp_predictor_closed_form, PredictionTable};
pub use rr::RRParams;
pub use scenarios::{builtin_scenario, Scenario};
pub use theory::{theorem_verdict, Verdict};
