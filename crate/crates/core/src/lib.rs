//! Ladder and number operators on weighted differential forms.
//!
//! The crate works pointwise: every field (metric entry, weight, form
//! coefficient) is an expression that evaluates to a truncated Taylor jet at a
//! point, and every differential operator consumes jet order. Identities are
//! checked by comparing jets, and spectral and integral facts by quadrature
//! and finite differences in [`numeric`].

pub mod chart;
pub mod error;
pub mod excited;
pub mod expr;
pub mod forms;
pub mod identities;
pub mod jet;
pub mod numeric;
pub mod report;
pub mod sampling;
pub mod weighted;

pub use chart::{Chart, Coordinate, LocalMetric, MetricPointData};
pub use error::{Error, Result};
pub use expr::{Expr, ScalarField};
pub use jet::Jet;
