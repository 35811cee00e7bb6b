//! Point-wise doubling indices: closed forms, empirical estimates and the
//! explicit codings that realise them.

pub mod curve;
pub mod delta;
pub mod gamma;
pub mod gauge;
pub mod montecarlo;

pub use curve::{curve_coding, first_checkpoint, gamma_coding, CurveCoding, CurveVariant};
pub use delta::{
    delta_lower, delta_lower_report, delta_rows, delta_upper, delta_upper_stream, empirical, Accumulator, Branch, ClosedForm, Empirical, IndexReport,
    IndexValue, Sample,
};
pub use gamma::{gamma_bounds, gamma_empirical, gamma_stream, GammaReport};
pub use gauge::{Gauge, GaugeKind, SLimit};
pub use montecarlo::{monte_carlo_delta, MonteCarloReport, Quartiles, TrialStats};
