//! Goodness-of-fit tests and their reports.

mod multi;
mod report;
mod single;

pub use multi::{
    gksd_multi_test, gksd_statistic, kdsd_multi_test, toggle_density_ratio, weighted_v_statistic,
    MultiParams, DEFAULT_BOOTSTRAP,
};
pub use report::{empirical_quantile, monte_carlo_p_value, TestReport};
pub use single::*;
