//! Reference prices: the semi-closed put-on-the-min series and a Monte Carlo
//! oracle. Both work in `f64`.

mod bvn;
mod monte_carlo;
mod series;

pub use bvn::{bivariate_normal_cdf, norm_cdf, norm_pdf};
pub use monte_carlo::{mc_reference_price, McEstimate, MIN_PATHS};
pub use series::{put_on_min_value, put_on_min_value_with, SeriesTermContext, DEFAULT_SERIES_CAP, DEFAULT_SERIES_TOLERANCE};
