//! Semi-closed value of a European put on the minimum of two assets.
//!
//! Conditional on `n` jumps up to maturity the log-prices are jointly normal,
//! so the put is a Stulz-type expression in bivariate normal probabilities.
//! The value is the Poisson mixture of these conditional prices.

use crate::error::{Error, Result};
use crate::model::{Asset, ModelParams, OptionSpec, PayoffKind};

use super::bvn::bivariate_normal_cdf;

pub const DEFAULT_SERIES_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_SERIES_CAP: usize = 400;

/// Arguments and correlations of the bivariate normal probabilities in term
/// `n` of the series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesTermContext {
    pub n: usize,
    pub b1: f64,
    pub b2: f64,
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d22: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    /// `sigma1^2 - 2 rho sigma1 sigma2 + sigma2^2`
    pub sigma_sq: f64,
    /// `delta1^2 - 2 rho_hat delta1 delta2 + delta2^2`
    pub delta_sq: f64,
    /// `sqrt(T) sqrt(sigma_i^2 + n delta_i^2 / T)`, the conditional standard
    /// deviations of `ln S_i(T)`.
    pub std1: f64,
    pub std2: f64,
    /// Conditional standard deviation of `ln(S_2(T) / S_1(T))`.
    pub std12: f64,
}

impl SeriesTermContext {
    pub fn new(p: &ModelParams<f64>, strike: f64, maturity: f64, s1: f64, s2: f64, n: usize) -> Self {
        let t = maturity;
        let nf = n as f64;
        let kappa1 = p.expected_relative_jump_size(Asset::First);
        let kappa2 = p.expected_relative_jump_size(Asset::Second);
        let var1 = p.sigma1 * p.sigma1 + nf * p.delta1 * p.delta1 / t;
        let var2 = p.sigma2 * p.sigma2 + nf * p.delta2 * p.delta2 / t;
        let cov = p.rho * p.sigma1 * p.sigma2 + nf * p.rho_hat * p.delta1 * p.delta2 / t;
        let sigma_sq = p.sigma1 * p.sigma1 - 2.0 * p.rho * p.sigma1 * p.sigma2 + p.sigma2 * p.sigma2;
        let delta_sq = p.delta1 * p.delta1 - 2.0 * p.rho_hat * p.delta1 * p.delta2 + p.delta2 * p.delta2;
        let var12 = sigma_sq + nf * delta_sq / t;
        let sqrt_t = t.sqrt();
        let (std1, std2, std12) = (sqrt_t * var1.sqrt(), sqrt_t * var2.sqrt(), sqrt_t * var12.sqrt());
        let b = |s: f64, sigma: f64, kappa: f64, gamma: f64, std: f64| {
            ((s / strike).ln() + (p.r - 0.5 * sigma * sigma - p.lambda * kappa) * t + nf * gamma) / std
        };
        let b1 = b(s1, p.sigma1, kappa1, p.gamma1, std1);
        let b2 = b(s2, p.sigma2, kappa2, p.gamma2, std2);
        let d11 = ((s2 / s1).ln() + (-0.5 * sigma_sq + p.lambda * (kappa1 - kappa2)) * t
            - nf * (p.gamma1 - p.gamma2 + p.delta1 * p.delta1 - p.rho_hat * p.delta1 * p.delta2))
            / std12;
        let rho_i = |var_i: f64| var_i.sqrt() / var12.sqrt() - cov / (var12 * var_i).sqrt();
        SeriesTermContext {
            n,
            b1,
            b2,
            d1: -b1 - std1,
            d2: -b2 - std2,
            d11,
            d22: -d11 - std12,
            rho1: rho_i(var1),
            rho2: rho_i(var2),
            rho3: cov / (var1 * var2).sqrt(),
            sigma_sq,
            delta_sq,
            std1,
            std2,
            std12,
        }
    }

    /// The bracketed conditional price of term `n`, before Poisson weighting.
    pub fn conditional_price(&self, p: &ModelParams<f64>, strike: f64, maturity: f64, s1: f64, s2: f64) -> Result<f64> {
        let t = maturity;
        let nf = self.n as f64;
        let disc = (-p.r * t).exp();
        let kappa1 = p.expected_relative_jump_size(Asset::First);
        let kappa2 = p.expected_relative_jump_size(Asset::Second);
        let f1 = s1 * (-p.lambda * kappa1 * t + nf * p.gamma1 + 0.5 * nf * p.delta1 * p.delta1).exp();
        let f2 = s2 * (-p.lambda * kappa2 * t + nf * p.gamma2 + 0.5 * nf * p.delta2 * p.delta2).exp();
        Ok(disc * strike
            - disc * strike * bivariate_normal_cdf(self.b1, self.b2, self.rho3)?
            - f1 * bivariate_normal_cdf(self.d11, self.d1, self.rho1)?
            - f2 * bivariate_normal_cdf(self.d22, self.d2, self.rho2)?)
    }
}

/// Value at inception of a European put on `min(S_1, S_2)`.
///
/// The Poisson series is cut at the first `n*` whose remaining Poisson mass
/// is below `tol`; more than `cap` terms is an error.
pub fn put_on_min_value_with(
    params: &ModelParams<f64>,
    option: &OptionSpec<f64>,
    s1: f64,
    s2: f64,
    tol: f64,
    cap: usize,
) -> Result<f64> {
    params.validate()?;
    if option.payoff != PayoffKind::PutOnMin {
        return Err(Error::InvalidParameter("the semi-closed formula covers the put on the minimum only".into()));
    }
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::Domain(format!("spot prices must be positive, got ({s1}, {s2})")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("series tolerance must be positive, got {tol}")));
    }
    let (k, t) = (option.strike, option.maturity);
    let lt = params.lambda * t;
    let mut weight = (-lt).exp();
    let mut mass = 0.0;
    let mut value = 0.0;
    for n in 0..=cap {
        if n > 0 {
            weight *= lt / n as f64;
        }
        let ctx = SeriesTermContext::new(params, k, t, s1, s2, n);
        value += weight * ctx.conditional_price(params, k, t, s1, s2)?;
        mass += weight;
        if 1.0 - mass < tol || lt == 0.0 {
            return Ok(value.clamp(0.0, k * (-params.r * t).exp()));
        }
    }
    Err(Error::SeriesNotConverged { cap })
}

/// [`put_on_min_value_with`] at the default tolerance and cap.
pub fn put_on_min_value(params: &ModelParams<f64>, option: &OptionSpec<f64>, s1: f64, s2: f64) -> Result<f64> {
    put_on_min_value_with(params, option, s1, s2, DEFAULT_SERIES_TOLERANCE, DEFAULT_SERIES_CAP)
}
