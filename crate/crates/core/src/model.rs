//! Two-asset Merton model parameters, jump densities and payoffs.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::{Error, Real, Result};

/// Which of the two underlying assets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Asset {
    First,
    Second,
}

/// Market and jump parameters of the two-asset Merton model.
///
/// Log-jumps `(Y1, Y2)` are bivariate normal with means `gamma1`, `gamma2`,
/// standard deviations `delta1`, `delta2` and correlation `rho_hat`; jumps of
/// both assets arrive together at Poisson rate `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub sigma1: T,
    pub sigma2: T,
    pub rho: T,
    pub lambda: T,
    pub gamma1: T,
    pub gamma2: T,
    pub rho_hat: T,
    pub delta1: T,
    pub delta2: T,
    pub r: T,
}

impl<T: Real> ModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_owned()));
        if !(self.sigma1 > T::zero() && self.sigma2 > T::zero()) {
            return bad("volatilities must be strictly positive");
        }
        if !(self.delta1 > T::zero() && self.delta2 > T::zero()) {
            return bad("log-jump standard deviations must be strictly positive");
        }
        if !(Float::abs(self.rho) < T::one()) {
            return bad("|rho| must be below 1");
        }
        if !(Float::abs(self.rho_hat) < T::one()) {
            return bad("|rho_hat| must be below 1");
        }
        if !(self.lambda >= T::zero()) {
            return bad("jump intensity must be nonnegative");
        }
        let all = [self.gamma1, self.gamma2, self.r];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("parameters must be finite");
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        ModelParams {
            sigma1: c(self.sigma1),
            sigma2: c(self.sigma2),
            rho: c(self.rho),
            lambda: c(self.lambda),
            gamma1: c(self.gamma1),
            gamma2: c(self.gamma2),
            rho_hat: c(self.rho_hat),
            delta1: c(self.delta1),
            delta2: c(self.delta2),
            r: c(self.r),
        }
    }

    pub fn sigma(&self, asset: Asset) -> T {
        match asset {
            Asset::First => self.sigma1,
            Asset::Second => self.sigma2,
        }
    }

    pub fn gamma(&self, asset: Asset) -> T {
        match asset {
            Asset::First => self.gamma1,
            Asset::Second => self.gamma2,
        }
    }

    pub fn delta(&self, asset: Asset) -> T {
        match asset {
            Asset::First => self.delta1,
            Asset::Second => self.delta2,
        }
    }

    /// `kappa_i = E[e^{Y_i} - 1] = exp(gamma_i + delta_i^2 / 2) - 1`.
    pub fn expected_relative_jump_size(&self, asset: Asset) -> T {
        let (g, d) = (self.gamma(asset), self.delta(asset));
        (g + T::lit(0.5) * d * d).exp_m1()
    }

    /// Logarithm of the bivariate normal density of `(Y1, Y2)`.
    pub fn ln_log_jump_density(&self, eta1: T, eta2: T) -> T {
        let one = T::one();
        let z1 = (eta1 - self.gamma1) / self.delta1;
        let z2 = (eta2 - self.gamma2) / self.delta2;
        let q = one - self.rho_hat * self.rho_hat;
        let quad = z1 * z1 + z2 * z2 - T::lit(2.0) * self.rho_hat * z1 * z2;
        -(T::TAU() * self.delta1 * self.delta2 * q.sqrt()).ln() - quad / (T::lit(2.0) * q)
    }

    /// Density of the log-jump vector, `f(e^eta1, e^eta2) e^eta1 e^eta2`.
    pub fn log_jump_density(&self, eta1: T, eta2: T) -> T {
        self.ln_log_jump_density(eta1, eta2).exp()
    }

    /// Marginal normal density of one log-jump component.
    pub fn marginal_log_jump_density(&self, asset: Asset, eta: T) -> T {
        let (g, d) = (self.gamma(asset), self.delta(asset));
        let z = (eta - g) / d;
        (-T::lit(0.5) * z * z - (T::TAU().sqrt() * d).ln()).exp()
    }

    /// Bivariate lognormal density of the jump multipliers `(e^Y1, e^Y2)`.
    pub fn jump_density_lognormal(&self, y1: T, y2: T) -> Result<T> {
        if !(y1 > T::zero() && y2 > T::zero()) {
            return Err(Error::Domain(format!("jump density needs y1, y2 > 0, got ({y1}, {y2})")));
        }
        let (l1, l2) = (y1.ln(), y2.ln());
        Ok((self.ln_log_jump_density(l1, l2) - l1 - l2).exp())
    }
}

/// Rainbow payoff type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PayoffKind {
    PutOnMin,
    PutOnAverage,
}

impl PayoffKind {
    pub const ALL: [PayoffKind; 2] = [PayoffKind::PutOnMin, PayoffKind::PutOnAverage];

    pub fn short_name(self) -> &'static str {
        match self {
            PayoffKind::PutOnMin => "min",
            PayoffKind::PutOnAverage => "avg",
        }
    }
}

impl fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for PayoffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "min" | "put-on-min" | "putonmin" => Ok(PayoffKind::PutOnMin),
            "avg" | "average" | "put-on-average" | "putonaverage" => Ok(PayoffKind::PutOnAverage),
            other => Err(Error::Config(format!("unknown payoff '{other}' (expected min or avg)"))),
        }
    }
}

/// European rainbow put: payoff kind, strike and maturity in years.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptionSpec<T> {
    pub payoff: PayoffKind,
    pub strike: T,
    pub maturity: T,
}

impl<T: Real> OptionSpec<T> {
    pub fn new(payoff: PayoffKind, strike: T, maturity: T) -> Result<Self> {
        if !(strike > T::zero() && maturity > T::zero()) {
            return Err(Error::InvalidParameter("strike and maturity must be positive".into()));
        }
        Ok(OptionSpec { payoff, strike, maturity })
    }

    /// Payoff at expiry; always in `[0, K]` for nonnegative prices.
    pub fn payoff(&self, s1: T, s2: T) -> T {
        let k = self.strike;
        match self.payoff {
            PayoffKind::PutOnMin => (k - s1.min(s2)).max(T::zero()),
            PayoffKind::PutOnAverage => (k - T::lit(0.5) * (s1 + s2)).max(T::zero()),
        }
    }

    pub fn cast<U: Real>(&self) -> OptionSpec<U> {
        OptionSpec {
            payoff: self.payoff,
            strike: U::lit(self.strike.to_f64_lossy()),
            maturity: U::lit(self.maturity.to_f64_lossy()),
        }
    }
}

/// The three benchmark parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetId {
    Set1,
    Set2,
    Set3,
}

impl SetId {
    pub const ALL: [SetId; 3] = [SetId::Set1, SetId::Set2, SetId::Set3];

    pub fn number(self) -> u8 {
        match self {
            SetId::Set1 => 1,
            SetId::Set2 => 2,
            SetId::Set3 => 3,
        }
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for SetId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("set").trim_start_matches("Set") {
            "1" => Ok(SetId::Set1),
            "2" => Ok(SetId::Set2),
            "3" => Ok(SetId::Set3),
            other => Err(Error::Config(format!("unknown parameter set '{other}' (expected 1, 2 or 3)"))),
        }
    }
}

/// A benchmark preset: model parameters, contract data and truncation bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterSet {
    pub id: SetId,
    pub params: ModelParams<f64>,
    pub strike: f64,
    pub maturity: f64,
    pub s_max_put_on_min: f64,
    pub s_max_put_on_average: f64,
}

impl ParameterSet {
    pub fn preset(id: SetId) -> Self {
        let (params, strike, maturity, min_mult, avg_mult) = match id {
            SetId::Set1 => (
                ModelParams {
                    sigma1: 0.12,
                    sigma2: 0.15,
                    rho: 0.30,
                    lambda: 0.60,
                    gamma1: -0.10,
                    gamma2: 0.10,
                    rho_hat: -0.20,
                    delta1: 0.17,
                    delta2: 0.13,
                    r: 0.05,
                },
                100.0,
                1.0,
                5.0,
                5.0,
            ),
            SetId::Set2 => (
                ModelParams {
                    sigma1: 0.30,
                    sigma2: 0.30,
                    rho: 0.50,
                    lambda: 2.0,
                    gamma1: -0.50,
                    gamma2: 0.30,
                    rho_hat: -0.60,
                    delta1: 0.40,
                    delta2: 0.10,
                    r: 0.05,
                },
                40.0,
                0.5,
                30.0,
                15.0,
            ),
            SetId::Set3 => (
                ModelParams {
                    sigma1: 0.20,
                    sigma2: 0.30,
                    rho: 0.70,
                    lambda: 8.0,
                    gamma1: -0.05,
                    gamma2: -0.20,
                    rho_hat: 0.50,
                    delta1: 0.45,
                    delta2: 0.06,
                    r: 0.05,
                },
                40.0,
                1.0,
                50.0,
                25.0,
            ),
        };
        ParameterSet {
            id,
            params,
            strike,
            maturity,
            s_max_put_on_min: min_mult * strike,
            s_max_put_on_average: avg_mult * strike,
        }
    }

    pub fn option(&self, payoff: PayoffKind) -> OptionSpec<f64> {
        OptionSpec { payoff, strike: self.strike, maturity: self.maturity }
    }

    pub fn s_max(&self, payoff: PayoffKind) -> f64 {
        match payoff {
            PayoffKind::PutOnMin => self.s_max_put_on_min,
            PayoffKind::PutOnAverage => self.s_max_put_on_average,
        }
    }
}
