//! Monte Carlo prices from exact samples of the terminal asset prices.
//!
//! Given the number of jumps `n`, the summed log-jumps are bivariate normal
//! with mean `n gamma` and covariance `n Sigma_Y`, so no time stepping is
//! needed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{Asset, ModelParams, OptionSpec};

pub const MIN_PATHS: usize = 10_000;

/// Sample mean of the discounted payoff and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub paths: usize,
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Prices `option` at spots `(s1, s2)` with `paths` independent samples.
/// The stream is ChaCha8 seeded with `seed`, so equal inputs give equal
/// results.
pub fn mc_reference_price(
    params: &ModelParams<f64>,
    option: &OptionSpec<f64>,
    s1: f64,
    s2: f64,
    paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    params.validate()?;
    if paths < MIN_PATHS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_PATHS} paths, got {paths}")));
    }
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::Domain(format!("spot prices must be positive, got ({s1}, {s2})")));
    }
    let p = params;
    let t = option.maturity;
    let sqrt_t = t.sqrt();
    let drift = |asset: Asset| {
        let s = p.sigma(asset);
        (p.r - 0.5 * s * s - p.lambda * p.expected_relative_jump_size(asset)) * t
    };
    let (mu1, mu2) = (s1.ln() + drift(Asset::First), s2.ln() + drift(Asset::Second));
    let rho_c = (1.0 - p.rho * p.rho).sqrt();
    let rho_hat_c = (1.0 - p.rho_hat * p.rho_hat).sqrt();
    let poisson = if p.lambda > 0.0 {
        Some(Poisson::new(p.lambda * t).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let disc = (-p.r * t).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford accumulation of the discounted payoff
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..paths {
        let z1 = std_normal(&mut rng);
        let z2 = p.rho * z1 + rho_c * std_normal(&mut rng);
        let mut x1 = mu1 + p.sigma1 * sqrt_t * z1;
        let mut x2 = mu2 + p.sigma2 * sqrt_t * z2;
        if let Some(pois) = &poisson {
            let n: f64 = pois.sample(&mut rng);
            if n > 0.0 {
                let sn = n.sqrt();
                let e1 = std_normal(&mut rng);
                let e2 = p.rho_hat * e1 + rho_hat_c * std_normal(&mut rng);
                x1 += n * p.gamma1 + sn * p.delta1 * e1;
                x2 += n * p.gamma2 + sn * p.delta2 * e2;
            }
        }
        let y = disc * option.payoff(x1.exp(), x2.exp());
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = m2 / (paths - 1) as f64;
    Ok(McEstimate { price: mean, std_error: (var / paths as f64).sqrt(), paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::bvn::norm_cdf;
    use crate::analytic::series::put_on_min_value;
    use crate::model::{ParameterSet, PayoffKind, SetId};

    fn bs_put(s: f64, k: f64, r: f64, sigma: f64, t: f64) -> f64 {
        let sd = sigma * t.sqrt();
        let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * t) / sd;
        k * (-r * t).exp() * norm_cdf(-(d1 - sd)) - s * norm_cdf(-d1)
    }

    #[test]
    fn perfectly_correlated_equal_assets_give_black_scholes_put() {
        let ps = ParameterSet::preset(SetId::Set1);
        let mut p = ps.params;
        p.lambda = 0.0;
        p.sigma2 = p.sigma1;
        p.rho = 1.0 - 1e-12;
        let o = ps.option(PayoffKind::PutOnMin);
        let mc = mc_reference_price(&p, &o, 100.0, 100.0, 200_000, 5).unwrap();
        let bs = bs_put(100.0, 100.0, p.r, p.sigma1, 1.0);
        assert!((mc.price - bs).abs() < 3.0 * mc.std_error, "{} +- {} vs {bs}", mc.price, mc.std_error);
    }

    #[test]
    fn deterministic_forward_without_noise() {
        let ps = ParameterSet::preset(SetId::Set2);
        let mut p = ps.params;
        p.lambda = 0.0;
        p.sigma1 = 1e-8;
        p.sigma2 = 1e-8;
        for kind in PayoffKind::ALL {
            let o = ps.option(kind);
            let g = (p.r * o.maturity).exp();
            let want = (-p.r * o.maturity).exp() * o.payoff(30.0 * g, 45.0 * g);
            let mc = mc_reference_price(&p, &o, 30.0, 45.0, 10_000, 1).unwrap();
            assert!((mc.price - want).abs() < 1e-6, "{kind}: {} vs {want}", mc.price);
        }
    }

    #[test]
    fn same_seed_same_estimate() {
        let ps = ParameterSet::preset(SetId::Set3);
        let o = ps.option(PayoffKind::PutOnAverage);
        let a = mc_reference_price(&ps.params, &o, 40.0, 40.0, 20_000, 42).unwrap();
        let b = mc_reference_price(&ps.params, &o, 40.0, 40.0, 20_000, 42).unwrap();
        assert_eq!(a, b);
        let c = mc_reference_price(&ps.params, &o, 40.0, 40.0, 20_000, 43).unwrap();
        assert_ne!(a.price, c.price);
        assert!(mc_reference_price(&ps.params, &o, 40.0, 40.0, 100, 42).is_err());
    }

    #[test]
    fn jump_free_series_matches_simulation() {
        let ps = ParameterSet::preset(SetId::Set1);
        let mut p = ps.params;
        p.lambda = 0.0;
        let o = ps.option(PayoffKind::PutOnMin);
        let v = put_on_min_value(&p, &o, 100.0, 100.0).unwrap();
        let mc = mc_reference_price(&p, &o, 100.0, 100.0, 400_000, 9).unwrap();
        assert!((mc.price - v).abs() < 3.0 * mc.std_error, "{} +- {} vs {v}", mc.price, mc.std_error);
    }

    #[test]
    fn series_matches_simulation_with_jumps() {
        for (id, s1, s2) in [(SetId::Set1, 90.0, 110.0), (SetId::Set2, 40.0, 40.0), (SetId::Set3, 35.0, 45.0)] {
            let ps = ParameterSet::preset(id);
            let o = ps.option(PayoffKind::PutOnMin);
            let v = put_on_min_value(&ps.params, &o, s1, s2).unwrap();
            let mc = mc_reference_price(&ps.params, &o, s1, s2, 400_000, 17).unwrap();
            assert!((mc.price - v).abs() < 3.0 * mc.std_error, "{id}: {} +- {} vs {v}", mc.price, mc.std_error);
        }
    }
}
