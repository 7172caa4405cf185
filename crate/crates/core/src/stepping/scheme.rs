use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::Real;

/// The seven splitting schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Crank-Nicolson with a forward Euler jump term.
    Cnfe,
    /// Crank-Nicolson with fixed-point iteration on the jump term.
    Cnfi,
    /// Implicit-explicit trapezoidal rule.
    Ietr,
    /// Crank-Nicolson with a two-step Adams-Bashforth jump term.
    Cnab,
    /// Modified Craig-Sneyd ADI, one-step.
    Mcs,
    /// Modified Craig-Sneyd ADI with a two-step Adams-Bashforth jump term.
    Mcs2,
    /// Stabilizing correction two-step Adams-type ADI.
    Sc2a,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::Cnfe,
        SchemeKind::Cnfi,
        SchemeKind::Ietr,
        SchemeKind::Cnab,
        SchemeKind::Mcs,
        SchemeKind::Mcs2,
        SchemeKind::Sc2a,
    ];

    pub const SECOND_ORDER: [SchemeKind; 6] = [
        SchemeKind::Cnfi,
        SchemeKind::Ietr,
        SchemeKind::Cnab,
        SchemeKind::Mcs,
        SchemeKind::Mcs2,
        SchemeKind::Sc2a,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Cnfe => "CNFE",
            SchemeKind::Cnfi => "CNFI",
            SchemeKind::Ietr => "IETR",
            SchemeKind::Cnab => "CNAB",
            SchemeKind::Mcs => "MCS",
            SchemeKind::Mcs2 => "MCS2",
            SchemeKind::Sc2a => "SC2A",
        }
    }

    /// Crank-Nicolson family: one implicit solve with the whole of `A_D`.
    pub fn is_crank_nicolson(self) -> bool {
        matches!(self, SchemeKind::Cnfe | SchemeKind::Cnfi | SchemeKind::Ietr | SchemeKind::Cnab)
    }

    pub fn is_two_step(self) -> bool {
        matches!(self, SchemeKind::Cnab | SchemeKind::Mcs2 | SchemeKind::Sc2a)
    }

    pub fn order(self) -> u32 {
        if self == SchemeKind::Cnfe {
            1
        } else {
            2
        }
    }

    /// Jump-operator products per regular step (with the default `l = 2`
    /// for CNFI).
    pub fn jump_evaluations_per_step(self) -> usize {
        match self {
            SchemeKind::Cnfi | SchemeKind::Ietr | SchemeKind::Mcs => 2,
            _ => 1,
        }
    }

    /// Step count giving equal jump-operator work: schemes with one product
    /// per step take twice as many steps.
    pub fn fair_steps(self, n: usize) -> usize {
        if self.jump_evaluations_per_step() == 1 {
            2 * n
        } else {
            n
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// Scheme choice with its free coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig<T> {
    pub scheme: SchemeKind,
    /// Weight of the implicit directional stages (ADI schemes).
    pub theta: T,
    /// Fixed-point iterations per step (CNFI).
    pub iterations: usize,
    /// Adams-Bashforth weights on `V^(n-1)`, `V^(n-2)` for the explicit part.
    pub adams_hat: [T; 2],
    /// Weights for the directional part of SC2A.
    pub adams_check: [T; 2],
}

impl<T: Real> SchemeConfig<T> {
    /// Defaults: `theta = 1/3` (MCS, MCS2), `3/4` (SC2A), `l = 2` (CNFI).
    pub fn new(scheme: SchemeKind) -> Self {
        let theta = if scheme == SchemeKind::Sc2a { T::lit(0.75) } else { T::one() / T::lit(3.0) };
        SchemeConfig {
            scheme,
            theta,
            iterations: 2,
            adams_hat: [T::lit(1.5), T::lit(-0.5)],
            adams_check: Self::check_weights(theta),
        }
    }

    fn check_weights(theta: T) -> [T; 2] {
        [T::lit(1.5) - theta, T::lit(-0.5) + theta]
    }

    /// Sets `theta` and the SC2A weights that depend on it.
    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = theta;
        self.adams_check = Self::check_weights(theta);
        self
    }

    pub fn with_iterations(mut self, l: usize) -> Self {
        self.iterations = l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > T::zero()) || !self.theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("CNFI needs at least one iteration".into()));
        }
        Ok(())
    }

    /// Jump-operator products per regular step for this configuration.
    pub fn jump_evaluations_per_step(&self) -> usize {
        match self.scheme {
            SchemeKind::Cnfi => self.iterations,
            k => k.jump_evaluations_per_step(),
        }
    }
}
