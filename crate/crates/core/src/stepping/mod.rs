//! Operator-splitting time integrators for `V' = (A_D + A_J) V`.
//!
//! The jump part `A_J` is always explicit. The Crank-Nicolson family (CNFE,
//! CNFI, IETR, CNAB) solves with `I - dt/2 A_D` once per step and starts with
//! two half-steps of IMEX Euler. The ADI family (MCS, MCS2, SC2A) solves only
//! with the one-directional factors `I - theta dt A_j`; the two-step members
//! take their first step with MCS at `theta = 1/3`.

mod scheme;
mod system;

use std::cell::Cell;

pub use scheme::{SchemeConfig, SchemeKind};
pub use system::{DenseSystem, PideSystem, SplitSystem, StageSolver, StageStructure};

use crate::error::{Error, Result};
use crate::linalg::axpy;
use crate::spatial_operator::Which;
use crate::Real;

/// Solution after `n` steps of size `dt`. For two-step schemes `v_prev`
/// holds `V^(n-1)` once `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepperState<T> {
    pub v_curr: Vec<T>,
    pub v_prev: Option<Vec<T>>,
    pub n: usize,
    pub dt: T,
}

/// Factorizations of one run, computed once for a fixed `dt` and `theta`.
pub struct FactoredStage<T> {
    dt: T,
    theta: T,
    /// `I - dt/2 A_D` (Crank-Nicolson family).
    full: Option<Box<dyn StageSolver<T>>>,
    /// `I - theta dt A_j`, `j = 1, 2` (ADI family).
    dirs: Option<[Box<dyn StageSolver<T>>; 2]>,
    /// `I - dt/3 A_j` for the MCS start of MCS2 and SC2A when `theta != 1/3`.
    start_dirs: Option<[Box<dyn StageSolver<T>>; 2]>,
}

impl<T: Real> FactoredStage<T> {
    pub fn new<S: SplitSystem<T> + ?Sized>(system: &S, config: &SchemeConfig<T>, dt: T) -> Result<Self> {
        let theta = config.theta;
        let dir_pair = |th: T| -> Result<[Box<dyn StageSolver<T>>; 2]> {
            Ok([system.factor_direction(1, th * dt)?, system.factor_direction(2, th * dt)?])
        };
        let start_theta = T::one() / T::lit(3.0);
        let mut stage = FactoredStage { dt, theta, full: None, dirs: None, start_dirs: None };
        if config.scheme.is_crank_nicolson() {
            stage.full = Some(system.factor_full(T::lit(0.5) * dt)?);
        } else {
            stage.dirs = Some(dir_pair(theta)?);
            if config.scheme != SchemeKind::Mcs && theta != start_theta {
                stage.start_dirs = Some(dir_pair(start_theta)?);
            }
        }
        Ok(stage)
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn full(&self) -> Option<&dyn StageSolver<T>> {
        self.full.as_deref()
    }

    pub fn directional(&self) -> Option<&[Box<dyn StageSolver<T>>; 2]> {
        self.dirs.as_ref()
    }

    fn start_directional(&self) -> Option<&[Box<dyn StageSolver<T>>; 2]> {
        self.start_dirs.as_ref().or(self.dirs.as_ref())
    }

    /// Structures of every factored matrix held.
    pub fn structures(&self) -> Vec<StageStructure> {
        let mut out: Vec<StageStructure> = self.full.iter().map(|s| s.structure()).collect();
        for pair in self.dirs.iter().chain(self.start_dirs.iter()) {
            out.extend(pair.iter().map(|s| s.structure()));
        }
        out
    }
}

/// `a x + b y`
fn comb<T: Real>(a: T, x: &[T], b: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect()
}

fn sum3<T: Real>(a: &[T], b: &[T], c: &[T]) -> Vec<T> {
    a.iter().zip(b).zip(c).map(|((&x, &y), &z)| x + y + z).collect()
}

/// Time stepper for one scheme, system and step size.
pub struct Stepper<'a, T: Real, S: SplitSystem<T> + ?Sized> {
    system: &'a S,
    config: SchemeConfig<T>,
    stages: FactoredStage<T>,
    jump_evals: Cell<usize>,
}

impl<'a, T: Real, S: SplitSystem<T> + ?Sized> Stepper<'a, T, S> {
    pub fn new(system: &'a S, config: SchemeConfig<T>, dt: T) -> Result<Self> {
        config.validate()?;
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {dt}")));
        }
        let stages = FactoredStage::new(system, &config, dt)?;
        Ok(Stepper { system, config, stages, jump_evals: Cell::new(0) })
    }

    pub fn config(&self) -> &SchemeConfig<T> {
        &self.config
    }

    pub fn dt(&self) -> T {
        self.stages.dt
    }

    pub fn stages(&self) -> &FactoredStage<T> {
        &self.stages
    }

    /// Number of `A_J` products so far.
    pub fn jump_evaluations(&self) -> usize {
        self.jump_evals.get()
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() != self.system.len() {
            return Err(Error::LengthMismatch { expected: self.system.len(), got: v.len() });
        }
        Ok(())
    }

    fn jump(&self, v: &[T]) -> Result<Vec<T>> {
        self.jump_evals.set(self.jump_evals.get() + 1);
        let mut out = vec![T::zero(); v.len()];
        self.system.apply_jump(v, &mut out)?;
        Ok(out)
    }

    fn part(&self, which: Which, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); v.len()];
        self.system.apply_part(which, v, &mut out)?;
        Ok(out)
    }

    fn full_solver(&self) -> &dyn StageSolver<T> {
        self.stages.full().expect("Crank-Nicolson factor built for this scheme")
    }

    /// Two IMEX Euler half-steps from `V^0` to `V^1`.
    pub fn imex_euler_start(&self, v0: &[T]) -> Result<Vec<T>> {
        self.check_len(v0)?;
        let half_dt = T::lit(0.5) * self.dt();
        let solver = self.full_solver();
        let mut v = v0.to_vec();
        for _ in 0..2 {
            let j = self.jump(&v)?;
            axpy(half_dt, &j, &mut v);
            solver.solve_in_place(&mut v);
        }
        Ok(v)
    }

    /// Crank-Nicolson with `l` fixed-point iterations on the jump term.
    fn cn_fixed_point(&self, v: &[T], l: usize) -> Result<Vec<T>> {
        self.check_len(v)?;
        let dt = self.dt();
        let half_dt = T::lit(0.5) * dt;
        let solver = self.full_solver();
        let d = self.part(Which::FullD, v)?;
        let j0 = self.jump(v)?;
        let mut base = v.to_vec();
        axpy(half_dt, &d, &mut base);
        let mut y = base.clone();
        axpy(dt, &j0, &mut y);
        solver.solve_in_place(&mut y);
        for _ in 1..l {
            let jk = self.jump(&y)?;
            y = base.clone();
            axpy(half_dt, &jk, &mut y);
            axpy(half_dt, &j0, &mut y);
            solver.solve_in_place(&mut y);
        }
        Ok(y)
    }

    pub fn cnfe_step(&self, v: &[T]) -> Result<Vec<T>> {
        self.cn_fixed_point(v, 1)
    }

    pub fn cnfi_step(&self, v: &[T]) -> Result<Vec<T>> {
        self.cn_fixed_point(v, self.config.iterations)
    }

    pub fn ietr_step(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        let dt = self.dt();
        let half_dt = T::lit(0.5) * dt;
        let d = self.part(Which::FullD, v)?;
        let j0 = self.jump(v)?;
        let mut y0 = v.to_vec();
        axpy(dt, &d, &mut y0);
        axpy(dt, &j0, &mut y0);
        let jw = self.jump(&comb(T::one(), &y0, -T::one(), v))?;
        axpy(half_dt, &jw, &mut y0);
        axpy(-half_dt, &d, &mut y0);
        self.full_solver().solve_in_place(&mut y0);
        Ok(y0)
    }

    pub fn cnab_step(&self, v: &[T], v_prev: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        self.check_len(v_prev)?;
        let dt = self.dt();
        let [b1, b2] = self.config.adams_hat;
        let d = self.part(Which::FullD, v)?;
        let jh = self.jump(&comb(b1, v, b2, v_prev))?;
        let mut y = v.to_vec();
        axpy(T::lit(0.5) * dt, &d, &mut y);
        axpy(dt, &jh, &mut y);
        self.full_solver().solve_in_place(&mut y);
        Ok(y)
    }

    /// The two stabilizing corrections `Y_j = Y_(j-1) + theta dt A_j (Y_j - V)`.
    fn corrections(&self, mut y: Vec<T>, a1v: &[T], a2v: &[T], theta: T, dirs: &[Box<dyn StageSolver<T>>; 2]) -> Vec<T> {
        let c = theta * self.dt();
        axpy(-c, a1v, &mut y);
        dirs[0].solve_in_place(&mut y);
        axpy(-c, a2v, &mut y);
        dirs[1].solve_in_place(&mut y);
        y
    }

    fn split_parts(&self, v: &[T]) -> Result<[Vec<T>; 3]> {
        Ok([self.part(Which::Mixed, v)?, self.part(Which::Dir1, v)?, self.part(Which::Dir2, v)?])
    }

    /// Shared MCS/MCS2 tail: given `Y_0`, returns `V^n`. With `jump_in_hat`
    /// the jump term enters the correction stages (MCS); otherwise only the
    /// mixed term does (MCS2).
    fn mcs_tail(&self, v: &[T], y0: Vec<T>, av: &[Vec<T>; 3], theta: T, dirs: &[Box<dyn StageSolver<T>>; 2], jump_in_hat: bool) -> Result<Vec<T>> {
        let dt = self.dt();
        let y2 = self.corrections(y0.clone(), &av[1], &av[2], theta, dirs);
        let w = comb(T::one(), &y2, -T::one(), v);
        let [mw, a1w, a2w] = self.split_parts(&w)?;
        let dw = sum3(&mw, &a1w, &a2w);
        let mut yt = y0;
        axpy(theta * dt, &mw, &mut yt);
        axpy((T::lit(0.5) - theta) * dt, &dw, &mut yt);
        if jump_in_hat {
            let jw = self.jump(&w)?;
            axpy(theta * dt, &jw, &mut yt);
            axpy((T::lit(0.5) - theta) * dt, &jw, &mut yt);
        }
        Ok(self.corrections(yt, &av[1], &av[2], theta, dirs))
    }

    fn mcs_with(&self, v: &[T], theta: T, dirs: &[Box<dyn StageSolver<T>>; 2]) -> Result<Vec<T>> {
        self.check_len(v)?;
        let dt = self.dt();
        let av = self.split_parts(v)?;
        let d = sum3(&av[0], &av[1], &av[2]);
        let j0 = self.jump(v)?;
        let mut y0 = v.to_vec();
        axpy(dt, &d, &mut y0);
        axpy(dt, &j0, &mut y0);
        self.mcs_tail(v, y0, &av, theta, dirs, true)
    }

    fn dirs(&self) -> &[Box<dyn StageSolver<T>>; 2] {
        self.stages.directional().expect("directional factors built for this scheme")
    }

    pub fn mcs_step(&self, v: &[T]) -> Result<Vec<T>> {
        self.mcs_with(v, self.config.theta, self.dirs())
    }

    /// One MCS step with `theta = 1/3`, the start of MCS2 and SC2A.
    pub fn mcs_start(&self, v0: &[T]) -> Result<Vec<T>> {
        let dirs = self.stages.start_directional().expect("directional factors built for this scheme");
        let theta = if self.stages.start_dirs.is_some() { T::one() / T::lit(3.0) } else { self.config.theta };
        self.mcs_with(v0, theta, dirs)
    }

    pub fn mcs2_step(&self, v: &[T], v_prev: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        self.check_len(v_prev)?;
        let dt = self.dt();
        let [b1, b2] = self.config.adams_hat;
        let av = self.split_parts(v)?;
        let d = sum3(&av[0], &av[1], &av[2]);
        let jh = self.jump(&comb(b1, v, b2, v_prev))?;
        let mut y0 = v.to_vec();
        axpy(dt, &d, &mut y0);
        axpy(dt, &jh, &mut y0);
        self.mcs_tail(v, y0, &av, self.config.theta, self.dirs(), false)
    }

    pub fn sc2a_step(&self, v: &[T], v_prev: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        self.check_len(v_prev)?;
        let dt = self.dt();
        let [h1, h2] = self.config.adams_hat;
        let [c1, c2] = self.config.adams_check;
        let hat = comb(h1, v, h2, v_prev);
        let check = comb(c1, v, c2, v_prev);
        let m = self.part(Which::Mixed, &hat)?;
        let jh = self.jump(&hat)?;
        let a1 = self.part(Which::Dir1, &check)?;
        let a2 = self.part(Which::Dir2, &check)?;
        let mut y0 = v.to_vec();
        axpy(dt, &m, &mut y0);
        axpy(dt, &jh, &mut y0);
        axpy(dt, &a1, &mut y0);
        axpy(dt, &a2, &mut y0);
        let av1 = self.part(Which::Dir1, v)?;
        let av2 = self.part(Which::Dir2, v)?;
        Ok(self.corrections(y0, &av1, &av2, self.config.theta, self.dirs()))
    }

    /// Applies the starting method and returns the state at `n = 1`.
    pub fn start(&self, v0: &[T]) -> Result<StepperState<T>> {
        let scheme = self.config.scheme;
        let v1 = match scheme {
            SchemeKind::Mcs => self.mcs_step(v0)?,
            SchemeKind::Mcs2 | SchemeKind::Sc2a => self.mcs_start(v0)?,
            _ => self.imex_euler_start(v0)?,
        };
        let v_prev = scheme.is_two_step().then(|| v0.to_vec());
        Ok(StepperState { v_curr: v1, v_prev, n: 1, dt: self.dt() })
    }

    /// One regular step of the configured scheme.
    pub fn step(&self, state: &mut StepperState<T>) -> Result<()> {
        let scheme = self.config.scheme;
        let v = &state.v_curr;
        let history = || state.v_prev.as_deref().ok_or(Error::MissingHistory { scheme: scheme.name() });
        let next = match scheme {
            SchemeKind::Cnfe => self.cnfe_step(v)?,
            SchemeKind::Cnfi => self.cnfi_step(v)?,
            SchemeKind::Ietr => self.ietr_step(v)?,
            SchemeKind::Mcs => self.mcs_step(v)?,
            SchemeKind::Cnab => self.cnab_step(v, history()?)?,
            SchemeKind::Mcs2 => self.mcs2_step(v, history()?)?,
            SchemeKind::Sc2a => self.sc2a_step(v, history()?)?,
        };
        let old = std::mem::replace(&mut state.v_curr, next);
        if scheme.is_two_step() {
            state.v_prev = Some(old);
        }
        state.n += 1;
        Ok(())
    }

    /// `V^N` from `V^0`: the starting method followed by `N - 1` steps.
    pub fn integrate(&self, v0: &[T], n_steps: usize) -> Result<Vec<T>> {
        let min = if self.config.scheme.is_two_step() { 2 } else { 1 };
        if n_steps < min {
            return Err(Error::InvalidParameter(format!("{} needs at least {min} steps, got {n_steps}", self.config.scheme)));
        }
        let mut state = self.start(v0)?;
        while state.n < n_steps {
            self.step(&mut state)?;
        }
        Ok(state.v_curr)
    }
}

/// Integrates from `V^0` over `[0, maturity]` with `n_steps` steps.
pub fn run<T: Real, S: SplitSystem<T> + ?Sized>(system: &S, config: SchemeConfig<T>, v0: &[T], n_steps: usize, maturity: T) -> Result<Vec<T>> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("need at least one time step".into()));
    }
    let dt = maturity / T::count(n_steps);
    Stepper::new(system, config, dt)?.integrate(v0, n_steps)
}

#[cfg(test)]
mod tests;
