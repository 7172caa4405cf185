//! Convergence studies over schemes, parameter sets and payoffs, single-point
//! pricing, and report output for the command-line tool.

mod config;
mod report;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

pub use config::{parse_list, FlatConfig};
pub use report::{emit_report, least_squares_slope, ErrorReport, ReferenceKind, ReportRow, StudyKind, CSV_HEADER};

use crate::analytic::put_on_min_value;
use crate::error::{Error, Result};
use crate::grid::{build_grid, cell_average_initial, roi_mask, GridSpec, SpatialGrid};
use crate::jump_operator::JumpOperator;
use crate::model::{ModelParams, OptionSpec, ParameterSet, PayoffKind, SetId};
use crate::spatial_operator::OperatorSet;
use crate::stepping::{run, PideSystem, SchemeConfig, SchemeKind};

/// Steps of the MCS2 reference in temporal studies.
pub const DEFAULT_REFERENCE_STEPS: usize = 3000;
pub const DEFAULT_TEMPORAL_M: usize = 75;
pub const DEFAULT_N_LIST: [usize; 8] = [10, 20, 40, 80, 160, 320, 640, 1000];
pub const DEFAULT_M_LIST: [usize; 4] = [20, 40, 80, 160];

/// Discretized pricing problem on one grid: operators, initial values and
/// region-of-interest nodes.
pub struct Problem {
    pub set: Option<SetId>,
    pub payoff: PayoffKind,
    pub m: usize,
    pub params: ModelParams<f64>,
    pub option: OptionSpec<f64>,
    pub grid: SpatialGrid<f64>,
    pub system: PideSystem<f64>,
    pub initial: Vec<f64>,
    pub roi: Vec<usize>,
}

impl Problem {
    /// One of the preset parameter sets with its domain size.
    pub fn new(set: SetId, payoff: PayoffKind, m: usize) -> Result<Self> {
        let ps = ParameterSet::preset(set);
        let mut p = Self::custom(ps.params, ps.option(payoff), ps.s_max(payoff), m)?;
        p.set = Some(set);
        Ok(p)
    }

    pub fn custom(params: ModelParams<f64>, option: OptionSpec<f64>, s_max: f64, m: usize) -> Result<Self> {
        params.validate()?;
        let grid = build_grid(&GridSpec::new(option.payoff, m, option.strike, s_max))?;
        let system = PideSystem::new(OperatorSet::assemble(&params, &grid)?, JumpOperator::new(&params, &grid)?)?;
        let initial = cell_average_initial(&grid, &option);
        let roi = roi_mask(&grid, option.strike)?;
        Ok(Problem { set: None, payoff: option.payoff, m, params, option, grid, system, initial, roi })
    }

    /// `V^N` at maturity with `n_steps` steps.
    pub fn solve(&self, config: SchemeConfig<f64>, n_steps: usize) -> Result<Vec<f64>> {
        run(&self.system, config, &self.initial, n_steps, self.option.maturity)
    }

    /// Maximum absolute difference over the region of interest.
    pub fn roi_error(&self, v: &[f64], reference: &[f64]) -> f64 {
        self.roi.iter().map(|&k| (v[k] - reference[k]).abs()).fold(0.0, f64::max)
    }

    /// Semi-closed values at the region-of-interest nodes; other entries are NaN.
    pub fn analytic_reference(&self) -> Result<Vec<f64>> {
        if self.payoff != PayoffKind::PutOnMin {
            return Err(Error::Config("an analytic reference exists for the put on the minimum only".into()));
        }
        let mut out = vec![f64::NAN; self.grid.len()];
        let n1 = self.grid.m1() + 1;
        for &k in &self.roi {
            let (s1, s2) = self.grid.node(k % n1, k / n1);
            out[k] = put_on_min_value(&self.params, &self.option, s1, s2)?;
        }
        Ok(out)
    }

    fn reference(&self, kind: ReferenceKind) -> Result<Vec<f64>> {
        match kind {
            ReferenceKind::Mcs2 { steps } => self.solve(SchemeConfig::new(SchemeKind::Mcs2), steps),
            ReferenceKind::Analytic => self.analytic_reference(),
        }
    }
}

/// Reference solutions keyed by problem and reference kind.
#[derive(Default)]
pub struct ReferenceCache {
    map: HashMap<(Option<SetId>, PayoffKind, usize, ReferenceKind), Arc<Vec<f64>>>,
    computations: usize,
}

impl ReferenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(&mut self, problem: &Problem, kind: ReferenceKind) -> Result<Arc<Vec<f64>>> {
        let key = (problem.set, problem.payoff, problem.m, kind);
        if let Some(v) = self.map.get(&key) {
            return Ok(Arc::clone(v));
        }
        let v = Arc::new(problem.reference(kind)?);
        self.computations += 1;
        self.map.insert(key, Arc::clone(&v));
        Ok(v)
    }

    /// Number of reference solutions computed so far.
    pub fn computations(&self) -> usize {
        self.computations
    }
}

/// Settings of one study.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub set: SetId,
    pub payoff: PayoffKind,
    /// Cells per direction (temporal studies).
    pub m: usize,
    /// Base step counts (temporal studies).
    pub n_list: Vec<usize>,
    /// Grid sizes (total-error studies), each run with `N = ceil(m / 3)`.
    pub m_list: Vec<usize>,
    pub schemes: Vec<SchemeKind>,
    pub reference: ReferenceKind,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn temporal(set: SetId, payoff: PayoffKind) -> Self {
        ExperimentConfig {
            set,
            payoff,
            m: DEFAULT_TEMPORAL_M,
            n_list: DEFAULT_N_LIST.to_vec(),
            m_list: DEFAULT_M_LIST.to_vec(),
            schemes: SchemeKind::ALL.to_vec(),
            reference: ReferenceKind::Mcs2 { steps: DEFAULT_REFERENCE_STEPS },
            out_dir: None,
        }
    }

    pub fn total(set: SetId) -> Self {
        ExperimentConfig { reference: ReferenceKind::Analytic, ..Self::temporal(set, PayoffKind::PutOnMin) }
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = |v: &[usize]| !v.is_empty() && v[0] >= 1 && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.n_list) {
            return Err(Error::Config("n-list must be a nonempty, strictly increasing list of positive counts".into()));
        }
        if !increasing(&self.m_list) {
            return Err(Error::Config("m-list must be a nonempty, strictly increasing list".into()));
        }
        if let ReferenceKind::Mcs2 { steps } = self.reference {
            if steps < 2 {
                return Err(Error::Config("the MCS2 reference needs at least 2 steps".into()));
            }
        }
        Ok(())
    }
}

/// `N = ceil(m / 3)`
pub fn total_study_steps(m: usize) -> usize {
    m.div_ceil(3)
}

fn order(prev: Option<(usize, f64)>, x: usize, e: f64) -> Option<f64> {
    let (xp, ep) = prev?;
    (ep > 0.0 && e > 0.0).then(|| (ep / e).log2() / (x as f64 / xp as f64).log2())
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64() * 1e3)
}

/// Temporal errors on an existing problem. `inspect` sees every row with
/// the solution it was measured on.
pub fn temporal_error_study_on(
    problem: &Problem,
    schemes: &[SchemeKind],
    n_list: &[usize],
    reference: ReferenceKind,
    cache: &mut ReferenceCache,
    mut inspect: impl FnMut(&ReportRow, &[f64]),
) -> Result<ErrorReport> {
    let v_ref = cache.get_or_compute(problem, reference)?;
    let mut report = ErrorReport::new(StudyKind::Temporal, reference);
    let set = problem.set.ok_or_else(|| Error::Config("studies need a preset parameter set".into()))?;
    for &scheme in schemes {
        let mut prev = None;
        for &n in n_list {
            let n_prime = scheme.fair_steps(n);
            let (v, wall_ms) = timed(|| problem.solve(SchemeConfig::new(scheme), n_prime));
            let v = v?;
            let error = problem.roi_error(&v, &v_ref);
            let row = ReportRow {
                set,
                payoff: problem.payoff,
                scheme,
                m: problem.m,
                n,
                n_prime,
                error,
                observed_order: order(prev, n, error),
                wall_ms,
            };
            inspect(&row, &v);
            prev = Some((n, error));
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// Temporal errors `max_ROI |V^N' - V_ref|` for every scheme and `N`, with
/// `N' = N` or `2N` so that all schemes do equal jump-operator work.
pub fn temporal_error_study(config: &ExperimentConfig, cache: &mut ReferenceCache) -> Result<ErrorReport> {
    config.validate()?;
    let problem = Problem::new(config.set, config.payoff, config.m)?;
    temporal_error_study_on(&problem, &config.schemes, &config.n_list, config.reference, cache, |_, _| {})
}

/// Total errors against the semi-closed solution for every `m` in the
/// sweep, with `N = ceil(m / 3)` and the equal-work rule.
pub fn total_error_study(config: &ExperimentConfig) -> Result<ErrorReport> {
    config.validate()?;
    if config.payoff != PayoffKind::PutOnMin || config.reference != ReferenceKind::Analytic {
        return Err(Error::Config("total-error studies need the put on the minimum with the analytic reference".into()));
    }
    let mut report = ErrorReport::new(StudyKind::Total, ReferenceKind::Analytic);
    let mut prev: HashMap<SchemeKind, (usize, f64)> = HashMap::new();
    for &m in &config.m_list {
        let problem = Problem::new(config.set, config.payoff, m)?;
        let exact = problem.analytic_reference()?;
        let n = total_study_steps(m);
        for &scheme in &config.schemes {
            let n_prime = scheme.fair_steps(n);
            let (v, wall_ms) = timed(|| problem.solve(SchemeConfig::new(scheme), n_prime));
            let error = problem.roi_error(&v?, &exact);
            report.rows.push(ReportRow {
                set: config.set,
                payoff: config.payoff,
                scheme,
                m,
                n,
                n_prime,
                error,
                observed_order: order(prev.get(&scheme).copied(), m, error),
                wall_ms,
            });
            prev.insert(scheme, (m, error));
        }
    }
    Ok(report)
}

/// Price at `(s1, s2)` by bilinear interpolation of `V^N`.
pub fn price(problem: &Problem, scheme: SchemeConfig<f64>, n_steps: usize, s1: f64, s2: f64) -> Result<f64> {
    // check the query first: the solve is the expensive part
    problem.grid.interpolate(&problem.initial, s1, s2)?;
    let v = problem.solve(scheme, n_steps)?;
    problem.grid.interpolate(&v, s1, s2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_computed_once_per_problem() {
        let problem = Problem::new(SetId::Set1, PayoffKind::PutOnMin, 12).unwrap();
        let mut cache = ReferenceCache::new();
        let kind = ReferenceKind::Mcs2 { steps: 40 };
        let schemes = [SchemeKind::Cnfe, SchemeKind::Mcs];
        let r = temporal_error_study_on(&problem, &schemes, &[5, 10], kind, &mut cache, |_, _| {}).unwrap();
        temporal_error_study_on(&problem, &schemes, &[5], kind, &mut cache, |_, _| {}).unwrap();
        assert_eq!(cache.computations(), 1);
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.rows[0].n_prime, 10);
        assert_eq!(r.rows[2].n_prime, 5);
        assert!(r.rows[0].observed_order.is_none() && r.rows[1].observed_order.is_some());
        cache.get_or_compute(&problem, ReferenceKind::Mcs2 { steps: 20 }).unwrap();
        assert_eq!(cache.computations(), 2);
    }

    #[test]
    fn scheme_against_itself_has_zero_error() {
        let problem = Problem::new(SetId::Set2, PayoffKind::PutOnAverage, 10).unwrap();
        let mut cache = ReferenceCache::new();
        let r = temporal_error_study_on(&problem, &[SchemeKind::Mcs2], &[20], ReferenceKind::Mcs2 { steps: 40 }, &mut cache, |_, _| {}).unwrap();
        assert_eq!(r.rows[0].error, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::temporal(SetId::Set1, PayoffKind::PutOnMin);
        assert!(c.validate().is_ok());
        c.n_list = vec![10, 10];
        assert!(c.validate().is_err());
        c.n_list = vec![];
        assert!(c.validate().is_err());
        let mut t = ExperimentConfig::total(SetId::Set1);
        t.payoff = PayoffKind::PutOnAverage;
        assert!(matches!(total_error_study(&t), Err(Error::Config(_))));
        assert_eq!(total_study_steps(20), 7);
        assert_eq!(total_study_steps(75), 25);
    }

    #[test]
    fn small_total_study_is_sane() {
        let mut c = ExperimentConfig::total(SetId::Set1);
        c.m_list = vec![20];
        c.schemes = vec![SchemeKind::Mcs2, SchemeKind::Cnfe];
        let r = total_error_study(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(row.error > 0.0 && row.error < 100.0, "{row:?}");
        }
    }

    #[test]
    fn price_rejects_points_outside_the_domain() {
        let problem = Problem::new(SetId::Set1, PayoffKind::PutOnMin, 8).unwrap();
        assert!(matches!(price(&problem, SchemeConfig::new(SchemeKind::Mcs), 4, 600.0, 10.0), Err(Error::OutOfDomain { .. })));
        let v = price(&problem, SchemeConfig::new(SchemeKind::Mcs), 4, 0.0, 0.0).unwrap();
        assert!((v - 100.0 * (-0.05f64).exp()).abs() < 0.2);
    }
}
