//! Command-line front end: single prices, temporal and total error studies,
//! and reference values.
//!
//! Every flag can also be given in a flat `key = value` file passed with
//! `--config`; flags on the command line take precedence over the file.
//! Exit status: 0 on success, 2 for invalid input or configuration, 3 for
//! numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use merton2d::analytic::{mc_reference_price, put_on_min_value};
use merton2d::harness::{
    emit_report, parse_list, price, temporal_error_study, total_error_study, ExperimentConfig, FlatConfig, Problem, ReferenceCache,
    ReferenceKind, DEFAULT_TEMPORAL_M,
};
use merton2d::{Error, ParameterSet, PayoffKind, Result, SchemeConfig, SchemeKind, SetId};

#[derive(Parser)]
#[command(name = "merton2d", version, about = "Two-asset Merton jump-diffusion option pricer and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price one option at a spot pair by solving the PIDE.
    Price(PriceArgs),
    /// Temporal errors against a fine MCS2 reference on a fixed grid.
    TemporalStudy(StudyArgs),
    /// Total errors of the put on the minimum against the semi-closed value.
    TotalStudy(StudyArgs),
    /// Semi-closed (put on the minimum) and Monte Carlo reference values.
    Reference(ReferenceArgs),
}

#[derive(Args)]
struct Common {
    /// Parameter set: 1, 2 or 3.
    #[arg(long)]
    set: Option<String>,
    /// Payoff: min or avg.
    #[arg(long)]
    payoff: Option<String>,
    /// Flat key = value file mirroring the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    common: Common,
    /// Cells per direction.
    #[arg(long)]
    m: Option<String>,
    /// Time steps.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// First spot price (default: the strike).
    #[arg(long)]
    s1: Option<String>,
    /// Second spot price (default: the strike).
    #[arg(long)]
    s2: Option<String>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// Cells per direction (temporal study).
    #[arg(long)]
    m: Option<String>,
    /// Comma-separated base step counts (temporal study).
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated grid sizes (total study).
    #[arg(long)]
    m_list: Option<String>,
    /// Comma-separated scheme names.
    #[arg(long)]
    schemes: Option<String>,
    /// Steps of the MCS2 reference (temporal study).
    #[arg(long)]
    reference_steps: Option<String>,
    /// Directory for the CSV and SVG output.
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Args)]
struct ReferenceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    s1: Option<String>,
    #[arg(long)]
    s2: Option<String>,
    /// Monte Carlo paths.
    #[arg(long)]
    paths: Option<String>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<String>,
}

/// Command-line values over configuration-file values.
struct Settings {
    file: FlatConfig,
    flags: Vec<(&'static str, Option<String>)>,
}

impl Settings {
    fn new(config: &Option<PathBuf>, flags: Vec<(&'static str, Option<String>)>) -> Result<Self> {
        let file = match config {
            Some(path) => FlatConfig::load(path)?,
            None => FlatConfig::default(),
        };
        let mut allowed: Vec<&str> = flags.iter().map(|f| f.0).collect();
        allowed.push("config");
        file.check_keys(&allowed)?;
        if file.raw("config").is_some() {
            return Err(Error::Config("a configuration file cannot name another one".into()));
        }
        Ok(Settings { file, flags })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let flag = self.flags.iter().find(|f| f.0 == key).and_then(|f| f.1.as_deref());
        flag.or_else(|| self.file.raw(key))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| v.trim().parse::<T>().map_err(|e| Error::Config(format!("--{key} {v}: {e}")))).transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| parse_list(v).map_err(|e| Error::Config(format!("--{key}: {e}")))).transpose()
    }

    fn set(&self) -> Result<SetId> {
        Ok(self.get("set")?.unwrap_or(SetId::Set1))
    }

    fn payoff(&self) -> Result<PayoffKind> {
        Ok(self.get("payoff")?.unwrap_or(PayoffKind::PutOnMin))
    }
}

fn common_flags(c: &Common) -> Vec<(&'static str, Option<String>)> {
    vec![("set", c.set.clone()), ("payoff", c.payoff.clone())]
}

fn run_price(a: PriceArgs) -> Result<()> {
    let mut flags = common_flags(&a.common);
    flags.extend([("m", a.m), ("n", a.n), ("scheme", a.scheme), ("s1", a.s1), ("s2", a.s2)]);
    let st = Settings::new(&a.common.config, flags)?;
    let (set, payoff) = (st.set()?, st.payoff()?);
    let strike = ParameterSet::preset(set).strike;
    let m = st.get("m")?.unwrap_or(DEFAULT_TEMPORAL_M);
    let n = st.get("n")?.unwrap_or(100);
    let scheme: SchemeKind = st.get("scheme")?.unwrap_or(SchemeKind::Mcs2);
    let s1 = st.get("s1")?.unwrap_or(strike);
    let s2 = st.get("s2")?.unwrap_or(strike);
    let problem = Problem::new(set, payoff, m)?;
    let v = price(&problem, SchemeConfig::new(scheme), n, s1, s2)?;
    println!("set {} {payoff} {scheme} m={m} N={n} V({s1}, {s2}) = {v:.10}", set.number());
    Ok(())
}

fn study_config(a: StudyArgs, total: bool) -> Result<ExperimentConfig> {
    let mut flags = common_flags(&a.common);
    flags.extend([
        ("m", a.m),
        ("n-list", a.n_list),
        ("m-list", a.m_list),
        ("schemes", a.schemes),
        ("reference-steps", a.reference_steps),
        ("out-dir", a.out_dir),
    ]);
    let st = Settings::new(&a.common.config, flags)?;
    let set = st.set()?;
    let mut c = if total {
        if st.payoff()? != PayoffKind::PutOnMin {
            return Err(Error::Config("total-error studies are available for the put on the minimum only".into()));
        }
        ExperimentConfig::total(set)
    } else {
        ExperimentConfig::temporal(set, st.payoff()?)
    };
    if let Some(m) = st.get("m")? {
        c.m = m;
    }
    if let Some(v) = st.list("n-list")? {
        c.n_list = v;
    }
    if let Some(v) = st.list("m-list")? {
        c.m_list = v;
    }
    if let Some(v) = st.list("schemes")? {
        c.schemes = v;
    }
    if let Some(steps) = st.get("reference-steps")? {
        if total {
            return Err(Error::Config("--reference-steps applies to temporal studies only".into()));
        }
        c.reference = ReferenceKind::Mcs2 { steps };
    }
    c.out_dir = Some(PathBuf::from(st.raw("out-dir").unwrap_or("out")));
    if c.schemes.is_empty() {
        return Err(Error::Config("the scheme list is empty".into()));
    }
    c.validate()?;
    Ok(c)
}

fn run_study(a: StudyArgs, total: bool) -> Result<()> {
    let c = study_config(a, total)?;
    let report = if total { total_error_study(&c)? } else { temporal_error_study(&c, &mut ReferenceCache::new())? };
    let stem = if total {
        format!("total_set{}_{}", c.set.number(), c.payoff.short_name())
    } else {
        format!("temporal_set{}_{}_m{}", c.set.number(), c.payoff.short_name(), c.m)
    };
    let dir = c.out_dir.as_deref().expect("set by study_config");
    let (csv, svg) = emit_report(&report, dir, &stem)?;
    for s in report.schemes() {
        let errors: Vec<String> = report.scheme_rows(s).map(|r| format!("{:.3e}", r.error)).collect();
        let slope = report.fitted_slope(s).map(|k| format!("{k:.3}")).unwrap_or_else(|| "-".into());
        println!("{s:<5} slope {slope:>7}  errors {}", errors.join(" "));
    }
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn run_reference(a: ReferenceArgs) -> Result<()> {
    let mut flags = common_flags(&a.common);
    flags.extend([("s1", a.s1), ("s2", a.s2), ("paths", a.paths), ("seed", a.seed)]);
    let st = Settings::new(&a.common.config, flags)?;
    let (set, payoff) = (st.set()?, st.payoff()?);
    let ps = ParameterSet::preset(set);
    let option = ps.option(payoff);
    let s1 = st.get("s1")?.unwrap_or(ps.strike);
    let s2 = st.get("s2")?.unwrap_or(ps.strike);
    if payoff == PayoffKind::PutOnMin {
        let v = put_on_min_value(&ps.params, &option, s1, s2)?;
        println!("set {} {payoff} V({s1}, {s2}) semi-closed = {v:.10}", set.number());
    }
    let paths = st.get("paths")?.unwrap_or(1_000_000);
    let seed = st.get("seed")?.unwrap_or(2024);
    let mc = mc_reference_price(&ps.params, &option, s1, s2, paths, seed)?;
    println!(
        "set {} {payoff} V({s1}, {s2}) monte carlo = {:.10} +- {:.2e} ({} paths, seed {seed})",
        set.number(),
        mc.price,
        mc.std_error,
        mc.paths
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Price(a) => run_price(a),
        Command::TemporalStudy(a) => run_study(a, false),
        Command::TotalStudy(a) => run_study(a, true),
        Command::Reference(a) => run_reference(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
