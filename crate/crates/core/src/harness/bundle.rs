use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::CoverConfig;
use crate::error::{Error, Result};

use super::decomposition::decomposition_cases;
use super::duality::{exact_values, indicator_comparison, lp_certificates, run_duality_suite, submultiplicativity_witness, DualityConfig};
use super::inclusion::{run_inclusion_suite_with, INCLUSION_TOL};
use super::isotropy::{run_isotropization_suite_with, ISOTROPY_TOL};
use super::profile::{regularity_profile, ProfileConfig, RegularityProfile, COLUMNS, DEFAULT_T, POLAR_COLUMNS};
use super::report::SuiteReport;
use super::transforms::run_transform_suite;
use super::volume::{run_volume_product_suite_with, VOLUME_TOL};
use super::widths::run_mean_width_suite;
use super::zoo::{isotropic_function, member, ZOO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Transforms,
    Isotropization,
    Inclusion,
    Duality,
    Profile,
    Volume,
    Decomposition,
    Widths,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Transforms,
        Suite::Isotropization,
        Suite::Inclusion,
        Suite::Duality,
        Suite::Profile,
        Suite::Volume,
        Suite::Decomposition,
        Suite::Widths,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Transforms => "transforms",
            Suite::Isotropization => "isotropization",
            Suite::Inclusion => "inclusion",
            Suite::Duality => "duality",
            Suite::Profile => "profile",
            Suite::Volume => "volume",
            Suite::Decomposition => "decomposition",
            Suite::Widths => "widths",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dims: Vec<usize>,
    pub suites: Vec<Suite>,
    /// Zoo names, closed-form kinds or files; empty means the built-in zoo.
    pub functions: Vec<String>,
    /// Overrides every suite's relative tolerance; the inclusion factor becomes `1 + tol`.
    pub tol: Option<f64>,
    pub seed: u64,
    pub t_values: Vec<f64>,
    /// LP lattice points per axis; `None` uses the per-dimension default.
    pub lp_points: Option<usize>,
    /// Add the scaled-polar pair to each profile.
    pub scaled_polar: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dims: vec![1, 2],
            suites: Suite::ALL.to_vec(),
            functions: Vec::new(),
            tol: None,
            seed: 0,
            t_values: DEFAULT_T.to_vec(),
            lp_points: None,
            scaled_polar: false,
        }
    }
}

impl RunConfig {
    fn cover(&self) -> CoverConfig {
        match self.lp_points {
            Some(p) => CoverConfig::with_points(p),
            None => CoverConfig::default(),
        }
    }

    fn duality(&self) -> DualityConfig {
        let mut cfg = DualityConfig { cover: self.cover(), ..DualityConfig::default() };
        if let Some(t) = self.tol {
            cfg.gap_tol = t;
            cfg.residual_tol = t;
            cfg.identity_tol = t;
            cfg.bound_tol = t;
            cfg.exact_tol = t;
        }
        cfg
    }

    /// Function specs for a per-function suite; dimension three defaults to the Gaussian and the cube.
    fn functions_for(&self, dim: usize) -> Vec<String> {
        if !self.functions.is_empty() {
            return self.functions.clone();
        }
        if dim >= 3 {
            return vec!["gaussian".into(), "indicator_cube".into()];
        }
        ZOO.iter().map(|s| s.to_string()).collect()
    }
}

#[derive(Clone, Debug)]
enum Job {
    Transforms(usize),
    Isotropization(usize),
    Inclusion(usize, String),
    Duality(usize, String),
    LpCertificates(usize),
    ExactValues(usize),
    Indicators(usize),
    Witness,
    Profile(usize, String),
    Volume(usize),
    Decomposition(usize, String),
    Widths,
}

impl Job {
    fn label(&self) -> String {
        match self {
            Job::Transforms(d) => format!("transforms_dim{d}"),
            Job::Isotropization(d) => format!("isotropization_dim{d}"),
            Job::Inclusion(d, f) => format!("inclusion_dim{d}[{f}]"),
            Job::Duality(d, f) => format!("duality_dim{d}[{f}]"),
            Job::LpCertificates(d) => format!("lp_certificates_dim{d}"),
            Job::ExactValues(d) => format!("exact_values_dim{d}"),
            Job::Indicators(d) => format!("indicators_dim{d}"),
            Job::Witness => "submultiplicativity".into(),
            Job::Profile(d, f) => format!("profile_dim{d}[{f}]"),
            Job::Volume(d) => format!("volume_products_dim{d}"),
            Job::Decomposition(d, f) => format!("decompositions_dim{d}[{f}]"),
            Job::Widths => "mean_widths".into(),
        }
    }
}

fn jobs(cfg: &RunConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for suite in &cfg.suites {
        for &dim in &cfg.dims {
            match suite {
                Suite::Transforms => out.push(Job::Transforms(dim)),
                Suite::Isotropization => out.push(Job::Isotropization(dim)),
                Suite::Inclusion => out.extend(cfg.functions_for(dim).into_iter().map(|f| Job::Inclusion(dim, f))),
                Suite::Duality => {
                    out.extend(cfg.functions_for(dim).into_iter().map(|f| Job::Duality(dim, f)));
                    if cfg.functions.is_empty() {
                        out.extend([Job::LpCertificates(dim), Job::ExactValues(dim), Job::Indicators(dim)]);
                    }
                }
                Suite::Profile => out.extend(cfg.functions_for(dim).into_iter().map(|f| Job::Profile(dim, f))),
                Suite::Volume => out.push(Job::Volume(dim)),
                Suite::Decomposition => out.extend(cfg.functions_for(dim).into_iter().map(|f| Job::Decomposition(dim, f))),
                Suite::Widths => {}
            }
        }
        if *suite == Suite::Duality && cfg.functions.is_empty() && cfg.dims.contains(&1) {
            out.push(Job::Witness);
        }
        if *suite == Suite::Widths {
            out.push(Job::Widths);
        }
    }
    out
}

fn profile_report(p: &RegularityProfile) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("profile_dim{}[{}]", p.dim, p.function));
    let name = &p.function;
    report.at_most(
        format!("monotone[{name}]"),
        "t ↦ N(f, t⊙g) is non-increasing for t ≥ 1",
        p.worst_certified_increase(),
        0.0,
    )?;
    report.register(format!("finite[{name}]"), "N(f, t⊙g) < ∞", None, if p.all_finite() { 1.0 } else { -1.0 }, true)?;
    report.record(format!("worst_increase[{name}]"), "t ↦ N(f, t⊙g) is non-increasing for t ≥ 1", p.worst_increase())?;
    for c in &p.columns {
        report.record(format!("kappa_hat[{name}.{}]", c.name), "κ̂ = max_t (t/n) ln N", c.kappa_hat)?;
        if c.expansions > 0 {
            report.record(format!("hull_expansions[{name}.{}]", c.name), "translate hull grown once", c.expansions as f64)?;
        }
    }
    Ok(report)
}

fn run_job(job: &Job, cfg: &RunConfig) -> Result<(SuiteReport, Option<RegularityProfile>)> {
    let tol = cfg.tol;
    let report = match job {
        Job::Transforms(d) => run_transform_suite(*d)?,
        Job::Isotropization(d) => run_isotropization_suite_with(*d, tol.unwrap_or(ISOTROPY_TOL))?,
        Job::Inclusion(d, spec) => {
            let (name, f) = isotropic_function(spec, *d)?;
            let mut r = run_inclusion_suite_with(&f, tol.map_or(INCLUSION_TOL, |t| 1.0 + t))?;
            r.suite_name = format!("inclusion_dim{d}[{name}]");
            r
        }
        Job::Duality(d, spec) => {
            let (name, f) = isotropic_function(spec, *d)?;
            let dcfg = cfg.duality();
            let mut r = run_duality_suite(&f, &f, &dcfg)?;
            r.suite_name = format!("duality_dim{d}[{name},{name}]");
            let g = member("gaussian", *d).expect("gaussian is a zoo member")?;
            let mut against = run_duality_suite(&f, &g, &dcfg)?;
            for c in &mut against.cases {
                c.id = format!("{}[vs_gaussian]", c.id);
            }
            r.extend(against);
            r
        }
        Job::LpCertificates(d) => lp_certificates(*d, &cfg.duality())?,
        Job::ExactValues(d) => exact_values(*d, &cfg.duality())?,
        Job::Indicators(d) => {
            let mut r = indicator_comparison(*d, &cfg.duality())?;
            r.suite_name = format!("indicators_dim{d}");
            r
        }
        Job::Witness => submultiplicativity_witness(&cfg.duality())?,
        Job::Profile(d, spec) => {
            let (name, f) = isotropic_function(spec, *d)?;
            let pcfg = ProfileConfig { cover: cfg.cover(), scaled_polar: cfg.scaled_polar };
            let p = regularity_profile(&name, &f, &cfg.t_values, &pcfg)?;
            return Ok((profile_report(&p)?, Some(p)));
        }
        Job::Volume(d) => run_volume_product_suite_with(*d, tol.unwrap_or(VOLUME_TOL))?,
        Job::Decomposition(d, spec) => {
            let (name, f) = isotropic_function(spec, *d)?;
            let mut r = SuiteReport::new(format!("decompositions_dim{d}[{name}]"));
            decomposition_cases(&mut r, &name, &f)?;
            r
        }
        Job::Widths => run_mean_width_suite(cfg.seed)?,
    };
    Ok((report, None))
}

/// Reports and profiles of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub config: RunConfig,
    pub reports: Vec<SuiteReport>,
    pub profiles: Vec<RegularityProfile>,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    pass: bool,
    asserted_failures: usize,
    cases: usize,
    suites: &'a [SuiteReport],
}

#[derive(Serialize)]
struct EnvFile<'a> {
    package: &'static str,
    version: &'static str,
    seed: u64,
    dims: &'a [usize],
    suites: Vec<&'static str>,
    functions: &'a [String],
    t_values: &'a [f64],
    tolerance_override: Option<f64>,
    lp_points: Option<usize>,
    grids: BTreeMap<String, usize>,
    tolerances: BTreeMap<String, f64>,
}

impl Bundle {
    pub fn failures(&self) -> usize {
        self.reports.iter().map(|r| r.failures().count()).sum()
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0
    }

    /// `0` when every asserted check passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.all_pass())
    }

    pub fn report_json(&self) -> Result<String> {
        let file = ReportFile {
            pass: self.all_pass(),
            asserted_failures: self.failures(),
            cases: self.reports.iter().map(|r| r.cases.len()).sum(),
            suites: &self.reports,
        };
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    pub fn env_json(&self) -> Result<String> {
        let mut grids = BTreeMap::new();
        let mut tolerances = BTreeMap::new();
        for r in &self.reports {
            for (k, v) in &r.environment.grids {
                grids.insert(format!("{}.{k}", r.suite_name), *v);
            }
            for (k, v) in &r.environment.tolerances {
                tolerances.insert(format!("{}.{k}", r.suite_name), *v);
            }
        }
        let c = &self.config;
        let file = EnvFile {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: c.seed,
            dims: &c.dims,
            suites: c.suites.iter().map(|s| s.name()).collect(),
            functions: &c.functions,
            t_values: &c.t_values,
            tolerance_override: c.tol,
            lp_points: c.lp_points,
            grids,
            tolerances,
        };
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    /// One row per function, dimension and scale: `ln N` of every column, then the duality gaps.
    pub fn profile_csv(&self) -> Result<String> {
        profile_csv(&self.profiles)
    }

    /// Writes `report.json`, `profile.csv` and `env.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.report_json()?)?;
        std::fs::write(dir.join("profile.csv"), self.profile_csv()?)?;
        std::fs::write(dir.join("env.json"), self.env_json()?)?;
        Ok(())
    }
}

pub fn profile_csv(profiles: &[RegularityProfile]) -> Result<String> {
    let polar = profiles.iter().any(|p| p.columns.len() > COLUMNS.len());
    let names: Vec<&str> = COLUMNS.iter().chain(if polar { POLAR_COLUMNS.iter() } else { [].iter() }).copied().collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["function".to_string(), "dim".into(), "t".into()];
    header.extend(names.iter().map(|n| format!("ln_{n}")));
    header.extend(names.iter().map(|n| format!("gap_{n}")));
    w.write_record(&header)?;
    for p in profiles {
        for (k, t) in p.t_values.iter().enumerate() {
            let mut row = vec![p.function.clone(), p.dim.to_string(), t.to_string()];
            let cell = |n: &str, pick: fn(&super::profile::ProfileColumn, usize) -> f64| {
                p.column(n).map(|c| pick(c, k).to_string()).unwrap_or_default()
            };
            row.extend(names.iter().map(|n| cell(n, |c, k| c.ln_cover[k])));
            row.extend(names.iter().map(|n| cell(n, |c, k| c.gaps[k])));
            w.write_record(&row)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}

/// Runs every configured suite; jobs run in parallel and are reassembled in a fixed order.
/// A job that errors becomes a single failed case, so one bad input never hides the others.
pub fn run_all(cfg: &RunConfig) -> Result<Bundle> {
    if cfg.dims.is_empty() || cfg.dims.iter().any(|d| !(1..=3).contains(d)) {
        return Err(Error::Input("dimensions must lie in 1..=3".into()));
    }
    if cfg.suites.is_empty() {
        return Err(Error::Input("no suites selected".into()));
    }
    let list = jobs(cfg);
    let results: Vec<_> = list.par_iter().map(|job| run_job(job, cfg)).collect();
    let mut reports = Vec::with_capacity(list.len());
    let mut profiles = Vec::new();
    for (job, res) in list.iter().zip(results) {
        match res {
            Ok((report, profile)) => {
                reports.push(report);
                profiles.extend(profile);
            }
            Err(e) => {
                let mut r = SuiteReport::new(job.label());
                r.failed("suite", "suite runs to completion", &e)?;
                reports.push(r);
            }
        }
    }
    Ok(Bundle { config: cfg.clone(), reports, profiles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suite: Suite) -> RunConfig {
        RunConfig { dims: vec![1], suites: vec![suite], functions: vec!["gaussian".into()], ..RunConfig::default() }
    }

    #[test]
    fn single_suite_bundle_is_byte_stable() {
        let cfg = small(Suite::Inclusion);
        let a = run_all(&cfg).unwrap();
        let b = run_all(&cfg).unwrap();
        assert_eq!(a.report_json().unwrap(), b.report_json().unwrap());
        assert_eq!(a.env_json().unwrap(), b.env_json().unwrap());
        assert_eq!(a.reports.len(), 1);
        assert_eq!(a.exit_code(), 0);
    }

    #[test]
    fn zero_tolerance_flags_failures_with_margins() {
        let cfg = RunConfig { tol: Some(0.0), ..small(Suite::Isotropization) };
        let bundle = run_all(&cfg).unwrap();
        assert_eq!(bundle.exit_code(), 1);
        assert!(bundle.reports[0].failures().all(|c| c.margin < 0.0 && c.value.is_some()));
    }

    #[test]
    fn unknown_function_becomes_a_failed_case() {
        let cfg = RunConfig { functions: vec!["no_such_function".into()], ..small(Suite::Decomposition) };
        let bundle = run_all(&cfg).unwrap();
        assert_eq!(bundle.exit_code(), 1);
        assert!(bundle.reports[0].cases[0].note.as_deref().unwrap().contains("unknown function"));
    }

    #[test]
    fn bundle_files_are_written() {
        let cfg = RunConfig { t_values: vec![1.0, 2.0, 4.0], ..small(Suite::Profile) };
        let bundle = run_all(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        bundle.write(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("function,dim,t,ln_f_by_g"));
        let env: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("env.json")).unwrap()).unwrap();
        assert_eq!(env["seed"], 0);
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report["pass"], true);
    }
}
