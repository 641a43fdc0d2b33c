use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use logconcave::bodies::{ball_body, level_set_body, volume, volume_radius, DirectionSet, RadialBody};
use logconcave::covering::{functional_covering, CoverConfig};
use logconcave::harness::bundle::profile_csv;
use logconcave::harness::profile::DEFAULT_T;
use logconcave::harness::zoo::{isotropic_function, resolve_function};
use logconcave::harness::{regularity_profile, run_all, ProfileConfig, RunConfig, Suite};
use logconcave::isotropic::{isotropize, moments};
use logconcave::transforms::{legendre, legendre_1d_fast, polar_transform, DualGridPair};
use logconcave::{Error, GridPotential, Result};

#[derive(Parser)]
#[command(name = "logconcave", version, about = "Computations with geometric log-concave functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a function and apply the Legendre or polarity transform on a lattice.
    Transform {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = TransformKind::Legendre)]
        kind: TransformKind,
    },
    /// Level-set body R_t(f) or Ball body K_t(f), one per scale.
    Body {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = BodyKind::Level)]
        kind: BodyKind,
        /// Scales; defaults to 50n for level-set bodies and n+1 for Ball bodies.
        #[arg(long, value_delimiter = ',')]
        t_list: Vec<f64>,
    },
    /// Bring a function to isotropic geometric position and print the record.
    Isotropize {
        #[command(flatten)]
        io: Io,
    },
    /// Covering number N(f, t⊙g) with its separation certificate.
    Cover {
        #[command(flatten)]
        io: Io,
        /// The covering function g.
        #[arg(long, default_value = "gaussian")]
        against: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        t_list: Vec<f64>,
    },
    /// Regularity profile of an isotropized function against the standard Gaussian.
    Profile {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_delimiter = ',')]
        t_list: Vec<f64>,
        /// Add the scaled-polar columns.
        #[arg(long)]
        polar: bool,
    },
    /// Run verification suites and write report.json, profile.csv and env.json.
    Verify(Verify),
}

#[derive(Args)]
struct Io {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Zoo name, closed-form kind, or JSON file.
    #[arg(long = "fn", default_value = "gaussian")]
    function: String,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Verify {
    /// Run configuration as JSON; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    dim: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_suite)]
    suite: Vec<Suite>,
    #[arg(long = "fn", value_delimiter = ',')]
    function: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    t_list: Vec<f64>,
    /// LP lattice points per axis.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    polar: bool,
    /// Bundle directory; without it the report (json) or profile (csv) goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Legendre,
    Polar,
}

#[derive(Clone, Copy, ValueEnum)]
enum BodyKind {
    Level,
    Ball,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite '{s}', expected one of {}", names.join(", "))
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}

fn axes(dim: usize, prefix: &str) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

fn transform(io: &Io, kind: TransformKind) -> Result<()> {
    let (_, f) = resolve_function(&io.function, io.dim)?;
    let points = io.grid_points.unwrap_or_else(|| logconcave::functions::grid::default_points(io.dim));
    let primal = f.sampling_grid(points)?;
    let phi = f.sample_potential(&primal)?;
    let out: GridPotential = match kind {
        TransformKind::Legendre => {
            let dual = DualGridPair::for_potential(&phi, points)?.dual;
            if io.dim == 1 {
                legendre_1d_fast(&phi, &dual)?
            } else {
                legendre(&phi, &dual)?
            }
        }
        TransformKind::Polar => polar_transform(&phi, &primal)?,
    };
    let text = match io.format {
        Format::Json => json(&out.to_file())?,
        Format::Csv => {
            let mut header = axes(io.dim, "y");
            header.push("potential".into());
            let rows: Vec<Vec<String>> = (0..out.grid().len())
                .map(|j| {
                    let mut row: Vec<String> = out.grid().node(j).iter().map(|v| v.to_string()).collect();
                    row.push(out.value(j).get().to_string());
                    row
                })
                .collect();
            csv_text(&header, &rows)?
        }
    };
    emit(&io.out, &text)
}

#[derive(Serialize)]
struct BodySummary {
    t: f64,
    volume: f64,
    volume_radius: f64,
    body: RadialBody,
}

fn body(io: &Io, kind: BodyKind, t_list: &[f64]) -> Result<()> {
    let (_, f) = resolve_function(&io.function, io.dim)?;
    let n = io.dim as f64;
    let dirs = Arc::new(match io.grid_points {
        Some(m) => DirectionSet::with_count(io.dim, m)?,
        None => DirectionSet::default_for(io.dim)?,
    });
    let default_t = match kind {
        BodyKind::Level => 50.0 * n,
        BodyKind::Ball => n + 1.0,
    };
    let scales = if t_list.is_empty() { vec![default_t] } else { t_list.to_vec() };
    let bodies = scales
        .iter()
        .map(|&t| {
            let body = match kind {
                BodyKind::Level => level_set_body(&f, t, &dirs)?,
                BodyKind::Ball => ball_body(&f, t, &dirs)?,
            };
            Ok(BodySummary { t, volume: volume(&body), volume_radius: volume_radius(&body), body })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match io.format {
        Format::Json => json(&bodies)?,
        Format::Csv => {
            let mut header = vec!["t".to_string()];
            header.extend(axes(io.dim, "u"));
            header.extend(["rho".into(), "h".into()]);
            let mut rows = Vec::new();
            for b in &bodies {
                let h = b.body.support_body().h;
                for (i, u) in b.body.dirs.directions.iter().enumerate() {
                    let mut row = vec![b.t.to_string()];
                    row.extend(u.iter().map(|v| v.to_string()));
                    row.extend([b.body.rho[i].to_string(), h[i].to_string()]);
                    rows.push(row);
                }
            }
            csv_text(&header, &rows)?
        }
    };
    emit(&io.out, &text)
}

#[derive(Serialize)]
struct IsotropizeSummary {
    function: String,
    input_mass: f64,
    input_barycenter: Vec<f64>,
    record: logconcave::isotropic::IsotropizationRecord,
    output_mass: f64,
    output_covariance: Vec<Vec<f64>>,
}

fn isotropize_cmd(io: &Io) -> Result<()> {
    let (name, f) = resolve_function(&io.function, io.dim)?;
    let before = moments(&f)?;
    let (g, record) = isotropize(&f)?;
    let after = moments(&g)?;
    let n = io.dim;
    let summary = IsotropizeSummary {
        function: name,
        input_mass: before.mass,
        input_barycenter: before.barycenter.iter().copied().collect(),
        record,
        output_mass: after.mass,
        output_covariance: (0..n).map(|i| (0..n).map(|j| after.covariance[(i, j)]).collect()).collect(),
    };
    let text = match io.format {
        Format::Json => json(&summary)?,
        Format::Csv => {
            let r = &summary.record;
            let mut rows = vec![
                vec!["input_mass".into(), summary.input_mass.to_string()],
                vec!["isotropic_constant".into(), r.isotropic_constant.to_string()],
                vec!["a".into(), r.a.to_string()],
                vec!["sup_norm_divisor".into(), r.sup_norm_divisor.to_string()],
                vec!["output_mass".into(), summary.output_mass.to_string()],
            ];
            rows.extend(r.shift.iter().enumerate().map(|(i, v)| vec![format!("shift{}", i + 1), v.to_string()]));
            csv_text(&["quantity".into(), "value".into()], &rows)?
        }
    };
    emit(&io.out, &text)
}

#[derive(Serialize)]
struct CoverRow {
    t: f64,
    covering: f64,
    separation: f64,
    gap: f64,
    constraint_residual: f64,
    packing_residual: f64,
    lattice_points: usize,
    atoms: usize,
}

fn cover(io: &Io, against: &str, t_list: &[f64]) -> Result<()> {
    let (_, f) = resolve_function(&io.function, io.dim)?;
    let (_, g) = resolve_function(against, io.dim)?;
    let cfg = io.grid_points.map_or_else(CoverConfig::default, CoverConfig::with_points);
    let rows = t_list
        .iter()
        .map(|&t| {
            let c = functional_covering(&f, &g.dilate(t)?, &cfg)?;
            Ok(CoverRow {
                t,
                covering: c.primal_value,
                separation: c.dual_value,
                gap: c.gap,
                constraint_residual: c.constraint_residual,
                packing_residual: c.packing_residual,
                lattice_points: c.lattice.points_per_axis,
                atoms: c.primal_measure.atoms.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match io.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let header: Vec<String> =
                ["t", "covering", "separation", "gap", "constraint_residual", "packing_residual", "lattice_points", "atoms"]
                    .map(String::from)
                    .to_vec();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.t.to_string(),
                        r.covering.to_string(),
                        r.separation.to_string(),
                        r.gap.to_string(),
                        r.constraint_residual.to_string(),
                        r.packing_residual.to_string(),
                        r.lattice_points.to_string(),
                        r.atoms.to_string(),
                    ]
                })
                .collect();
            csv_text(&header, &body)?
        }
    };
    emit(&io.out, &text)
}

fn profile(io: &Io, t_list: &[f64], polar: bool) -> Result<()> {
    let (name, f) = isotropic_function(&io.function, io.dim)?;
    let t = if t_list.is_empty() { DEFAULT_T.to_vec() } else { t_list.to_vec() };
    let cover = io.grid_points.map_or_else(CoverConfig::default, CoverConfig::with_points);
    let p = regularity_profile(&name, &f, &t, &ProfileConfig { cover, scaled_polar: polar })?;
    let text = match io.format {
        Format::Json => json(&p)?,
        Format::Csv => profile_csv(std::slice::from_ref(&p))?,
    };
    emit(&io.out, &text)
}

fn verify(v: &Verify) -> Result<i32> {
    let mut cfg: RunConfig = match &v.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if !v.dim.is_empty() {
        cfg.dims = v.dim.clone();
    }
    if !v.suite.is_empty() {
        cfg.suites = v.suite.clone();
    }
    if !v.function.is_empty() {
        cfg.functions = v.function.clone();
    }
    if !v.t_list.is_empty() {
        cfg.t_values = v.t_list.clone();
    }
    cfg.tol = v.tol.or(cfg.tol);
    cfg.seed = v.seed.unwrap_or(cfg.seed);
    cfg.lp_points = v.grid_points.or(cfg.lp_points);
    cfg.scaled_polar |= v.polar;
    let bundle = run_all(&cfg)?;
    for r in &bundle.reports {
        let failed = r.failures().count();
        let status = if failed == 0 { "PASS" } else { "FAIL" };
        eprintln!("{status} {} ({} cases, {failed} failed)", r.suite_name, r.cases.len());
        for c in r.failures() {
            eprintln!("    {} margin {:e}{}", c.id, c.margin, c.note.as_deref().map(|n| format!(": {n}")).unwrap_or_default());
        }
    }
    match &v.out {
        Some(dir) => {
            bundle.write(dir)?;
            eprintln!("bundle written to {}", dir.display());
        }
        None => match v.format {
            Format::Json => print!("{}", bundle.report_json()?),
            Format::Csv => print!("{}", bundle.profile_csv()?),
        },
    }
    eprintln!("{} asserted failures", bundle.failures());
    Ok(bundle.exit_code())
}

fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Transform { io, kind } => transform(io, *kind)?,
        Command::Body { io, kind, t_list } => body(io, *kind, t_list)?,
        Command::Isotropize { io } => isotropize_cmd(io)?,
        Command::Cover { io, against, t_list } => cover(io, against, t_list)?,
        Command::Profile { io, t_list, polar } => profile(io, t_list, *polar)?,
        Command::Verify(v) => return verify(v),
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
