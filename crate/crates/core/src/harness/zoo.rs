use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bodies::{DirectionSet, PBall, RadialBody};
use crate::error::{Error, Result};
use crate::functions::{ClosedFormKind, ClosedFormSpec, GridFile, GridPotential, LogConcaveFunction};
use crate::isotropic::isotropize;

/// Names of the built-in functions, in report order.
pub const ZOO: [&str; 6] = ["gaussian", "exp_euclidean_norm", "exp_p_norm_1", "exp_p_norm_4", "indicator_cube", "indicator_ball"];

/// The raw (not yet isotropic) member called `name`.
pub fn raw_member(name: &str, dim: usize) -> Option<Result<LogConcaveFunction>> {
    let spec = match name {
        "gaussian" => ClosedFormSpec::gaussian(),
        "exp_euclidean_norm" => ClosedFormSpec::default_of(ClosedFormKind::ExpEuclideanNorm),
        "exp_p_norm_1" => return Some(LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 1.0], dim)),
        "exp_p_norm_4" => return Some(LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[4.0, 1.0], dim)),
        "indicator_cube" => ClosedFormSpec::default_of(ClosedFormKind::IndicatorCube),
        "indicator_ball" => ClosedFormSpec::default_of(ClosedFormKind::IndicatorBall),
        _ => return None,
    };
    Some(LogConcaveFunction::closed_form(spec, dim))
}

/// A raw function from a zoo name, a closed-form kind with default parameters, or a JSON file holding
/// either a closed-form spec or a sampled potential. Returns a display name with the function.
pub fn resolve_function(spec: &str, dim: usize) -> Result<(String, LogConcaveFunction)> {
    if let Some(f) = raw_member(spec, dim) {
        return Ok((spec.to_string(), f?));
    }
    if let Some(kind) = ClosedFormKind::parse(spec) {
        return Ok((spec.to_string(), LogConcaveFunction::closed_form(ClosedFormSpec::default_of(kind), dim)?));
    }
    let path = std::path::Path::new(spec);
    if !path.exists() {
        return Err(Error::Input(format!("unknown function '{spec}': not a zoo name, a closed-form kind, or a file")));
    }
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
    if let Ok(closed) = serde_json::from_str::<ClosedFormSpec>(&text) {
        return Ok((name, LogConcaveFunction::closed_form(closed, dim)?));
    }
    let file: GridFile = serde_json::from_str(&text)?;
    if file.dim != dim {
        return Err(Error::Dimension { expected: dim, got: file.dim });
    }
    Ok((name, LogConcaveFunction::from_grid(GridPotential::from_file(&file)?)))
}

/// Isotropic geometric version of a zoo member.
pub fn member(name: &str, dim: usize) -> Option<Result<LogConcaveFunction>> {
    raw_member(name, dim).map(|f| f.and_then(|f| isotropize(&f).map(|(g, _)| g)))
}

/// A zoo member, or any other function spec brought to isotropic geometric position.
pub fn isotropic_function(spec: &str, dim: usize) -> Result<(String, LogConcaveFunction)> {
    if let Some(f) = member(spec, dim) {
        return Ok((spec.to_string(), f?));
    }
    let (name, raw) = resolve_function(spec, dim)?;
    Ok((name, super::inclusion::normalized(&raw)?))
}

/// All isotropized zoo members in dimension `dim`.
pub fn function_zoo(dim: usize) -> Result<Vec<(String, LogConcaveFunction)>> {
    ZOO.iter()
        .map(|name| Ok((name.to_string(), member(name, dim).expect("zoo names resolve")?)))
        .collect()
}

/// All raw zoo members in dimension `dim`, with their canonical parameters.
pub fn raw_zoo(dim: usize) -> Result<Vec<(String, LogConcaveFunction)>> {
    ZOO.iter()
        .map(|name| Ok((name.to_string(), raw_member(name, dim).expect("zoo names resolve")?)))
        .collect()
}

/// Centered test bodies: Euclidean ball, cube `[-1,1]ⁿ`, cross-polytope, `ℓ₄` ball, and a skewed cube.
pub fn body_zoo(dim: usize, dirs: &Arc<DirectionSet>) -> Result<Vec<(String, RadialBody)>> {
    let mut out = vec![
        ("ball".to_string(), RadialBody::sample(dirs.clone(), &PBall::euclidean(dim))?),
        ("cube".to_string(), RadialBody::sample(dirs.clone(), &PBall::cube(dim, 1.0))?),
        ("cross_polytope".to_string(), RadialBody::sample(dirs.clone(), &PBall::new(dim, 1.0, 1.0))?),
        ("l4_ball".to_string(), RadialBody::sample(dirs.clone(), &PBall::new(dim, 4.0, 1.0))?),
    ];
    if dim >= 2 {
        let mut a = DMatrix::identity(dim, dim);
        a[(0, 1)] = 0.6;
        a[(0, 0)] = 2.0;
        out.push(("skewed_cube".to_string(), RadialBody::sample(dirs.clone(), &PBall::with_map(f64::INFINITY, 1.0, a)?)?));
    }
    Ok(out)
}
