//! One function per subcommand. Each fills its defaults into the config, so
//! the echo in the envelope replays the run exactly, and returns the result
//! payload. Export files are written only after everything has been computed.

use std::path::Path;

use loewner_core::analysis::{
    beltrami_field, beltrami_from_formula, schwarzian_report, BeltramiField, ClosedFormMap, FnMap, GridSampler, MuSource,
    StencilOrder, WirtingerSettings,
};
use loewner_core::becker::{classify_becker, recover_herglotz_from_mu, BoundarySettings, QCExtensionGrid};
use loewner_core::chains::{range_diagnostic, ChainEvaluator, ChainSettings, Normalization, RangeSettings};
use loewner_core::evolution::{EvolutionTrajectory, SolverSettings, VectorField};
use loewner_core::geometry::{angle, PolarGrid};
use loewner_core::Complex64;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::tokens::{self, MapToken};
use crate::{envelope, export, parallel, CliError};

pub const COMMANDS: &[&str] = &["evolve", "chain", "extend", "beltrami", "classify", "recover", "range", "schwarzian", "demo"];

type Result<T> = std::result::Result<T, CliError>;

/// Runs the command named by the `command` key with `threads` workers for
/// grid fills.
pub fn run(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    match cfg.require("command")? {
        "evolve" => evolve(cfg),
        "chain" => chain(cfg, threads),
        "extend" => extend(cfg, threads),
        "beltrami" => beltrami(cfg, threads),
        "classify" => classify(cfg, threads),
        "recover" => recover(cfg, threads),
        "range" => range(cfg),
        "schwarzian" => schwarzian(cfg),
        "demo" => demo(cfg, threads),
        other => Err(CliError::config("command", format!("unknown command `{other}`"))),
    }
}

/// Runs `cfg` and wraps the outcome. Returns the envelope and the exit code.
pub fn execute(mut cfg: RunConfig, threads: usize) -> (envelope::Envelope, i32) {
    let start = std::time::Instant::now();
    let outcome = run(&mut cfg, threads);
    let timing = cfg.bool_or("report.timing", false).unwrap_or(false);
    let env = envelope::Envelope::new(&cfg);
    let (env, code) = match outcome {
        Ok(result) => (env.with_result(result), 0),
        Err(e) => {
            let code = e.exit_code();
            (env.with_error(&e), code)
        }
    };
    let env = if timing { env.with_timing(start.elapsed().as_secs_f64(), threads) } else { env };
    (env, code)
}

fn solver(cfg: &mut RunConfig) -> Result<SolverSettings> {
    cfg.set_default("solver.rtol", "1e-10")?;
    cfg.set_default("solver.atol", "1e-30")?;
    cfg.set_default("solver.max_step", "1")?;
    let s = SolverSettings::default()
        .rtol(cfg.real_or("solver.rtol", 0.0)?)
        .atol(cfg.real_or("solver.atol", 0.0)?)
        .max_step(cfg.real_or("solver.max_step", 0.0)?);
    s.validate()?;
    Ok(s)
}

fn vector_field(cfg: &mut RunConfig) -> Result<VectorField> {
    let (p, implied) = tokens::herglotz("field.p", cfg.require("field.p")?)?;
    let driving = match (implied, cfg.get("field.tau")) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("field.tau", "the essential examples fix their own driving".into()));
        }
        (Some(d), None) => d,
        (None, _) => {
            cfg.set_default("field.tau", "0")?;
            tokens::driving("field.tau", cfg.require("field.tau")?)?
        }
    };
    Ok(VectorField::new(driving, p))
}

fn chain_evaluator(cfg: &mut RunConfig) -> Result<ChainEvaluator> {
    let field = vector_field(cfg)?;
    let solver = solver(cfg)?;
    cfg.set_default("chain.horizon", "40")?;
    cfg.set_default("chain.tolerance", "1e-9")?;
    cfg.set_default("chain.step", "1")?;
    cfg.set_default("chain.richardson", "true")?;
    cfg.set_default("chain.mode", if field.is_radial() { "radial" } else { "mobius" })?;
    let settings = ChainSettings {
        horizon: cfg.real_or("chain.horizon", 0.0)?,
        tolerance: cfg.real_or("chain.tolerance", 0.0)?,
        step: cfg.real_or("chain.step", 0.0)?,
        richardson: cfg.bool_or("chain.richardson", true)?,
    };
    let mode = match cfg.require("chain.mode")? {
        "radial" => Normalization::Radial,
        _ => Normalization::Mobius,
    };
    Ok(ChainEvaluator::new(EvolutionTrajectory::new(field, solver)?, settings, mode)?)
}

fn boundary(cfg: &mut RunConfig) -> Result<BoundarySettings> {
    cfg.set_default("boundary.delta", "0.02")?;
    cfg.set_default("boundary.levels", "4")?;
    cfg.set_default("boundary.tolerance", "5e-4")?;
    let settings = BoundarySettings {
        delta: cfg.real_or("boundary.delta", 0.0)?,
        levels: cfg.int_or("boundary.levels", 0)?,
        tolerance: cfg.real_or("boundary.tolerance", 0.0)?,
        k: cfg.real("k")?,
    };
    settings.validate()?;
    Ok(settings)
}

fn angles(cfg: &mut RunConfig, default: &str) -> Result<usize> {
    cfg.set_default("grid.angles", default)?;
    cfg.int_or("grid.angles", 0)
}

fn polar_grid(cfg: &mut RunConfig) -> Result<PolarGrid> {
    let n = angles(cfg, "128")?;
    let radii = cfg.reals("grid.radii")?.ok_or_else(|| CliError::config("grid.radii", "required key is missing".into()))?;
    Ok(PolarGrid::new(radii, n)?)
}

fn points(cfg: &RunConfig) -> Result<Vec<Complex64>> {
    cfg.points("z")?.ok_or_else(|| CliError::config("z", "required key is missing".into()))
}

fn build_extension(cfg: &mut RunConfig, threads: usize) -> Result<QCExtensionGrid> {
    let chain = chain_evaluator(cfg)?;
    let grid = polar_grid(cfg)?;
    let settings = boundary(cfg)?;
    parallel::becker_extend(&chain, &grid, &settings, threads)
}

fn evolve(cfg: &mut RunConfig) -> Result<Value> {
    let field = vector_field(cfg)?;
    let solver = solver(cfg)?;
    cfg.set_default("s", "0")?;
    let s = cfg.real_or("s", 0.0)?;
    let t = cfg.real("t")?.ok_or_else(|| CliError::config("t", "required key is missing".into()))?;
    let trajectory = EvolutionTrajectory::new(field, solver)?;
    let rows = points(cfg)?
        .into_iter()
        .map(|z| {
            let d = trajectory.evolve_with_derivative(s, t, z)?;
            Ok(json!({ "z": z, "value": d.value, "derivative": d.derivative }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "s": s, "t": t, "points": rows }))
}

fn chain(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    let chain = chain_evaluator(cfg)?;
    cfg.set_default("s", "0")?;
    let s = cfg.real_or("s", 0.0)?;
    let zs = points(cfg)?;
    let values = parallel::map_indexed(threads, zs.len(), parallel::chain_factory(&chain), |c, i| c.eval_detailed(s, zs[i]))?;
    let rows: Vec<Value> = zs
        .iter()
        .zip(&values)
        .map(|(z, v)| json!({ "z": z, "value": v.value, "increment": v.increment, "residual": v.residual, "time": v.time }))
        .collect();
    Ok(json!({ "s": s, "mode": chain.mode(), "points": rows }))
}

fn extension_summary(grid: &QCExtensionGrid) -> Value {
    json!({
        "max_residual": grid.max_residual(),
        "max_radial_jump": grid.max_radial_jump(),
        "seam_discrepancy": grid.seam().discrepancy,
    })
}

fn export_target(cfg: &mut RunConfig, formats: &[&str]) -> Result<Option<(std::path::PathBuf, String)>> {
    let Some(path) = cfg.get("export.path").map(std::path::PathBuf::from) else {
        return Ok(None);
    };
    cfg.set_default("export.format", formats[0])?;
    let format = cfg.require("export.format")?.to_string();
    if !formats.contains(&format.as_str()) {
        return Err(CliError::config("export.format", format!("this command exports {}", formats.join(" or "))));
    }
    Ok(Some((path, format)))
}

fn extend(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    let target = export_target(cfg, &["json"])?;
    let grid = build_extension(cfg, threads)?;
    let mut result = extension_summary(&grid);
    result["grid"] = export::grid_value(&grid)?;
    if let Some((path, _)) = target {
        export::write_grid(&path, &grid)?;
    }
    Ok(result)
}

fn wirtinger_settings(cfg: &mut RunConfig) -> Result<WirtingerSettings> {
    cfg.set_default("wirtinger.h", "1e-5")?;
    cfg.set_default("wirtinger.order", "fourth")?;
    let order = match cfg.require("wirtinger.order")? {
        "second" => StencilOrder::Second,
        _ => StencilOrder::Fourth,
    };
    Ok(WirtingerSettings { h: cfg.real_or("wirtinger.h", 0.0)?, order })
}

/// Circle radii: `beltrami.radii`, else the grid radii above 1.
fn circles(cfg: &mut RunConfig, grid_radii: &[f64]) -> Result<Vec<f64>> {
    if let Some(r) = cfg.reals("beltrami.radii")? {
        return Ok(r);
    }
    let r: Vec<f64> = grid_radii.iter().copied().filter(|r| *r > 1.0).collect();
    if r.is_empty() {
        return Err(CliError::config("beltrami.radii", "no circle radius above 1".into()));
    }
    let text = r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    cfg.set("beltrami.radii", &text)?;
    Ok(r)
}

fn source(cfg: &mut RunConfig, default: &str) -> Result<bool> {
    cfg.set_default("classify.source", default)?;
    Ok(cfg.require("classify.source")? == "closed-form")
}

/// The μ field described by `input` or `map`, plus the closed-form map when
/// there is one. `closed_form` asks for exact μ where a formula exists.
fn mu_field(cfg: &mut RunConfig, threads: usize, closed_form: Option<bool>) -> Result<(BeltramiField, Option<ClosedFormMap>)> {
    if let Some(input) = cfg.get("input").map(std::path::PathBuf::from) {
        if cfg.get("map").is_some() {
            return Err(CliError::config("map", "give either input or map".into()));
        }
        return match input.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let exact = source(cfg, "closed-form")?;
                let src = if exact { MuSource::ClosedForm } else { MuSource::Numerical { error_estimate: 0.0 } };
                Ok((export::read_trace_csv(&input, src)?, None))
            }
            Some("json") => {
                let grid = export::read_grid(&input)?;
                Ok((sampled_field(cfg, &grid)?, None))
            }
            _ => Err(CliError::config("input", "expected a .csv trace or a .json grid".into())),
        };
    }
    if cfg.get("map").is_none() && cfg.get("field.p").is_some() {
        cfg.set("map", "chain")?;
    }
    let token = tokens::map("map", cfg.require("map")?)?;
    match token {
        MapToken::Catalog(map) => {
            let n = angles(cfg, "128")?;
            let radii = match cfg.reals("beltrami.radii")? {
                Some(r) => r,
                None => cfg.reals("grid.radii")?.ok_or_else(|| CliError::config("beltrami.radii", "required key is missing".into()))?,
            };
            let exact = match closed_form {
                Some(default) => source(cfg, if default { "closed-form" } else { "numerical" })?,
                None => false,
            };
            let field = if exact {
                beltrami_from_formula(|z| map.mu(z), &radii, n)?
            } else {
                beltrami_field(&map, &radii, n, &wirtinger_settings(cfg)?)?
            };
            Ok((field, Some(map)))
        }
        MapToken::Chain => {
            let grid = build_extension(cfg, threads)?;
            Ok((sampled_field(cfg, &grid)?, None))
        }
        MapToken::Grid(path) => {
            let grid = export::read_grid(&path)?;
            Ok((sampled_field(cfg, &grid)?, None))
        }
        MapToken::Mobius(_) => Err(CliError::config("map", "a Möbius map has mu = 0; use it with schwarzian".into())),
    }
}

fn sampled_field(cfg: &mut RunConfig, grid: &QCExtensionGrid) -> Result<BeltramiField> {
    let sampler = GridSampler::new(grid)?;
    let radii = circles(cfg, grid.grid().radii())?;
    let settings = wirtinger_settings(cfg)?;
    Ok(beltrami_field(&sampler, &radii, grid.grid().angular_count(), &settings)?)
}

fn error_estimate(field: &BeltramiField) -> f64 {
    match field.source() {
        MuSource::ClosedForm => 0.0,
        MuSource::Numerical { error_estimate } => error_estimate,
    }
}

fn closed_form_error(field: &BeltramiField, map: &ClosedFormMap) -> f64 {
    let n = field.angular_count();
    let mut worst: f64 = 0.0;
    for c in field.circles() {
        for (j, mu) in c.trace.iter().enumerate() {
            worst = worst.max((mu - map.mu(Complex64::from_polar(c.rho, angle(j, n)))).norm());
        }
    }
    worst
}

fn beltrami(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    let target = export_target(cfg, &["csv", "json"])?;
    let (field, map) = mu_field(cfg, threads, None)?;
    let mut result = json!({
        "max_dilatation": field.max_dilatation(),
        "error_estimate": error_estimate(&field),
        "field": envelope::payload(&field)?,
    });
    if let Some(map) = map {
        result["closed_form_error"] = json!(closed_form_error(&field, &map));
        result["dilatation_bound"] = json!(map.dilatation_bound());
    }
    match target {
        Some((path, f)) if f == "csv" => export::write_trace_csv(&path, &field)?,
        Some((path, _)) => write_json(&path, &field)?,
        None => {}
    }
    Ok(result)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = envelope::to_bytes(value)?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path.to_path_buf(), e))
}

fn classify(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    let (field, _) = mu_field(cfg, threads, Some(true))?;
    let report = classify_becker(&field, cfg.real("classify.tolerance")?)?;
    envelope::payload(&report)
}

fn recover(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    let target = export_target(cfg, &["json"])?;
    let (field, _) = mu_field(cfg, threads, Some(true))?;
    let recovered = recover_herglotz_from_mu(&field, cfg.real("classify.tolerance")?)?;
    if let Some((path, _)) = target {
        write_json(&path, &recovered.spec)?;
    }
    envelope::payload(&recovered)
}

fn range(cfg: &mut RunConfig) -> Result<Value> {
    let field = vector_field(cfg)?;
    let solver = solver(cfg)?;
    cfg.set_default("range.horizon", "40")?;
    cfg.set_default("range.step", "0.05")?;
    let settings = RangeSettings {
        horizon: cfg.real_or("range.horizon", 0.0)?,
        step: cfg.real_or("range.step", 0.0)?,
        ..RangeSettings::default()
    };
    envelope::payload(&range_diagnostic(field, solver, settings)?)
}

/// 19 radii up to 0.95 and 64 angles.
fn default_disk_points() -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=19 {
        for j in 0..64 {
            out.push(Complex64::from_polar(0.05 * i as f64, angle(j, 64)));
        }
    }
    out
}

fn schwarzian(cfg: &mut RunConfig) -> Result<Value> {
    cfg.set_default("schwarzian.h", "1e-2")?;
    let h = cfg.real_or("schwarzian.h", 0.0)?;
    let zs = match cfg.points("z")? {
        Some(z) => z,
        None => default_disk_points(),
    };
    if cfg.get("map").is_none() && cfg.get("field.p").is_some() {
        cfg.set("map", "chain")?;
    }
    let token = tokens::map("map", cfg.require("map")?)?;
    let k_default = match &token {
        MapToken::Catalog(m) => Some(m.dilatation_bound()),
        MapToken::Mobius(_) => Some(0.0),
        _ => None,
    };
    if let (None, Some(k)) = (cfg.get("k"), k_default) {
        cfg.set("k", &k.to_string())?;
    }
    let k = cfg.real("k")?.ok_or_else(|| CliError::config("k", "required key is missing".into()))?;
    let report = match token {
        MapToken::Catalog(m) => schwarzian_report(&m, &zs, k, h)?,
        MapToken::Mobius(m) => schwarzian_report(&m, &zs, k, h)?,
        MapToken::Chain => {
            let chain = chain_evaluator(cfg)?;
            schwarzian_report(&FnMap(|z| chain.eval(0.0, z)), &zs, k, h)?
        }
        MapToken::Grid(_) => return Err(CliError::config("map", "a sampled grid has no holomorphic derivatives".into())),
    };
    envelope::payload(&report)
}

const DEMO_RADII: &str = "0.5,1.1,1.2,1.35,1.5,1.75,2,2.25,2.5";

/// Chain, extension, μ and classification of the Koebe-type field
/// `p = (1 − kz)/(1 + kz)`, whose chain is `e^t z/(1 − kz)²`.
fn demo(cfg: &mut RunConfig, threads: usize) -> Result<Value> {
    cfg.set_default("demo.name", "koebe")?;
    cfg.set_default("k", "0.5")?;
    let k = cfg.real_or("k", 0.5)?;
    let p = format!("koebe:{k}");
    if cfg.get("field.p").is_some_and(|v| v != p) || cfg.get("field.tau").is_some_and(|v| v != "0") {
        return Err(CliError::config("field.p", format!("the koebe demo runs p = {p} with tau = 0")));
    }
    cfg.set_default("field.p", &p)?;
    cfg.set_default("grid.radii", DEMO_RADII)?;
    cfg.set_default("grid.angles", "64")?;
    cfg.set_default("beltrami.radii", "1.2,1.5,2")?;
    let chain = chain_evaluator(cfg)?;
    let exact = ClosedFormMap::power(k, 1)?;

    let probes: Vec<Complex64> = (0..8).flat_map(|i| (0..8).map(move |j| Complex64::from_polar(0.1 * (i + 1) as f64, angle(j, 8)))).collect();
    let values = parallel::map_indexed(threads, probes.len(), parallel::chain_factory(&chain), |c, i| c.eval(0.0, probes[i]))?;
    let chain_error = probes.iter().zip(&values).map(|(z, v)| (v - exact.interior(*z)).norm()).fold(0.0, f64::max);

    let grid = polar_grid(cfg)?;
    let settings = boundary(cfg)?;
    let extension = parallel::becker_extend(&chain, &grid, &settings, threads)?;
    let field = sampled_field(cfg, &extension)?;
    let report = classify_becker(&field, cfg.real("classify.tolerance")?)?;
    Ok(json!({
        "chain": { "probes": probes.len(), "max_error": chain_error },
        "extension": extension_summary(&extension),
        "beltrami": {
            "max_dilatation": field.max_dilatation(),
            "error_estimate": error_estimate(&field),
            "closed_form_error": closed_form_error(&field, &exact),
        },
        "classification": envelope::payload(&report)?,
    }))
}
