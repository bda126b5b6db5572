//! Subcommand implementations and the exit-code contract.

use crate::config::{parse_config, ConfigError, RunConfig};
use crate::presets::{balance_defect, Preset};
use crate::{Cli, Command, GreenCommand};
use micromorph::assembly::ModelKind;
use micromorph::coercivity::{
    default_combined_params, estimates_csv, is_non_increasing, monotonicity_study, CoercivityError, EigenOptions,
    InequalityKind,
};
use micromorph::constitutive::{
    iso_to_tensors, special_case_params, validate_gauge, validate_relaxed, IsotropicParams, ParamReport, SpecialCase,
};
use micromorph::dislocation::{alpha_from_field, symmetry_csv, symmetry_study, AlphaSource};
use micromorph::fe::{build_spaces, EdgeField};
use micromorph::green::{fundamental_solution, green_tensor, lengths, GreenError};
use micromorph::io::{centroid_values, vertex_values, VtkFile};
use micromorph::mesh::build_box_mesh;
use micromorph::problem::{assemble_system, Loads};
use micromorph::solver::CgOptions;
use micromorph::tensor::{alpha_from_nye, classify_dislocation, nye_from_alpha, Mat3, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    ConfigFile(#[from] ConfigError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Solver(_) | AppError::Io(_) => 1,
            AppError::InvalidParams(_) => 2,
            AppError::Config(_) | AppError::ConfigFile(_) => 3,
        }
    }
}

impl From<GreenError> for AppError {
    fn from(e: GreenError) -> Self {
        match e {
            GreenError::InvalidParams(_) => AppError::InvalidParams(e.to_string()),
            _ => AppError::Config(e.to_string()),
        }
    }
}

const BALANCE_TOL: f64 = 1e-6;
const CONSTANTS_MONOTONE_TOL: f64 = 1e-10;
const SYMMETRY_ZERO_TOL: f64 = 1e-13;
const SYMMETRY_WITNESS_TOL: f64 = 1e-3;

fn demo_params() -> IsotropicParams {
    IsotropicParams { mu_e: 1.0, lambda_e: 1.5, mu_c: 0.7, mu_h: 1.0, lambda_h: 1.0, a1: 1.2, a2: 0.9, a3: 0.4 }
}

fn load_config(cli: &Cli) -> Result<Option<RunConfig>, AppError> {
    cli.config.as_deref().map(parse_config).transpose().map_err(AppError::from)
}

fn require_config(cli: &Cli) -> Result<RunConfig, AppError> {
    load_config(cli)?.ok_or_else(|| AppError::Config("this command needs --config".into()))
}

fn output_dir(cli: &Cli, cfg: Option<&RunConfig>) -> Result<PathBuf, AppError> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, AppError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

pub fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Solve { dump_matrix } => solve(cli, *dump_matrix),
        Command::Constants { spec, levels, unconstrained } => constants(cli, spec, levels, !*unconstrained),
        Command::Green { action: GreenCommand::Lengths } => green_lengths(cli),
        Command::Green { action: GreenCommand::Ray { ray, completed } } => green_ray(cli, ray, *completed),
        Command::Nye { matrix } => nye(matrix),
        Command::EinsteinCheck { samples, seed } => einstein_check(cli, *samples, *seed),
    }
}

fn model_name(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Relaxed => "relaxed",
        ModelKind::FurtherRelaxed => "further_relaxed",
        ModelKind::Gauge => "gauge",
    }
}

fn param_report(cfg: &RunConfig) -> ParamReport {
    match cfg.model {
        ModelKind::Gauge => validate_gauge(&cfg.params),
        _ => validate_relaxed(&cfg.params),
    }
}

fn check_params(cfg: &RunConfig) -> Result<ParamReport, AppError> {
    let report = param_report(cfg);
    if report.valid {
        Ok(report)
    } else {
        let list: Vec<&str> = report.violated.iter().map(|c| c.describe()).collect();
        Err(AppError::InvalidParams(format!(
            "{} model requires {}",
            model_name(cfg.model),
            list.join(", ")
        )))
    }
}

fn validate(cli: &Cli) -> Result<(), AppError> {
    let cfg = require_config(cli)?;
    let report = check_params(&cfg)?;
    println!("model = {}", model_name(cfg.model));
    println!("regime = {:?}", report.regime);
    for (name, b) in [("C", report.bounds.c), ("H", report.bounds.h), ("Lc", report.bounds.lc)] {
        if let Some((lo, hi)) = b {
            println!("{name} eigenvalues in [{lo:e}, {hi:e}]");
        }
    }
    println!("valid");
    Ok(())
}

fn solve(cli: &Cli, dump_matrix: bool) -> Result<(), AppError> {
    let cfg = require_config(cli)?;
    check_params(&cfg)?;
    let (lo, hi) = (cfg.lo, cfg.hi);
    if cfg.model == ModelKind::Gauge {
        let defect = balance_defect(&cfg.background_stress, &cfg.body_force, lo, hi);
        if defect > BALANCE_TOL {
            return Err(AppError::Config(format!(
                "background stress violates Div sigma0 + f = 0 (relative defect {defect:.3e})"
            )));
        }
    }
    let mesh = build_box_mesh(cfg.cells, lo, hi).map_err(|e| AppError::Config(e.to_string()))?;
    let (us, ps) = build_spaces(&mesh);
    let tensors = iso_to_tensors(&cfg.params);

    let force = |x: Vec3| cfg.body_force.vector(x, lo, hi);
    let moment = |x: Vec3| cfg.moment.tensor(x, lo, hi);
    let stress = |x: Vec3| cfg.background_stress.tensor(x, lo, hi);
    let active = |p: &Preset| !p.is_zero();
    let loads = Loads {
        body_force: active(&cfg.body_force).then_some(&force as _),
        moment: active(&cfg.moment).then_some(&moment as _),
        background_stress: active(&cfg.background_stress).then_some(&stress as _),
    };
    let system = assemble_system(cfg.model, &us, &ps, &tensors, &loads);
    let dir = output_dir(cli, Some(&cfg))?;
    if dump_matrix {
        let file = std::fs::File::create(dir.join("matrix.mtx"))?;
        system.matrix.write_matrix_market(std::io::BufWriter::new(file))?;
    }

    let opts = CgOptions { tol: cfg.tol, max_iter: cfg.max_iter };
    let report = system.solve(opts, None).map_err(|e| AppError::Solver(e.to_string()))?;
    let stored = 0.5 * micromorph::sparse::dot(&report.x, &system.matrix.matvec(&report.x));
    let (u, p) = system.split(&report.x, &us, &ps);

    let title = format!("{} solution", model_name(cfg.model));
    let vtk = match cfg.model {
        ModelKind::Gauge => {
            let alpha = alpha_from_field(&p, AlphaSource::Elastic);
            VtkFile::new(&mesh, &title).cell_tensors("e", centroid_values(&p))?.cell_tensors("alpha", alpha.values().to_vec())?
        }
        _ => {
            let alpha = alpha_from_field(&p, AlphaSource::Distortion);
            VtkFile::new(&mesh, &title)
                .point_vectors("u", vertex_values(&u))?
                .cell_tensors("P", centroid_values(&p))?
                .cell_tensors("curl_P", curls(&p))?
                .cell_tensors("alpha", alpha.values().to_vec())?
        }
    };
    vtk.write_to_path(&dir.join("solution.vtk"))?;

    let mut summary = String::new();
    let _ = writeln!(summary, "model = {}", model_name(cfg.model));
    let _ = writeln!(summary, "cells = {} {} {}", cfg.cells[0], cfg.cells[1], cfg.cells[2]);
    let _ = writeln!(summary, "dofs = {}", system.matrix.dim());
    let _ = writeln!(summary, "iterations = {}", report.iterations);
    let _ = writeln!(summary, "relative_residual = {:.6e}", report.relative_residual);
    let _ = writeln!(summary, "total_energy = {:.15e}", report.energy);
    let _ = writeln!(summary, "stored_energy = {:.15e}", stored);
    write_file(&dir, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

fn curls(p: &EdgeField) -> Vec<Mat3> {
    (0..p.space().mesh().n_tets()).map(|t| p.eval_curl_p(t).expect("element in range")).collect()
}

impl From<micromorph::io::IoError> for AppError {
    fn from(e: micromorph::io::IoError) -> Self {
        match e {
            micromorph::io::IoError::Io(e) => AppError::Io(e),
            other => AppError::Config(other.to_string()),
        }
    }
}

pub fn parse_levels(text: &str) -> Result<Vec<usize>, AppError> {
    let bad = || AppError::Config(format!("malformed --levels `{text}`"));
    let levels: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if levels.is_empty() || levels.iter().any(|&l| l == 0 || l > 6) {
        return Err(bad());
    }
    Ok(levels)
}

fn constants(cli: &Cli, spec: &str, levels: &str, constrained: bool) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let levels = parse_levels(levels)?;
    let kinds: Vec<InequalityKind> = if spec == "all" {
        InequalityKind::ALL.to_vec()
    } else {
        vec![spec.parse().map_err(|e: CoercivityError| AppError::Config(e.to_string()))?]
    };
    let (lo, hi) = cfg.as_ref().map_or(([0.0; 3], [1.0; 3]), |c| (c.lo, c.hi));
    let params = cfg.as_ref().map_or_else(default_combined_params, |c| c.params);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for kind in kinds {
        let est = monotonicity_study(kind, &levels, lo, hi, Some(&params), constrained, EigenOptions::default())
            .map_err(|e| match e {
                CoercivityError::TooFewLevels => AppError::Config(e.to_string()),
                other => AppError::Solver(other.to_string()),
            })?;
        let positive = est.iter().all(|e| e.lambda_min > 0.0);
        let monotone = is_non_increasing(&est, CONSTANTS_MONOTONE_TOL);
        all_ok &= positive && monotone;
        let values: Vec<String> = est.iter().map(|e| format!("{:.6e}", e.lambda_min)).collect();
        println!(
            "{:<18} lambda_min = [{}] positive = {positive} non_increasing = {monotone}",
            kind.name(),
            values.join(", ")
        );
        rows.extend(est.into_iter().map(|e| (kind, e)));
    }
    let dir = output_dir(cli, cfg.as_ref())?;
    let path = write_file(&dir, "constants.csv", &estimates_csv(&rows))?;
    println!("wrote {}", path.display());
    if !all_ok {
        println!("warning: some estimates are not positive or not monotone");
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.15e}"))
}

fn green_lengths(cli: &Cli) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let base = cfg.as_ref().map_or_else(demo_params, |c| c.params);
    let a1 = if base.a1 != 0.0 { base.a1 } else { 1.0 };
    let mut cases = vec![("configured", base)];
    for (name, case) in [
        ("edelen", SpecialCase::Edelen),
        ("popov_kroener", SpecialCase::PopovKroener),
        ("einstein", SpecialCase::Einstein),
        ("strain_gradient", SpecialCase::StrainGradient),
    ] {
        let p = special_case_params(case, a1, &base, Some(1.0)).map_err(|e| AppError::InvalidParams(e.to_string()))?;
        cases.push((name, p));
    }
    let mut csv = String::from("case,mu_c,alpha1,alpha2,alpha3,l1_sq,l2_sq,l3_sq,l4_sq\n");
    for (name, p) in cases {
        let l = lengths(&p)?;
        let _ = writeln!(
            csv,
            "{name},{},{},{},{},{},{},{},{}",
            p.mu_c,
            p.a1,
            p.a2,
            p.a3,
            fmt_opt(Some(l.l1_sq)),
            fmt_opt(l.l2_sq),
            fmt_opt(l.l3_sq),
            fmt_opt(l.l4_sq)
        );
    }
    print!("{csv}");
    let dir = output_dir(cli, cfg.as_ref())?;
    write_file(&dir, "green_lengths.csv", &csv)?;
    Ok(())
}

pub fn parse_ray(text: &str) -> Result<(Vec3, Vec3, usize), AppError> {
    let bad = || AppError::Config(format!("malformed --ray `{text}`, expected x0,y0,z0,dx,dy,dz,n"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 7 {
        return Err(bad());
    }
    let v: Vec<f64> = parts[..6].iter().map(|s| s.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let n: usize = parts[6].parse().map_err(|_| bad())?;
    if n == 0 || v.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(([v[0], v[1], v[2]], [v[3], v[4], v[5]], n))
}

fn green_ray(cli: &Cli, ray: &str, completed: bool) -> Result<(), AppError> {
    let cfg = load_config(cli)?;
    let params = cfg.as_ref().map_or_else(demo_params, |c| c.params);
    let (x0, d, n) = parse_ray(ray)?;
    let mut csv = String::from("x,y,z,r");
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let _ = write!(csv, ",g{}{}{}{}", i + 1, j + 1, k + 1, l + 1);
                }
            }
        }
    }
    csv.push('\n');
    for s in 0..n {
        let t = if n == 1 { 0.0 } else { s as f64 / (n - 1) as f64 };
        let x: Vec3 = std::array::from_fn(|i| x0[i] + t * d[i]);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(AppError::Config("ray passes through the source point".into()));
        }
        let g = if completed { fundamental_solution(x, &params)? } else { green_tensor(x, &params)? };
        let _ = write!(csv, "{:.15e},{:.15e},{:.15e},{:.15e}", x[0], x[1], x[2], r);
        for v in g.0 {
            let _ = write!(csv, ",{v:.15e}");
        }
        csv.push('\n');
    }
    let dir = output_dir(cli, cfg.as_ref())?;
    let path = write_file(&dir, "green_ray.csv", &csv)?;
    println!("wrote {n} samples to {}", path.display());
    Ok(())
}

fn nye(matrix: &str) -> Result<(), AppError> {
    let values: Vec<f64> = matrix
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| AppError::Config(format!("malformed matrix entry `{s}`"))))
        .collect::<Result<_, _>>()?;
    if values.len() != 9 {
        return Err(AppError::Config(format!("expected 9 entries, got {}", values.len())));
    }
    let alpha = Mat3::from_row_slice(&values);
    let kappa = nye_from_alpha(&alpha);
    let back = alpha_from_nye(&kappa);
    let print = |name: &str, m: &Mat3| {
        println!("{name} =");
        for row in &m.0 {
            println!("  {:>22.15e} {:>22.15e} {:>22.15e}", row[0], row[1], row[2]);
        }
    };
    print("alpha", &alpha);
    print("nye", &kappa);
    print("alpha_roundtrip", &back);
    println!("roundtrip_error = {:e}", (back - alpha).max_abs());
    println!("kind = {:?}", classify_dislocation(&alpha, 1e-12 * (1.0 + alpha.max_abs())));
    Ok(())
}

fn einstein_check(cli: &Cli, samples: usize, seed: u64) -> Result<(), AppError> {
    if samples == 0 {
        return Err(AppError::Config("--samples must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = symmetry_study(&mut rng, samples, SYMMETRY_ZERO_TOL, SYMMETRY_WITNESS_TOL);
    let csv = symmetry_csv(&rows);
    print!("{csv}");
    let dir = output_dir(cli, None)?;
    write_file(&dir, "einstein_check.csv", &csv)?;
    if rows.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(AppError::Solver("symmetry verification failed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_syntax() {
        assert_eq!(parse_levels("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_levels("2,4").unwrap(), vec![2, 4]);
        assert!(parse_levels("a..3").is_err());
        assert!(parse_levels("0..2").is_err());
    }

    #[test]
    fn ray_syntax() {
        let (x0, d, n) = parse_ray("1,0,0,2,0,0,5").unwrap();
        assert_eq!((x0, d, n), ([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], 5));
        assert!(parse_ray("1,0,0").is_err());
        assert!(parse_ray("1,0,0,2,0,0,0").is_err());
    }
}
