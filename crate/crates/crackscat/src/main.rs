//! Command-line runner: reproduces the published experiments from TOML
//! configuration files and writes CSV/JSON artifacts.

use clap::{Parser, Subcommand};
use crackscat::config::{ConfigError, ExperimentConfig, MethodConfig};
use crackscat::forward::{self, IncidentField};
use crackscat::geometry::{mesh_with_knots_per_segment, Crack, Point};
use crackscat::indicators::{self, Indicator};
use crackscat::io::{self, GridRow};
use crackscat::newton::{self, NewtonConfig};
use crackscat::noise;
use crackscat::scatterers;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crackscat", version, about = "2D crack scattering: forward solver and one-wave inverse methods")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// experiment configuration file (TOML)
    #[arg(long, global = true, default_value = "experiment.toml")]
    config: PathBuf,
    /// override the RNG seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory for artifacts
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// worker threads for grid scans (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// solve the forward problem and write the clean far-field pattern
    Forward,
    /// write synthetic (optionally noisy) measurement data
    MakeData,
    /// contrast indicators (shifted cracks, point sources, or disks)
    Contrast,
    /// factorization indicator over test disks or an external matrix
    Factorize,
    /// radius scans over many centers plus convex-hull accumulation
    ScanHull,
    /// regularized Newton corner reconstruction
    Newton,
}

#[derive(Debug)]
enum AppError {
    Config(String),
    Run(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<io::IoError> for AppError {
    fn from(e: io::IoError) -> Self {
        AppError::Run(e.to_string())
    }
}

impl From<crackscat::linalg::SingularSystem> for AppError {
    fn from(e: crackscat::linalg::SingularSystem) -> Self {
        AppError::Run(e.to_string())
    }
}

impl From<crackscat::geometry::GeometryError> for AppError {
    fn from(e: crackscat::geometry::GeometryError) -> Self {
        AppError::Config(format!("crack geometry: {e}"))
    }
}

impl From<newton::NewtonError> for AppError {
    fn from(e: newton::NewtonError) -> Self {
        AppError::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Run(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.noise.seed = seed;
    }
    let out = &cli.out_dir;
    match cli.cmd {
        Cmd::Forward => cmd_forward(&cfg, out, false),
        Cmd::MakeData => cmd_forward(&cfg, out, true),
        Cmd::Contrast => cmd_contrast(&cfg, out),
        Cmd::Factorize => cmd_factorize(&cfg, out, &cli.config),
        Cmd::ScanHull => cmd_scan_hull(&cfg, out),
        Cmd::Newton => cmd_newton(&cfg, out),
    }
}

/// Far field of the configured crack on the configured observation grid.
fn crack_farfield(
    cfg: &ExperimentConfig,
    corners: &[Point],
    incident: IncidentField,
) -> Result<Vec<Complex64>, AppError> {
    let crack = Crack::new(corners.to_vec())?;
    let mesh = mesh_with_knots_per_segment(&crack, cfg.crack.knots_per_segment, 3.0)?;
    let sol = forward::solve_density(&mesh, incident)?;
    Ok(forward::farfield(&sol, &cfg.observation.directions()))
}

/// Synthetic measurement data: forward solve plus configured noise.
fn measurement_data(cfg: &ExperimentConfig) -> Result<Vec<Complex64>, AppError> {
    let clean = crack_farfield(cfg, &cfg.crack.corners.clone(), cfg.incident)?;
    Ok(noise::add_noise(&clean, cfg.noise.delta, cfg.noise.seed).values)
}

fn metadata(cfg: &ExperimentConfig) -> serde_json::Value {
    json!({
        "incident": serde_json::to_value(&cfg.incident).unwrap(),
        "aperture": [cfg.observation.theta0, cfg.observation.theta1],
        "num_angles": cfg.observation.num_angles,
        "noise_delta": cfg.noise.delta,
        "noise_seed": cfg.noise.seed,
    })
}

fn cmd_forward(cfg: &ExperimentConfig, out: &Path, noisy: bool) -> Result<(), AppError> {
    let angles = cfg.observation.angles();
    let clean = crack_farfield(cfg, &cfg.crack.corners.clone(), cfg.incident)?;
    let values = if noisy {
        noise::add_noise(&clean, cfg.noise.delta, cfg.noise.seed).values
    } else {
        clean
    };
    let stem = if noisy { "farfield_noisy" } else { "farfield" };
    io::write_farfield_csv(&out.join(format!("{stem}.csv")), &angles, &values)?;
    io::write_farfield_json(
        &out.join(format!("{stem}.json")),
        &angles,
        &values,
        metadata(cfg),
    )?;
    println!("wrote {stem}.csv / {stem}.json ({} samples)", values.len());
    Ok(())
}

fn grid_artifacts(
    out: &Path,
    name: &str,
    descriptor_names: &[&str],
    rows: &[GridRow],
    meta: serde_json::Value,
) -> Result<(), AppError> {
    io::write_indicator_csv(&out.join(format!("{name}.csv")), descriptor_names, rows)?;
    io::write_indicator_json(&out.join(format!("{name}.json")), descriptor_names, rows, meta)?;
    // affine plot values over the finite entries
    let max_finite = rows
        .iter()
        .filter(|r| !r.divergent)
        .map(|r| r.value)
        .fold(0.0_f64, f64::max);
    let vals: Vec<f64> = rows
        .iter()
        .map(|r| if r.divergent { max_finite } else { r.value })
        .collect();
    let (plot, constant) = io::plot_values(&vals);
    let plot_rows: Vec<GridRow> = rows
        .iter()
        .zip(&plot)
        .map(|(r, &v)| GridRow {
            descriptor: r.descriptor.clone(),
            value: v,
            divergent: constant,
        })
        .collect();
    io::write_indicator_csv(
        &out.join(format!("{name}_plot.csv")),
        descriptor_names,
        &plot_rows,
    )?;
    println!("wrote {name}.csv / {name}.json / {name}_plot.csv ({} rows)", rows.len());
    Ok(())
}

fn cmd_contrast(cfg: &ExperimentConfig, out: &Path) -> Result<(), AppError> {
    let data = measurement_data(cfg)?;
    let th = cfg.observation.angles();
    let w = cfg.observation.weights();
    match &cfg.method {
        MethodConfig::ContrastCrack { shifts } => {
            let rows: Vec<GridRow> = shifts
                .par_iter()
                .map(|&a| -> Result<GridRow, AppError> {
                    let shifted: Vec<Point> = cfg
                        .crack
                        .corners
                        .iter()
                        .map(|&p| [p[0] + a[0], p[1] + a[1]])
                        .collect();
                    let ff = crack_farfield(cfg, &shifted, cfg.incident)?;
                    let ind = indicators::contrast_crack(&data, &ff, &w);
                    Ok(GridRow {
                        descriptor: vec![a[0], a[1]],
                        value: ind.value,
                        divergent: ind.divergent,
                    })
                })
                .collect::<Result<_, _>>()?;
            grid_artifacts(out, "contrast_crack", &["ax", "ay"], &rows, metadata(cfg))
        }
        MethodConfig::ContrastPointSource { grid, tau } => {
            let tau = Complex64::new(tau[0], tau[1]);
            let rows: Vec<GridRow> = grid
                .points()
                .par_iter()
                .map(|&p| {
                    let ind =
                        indicators::contrast_point_source(&data, cfg.incident.k, p, tau, &th, &w);
                    GridRow {
                        descriptor: vec![p[0], p[1]],
                        value: ind.value,
                        divergent: ind.divergent,
                    }
                })
                .collect();
            grid_artifacts(out, "contrast_point_source", &["px", "py"], &rows, metadata(cfg))
        }
        MethodConfig::ContrastDisk { grid, radius, disk } => {
            let th_d = incidence_angle(cfg)?;
            let rows: Vec<GridRow> = grid
                .points()
                .par_iter()
                .map(|&p| {
                    let ind = indicators::contrast_disk(
                        &data,
                        *disk,
                        p,
                        *radius,
                        cfg.incident.k,
                        &th,
                        th_d,
                        &w,
                    );
                    GridRow {
                        descriptor: vec![p[0], p[1], *radius],
                        value: ind.value,
                        divergent: ind.divergent,
                    }
                })
                .collect();
            grid_artifacts(out, "contrast_disk", &["px", "py", "radius"], &rows, metadata(cfg))
        }
        _ => Err(AppError::Config(
            "method.kind: `contrast` needs a contrast_* method block".into(),
        )),
    }
}

fn incidence_angle(cfg: &ExperimentConfig) -> Result<f64, AppError> {
    match cfg.incident.incident {
        forward::Incident::PlaneWave { d } => Ok(d[1].atan2(d[0])),
        forward::Incident::PointSource { .. } => Err(AppError::Config(
            "incident.kind: disk contrast requires a plane-wave incident field".into(),
        )),
    }
}

fn cmd_factorize(cfg: &ExperimentConfig, out: &Path, cfg_path: &Path) -> Result<(), AppError> {
    let data = measurement_data(cfg)?;
    let th = cfg.observation.angles();
    let w = cfg.observation.weights();
    match &cfg.method {
        MethodConfig::Factorize {
            disk,
            centers,
            radii,
            alpha,
        } => {
            let mut combos = Vec::new();
            for &p in centers {
                for &r in radii {
                    combos.push((p, r));
                }
            }
            let rows: Vec<GridRow> = combos
                .par_iter()
                .map(|&(p, r)| {
                    let eig = scatterers::disk_eigensystem(*disk, p, r, cfg.incident.k, &th, &w);
                    let ind: Indicator =
                        indicators::factorization_indicator(&data, &eig, Some(*alpha));
                    GridRow {
                        descriptor: vec![p[0], p[1], r],
                        value: ind.value,
                        divergent: ind.divergent,
                    }
                })
                .collect();
            grid_artifacts(out, "factorize", &["px", "py", "radius"], &rows, metadata(cfg))
        }
        MethodConfig::FactorizeExternal { matrix_csv, alpha } => {
            // path relative to the config file's directory
            let mpath = cfg_path
                .parent()
                .unwrap_or(Path::new("."))
                .join(matrix_csv);
            let a = io::read_matrix_csv(&mpath, th.len())?;
            let eig = scatterers::fsharp_eigensystem(&a, &w);
            let ind = indicators::factorization_indicator(&data, &eig, Some(*alpha));
            let rows = vec![GridRow {
                descriptor: vec![],
                value: ind.value,
                divergent: ind.divergent,
            }];
            grid_artifacts(out, "factorize_external", &[], &rows, metadata(cfg))
        }
        _ => Err(AppError::Config(
            "method.kind: `factorize` needs a factorize method block".into(),
        )),
    }
}

fn cmd_scan_hull(cfg: &ExperimentConfig, out: &Path) -> Result<(), AppError> {
    let MethodConfig::ScanHull {
        disk,
        centers,
        r_min,
        r_max,
        r_step,
        alpha,
        epsilon,
        support_grid,
    } = &cfg.method
    else {
        return Err(AppError::Config(
            "method.kind: `scan-hull` needs a scan_hull method block".into(),
        ));
    };
    let data = measurement_data(cfg)?;
    let th = cfg.observation.angles();
    let radii = ExperimentConfig::scan_radii(*r_min, *r_max, *r_step);
    // threshold: from config, or the default derived from the first center's
    // indicator-vs-radius curve
    let eps = match epsilon {
        Some(e) => *e,
        None => {
            let probe = indicators::radius_scan(
                &data,
                *disk,
                centers[0],
                &radii,
                cfg.incident.k,
                &th,
                *alpha,
                f64::MAX,
            );
            indicators::default_epsilon(&probe.curve)
        }
    };
    let scans: Vec<indicators::RadiusScan> = centers
        .par_iter()
        .map(|&p| {
            indicators::radius_scan(&data, *disk, p, &radii, cfg.incident.k, &th, *alpha, eps)
        })
        .collect();
    // per-center results
    let rows: Vec<GridRow> = scans
        .iter()
        .map(|s| GridRow {
            descriptor: vec![s.center[0], s.center[1]],
            value: s.r,
            divergent: false,
        })
        .collect();
    io::write_indicator_csv(&out.join("radius_scan.csv"), &["px", "py"], &rows)?;
    for (i, s) in scans.iter().enumerate() {
        io::write_curve_csv(&out.join(format!("curve_{i:03}.csv")), &s.curve)?;
    }
    // ball-coverage accumulation
    let grid = support_grid.points();
    let r_values: Vec<f64> = scans.iter().map(|s| s.r).collect();
    let counts = indicators::support_accumulate(centers, &r_values, &grid);
    io::write_counts_csv(&out.join("support_counts.csv"), &grid, &counts)?;
    io::write_json(
        &out.join("radius_scan.json"),
        &json!({
            "metadata": metadata(cfg),
            "epsilon": eps,
            "alpha": alpha,
            "scans": scans.iter().map(|s| json!({
                "center": s.center, "r": s.r, "empty": s.empty,
            })).collect::<Vec<_>>(),
        }),
    )?;
    println!(
        "wrote radius_scan.csv/json, {} curve files, support_counts.csv (epsilon = {eps:e})",
        scans.len()
    );
    Ok(())
}

fn cmd_newton(cfg: &ExperimentConfig, out: &Path) -> Result<(), AppError> {
    let MethodConfig::Newton {
        initial_corners,
        alpha,
        alpha0,
        iterations,
        knots_per_segment,
    } = &cfg.method
    else {
        return Err(AppError::Config(
            "method.kind: `newton` needs a newton method block".into(),
        ));
    };
    let data = measurement_data(cfg)?;
    let ncfg = NewtonConfig {
        alpha: *alpha,
        alpha0: *alpha0,
        max_iters: *iterations,
        knots_per_segment: *knots_per_segment,
    };
    let trace = newton::reconstruct(
        initial_corners,
        &data,
        cfg.incident,
        &cfg.observation.directions(),
        ncfg,
    )?;
    io::write_trace(&out.join("trace.json"), &out.join("trace.csv"), &trace)?;
    let last = trace.records.last().unwrap();
    println!(
        "wrote trace.json / trace.csv ({} steps, final residual {:.3e})",
        trace.records.len() - 1,
        last.residual
    );
    Ok(())
}
