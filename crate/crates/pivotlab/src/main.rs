use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use pivotlab::config::RunConfig;
use pivotlab::convergence_lab::run_study;
use pivotlab::error::PivotError;
use pivotlab::fixed_pivot::build_event_table;
use pivotlab::grid::{geometric_ratio, Grid, MeshFamily};
use pivotlab::oracles::truncation_error;
use pivotlab::quadrature::QuadratureSpec;
use pivotlab::state::StateVector;
use pivotlab::time_integrator::{integrate, IntegrationConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "pivotlab", version, about = "Fixed pivot aggregation solver and convergence laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the output directory from the config
    #[arg(long, global = true)]
    out: Option<String>,
    /// Override the first seed (random mesh family)
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one integration and write state, monitor and manifest files
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a refinement study and write the error/EOC report
    Eoc {
        #[arg(long)]
        config: PathBuf,
    },
    /// Probe the spatial truncation error across refinement levels
    Consistency {
        #[arg(long)]
        config: PathBuf,
    },
    /// Dump grid geometry and quasi-uniformity diagnostics
    Meshes {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("PIVOTLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                PivotError::Config(_) | PivotError::InvalidArgument(_) => 2,
                PivotError::NumericalFailure { .. } => 3,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> pivotlab::Result<()> {
    match &cli.command {
        Command::Simulate { config } => cmd_simulate(cli, config),
        Command::Eoc { config } => cmd_eoc(cli, config),
        Command::Consistency { config } => cmd_consistency(cli, config),
        Command::Meshes { config } => cmd_meshes(cli, config),
    }
}

fn prepare_out_dir(cli: &Cli, cfg: &RunConfig) -> pivotlab::Result<PathBuf> {
    let dir = PathBuf::from(cli.out.clone().unwrap_or_else(|| cfg.out_dir()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_manifest(
    dir: &Path,
    cfg: &RunConfig,
    seeds: &[u64],
    outputs: &[PathBuf],
    started: Instant,
) -> pivotlab::Result<PathBuf> {
    let path = dir.join("manifest.json");
    let manifest = json!({
        "tool": "pivotlab",
        "version": VERSION,
        "config": cfg,
        "seeds": seeds,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "timings": { "wall_time_s": started.elapsed().as_secs_f64() },
    });
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

fn state_csv(grid: &Grid, state: &StateVector) -> String {
    let mut out = String::from("cell,pivot,width,n\n");
    for i in 0..grid.num_cells() {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            i + 1,
            grid.pivot(i),
            grid.cell_width(i),
            state.n[i]
        ));
    }
    out
}

fn cmd_simulate(cli: &Cli, config: &Path) -> pivotlab::Result<()> {
    let started = Instant::now();
    let cfg = RunConfig::load(config)?;
    let grid = cfg.build_single_grid(cli.seed_override)?;
    let kernel = cfg.kernel_spec()?;
    let density = cfg.density_spec()?;
    let dir = prepare_out_dir(cli, &cfg)?;

    let table = build_event_table(&grid, &kernel);
    let state0 = density.project_to_cells(&grid);
    let mut snapshots = cfg.time.snapshots.clone();
    if snapshots.is_empty() {
        snapshots.push(cfg.time.t_end);
    }
    snapshots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut outputs = Vec::new();
    let mut state = state0;
    let mut t = 0.0;
    let mut full_log = pivotlab::time_integrator::MonitorLog::default();
    for (idx, &ts) in snapshots.iter().enumerate() {
        let span = ts - t;
        if span > 0.0 {
            let mut int_cfg = IntegrationConfig::new(span, cfg.time.dt)?;
            int_cfg.negativity_policy = cfg.negativity_policy()?;
            let (next, log) = integrate(&state, &table, &grid, &int_cfg)?;
            state = next;
            for mut row in log.rows {
                row.t += t;
                full_log.rows.push(row);
            }
            t = ts;
        }
        let path = dir.join(format!("state_{idx}.csv"));
        std::fs::write(&path, state_csv(&grid, &state))?;
        outputs.push(path);
    }
    let monitor = dir.join("monitor.csv");
    std::fs::write(&monitor, full_log.to_csv())?;
    outputs.push(monitor);
    let manifest = write_manifest(&dir, &cfg, &cfg.seeds(), &outputs, started)?;
    if !cli.quiet {
        println!("simulate: {} cells to t = {}, outputs in {}", grid.num_cells(), t, dir.display());
        println!("manifest: {}", manifest.display());
    }
    Ok(())
}

fn cmd_eoc(cli: &Cli, config: &Path) -> pivotlab::Result<()> {
    let started = Instant::now();
    let cfg = RunConfig::load(config)?;
    let mut study = cfg.to_study_config()?;
    if let Some(seed) = cli.seed_override {
        study.seeds = vec![seed];
    }
    let dir = prepare_out_dir(cli, &cfg)?;
    let report = run_study(&study)?;
    let csv_path = dir.join("study.csv");
    std::fs::write(&csv_path, report.to_csv())?;
    let json_path = dir.join("study.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")?;
    let outputs = vec![csv_path.clone(), json_path];
    write_manifest(&dir, &cfg, &study.seeds, &outputs, started)?;
    if !cli.quiet {
        print!("{}", report.to_csv());
        println!("report: {}", csv_path.display());
    }
    Ok(())
}

fn cmd_consistency(cli: &Cli, config: &Path) -> pivotlab::Result<()> {
    let started = Instant::now();
    let cfg = RunConfig::load(config)?;
    let study = cfg.to_study_config()?;
    let dir = prepare_out_dir(cli, &cfg)?;
    let seed = cli.seed_override.or_else(|| study.seeds.first().copied()).unwrap_or(1);
    let grids = study.grids(seed)?;
    let quad = QuadratureSpec::default();
    let mut csv = String::from("gp,sigma_l1,ratio\n");
    let mut prev: Option<f64> = None;
    for grid in &grids {
        let sigma = truncation_error(&study.density, grid, &study.kernel, &quad)?;
        let norm: f64 = sigma.iter().map(|s| s.abs()).sum();
        let ratio = prev.map(|p| p / norm);
        csv.push_str(&format!(
            "{},{:.16e},{}\n",
            grid.num_cells(),
            norm,
            ratio.map(|r| format!("{r:.16e}")).unwrap_or_else(|| "-".into())
        ));
        prev = Some(norm);
    }
    let path = dir.join("consistency.csv");
    std::fs::write(&path, &csv)?;
    write_manifest(&dir, &cfg, &[seed], std::slice::from_ref(&path), started)?;
    if !cli.quiet {
        print!("{csv}");
        println!("report: {}", path.display());
    }
    Ok(())
}

fn cmd_meshes(cli: &Cli, config: &Path) -> pivotlab::Result<()> {
    let started = Instant::now();
    let cfg = RunConfig::load(config)?;
    let grid = cfg.build_single_grid(cli.seed_override)?;
    let dir = prepare_out_dir(cli, &cfg)?;
    let grid_path = dir.join("grid.json");
    std::fs::write(&grid_path, serde_json::to_string_pretty(&grid)? + "\n")?;
    let mut diagnostics = json!({
        "family": format!("{:?}", grid.family),
        "cells": grid.num_cells(),
        "x_min": grid.x_min(),
        "x_max": grid.x_max(),
        "min_width": grid.min_width(),
        "max_width": grid.max_width(),
        "quasi_uniformity_ratio": grid.quasi_uniformity_ratio(),
        "ghost_pivot": grid.ghost_pivot(),
    });
    if cfg.family()? == MeshFamily::Geometric {
        diagnostics["geometric_ratio"] =
            json!(geometric_ratio(cfg.mesh.x_min, cfg.mesh.x_max, cfg.mesh.cells));
    }
    let diag_path = dir.join("diagnostics.json");
    std::fs::write(&diag_path, serde_json::to_string_pretty(&diagnostics)? + "\n")?;
    write_manifest(&dir, &cfg, &[], &[grid_path.clone(), diag_path.clone()], started)?;
    if !cli.quiet {
        println!("{}", serde_json::to_string_pretty(&diagnostics)?);
    }
    Ok(())
}
