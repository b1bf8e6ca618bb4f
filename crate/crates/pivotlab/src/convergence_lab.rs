//! Refinement studies: discrete L1 errors, experimental orders of
//! convergence, and serializable reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PivotError, Result};
use crate::grid::{
    build_geometric, build_uniform, refine_locally_uniform, refine_oscillatory, refine_random, Grid,
    MeshFamily,
};
use crate::initial_condition::DensitySpec;
use crate::kernel::KernelSpec;
use crate::oracles::solve_on_grid;
use crate::state::StateVector;

/// Aggregate fine cell totals onto a coarser nested grid. Exact for nested
/// meshes and conserves number and mass by additivity.
pub fn project_fine_to_coarse(fine: &StateVector, fine_grid: &Grid, coarse_grid: &Grid) -> Result<StateVector> {
    let fb = fine_grid.boundaries();
    let cb = coarse_grid.boundaries();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
    let mut out = StateVector::zeros(coarse_grid.num_cells());
    out.ghost_count = fine.ghost_count;
    out.ghost_mass = fine.ghost_mass;
    let mut fi = 0usize;
    if !close(fb[0], cb[0]) || !close(*fb.last().unwrap(), *cb.last().unwrap()) {
        return Err(PivotError::InvalidArgument("grids do not share endpoints".into()));
    }
    for ci in 0..coarse_grid.num_cells() {
        let upper = cb[ci + 1];
        let mut total = 0.0;
        loop {
            if fi >= fine.len() {
                return Err(PivotError::InvalidArgument("grids are not nested".into()));
            }
            total += fine.n[fi];
            fi += 1;
            if close(fb[fi], upper) {
                break;
            }
            if fb[fi] > upper {
                return Err(PivotError::InvalidArgument(format!(
                    "grids are not nested: coarse boundary {upper} missing from fine grid"
                )));
            }
        }
        out.n[ci] = total;
    }
    Ok(out)
}

/// Discrete L1 distance sum |a_i - b_i|, optionally divided by sum |a_i|.
pub fn l1_error(a: &StateVector, b: &StateVector, relative: bool) -> Result<f64> {
    if a.len() != b.len() {
        return Err(PivotError::InvalidArgument("state lengths differ".into()));
    }
    let diff: f64 = a.n.iter().zip(&b.n).map(|(x, y)| (x - y).abs()).sum();
    if relative {
        let norm: f64 = a.n.iter().map(|x| x.abs()).sum();
        if norm == 0.0 {
            return Err(PivotError::UndefinedRelativeError);
        }
        Ok(diff / norm)
    } else {
        Ok(diff)
    }
}

/// EOC from successive self-convergence differences:
/// ln(||N_h - N_h/2|| / ||N_h/2 - N_h/4||) / ln 2.
pub fn eoc_self(err_h: f64, err_h2: f64) -> Result<f64> {
    if !(err_h > 0.0) || !(err_h2 > 0.0) {
        return Err(PivotError::InvalidArgument("EOC needs positive error norms".into()));
    }
    Ok((err_h / err_h2).ln() / std::f64::consts::LN_2)
}

/// EOC against a reference solution: ln(E_I / E_2I) / ln 2.
pub fn eoc_reference(e_coarse: f64, e_fine: f64) -> Result<f64> {
    eoc_self(e_coarse, e_fine)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EocMode {
    /// Errors are differences between successive refinement levels,
    /// aggregated onto the coarser grid.
    SelfConvergence,
    /// Errors are relative L1 distances to a fine-grid reference solution.
    Reference,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub family: MeshFamily,
    pub x_min: f64,
    pub x_max: f64,
    /// Cells of the coarsest grid (uniform/geometric) or of the refinement
    /// base (locally uniform/oscillatory/random).
    pub base_cells: usize,
    /// Number of grids in the refinement sequence.
    pub levels: usize,
    pub kernel: KernelSpec,
    pub density: DensitySpec,
    pub t_end: f64,
    pub dt: f64,
    pub eoc_mode: EocMode,
    /// One entry per run for the random family; ignored otherwise.
    pub seeds: Vec<u64>,
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        let min_levels = match self.eoc_mode {
            EocMode::SelfConvergence => 2,
            EocMode::Reference => 1,
        };
        if self.levels < min_levels {
            return Err(PivotError::InvalidArgument(format!(
                "{:?} study needs at least {min_levels} levels",
                self.eoc_mode
            )));
        }
        if self.family == MeshFamily::Random && self.seeds.is_empty() {
            return Err(PivotError::InvalidArgument("random family needs at least one seed".into()));
        }
        Ok(())
    }

    /// Grid sequence for one run (seed only used by the random family).
    /// Uniform and geometric grids double their cell count per level; the
    /// refined families split every cell of a fixed base per level, which
    /// keeps successive levels nested in all five cases.
    pub fn grids(&self, seed: u64) -> Result<Vec<Grid>> {
        let mut grids = Vec::with_capacity(self.levels);
        match self.family {
            MeshFamily::Uniform => {
                for l in 0..self.levels {
                    grids.push(build_uniform(self.x_min, self.x_max, self.base_cells << l)?);
                }
            }
            MeshFamily::Geometric => {
                for l in 0..self.levels {
                    grids.push(build_geometric(self.x_min, self.x_max, self.base_cells << l)?);
                }
            }
            MeshFamily::LocallyUniform => {
                let base = build_geometric(self.x_min, self.x_max, self.base_cells)?;
                for l in 0..self.levels {
                    grids.push(refine_locally_uniform(&base, l + 1));
                }
            }
            MeshFamily::Oscillatory => {
                let base = build_uniform(self.x_min, self.x_max, self.base_cells)?;
                for l in 0..self.levels {
                    grids.push(refine_oscillatory(&base, l + 1));
                }
            }
            MeshFamily::Random => {
                let base = build_geometric(self.x_min, self.x_max, self.base_cells)?;
                for l in 0..self.levels {
                    grids.push(refine_random(&base, l + 1, seed));
                }
            }
        }
        Ok(grids)
    }

    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        serde_json::to_string(self).unwrap_or_default().hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub gp: usize,
    pub error: Option<f64>,
    pub eoc: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub config: StudyConfig,
    pub fingerprint: u64,
    pub wall_time_s: f64,
}

impl StudyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gp,error,eoc\n");
        for r in &self.rows {
            let err = r.error.map(|e| format!("{e:.16e}")).unwrap_or_else(|| "-".into());
            let eoc = r.eoc.map(|e| format!("{e:.16e}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{},{},{}\n", r.gp, err, eoc));
        }
        out
    }

    pub fn final_eoc(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.eoc)
    }
}

/// Grid-point counts and per-level errors for a single run (seed).
type RunErrors = (Vec<usize>, Vec<Option<f64>>);

fn run_errors(cfg: &StudyConfig, seed: u64) -> Result<RunErrors> {
    let grids = cfg.grids(seed)?;
    let gps: Vec<usize> = grids.iter().map(|g| g.num_cells()).collect();
    let solutions: Vec<Result<StateVector>> = grids
        .par_iter()
        .map(|g| solve_on_grid(&cfg.kernel, &cfg.density, g, cfg.t_end, cfg.dt))
        .collect();
    let solutions: Vec<StateVector> = solutions.into_iter().collect::<Result<_>>()?;
    match cfg.eoc_mode {
        EocMode::SelfConvergence => {
            let mut errors = vec![None; cfg.levels];
            for l in 1..cfg.levels {
                let down = project_fine_to_coarse(&solutions[l], &grids[l], &grids[l - 1])?;
                errors[l] = Some(l1_error(&solutions[l - 1], &down, false)?);
            }
            Ok((gps, errors))
        }
        EocMode::Reference => {
            // reference: the finest grid bisected twice, solved at dt/4
            let finest = grids.last().unwrap();
            let fine = refine_locally_uniform(finest, 2);
            let fine_sol = solve_on_grid(&cfg.kernel, &cfg.density, &fine, cfg.t_end, cfg.dt / 4.0)?;
            let mut errors = Vec::with_capacity(cfg.levels);
            for l in 0..cfg.levels {
                let exact = project_fine_to_coarse(&fine_sol, &fine, &grids[l])?;
                errors.push(Some(l1_error(&exact, &solutions[l], true)?));
            }
            Ok((gps, errors))
        }
    }
}

/// Run a refinement study. The random family repeats per seed and averages
/// the errors before forming the EOC column; all other families run once.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let seeds: Vec<u64> = if cfg.family == MeshFamily::Random { cfg.seeds.clone() } else { vec![0] };
    let per_seed: Vec<Result<RunErrors>> = seeds.par_iter().map(|&s| run_errors(cfg, s)).collect();
    let per_seed: Vec<RunErrors> = per_seed.into_iter().collect::<Result<_>>()?;
    let gps = per_seed[0].0.clone();
    let errors: Vec<Option<f64>> = (0..cfg.levels)
        .map(|l| {
            let vals: Vec<f64> = per_seed.iter().filter_map(|(_, e)| e[l]).collect();
            if vals.is_empty() {
                None
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(cfg.levels);
    for l in 0..cfg.levels {
        let eoc = if l >= 1 {
            match (errors[l - 1], errors[l]) {
                (Some(a), Some(b)) => Some(eoc_self(a, b)?),
                _ => None,
            }
        } else {
            None
        };
        rows.push(StudyRow { gp: gps[l], error: errors[l], eoc });
    }
    Ok(StudyReport {
        rows,
        config: cfg.clone(),
        fingerprint: cfg.fingerprint(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// L1 gap between the coarsest-level solution stepped at dt and at dt/2.
/// A gap well below the measured level errors confirms the time error is
/// subdominant, so EOC ratios isolate the spatial error.
pub fn dt_halving_gap(cfg: &StudyConfig, seed: u64) -> Result<f64> {
    let grid = cfg
        .grids(seed)?
        .into_iter()
        .next()
        .ok_or_else(|| PivotError::InvalidArgument("study has no grids".into()))?;
    let coarse = solve_on_grid(&cfg.kernel, &cfg.density, &grid, cfg.t_end, cfg.dt)?;
    let halved = solve_on_grid(&cfg.kernel, &cfg.density, &grid, cfg.t_end, cfg.dt / 2.0)?;
    l1_error(&coarse, &halved, false)
}
