//! JSON run configuration shared by the CLI subcommands.

use serde::{Deserialize, Serialize};

use crate::convergence_lab::{EocMode, StudyConfig};
use crate::error::{PivotError, Result};
use crate::grid::{
    build_geometric, build_uniform, refine_locally_uniform, refine_oscillatory, refine_random, Grid,
    MeshFamily,
};
use crate::initial_condition::DensitySpec;
use crate::kernel::KernelSpec;
use crate::time_integrator::NegativityPolicy;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshSection {
    pub family: String,
    pub x_min: f64,
    pub x_max: f64,
    /// Coarsest cell count (uniform/geometric) or refinement base size.
    pub cells: usize,
    #[serde(default)]
    pub levels: usize,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// "warn" (default) or "abort" on negative counts beyond roundoff.
    #[serde(default)]
    pub negativity_policy: Option<String>,
}

fn default_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudySection {
    /// "self" or "reference"
    pub mode: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

fn default_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mesh: MeshSection,
    pub kernel: String,
    pub ic: String,
    pub time: TimeSection,
    #[serde(default)]
    pub study: Option<StudySection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PivotError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| PivotError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.family()?;
        self.kernel_spec()?;
        self.density_spec()?;
        if !(self.time.dt > 0.0) || self.time.t_end < 0.0 {
            return Err(PivotError::Config("time section needs dt > 0 and t_end >= 0".into()));
        }
        self.negativity_policy()?;
        if self.mesh.cells == 0 {
            return Err(PivotError::Config("mesh.cells must be >= 1".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<MeshFamily> {
        MeshFamily::parse(&self.mesh.family).map_err(|e| PivotError::Config(e.to_string()))
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::parse(&self.kernel)
    }

    pub fn density_spec(&self) -> Result<DensitySpec> {
        DensitySpec::parse(&self.ic)
    }

    pub fn negativity_policy(&self) -> Result<NegativityPolicy> {
        match self.time.negativity_policy.as_deref() {
            None | Some("warn") => Ok(NegativityPolicy::Warn),
            Some("abort") => Ok(NegativityPolicy::Abort),
            Some(other) => Err(PivotError::Config(format!("unknown negativity policy '{other}'"))),
        }
    }

    pub fn eoc_mode(&self) -> Result<EocMode> {
        let mode = self.study.as_ref().map(|s| s.mode.as_str()).unwrap_or("self");
        match mode {
            "self" => Ok(EocMode::SelfConvergence),
            "reference" => Ok(EocMode::Reference),
            other => Err(PivotError::Config(format!("unknown study mode '{other}'"))),
        }
    }

    pub fn out_dir(&self) -> String {
        self.output.as_ref().map(|o| o.dir.clone()).unwrap_or_else(default_out_dir)
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.mesh.seeds.is_empty() {
            vec![1, 2, 3, 4, 5]
        } else {
            self.mesh.seeds.clone()
        }
    }

    pub fn to_study_config(&self) -> Result<StudyConfig> {
        Ok(StudyConfig {
            family: self.family()?,
            x_min: self.mesh.x_min,
            x_max: self.mesh.x_max,
            base_cells: self.mesh.cells,
            levels: self.mesh.levels.max(1),
            kernel: self.kernel_spec()?,
            density: self.density_spec()?,
            t_end: self.time.t_end,
            dt: self.time.dt,
            eoc_mode: self.eoc_mode()?,
            seeds: self.seeds(),
        })
    }

    /// Single grid for `simulate` and `meshes`: uniform/geometric use
    /// `cells` directly; the refined families start from their base and
    /// apply `levels` splits.
    pub fn build_single_grid(&self, seed_override: Option<u64>) -> Result<Grid> {
        let m = &self.mesh;
        match self.family()? {
            MeshFamily::Uniform => build_uniform(m.x_min, m.x_max, m.cells),
            MeshFamily::Geometric => build_geometric(m.x_min, m.x_max, m.cells),
            MeshFamily::LocallyUniform => {
                Ok(refine_locally_uniform(&build_geometric(m.x_min, m.x_max, m.cells)?, m.levels))
            }
            MeshFamily::Oscillatory => {
                Ok(refine_oscillatory(&build_uniform(m.x_min, m.x_max, m.cells)?, m.levels))
            }
            MeshFamily::Random => {
                let seed = seed_override.or_else(|| self.mesh.seeds.first().copied()).unwrap_or(1);
                Ok(refine_random(&build_geometric(m.x_min, m.x_max, m.cells)?, m.levels, seed))
            }
        }
    }
}
