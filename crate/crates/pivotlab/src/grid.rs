//! Cell-centered grids on a truncated size domain and the five mesh
//! families used by the refinement studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PivotError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeshFamily {
    Uniform,
    Geometric,
    LocallyUniform,
    Oscillatory,
    Random,
}

impl MeshFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "geometric" => Ok(Self::Geometric),
            "locally_uniform" | "locally-uniform" | "locallyuniform" => Ok(Self::LocallyUniform),
            "oscillatory" => Ok(Self::Oscillatory),
            "random" => Ok(Self::Random),
            other => Err(PivotError::InvalidArgument(format!("unknown mesh family '{other}'"))),
        }
    }
}

/// Cell-centered partition of [x_min, x_max]. Pivots are always computed as
/// cell midpoints, never stored, so they stay bit-exact midpoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    pub family: MeshFamily,
    boundaries: Vec<f64>,
    pub seed: Option<u64>,
}

impl Grid {
    pub fn from_boundaries(family: MeshFamily, boundaries: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(PivotError::InvalidArgument("grid needs at least one cell".into()));
        }
        if boundaries[0] < 0.0 {
            return Err(PivotError::InvalidArgument("grid must start at x >= 0".into()));
        }
        for w in boundaries.windows(2) {
            if !(w[1] > w[0]) {
                return Err(PivotError::InvalidArgument(format!(
                    "boundaries not strictly increasing: {} !< {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { family, boundaries, seed })
    }

    pub fn num_cells(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn x_min(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    /// Pivot x_i of cell i (0-based): the cell midpoint.
    pub fn pivot(&self, i: usize) -> f64 {
        0.5 * (self.boundaries[i] + self.boundaries[i + 1])
    }

    pub fn pivots(&self) -> Vec<f64> {
        (0..self.num_cells()).map(|i| self.pivot(i)).collect()
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.boundaries[i + 1] - self.boundaries[i]
    }

    /// Extra grid point x_{I+1} at distance dx_I beyond the last pivot.
    pub fn ghost_pivot(&self) -> f64 {
        let last = self.num_cells() - 1;
        self.pivot(last) + self.cell_width(last)
    }

    pub fn min_width(&self) -> f64 {
        (0..self.num_cells()).map(|i| self.cell_width(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_width(&self) -> f64 {
        (0..self.num_cells()).map(|i| self.cell_width(i)).fold(0.0, f64::max)
    }

    /// Quasi-uniformity ratio dx_max / dx_min.
    pub fn quasi_uniformity_ratio(&self) -> f64 {
        self.max_width() / self.min_width()
    }

    /// Order-insensitive identity of the geometry, used to detect stale
    /// event tables.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for b in &self.boundaries {
            b.to_bits().hash(&mut h);
        }
        format!("{:?}", self.family).hash(&mut h);
        h.finish()
    }

    /// Split every cell of `self` into children given by `fractions` of the
    /// cell width (strictly increasing, in ]0,1[).
    fn split_cells<F: FnMut(usize) -> Vec<f64>>(&self, family: MeshFamily, seed: Option<u64>, mut fractions: F) -> Grid {
        let mut boundaries = Vec::with_capacity(self.boundaries.len() * 2);
        for i in 0..self.num_cells() {
            let (a, b) = (self.boundaries[i], self.boundaries[i + 1]);
            boundaries.push(a);
            for f in fractions(i) {
                boundaries.push(a + f * (b - a));
            }
        }
        boundaries.push(self.x_max());
        Grid { family, boundaries, seed }
    }
}

/// Equidistant partition of [x_min, x_max] into `cells` cells.
pub fn build_uniform(x_min: f64, x_max: f64, cells: usize) -> Result<Grid> {
    if cells == 0 || !(x_max > x_min) || x_min < 0.0 {
        return Err(PivotError::InvalidArgument(format!(
            "uniform grid needs x_max > x_min >= 0 and cells >= 1, got [{x_min}, {x_max}] with {cells}"
        )));
    }
    let h = (x_max - x_min) / cells as f64;
    let mut boundaries: Vec<f64> = (0..=cells).map(|i| x_min + i as f64 * h).collect();
    // land exactly on the right end
    *boundaries.last_mut().unwrap() = x_max;
    Grid::from_boundaries(MeshFamily::Uniform, boundaries, None)
}

/// Geometric partition x_{i+1/2} = x_min * r^i with r = (x_max/x_min)^(1/I).
/// Equivalent to an equidistant grid in log(x).
pub fn build_geometric(x_min: f64, x_max: f64, cells: usize) -> Result<Grid> {
    if cells == 0 || !(x_min > 0.0) || !(x_max > x_min) {
        return Err(PivotError::InvalidArgument(format!(
            "geometric grid needs 0 < x_min < x_max and cells >= 1, got [{x_min}, {x_max}] with {cells}"
        )));
    }
    let r = (x_max / x_min).powf(1.0 / cells as f64);
    let mut boundaries: Vec<f64> = (0..=cells).map(|i| x_min * r.powi(i as i32)).collect();
    *boundaries.last_mut().unwrap() = x_max;
    Grid::from_boundaries(MeshFamily::Geometric, boundaries, None)
}

/// Geometric common ratio of the boundaries.
pub fn geometric_ratio(x_min: f64, x_max: f64, cells: usize) -> f64 {
    (x_max / x_min).powf(1.0 / cells as f64)
}

/// Bisect every cell `levels` times. Starting from a geometric base this
/// produces the locally uniform family.
pub fn refine_locally_uniform(base: &Grid, levels: usize) -> Grid {
    let mut g = base.clone();
    for _ in 0..levels {
        g = g.split_cells(MeshFamily::LocallyUniform, None, |_| vec![0.5]);
    }
    if levels == 0 {
        g.family = MeshFamily::LocallyUniform;
    }
    g
}

/// Split every cell with a 1:2 left:right width ratio, `levels` times.
pub fn refine_oscillatory(base: &Grid, levels: usize) -> Grid {
    let mut g = base.clone();
    for _ in 0..levels {
        g = g.split_cells(MeshFamily::Oscillatory, None, |_| vec![1.0 / 3.0]);
    }
    if levels == 0 {
        g.family = MeshFamily::Oscillatory;
    }
    g
}

/// Split fraction bounds for the random family. The construction rule only
/// asks for a random split; clamping away from 0 and 1 keeps the
/// quasi-uniformity ratio bounded under refinement.
pub const RANDOM_SPLIT_RANGE: (f64, f64) = (0.2, 0.8);

/// Split every cell at a uniformly drawn fraction of its width, `levels`
/// times. The same seed reproduces the same grid bit-exactly, and the
/// level-l grid is a prefix of the level-(l+1) construction, so successive
/// levels are nested.
pub fn refine_random(base: &Grid, levels: usize, seed: u64) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = RANDOM_SPLIT_RANGE;
    let mut g = base.clone();
    for _ in 0..levels {
        g = g.split_cells(MeshFamily::Random, Some(seed), |_| vec![rng.gen_range(lo..hi)]);
    }
    if levels == 0 {
        g.family = MeshFamily::Random;
        g.seed = Some(seed);
    }
    g
}
