//! Initial number densities and their projection onto cell totals.

use serde::{Deserialize, Serialize};

use crate::error::{PivotError, Result};
use crate::grid::Grid;
use crate::quadrature::GaussRule;
use crate::state::StateVector;

pub const DEFAULT_PROJECTION_ORDER: usize = 8;
pub const DEFAULT_PROJECTION_PANELS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensitySpec {
    /// (1/(sigma sqrt(2 pi))) exp(-(x-mu)^2 / (2 sigma^2))
    Normal { mu: f64, sigma: f64 },
    /// exp(-alpha x)
    Exponential { alpha: f64 },
    /// Piecewise-linear interpolation of sampled (x, n) pairs; used to feed
    /// reference solutions back in.
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
}

impl DensitySpec {
    pub fn normal(mu: f64, sigma: f64) -> Self {
        Self::Normal { mu, sigma }
    }

    pub fn exponential(alpha: f64) -> Self {
        Self::Exponential { alpha }
    }

    /// Parse "normal:mu,sigma2" (sigma2 is the variance) or
    /// "exponential:alpha".
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| PivotError::Config(format!("density spec '{s}' is not of the form kind:params")))?;
        let parse_f = |t: &str| -> Result<f64> {
            t.trim().parse().map_err(|_| PivotError::Config(format!("bad density parameter '{t}'")))
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "normal" => {
                let (mu, sigma2) = args
                    .split_once(',')
                    .ok_or_else(|| PivotError::Config("normal density needs mu,sigma2".into()))?;
                let mu = parse_f(mu)?;
                let sigma2 = parse_f(sigma2)?;
                if !(sigma2 > 0.0) {
                    return Err(PivotError::Config(format!("variance must be > 0, got {sigma2}")));
                }
                Ok(Self::Normal { mu, sigma: sigma2.sqrt() })
            }
            "exponential" => {
                let alpha = parse_f(args)?;
                Ok(Self::Exponential { alpha })
            }
            other => Err(PivotError::Config(format!("unknown density kind '{other}'"))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Self::Exponential { alpha } => (-alpha * x).exp(),
            Self::Tabulated { xs, values } => {
                if xs.is_empty() {
                    return 0.0;
                }
                if x <= xs[0] {
                    return values[0];
                }
                if x >= *xs.last().unwrap() {
                    return *values.last().unwrap();
                }
                let k = xs.partition_point(|&t| t <= x) - 1;
                let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
                values[k] * (1.0 - w) + values[k + 1] * w
            }
        }
    }

    /// Cell totals N_i = integral of the density over cell i, by composite
    /// Gauss-Legendre. The projection is over-resolved on purpose so its
    /// error sits far below the scheme error being measured.
    pub fn project_to_cells(&self, grid: &Grid) -> StateVector {
        self.project_to_cells_with(grid, DEFAULT_PROJECTION_ORDER, DEFAULT_PROJECTION_PANELS)
    }

    pub fn project_to_cells_with(&self, grid: &Grid, order: usize, panels: usize) -> StateVector {
        let rule = GaussRule::new(order);
        let n = (0..grid.num_cells())
            .map(|i| {
                rule.integrate_panels(grid.boundaries()[i], grid.boundaries()[i + 1], panels, |x| self.eval(x))
            })
            .collect();
        StateVector::from_counts(n)
    }
}
