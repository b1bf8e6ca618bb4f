//! Aggregation rate functions K(x, y).

use serde::{Deserialize, Serialize};

use crate::error::{PivotError, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Constant,
    Sum,
    Product,
}

/// Symmetric aggregation kernel descriptor. All three kinds satisfy
/// K(x,y) = K(y,x) >= 0 and are smooth on ]0, x_max]^2. The convention
/// K(x,0) = K(0,x) = 0 never comes up in evaluation because pivots are
/// cell midpoints and therefore strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub k0: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, k0: f64) -> Result<Self> {
        if !(k0 > 0.0) {
            return Err(PivotError::InvalidArgument(format!("kernel coefficient must be > 0, got {k0}")));
        }
        Ok(Self { kind, k0 })
    }

    pub fn constant(k0: f64) -> Result<Self> {
        Self::new(KernelKind::Constant, k0)
    }

    pub fn sum(k0: f64) -> Result<Self> {
        Self::new(KernelKind::Sum, k0)
    }

    pub fn product(k0: f64) -> Result<Self> {
        Self::new(KernelKind::Product, k0)
    }

    /// Parse "constant:k0", "sum:k0" or "product:k0".
    pub fn parse(s: &str) -> Result<Self> {
        let (name, coeff) = s
            .split_once(':')
            .ok_or_else(|| PivotError::Config(format!("kernel spec '{s}' is not of the form kind:k0")))?;
        let k0: f64 = coeff
            .trim()
            .parse()
            .map_err(|_| PivotError::Config(format!("bad kernel coefficient '{coeff}'")))?;
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "constant" => KernelKind::Constant,
            "sum" => KernelKind::Sum,
            "product" => KernelKind::Product,
            other => return Err(PivotError::Config(format!("unknown kernel kind '{other}'"))),
        };
        Self::new(kind, k0).map_err(|e| PivotError::Config(e.to_string()))
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            KernelKind::Constant => self.k0,
            KernelKind::Sum => self.k0 * (x + y),
            KernelKind::Product => self.k0 * x * y,
        }
    }

    /// Upper bound L of K on [0, x_max]^2.
    pub fn sup_bound(&self, grid: &Grid) -> f64 {
        let xm = grid.x_max();
        match self.kind {
            KernelKind::Constant => self.k0,
            KernelKind::Sum => 2.0 * self.k0 * xm,
            KernelKind::Product => self.k0 * xm * xm,
        }
    }

    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        format!("{:?}", self.kind).hash(&mut h);
        self.k0.to_bits().hash(&mut h);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_uniform;

    #[test]
    fn eval_matches_formulas() {
        assert_eq!(KernelSpec::sum(1.0).unwrap().eval(2.0, 3.0), 5.0);
        assert_eq!(KernelSpec::product(1.0).unwrap().eval(2.0, 3.0), 6.0);
        assert_eq!(KernelSpec::constant(3.0).unwrap().eval(2.0, 3.0), 3.0);
    }

    #[test]
    fn symmetry_bit_exact() {
        for spec in [
            KernelSpec::constant(2.5).unwrap(),
            KernelSpec::sum(0.3).unwrap(),
            KernelSpec::product(1.7).unwrap(),
        ] {
            for &(x, y) in &[(0.1, 7.3), (2.0, 3.0), (1e-6, 900.0)] {
                assert_eq!(spec.eval(x, y), spec.eval(y, x));
            }
        }
    }

    #[test]
    fn sup_bound_values() {
        let g15 = build_uniform(0.0, 15.0, 10).unwrap();
        let g30 = build_uniform(0.0, 30.0, 10).unwrap();
        assert_eq!(KernelSpec::sum(1.0).unwrap().sup_bound(&g15), 30.0);
        assert_eq!(KernelSpec::constant(3.0).unwrap().sup_bound(&g15), 3.0);
        assert_eq!(KernelSpec::product(1.0).unwrap().sup_bound(&g30), 900.0);
    }

    #[test]
    fn sup_bound_dominates_eval_on_random_points() {
        use rand::{Rng, SeedableRng};
        let grid = build_uniform(0.0, 15.0, 10).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for spec in [
            KernelSpec::constant(2.5).unwrap(),
            KernelSpec::sum(0.3).unwrap(),
            KernelSpec::product(1.7).unwrap(),
        ] {
            let l = spec.sup_bound(&grid);
            for _ in 0..10_000 {
                let x = rng.gen_range(0.0..15.0);
                let y = rng.gen_range(0.0..15.0);
                assert!(spec.eval(x, y) <= l);
            }
        }
    }

    #[test]
    fn parse_config_strings() {
        assert_eq!(KernelSpec::parse("sum:1.0").unwrap(), KernelSpec::sum(1.0).unwrap());
        assert_eq!(KernelSpec::parse("product:2").unwrap(), KernelSpec::product(2.0).unwrap());
        assert_eq!(KernelSpec::parse("constant:0.5").unwrap(), KernelSpec::constant(0.5).unwrap());
        assert!(KernelSpec::parse("fractal:1").is_err());
        assert!(KernelSpec::parse("sum").is_err());
        assert!(KernelSpec::parse("sum:-1").is_err());
    }
}
