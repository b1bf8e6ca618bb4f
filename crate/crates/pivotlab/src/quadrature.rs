//! Gauss-Legendre quadrature on intervals and composite panels.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Roots of the Legendre polynomial are found by Newton iteration from the
/// Chebyshev initial guess; accurate to machine precision for the orders
/// used here (n <= 32).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Fixed-order Gauss-Legendre rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate f over [a, b] with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + h * x);
        }
        sum * h
    }

    /// Integrate f over [a, b] split into `panels` equal sub-intervals.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            sum += self.integrate(a + p as f64 * h, a + (p + 1) as f64 * h, &mut f);
        }
        sum
    }
}

/// Quadrature parameters shared by the oracle computations.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub gauss_order: usize,
    pub panels_per_cell: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { gauss_order: 8, panels_per_cell: 4 }
    }
}

impl QuadratureSpec {
    pub fn rule(&self) -> GaussRule {
        assert!(self.gauss_order >= 2, "gauss order must be >= 2");
        GaussRule::new(self.gauss_order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_nodes_match_known_values() {
        let (n2, w2) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((n2[0] + r).abs() < 1e-15 && (n2[1] - r).abs() < 1e-15);
        assert!((w2[0] - 1.0).abs() < 1e-15 && (w2[1] - 1.0).abs() < 1e-15);

        let (n3, w3) = gauss_legendre(3);
        assert!((n3[1]).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((n3[2] - (0.6f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn order_8_integrates_degree_15_exactly() {
        let rule = GaussRule::new(8);
        // \int_0^2 x^15 dx = 2^16 / 16 = 4096
        let got = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((got - 4096.0).abs() / 4096.0 < 1e-13, "got {got}");
    }

    #[test]
    fn composite_panels_sum_to_single_interval() {
        let rule = GaussRule::new(8);
        let a = rule.integrate(0.0, 1.0, |x| (-x).exp());
        let b = rule.integrate_panels(0.0, 1.0, 7, |x| (-x).exp());
        assert!((a - b).abs() < 1e-14);
        let exact = 1.0 - (-1.0f64).exp();
        assert!((b - exact).abs() < 1e-14);
    }
}
