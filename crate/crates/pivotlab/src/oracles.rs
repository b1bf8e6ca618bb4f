//! Independent reference computations used to cross-check the scheme: a
//! naive double-loop right hand side, the birth-modification error by
//! quadrature, the frozen-time spatial truncation error, closed moment
//! solutions, and fine-grid reference solutions.

use crate::convergence_lab::project_fine_to_coarse;
use crate::error::{PivotError, Result};
use crate::grid::{refine_locally_uniform, Grid};
use crate::initial_condition::DensitySpec;
use crate::kernel::{KernelKind, KernelSpec};
use crate::quadrature::{GaussRule, QuadratureSpec};
use crate::state::StateVector;
use crate::time_integrator::{integrate, IntegrationConfig};

/// Direct transcription of the discretized system: enumerate all pairs and
/// bin v = x_j + x_k inline, no event table. Mathematically identical to
/// the table-driven rhs.
pub fn rhs_direct(state: &StateVector, grid: &Grid, kernel: &KernelSpec) -> Result<StateVector> {
    let cells = grid.num_cells();
    if state.len() != cells {
        return Err(PivotError::InvalidArgument("state length does not match grid".into()));
    }
    let pivots = grid.pivots();
    let ghost = grid.ghost_pivot();
    let n = &state.n;
    let mut out = StateVector::zeros(cells);
    for j in 0..cells {
        for k in 0..=j {
            let v = pivots[j] + pivots[k];
            let weight = if j == k { 0.5 } else { 1.0 };
            let flux = weight * kernel.eval(pivots[k], pivots[j]) * n[j] * n[k];
            if v >= ghost {
                out.ghost_count += flux;
                out.ghost_mass += flux * v;
                continue;
            }
            let i = pivots.partition_point(|&p| p <= v) - 1;
            let upper_pivot = if i + 1 < cells { pivots[i + 1] } else { ghost };
            let b = (v - pivots[i]) / (upper_pivot - pivots[i]);
            let a = 1.0 - b;
            out.n[i] += a * flux;
            if i + 1 < cells {
                out.n[i + 1] += b * flux;
            } else {
                out.ghost_count += b * flux;
                out.ghost_mass += b * flux * ghost;
            }
        }
    }
    for i in 0..cells {
        let mut loss = 0.0;
        for j in 0..cells {
            loss += kernel.eval(pivots[i], pivots[j]) * n[j];
        }
        out.n[i] -= n[i] * loss;
    }
    Ok(out)
}

/// Modification error J_i(f) = int_cell f - int lambda+ f - int lambda- f,
/// evaluated by composite quadrature with panel doubling until the value
/// settles below 1e-12. `i` is a 0-based cell index; the first and last
/// cells use their boundary forms (no lambda- integral at i = 0; the ghost
/// pivot as the upper limit at i = I-1).
pub fn modification_error<F: Fn(f64) -> f64>(f: &F, grid: &Grid, i: usize) -> f64 {
    let cells = grid.num_cells();
    assert!(i < cells);
    let rule = GaussRule::new(8);
    let x_i = grid.pivot(i);
    let upper = if i + 1 < cells { grid.pivot(i + 1) } else { grid.ghost_pivot() };
    let eval = |panels: usize| -> f64 {
        let mut v = rule.integrate_panels(grid.boundaries()[i], grid.boundaries()[i + 1], panels, f);
        // lambda_i^+ on [x_i, x_{i+1}]
        v -= rule.integrate_panels(x_i, upper, panels, |x| (x - upper) / (x_i - upper) * f(x));
        if i > 0 {
            let lower = grid.pivot(i - 1);
            v -= rule.integrate_panels(lower, x_i, panels, |x| (x - lower) / (x_i - lower) * f(x));
        }
        v
    };
    let mut panels = 1;
    let mut prev = eval(panels);
    loop {
        panels *= 2;
        let next = eval(panels);
        if (next - prev).abs() <= 1e-12 || panels >= 256 {
            return next;
        }
        prev = next;
    }
}

/// The two-term leading expression for the modification error on interior
/// cells, and the one-term boundary forms.
pub fn modification_error_leading(f: f64, fprime: f64, grid: &Grid, i: usize) -> f64 {
    let cells = grid.num_cells();
    let dx = |j: usize| grid.cell_width(j);
    if i == 0 {
        return f / 4.0 * (3.0 * dx(0) - dx(1));
    }
    if i == cells - 1 {
        return f / 4.0 * (dx(i) - dx(i - 1));
    }
    let half_sum = 0.5 * (dx(i - 1) + dx(i + 1));
    f / 2.0 * (dx(i) - half_sum) - fprime / 12.0 * (dx(i + 1) - dx(i - 1)) * (dx(i) + half_sum)
}

/// Continuous birth and death cell integrals of the truncated equation for
/// a frozen density, by composite Gauss quadrature. The inner convolution
/// integral is split at every grid boundary below the outer point so the
/// panels never straddle a cell edge.
fn continuous_birth_death(
    density: &DensitySpec,
    grid: &Grid,
    kernel: &KernelSpec,
    quad: &QuadratureSpec,
) -> (Vec<f64>, Vec<f64>) {
    let rule = quad.rule();
    let panels = quad.panels_per_cell;
    let cells = grid.num_cells();
    let bounds = grid.boundaries();
    let x_max = grid.x_max();

    // segment edges of the inner variable: 0, then every grid boundary
    let mut edges = Vec::with_capacity(cells + 2);
    if bounds[0] > 0.0 {
        edges.push(0.0);
    }
    edges.extend_from_slice(bounds);

    let inner_birth = |x: f64| -> f64 {
        // (1/2) int_0^x K(x-y, y) n(x-y) n(y) dy
        let mut sum = 0.0;
        for w in edges.windows(2) {
            if w[0] >= x {
                break;
            }
            let hi = w[1].min(x);
            sum += rule.integrate_panels(w[0], hi, panels, |y| {
                kernel.eval(x - y, y) * density.eval(x - y) * density.eval(y)
            });
        }
        0.5 * sum
    };
    let inner_death = |x: f64| -> f64 {
        // n(x) int_0^{x_max} K(x, y) n(y) dy
        let mut sum = 0.0;
        for w in edges.windows(2) {
            sum += rule.integrate_panels(w[0], w[1].min(x_max), panels, |y| kernel.eval(x, y) * density.eval(y));
        }
        density.eval(x) * sum
    };

    let mut births = vec![0.0; cells];
    let mut deaths = vec![0.0; cells];
    for i in 0..cells {
        births[i] = rule.integrate_panels(bounds[i], bounds[i + 1], panels, inner_birth);
        deaths[i] = rule.integrate_panels(bounds[i], bounds[i + 1], panels, inner_death);
    }
    (births, deaths)
}

/// Frozen-time spatial truncation error: sigma_i = (B_i - D_i) evaluated by
/// quadrature on the smooth density minus (Bhat_i - Dhat_i) of the scheme
/// applied to the projected cell totals.
pub fn truncation_error(
    density: &DensitySpec,
    grid: &Grid,
    kernel: &KernelSpec,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let (births, deaths) = continuous_birth_death(density, grid, kernel, quad);
    let projected = density.project_to_cells(grid);
    let discrete = rhs_direct(&projected, grid, kernel)?;
    Ok((0..grid.num_cells()).map(|i| (births[i] - deaths[i]) - discrete.n[i]).collect())
}

/// Closed-form zeroth and first moments of the untruncated equation.
/// M1 is always conserved; M0 decays per kernel kind. The product formula
/// is the pre-gelation linear decay.
pub fn analytic_moments(kernel: &KernelSpec, m0_0: f64, m1_0: f64, t: f64) -> (f64, f64) {
    let m0 = match kernel.kind {
        KernelKind::Constant => m0_0 / (1.0 + 0.5 * kernel.k0 * m0_0 * t),
        KernelKind::Sum => m0_0 * (-kernel.k0 * m1_0 * t).exp(),
        KernelKind::Product => m0_0 - 0.5 * kernel.k0 * m1_0 * m1_0 * t,
    };
    (m0, m1_0)
}

/// Cell totals of the reference solution on `grid` at time `t`, from a
/// fine-grid solve: every cell of `grid` bisected twice (4x resolution),
/// stepped at dt/4, then aggregated back onto `grid`.
pub fn reference_solution(
    kernel: &KernelSpec,
    ic: &DensitySpec,
    grid: &Grid,
    t: f64,
    dt: f64,
) -> Result<StateVector> {
    match (kernel.kind, ic) {
        (KernelKind::Sum | KernelKind::Product, DensitySpec::Exponential { .. }) => {}
        _ => {
            return Err(PivotError::UnsupportedCombination(
                "reference solutions are provided for sum/product kernels with the exponential initial condition"
                    .into(),
            ))
        }
    }
    let fine = refine_locally_uniform(grid, 2);
    let fine_sol = solve_on_grid(kernel, ic, &fine, t, dt / 4.0)?;
    project_fine_to_coarse(&fine_sol, &fine, grid)
}

/// Plain fixed-pivot solve, shared by the reference oracle and the study
/// harness.
pub fn solve_on_grid(
    kernel: &KernelSpec,
    ic: &DensitySpec,
    grid: &Grid,
    t: f64,
    dt: f64,
) -> Result<StateVector> {
    let table = crate::fixed_pivot::build_event_table(grid, kernel);
    let state0 = ic.project_to_cells(grid);
    let cfg = IntegrationConfig::new(t, dt)?;
    let (state, _) = integrate(&state0, &table, grid, &cfg)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_pivot::build_event_table;
    use crate::grid::{build_geometric, build_uniform};
    use rand::{Rng, SeedableRng};

    #[test]
    fn direct_rhs_reproduces_hand_example() {
        let grid = build_uniform(0.0, 3.0, 3).unwrap();
        let kernel = KernelSpec::sum(1.0).unwrap();
        let state = StateVector::from_counts(vec![2.0, 0.0, 0.0]);
        let d = rhs_direct(&state, &grid, &kernel).unwrap();
        assert!((d.n[0] + 3.0).abs() < 1e-14);
        assert!((d.n[1] - 1.0).abs() < 1e-14);
        assert!(d.n[2].abs() < 1e-14);
    }

    #[test]
    fn direct_rhs_zero_state() {
        let grid = build_uniform(0.0, 3.0, 3).unwrap();
        let kernel = KernelSpec::product(1.0).unwrap();
        let d = rhs_direct(&StateVector::zeros(3), &grid, &kernel).unwrap();
        assert!(d.n.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn table_rhs_matches_direct_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = build_geometric(1e-3, 100.0, 33).unwrap();
        let kernel = KernelSpec::sum(1.0).unwrap();
        let table = build_event_table(&grid, &kernel);
        for _ in 0..20 {
            let state = StateVector::from_counts((0..33).map(|_| rng.gen_range(0.0..1.0)).collect());
            let a = table.rhs(&state).unwrap();
            let b = rhs_direct(&state, &grid, &kernel).unwrap();
            let scale = a.n.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
            for (x, y) in a.n.iter().zip(&b.n) {
                assert!((x - y).abs() <= 1e-12 * scale);
            }
            assert!((a.ghost_count - b.ghost_count).abs() <= 1e-12 * scale);
            assert!((a.ghost_mass - b.ghost_mass).abs() <= 1e-12 * scale * grid.x_max());
        }
    }

    #[test]
    fn modification_error_vanishes_for_constant_and_linear_on_uniform() {
        let grid = build_uniform(0.0, 10.0, 20).unwrap();
        for i in 2..18 {
            let c = modification_error(&|_x| 2.5, &grid, i);
            assert!(c.abs() < 1e-12, "constant: {c}");
            let l = modification_error(&|x| 3.0 * x - 1.0, &grid, i);
            assert!(l.abs() < 1e-12, "linear: {l}");
        }
    }

    #[test]
    fn modification_error_matches_leading_expression_on_geometric() {
        let grid = build_geometric(0.1, 5.0, 120).unwrap();
        let f = |x: f64| x.exp();
        for i in [40usize, 60, 80] {
            let x_i = grid.pivot(i);
            if x_i > 2.5 {
                continue;
            }
            let q = modification_error(&f, &grid, i);
            let lead = modification_error_leading(f(x_i), f(x_i), &grid, i);
            assert!((q - lead).abs() <= 0.25 * lead.abs(), "cell {i}: quad {q} vs leading {lead}");
        }
    }

    #[test]
    fn truncation_error_zero_for_zero_density() {
        let grid = build_uniform(0.0, 5.0, 8).unwrap();
        let kernel = KernelSpec::sum(1.0).unwrap();
        let zero = DensitySpec::Tabulated { xs: vec![0.0, 5.0], values: vec![0.0, 0.0] };
        let sigma = truncation_error(&zero, &grid, &kernel, &QuadratureSpec::default()).unwrap();
        assert!(sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn analytic_moment_values() {
        let sum = KernelSpec::sum(1.0).unwrap();
        let (m0, m1) = analytic_moments(&sum, 1.0, 1.0, 0.0);
        assert_eq!((m0, m1), (1.0, 1.0));
        let (m0, _) = analytic_moments(&sum, 1.0, 1.0, 0.5);
        assert!((m0 - 0.6065306597126334).abs() < 1e-12);
        let prod = KernelSpec::product(1.0).unwrap();
        let (m0, _) = analytic_moments(&prod, 1.0, 1.0, 0.5);
        assert!((m0 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn reference_rejects_unsupported_combination() {
        let grid = build_uniform(0.0, 10.0, 8).unwrap();
        let nic = DensitySpec::normal(1.0, 0.1);
        let err = reference_solution(&KernelSpec::sum(1.0).unwrap(), &nic, &grid, 0.1, 1e-3);
        assert!(matches!(err, Err(PivotError::UnsupportedCombination(_))));
    }

    #[test]
    fn reference_at_t_zero_is_projection() {
        let grid = build_uniform(0.0, 10.0, 10).unwrap();
        let eic = DensitySpec::exponential(10.0);
        let kernel = KernelSpec::sum(1.0).unwrap();
        let r = reference_solution(&kernel, &eic, &grid, 0.0, 1e-3).unwrap();
        let p = eic.project_to_cells(&grid);
        for (a, b) in r.n.iter().zip(&p.n) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn reference_moments_match_analytic() {
        let grid = build_uniform(0.0, 30.0, 60).unwrap();
        let eic = DensitySpec::exponential(10.0);
        let kernel = KernelSpec::sum(1.0).unwrap();
        let r = reference_solution(&kernel, &eic, &grid, 0.5, 1e-3).unwrap();
        let m0 = crate::fixed_pivot::moment(&r, &grid, 0);
        let (m0_exact, _) = analytic_moments(&kernel, 0.1, 0.01, 0.5);
        assert!((m0 - m0_exact).abs() / m0_exact < 0.005, "m0 {m0} vs {m0_exact}");
    }
}
