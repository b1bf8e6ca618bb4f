//! Fixed-step classical Runge-Kutta integration of the semi-discrete
//! system, with moment monitoring.

use serde::{Deserialize, Serialize};

use crate::error::{PivotError, Result};
use crate::fixed_pivot::{moment, EventTable};
use crate::grid::Grid;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativityPolicy {
    Warn,
    Abort,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub t_end: f64,
    pub dt: f64,
    pub monitor_interval: usize,
    pub negativity_policy: NegativityPolicy,
}

impl IntegrationConfig {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || t_end < 0.0 {
            return Err(PivotError::InvalidArgument(format!(
                "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
            )));
        }
        Ok(Self { t_end, dt, monitor_interval: 50, negativity_policy: NegativityPolicy::Warn })
    }
}

/// Roundoff-scale negativity is tolerated; anything beyond this fraction of
/// the largest count is treated as genuine scheme failure.
const NEGATIVITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonitorRow {
    pub t: f64,
    pub m0: f64,
    pub m1: f64,
    pub ghost_count: f64,
    pub ghost_mass: f64,
    pub min_n: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MonitorLog {
    pub rows: Vec<MonitorRow>,
}

impl MonitorLog {
    fn record(&mut self, t: f64, state: &StateVector, grid: &Grid) {
        self.rows.push(MonitorRow {
            t,
            m0: moment(state, grid, 0),
            m1: moment(state, grid, 1),
            ghost_count: state.ghost_count,
            ghost_mass: state.ghost_mass,
            min_n: state.min_count(),
        });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,m0,m1,ghost_count,ghost_mass,min_n\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.t, r.m0, r.m1, r.ghost_count, r.ghost_mass, r.min_n
            ));
        }
        out
    }
}

/// One classical 4-stage Runge-Kutta step; N and the ghost ledger advance
/// jointly.
pub fn rk4_step<F>(derivative: &mut F, t: f64, state: &StateVector, dt: f64) -> Result<StateVector>
where
    F: FnMut(f64, &StateVector) -> Result<StateVector>,
{
    let k1 = derivative(t, state)?;
    let mut s = state.clone();
    s.axpy(0.5 * dt, &k1);
    let k2 = derivative(t + 0.5 * dt, &s)?;
    let mut s = state.clone();
    s.axpy(0.5 * dt, &k2);
    let k3 = derivative(t + 0.5 * dt, &s)?;
    let mut s = state.clone();
    s.axpy(dt, &k3);
    let k4 = derivative(t + dt, &s)?;
    let mut next = state.clone();
    next.axpy(dt / 6.0, &k1);
    next.axpy(dt / 3.0, &k2);
    next.axpy(dt / 3.0, &k3);
    next.axpy(dt / 6.0, &k4);
    for (i, v) in next.n.iter().enumerate() {
        if !v.is_finite() {
            return Err(PivotError::NumericalFailure {
                t,
                step: 0,
                message: format!("non-finite component in cell {i}"),
            });
        }
    }
    Ok(next)
}

/// March the state to t_end with fixed steps; the last step is truncated to
/// land exactly on t_end.
pub fn integrate(
    state0: &StateVector,
    table: &EventTable,
    grid: &Grid,
    cfg: &IntegrationConfig,
) -> Result<(StateVector, MonitorLog)> {
    if state0.len() != table.cells() {
        return Err(PivotError::InvalidArgument("state length does not match table".into()));
    }
    let mut log = MonitorLog::default();
    let mut state = state0.clone();
    let mut t = 0.0;
    log.record(t, &state, grid);
    if cfg.t_end == 0.0 {
        return Ok((state, log));
    }
    let mut deriv = |_t: f64, s: &StateVector| table.rhs(s);
    let mut step = 0usize;
    while t < cfg.t_end {
        let dt = cfg.dt.min(cfg.t_end - t);
        state = rk4_step(&mut deriv, t, &state, dt).map_err(|e| match e {
            PivotError::NumericalFailure { t, message, .. } => PivotError::NumericalFailure { t, step, message },
            other => other,
        })?;
        t += dt;
        step += 1;
        let min_n = state.min_count();
        if min_n < -NEGATIVITY_TOLERANCE * state.max_count().max(1e-300) {
            let cell = state.n.iter().position(|&v| v == min_n).unwrap_or(0);
            match cfg.negativity_policy {
                NegativityPolicy::Abort => {
                    return Err(PivotError::NumericalFailure {
                        t,
                        step,
                        message: format!("negative count {min_n:.3e} in cell {cell}"),
                    });
                }
                NegativityPolicy::Warn => {
                    eprintln!("warning: negative count {min_n:.3e} in cell {cell} at t = {t:.6}, step {step}");
                }
            }
        }
        if step.is_multiple_of(cfg.monitor_interval) || t >= cfg.t_end {
            log.record(t, &state, grid);
        }
    }
    Ok((state, log))
}
