//! Explicit time integration of `∂t u = Δu − f(u)/ε²`.
//!
//! The scheme is forward Euler with a step bound combining the diffusion
//! limit `h²/(2n)` and the reaction limit `ε²/sup|f'|` (which is `ε²/4` for
//! the standard well). Under that bound the discrete flow dissipates the
//! energy and preserves `|u| ≤ 1`.

use crate::grid::{GridSpec, ScalarField};
use crate::potential::{Potential, WellKind};
use crate::{Error, Result};

/// A field `u` at a time, with its interface width and well.
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub field: ScalarField,
    pub time: f64,
    pub eps: f64,
    pub potential: Potential,
}

impl PhaseState {
    pub fn new(field: ScalarField, time: f64, eps: f64, potential: Potential) -> Result<PhaseState> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("eps {eps} must be positive")));
        }
        field.check_finite()?;
        Ok(PhaseState { field, time, eps, potential })
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    /// Total energy `∫ (ε/2)|Du|² + F(u)/ε dx`.
    pub fn energy(&self) -> f64 {
        let grad = self.field.grad_sq();
        let vol = self.grid().cell_volume();
        let mut sum = 0.0;
        for (&g, &u) in grad.values().iter().zip(self.field.values()) {
            sum += 0.5 * self.eps * g + self.potential.energy(u) / self.eps;
        }
        sum * vol
    }
}

/// Time-stepping scheme. Only explicit Euler is implemented; the enum leaves
/// room for a semi-implicit variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
}

/// Step size and safety factor.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub dt: f64,
    pub safety: f64,
    pub scheme: Scheme,
}

impl StepControl {
    pub fn new(dt: f64, safety: f64) -> Result<StepControl> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt {dt} must be positive")));
        }
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::InvalidArgument(format!("safety {safety} not in (0, 1]")));
        }
        Ok(StepControl { dt, safety, scheme: Scheme::ExplicitEuler })
    }

    /// The largest stable control for this grid/width/well combination.
    pub fn from_stability(
        grid: &GridSpec,
        eps: f64,
        potential: &Potential,
        safety: f64,
    ) -> Result<StepControl> {
        let dt = stable_dt_for(grid, eps, potential, safety)?;
        StepControl::new(dt, safety)
    }
}

/// `safety * min(h²/(2n), ε²/4)`, the standard-well stability bound.
pub fn stable_dt(grid: &GridSpec, eps: f64, safety: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} must be positive")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidArgument(format!("safety {safety} not in (0, 1]")));
    }
    let h = grid.min_spacing();
    let n = grid.dim() as f64;
    Ok(safety * (h * h / (2.0 * n)).min(eps * eps / 4.0))
}

/// Stability bound with the reaction limit taken from the well's measured
/// `sup |f'|` instead of the standard-model constant.
pub fn stable_dt_for(grid: &GridSpec, eps: f64, potential: &Potential, safety: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} must be positive")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidArgument(format!("safety {safety} not in (0, 1]")));
    }
    let h = grid.min_spacing();
    let n = grid.dim() as f64;
    let slope = potential.reaction_slope_max().max(1e-300);
    Ok(safety * (h * h / (2.0 * n)).min(eps * eps / slope))
}

/// One forward-Euler step: `u + dt (Δu − f(u)/ε²)`, time advanced by `dt`.
pub fn step(state: &PhaseState, ctrl: &StepControl) -> Result<PhaseState> {
    let limit = ctrl.safety * stable_dt_for(state.grid(), state.eps, &state.potential, 1.0)?;
    if ctrl.dt > limit * (1.0 + 1e-12) {
        return Err(Error::Unstable { dt: ctrl.dt, limit });
    }
    let mut values = state.field.values().to_vec();
    let mut lap = vec![0.0; values.len()];
    euler_update(state.grid(), &mut values, &mut lap, state.eps, &state.potential, ctrl.dt)?;
    let field = ScalarField::from_values(state.grid(), values)?;
    Ok(PhaseState { field, time: state.time + ctrl.dt, eps: state.eps, potential: state.potential.clone() })
}

/// March from `s0` to `t_end`, landing exactly on each requested snapshot
/// time by shortening the final sub-step. Returns one state per snapshot.
pub fn run(
    s0: &PhaseState,
    t_end: f64,
    ctrl: &StepControl,
    snapshot_times: &[f64],
) -> Result<Vec<PhaseState>> {
    let limit = ctrl.safety * stable_dt_for(s0.grid(), s0.eps, &s0.potential, 1.0)?;
    if ctrl.dt > limit * (1.0 + 1e-12) {
        return Err(Error::Unstable { dt: ctrl.dt, limit });
    }
    if t_end < s0.time {
        return Err(Error::InvalidArgument(format!(
            "t_end {t_end} precedes initial time {}",
            s0.time
        )));
    }
    for w in snapshot_times.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidArgument("snapshot times not sorted".into()));
        }
    }
    if let (Some(&first), Some(&last)) = (snapshot_times.first(), snapshot_times.last()) {
        if first < s0.time || last > t_end {
            return Err(Error::InvalidArgument(format!(
                "snapshot times outside [{}, {t_end}]",
                s0.time
            )));
        }
    }

    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut current = s0.field.values().to_vec();
    let mut lap = vec![0.0; current.len()];
    let mut t = s0.time;
    let grid = s0.grid().clone();

    for &target in snapshot_times {
        while t < target {
            let dt = ctrl.dt.min(target - t);
            euler_update(&grid, &mut current, &mut lap, s0.eps, &s0.potential, dt)?;
            t += dt;
        }
        t = target;
        snapshots.push(PhaseState {
            field: ScalarField::from_values(&grid, current.clone())?,
            time: target,
            eps: s0.eps,
            potential: s0.potential.clone(),
        });
    }
    Ok(snapshots)
}

/// In-place Euler update; `lap` is scratch. Signals the first non-finite
/// output cell.
fn euler_update(
    grid: &GridSpec,
    values: &mut [f64],
    lap: &mut [f64],
    eps: f64,
    potential: &Potential,
    dt: f64,
) -> Result<()> {
    ScalarField::laplacian_values(grid, values, lap);
    let inv_eps2 = 1.0 / (eps * eps);
    let mut bad = usize::MAX;
    match potential.kind() {
        WellKind::Standard => {
            for (i, (v, &l)) in values.iter_mut().zip(lap.iter()).enumerate() {
                let u = *v;
                let next = u + dt * (l - 2.0 * u * (u * u - 1.0) * inv_eps2);
                if !next.is_finite() && bad == usize::MAX {
                    bad = i;
                }
                *v = next;
            }
        }
        WellKind::Custom { reaction, .. } => {
            for (i, (v, &l)) in values.iter_mut().zip(lap.iter()).enumerate() {
                let u = *v;
                let next = u + dt * (l - reaction(u) * inv_eps2);
                if !next.is_finite() && bad == usize::MAX {
                    bad = i;
                }
                *v = next;
            }
        }
    }
    if bad != usize::MAX {
        return Err(Error::NonFinite { index: bad });
    }
    Ok(())
}
