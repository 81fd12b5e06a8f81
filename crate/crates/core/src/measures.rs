//! Energy and discrepancy densities, the profile coordinate, and the two
//! runtime sign checks.
//!
//! The energy density is `(ε/2)|Du|² + F(u)/ε`; the discrepancy density is
//! `(ε/2)|Du|² − F(u)/ε`, which measures departure from equipartition. For
//! the standard well the profile coordinate `r = ε artanh(u)` satisfies
//! `|Dr|² = ((ε/2)|Du|²) / (F(u)/ε)`, so the discrepancy is non-positive
//! exactly where `|Dr| ≤ 1`.

use crate::dynamics::PhaseState;
use crate::grid::{GridSpec, ScalarField};
use crate::report::{fmt_float, CheckVerdict};
use crate::{Error, Result};

/// Which density a [`DensityField`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureLabel {
    Energy,
    Discrepancy,
}

/// A discretized Radon measure: one density value per cell, integrated with
/// the grid's midpoint quadrature.
#[derive(Debug, Clone)]
pub struct DensityField {
    grid: GridSpec,
    density: Vec<f64>,
    label: MeasureLabel,
}

impl DensityField {
    pub fn new(grid: &GridSpec, density: Vec<f64>, label: MeasureLabel) -> Result<DensityField> {
        if density.len() != grid.total_cells() {
            return Err(Error::InvalidGrid(format!(
                "{} density values for {} cells",
                density.len(),
                grid.total_cells()
            )));
        }
        if label == MeasureLabel::Energy && density.iter().any(|&d| d < -1e-14) {
            return Err(Error::InvalidArgument("negative energy density".into()));
        }
        if density.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("non-finite density".into()));
        }
        Ok(DensityField { grid: grid.clone(), density, label })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn label(&self) -> MeasureLabel {
        self.label
    }

    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The measure scaled by `c`; entropy and density are linear in this.
    pub fn scaled(&self, c: f64) -> DensityField {
        DensityField {
            grid: self.grid.clone(),
            density: self.density.iter().map(|d| c * d).collect(),
            label: self.label,
        }
    }

    /// Quadrature of the density over a geodesic ball.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        crate::grid::ball_sum_values(&self.grid, &self.density, center, radius)
    }
}

/// Cellwise `(ε/2)|Du|² + F(u)/ε`.
pub fn energy_measure(state: &PhaseState) -> DensityField {
    let grad = state.field.grad_sq();
    let half_eps = 0.5 * state.eps;
    let inv_eps = 1.0 / state.eps;
    let density = grad
        .values()
        .iter()
        .zip(state.field.values())
        .map(|(&g, &u)| half_eps * g + state.potential.energy(u) * inv_eps)
        .collect();
    DensityField { grid: state.grid().clone(), density, label: MeasureLabel::Energy }
}

/// Cellwise `(ε/2)|Du|² − F(u)/ε`.
pub fn discrepancy_measure(state: &PhaseState) -> DensityField {
    let grad = state.field.grad_sq();
    let half_eps = 0.5 * state.eps;
    let inv_eps = 1.0 / state.eps;
    let density = grad
        .values()
        .iter()
        .zip(state.field.values())
        .map(|(&g, &u)| half_eps * g - state.potential.energy(u) * inv_eps)
        .collect();
    DensityField { grid: state.grid().clone(), density, label: MeasureLabel::Discrepancy }
}

/// Clamp guard for the profile coordinate; keeps `artanh` finite at the
/// wells (`artanh(1 - 1e-12) ≈ 14.2`).
pub const PROFILE_CLAMP: f64 = 1e-12;

/// The profile coordinate `r = ε artanh(u)`, standard well only.
pub fn r_profile(state: &PhaseState) -> Result<ScalarField> {
    if !state.potential.is_standard() {
        return Err(Error::InvalidArgument(
            "profile coordinate requires the standard well (closed-form inverse)".into(),
        ));
    }
    let eps = state.eps;
    Ok(state.field.map(|u| eps * u.clamp(-1.0 + PROFILE_CLAMP, 1.0 - PROFILE_CLAMP).atanh()))
}

/// Threshold below which `F(u)/ε` is treated as vanishing and the ratio
/// `|Dr|²` is masked.
pub const WELL_MASK: f64 = 1e-14;

/// A cellwise value with a validity mask; masked cells are excluded from
/// suprema.
#[derive(Debug, Clone)]
pub struct MaskedField {
    pub values: ScalarField,
    pub mask: Vec<bool>,
}

impl MaskedField {
    /// Largest unmasked value, or `None` if everything is masked.
    pub fn max_unmasked(&self) -> Option<f64> {
        self.values
            .values()
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

/// `|Dr|²` as the ratio of the two energy-density halves,
/// `((ε/2)|Du|²) / (F(u)/ε)`; cells with `F(u)/ε` below [`WELL_MASK`] are
/// masked.
pub fn dr_squared(state: &PhaseState) -> Result<MaskedField> {
    if !state.potential.is_standard() {
        return Err(Error::InvalidArgument(
            "profile-gradient ratio requires the standard well".into(),
        ));
    }
    let grad = state.field.grad_sq();
    let half_eps = 0.5 * state.eps;
    let inv_eps = 1.0 / state.eps;
    let mut mask = Vec::with_capacity(grad.values().len());
    let values: Vec<f64> = grad
        .values()
        .iter()
        .zip(state.field.values())
        .map(|(&g, &u)| {
            let well = state.potential.energy(u) * inv_eps;
            if well < WELL_MASK {
                mask.push(false);
                0.0
            } else {
                mask.push(true);
                half_eps * g / well
            }
        })
        .collect();
    Ok(MaskedField { values: ScalarField::from_values(state.grid(), values)?, mask })
}

/// One row of a sign check: snapshot time and the worst cell value.
#[derive(Debug, Clone, Copy)]
pub struct SignRow {
    pub time: f64,
    pub max_density: f64,
}

/// Result of checking that the discrepancy stays non-positive along a
/// trajectory whose initial discrepancy is non-positive.
#[derive(Debug, Clone)]
pub struct DiscrepancySignReport {
    pub tol: f64,
    pub rows: Vec<SignRow>,
    pub verdict: CheckVerdict,
}

/// For each snapshot, the maximum cell value of the discrepancy density;
/// PASS iff all maxima are at most `tol`. If the first snapshot already
/// violates the tolerance the premise itself is unmet and the report is
/// marked not-applicable.
pub fn check_discrepancy_sign(traj: &[PhaseState], tol: f64) -> DiscrepancySignReport {
    let rows: Vec<SignRow> = traj
        .iter()
        .map(|s| SignRow { time: s.time, max_density: discrepancy_measure(s).max_density() })
        .collect();
    let verdict = if rows.is_empty() {
        CheckVerdict::NotApplicable
    } else if rows[0].max_density > tol {
        CheckVerdict::NotApplicable
    } else if rows.iter().all(|r| r.max_density <= tol) {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    DiscrepancySignReport { tol, rows, verdict }
}

/// Default slack for the profile-gradient bound check.
pub const SONER_TOL: f64 = 1e-6;

/// Largest admissible interface width for the profile-gradient bound.
pub const SONER_EPS_MAX: f64 = 0.2;

#[derive(Debug, Clone, Copy)]
pub struct SonerRow {
    pub time: f64,
    /// max over unmasked cells of `|Dr|² − 1 − (2/log(1/ε)) ((εr)² + 1)/t`.
    pub worst: f64,
}

#[derive(Debug, Clone)]
pub struct SonerReport {
    pub tol: f64,
    pub rows: Vec<SonerRow>,
    pub verdict: CheckVerdict,
}

/// Check the a-priori gradient bound
/// `|Dr|² ≤ 1 + (2/log(1/ε)) ((εr)² + 1)/t` on every snapshot with `t > 0`.
/// Requires `ε < 0.2` and `|u| ≤ 1` initial data.
pub fn check_soner_bound(traj: &[PhaseState]) -> Result<SonerReport> {
    let first = traj
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let eps = first.eps;
    if eps >= SONER_EPS_MAX {
        return Err(Error::InvalidArgument(format!(
            "profile-gradient bound needs eps < {SONER_EPS_MAX}, got {eps}"
        )));
    }
    let log_term = 2.0 / (1.0 / eps).ln();
    let mut rows = Vec::new();
    for s in traj {
        if s.time <= 0.0 {
            continue;
        }
        let ratio = dr_squared(s)?;
        let r = r_profile(s)?;
        let mut worst = f64::NEG_INFINITY;
        for ((&v, &m), &rv) in ratio.values.values().iter().zip(&ratio.mask).zip(r.values()) {
            if !m {
                continue;
            }
            let er = eps * rv;
            let bound = 1.0 + log_term * (er * er + 1.0) / s.time;
            worst = worst.max(v - bound);
        }
        if worst.is_finite() {
            rows.push(SonerRow { time: s.time, worst });
        }
    }
    let verdict = if rows.iter().all(|r| r.worst <= SONER_TOL) {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(SonerReport { tol: SONER_TOL, rows, verdict })
}

/// CSV rows `(time, max-discrepancy, soner-slack, pass flags)` combining the
/// two sign checks; snapshots without a bound row print `na`.
pub fn sign_reports_csv(sign: &DiscrepancySignReport, soner: &SonerReport) -> String {
    let mut out = String::from("time,max_discrepancy,soner_slack,discrepancy_pass,soner_pass\n");
    for row in &sign.rows {
        let bound = soner.rows.iter().find(|r| r.time == row.time);
        let (slack, spass) = match bound {
            Some(b) => (fmt_float(b.worst), (b.worst <= soner.tol).to_string()),
            None => ("na".into(), "na".into()),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_float(row.time),
            fmt_float(row.max_density),
            slack,
            row.max_density <= sign.tol,
            spass,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PhaseState;
    use crate::grid::Topology;
    use crate::potential::Potential;

    fn tanh_state(eps: f64, n: usize, slope: f64) -> PhaseState {
        let grid = GridSpec::new(&[2.0], &[n], &[Topology::Neumann]).unwrap();
        let field = ScalarField::from_fn(&grid, |x| (slope * (x[0] - 1.0) / eps).tanh());
        PhaseState::new(field, 0.0, eps, Potential::standard()).unwrap()
    }

    #[test]
    fn pure_phase_has_zero_energy_density() {
        let grid = GridSpec::torus(1, 1.0, 32).unwrap();
        let field = ScalarField::constant(&grid, 1.0);
        let s = PhaseState::new(field, 0.0, 0.1, Potential::standard()).unwrap();
        let mu = energy_measure(&s);
        assert!(mu.density().iter().all(|&d| d == 0.0));
        assert_eq!(mu.total_mass(), 0.0);
    }

    #[test]
    fn standing_wave_mass_is_alpha() {
        let s = tanh_state(0.05, 4096, 1.0);
        let mu = energy_measure(&s);
        let alpha = 4.0 / 3.0;
        assert!(
            (mu.total_mass() - alpha).abs() < 0.01 * alpha,
            "mass {}",
            mu.total_mass()
        );
    }

    #[test]
    fn constant_zero_has_negative_discrepancy() {
        let grid = GridSpec::torus(1, 1.0, 32).unwrap();
        let field = ScalarField::constant(&grid, 0.0);
        let eps = 0.1;
        let s = PhaseState::new(field, 0.0, eps, Potential::standard()).unwrap();
        let xi = discrepancy_measure(&s);
        for &d in xi.density() {
            assert!((d + 0.5 / eps).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_wave_nearly_equipartitioned() {
        let eps = 0.05;
        let n = 4096;
        let s = tanh_state(eps, n, 1.0);
        let xi = discrepancy_measure(&s);
        let h: f64 = 2.0 / n as f64;
        let sup = xi.density().iter().fold(0.0f64, |m, &d| m.max(d.abs()));
        // equipartition up to the centered-difference error h²/(3ε³)-ish
        let bound = 0.5 * h * h / (eps * eps * eps);
        assert!(sup <= bound, "sup |xi| = {sup}, bound {bound}");
    }

    #[test]
    fn compressed_wave_has_positive_discrepancy_at_midpoint() {
        // u = q(2x): at the midpoint (ε/2)·4q'² − F = 3F > 0.
        let eps = 0.05;
        let s = tanh_state(eps, 4096, 2.0);
        let xi = discrepancy_measure(&s);
        let mid = xi.density()[2048];
        assert!(mid > 0.0, "midpoint discrepancy {mid}");
        let ratio = dr_squared(&s).unwrap();
        let mid_ratio = ratio.values.values()[2048];
        assert!(ratio.mask[2048]);
        assert!((mid_ratio - 4.0).abs() < 0.05, "|Dr|² at midpoint {mid_ratio}");
    }

    #[test]
    fn energy_minus_discrepancy_identity() {
        let s = tanh_state(0.08, 512, 1.3);
        let mu = energy_measure(&s);
        let xi = discrepancy_measure(&s);
        for ((&m, &x), &u) in mu.density().iter().zip(xi.density()).zip(s.field.values()) {
            let want = 2.0 * s.potential.energy(u) / s.eps;
            assert!((m - x - want).abs() <= 1e-12 * want.abs().max(1.0));
            // the well half never exceeds the full density
            assert!(want / 2.0 <= m + 1e-15);
        }
    }

    #[test]
    fn profile_coordinate_inverts_wave() {
        let eps = 0.05;
        let s = tanh_state(eps, 1024, 1.0);
        let r = r_profile(&s).unwrap();
        for (i, &rv) in r.values().iter().enumerate() {
            let x = s.grid().axis_coord(0, i) - 1.0;
            if x.abs() < 0.5 {
                assert!((rv - x).abs() < 1e-9, "r({x}) = {rv}");
            }
        }
        // wells clamp to ±14.2 eps
        let grid = GridSpec::torus(1, 1.0, 32).unwrap();
        let field = ScalarField::constant(&grid, 1.0);
        let s = PhaseState::new(field, 0.0, eps, Potential::standard()).unwrap();
        let r = r_profile(&s).unwrap();
        let want = eps * 14.162084148243997;
        assert!((r.values()[0] - want).abs() < 1e-9 * want);
    }

    #[test]
    fn ratio_identity_against_grad_sq() {
        let s = tanh_state(0.07, 512, 1.4);
        let ratio = dr_squared(&s).unwrap();
        let grad = s.field.grad_sq();
        for ((&v, &m), (&g, &u)) in ratio
            .values
            .values()
            .iter()
            .zip(&ratio.mask)
            .zip(grad.values().iter().zip(s.field.values()))
        {
            if m {
                let well = s.potential.energy(u) / s.eps;
                let lhs = v * well;
                let rhs = 0.5 * s.eps * g;
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn ratio_masks_pure_phases_and_zero_field() {
        let grid = GridSpec::torus(1, 1.0, 32).unwrap();
        let s = PhaseState::new(
            ScalarField::constant(&grid, 0.0),
            0.0,
            0.1,
            Potential::standard(),
        )
        .unwrap();
        let ratio = dr_squared(&s).unwrap();
        assert!(ratio.mask.iter().all(|&m| m));
        assert!(ratio.values.values().iter().all(|&v| v == 0.0));

        let s = PhaseState::new(
            ScalarField::constant(&grid, 1.0),
            0.0,
            0.1,
            Potential::standard(),
        )
        .unwrap();
        let ratio = dr_squared(&s).unwrap();
        assert!(ratio.mask.iter().all(|&m| !m));
        assert_eq!(ratio.max_unmasked(), None);
    }

    #[test]
    fn sign_check_trivial_trajectory() {
        let grid = GridSpec::torus(1, 1.0, 32).unwrap();
        let eps = 0.1;
        let states: Vec<PhaseState> = (0..4)
            .map(|k| {
                PhaseState::new(
                    ScalarField::constant(&grid, 0.0),
                    k as f64 * 0.1,
                    eps,
                    Potential::standard(),
                )
                .unwrap()
            })
            .collect();
        let report = check_discrepancy_sign(&states, 1e-6 / eps);
        assert_eq!(report.verdict, CheckVerdict::Pass);
    }

    #[test]
    fn sign_check_flags_ill_prepared_data_as_not_applicable() {
        let s = tanh_state(0.05, 4096, 2.0);
        let report = check_discrepancy_sign(&[s], 1e-6 / 0.05);
        assert_eq!(report.verdict, CheckVerdict::NotApplicable);
    }

    #[test]
    fn gradient_bound_holds_for_stationary_wave() {
        let eps = 0.05;
        let mut s = tanh_state(eps, 1024, 1.0);
        s.time = 0.5;
        let report = check_soner_bound(&[s]).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass);
        assert!(report.rows[0].worst < 0.0);
    }

    #[test]
    fn gradient_bound_rejects_wide_interfaces() {
        let s = tanh_state(0.5, 256, 1.0);
        assert!(check_soner_bound(&[s]).is_err());
    }

    #[test]
    fn csv_includes_both_checks() {
        let eps = 0.05;
        let mut s = tanh_state(eps, 512, 1.0);
        s.time = 0.1;
        let sign = check_discrepancy_sign(&[s.clone()], 1.0);
        let soner = check_soner_bound(&[s]).unwrap();
        let csv = sign_reports_csv(&sign, &soner);
        assert!(csv.starts_with("time,max_discrepancy,soner_slack"));
        assert_eq!(csv.lines().count(), 2);
    }
}
