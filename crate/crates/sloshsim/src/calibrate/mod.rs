//! Fitting the three free slosh parameters against a reference trace.
//!
//! The tuned quantities are the stationary mass fraction, the constraint
//! surface size as a ratio of the tank radius (the surface is kept
//! spherical), and the wall-drag coefficient. The objective is the
//! normalized RMS mismatch of the dominant lateral force and the spin-axis
//! torque between a forward run and the reference.

pub mod de;
pub mod rmse;

pub use de::{differential_evolution, DeConfig, DeResult};
pub use rmse::trace_rmse;

use crate::emm::{SloshModel, SloshParams, SurfaceParams};
use crate::error::{Error, Result};
use crate::sim::{run_closed_loop, run_open_loop, Channel, Scenario, Trace};

/// Search box for the three parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBounds {
    pub stationary_fraction: (f64, f64),
    /// Surface semi-axis as a fraction of the tank radius.
    pub surface_ratio: (f64, f64),
    pub friction_coeff: (f64, f64),
}

impl Default for CalibrationBounds {
    fn default() -> Self {
        CalibrationBounds {
            stationary_fraction: (0.4, 0.95),
            surface_ratio: (0.55, 0.95),
            friction_coeff: (1e-3, 0.1),
        }
    }
}

/// Fitted parameters plus optimizer bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub stationary_fraction: f64,
    pub surface_ratio: f64,
    pub friction_coeff: f64,
    /// Final objective value (normalized RMS).
    pub objective: f64,
    pub generations: u32,
    pub evaluations: u64,
    pub converged: bool,
}

/// Rebuild a scenario with the given slosh parameters; everything else is
/// untouched. The surface stays spherical at `ratio · tank radius`.
pub fn apply_parameters(
    scn: &Scenario,
    stationary_fraction: f64,
    surface_ratio: f64,
    friction_coeff: f64,
) -> Result<Scenario> {
    let mut s = scn.clone();
    let semi = surface_ratio * s.model.tank.radius;
    let surface = SurfaceParams::new(semi, semi)?;
    let params = SloshParams::new(
        stationary_fraction,
        friction_coeff,
        s.model.params.adhesion_threshold,
        s.model.params.m_total,
    )?;
    s.model = SloshModel::new(s.model.tank, s.model.fluid, surface, params)?;
    Ok(s)
}

/// Objective channels for a scenario: the lateral force component along the
/// tank arm (the dominant slosh load) plus the torque about the spin axis.
pub fn objective_channels(scn: &Scenario) -> Vec<(Channel, f64)> {
    let arm = scn.model.tank.center_b;
    let force = if arm.y.abs() >= arm.x.abs() && arm.y.abs() >= arm.z.abs() {
        Channel::ForceY
    } else if arm.x.abs() >= arm.z.abs() {
        Channel::ForceX
    } else {
        Channel::ForceZ
    };
    let axis = scn.maneuver.axis_b;
    let torque = if axis.z.abs() >= axis.x.abs() && axis.z.abs() >= axis.y.abs() {
        Channel::TorqueZ
    } else if axis.x.abs() >= axis.y.abs() {
        Channel::TorqueX
    } else {
        Channel::TorqueY
    };
    vec![(force, 1.0), (torque, 1.0)]
}

/// Forward model used by the fit: closed loop when the scenario carries a
/// controller, open loop otherwise (same rule as the simulate default).
fn forward(scn: &Scenario) -> Result<Trace> {
    if scn.control.is_some() {
        run_closed_loop(scn)
    } else {
        run_open_loop(scn)
    }
}

/// Fit the slosh parameters of `scn` so its forward run reproduces
/// `reference`. Failed forward runs score as infinitely bad rather than
/// aborting the search.
pub fn calibrate(
    scn: &Scenario,
    reference: &Trace,
    bounds: &CalibrationBounds,
    de: &DeConfig,
) -> Result<CalibrationResult> {
    scn.validate()?;
    if scn.model.is_dry() {
        return Err(Error::validation("cannot calibrate slosh parameters of a dry tank"));
    }
    let channels = objective_channels(scn);
    for (c, _) in &channels {
        if reference.channel(*c).is_none() {
            return Err(Error::validation(format!(
                "reference trace lacks the {} channel needed by the objective",
                c.csv_name()
            )));
        }
    }

    let objective = |x: &[f64]| -> f64 {
        let run = apply_parameters(scn, x[0], x[1], x[2])
            .and_then(|s| forward(&s))
            .and_then(|tr| trace_rmse(reference, &tr, &channels));
        run.unwrap_or(f64::INFINITY)
    };

    let box3 = [
        bounds.stationary_fraction,
        bounds.surface_ratio,
        bounds.friction_coeff,
    ];
    let r = differential_evolution(objective, &box3, de)?;
    Ok(CalibrationResult {
        stationary_fraction: r.best[0],
        surface_ratio: r.best[1],
        friction_coeff: r.best[2],
        objective: r.best_value,
        generations: r.generations,
        evaluations: r.evaluations,
        converged: r.converged,
    })
}
