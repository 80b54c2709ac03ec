//! A fully assembled simulation case: slosh model, body inertia, maneuver,
//! optional controller, integration grid, and initial conditions.

use crate::control::{ControlSpec, ManeuverProfile};
use crate::emm::{constraint_value, SloshModel, SloshState};
use crate::error::{Error, Result};
use crate::frames::Vec3;
use crate::rigid::{BodyState, InertiaModel};

/// Initial body and slosh states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub body: BodyState,
    pub slosh: SloshState,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            body: BodyState::at_rest(),
            slosh: SloshState::at_rest(),
        }
    }
}

/// One simulation case, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Label carried into reports.
    pub name: String,
    pub model: SloshModel,
    pub inertia: InertiaModel,
    /// Closed-loop controller; `None` restricts the case to open loop.
    pub control: Option<ControlSpec>,
    pub maneuver: ManeuverProfile,
    /// Outer (coupling) step [s].
    pub dt: f64,
    /// Slosh substeps per outer step.
    pub substeps: u32,
    /// Final time [s]; must sit on the `dt` grid.
    pub t_end: f64,
    /// Gravity in inertial axes [m/s²].
    pub gravity_i: Vec3,
    /// Seed consumed by calibration and any randomized tooling.
    pub seed: u64,
    pub init: InitialConditions,
}

impl Scenario {
    /// Validate cross-field consistency. Called by the file loader; direct
    /// builders should call it once assembly is done.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("time step must be positive"));
        }
        if self.substeps == 0 {
            return Err(Error::validation("substeps must be at least 1"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::validation("end time must be positive"));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::validation(format!(
                "end time {} is not a multiple of the time step {}",
                self.t_end, self.dt
            )));
        }
        if !self.gravity_i.iter().all(|g| g.is_finite()) {
            return Err(Error::validation("gravity must be finite"));
        }
        if !self.model.is_dry() {
            let c0 = constraint_value(&self.init.slosh.pos_t, &self.model.surface);
            match self.init.slosh.mode {
                crate::emm::SloshMode::Constrained => {
                    if c0.abs() > 1e-9 {
                        return Err(Error::validation(format!(
                            "constrained initial position must lie on the surface (C = {c0:.3e})"
                        )));
                    }
                }
                crate::emm::SloshMode::Unconstrained => {
                    if c0 > 1e-9 {
                        return Err(Error::validation(format!(
                            "free initial position must lie inside the surface (C = {c0:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of outer steps on the grid.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}
