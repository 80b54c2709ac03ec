//! Dimensionless numbers characterizing the slosh regime of a maneuver.
//!
//! The effective lateral acceleration at the tank is taken as ω²·L during
//! the spin plateau (centrifugal) and ω̇·L during the ramp (inertial), with
//! L the tank-center offset from the spin axis.

use crate::emm::FluidProperties;
use crate::error::{Error, Result};
use crate::sim::Scenario;

/// Regime numbers for one maneuver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessSet {
    /// Oh = μ/√(ρ·σ·R): viscous vs capillary forces.
    pub ohnesorge: f64,
    /// Bo = ρ·ω²L·R²/σ: plateau centrifugal acceleration vs capillarity.
    pub bond_centrifugal: f64,
    /// Bo = ρ·ω̇L·R²/σ: ramp inertial acceleration vs capillarity.
    pub bond_inertial: f64,
}

/// Evaluate the set from raw quantities: tank radius [m], spin-axis offset
/// of the tank center [m], plateau rate [rad/s], ramp acceleration [rad/s²].
pub fn dimensionless(
    fluid: &FluidProperties,
    tank_radius: f64,
    arm: f64,
    spin_rate: f64,
    spin_accel: f64,
) -> Result<DimensionlessSet> {
    if !(tank_radius > 0.0) {
        return Err(Error::validation("tank radius must be positive"));
    }
    if arm < 0.0 {
        return Err(Error::validation("spin-axis arm must be non-negative"));
    }
    let bond = |accel: f64| fluid.density * accel * tank_radius * tank_radius / fluid.surface_tension;
    Ok(DimensionlessSet {
        ohnesorge: fluid.viscosity
            / (fluid.density * fluid.surface_tension * tank_radius).sqrt(),
        bond_centrifugal: bond(spin_rate * spin_rate * arm),
        bond_inertial: bond(spin_accel.abs() * arm),
    })
}

/// Regime numbers of a scenario, using the tank-center offset as the arm.
pub fn scenario_dimensionless(scn: &Scenario) -> Result<DimensionlessSet> {
    dimensionless(
        &scn.model.fluid,
        scn.model.tank.radius,
        scn.model.tank.center_b.norm(),
        scn.maneuver.spin_rate,
        scn.maneuver.accel(),
    )
}
