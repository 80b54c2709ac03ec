//! Equivalent mechanical model of propellant slosh.
//!
//! The liquid in a spherical tank is split into a stationary mass `m0` lumped
//! at the tank centre and a moving particle of mass `m_p`. The particle either
//! flies freely inside the tank (unconstrained mode) or slides on an
//! ellipsoid-of-revolution constraint surface
//!
//! ```text
//! C(r) = rᵀ W r - 1 = 0,     W = diag(1/a², 1/b², 1/b²)
//! ```
//!
//! with `r` the particle position relative to the tank centre in tank axes.
//! Contact starts with a fully inelastic impact when `C` crosses zero from
//! inside and ends when the contact force turns tensile beyond a small
//! adhesion threshold. While in contact, a single Lagrange multiplier keeps
//! the particle on the surface and a viscosity-scaled drag models the boundary
//! layer against the wall.
//!
//! Everything here works on explicit kinematic inputs ([`BodyMotionInput`]);
//! the coupling to the rigid-body stage lives in [`crate::sim`].

mod dynamics;
mod jacobian;
mod stepper;
mod surface;
mod wrench;

pub use dynamics::{
    beta, constrained_accel, friction_force, impact, separation_check, unconstrained_accel,
    ConstraintSolve,
};
pub use jacobian::{jacobian, jacobian_rate, relative_velocity_t, wall_velocity_i, ConstraintJacobian};
pub use stepper::{advance_slosh, emm_step, StepControls, StepDiag};
pub use surface::{constraint_value, project_to_surface, split_velocity, surface_normal};
pub use wrench::{slosh_wrench, wrench_and_solve, SloshWrench};

use crate::error::{Error, Result};
use crate::frames::{dcm, Mat3, Quat, Vec3};

/// Spherical tank fixed in the body: radius, mounting point, fill level, and
/// the (constant) orientation of the tank axes relative to the body axes.
#[derive(Debug, Clone, PartialEq)]
pub struct TankGeometry {
    /// Tank radius R_t [m].
    pub radius: f64,
    /// Tank centre relative to the body origin, body axes [m].
    pub center_b: Vec3,
    /// Liquid fill fraction of the tank volume, in [0, 1). Zero means a dry
    /// tank: the slosh model becomes inert and produces no wrench.
    pub fill_ratio: f64,
    /// Body -> tank rotation (identity when tank axes coincide with body axes).
    pub dcm_tank_body: Mat3,
}

impl TankGeometry {
    pub fn new(radius: f64, center_b: Vec3, fill_ratio: f64) -> Result<Self> {
        let tank = TankGeometry {
            radius,
            center_b,
            fill_ratio,
            dcm_tank_body: Mat3::identity(),
        };
        tank.validate()?;
        Ok(tank)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::validation("tank radius must be positive"));
        }
        if !(0.0..1.0).contains(&self.fill_ratio) {
            return Err(Error::validation(
                "fill_ratio must lie in [0, 1); a full tank cannot slosh",
            ));
        }
        let o = self.dcm_tank_body;
        let defect = (o * o.transpose() - Mat3::identity()).norm();
        if defect > 1e-9 || (o.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::validation("tank orientation must be a rotation matrix"));
        }
        Ok(())
    }

    /// Liquid mass for a given propellant density [kg].
    pub fn liquid_mass(&self, density: f64) -> f64 {
        density * self.fill_ratio * (4.0 / 3.0) * std::f64::consts::PI * self.radius.powi(3)
    }
}

/// Bulk propellant properties (SI).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidProperties {
    /// Density ρ [kg/m³].
    pub density: f64,
    /// Dynamic viscosity μ [Pa·s].
    pub viscosity: f64,
    /// Surface tension σ [N/m].
    pub surface_tension: f64,
}

impl FluidProperties {
    pub fn new(density: f64, viscosity: f64, surface_tension: f64) -> Result<Self> {
        let f = FluidProperties {
            density,
            viscosity,
            surface_tension,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.density, "density"),
            (self.viscosity, "viscosity"),
            (self.surface_tension, "surface_tension"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("fluid {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Constraint-surface shape: ellipsoid of revolution with semi-axis `a` along
/// tank x and `b` along tank y/z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceParams {
    a: f64,
    b: f64,
    w: Mat3,
}

impl SurfaceParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::validation("surface semi-axes must be positive"));
        }
        Ok(SurfaceParams {
            a,
            b,
            w: Mat3::from_diagonal(&Vec3::new(1.0 / (a * a), 1.0 / (b * b), 1.0 / (b * b))),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Shape matrix W = diag(1/a², 1/b², 1/b²).
    pub fn w(&self) -> &Mat3 {
        &self.w
    }
}

/// Mass partition and contact coefficients of the slosh model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SloshParams {
    /// Fraction of the liquid lumped at the tank centre, in [0, 1].
    pub stationary_fraction: f64,
    /// Wall-drag coefficient C_f (tuned, absorbs the model's unit bookkeeping).
    pub friction_coeff: f64,
    /// Contact tension the surface can sustain before release [N].
    pub adhesion_threshold: f64,
    /// Total liquid mass [kg]; zero means a dry tank.
    pub m_total: f64,
}

impl SloshParams {
    pub fn new(
        stationary_fraction: f64,
        friction_coeff: f64,
        adhesion_threshold: f64,
        m_total: f64,
    ) -> Result<Self> {
        let p = SloshParams {
            stationary_fraction,
            friction_coeff,
            adhesion_threshold,
            m_total,
        };
        p.validate()?;
        Ok(p)
    }

    /// Derive the total mass from tank fill and propellant density.
    pub fn for_tank(
        stationary_fraction: f64,
        friction_coeff: f64,
        adhesion_threshold: f64,
        tank: &TankGeometry,
        fluid: &FluidProperties,
    ) -> Result<Self> {
        Self::new(
            stationary_fraction,
            friction_coeff,
            adhesion_threshold,
            tank.liquid_mass(fluid.density),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.stationary_fraction) {
            return Err(Error::validation("stationary_fraction must lie in [0, 1]"));
        }
        if !(self.friction_coeff >= 0.0 && self.friction_coeff.is_finite()) {
            return Err(Error::validation("friction_coeff must be non-negative"));
        }
        if !(self.adhesion_threshold >= 0.0 && self.adhesion_threshold.is_finite()) {
            return Err(Error::validation("adhesion_threshold must be non-negative"));
        }
        if !(self.m_total >= 0.0 && self.m_total.is_finite()) {
            return Err(Error::validation("m_total must be non-negative"));
        }
        Ok(())
    }

    /// Moving particle mass m_p [kg].
    pub fn m_particle(&self) -> f64 {
        (1.0 - self.stationary_fraction) * self.m_total
    }

    /// Stationary mass m0 at the tank centre [kg].
    pub fn m_stationary(&self) -> f64 {
        self.stationary_fraction * self.m_total
    }
}

/// Contact state of the particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SloshMode {
    /// Free flight inside the surface (C < 0).
    Unconstrained,
    /// Sliding on the surface (C = 0).
    Constrained,
}

/// Particle state: position relative to the tank centre in tank axes,
/// velocity in inertial axes, and the contact mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SloshState {
    /// Particle position r [m], tank frame, relative to the tank centre.
    pub pos_t: Vec3,
    /// Particle velocity [m/s], inertial frame.
    pub vel_i: Vec3,
    pub mode: SloshMode,
}

impl SloshState {
    /// Particle resting at the tank centre.
    pub fn at_rest() -> Self {
        SloshState {
            pos_t: Vec3::zeros(),
            vel_i: Vec3::zeros(),
            mode: SloshMode::Unconstrained,
        }
    }
}

/// Snapshot of the carrying body's motion, the only coupling input the slosh
/// model sees. The provisional angular acceleration comes from the prediction
/// stage of the coupled loop (or from a prescribed profile in open loop).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyMotionInput {
    /// Body attitude (body -> inertial).
    pub att: Quat,
    /// Body angular rate [rad/s], body axes.
    pub omega_b: Vec3,
    /// Body angular acceleration [rad/s²], body axes.
    pub omega_dot_b: Vec3,
    /// Body-origin velocity [m/s], inertial axes.
    pub vel_i: Vec3,
    /// Body-origin acceleration [m/s²], inertial axes.
    pub accel_i: Vec3,
    /// Gravity [m/s²], inertial axes.
    pub gravity_i: Vec3,
}

impl BodyMotionInput {
    /// A body at rest at the inertial origin with the given gravity.
    pub fn static_body(gravity_i: Vec3) -> Self {
        BodyMotionInput {
            att: Quat::identity(),
            omega_b: Vec3::zeros(),
            omega_dot_b: Vec3::zeros(),
            vel_i: Vec3::zeros(),
            accel_i: Vec3::zeros(),
            gravity_i,
        }
    }

    /// Reconstruct the body motion `tau` seconds later with the angular
    /// acceleration and translational acceleration held frozen. Exact for
    /// fixed-axis rotation (ω and ω̇ collinear), which covers the maneuvers
    /// the coupled loop feeds in; the error is O(‖ω×ω̇‖ τ³) otherwise.
    pub fn at_offset(&self, tau: f64) -> Self {
        let phi = self.omega_b * tau + self.omega_dot_b * (0.5 * tau * tau);
        BodyMotionInput {
            att: self.att * Quat::from_scaled_axis(phi),
            omega_b: self.omega_b + self.omega_dot_b * tau,
            omega_dot_b: self.omega_dot_b,
            vel_i: self.vel_i + self.accel_i * tau,
            accel_i: self.accel_i,
            gravity_i: self.gravity_i,
        }
    }
}

/// What happened inside a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SloshEventKind {
    /// Inelastic impact on the constraint surface; normal relative velocity
    /// is removed, the mode flips to constrained.
    Collision,
    /// Contact tension exceeded the adhesion threshold; the mode flips to
    /// unconstrained.
    Separation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SloshEvent {
    pub kind: SloshEventKind,
    /// Absolute simulation time of the localized event [s].
    pub time: f64,
}

/// The complete slosh model for one tank.
#[derive(Debug, Clone, PartialEq)]
pub struct SloshModel {
    pub tank: TankGeometry,
    pub fluid: FluidProperties,
    pub surface: SurfaceParams,
    pub params: SloshParams,
}

impl SloshModel {
    pub fn new(
        tank: TankGeometry,
        fluid: FluidProperties,
        surface: SurfaceParams,
        params: SloshParams,
    ) -> Result<Self> {
        tank.validate()?;
        fluid.validate()?;
        params.validate()?;
        if surface.a() > tank.radius || surface.b() > tank.radius {
            return Err(Error::validation(
                "surface semi-axes must not exceed the tank radius",
            ));
        }
        Ok(SloshModel {
            tank,
            fluid,
            surface,
            params,
        })
    }

    /// Dry tank: no liquid, no particle, no wrench.
    pub fn is_dry(&self) -> bool {
        self.params.m_total == 0.0 || self.params.m_particle() == 0.0
    }
}

/// Shared per-evaluation frame bundle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frames {
    /// Body -> inertial.
    pub c_ib: Mat3,
    /// Body -> tank (constant mounting rotation).
    pub c_tb: Mat3,
    /// Inertial -> tank.
    pub c_ti: Mat3,
    /// Tank -> inertial.
    pub c_it: Mat3,
    /// Body rate expressed in tank axes [rad/s].
    pub omega_t: Vec3,
}

impl Frames {
    pub fn new(tank: &TankGeometry, body: &BodyMotionInput) -> Self {
        let c_ib = dcm(&body.att);
        let c_tb = tank.dcm_tank_body;
        let c_ti = c_tb * c_ib.transpose();
        Frames {
            c_ib,
            c_tb,
            c_ti,
            c_it: c_ti.transpose(),
            omega_t: c_tb * body.omega_b,
        }
    }
}
