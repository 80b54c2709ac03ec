//! Spin maneuver profiles and the single-axis rate controller.
//!
//! A maneuver is a piecewise-linear rate profile about a fixed body axis.
//! Open-loop runs prescribe the attitude directly from the profile; closed
//! loop runs track a reference rate with a proportional controller sized
//! from a desired closed-loop damping ratio and natural frequency.

use crate::error::{Error, Result};
use crate::frames::Vec3;

/// Shape of the commanded rate profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManeuverKind {
    /// Ramp to the target rate over `t_acc`, hold indefinitely.
    SpinUp,
    /// Ramp up over `t_acc`, hold `t_hold`, ramp back to zero over `t_dec`.
    FlatSpin,
}

/// Rate profile ω(t) about `axis_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverProfile {
    pub kind: ManeuverKind,
    /// Plateau rate [rad/s].
    pub spin_rate: f64,
    /// Ramp-up duration [s].
    pub t_acc: f64,
    /// Plateau duration [s] (ignored for [`ManeuverKind::SpinUp`]).
    pub t_hold: f64,
    /// Ramp-down duration [s] (ignored for [`ManeuverKind::SpinUp`]).
    pub t_dec: f64,
    /// Spin axis, unit length in body axes.
    pub axis_b: Vec3,
}

impl ManeuverProfile {
    pub fn spin_up(spin_rate: f64, t_acc: f64) -> Result<Self> {
        Self::validate(spin_rate, t_acc, 0.0, 1.0)?;
        Ok(ManeuverProfile {
            kind: ManeuverKind::SpinUp,
            spin_rate,
            t_acc,
            t_hold: f64::INFINITY,
            t_dec: 0.0,
            axis_b: Vec3::z(),
        })
    }

    pub fn flat_spin(spin_rate: f64, t_acc: f64, t_hold: f64, t_dec: f64) -> Result<Self> {
        Self::validate(spin_rate, t_acc, t_hold, t_dec)?;
        Ok(ManeuverProfile {
            kind: ManeuverKind::FlatSpin,
            spin_rate,
            t_acc,
            t_hold,
            t_dec,
            axis_b: Vec3::z(),
        })
    }

    fn validate(spin_rate: f64, t_acc: f64, t_hold: f64, t_dec: f64) -> Result<()> {
        if !spin_rate.is_finite() {
            return Err(Error::validation("maneuver spin rate must be finite"));
        }
        // Ramp-up must have extent; hold and ramp-down may be zero.
        if !(t_acc > 0.0) || !(t_hold >= 0.0) || !(t_dec >= 0.0) {
            return Err(Error::validation(
                "maneuver phase durations must be positive (hold and ramp-down may be zero)",
            ));
        }
        Ok(())
    }

    /// Replace the spin axis (normalized; zero vectors are rejected).
    pub fn with_axis(mut self, axis_b: Vec3) -> Result<Self> {
        let n = axis_b.norm();
        if n < 1e-12 {
            return Err(Error::validation("maneuver axis must be non-zero"));
        }
        self.axis_b = axis_b / n;
        Ok(self)
    }

    /// Ramp-up angular acceleration [rad/s²].
    pub fn accel(&self) -> f64 {
        self.spin_rate / self.t_acc
    }

    /// Profile rate and acceleration at time `t` [rad/s, rad/s²].
    pub fn rate_and_accel(&self, t: f64) -> (f64, f64) {
        let a = self.accel();
        if t < 0.0 {
            return (0.0, 0.0);
        }
        if t < self.t_acc {
            return (a * t, a);
        }
        match self.kind {
            ManeuverKind::SpinUp => (self.spin_rate, 0.0),
            ManeuverKind::FlatSpin => {
                let t2 = self.t_acc + self.t_hold;
                if t < t2 {
                    (self.spin_rate, 0.0)
                } else if self.t_dec > 0.0 && t < t2 + self.t_dec {
                    let d = self.spin_rate / self.t_dec;
                    (self.spin_rate - d * (t - t2), -d)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// Integrated profile angle θ(t) = ∫ω dτ [rad], closed form per phase.
    pub fn angle(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let a = self.accel();
        if t < self.t_acc {
            return 0.5 * a * t * t;
        }
        let theta1 = 0.5 * self.spin_rate * self.t_acc;
        match self.kind {
            ManeuverKind::SpinUp => theta1 + self.spin_rate * (t - self.t_acc),
            ManeuverKind::FlatSpin => {
                let t2 = self.t_acc + self.t_hold;
                if t < t2 {
                    return theta1 + self.spin_rate * (t - self.t_acc);
                }
                let theta2 = theta1 + self.spin_rate * self.t_hold;
                if self.t_dec > 0.0 && t < t2 + self.t_dec {
                    let d = self.spin_rate / self.t_dec;
                    let s = t - t2;
                    theta2 + self.spin_rate * s - 0.5 * d * s * s
                } else {
                    theta2 + 0.5 * self.spin_rate * self.t_dec
                }
            }
        }
    }
}

/// Where the closed-loop rate reference comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Track the maneuver profile rate ω_prof(t).
    Profile,
    /// Step reference: hold the nominal rate from t = 0.
    Constant,
}

/// Closed-loop rate controller specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpec {
    /// Target closed-loop damping ratio ε [-].
    pub damping_ratio: f64,
    /// Target closed-loop natural frequency ω_n [rad/s].
    pub natural_frequency: f64,
    /// Spin-axis moment of inertia used to size the gain [kg·m²].
    pub spin_inertia: f64,
    /// Commanded plateau rate [rad/s].
    pub nominal_rate: f64,
    pub reference: ReferenceSource,
}

impl ControlSpec {
    pub fn new(
        damping_ratio: f64,
        natural_frequency: f64,
        spin_inertia: f64,
        nominal_rate: f64,
        reference: ReferenceSource,
    ) -> Result<Self> {
        if !(damping_ratio > 0.0 && natural_frequency > 0.0 && spin_inertia > 0.0) {
            return Err(Error::validation(
                "controller damping ratio, natural frequency, and inertia must be positive",
            ));
        }
        Ok(ControlSpec {
            damping_ratio,
            natural_frequency,
            spin_inertia,
            nominal_rate,
            reference,
        })
    }

    /// Proportional rate gain K = 2·ε·ω_n·J_z [N·m·s/rad].
    pub fn gain(&self) -> f64 {
        2.0 * self.damping_ratio * self.natural_frequency * self.spin_inertia
    }

    /// Reference rate at time `t` for this spec [rad/s].
    pub fn reference_rate(&self, t: f64, maneuver: &ManeuverProfile) -> f64 {
        match self.reference {
            ReferenceSource::Profile => maneuver.rate_and_accel(t).0,
            ReferenceSource::Constant => {
                if t >= 0.0 {
                    self.nominal_rate
                } else {
                    0.0
                }
            }
        }
    }
}

/// Control torque magnitude u = K·(ω_ref − ω_meas) [N·m].
pub fn rate_controller(measured: f64, reference: f64, gain: f64) -> f64 {
    gain * (reference - measured)
}
