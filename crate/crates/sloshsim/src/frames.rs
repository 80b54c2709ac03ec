//! Minimal 3-D math kernel on top of nalgebra: the vector/matrix aliases and
//! the quaternion/DCM helpers the simulator needs, nothing more.
//!
//! Conventions used throughout the crate:
//!
//! * Quaternions are unit, **scalar-first** (w, x, y, z), and encode the
//!   body-to-inertial rotation: `v_i = dcm_from_quat(q) * v_b`.
//! * Angular velocity is expressed in body axes unless a suffix says
//!   otherwise (`_i` inertial, `_b` body, `_t` tank).
//! * `quat_step` advances attitude with the body rate held constant over the
//!   step, which is exact for fixed-axis motion and preserves unit norm by
//!   construction.

use nalgebra as na;

pub type Vec3 = na::Vector3<f64>;
pub type Mat3 = na::Matrix3<f64>;
/// Unit quaternion (guaranteed normalized).
pub type Quat = na::UnitQuaternion<f64>;
/// Raw quaternion, used where unnormalized input must be tolerated.
pub type RawQuat = na::Quaternion<f64>;

/// Norm drift beyond this gets renormalized with a logged warning.
/// Integration drift in this crate stays many orders below it; hitting the
/// warning means the caller fed hand-built or file-sourced attitude data.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// Direction cosine matrix (body -> inertial) of a possibly drifted
/// quaternion. Inputs off unit norm beyond [`UNIT_NORM_TOL`] are renormalized
/// and logged; exactly zero quaternions cannot be fixed and panic in debug
/// via nalgebra, so callers validate attitude sources first.
pub fn dcm_from_quat(q: &RawQuat) -> Mat3 {
    let n = q.norm();
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        log::warn!("quaternion norm drifted to {n:.3e}; renormalizing");
    }
    Quat::from_quaternion(*q).to_rotation_matrix().into_inner()
}

/// DCM of an already-unit quaternion (body -> inertial).
pub fn dcm(q: &Quat) -> Mat3 {
    q.to_rotation_matrix().into_inner()
}

/// Advance attitude by one step of constant body rate `omega_b` [rad/s]:
/// `q_next = q ∘ exp(omega_b * dt / 2)`. Exact for fixed-axis rotation.
pub fn quat_step(q: &Quat, omega_b: &Vec3, dt: f64) -> Quat {
    q * Quat::from_scaled_axis(omega_b * dt)
}

/// Time derivative of the raw quaternion components under body rate
/// `omega_b`: `q̇ = ½ q ⊗ (0, omega_b)`. Used by the joint (q, ω) integrator.
pub fn quat_derivative(q: &RawQuat, omega_b: &Vec3) -> RawQuat {
    let omega = RawQuat::from_parts(0.0, *omega_b);
    (q * omega) * 0.5
}
