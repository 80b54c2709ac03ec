//! Constraint Jacobian rows and their analytic time derivatives.
//!
//! The constraint C(r) = rᵀWr - 1 is differentiated through the moving-frame
//! kinematics of the tank. With u = 2Wr (tank frame) and the stacked body /
//! particle velocities ν = [v_b_i; ω_b; v_p_i]:
//!
//! ```text
//! Ċ = Λ·ν,   Λ = uᵀ [ -C_ti | skew(r)·C_tb + C_tb·skew(r_cb) | C_ti ]
//! ```
//!
//! The enforcement level is C̈ = Λ_p·v̇_p + β = 0 with β collecting every other
//! term, which needs Λ̇. Because the tank is rigidly mounted (C_tb, r_cb
//! constant) the only time-varying pieces are u(r), skew(r), and C_ti, giving
//! the closed forms implemented in [`jacobian_rate`]:
//!
//! ```text
//! u̇ = 2Wṙ,  d/dt(C_ti) = -skew(ω_t)·C_ti,  d/dt(skew(r)·C_tb) = skew(ṙ)·C_tb
//! ```
//!
//! with ω_t the body rate in tank axes and ṙ the tank-frame relative velocity.
//! Note Λ̇ does not depend on ω̇ or v̇_b; those enter C̈ only through Λ·ν̇.

use crate::frames::{skew, Mat3, Quat, Vec3};

use super::{BodyMotionInput, Frames, SurfaceParams, TankGeometry};

/// One row of the constraint Jacobian, stored as the three column blocks so
/// `Ċ = lin·v_b_i + ang·ω_b + particle·v_p_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintJacobian {
    /// Block multiplying the body-origin velocity (inertial axes).
    pub lin: Vec3,
    /// Block multiplying the body angular rate (body axes).
    pub ang: Vec3,
    /// Block multiplying the particle velocity (inertial axes). This is Λ_p;
    /// the contact force on the particle is f_c = Λ_pᵀ·λ.
    pub particle: Vec3,
}

impl ConstraintJacobian {
    /// Contract the row with stacked velocities (or accelerations).
    pub fn contract(&self, v_b_i: &Vec3, omega_b: &Vec3, v_p_i: &Vec3) -> f64 {
        self.lin.dot(v_b_i) + self.ang.dot(omega_b) + self.particle.dot(v_p_i)
    }
}

fn rotation_blocks(r_t: &Vec3, frames: &Frames, tank: &TankGeometry) -> (Mat3, Mat3) {
    let b = skew(r_t) * frames.c_tb + frames.c_tb * skew(&tank.center_b);
    (b, frames.c_ti)
}

pub(crate) fn jacobian_with_frames(
    r_t: &Vec3,
    frames: &Frames,
    tank: &TankGeometry,
    surface: &SurfaceParams,
) -> ConstraintJacobian {
    let u = 2.0 * (surface.w() * r_t);
    let (b, c_ti) = rotation_blocks(r_t, frames, tank);
    let particle = c_ti.tr_mul(&u);
    ConstraintJacobian {
        lin: -particle,
        ang: b.tr_mul(&u),
        particle,
    }
}

/// Constraint Jacobian at a particle position and body attitude.
pub fn jacobian(
    r_t: &Vec3,
    att: &Quat,
    tank: &TankGeometry,
    surface: &SurfaceParams,
) -> ConstraintJacobian {
    let body = BodyMotionInput {
        att: *att,
        ..BodyMotionInput::static_body(Vec3::zeros())
    };
    jacobian_with_frames(r_t, &Frames::new(tank, &body), tank, surface)
}

pub(crate) fn jacobian_rate_with_frames(
    r_t: &Vec3,
    r_dot_t: &Vec3,
    frames: &Frames,
    tank: &TankGeometry,
    surface: &SurfaceParams,
) -> ConstraintJacobian {
    let u = 2.0 * (surface.w() * r_t);
    let u_dot = 2.0 * (surface.w() * r_dot_t);
    let (b, c_ti) = rotation_blocks(r_t, frames, tank);
    let b_dot = skew(r_dot_t) * frames.c_tb;
    // d/dt(C_tiᵀ u) = C_tiᵀ(skew(ω_t)·u + u̇), using Ċ_ti = -skew(ω_t)·C_ti.
    let particle = c_ti.tr_mul(&(skew(&frames.omega_t) * u + u_dot));
    ConstraintJacobian {
        lin: -particle,
        ang: b_dot.tr_mul(&u) + b.tr_mul(&u_dot),
        particle,
    }
}

/// Analytic time derivative of [`jacobian`] along a trajectory with
/// tank-frame relative velocity `r_dot_t` and body rate `omega_b`.
pub fn jacobian_rate(
    r_t: &Vec3,
    r_dot_t: &Vec3,
    att: &Quat,
    omega_b: &Vec3,
    tank: &TankGeometry,
    surface: &SurfaceParams,
) -> ConstraintJacobian {
    let body = BodyMotionInput {
        att: *att,
        omega_b: *omega_b,
        ..BodyMotionInput::static_body(Vec3::zeros())
    };
    jacobian_rate_with_frames(r_t, r_dot_t, &Frames::new(tank, &body), tank, surface)
}

/// Inertial velocity of the wall material point currently at the particle's
/// position: `v_b + C_ib·(ω_b × p_b)` with `p_b = r_cb + C_tbᵀ·r` the
/// particle offset from the body origin in body axes.
pub fn wall_velocity_i(r_t: &Vec3, tank: &TankGeometry, body: &BodyMotionInput) -> Vec3 {
    let frames = Frames::new(tank, body);
    wall_velocity_i_with_frames(r_t, &frames, tank, body)
}

pub(crate) fn wall_velocity_i_with_frames(
    r_t: &Vec3,
    frames: &Frames,
    tank: &TankGeometry,
    body: &BodyMotionInput,
) -> Vec3 {
    let offset_b = tank.center_b + frames.c_tb.tr_mul(r_t);
    body.vel_i + frames.c_ib * body.omega_b.cross(&offset_b)
}

/// Tank-frame velocity of the particle relative to the tank, ṙ. Identical to
/// C_ti·(v_p - v_wall); this is both the kinematic rate of `pos_t` and the
/// velocity the wall-drag law acts on.
pub fn relative_velocity_t(
    r_t: &Vec3,
    v_p_i: &Vec3,
    tank: &TankGeometry,
    body: &BodyMotionInput,
) -> Vec3 {
    let frames = Frames::new(tank, body);
    relative_velocity_t_with_frames(r_t, v_p_i, &frames, tank, body)
}

pub(crate) fn relative_velocity_t_with_frames(
    r_t: &Vec3,
    v_p_i: &Vec3,
    frames: &Frames,
    tank: &TankGeometry,
    body: &BodyMotionInput,
) -> Vec3 {
    frames.c_ti * (v_p_i - wall_velocity_i_with_frames(r_t, frames, tank, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emm::test_fixtures::reference_model_default;
    use crate::emm::{constraint_value, BodyMotionInput};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobian_blocks_at_identity_attitude() {
        // Particle on the +x apex, tank mounted 0.2667 m along body y:
        // Λ_p = (2/a, 0, 0) and the rotational block reduces to
        // u × (r + r_cb) = (0, 0, 2·0.2667/0.0405).
        let m = reference_model_default();
        let r = Vec3::new(0.0405, 0.0, 0.0);
        let jac = jacobian(&r, &Quat::identity(), &m.tank, &m.surface);
        assert_relative_eq!(jac.particle.x, 2.0 / 0.0405, max_relative = 1e-13);
        assert_abs_diff_eq!(jac.particle.y, 0.0);
        assert_abs_diff_eq!(jac.particle.z, 0.0);
        assert_abs_diff_eq!(jac.lin, -jac.particle);
        assert_abs_diff_eq!(
            jac.ang,
            Vec3::new(0.0, 0.0, 2.0 * 0.2667 / 0.0405),
            epsilon = 1e-12
        );
        assert_relative_eq!(jac.ang.z, 13.1703703703704, max_relative = 1e-12);
    }

    #[test]
    fn lin_block_is_always_minus_particle_block() {
        let m = reference_model_default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r = Vec3::from_fn(|_, _| rng.random_range(-0.03..0.03));
            let att = Quat::from_scaled_axis(Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0)));
            let jac = jacobian(&r, &att, &m.tank, &m.surface);
            assert_abs_diff_eq!(jac.lin, -jac.particle, epsilon = 0.0);
        }
    }

    #[test]
    fn contract_reproduces_constraint_rate() {
        // Ċ from the Jacobian must match d/dt C(r(t)) computed from the
        // kinematic relative velocity: Ċ = 2rᵀWṙ.
        let m = reference_model_default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let r = Vec3::from_fn(|_, _| rng.random_range(-0.03..0.03));
            let body = BodyMotionInput {
                att: Quat::from_scaled_axis(Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0))),
                omega_b: Vec3::from_fn(|_, _| rng.random_range(-3.0..3.0)),
                omega_dot_b: Vec3::zeros(),
                vel_i: Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)),
                accel_i: Vec3::zeros(),
                gravity_i: Vec3::zeros(),
            };
            let v_p = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let jac = jacobian(&r, &body.att, &m.tank, &m.surface);
            let c_dot_jac = jac.contract(&body.vel_i, &body.omega_b, &v_p);
            let r_dot = relative_velocity_t(&r, &v_p, &m.tank, &body);
            let c_dot_kin = 2.0 * (m.surface.w() * r).dot(&r_dot);
            assert_relative_eq!(c_dot_jac, c_dot_kin, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn corotating_particle_has_zero_relative_velocity() {
        // Pure spin about z, particle glued to the tank wall: its inertial
        // velocity is ω × (inertial offset), so ṙ must vanish.
        let m = reference_model_default();
        let omega = Vec3::new(0.0, 0.0, 1.3);
        let body = BodyMotionInput {
            omega_b: omega,
            ..BodyMotionInput::static_body(Vec3::zeros())
        };
        let r = Vec3::new(0.0405, 0.0, 0.0);
        let pos_i = m.tank.center_b + r; // identity attitude, aligned tank
        let v_p = omega.cross(&pos_i);
        let r_dot = relative_velocity_t(&r, &v_p, &m.tank, &body);
        assert_abs_diff_eq!(r_dot, Vec3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn jacobian_rate_matches_central_differences() {
        // Λ̇ against central differences of Λ along trajectories with linear
        // position drift and fixed-axis attitude motion (dt = 1e-6).
        let m = reference_model_default();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let dt = 1e-6;
        for _ in 0..100 {
            // Random surface point: map a random unit vector through the
            // semi-axes, which lands exactly on C = 0.
            let n = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
            let r = Vec3::new(m.surface.a() * n.x, m.surface.b() * n.y, m.surface.b() * n.z);
            assert_abs_diff_eq!(constraint_value(&r, &m.surface), 0.0, epsilon = 1e-12);
            let att = Quat::from_scaled_axis(Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0)));
            let omega_b = Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let r_dot = Vec3::from_fn(|_, _| rng.random_range(-0.5..0.5));

            let analytic = jacobian_rate(&r, &r_dot, &att, &omega_b, &m.tank, &m.surface);
            let probe = |tau: f64| {
                let r_tau = r + r_dot * tau;
                let att_tau = att * Quat::from_scaled_axis(omega_b * tau);
                jacobian(&r_tau, &att_tau, &m.tank, &m.surface)
            };
            let (plus, minus) = (probe(dt), probe(-dt));
            let fd_lin = (plus.lin - minus.lin) / (2.0 * dt);
            let fd_ang = (plus.ang - minus.ang) / (2.0 * dt);
            let fd_par = (plus.particle - minus.particle) / (2.0 * dt);

            let num = ((analytic.lin - fd_lin).norm_squared()
                + (analytic.ang - fd_ang).norm_squared()
                + (analytic.particle - fd_par).norm_squared())
            .sqrt();
            let den = (analytic.lin.norm_squared()
                + analytic.ang.norm_squared()
                + analytic.particle.norm_squared())
            .sqrt();
            assert!(
                num / den < 1e-6,
                "jacobian rate mismatch: rel err {:.3e}",
                num / den
            );
        }
    }

    #[test]
    fn wall_velocity_of_static_body_is_zero() {
        let m = reference_model_default();
        let body = BodyMotionInput::static_body(Vec3::zeros());
        let v = wall_velocity_i(&Vec3::new(0.01, 0.0, 0.0), &m.tank, &body);
        assert_abs_diff_eq!(v, Vec3::zeros());
    }
}
