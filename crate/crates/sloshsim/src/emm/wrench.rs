//! Reaction force and torque the liquid exerts on the vehicle.
//!
//! Both lumped masses contribute the negative of their inertial reaction:
//! the particle with whatever acceleration the current contact mode gives
//! it, and the stationary mass rigidly carried at the tank center. Gravity
//! acting on the masses is not a load on the structure, so it is subtracted
//! before the sign flip.

use crate::error::Result;
use crate::frames::{skew, Vec3};

use super::dynamics::{constrained_accel, unconstrained_accel, ConstraintSolve};
use super::{BodyMotionInput, Frames, SloshMode, SloshModel, SloshState};

/// Liquid reaction on the vehicle, in body axes about the body origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SloshWrench {
    /// Net reaction force [N].
    pub force_b: Vec3,
    /// Net reaction torque about the body origin [N·m].
    pub torque_b: Vec3,
}

impl SloshWrench {
    pub fn zero() -> Self {
        SloshWrench {
            force_b: Vec3::zeros(),
            torque_b: Vec3::zeros(),
        }
    }
}

/// Evaluate the slosh wrench at a state, returning the constrained solve
/// when one was needed (for λ and residual reporting).
pub fn wrench_and_solve(
    model: &SloshModel,
    state: &SloshState,
    body: &BodyMotionInput,
) -> Result<(SloshWrench, Option<ConstraintSolve>)> {
    if model.is_dry() {
        return Ok((SloshWrench::zero(), None));
    }
    let frames = Frames::new(&model.tank, body);
    let m_p = model.params.m_particle();
    let m_0 = model.params.m_stationary();

    let (accel_p, solve) = match state.mode {
        SloshMode::Unconstrained => (unconstrained_accel(body), None),
        SloshMode::Constrained => {
            let s = constrained_accel(&state.pos_t, &state.vel_i, body, model)?;
            (s.accel_i, Some(s))
        }
    };
    let f_p_i = -m_p * (accel_p - body.gravity_i);

    // Stationary mass: rigidly attached at the tank center.
    let accel_c_i = body.accel_i
        + frames.c_ib
            * (body.omega_dot_b.cross(&model.tank.center_b)
                + body.omega_b.cross(&body.omega_b.cross(&model.tank.center_b)));
    let f_0_i = -m_0 * (accel_c_i - body.gravity_i);

    let f_p_b = frames.c_ib.transpose() * f_p_i;
    let f_0_b = frames.c_ib.transpose() * f_0_i;
    let p_particle_b = model.tank.center_b + frames.c_tb.transpose() * state.pos_t;

    Ok((
        SloshWrench {
            force_b: f_p_b + f_0_b,
            torque_b: skew(&p_particle_b) * f_p_b + skew(&model.tank.center_b) * f_0_b,
        },
        solve,
    ))
}

/// [`wrench_and_solve`] without the solve details.
pub fn slosh_wrench(
    model: &SloshModel,
    state: &SloshState,
    body: &BodyMotionInput,
) -> Result<SloshWrench> {
    Ok(wrench_and_solve(model, state, body)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emm::test_fixtures::{reference_model, reference_model_default};
    use crate::frames::Quat;
    use approx::assert_abs_diff_eq;

    #[test]
    fn static_hang_carries_full_weight() {
        // Particle resting at the bottom of the surface under gravity: the
        // structure must carry the weight of all the liquid.
        let model = reference_model_default();
        let g = Vec3::new(0.0, 0.0, -9.81);
        let body = BodyMotionInput::static_body(g);
        let state = SloshState {
            pos_t: Vec3::new(0.0, 0.0, -model.surface.b()),
            vel_i: Vec3::zeros(),
            mode: SloshMode::Constrained,
        };
        let (w, solve) = wrench_and_solve(&model, &state, &body).unwrap();
        let m_tot = model.params.m_total;
        assert_abs_diff_eq!(w.force_b, Vec3::new(0.0, 0.0, -9.81 * m_tot), epsilon = 1e-12);
        let solve = solve.unwrap();
        assert!(solve.residual < 1e-12);
        // Weight applied on the y-offset tank line twists about x.
        let torque_expected = model.tank.center_b.cross(&Vec3::new(0.0, 0.0, -9.81 * m_tot));
        assert_abs_diff_eq!(w.torque_b, torque_expected, epsilon = 1e-12);
    }

    #[test]
    fn steady_spin_reaction_is_centrifugal() {
        // Body spinning at constant ω about z, tank center on the y-arm,
        // particle at the outer apex co-rotating: the reaction on the
        // structure is the outward centrifugal pull of both masses.
        let model = reference_model_default();
        let omega = 1.5;
        let arm = model.tank.center_b.norm();
        let b_ax = model.surface.b();
        let r_t = Vec3::new(0.0, b_ax, 0.0);
        let p_b = model.tank.center_b + r_t;
        let body = BodyMotionInput {
            att: Quat::identity(),
            omega_b: Vec3::new(0.0, 0.0, omega),
            omega_dot_b: Vec3::zeros(),
            vel_i: Vec3::zeros(),
            accel_i: Vec3::zeros(),
            gravity_i: Vec3::zeros(),
        };
        let state = SloshState {
            pos_t: r_t,
            vel_i: body.omega_b.cross(&p_b),
            mode: SloshMode::Constrained,
        };
        let (w, solve) = wrench_and_solve(&model, &state, &body).unwrap();
        let m_p = model.params.m_particle();
        let m_0 = model.params.m_stationary();
        let expected = m_p * omega * omega * (arm + b_ax) + m_0 * omega * omega * arm;
        assert_abs_diff_eq!(w.force_b.y, expected, epsilon = expected * 1e-10);
        assert_abs_diff_eq!(w.force_b.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.force_b.z, 0.0, epsilon = 1e-12);
        // Pure radial pull through the spin axis: no spin torque.
        assert_abs_diff_eq!(w.torque_b.z, 0.0, epsilon = 1e-12);
        assert!(solve.unwrap().residual < 1e-9);
    }

    #[test]
    fn unconstrained_free_fall_loads_only_the_stationary_mass() {
        // In free flight under pure gravity the particle reaction vanishes
        // (a_p = g); a static body still feels the stationary mass weight.
        let model = reference_model(Vec3::new(0.1, 0.0, 0.0));
        let g = Vec3::new(0.0, 0.0, -9.81);
        let body = BodyMotionInput::static_body(g);
        let state = SloshState {
            pos_t: Vec3::new(0.01, 0.0, 0.0),
            vel_i: Vec3::zeros(),
            mode: SloshMode::Unconstrained,
        };
        let (w, solve) = wrench_and_solve(&model, &state, &body).unwrap();
        assert!(solve.is_none());
        let m_0 = model.params.m_stationary();
        assert_abs_diff_eq!(w.force_b, Vec3::new(0.0, 0.0, -9.81 * m_0), epsilon = 1e-12);
    }

    #[test]
    fn dry_model_produces_zero_wrench() {
        let mut model = reference_model_default();
        model.params.m_total = 0.0;
        let body = BodyMotionInput::static_body(Vec3::new(0.0, 0.0, -9.81));
        let (w, solve) = wrench_and_solve(&model, &SloshState::at_rest(), &body).unwrap();
        assert_eq!(w, SloshWrench::zero());
        assert!(solve.is_none());
    }

    #[test]
    fn attitude_rotation_maps_wrench_into_body_axes() {
        // Same static hang, body rolled 90° about x: gravity is body +y now,
        // and the wrench components must follow.
        let model = reference_model_default();
        let g = Vec3::new(0.0, 0.0, -9.81);
        let att = Quat::from_scaled_axis(Vec3::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        let body = BodyMotionInput {
            att,
            omega_b: Vec3::zeros(),
            omega_dot_b: Vec3::zeros(),
            vel_i: Vec3::zeros(),
            accel_i: Vec3::zeros(),
            gravity_i: g,
        };
        // Particle pinned at the tank-frame point that is "down" in inertial
        // axes: body -y maps to inertial -z under the roll.
        let state = SloshState {
            pos_t: Vec3::new(0.0, -model.surface.b(), 0.0),
            vel_i: Vec3::zeros(),
            mode: SloshMode::Constrained,
        };
        let (w, _) = wrench_and_solve(&model, &state, &body).unwrap();
        let m_tot = model.params.m_total;
        // Inertial -z force appears as body -y after the 90° roll.
        assert_abs_diff_eq!(w.force_b, Vec3::new(0.0, -9.81 * m_tot, 0.0), epsilon = 1e-12);
    }
}
