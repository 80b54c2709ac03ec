//! Particle dynamics in both contact modes: wall drag, the Lagrange-multiplier
//! solve for constrained sliding, impact, and the separation test.

use crate::error::{Error, Result};
use crate::frames::Vec3;

use super::jacobian::{
    jacobian_rate_with_frames, jacobian_with_frames, relative_velocity_t_with_frames,
};
use super::surface::{split_velocity, surface_normal};
use super::{BodyMotionInput, ConstraintJacobian, Frames, SloshModel};

/// Result of one constrained-dynamics solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSolve {
    /// Particle acceleration [m/s²], inertial axes.
    pub accel_i: Vec3,
    /// Lagrange multiplier; the contact force is `Λ_pᵀ·λ`.
    pub lambda: f64,
    /// Contact force on the particle [N], inertial axes.
    pub force_c_i: Vec3,
    /// The β term of the acceleration-level constraint C̈ = Λ_p·v̇_p + β.
    pub beta: f64,
    /// |Λ_p·v̇_p + β| of the returned acceleration; rounding-level when the
    /// solve is healthy.
    pub residual: f64,
}

/// Free-flight acceleration: only gravity acts on the detached particle.
pub fn unconstrained_accel(body: &BodyMotionInput) -> Vec3 {
    body.gravity_i
}

/// Viscosity-scaled wall drag on the sliding particle, tank frame:
///
/// ```text
/// f = -C_f · μ · m_p / max((R_t - ‖r‖)², (0.01·R_t)²) · v_par
/// ```
///
/// The gap term models the thinning liquid film toward the wall; the clamp
/// removes the singularity at ‖r‖ = R_t (reachable when a semi-axis equals
/// the tank radius).
pub fn friction_force(v_par_t: &Vec3, r_t: &Vec3, model: &SloshModel) -> Vec3 {
    let r_tank = model.tank.radius;
    let gap = r_tank - r_t.norm();
    let denom = (gap * gap).max((0.01 * r_tank) * (0.01 * r_tank));
    let scale = model.params.friction_coeff * model.fluid.viscosity * model.params.m_particle()
        / denom;
    -scale * v_par_t
}

/// β collects every term of C̈ except Λ_p·v̇_p:
/// `β = Λ_k·ν̇_k + Λ̇_k·ν_k + Λ̇_p·v_p` with ν_k = [v_b_i; ω_b].
pub fn beta(
    jac: &ConstraintJacobian,
    jac_rate: &ConstraintJacobian,
    body: &BodyMotionInput,
    v_p_i: &Vec3,
) -> f64 {
    jac.lin.dot(&body.accel_i)
        + jac.ang.dot(&body.omega_dot_b)
        + jac_rate.contract(&body.vel_i, &body.omega_b, v_p_i)
}

/// Solve the constrained dynamics at one state: wall drag plus gravity plus
/// the unique multiplier that keeps C̈ = 0.
///
/// Fails if the particle mass is zero (dry tank; callers gate on
/// [`SloshModel::is_dry`]) or the constraint normal degenerates.
pub fn constrained_accel(
    r_t: &Vec3,
    v_p_i: &Vec3,
    body: &BodyMotionInput,
    model: &SloshModel,
) -> Result<ConstraintSolve> {
    let m_p = model.params.m_particle();
    if m_p <= 0.0 {
        return Err(Error::validation(
            "constrained dynamics undefined for zero particle mass",
        ));
    }
    let frames = Frames::new(&model.tank, body);

    let r_dot_t = relative_velocity_t_with_frames(r_t, v_p_i, &frames, &model.tank, body);
    let e_n_t = surface_normal(r_t, &model.surface)?;
    let (_, v_par_t) = split_velocity(&r_dot_t, &e_n_t);
    let f_friction_i = frames.c_it * friction_force(&v_par_t, r_t, model);
    let f_applied_i = f_friction_i + m_p * body.gravity_i;

    let jac = jacobian_with_frames(r_t, &frames, &model.tank, &model.surface);
    let jac_rate =
        jacobian_rate_with_frames(r_t, &r_dot_t, &frames, &model.tank, &model.surface);
    let b = beta(&jac, &jac_rate, body, v_p_i);

    // 1x1 Schur complement: λ = -(Λ_p·M⁻¹·f + β) / (Λ_p·M⁻¹·Λ_pᵀ), M = m_p·I.
    let denom = jac.particle.norm_squared() / m_p;
    if denom < 1e-12 {
        return Err(Error::numerical(
            "constraint normal degenerate; cannot solve for the contact force",
        ));
    }
    let lambda = -(jac.particle.dot(&f_applied_i) / m_p + b) / denom;
    let force_c_i = jac.particle * lambda;
    let accel_i = (f_applied_i + force_c_i) / m_p;
    let residual = (jac.particle.dot(&accel_i) + b).abs();

    Ok(ConstraintSolve {
        accel_i,
        lambda,
        force_c_i,
        beta: b,
        residual,
    })
}

/// Fully inelastic impact: remove the normal component of the particle
/// velocity relative to the wall. `e_n_i` is the unit surface normal in
/// inertial axes (either orientation; the formula is sign-invariant).
pub fn impact(v_p_i: &Vec3, v_wall_i: &Vec3, e_n_i: &Vec3) -> Vec3 {
    v_p_i - e_n_i * e_n_i.dot(&(v_p_i - v_wall_i))
}

/// Separation test: contact breaks when the tension pulled through the
/// surface exceeds the adhesion threshold, `-e_nᵀ·f_c > f_adh`, with `e_n_i`
/// the *interior-facing* (toward the tank centre) unit normal in inertial
/// axes. Compressive contact gives -e_nᵀ·f_c < 0 and never separates.
pub fn separation_check(force_c_i: &Vec3, e_n_i: &Vec3, adhesion_threshold: f64) -> bool {
    -e_n_i.dot(force_c_i) > adhesion_threshold
}
