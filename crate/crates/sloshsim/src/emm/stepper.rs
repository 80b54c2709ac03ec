//! Hybrid time stepping of the slosh particle: fixed-step RK4 inside each
//! contact mode, bisection localization of the mode transitions, and the
//! constraint-drift cleanup that keeps long constrained arcs on the surface.
//!
//! A step never changes mode silently: every transition is localized to
//! |event function| ≤ `event_tol` (the event function is C for collisions and
//! contact tension minus adhesion for separations) and reported with its
//! absolute time.

use crate::error::{Error, Result};
use crate::frames::Vec3;

use super::dynamics::{constrained_accel, impact, unconstrained_accel, ConstraintSolve};
use super::jacobian::{relative_velocity_t_with_frames, wall_velocity_i_with_frames};
use super::surface::{constraint_value, project_to_surface, surface_normal};
use super::{
    BodyMotionInput, Frames, SloshEvent, SloshEventKind, SloshMode, SloshModel, SloshState,
};

/// Event-handling knobs of the hybrid stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControls {
    /// Localization tolerance on the event function (|C| for impacts [-],
    /// tension margin for separations [N]).
    pub event_tol: f64,
    /// Bisection iteration cap per event.
    pub max_bisect: u32,
    /// Mode transitions allowed within one substep before the step is
    /// declared a cascade and fails.
    pub max_events: u32,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls {
            event_tol: 1e-10,
            max_bisect: 60,
            max_events: 8,
        }
    }
}

/// Constraint-quality bookkeeping accumulated over accepted states.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiag {
    /// Largest |C| seen at any accepted constrained state.
    pub max_constraint: f64,
    /// Largest |Λ_p·v̇_p + β| of any accepted constrained solve.
    pub max_residual: f64,
}

impl StepDiag {
    pub fn merge(&mut self, other: &StepDiag) {
        self.max_constraint = self.max_constraint.max(other.max_constraint);
        self.max_residual = self.max_residual.max(other.max_residual);
    }

    fn note_constraint(&mut self, c: f64) {
        self.max_constraint = self.max_constraint.max(c.abs());
    }

    fn note_solve(&mut self, s: &ConstraintSolve) {
        self.max_residual = self.max_residual.max(s.residual);
    }
}

/// One classical RK4 step of the particle state under `deriv(τ, r, v)`.
fn rk4<F>(r: &Vec3, v: &Vec3, h: f64, mut deriv: F) -> Result<(Vec3, Vec3)>
where
    F: FnMut(f64, &Vec3, &Vec3) -> Result<(Vec3, Vec3)>,
{
    let half = 0.5 * h;
    let (k1r, k1v) = deriv(0.0, r, v)?;
    let (k2r, k2v) = deriv(half, &(r + k1r * half), &(v + k1v * half))?;
    let (k3r, k3v) = deriv(half, &(r + k2r * half), &(v + k2v * half))?;
    let (k4r, k4v) = deriv(h, &(r + k3r * h), &(v + k3v * h))?;
    let sixth = h / 6.0;
    Ok((
        r + (k1r + 2.0 * (k2r + k3r) + k4r) * sixth,
        v + (k1v + 2.0 * (k2v + k3v) + k4v) * sixth,
    ))
}

fn integrate_free(
    model: &SloshModel,
    r: &Vec3,
    v: &Vec3,
    body: &BodyMotionInput,
    t_off: f64,
    tau: f64,
) -> Result<(Vec3, Vec3)> {
    rk4(r, v, tau, |s, rr, vv| {
        let b = body.at_offset(t_off + s);
        let frames = Frames::new(&model.tank, &b);
        let r_dot = relative_velocity_t_with_frames(rr, vv, &frames, &model.tank, &b);
        Ok((r_dot, unconstrained_accel(&b)))
    })
}

fn integrate_constrained(
    model: &SloshModel,
    r: &Vec3,
    v: &Vec3,
    body: &BodyMotionInput,
    t_off: f64,
    tau: f64,
) -> Result<(Vec3, Vec3)> {
    rk4(r, v, tau, |s, rr, vv| {
        let b = body.at_offset(t_off + s);
        let frames = Frames::new(&model.tank, &b);
        let r_dot = relative_velocity_t_with_frames(rr, vv, &frames, &model.tank, &b);
        let solve = constrained_accel(rr, vv, &b, model)?;
        Ok((r_dot, solve.accel_i))
    })
}

/// Contact tension at a constrained state: the outward pull transmitted
/// through the surface, `e_outᵀ·f_c = 2λ‖W·r‖` (negative in compression).
fn contact_tension(
    model: &SloshModel,
    r_t: &Vec3,
    frames: &Frames,
    solve: &ConstraintSolve,
) -> Result<f64> {
    let e_out_i = frames.c_it * surface_normal(r_t, &model.surface)?;
    Ok(e_out_i.dot(&solve.force_c_i))
}

/// Remove the residual wall-normal relative velocity left by RK4 drift.
fn clean_normal_velocity(
    model: &SloshModel,
    r_t: &Vec3,
    v_i: &Vec3,
    body: &BodyMotionInput,
) -> Result<Vec3> {
    let frames = Frames::new(&model.tank, body);
    let e_n_i = frames.c_it * surface_normal(r_t, &model.surface)?;
    let v_wall = wall_velocity_i_with_frames(r_t, &frames, &model.tank, body);
    Ok(impact(v_i, &v_wall, &e_n_i))
}

/// Advance the slosh state by one substep of length `dt`, starting at
/// absolute time `t0`, with `body` the carrier motion at the substep start
/// (reconstructed inside via [`BodyMotionInput::at_offset`]).
///
/// Returns the end state, the localized events in time order, and the
/// constraint diagnostics. Dry tanks return the state unchanged.
pub fn emm_step(
    model: &SloshModel,
    state: &SloshState,
    body: &BodyMotionInput,
    t0: f64,
    dt: f64,
    ctl: &StepControls,
) -> Result<(SloshState, Vec<SloshEvent>, StepDiag)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("substep length must be positive"));
    }
    let mut events = Vec::new();
    let mut diag = StepDiag::default();
    if model.is_dry() {
        return Ok((*state, events, diag));
    }

    let mut r = state.pos_t;
    let mut v = state.vel_i;
    let mut mode = state.mode;
    let mut t_off = 0.0_f64;
    let mut events_left = ctl.max_events;
    // Remainders shorter than this are integration dust, not a segment.
    let t_eps = dt * 1e-14;

    while dt - t_off > t_eps {
        let h = dt - t_off;
        if !(r.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite())) {
            return Err(Error::numerical("slosh state became non-finite"));
        }
        match mode {
            SloshMode::Unconstrained => {
                let c0 = constraint_value(&r, &model.surface);
                // A start marginally outside the surface while still closing
                // on the wall is an immediate impact (grazing leftovers from
                // a previous step); opening gaps just integrate back inside.
                if c0 > 0.0 {
                    let b = body.at_offset(t_off);
                    let frames = Frames::new(&model.tank, &b);
                    let r_dot = relative_velocity_t_with_frames(&r, &v, &frames, &model.tank, &b);
                    let c_dot = 2.0 * (model.surface.w() * r).dot(&r_dot);
                    if c_dot > 0.0 {
                        take_event(&mut events_left)?;
                        v = apply_impact(model, &r, &v, &b)?;
                        mode = SloshMode::Constrained;
                        events.push(SloshEvent {
                            kind: SloshEventKind::Collision,
                            time: t0 + t_off,
                        });
                        continue;
                    }
                }
                let (r1, v1) = integrate_free(model, &r, &v, body, t_off, h)?;
                let c1 = constraint_value(&r1, &model.surface);
                if c1 > ctl.event_tol {
                    // Bracketed upward crossing of C = 0 inside (0, h].
                    let (tau, rs, vs) = bisect(ctl, h, (r1, v1), c1, |tau| {
                        let (rm, vm) = integrate_free(model, &r, &v, body, t_off, tau)?;
                        Ok((constraint_value(&rm, &model.surface), (rm, vm)))
                    })?;
                    take_event(&mut events_left)?;
                    let b = body.at_offset(t_off + tau);
                    r = rs;
                    v = apply_impact(model, &r, &vs, &b)?;
                    mode = SloshMode::Constrained;
                    events.push(SloshEvent {
                        kind: SloshEventKind::Collision,
                        time: t0 + t_off + tau,
                    });
                    t_off += tau;
                } else {
                    r = r1;
                    v = v1;
                    t_off += h;
                }
            }
            SloshMode::Constrained => {
                let b0 = body.at_offset(t_off);
                let frames0 = Frames::new(&model.tank, &b0);
                let solve0 = constrained_accel(&r, &v, &b0, model)?;
                diag.note_solve(&solve0);
                diag.note_constraint(constraint_value(&r, &model.surface));
                let tension0 = contact_tension(model, &r, &frames0, &solve0)?;
                if tension0 - model.params.adhesion_threshold > 0.0 {
                    // The arc starts already past the adhesion limit (e.g.
                    // right after an impact on a receding wall): release now.
                    take_event(&mut events_left)?;
                    mode = SloshMode::Unconstrained;
                    events.push(SloshEvent {
                        kind: SloshEventKind::Separation,
                        time: t0 + t_off,
                    });
                    continue;
                }

                let (r1, v1) = integrate_constrained(model, &r, &v, body, t_off, h)?;
                let b1 = body.at_offset(t_off + h);
                let frames1 = Frames::new(&model.tank, &b1);
                let solve1 = constrained_accel(&r1, &v1, &b1, model)?;
                let margin1 =
                    contact_tension(model, &r1, &frames1, &solve1)? - model.params.adhesion_threshold;
                if margin1 > ctl.event_tol {
                    let (tau, rs, vs) = bisect(ctl, h, (r1, v1), margin1, |tau| {
                        let (rm, vm) = integrate_constrained(model, &r, &v, body, t_off, tau)?;
                        let bm = body.at_offset(t_off + tau);
                        let fm = Frames::new(&model.tank, &bm);
                        let sm = constrained_accel(&rm, &vm, &bm, model)?;
                        let g = contact_tension(model, &rm, &fm, &sm)?
                            - model.params.adhesion_threshold;
                        Ok((g, (rm, vm)))
                    })?;
                    take_event(&mut events_left)?;
                    let b = body.at_offset(t_off + tau);
                    r = project_to_surface(&rs, &model.surface)?;
                    v = clean_normal_velocity(model, &r, &vs, &b)?;
                    diag.note_constraint(constraint_value(&r, &model.surface));
                    mode = SloshMode::Unconstrained;
                    events.push(SloshEvent {
                        kind: SloshEventKind::Separation,
                        time: t0 + t_off + tau,
                    });
                    t_off += tau;
                } else {
                    r = project_to_surface(&r1, &model.surface)?;
                    v = clean_normal_velocity(model, &r, &v1, &b1)?;
                    diag.note_solve(&solve1);
                    diag.note_constraint(constraint_value(&r, &model.surface));
                    t_off += h;
                }
            }
        }
    }

    Ok((
        SloshState {
            pos_t: r,
            vel_i: v,
            mode,
        },
        events,
        diag,
    ))
}

/// Advance over `substeps` equal slices of `dt`, reconstructing the body
/// motion at each slice start from the single step-start input. This is the
/// EMM stage of the coupled loop.
pub fn advance_slosh(
    model: &SloshModel,
    state: &SloshState,
    body: &BodyMotionInput,
    t0: f64,
    dt: f64,
    substeps: u32,
    ctl: &StepControls,
) -> Result<(SloshState, Vec<SloshEvent>, StepDiag)> {
    if substeps == 0 {
        return Err(Error::validation("substeps must be at least 1"));
    }
    let h = dt / substeps as f64;
    let mut s = *state;
    let mut events = Vec::new();
    let mut diag = StepDiag::default();
    for k in 0..substeps {
        let tau = k as f64 * h;
        let (s1, ev, d) = emm_step(model, &s, &body.at_offset(tau), t0 + tau, h, ctl)?;
        s = s1;
        events.extend(ev);
        diag.merge(&d);
    }
    Ok((s, events, diag))
}

fn take_event(events_left: &mut u32) -> Result<()> {
    if *events_left == 0 {
        return Err(Error::numerical(
            "contact-event cascade: too many mode transitions in one substep",
        ));
    }
    *events_left -= 1;
    Ok(())
}

fn apply_impact(
    model: &SloshModel,
    r_t: &Vec3,
    v_i: &Vec3,
    body: &BodyMotionInput,
) -> Result<Vec3> {
    let frames = Frames::new(&model.tank, body);
    let e_n_i = frames.c_it * surface_normal(r_t, &model.surface)?;
    let v_wall = wall_velocity_i_with_frames(r_t, &frames, &model.tank, body);
    Ok(impact(v_i, &v_wall, &e_n_i))
}

/// Bisection localization over τ ∈ (0, h]: `eval` returns the event function
/// (known ≤ 0 at τ = 0 and `g_end` > 0 at τ = h) and the integrated state.
/// Returns the first state with |g| ≤ event_tol, or the best outside-bracket
/// state if the iteration cap lands first.
fn bisect<F>(
    ctl: &StepControls,
    h: f64,
    end_state: (Vec3, Vec3),
    g_end: f64,
    mut eval: F,
) -> Result<(f64, Vec3, Vec3)>
where
    F: FnMut(f64) -> Result<(f64, (Vec3, Vec3))>,
{
    debug_assert!(g_end > 0.0);
    let mut lo = 0.0_f64;
    let mut hi = h;
    let mut best = (h, end_state.0, end_state.1);
    for _ in 0..ctl.max_bisect {
        let mid = 0.5 * (lo + hi);
        let (g, (rm, vm)) = eval(mid)?;
        if g.abs() <= ctl.event_tol {
            return Ok((mid, rm, vm));
        }
        if g > 0.0 {
            hi = mid;
            best = (mid, rm, vm);
        } else {
            lo = mid;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emm::test_fixtures::reference_model;
    use crate::emm::split_velocity;
    use approx::assert_abs_diff_eq;

    fn static_setup() -> (SloshModel, BodyMotionInput) {
        (
            reference_model(Vec3::zeros()),
            BodyMotionInput::static_body(Vec3::zeros()),
        )
    }

    #[test]
    fn free_flight_without_gravity_is_straight() {
        let (model, body) = static_setup();
        let state = SloshState {
            pos_t: Vec3::new(0.005, 0.0, 0.0),
            vel_i: Vec3::new(0.01, 0.0, 0.0),
            mode: SloshMode::Unconstrained,
        };
        let (s, ev, _) =
            emm_step(&model, &state, &body, 0.0, 1e-3, &StepControls::default()).unwrap();
        assert!(ev.is_empty());
        assert_abs_diff_eq!(s.pos_t, Vec3::new(0.005 + 0.01 * 1e-3, 0.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(s.vel_i, state.vel_i);
        assert_eq!(s.mode, SloshMode::Unconstrained);
    }

    #[test]
    fn radial_approach_collides_once_and_sticks() {
        // Static tank, no gravity: the particle flies radially outward, hits
        // the surface once, loses its (fully normal) velocity, and rests.
        let (model, body) = static_setup();
        let speed = 0.05;
        let mut state = SloshState {
            pos_t: Vec3::new(0.02, 0.0, 0.0),
            vel_i: Vec3::new(speed, 0.0, 0.0),
            mode: SloshMode::Unconstrained,
        };
        let ctl = StepControls::default();
        let mut events = Vec::new();
        let h = 1e-3;
        for k in 0..1000 {
            let (s, ev, _) = emm_step(&model, &state, &body, k as f64 * h, h, &ctl).unwrap();
            state = s;
            events.extend(ev);
        }
        assert_eq!(events.len(), 1, "expected exactly one event, got {events:?}");
        assert_eq!(events[0].kind, SloshEventKind::Collision);
        let expected_t = (model.surface.a() - 0.02) / speed;
        assert!((events[0].time - expected_t).abs() < 1e-9);
        assert_eq!(state.mode, SloshMode::Constrained);
        // All velocity was normal, so the impact absorbed it.
        assert!(state.vel_i.norm() < 1e-12);
        assert_abs_diff_eq!(
            constraint_value(&state.pos_t, &model.surface),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn oblique_impact_keeps_tangential_velocity() {
        let (model, body) = static_setup();
        let state = SloshState {
            pos_t: Vec3::new(0.0404, 0.0, 0.0),
            vel_i: Vec3::new(0.05, 0.02, 0.0),
            mode: SloshMode::Unconstrained,
        };
        let ctl = StepControls::default();
        let (s, ev, _) = emm_step(&model, &state, &body, 0.0, 5e-3, &ctl).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, SloshEventKind::Collision);
        // Tangential component survives (up to the slight normal rotation
        // between start point and impact point).
        assert!(s.vel_i.norm() > 0.015 && s.vel_i.norm() < 0.03);
        let e_n = surface_normal(&s.pos_t, &model.surface).unwrap();
        let (v_perp, _) = split_velocity(&s.vel_i, &e_n);
        assert!(v_perp.abs() < 1e-12);
    }

    #[test]
    fn constrained_rest_stays_put_without_forcing() {
        let (model, body) = static_setup();
        let state = SloshState {
            pos_t: Vec3::new(model.surface.a(), 0.0, 0.0),
            vel_i: Vec3::zeros(),
            mode: SloshMode::Constrained,
        };
        let ctl = StepControls::default();
        let (s, ev, diag) = emm_step(&model, &state, &body, 0.0, 1e-3, &ctl).unwrap();
        assert!(ev.is_empty());
        assert_abs_diff_eq!(s.pos_t, state.pos_t, epsilon = 1e-14);
        assert!(s.vel_i.norm() < 1e-14);
        assert!(diag.max_constraint < 1e-12);
        assert!(diag.max_residual < 1e-10);
    }

    #[test]
    fn sliding_friction_decays_kinetic_energy() {
        // Particle on the surface with tangential speed in a static tank:
        // the constraint does no work, drag bleeds energy monotonically.
        let (model, body) = static_setup();
        let a = model.surface.a();
        let mut state = SloshState {
            pos_t: Vec3::new(a, 0.0, 0.0),
            vel_i: Vec3::new(0.0, 0.08, 0.0),
            mode: SloshMode::Constrained,
        };
        let ctl = StepControls::default();
        let mut ke_prev = 0.5 * state.vel_i.norm_squared();
        for k in 0..2000 {
            let (s, ev, diag) = emm_step(&model, &state, &body, k as f64 * 1e-3, 1e-3, &ctl).unwrap();
            assert!(ev.is_empty(), "unexpected event: {ev:?}");
            assert!(diag.max_constraint < 1e-10);
            let ke = 0.5 * s.vel_i.norm_squared();
            assert!(ke <= ke_prev * (1.0 + 1e-12) + 1e-18);
            ke_prev = ke;
            state = s;
        }
        // Two seconds of drag must have eaten a visible share.
        assert!(ke_prev < 0.5 * 0.08_f64.powi(2) * 0.9);
    }

    #[test]
    fn dry_model_is_inert() {
        let (mut model, body) = static_setup();
        model.params.m_total = 0.0;
        let state = SloshState::at_rest();
        let (s, ev, diag) =
            emm_step(&model, &state, &body, 0.0, 1e-3, &StepControls::default()).unwrap();
        assert_eq!(s, state);
        assert!(ev.is_empty());
        assert_eq!(diag, StepDiag::default());
    }

    #[test]
    fn spin_down_in_gravity_separates_when_tension_exceeds_adhesion() {
        // Drum scenario: spherical surface spinning about body x with
        // gravity along inertial -z. The particle starts co-rotating over
        // the top (ω₀²b ≫ g: firm compression) while the drum spins down;
        // gravity work and wall drag drain its loop energy until the
        // top-of-circle hold condition v² ≥ g·b fails and the wall would
        // have to pull. The stepper must release exactly then, never while
        // the contact still pushes.
        let model = reference_model(Vec3::zeros());
        let g = 9.81;
        let omega0 = 20.0;
        let omega_dot = -1.0;
        let b_ax = model.surface.b();
        let mut state = SloshState {
            pos_t: Vec3::new(0.0, 0.0, b_ax),
            vel_i: Vec3::new(omega0, 0.0, 0.0).cross(&Vec3::new(0.0, 0.0, b_ax)),
            mode: SloshMode::Constrained,
        };
        let ctl = StepControls::default();
        let h = 1e-3;
        let body_at = |t: f64| {
            let theta = omega0 * t + 0.5 * omega_dot * t * t;
            BodyMotionInput {
                att: crate::frames::Quat::from_scaled_axis(Vec3::new(theta, 0.0, 0.0)),
                omega_b: Vec3::new(omega0 + omega_dot * t, 0.0, 0.0),
                omega_dot_b: Vec3::new(omega_dot, 0.0, 0.0),
                vel_i: Vec3::zeros(),
                accel_i: Vec3::zeros(),
                gravity_i: Vec3::new(0.0, 0.0, -g),
            }
        };
        let mut separation: Option<SloshEvent> = None;
        'outer: for k in 0..14_000 {
            let t = k as f64 * h;
            let body = body_at(t);
            // Accepted constrained states must never be past the adhesion
            // limit (up to the event localization tolerance).
            if state.mode == SloshMode::Constrained {
                let solve = constrained_accel(&state.pos_t, &state.vel_i, &body, &model).unwrap();
                let frames = Frames::new(&model.tank, &body);
                let tension = contact_tension(&model, &state.pos_t, &frames, &solve).unwrap();
                assert!(
                    tension <= model.params.adhesion_threshold + 1e-9,
                    "tension {tension:.3e} exceeded threshold while still constrained at t={t}"
                );
            }
            let (s, ev, _) = emm_step(&model, &state, &body, t, h, &ctl).unwrap();
            state = s;
            for e in ev {
                if e.kind == SloshEventKind::Separation {
                    separation = Some(e);
                    break 'outer;
                }
            }
        }
        let sep = separation.expect("spin-down never separated");
        assert_eq!(state.mode, SloshMode::Unconstrained);
        // Gravity can only unload the contact in the upper hemisphere.
        let att = body_at(sep.time).att;
        let p_i = att * state.pos_t;
        assert!(
            p_i.z > 0.4 * b_ax,
            "separation happened at inertial height {:.4}, away from the top",
            p_i.z
        );
        // Release happened at the unload point, not out of firm compression:
        // the tension a still-attached contact would need right after the
        // event (≤ one substep later) sits at/above the adhesion threshold,
        // far from the ~0.1 N compression levels seen while riding the wall.
        let t_state = (sep.time / h).floor() * h + h;
        let body_after = body_at(t_state);
        let virt = constrained_accel(&state.pos_t, &state.vel_i, &body_after, &model).unwrap();
        let frames = Frames::new(&model.tank, &body_after);
        let tension_after = contact_tension(&model, &state.pos_t, &frames, &virt).unwrap();
        assert!(
            tension_after > -1e-6,
            "released while the contact was still pushing ({tension_after:.3e} N)"
        );
    }
}
