//! Staggered coupling of the slosh particle and the rigid body.
//!
//! Each outer step of length `dt`:
//!
//! 1. evaluates the control torque at the step start and, together with the
//!    wrench carried over from the previous step, a provisional body angular
//!    acceleration;
//! 2. advances the slosh state through `substeps` slices against the body
//!    motion reconstructed from that provisional acceleration;
//! 3. re-evaluates the liquid wrench at the slosh end state and provisional
//!    end attitude;
//! 4. propagates the rigid body under the updated wrench (held over the
//!    step) plus the rate feedback evaluated inside the RK4 stages.
//!
//! A trace row at time t holds the instantaneous states at t together with
//! the wrench evaluation that ended there; the row at t = 0 is a fresh
//! evaluation with no carried-over wrench. The recorded control channel is
//! recomputed at the row's own time, i.e. the torque about to act.

use std::time::Instant;

use crate::control::{rate_controller, ControlSpec, ManeuverProfile};
use crate::emm::{
    advance_slosh, constraint_value, wrench_and_solve, BodyMotionInput, SloshState, SloshWrench,
    StepControls, StepDiag,
};
use crate::error::{Error, Result};
use crate::frames::{Quat, Vec3};
use crate::rigid::{angular_accel, propagate_with, BodyState};
use crate::sim::scenario::Scenario;
use crate::sim::trace::{Trace, TraceMeta, TraceRow};

/// Which coupling loop to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMode {
    /// Attitude prescribed by the maneuver profile, no controller.
    Open,
    /// Attitude integrated under liquid wrench and rate feedback.
    Closed,
}

/// Joint state at one grid time.
#[derive(Debug, Clone, Copy)]
pub struct CoupledState {
    pub t: f64,
    pub body: BodyState,
    pub slosh: SloshState,
    /// Liquid wrench evaluated at this state (carried into the next step).
    pub wrench: SloshWrench,
    /// Constraint multiplier of that evaluation (0 when free).
    pub lambda: f64,
}

/// Per-step byproducts of [`coupled_step`].
#[derive(Debug, Clone)]
pub struct StepInfo {
    /// Control torque applied over the step, evaluated at the step start.
    pub control_torque: f64,
    /// Reference rate at the step start [rad/s].
    pub omega_ref: f64,
    pub events: Vec<crate::emm::SloshEvent>,
    pub diag: StepDiag,
}

fn control_eval(
    control: &ControlSpec,
    maneuver: &ManeuverProfile,
    t: f64,
    omega_b: &Vec3,
) -> (f64, f64) {
    let omega_ref = control.reference_rate(t, maneuver);
    let measured = omega_b.dot(&maneuver.axis_b);
    (omega_ref, rate_controller(measured, omega_ref, control.gain()))
}

fn motion_input(scn: &Scenario, body: &BodyState, omega_dot_b: Vec3) -> BodyMotionInput {
    // The body origin is the spin pivot: no translational motion.
    BodyMotionInput {
        att: body.att,
        omega_b: body.omega_b,
        omega_dot_b,
        vel_i: Vec3::zeros(),
        accel_i: Vec3::zeros(),
        gravity_i: scn.gravity_i,
    }
}

/// Initial closed-loop state: the wrench is evaluated fresh at the initial
/// conditions with no previous load to carry.
pub fn closed_loop_init(scn: &Scenario) -> Result<(CoupledState, StepDiag)> {
    let control = scn
        .control
        .as_ref()
        .ok_or_else(|| Error::validation("closed loop requires a [control] section"))?;
    let (_, u) = control_eval(control, &scn.maneuver, 0.0, &scn.init.body.omega_b);
    let torque = scn.maneuver.axis_b * u;
    let omega_dot = angular_accel(&scn.inertia, &scn.init.body.omega_b, &torque);
    let input = motion_input(scn, &scn.init.body, omega_dot);
    let (wrench, solve) = wrench_and_solve(&scn.model, &scn.init.slosh, &input)?;
    let mut diag = StepDiag::default();
    if solve.is_some() {
        diag.max_constraint = constraint_value(&scn.init.slosh.pos_t, &scn.model.surface).abs();
    }
    let lambda = solve.as_ref().map(|s| s.lambda).unwrap_or(0.0);
    if let Some(s) = solve {
        diag.max_residual = s.residual;
    }
    Ok((
        CoupledState {
            t: 0.0,
            body: scn.init.body,
            slosh: scn.init.slosh,
            wrench,
            lambda,
        },
        diag,
    ))
}

/// One closed-loop step of the staggered scheme.
pub fn coupled_step(
    scn: &Scenario,
    state: &CoupledState,
    ctl: &StepControls,
) -> Result<(CoupledState, StepInfo)> {
    let control = scn
        .control
        .as_ref()
        .ok_or_else(|| Error::validation("closed loop requires a [control] section"))?;
    let axis = scn.maneuver.axis_b;
    let (omega_ref, u) = control_eval(control, &scn.maneuver, state.t, &state.body.omega_b);

    // Provisional body motion for the slosh substeps: start-of-step control
    // torque plus the wrench carried over from the previous step.
    let torque0 = axis * u + state.wrench.torque_b;
    let omega_dot = angular_accel(&scn.inertia, &state.body.omega_b, &torque0);
    let input = motion_input(scn, &state.body, omega_dot);

    let (slosh1, events, mut diag) =
        advance_slosh(&scn.model, &state.slosh, &input, state.t, scn.dt, scn.substeps, ctl)?;

    // Updated wrench at the slosh end state and provisional end attitude.
    let input_end = input.at_offset(scn.dt);
    let (wrench1, solve) = wrench_and_solve(&scn.model, &slosh1, &input_end)?;
    if let Some(s) = &solve {
        diag.max_residual = diag.max_residual.max(s.residual);
    }

    // Rigid step: updated wrench held constant, rate feedback per stage.
    let gain = control.gain();
    let t0 = state.t;
    let body1 = propagate_with(&state.body, &scn.inertia, scn.dt, |tau, w| {
        let r = control.reference_rate(t0 + tau, &scn.maneuver);
        axis * rate_controller(w.dot(&axis), r, gain) + wrench1.torque_b
    });

    Ok((
        CoupledState {
            t: state.t + scn.dt,
            body: body1,
            slosh: slosh1,
            wrench: wrench1,
            lambda: solve.map(|s| s.lambda).unwrap_or(0.0),
        },
        StepInfo {
            control_torque: u,
            omega_ref,
            events,
            diag,
        },
    ))
}

fn push_state_row(trace: &mut Trace, state: &CoupledState, omega_ref: f64, control_torque: f64) {
    trace.push_row(&TraceRow {
        t: state.t,
        wrench: state.wrench,
        omega_b: state.body.omega_b,
        att: state.body.att,
        omega_ref,
        control_torque,
        slosh_pos_t: state.slosh.pos_t,
        slosh_vel_i: state.slosh.vel_i,
        mode: state.slosh.mode,
        lambda: state.lambda,
    });
}

/// Run the closed-loop simulation over the scenario grid.
pub fn run_closed_loop(scn: &Scenario) -> Result<Trace> {
    scn.validate()?;
    let control = scn
        .control
        .as_ref()
        .ok_or_else(|| Error::validation("closed loop requires a [control] section"))?;
    let start = Instant::now();
    let ctl = StepControls::default();
    let (mut state, mut diag_total) = closed_loop_init(scn)?;
    let mut trace = Trace::full();
    {
        let (omega_ref, u) = control_eval(control, &scn.maneuver, 0.0, &state.body.omega_b);
        push_state_row(&mut trace, &state, omega_ref, u);
    }
    let n = scn.n_steps();
    for k in 0..n {
        let (s1, info) = coupled_step(scn, &state, &ctl)?;
        state = s1;
        // Keep row times exactly on the grid instead of accumulating dt.
        state.t = (k + 1) as f64 * scn.dt;
        trace.events.extend(info.events);
        diag_total.merge(&info.diag);
        let (omega_ref, u) = control_eval(control, &scn.maneuver, state.t, &state.body.omega_b);
        push_state_row(&mut trace, &state, omega_ref, u);
    }
    trace.meta = TraceMeta {
        runtime_s: Some(start.elapsed().as_secs_f64()),
        max_constraint: Some(diag_total.max_constraint),
        max_residual: Some(diag_total.max_residual),
    };
    Ok(trace)
}

/// Body state and slosh input prescribed by the maneuver profile at `t`.
/// Open loop ignores any initial body rate; the initial attitude composes
/// with the profile rotation.
fn profile_state(scn: &Scenario, t: f64) -> (BodyState, BodyMotionInput) {
    let axis = scn.maneuver.axis_b;
    let (rate, accel) = scn.maneuver.rate_and_accel(t);
    let att = scn.init.body.att * Quat::from_scaled_axis(axis * scn.maneuver.angle(t));
    let body = BodyState {
        att,
        omega_b: axis * rate,
    };
    let input = motion_input(scn, &body, axis * accel);
    (body, input)
}

/// Run the open-loop simulation: attitude scripted from the profile, no
/// controller, the liquid responding to the prescribed motion.
pub fn run_open_loop(scn: &Scenario) -> Result<Trace> {
    scn.validate()?;
    let start = Instant::now();
    let ctl = StepControls::default();
    let mut trace = Trace::full();
    let mut diag_total = StepDiag::default();
    let mut slosh = scn.init.slosh;

    let (body0, input0) = profile_state(scn, 0.0);
    let (w0, s0) = wrench_and_solve(&scn.model, &slosh, &input0)?;
    if let Some(s) = &s0 {
        diag_total.max_constraint = constraint_value(&slosh.pos_t, &scn.model.surface).abs();
        diag_total.max_residual = s.residual;
    }
    push_state_row(
        &mut trace,
        &CoupledState {
            t: 0.0,
            body: body0,
            slosh,
            wrench: w0,
            lambda: s0.map(|s| s.lambda).unwrap_or(0.0),
        },
        scn.maneuver.rate_and_accel(0.0).0,
        0.0,
    );

    let n = scn.n_steps();
    for k in 0..n {
        let t = k as f64 * scn.dt;
        let (_, input) = profile_state(scn, t);
        let (slosh1, events, diag) =
            advance_slosh(&scn.model, &slosh, &input, t, scn.dt, scn.substeps, &ctl)?;
        slosh = slosh1;
        trace.events.extend(events);
        diag_total.merge(&diag);

        let t1 = (k + 1) as f64 * scn.dt;
        // End-of-step wrench against the exact profile state, not the
        // frozen-acceleration reconstruction (profile corners stay sharp).
        let (body1, input1) = profile_state(scn, t1);
        let (w1, solve) = wrench_and_solve(&scn.model, &slosh, &input1)?;
        if let Some(s) = &solve {
            diag_total.max_residual = diag_total.max_residual.max(s.residual);
        }
        push_state_row(
            &mut trace,
            &CoupledState {
                t: t1,
                body: body1,
                slosh,
                wrench: w1,
                lambda: solve.map(|s| s.lambda).unwrap_or(0.0),
            },
            scn.maneuver.rate_and_accel(t1).0,
            0.0,
        );
    }
    trace.meta = TraceMeta {
        runtime_s: Some(start.elapsed().as_secs_f64()),
        max_constraint: Some(diag_total.max_constraint),
        max_residual: Some(diag_total.max_residual),
    };
    Ok(trace)
}

/// Dispatch on the loop mode.
pub fn run(scn: &Scenario, mode: LoopMode) -> Result<Trace> {
    match mode {
        LoopMode::Open => run_open_loop(scn),
        LoopMode::Closed => run_closed_loop(scn),
    }
}
