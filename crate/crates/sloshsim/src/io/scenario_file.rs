//! Scenario files: TOML with a fixed section layout.
//!
//! Unknown keys are rejected so typos surface instead of silently falling
//! back to defaults; omitted optional sections fall back to the documented
//! defaults with an info notice.
//!
//! ```toml
//! name = "spin-up"               # optional, defaults to the file stem
//!
//! [tank]
//! radius = 0.05                  # [m]
//! center_body = [0.0, 0.2667, 0.0]
//! fill_ratio = 0.5
//!
//! [fluid]
//! density = 1400.0               # [kg/m³]
//! viscosity = 9.93e-4            # [Pa·s]
//! surface_tension = 0.0135       # [N/m]
//!
//! [surface]                      # optional, default ratios 0.81
//! a_ratio = 0.81
//! b_ratio = 0.81
//!
//! [slosh]                        # optional
//! stationary_fraction = 0.78
//! friction_coeff = 0.015
//! adhesion_threshold = 1e-8      # [N]
//!
//! [inertia]                      # exactly one of j_diag | structure
//! j_diag = [0.5002, 1.2404, 1.6727]
//!
//! [control]                      # optional; required for closed loop
//! damping_ratio = 0.7
//! natural_frequency = 0.06       # [rad/s]
//! reference = "constant"         # or "profile"
//!
//! [maneuver]
//! kind = "spin_up"               # or "flat_spin"
//! spin_rate = 1.5                # [rad/s]
//! t_acc = 10.0                   # [s]
//! # flat_spin also takes t_hold and t_dec (defaults 60, 10)
//! # axis = [0.0, 0.0, 1.0]
//!
//! [sim]
//! t_end = 92.0                   # [s]
//! dt = 0.01                      # default
//! substeps = 10                  # default
//! gravity = [0.0, 0.0, 0.0]      # default
//! seed = 0                       # default
//!
//! [initial]                      # optional, defaults to rest at center
//! slosh_pos = [0.0, 0.0, 0.0]    # tank axes [m]
//! slosh_vel = [0.0, 0.0, 0.0]    # inertial axes [m/s]
//! slosh_mode = "free"            # or "constrained"
//! body_rate = [0.0, 0.0, 0.0]    # body axes [rad/s]
//! body_att_scaled_axis = [0.0, 0.0, 0.0]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::control::{ControlSpec, ManeuverProfile, ReferenceSource};
use crate::emm::{
    FluidProperties, SloshMode, SloshModel, SloshParams, SloshState, SurfaceParams, TankGeometry,
};
use crate::error::{Error, Result};
use crate::frames::{Quat, Vec3};
use crate::rigid::{compose_inertia, BodyState, InertiaModel, StructureSpec};
use crate::sim::{InitialConditions, Scenario};

const DEFAULT_SURFACE_RATIO: f64 = 0.81;
const DEFAULT_STATIONARY_FRACTION: f64 = 0.78;
const DEFAULT_FRICTION_COEFF: f64 = 0.015;
const DEFAULT_ADHESION_THRESHOLD: f64 = 1e-8;
const DEFAULT_DT: f64 = 0.01;
const DEFAULT_SUBSTEPS: u32 = 10;
const DEFAULT_T_HOLD: f64 = 60.0;
const DEFAULT_T_DEC: f64 = 10.0;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    tank: RawTank,
    fluid: RawFluid,
    surface: Option<RawSurface>,
    slosh: Option<RawSlosh>,
    inertia: RawInertia,
    control: Option<RawControl>,
    maneuver: RawManeuver,
    sim: RawSim,
    initial: Option<RawInitial>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTank {
    radius: f64,
    center_body: [f64; 3],
    fill_ratio: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFluid {
    density: f64,
    viscosity: f64,
    surface_tension: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    a_ratio: Option<f64>,
    b_ratio: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlosh {
    stationary_fraction: Option<f64>,
    friction_coeff: Option<f64>,
    adhesion_threshold: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInertia {
    j_diag: Option<[f64; 3]>,
    structure: Option<RawStructure>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    hub_mass: f64,
    hub_radius: f64,
    hub_height: f64,
    beam_length: f64,
    tip_mass: f64,
    point_masses: Option<Vec<(f64, [f64; 3])>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    damping_ratio: f64,
    natural_frequency: f64,
    reference: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManeuver {
    kind: String,
    spin_rate: f64,
    t_acc: f64,
    t_hold: Option<f64>,
    t_dec: Option<f64>,
    axis: Option<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    t_end: f64,
    dt: Option<f64>,
    substeps: Option<u32>,
    gravity: Option<[f64; 3]>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    slosh_pos: Option<[f64; 3]>,
    slosh_vel: Option<[f64; 3]>,
    slosh_mode: Option<String>,
    body_rate: Option<[f64; 3]>,
    body_att_scaled_axis: Option<[f64; 3]>,
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Parse scenario TOML text. `origin` labels errors (a path or `<inline>`),
/// `default_name` fills in when the file has no `name` key.
pub fn parse_scenario_str(text: &str, origin: &str, default_name: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.into(),
        line: e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
        msg: e.message().to_string(),
    })?;
    assemble(raw, default_name)
}

/// Load and parse a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    parse_scenario_str(&text, &path.display().to_string(), &stem)
}

fn assemble(raw: RawScenario, default_name: &str) -> Result<Scenario> {
    let tank = TankGeometry::new(raw.tank.radius, vec3(raw.tank.center_body), raw.tank.fill_ratio)?;
    let fluid = FluidProperties::new(
        raw.fluid.density,
        raw.fluid.viscosity,
        raw.fluid.surface_tension,
    )?;

    let (a_ratio, b_ratio) = match &raw.surface {
        Some(s) => (
            s.a_ratio.unwrap_or(DEFAULT_SURFACE_RATIO),
            s.b_ratio.unwrap_or(DEFAULT_SURFACE_RATIO),
        ),
        None => {
            log::info!("[surface] missing, using a_ratio = b_ratio = {DEFAULT_SURFACE_RATIO}");
            (DEFAULT_SURFACE_RATIO, DEFAULT_SURFACE_RATIO)
        }
    };
    let surface = SurfaceParams::new(a_ratio * tank.radius, b_ratio * tank.radius)?;

    let (frac, cf, adh) = match &raw.slosh {
        Some(s) => (
            s.stationary_fraction.unwrap_or(DEFAULT_STATIONARY_FRACTION),
            s.friction_coeff.unwrap_or(DEFAULT_FRICTION_COEFF),
            s.adhesion_threshold.unwrap_or(DEFAULT_ADHESION_THRESHOLD),
        ),
        None => {
            log::info!(
                "[slosh] missing, using stationary_fraction = {DEFAULT_STATIONARY_FRACTION}, \
                 friction_coeff = {DEFAULT_FRICTION_COEFF}, \
                 adhesion_threshold = {DEFAULT_ADHESION_THRESHOLD:e}"
            );
            (
                DEFAULT_STATIONARY_FRACTION,
                DEFAULT_FRICTION_COEFF,
                DEFAULT_ADHESION_THRESHOLD,
            )
        }
    };
    let params = SloshParams::for_tank(frac, cf, adh, &tank, &fluid)?;
    let model = SloshModel::new(tank, fluid, surface, params)?;

    let inertia = match (&raw.inertia.j_diag, &raw.inertia.structure) {
        (Some(d), None) => InertiaModel::from_diag(d[0], d[1], d[2])?,
        (None, Some(s)) => compose_inertia(&StructureSpec {
            hub_mass: s.hub_mass,
            hub_radius: s.hub_radius,
            hub_height: s.hub_height,
            beam_length: s.beam_length,
            tip_mass: s.tip_mass,
            point_masses: s
                .point_masses
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|(m, p)| (*m, vec3(*p)))
                .collect(),
        })?,
        (Some(_), Some(_)) => {
            return Err(Error::validation(
                "[inertia] must give either j_diag or structure, not both",
            ))
        }
        (None, None) => {
            return Err(Error::validation(
                "[inertia] must give j_diag or structure",
            ))
        }
    };

    let mut maneuver = match raw.maneuver.kind.as_str() {
        "spin_up" => {
            if raw.maneuver.t_hold.is_some() || raw.maneuver.t_dec.is_some() {
                return Err(Error::validation(
                    "t_hold/t_dec apply to flat_spin maneuvers only",
                ));
            }
            ManeuverProfile::spin_up(raw.maneuver.spin_rate, raw.maneuver.t_acc)?
        }
        "flat_spin" => {
            if raw.maneuver.t_hold.is_none() || raw.maneuver.t_dec.is_none() {
                log::info!(
                    "flat_spin phases defaulting to t_hold = {DEFAULT_T_HOLD}, t_dec = {DEFAULT_T_DEC}"
                );
            }
            ManeuverProfile::flat_spin(
                raw.maneuver.spin_rate,
                raw.maneuver.t_acc,
                raw.maneuver.t_hold.unwrap_or(DEFAULT_T_HOLD),
                raw.maneuver.t_dec.unwrap_or(DEFAULT_T_DEC),
            )?
        }
        other => {
            return Err(Error::validation(format!(
                "unknown maneuver kind {other:?} (expected \"spin_up\" or \"flat_spin\")"
            )))
        }
    };
    if let Some(axis) = raw.maneuver.axis {
        maneuver = maneuver.with_axis(vec3(axis))?;
    }

    let control = match &raw.control {
        Some(c) => {
            let reference = match c.reference.as_deref() {
                Some("constant") | None => ReferenceSource::Constant,
                Some("profile") => ReferenceSource::Profile,
                Some(other) => {
                    return Err(Error::validation(format!(
                        "unknown control reference {other:?} (expected \"constant\" or \"profile\")"
                    )))
                }
            };
            // Gain sizing uses the inertia about the maneuver axis.
            let j_axis = maneuver.axis_b.dot(&(inertia.tensor() * maneuver.axis_b));
            Some(ControlSpec::new(
                c.damping_ratio,
                c.natural_frequency,
                j_axis,
                maneuver.spin_rate,
                reference,
            )?)
        }
        None => None,
    };

    let dt = raw.sim.dt.unwrap_or(DEFAULT_DT);
    let substeps = raw.sim.substeps.unwrap_or(DEFAULT_SUBSTEPS);
    let gravity_i = raw.sim.gravity.map(vec3).unwrap_or_else(Vec3::zeros);
    let seed = raw.sim.seed.unwrap_or(0);

    let init = match &raw.initial {
        Some(i) => {
            let mode = match i.slosh_mode.as_deref() {
                Some("free") | None => SloshMode::Unconstrained,
                Some("constrained") => SloshMode::Constrained,
                Some(other) => {
                    return Err(Error::validation(format!(
                        "unknown slosh_mode {other:?} (expected \"free\" or \"constrained\")"
                    )))
                }
            };
            InitialConditions {
                body: BodyState {
                    att: Quat::from_scaled_axis(
                        i.body_att_scaled_axis.map(vec3).unwrap_or_else(Vec3::zeros),
                    ),
                    omega_b: i.body_rate.map(vec3).unwrap_or_else(Vec3::zeros),
                },
                slosh: SloshState {
                    pos_t: i.slosh_pos.map(vec3).unwrap_or_else(Vec3::zeros),
                    vel_i: i.slosh_vel.map(vec3).unwrap_or_else(Vec3::zeros),
                    mode,
                },
            }
        }
        None => InitialConditions::default(),
    };

    let scn = Scenario {
        name: raw.name.unwrap_or_else(|| default_name.to_string()),
        model,
        inertia,
        control,
        maneuver,
        dt,
        substeps,
        t_end: raw.sim.t_end,
        gravity_i,
        seed,
        init,
    };
    scn.validate()?;
    Ok(scn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = r#"
[tank]
radius = 0.05
center_body = [0.0, 0.2667, 0.0]
fill_ratio = 0.5

[fluid]
density = 1400.0
viscosity = 9.93e-4
surface_tension = 0.0135

[inertia]
j_diag = [0.5002, 1.2404, 1.6727]

[maneuver]
kind = "spin_up"
spin_rate = 1.5
t_acc = 10.0

[sim]
t_end = 92.0
"#;

    #[test]
    fn minimal_scenario_gets_documented_defaults() {
        let scn = parse_scenario_str(MINIMAL, "<inline>", "minimal").unwrap();
        assert_eq!(scn.name, "minimal");
        assert_relative_eq!(scn.model.surface.a(), 0.81 * 0.05);
        assert_relative_eq!(scn.model.params.stationary_fraction, 0.78);
        assert_relative_eq!(scn.model.params.friction_coeff, 0.015);
        assert_relative_eq!(scn.dt, 0.01);
        assert_eq!(scn.substeps, 10);
        assert_eq!(scn.seed, 0);
        assert!(scn.control.is_none());
        assert_relative_eq!(scn.model.params.m_total, 0.366519142918809, max_relative = 1e-12);
    }

    #[test]
    fn control_section_sizes_gain_from_axis_inertia() {
        let text = format!(
            "{MINIMAL}\n[control]\ndamping_ratio = 0.7\nnatural_frequency = 0.06\n"
        );
        let scn = parse_scenario_str(&text, "<inline>", "x").unwrap();
        let c = scn.control.unwrap();
        assert_relative_eq!(c.gain(), 0.14050680, max_relative = 1e-9);
        assert_eq!(c.reference, ReferenceSource::Constant);
        assert_relative_eq!(c.nominal_rate, 1.5);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_info() {
        let text = format!("{MINIMAL}\n[tanks]\nfoo = 1\n");
        let err = parse_scenario_str(&text, "bad.scn", "x").unwrap_err();
        assert!(err.is_input_error());
        let msg = err.to_string();
        assert!(msg.contains("bad.scn"), "{msg}");

        let text = MINIMAL.replace("radius", "radiuss");
        let err = parse_scenario_str(&text, "bad.scn", "x").unwrap_err();
        assert!(err.to_string().contains("bad.scn:"), "{}", err);
    }

    #[test]
    fn spin_up_rejects_flat_spin_phases() {
        let text = MINIMAL.replace("t_acc = 10.0", "t_acc = 10.0\nt_hold = 60.0");
        assert!(parse_scenario_str(&text, "<inline>", "x").is_err());
    }

    #[test]
    fn flat_spin_defaults_hold_and_ramp_down() {
        let text = MINIMAL.replace("kind = \"spin_up\"", "kind = \"flat_spin\"");
        let scn = parse_scenario_str(&text, "<inline>", "x").unwrap();
        assert_relative_eq!(scn.maneuver.t_hold, 60.0);
        assert_relative_eq!(scn.maneuver.t_dec, 10.0);
    }

    #[test]
    fn structure_inertia_composes() {
        let text = MINIMAL.replace(
            "j_diag = [0.5002, 1.2404, 1.6727]",
            "structure = { hub_mass = 10.0, hub_radius = 0.4, hub_height = 0.2, beam_length = 0.2, tip_mass = 1.0 }",
        );
        let scn = parse_scenario_str(&text, "<inline>", "x").unwrap();
        assert_relative_eq!(scn.inertia.j_z(), 1.52, max_relative = 1e-12);
    }

    #[test]
    fn both_inertia_forms_rejected() {
        let text = MINIMAL.replace(
            "j_diag = [0.5002, 1.2404, 1.6727]",
            "j_diag = [1.0, 1.0, 1.0]\nstructure = { hub_mass = 1.0, hub_radius = 0.1, hub_height = 0.1, beam_length = 0.1, tip_mass = 0.1 }",
        );
        assert!(parse_scenario_str(&text, "<inline>", "x").is_err());
    }

    #[test]
    fn initial_conditions_parse() {
        let text = format!(
            "{MINIMAL}\n[initial]\nslosh_pos = [0.0405, 0.0, 0.0]\nslosh_mode = \"constrained\"\nbody_rate = [0.0, 0.0, 1.5]\n"
        );
        let scn = parse_scenario_str(&text, "<inline>", "x").unwrap();
        assert_eq!(scn.init.slosh.mode, SloshMode::Constrained);
        assert_relative_eq!(scn.init.body.omega_b.z, 1.5);
    }

    #[test]
    fn off_surface_constrained_start_rejected() {
        let text = format!(
            "{MINIMAL}\n[initial]\nslosh_pos = [0.01, 0.0, 0.0]\nslosh_mode = \"constrained\"\n"
        );
        assert!(parse_scenario_str(&text, "<inline>", "x").is_err());
    }
}
