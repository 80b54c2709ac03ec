//! Coupled simulation of propellant slosh and spacecraft attitude motion.
//!
//! The liquid in each tank is reduced to a two-mass mechanical equivalent: a
//! stationary mass rigidly carried at the tank center and a point particle
//! that moves freely inside an ellipsoidal control surface, sticks to it on
//! impact, and releases when the contact would have to pull. The crate
//! layers, bottom up:
//!
//! - [`frames`]: quaternion/DCM conventions shared by every module.
//! - [`emm`]: the slosh particle model (constraint geometry, hybrid
//!   dynamics, event-handling integrator, reaction wrench).
//! - [`rigid`]: rigid-body attitude dynamics and inertia composition.
//! - [`control`]: maneuver profiles and the spin-rate controller.
//! - [`sim`]: scenario assembly, the coupled stepping loop, trace recording,
//!   and dimensionless regime numbers.
//! - [`calibrate`]: differential-evolution fitting of the slosh parameters
//!   against a reference trace.
//! - [`io`]: scenario files, trace CSV, and report generation.

pub mod calibrate;
pub mod control;
pub mod emm;
pub mod error;
pub mod frames;
pub mod io;
pub mod rigid;
pub mod sim;

pub use error::{Error, Result};

/// The mdbook guide under `book/` doubles as a test suite: every fenced
/// Rust block in the chapters compiles and runs here as a doc-test, so the
/// guide cannot drift from the API it documents.
#[doc(hidden)]
pub mod _guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/getting-started.md")]
    pub mod getting_started {}
    #[doc = include_str!("../../../book/src/frames.md")]
    pub mod frames {}
    #[doc = include_str!("../../../book/src/slosh-model.md")]
    pub mod slosh_model {}
    #[doc = include_str!("../../../book/src/rigid-body.md")]
    pub mod rigid_body {}
    #[doc = include_str!("../../../book/src/maneuvers-and-control.md")]
    pub mod maneuvers_and_control {}
    #[doc = include_str!("../../../book/src/coupled-simulation.md")]
    pub mod coupled_simulation {}
    #[doc = include_str!("../../../book/src/dimensionless.md")]
    pub mod dimensionless {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    pub mod calibration {}
    #[doc = include_str!("../../../book/src/traces-and-reports.md")]
    pub mod traces_and_reports {}
}
