//! Column-major recording of a simulation run.
//!
//! A trace holds a shared time column plus any subset of the named data
//! channels; full traces are what the simulation loops produce, subsets
//! appear when reading channel-filtered CSV files back in.

use crate::emm::{SloshEvent, SloshMode, SloshWrench};
use crate::error::{Error, Result};
use crate::frames::{Quat, Vec3};

/// Data channels a trace can carry (time is implicit and always present).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Slosh reaction force on the body, body axes [N].
    ForceX,
    ForceY,
    ForceZ,
    /// Slosh reaction torque about the body origin, body axes [N·m].
    TorqueX,
    TorqueY,
    TorqueZ,
    /// Body angular rate, body axes [rad/s].
    RateX,
    RateY,
    RateZ,
    /// Body-to-inertial attitude quaternion (scalar first).
    AttW,
    AttX,
    AttY,
    AttZ,
    /// Commanded spin rate [rad/s].
    RateRef,
    /// Control torque magnitude along the maneuver axis [N·m].
    ControlTorque,
    /// Slosh particle position, tank axes [m].
    SloshPosX,
    SloshPosY,
    SloshPosZ,
    /// Slosh particle velocity, inertial axes [m/s].
    SloshVelX,
    SloshVelY,
    SloshVelZ,
    /// Contact mode (0 free, 1 constrained).
    ContactMode,
    /// Constraint multiplier λ (0 when free).
    ContactLambda,
}

impl Channel {
    pub const COUNT: usize = 23;

    pub const ALL: [Channel; Channel::COUNT] = [
        Channel::ForceX,
        Channel::ForceY,
        Channel::ForceZ,
        Channel::TorqueX,
        Channel::TorqueY,
        Channel::TorqueZ,
        Channel::RateX,
        Channel::RateY,
        Channel::RateZ,
        Channel::AttW,
        Channel::AttX,
        Channel::AttY,
        Channel::AttZ,
        Channel::RateRef,
        Channel::ControlTorque,
        Channel::SloshPosX,
        Channel::SloshPosY,
        Channel::SloshPosZ,
        Channel::SloshVelX,
        Channel::SloshVelY,
        Channel::SloshVelZ,
        Channel::ContactMode,
        Channel::ContactLambda,
    ];

    /// Column name used in the CSV schema.
    pub fn csv_name(self) -> &'static str {
        match self {
            Channel::ForceX => "Fx",
            Channel::ForceY => "Fy",
            Channel::ForceZ => "Fz",
            Channel::TorqueX => "Tx",
            Channel::TorqueY => "Ty",
            Channel::TorqueZ => "Tz",
            Channel::RateX => "wx",
            Channel::RateY => "wy",
            Channel::RateZ => "wz",
            Channel::AttW => "qw",
            Channel::AttX => "qx",
            Channel::AttY => "qy",
            Channel::AttZ => "qz",
            Channel::RateRef => "w_ref",
            Channel::ControlTorque => "u",
            Channel::SloshPosX => "px",
            Channel::SloshPosY => "py",
            Channel::SloshPosZ => "pz",
            Channel::SloshVelX => "vx",
            Channel::SloshVelY => "vy",
            Channel::SloshVelZ => "vz",
            Channel::ContactMode => "mode",
            Channel::ContactLambda => "lambda",
        }
    }

    pub fn from_csv_name(name: &str) -> Option<Channel> {
        Channel::ALL.iter().copied().find(|c| c.csv_name() == name)
    }

    fn idx(self) -> usize {
        Channel::ALL.iter().position(|c| *c == self).unwrap()
    }
}

/// Run-level metadata carried alongside the samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TraceMeta {
    /// Wall-clock runtime of the producing simulation [s].
    pub runtime_s: Option<f64>,
    /// Largest |C| over all accepted constrained states.
    pub max_constraint: Option<f64>,
    /// Largest constraint-acceleration residual over all solves.
    pub max_residual: Option<f64>,
}

/// One full sample as produced by the simulation loops.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub t: f64,
    pub wrench: SloshWrench,
    pub omega_b: Vec3,
    pub att: Quat,
    pub omega_ref: f64,
    pub control_torque: f64,
    pub slosh_pos_t: Vec3,
    pub slosh_vel_i: Vec3,
    pub mode: SloshMode,
    pub lambda: f64,
}

pub fn mode_value(mode: SloshMode) -> f64 {
    match mode {
        SloshMode::Unconstrained => 0.0,
        SloshMode::Constrained => 1.0,
    }
}

impl TraceRow {
    fn value(&self, c: Channel) -> f64 {
        let q = self.att.quaternion();
        match c {
            Channel::ForceX => self.wrench.force_b.x,
            Channel::ForceY => self.wrench.force_b.y,
            Channel::ForceZ => self.wrench.force_b.z,
            Channel::TorqueX => self.wrench.torque_b.x,
            Channel::TorqueY => self.wrench.torque_b.y,
            Channel::TorqueZ => self.wrench.torque_b.z,
            Channel::RateX => self.omega_b.x,
            Channel::RateY => self.omega_b.y,
            Channel::RateZ => self.omega_b.z,
            Channel::AttW => q.w,
            Channel::AttX => q.i,
            Channel::AttY => q.j,
            Channel::AttZ => q.k,
            Channel::RateRef => self.omega_ref,
            Channel::ControlTorque => self.control_torque,
            Channel::SloshPosX => self.slosh_pos_t.x,
            Channel::SloshPosY => self.slosh_pos_t.y,
            Channel::SloshPosZ => self.slosh_pos_t.z,
            Channel::SloshVelX => self.slosh_vel_i.x,
            Channel::SloshVelY => self.slosh_vel_i.y,
            Channel::SloshVelZ => self.slosh_vel_i.z,
            Channel::ContactMode => mode_value(self.mode),
            Channel::ContactLambda => self.lambda,
        }
    }
}

/// Column-major sample store.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    time: Vec<f64>,
    cols: Vec<Option<Vec<f64>>>,
    pub events: Vec<SloshEvent>,
    pub meta: TraceMeta,
}

impl Trace {
    /// Trace carrying every channel.
    pub fn full() -> Trace {
        Trace::with_channels(&Channel::ALL)
    }

    pub fn with_channels(channels: &[Channel]) -> Trace {
        let mut cols: Vec<Option<Vec<f64>>> = vec![None; Channel::COUNT];
        for c in channels {
            cols[c.idx()] = Some(Vec::new());
        }
        Trace {
            time: Vec::new(),
            cols,
            events: Vec::new(),
            meta: TraceMeta::default(),
        }
    }

    /// Assemble from pre-built columns (the CSV reader path). All columns
    /// must match the time column length; duplicates are rejected.
    pub fn from_columns(time: Vec<f64>, columns: Vec<(Channel, Vec<f64>)>) -> Result<Trace> {
        let mut cols: Vec<Option<Vec<f64>>> = vec![None; Channel::COUNT];
        for (c, data) in columns {
            if data.len() != time.len() {
                return Err(Error::validation(format!(
                    "channel {} has {} samples, time has {}",
                    c.csv_name(),
                    data.len(),
                    time.len()
                )));
            }
            if cols[c.idx()].is_some() {
                return Err(Error::validation(format!(
                    "duplicate channel {}",
                    c.csv_name()
                )));
            }
            cols[c.idx()] = Some(data);
        }
        Ok(Trace {
            time,
            cols,
            events: Vec::new(),
            meta: TraceMeta::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn has(&self, c: Channel) -> bool {
        self.cols[c.idx()].is_some()
    }

    pub fn channel(&self, c: Channel) -> Option<&[f64]> {
        self.cols[c.idx()].as_deref()
    }

    /// Channels present, in schema order.
    pub fn channels(&self) -> Vec<Channel> {
        Channel::ALL
            .iter()
            .copied()
            .filter(|c| self.has(*c))
            .collect()
    }

    /// Append one sample; only the channels present in this trace are taken
    /// from the row.
    pub fn push_row(&mut self, row: &TraceRow) {
        self.time.push(row.t);
        for c in Channel::ALL {
            if let Some(col) = self.cols[c.idx()].as_mut() {
                col.push(row.value(c));
            }
        }
    }

    pub fn value(&self, c: Channel, i: usize) -> Option<f64> {
        self.channel(c).and_then(|col| col.get(i)).copied()
    }

    /// Index of the first sample with time ≥ `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.time.iter().position(|&x| x >= t)
    }
}
