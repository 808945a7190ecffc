//! JSON job reports and CSV trajectory export.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::{Command, Tolerances};
use crate::dynamics::Trajectory;
use crate::geometry::Chart;

pub const TOOL: &str = "projeq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One thresholded quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `residual <= tolerance`.
    pub fn at_most(name: &str, residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub status: Status,
    pub chart: Chart,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(
        command: Command,
        chart: Chart,
        tolerances: Tolerances,
        checks: Vec<Check>,
        error: Option<String>,
        result: serde_json::Value,
    ) -> Report {
        let passed = error.is_none() && checks.iter().all(|c| c.passed);
        Report {
            tool: TOOL,
            version: VERSION,
            command,
            status: if passed { Status::Pass } else { Status::Fail },
            chart,
            tolerances,
            checks,
            error,
            result,
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// Writes `t,x,y,px,py,H,F` rows with 17 significant digits. The `F`
/// column holds the first logged integral and is left empty without one.
pub fn export_trajectory(traj: &Trajectory, path: &Path) -> io::Result<()> {
    if traj.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "trajectory has no samples",
        ));
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,x,y,px,py,H,F")?;
    let integral = traj.integrals.first();
    for (k, s) in traj.states.iter().enumerate() {
        let f = integral
            .map(|v| format!("{:.16e}", v[k]))
            .unwrap_or_default();
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{f}",
            traj.times[k], s.x, s.y, s.px, s.py, traj.energy[k]
        )?;
    }
    out.flush()
}
