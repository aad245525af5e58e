//! CSV artifacts for external plotting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ph_core::grid::{edge_nodes, Edge, Field};
use ph_core::scenario::{Scenario, ScenarioPlant};
use ph_core::sim::{write_trajectory_csv, Trajectory};

use crate::error::CliError;

pub const PRECISION_ENV: &str = "PHSIM_CSV_PRECISION";
/// Significant digits; 17 round-trips an f64.
pub const DEFAULT_PRECISION: usize = 17;

pub fn csv_precision() -> Result<usize, CliError> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(d) if (1..=17).contains(&d) => Ok(d),
            _ => Err(CliError::Config(format!("{PRECISION_ENV}: {s:?} is not a digit count in 1..=17"))),
        },
    }
}

pub(crate) fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn row(values: impl IntoIterator<Item = f64>, digits: usize) -> String {
    let p = digits - 1;
    values.into_iter().map(|v| format!("{v:.p$e}")).collect::<Vec<_>>().join(",")
}

/// Trajectory, final deflection and the per-plant trace file.
pub fn emit_plot_data(
    scenario: &Scenario,
    traj: &Trajectory,
    out_dir: &Path,
    digits: usize,
) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    files.push(write_file(out_dir, "trajectory.csv", |w| {
        write_trajectory_csv(&traj.records, w, digits - 1)
    })?);

    let plant = scenario.closed_loop.plant();
    let w_final = Field::new(*plant.grid(), traj.final_state.plant.w.clone())?;
    files.push(write_file(out_dir, "w_final.csv", |w| w_final.write_csv(w, digits))?);

    match &scenario.plant {
        ScenarioPlant::Plate(_) => {
            let nodes = edge_nodes(plant.grid(), Edge::B4)?;
            files.push(write_file(out_dir, "edge_b4.csv", |w| {
                let header: Vec<String> = (0..nodes.len()).map(|i| format!("w{i}")).collect();
                writeln!(w, "t,{}", header.join(","))?;
                for (r, snap) in traj.records.iter().zip(&traj.snapshots) {
                    let vals = std::iter::once(r.t).chain(nodes.iter().map(|&k| snap[k]));
                    writeln!(w, "{}", row(vals, digits))?;
                }
                Ok(())
            })?);
        }
        ScenarioPlant::Beam(b) => {
            let [a1, a2] = b.actuator_nodes();
            let target = scenario.closed_loop.target();
            files.push(write_file(out_dir, "actuator_trace.csv", |w| {
                writeln!(w, "t,w_A1,w_A2,target_A1,target_A2")?;
                for (r, snap) in traj.records.iter().zip(&traj.snapshots) {
                    writeln!(w, "{}", row([r.t, snap[a1], snap[a2], target[a1], target[a2]], digits))?;
                }
                Ok(())
            })?);
        }
    }
    Ok(files)
}
