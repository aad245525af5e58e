//! Time loop with per-step diagnostics.

use std::io::{self, Write};

use crate::error::{Error, Result};

use super::closed_loop::{ClosedLoop, ClosedLoopState};
use super::integrator::{affine_parts, ExponentialStepper};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    /// Exact stepping of the (affine) closed loop.
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub t_final: f64,
    pub dt: f64,
    pub log_every: usize,
    pub integrator: Integrator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub h: f64,
    pub hc: f64,
    pub hcl: f64,
    pub dhcl: f64,
    pub casimir_drift: Vec<f64>,
    pub eq_error: f64,
    pub u: Vec<f64>,
    pub yc: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// Deflection at every logged step.
    pub snapshots: Vec<Vec<f64>>,
    pub final_state: ClosedLoopState,
    pub dt: f64,
    pub steps: usize,
}

/// Energies beyond this multiple of the initial scale count as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// Step count and effective step so that the horizon is hit exactly.
pub fn step_plan(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final".into(),
            reason: format!("{t_final} is not a non-negative time"),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt".into(),
            reason: format!("{dt} is not positive"),
        });
    }
    if t_final == 0.0 {
        return Ok((0, dt));
    }
    let steps = ((t_final / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((steps, t_final / steps as f64))
}

pub fn record(cl: &ClosedLoop, s: &ClosedLoopState, c0: &[f64]) -> Result<DiagnosticsRecord> {
    let d = cl.closed_loop_rhs(s)?;
    let h = cl.plant_energy(s);
    let hc = cl.controller_energy(s);
    let drift = cl.casimirs(s).iter().zip(c0).map(|(c, c0)| c - c0).collect();
    Ok(DiagnosticsRecord {
        t: s.t,
        h,
        hc,
        hcl: h + hc,
        dhcl: cl.power(s, &d),
        casimir_drift: drift,
        eq_error: cl.eq_error(&s.plant.w),
        u: d.u,
        yc: d.yc,
    })
}

pub fn simulate(cl: &ClosedLoop, init: ClosedLoopState, opts: &SimOptions) -> Result<Trajectory> {
    if opts.log_every == 0 {
        return Err(Error::InvalidParameter {
            name: "log_every".into(),
            reason: "must be at least 1".into(),
        });
    }
    let (steps, dt) = step_plan(opts.t_final, opts.dt)?;
    let c0 = cl.casimirs(&init);
    let first = record(cl, &init, &c0)?;
    let scale = first.h.abs().max(first.hc.abs()).max(1.0);
    let mut records = vec![first];
    let mut snapshots = vec![init.plant.w.clone()];

    let stepper = match opts.integrator {
        Integrator::Exponential if steps > 0 => {
            let (a, b) = affine_parts(|x| cl.flat_rhs(x), cl.state_dim())?;
            Some(ExponentialStepper::new(&a, &b, dt)?)
        }
        _ => None,
    };

    let mut s = init;
    for k in 1..=steps {
        let t = k as f64 * dt;
        s = match &stepper {
            Some(e) => cl.finish_step(e.step(&cl.pack(&s)), t)?,
            None => {
                let mut next = cl.step_rk4(&s, dt)?;
                next.t = t;
                next
            }
        };
        let energy = cl.plant_energy(&s).abs() + cl.controller_energy(&s).abs();
        if !(energy <= BLOW_UP_FACTOR * scale) {
            return Err(Error::BlowUp {
                time: t,
                reason: format!("energy {energy:.3e} exceeds {BLOW_UP_FACTOR:e} x {scale:.3e}"),
            });
        }
        if k % opts.log_every == 0 || k == steps {
            records.push(record(cl, &s, &c0)?);
            snapshots.push(s.plant.w.clone());
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_state: s,
        dt,
        steps,
    })
}

pub const TRAJECTORY_HEADER: &str = "t,H,Hc,Hcl,dHcl,C1_drift,C2_drift,eq_error,u1,u2";

pub fn write_trajectory_csv<W: Write>(
    records: &[DiagnosticsRecord],
    out: &mut W,
    digits: usize,
) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    for r in records {
        let row = [
            r.t,
            r.h,
            r.hc,
            r.hcl,
            r.dhcl,
            at(&r.casimir_drift, 0),
            at(&r.casimir_drift, 1),
            r.eq_error,
            at(&r.u, 0),
            at(&r.u, 1),
        ];
        let line: Vec<String> = row.iter().map(|v| format!("{v:.digits$e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
