//! Plant and controller joined through the power-conserving coupling.

use crate::control::{CasimirSpec, Controller};
use crate::error::{check_finite, Error, Result};
use crate::grid::dot_weighted;
use crate::plant::{DiscretePlant, PlantState};

use super::coupling::pcis_couple;
use super::integrator::rk4_step;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopState {
    pub plant: PlantState,
    pub xc: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub wdot: Vec<f64>,
    pub pdot: Vec<f64>,
    pub xcdot: Vec<f64>,
    pub u: Vec<f64>,
    /// Integrated (or pointwise) plant outputs.
    pub y: Vec<f64>,
    pub yc: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Loop {
    ctrl: Controller,
    spec: CasimirSpec,
}

#[derive(Debug, Clone)]
pub struct ClosedLoop {
    plant: DiscretePlant,
    coupled: Option<Loop>,
    target: Vec<f64>,
    target_norm: f64,
}

/// Floor for the equilibrium-error denominator.
pub const EQ_ERROR_FLOOR: f64 = 1e-12;

impl ClosedLoop {
    /// Plant with u = 0; `target` is the shape used for the equilibrium error.
    pub fn open(plant: DiscretePlant, target: Vec<f64>) -> Result<Self> {
        Self::build(plant, None, target)
    }

    pub fn coupled(
        plant: DiscretePlant,
        ctrl: Controller,
        spec: CasimirSpec,
        target: Vec<f64>,
    ) -> Result<Self> {
        let l = plant.input_count();
        if ctrl.ports() != l || spec.k().nrows() != l {
            return Err(Error::Dimension {
                expected: l,
                got: ctrl.ports().min(spec.k().nrows()),
            });
        }
        if spec.count() > ctrl.dim() {
            return Err(Error::Dimension {
                expected: ctrl.dim(),
                got: spec.count(),
            });
        }
        if let Some(g) = (0..spec.count()).map(|i| spec.gamma(i)).find(|g| g.len() != plant.node_count()) {
            return Err(Error::GridMismatch(format!(
                "gamma has {} values for {} nodes",
                g.len(),
                plant.node_count()
            )));
        }
        Self::build(plant, Some(Loop { ctrl, spec }), target)
    }

    fn build(plant: DiscretePlant, coupled: Option<Loop>, target: Vec<f64>) -> Result<Self> {
        if target.len() != plant.node_count() {
            return Err(Error::Dimension {
                expected: plant.node_count(),
                got: target.len(),
            });
        }
        check_finite(&target, "target")?;
        let target_norm = dot_weighted(plant.weights(), &target.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        Ok(Self {
            plant,
            coupled,
            target,
            target_norm,
        })
    }

    pub fn plant(&self) -> &DiscretePlant {
        &self.plant
    }

    pub fn controller(&self) -> Option<&Controller> {
        self.coupled.as_ref().map(|l| &l.ctrl)
    }

    pub fn spec(&self) -> Option<&CasimirSpec> {
        self.coupled.as_ref().map(|l| &l.spec)
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn controller_dim(&self) -> usize {
        self.controller().map_or(0, Controller::dim)
    }

    pub fn state_dim(&self) -> usize {
        2 * self.plant.node_count() + self.controller_dim()
    }

    /// Closed-loop state with the controller at its stored initial state.
    pub fn initial_state(&self, plant: PlantState) -> ClosedLoopState {
        ClosedLoopState {
            plant,
            xc: self.controller().map_or_else(Vec::new, |c| c.xc.clone()),
            t: 0.0,
        }
    }

    pub fn pack(&self, s: &ClosedLoopState) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.state_dim());
        x.extend_from_slice(&s.plant.w);
        x.extend_from_slice(&s.plant.p);
        x.extend_from_slice(&s.xc);
        x
    }

    pub fn unpack(&self, x: &[f64], t: f64) -> ClosedLoopState {
        let n = self.plant.node_count();
        ClosedLoopState {
            plant: PlantState {
                w: x[..n].to_vec(),
                p: x[n..2 * n].to_vec(),
            },
            xc: x[2 * n..].to_vec(),
            t,
        }
    }

    fn check(&self, s: &ClosedLoopState) -> Result<()> {
        if s.xc.len() != self.controller_dim() {
            return Err(Error::Dimension {
                expected: self.controller_dim(),
                got: s.xc.len(),
            });
        }
        check_finite(&s.xc, "xc")
    }

    pub fn closed_loop_rhs(&self, s: &ClosedLoopState) -> Result<Derivative> {
        self.check(s)?;
        let l = self.plant.input_count();
        let Some(lp) = &self.coupled else {
            let (wdot, pdot) = self.plant.rhs(&s.plant, &vec![0.0; l])?;
            let y = self.plant.port_outputs(&wdot);
            return Ok(Derivative {
                wdot,
                pdot,
                xcdot: Vec::new(),
                u: vec![0.0; l],
                y,
                yc: Vec::new(),
            });
        };
        let y = self.plant.outputs(&s.plant)?;
        let yc = lp.ctrl.output_at(&s.xc)?;
        let (u, uc) = pcis_couple(&y, &yc, lp.spec.k())?;
        let (wdot, pdot) = self.plant.rhs(&s.plant, &u)?;
        let xcdot = lp.ctrl.rhs_at(&s.xc, &uc)?;
        Ok(Derivative {
            wdot,
            pdot,
            xcdot,
            u,
            y,
            yc,
        })
    }

    pub fn flat_rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.closed_loop_rhs(&self.unpack(x, 0.0))?;
        let mut out = d.wdot;
        out.extend(d.pdot);
        out.extend(d.xcdot);
        Ok(out)
    }

    pub fn plant_energy(&self, s: &ClosedLoopState) -> f64 {
        self.plant.hamiltonian(&s.plant)
    }

    pub fn controller_energy(&self, s: &ClosedLoopState) -> f64 {
        self.controller().map_or(0.0, |c| c.hamiltonian().value(&s.xc))
    }

    /// Ḣ_cl by the chain rule on the discrete energies.
    pub fn power(&self, s: &ClosedLoopState, d: &Derivative) -> f64 {
        let plant = self.plant.energy_rate(&s.plant, &d.wdot, &d.pdot);
        let ctrl = self.controller().map_or(0.0, |c| {
            c.hamiltonian()
                .grad(&s.xc)
                .iter()
                .zip(&d.xcdot)
                .map(|(a, b)| a * b)
                .sum()
        });
        plant + ctrl
    }

    /// The closed-loop dissipation −∇Hcᵀ Rc ∇Hc.
    pub fn dissipation(&self, s: &ClosedLoopState) -> f64 {
        self.controller().map_or(0.0, |c| -c.dissipation(&s.xc))
    }

    pub fn casimirs(&self, s: &ClosedLoopState) -> Vec<f64> {
        self.spec()
            .map_or_else(Vec::new, |spec| spec.values(&self.plant, &s.xc, &s.plant.w))
    }

    /// ‖w − w^d‖ / max(‖w^d‖, ε) in the quadrature norm.
    pub fn eq_error(&self, w: &[f64]) -> f64 {
        let d: Vec<f64> = w.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).collect();
        dot_weighted(self.plant.weights(), &d).sqrt() / self.target_norm.max(EQ_ERROR_FLOOR)
    }

    pub fn step_rk4(&self, s: &ClosedLoopState, dt: f64) -> Result<ClosedLoopState> {
        let x = rk4_step(|x| self.flat_rhs(x), &self.pack(s), dt).map_err(|e| match e {
            Error::NonFinite { what, index } => Error::BlowUp {
                time: s.t + dt,
                reason: format!("non-finite {what} at {index} inside the step"),
            },
            e => e,
        })?;
        self.finish_step(x, s.t + dt)
    }

    /// Re-applies the kinematic constraint and rejects non-finite states.
    pub(crate) fn finish_step(&self, mut x: Vec<f64>, t: f64) -> Result<ClosedLoopState> {
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: t,
                reason: format!("non-finite state component {i}"),
            });
        }
        let n = self.plant.node_count();
        let (w, rest) = x.split_at_mut(n);
        self.plant.apply_bcs(w);
        self.plant.apply_bcs(&mut rest[..n]);
        Ok(self.unpack(&x, t))
    }
}
