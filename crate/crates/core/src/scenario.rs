//! The four runnable scenarios: plant, controller, initial state and the
//! integrator each one uses.

use std::fmt;
use std::str::FromStr;

use crate::control::{
    desired_beam_shape, desired_plate_shape, synthesize_beam_controller, synthesize_plate_controller,
    ControllerGains, DesiredEquilibrium, Feedforward,
};
use crate::error::{Error, Result};
use crate::plant::{stability_dt, BeamParams, BeamPlant, PlantModel, PlantState, PlateParams, PlatePlant};
use crate::sim::{ClosedLoop, ClosedLoopState, Integrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    PlateCasimir,
    BeamCasimir,
    PlateOpenLoop,
    BeamOpenLoop,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        Self::PlateCasimir,
        Self::BeamCasimir,
        Self::PlateOpenLoop,
        Self::BeamOpenLoop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PlateCasimir => "plate-casimir",
            Self::BeamCasimir => "beam-casimir",
            Self::PlateOpenLoop => "plate-open-loop",
            Self::BeamOpenLoop => "beam-open-loop",
        }
    }

    pub fn is_plate(self) -> bool {
        matches!(self, Self::PlateCasimir | Self::PlateOpenLoop)
    }

    pub fn is_closed_loop(self) -> bool {
        matches!(self, Self::PlateCasimir | Self::BeamCasimir)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "scenario".into(),
                reason: format!("unknown scenario {s:?}"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Rest,
    /// Fundamental flexible mode with this peak deflection, at rest.
    FundamentalMode { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    pub plate: PlateParams,
    pub beam: BeamParams,
    pub plate_gains: ControllerGains,
    pub beam_gains: ControllerGains,
    pub plate_eq: DesiredEquilibrium,
    pub beam_eq: DesiredEquilibrium,
    pub initial: InitialCondition,
    pub safety: f64,
    pub integrator: Integrator,
}

impl ScenarioParams {
    pub fn defaults(kind: ScenarioKind) -> Self {
        Self {
            kind,
            plate: PlateParams::default(),
            beam: BeamParams::default(),
            plate_gains: ControllerGains::plate_default(),
            beam_gains: ControllerGains::beam_default(),
            plate_eq: DesiredEquilibrium::plate_default(),
            beam_eq: DesiredEquilibrium::beam_default(),
            initial: Self::default_initial(kind),
            safety: 0.8,
            integrator: Self::default_integrator(kind),
        }
    }

    pub fn default_initial(kind: ScenarioKind) -> InitialCondition {
        if kind.is_closed_loop() {
            InitialCondition::Rest
        } else {
            InitialCondition::FundamentalMode { amplitude: 0.01 }
        }
    }

    /// The plate loop with the listed damping gains has eigenvalues near
    /// −2·10⁶, far beyond any practical explicit step, so it is stepped exactly.
    pub fn default_integrator(kind: ScenarioKind) -> Integrator {
        if kind == ScenarioKind::PlateCasimir {
            Integrator::Exponential
        } else {
            Integrator::Rk4
        }
    }
}

#[derive(Debug, Clone)]
pub enum ScenarioPlant {
    Plate(PlatePlant),
    Beam(BeamPlant),
}

impl ScenarioPlant {
    pub fn model(&self) -> &dyn ModelRef {
        match self {
            Self::Plate(p) => p,
            Self::Beam(b) => b,
        }
    }
}

/// Object-safe view of the two plants.
pub trait ModelRef {
    fn discrete_ref(&self) -> &crate::plant::DiscretePlant;
    fn stability(&self, safety: f64) -> Result<f64>;
}

impl<T: PlantModel> ModelRef for T {
    fn discrete_ref(&self) -> &crate::plant::DiscretePlant {
        self.discrete()
    }

    fn stability(&self, safety: f64) -> Result<f64> {
        stability_dt(self, safety)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub plant: ScenarioPlant,
    pub closed_loop: ClosedLoop,
    pub initial: ClosedLoopState,
    pub feedforward: Option<Feedforward>,
    /// Human-readable remarks for the run report.
    pub notes: Vec<String>,
}

impl Scenario {
    pub fn build(params: ScenarioParams) -> Result<Self> {
        let mut notes = Vec::new();
        let plant = if params.kind.is_plate() {
            let p = PlatePlant::new(params.plate.clone())?;
            if let Some(w) = p.sigma_warning() {
                notes.push(w);
            }
            ScenarioPlant::Plate(p)
        } else {
            ScenarioPlant::Beam(BeamPlant::new(params.beam.clone())?)
        };
        let d = plant.model().discrete_ref().clone();
        let n = d.node_count();
        let w0 = match params.initial {
            InitialCondition::Rest => vec![0.0; n],
            InitialCondition::FundamentalMode { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "amplitude".into(),
                        reason: "not finite".into(),
                    });
                }
                let (_, shape) = d.fundamental_mode()?;
                shape.iter().map(|v| amplitude * v).collect()
            }
        };
        let initial_plant = PlantState {
            w: w0.clone(),
            p: vec![0.0; n],
        };
        let mut feedforward = None;
        let closed_loop = match (&plant, params.kind.is_closed_loop()) {
            (ScenarioPlant::Plate(p), true) => {
                let (ctrl, spec, ff) =
                    synthesize_plate_controller(p, &params.plate_eq, &params.plate_gains, &w0)?;
                let mismatch = params.plate_eq.slope_mismatch();
                if mismatch.abs() > 1e-12 {
                    notes.push(format!(
                        "desired plate shape has a slope jump of {mismatch:.4} at the breakpoint; \
                         the static residual is absorbed by the least-squares feedforward"
                    ));
                }
                notes.push(format!(
                    "feedforward us = [{:.6e}, {:.6e}], static residual {:.6e}",
                    ff.us[0], ff.us[1], ff.residual
                ));
                feedforward = Some(ff);
                let wd = desired_plate_shape(&params.plate_eq, p.grid())?;
                ClosedLoop::coupled(d, ctrl, spec, wd.into_values())?
            }
            (ScenarioPlant::Beam(b), true) => {
                let (ctrl, spec) = synthesize_beam_controller(b, &params.beam_eq, &params.beam_gains, &w0)?;
                let wd = desired_beam_shape(&params.beam_eq, b)?;
                ClosedLoop::coupled(d, ctrl, spec, wd.into_values())?
            }
            (ScenarioPlant::Plate(p), false) => {
                ClosedLoop::open(d, desired_plate_shape(&params.plate_eq, p.grid())?.into_values())?
            }
            (ScenarioPlant::Beam(b), false) => {
                ClosedLoop::open(d, desired_beam_shape(&params.beam_eq, b)?.into_values())?
            }
        };
        let initial = closed_loop.initial_state(initial_plant);
        Ok(Self {
            params,
            plant,
            closed_loop,
            initial,
            feedforward,
            notes,
        })
    }

    /// The automatic step: the plant's explicit bound, also used as the
    /// sampling step of the exact integrator.
    pub fn auto_dt(&self) -> Result<f64> {
        let dt = self.plant.model().stability(self.params.safety)?;
        Ok(match self.params.integrator {
            Integrator::Rk4 => dt,
            Integrator::Exponential => EXACT_STEP,
        })
    }

    pub fn fundamental_period(&self) -> Result<f64> {
        let (w1, _) = self.closed_loop.plant().fundamental_mode()?;
        Ok(2.0 * std::f64::consts::PI / w1)
    }
}

/// Sampling step of the exact integrator.
pub const EXACT_STEP: f64 = 0.01;
