//! JSON scenario configuration. Every key is optional and falls back to the
//! example values; unknown keys are rejected with their path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use ph_core::control::{ControllerGains, DesiredEquilibrium};
use ph_core::plant::{BeamParams, PatchGeometry, PiezoParams, PlateParams};
use ph_core::scenario::{InitialCondition, ScenarioKind, ScenarioParams};
use ph_core::sim::Integrator;
use ph_core::stencil::MIN_NODES;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario: Option<String>,
    pub plate: PlateConfig,
    pub beam: BeamConfig,
    pub controller: ControllerConfig,
    pub equilibrium: EquilibriumConfig,
    /// `null` picks the scenario default (rest for closed loops, the
    /// fundamental mode for open loops).
    pub initial: Option<InitialConfig>,
    pub integrator: IntegratorChoice,
    pub dt: StepChoice,
    pub safety: f64,
    pub t_final: f64,
    pub log_every: usize,
    pub out: Option<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: None,
            plate: PlateConfig::default(),
            beam: BeamConfig::default(),
            controller: ControllerConfig::default(),
            equilibrium: EquilibriumConfig::default(),
            initial: None,
            integrator: IntegratorChoice::Auto,
            dt: StepChoice::Auto,
            safety: 0.8,
            t_final: 50.0,
            log_every: 10,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateConfig {
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
    pub nu: f64,
    pub rho_c_h_c: f64,
    pub xi_c: f64,
    pub patches: PatchConfig,
    pub piezo: PiezoConfig,
}

impl Default for PlateConfig {
    fn default() -> Self {
        let p = PlateParams::default();
        Self {
            n1: p.n1,
            n2: p.n2,
            l1: p.l1,
            l2: p.l2,
            nu: p.nu,
            rho_c_h_c: p.rho_c_h_c,
            xi_c: p.xi_c,
            patches: PatchConfig::default(),
            piezo: PiezoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatchConfig {
    pub zp1: f64,
    pub zp2: Vec<f64>,
    pub lp1: f64,
    pub lp2: f64,
}

impl Default for PatchConfig {
    fn default() -> Self {
        let g = PatchGeometry::default();
        Self {
            zp1: g.zp1,
            zp2: g.zp2,
            lp1: g.lp1,
            lp2: g.lp2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiezoConfig {
    pub psi_p: f64,
    pub a1: f64,
    pub a2: f64,
    pub sigma: f64,
    pub rho_p_h_p: f64,
    pub xi_p: f64,
}

impl Default for PiezoConfig {
    fn default() -> Self {
        let p = PiezoParams::default();
        Self {
            psi_p: p.psi_p,
            a1: p.a1,
            a2: p.a2,
            sigma: p.sigma,
            rho_p_h_p: p.rho_p_h_p,
            xi_p: p.xi_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamConfig {
    pub n: usize,
    pub length: f64,
    pub rho_a: f64,
    pub ei: f64,
    pub actuators: [f64; 2],
}

impl Default for BeamConfig {
    fn default() -> Self {
        let b = BeamParams::default();
        Self {
            n: b.n,
            length: b.length,
            rho_a: b.rho_a,
            ei: b.ei,
            actuators: b.actuators,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub c: [f64; 2],
    pub jc34: f64,
    pub rc33: f64,
    pub rc34: f64,
    pub rc44: f64,
    pub mc: [[f64; 2]; 2],
    pub gc_lower: [[f64; 2]; 2],
}

impl From<ControllerGains> for GainsConfig {
    fn from(g: ControllerGains) -> Self {
        Self {
            c: g.c,
            jc34: g.jc34,
            rc33: g.rc33,
            rc34: g.rc34,
            rc44: g.rc44,
            mc: g.mc,
            gc_lower: g.gc_lower,
        }
    }
}

impl From<&GainsConfig> for ControllerGains {
    fn from(g: &GainsConfig) -> Self {
        Self {
            c: g.c,
            jc34: g.jc34,
            rc33: g.rc33,
            rc34: g.rc34,
            rc44: g.rc44,
            mc: g.mc,
            gc_lower: g.gc_lower,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub plate: GainsConfig,
    pub beam: GainsConfig,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            plate: ControllerGains::plate_default().into(),
            beam: ControllerGains::beam_default().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateShapeConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub zb1: f64,
}

impl Default for PlateShapeConfig {
    fn default() -> Self {
        match DesiredEquilibrium::plate_default() {
            DesiredEquilibrium::Plate { a, b, c, d, zb1 } => Self { a, b, c, d, zb1 },
            DesiredEquilibrium::Beam { .. } => unreachable!("plate default is a plate shape"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamShapeConfig {
    pub a: f64,
    pub b: f64,
}

impl Default for BeamShapeConfig {
    fn default() -> Self {
        match DesiredEquilibrium::beam_default() {
            DesiredEquilibrium::Beam { a, b } => Self { a, b },
            DesiredEquilibrium::Plate { .. } => unreachable!("beam default is a line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquilibriumConfig {
    pub plate: PlateShapeConfig,
    pub beam: BeamShapeConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    Rest,
    FundamentalMode { amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorChoice {
    Auto,
    Rk4,
    Exponential,
}

/// `"auto"` or a positive number of seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepChoice {
    Auto,
    Fixed(f64),
}

impl Serialize for StepChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for StepChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Self::Fixed(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for StepChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse::<f64>()
            .map(Self::Fixed)
            .map_err(|_| format!("expected \"auto\" or a number, got {s:?}"))
    }
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.inner()))
    })
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn invalid(path: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {reason}"))
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} must be positive")))
    }
}

fn finite(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} must be finite")))
    }
}

impl ScenarioConfig {
    /// Range checks with the offending key path in the message.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if let Some(s) = &self.scenario {
            s.parse::<ScenarioKind>().map_err(|e| invalid("scenario", e))?;
        }
        let p = &self.plate;
        for (k, n) in [("plate.n1", p.n1), ("plate.n2", p.n2), ("beam.n", self.beam.n)] {
            if n < MIN_NODES {
                return Err(invalid(k, format!("{n} nodes, need at least {MIN_NODES}")));
            }
        }
        if !(0.0..0.5).contains(&p.nu) {
            return Err(invalid("plate.nu", format!("{} outside [0, 0.5)", p.nu)));
        }
        for (k, v) in [
            ("plate.l1", p.l1),
            ("plate.l2", p.l2),
            ("plate.rho_c_h_c", p.rho_c_h_c),
            ("plate.xi_c", p.xi_c),
            ("plate.patches.lp1", p.patches.lp1),
            ("plate.patches.lp2", p.patches.lp2),
            ("plate.piezo.sigma", p.piezo.sigma),
            ("plate.piezo.rho_p_h_p", p.piezo.rho_p_h_p),
            ("plate.piezo.xi_p", p.piezo.xi_p),
            ("beam.length", self.beam.length),
            ("beam.rho_a", self.beam.rho_a),
            ("beam.ei", self.beam.ei),
        ] {
            positive(k, v)?;
        }
        if p.patches.zp2.len() != 2 {
            return Err(invalid("plate.patches.zp2", "exactly two patches are supported"));
        }
        finite("plate.patches.zp1", p.patches.zp1)?;
        for v in &p.patches.zp2 {
            finite("plate.patches.zp2", *v)?;
        }
        for (k, v) in [("plate.piezo.psi_p", p.piezo.psi_p), ("plate.piezo.a1", p.piezo.a1), ("plate.piezo.a2", p.piezo.a2)] {
            finite(k, v)?;
        }
        for a in self.beam.actuators {
            if !(a > 0.0 && a < self.beam.length) {
                return Err(invalid("beam.actuators", format!("{a} is not inside (0, {})", self.beam.length)));
            }
        }
        for (name, g) in [("plate", &self.controller.plate), ("beam", &self.controller.beam)] {
            for c in g.c {
                positive(&format!("controller.{name}.c"), c)?;
            }
            let rest = [g.jc34, g.rc33, g.rc34, g.rc44];
            for v in rest.iter().chain(g.mc.iter().flatten()).chain(g.gc_lower.iter().flatten()) {
                finite(&format!("controller.{name}"), *v)?;
            }
        }
        let e = &self.equilibrium;
        for v in [e.plate.a, e.plate.b, e.plate.c, e.plate.d, e.plate.zb1, e.beam.a, e.beam.b] {
            finite("equilibrium", v)?;
        }
        if let Some(InitialConfig::FundamentalMode { amplitude }) = self.initial {
            finite("initial.amplitude", amplitude)?;
        }
        if let StepChoice::Fixed(dt) = self.dt {
            positive("dt", dt)?;
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(invalid("safety", format!("{} outside (0, 1]", self.safety)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(invalid("t_final", format!("{} must be a non-negative time", self.t_final)));
        }
        if self.log_every == 0 {
            return Err(invalid("log_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn kind(&self) -> Result<ScenarioKind, CliError> {
        let name = self
            .scenario
            .as_deref()
            .ok_or_else(|| invalid("scenario", "no scenario given (use --scenario or the config key)"))?;
        name.parse().map_err(|e| invalid("scenario", e))
    }

    pub fn plate_params(&self) -> PlateParams {
        let p = &self.plate;
        PlateParams {
            n1: p.n1,
            n2: p.n2,
            l1: p.l1,
            l2: p.l2,
            nu: p.nu,
            rho_c_h_c: p.rho_c_h_c,
            xi_c: p.xi_c,
            geometry: PatchGeometry {
                zp1: p.patches.zp1,
                zp2: p.patches.zp2.clone(),
                lp1: p.patches.lp1,
                lp2: p.patches.lp2,
            },
            piezo: PiezoParams {
                psi_p: p.piezo.psi_p,
                a1: p.piezo.a1,
                a2: p.piezo.a2,
                sigma: p.piezo.sigma,
                rho_p_h_p: p.piezo.rho_p_h_p,
                xi_p: p.piezo.xi_p,
            },
        }
    }

    pub fn beam_params(&self) -> BeamParams {
        let b = &self.beam;
        BeamParams {
            n: b.n,
            length: b.length,
            rho_a: b.rho_a,
            ei: b.ei,
            actuators: b.actuators,
        }
    }

    /// Core parameters for the scenario.
    pub fn to_params(&self) -> Result<ScenarioParams, CliError> {
        self.validate()?;
        let kind = self.kind()?;
        let e = &self.equilibrium;
        let initial = match self.initial {
            None => ScenarioParams::default_initial(kind),
            Some(InitialConfig::Rest) => InitialCondition::Rest,
            Some(InitialConfig::FundamentalMode { amplitude }) => InitialCondition::FundamentalMode { amplitude },
        };
        let integrator = match self.integrator {
            IntegratorChoice::Auto => ScenarioParams::default_integrator(kind),
            IntegratorChoice::Rk4 => Integrator::Rk4,
            IntegratorChoice::Exponential => Integrator::Exponential,
        };
        Ok(ScenarioParams {
            kind,
            plate: self.plate_params(),
            beam: self.beam_params(),
            plate_gains: (&self.controller.plate).into(),
            beam_gains: (&self.controller.beam).into(),
            plate_eq: DesiredEquilibrium::Plate {
                a: e.plate.a,
                b: e.plate.b,
                c: e.plate.c,
                d: e.plate.d,
                zb1: e.plate.zb1,
            },
            beam_eq: DesiredEquilibrium::Beam { a: e.beam.a, b: e.beam.b },
            initial,
            safety: self.safety,
            integrator,
        })
    }
}
