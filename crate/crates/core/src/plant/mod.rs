//! Semi-discretized port-Hamiltonian plants.
//!
//! Both plants share the discrete structure
//!
//! ```text
//! ẇ = p / m,   ṗ = −W⁻¹K w + Σ_k g_k u_k,   y_k = Σ_i W_i g_k,i ẇ_i
//! ```
//!
//! with nodal masses `m`, trapezoid weights `W`, a PSD stiffness `K` built
//! from a [`QuadraticEnergy`], and input fields `g_k`. Nodes where the
//! kinematic constraint pins the deflection carry zero rates.

pub mod beam;
pub mod patch;
pub mod plate;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::energy::QuadraticEnergy;
use crate::error::{check_finite, Error, Result};
use crate::grid::{dot_weighted, Field, Grid};

pub use beam::{BeamParams, BeamPlant};
pub use patch::{PatchGeometry, PiezoParams, Profile};
pub use plate::{GhostExtension, PlateParams, PlatePlant};

/// Plant state: deflection and momentum per node.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub w: Vec<f64>,
    pub p: Vec<f64>,
}

impl PlantState {
    pub fn zeros(n: usize) -> Self {
        Self {
            w: vec![0.0; n],
            p: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscretePlant {
    grid: Grid,
    weights: Vec<f64>,
    mass: Vec<f64>,
    energy: QuadraticEnergy,
    inputs: Vec<Vec<f64>>,
    pinned: Vec<bool>,
}

impl DiscretePlant {
    pub(crate) fn new(
        grid: Grid,
        mass: Vec<f64>,
        energy: QuadraticEnergy,
        inputs: Vec<Vec<f64>>,
        pinned: Vec<bool>,
    ) -> Self {
        let n = grid.node_count();
        debug_assert!(mass.len() == n && energy.len() == n && pinned.len() == n);
        debug_assert!(inputs.iter().all(|g| g.len() == n));
        Self {
            weights: grid.weights(),
            grid,
            mass,
            energy,
            inputs,
            pinned,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn node_count(&self) -> usize {
        self.mass.len()
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn energy(&self) -> &QuadraticEnergy {
        &self.energy
    }

    pub fn is_pinned(&self, k: usize) -> bool {
        self.pinned[k]
    }

    fn check_state(&self, s: &PlantState) -> Result<()> {
        let n = self.node_count();
        for len in [s.w.len(), s.p.len()] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: len,
                });
            }
        }
        check_finite(&s.w, "w")?;
        check_finite(&s.p, "p")
    }

    /// δ_p H = p/m, zero at pinned nodes.
    pub fn velocity(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(&self.mass)
            .zip(&self.pinned)
            .map(|((p, m), pin)| if *pin { 0.0 } else { p / m })
            .collect()
    }

    /// δ_w H = W⁻¹K w.
    pub fn elastic_force(&self, w: &[f64]) -> Vec<f64> {
        let mut kw = vec![0.0; w.len()];
        self.energy.apply(w, &mut kw);
        kw.iter_mut().zip(&self.weights).for_each(|(v, q)| *v /= q);
        kw
    }

    /// Returns (ẇ, ṗ).
    pub fn rhs(&self, s: &PlantState, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_state(s)?;
        self.check_inputs(u)?;
        let wdot = self.velocity(&s.p);
        let mut pdot = self.elastic_force(&s.w);
        for (k, v) in pdot.iter_mut().enumerate() {
            *v = -*v;
            for (g, uk) in self.inputs.iter().zip(u) {
                *v += g[k] * uk;
            }
        }
        self.apply_bcs(&mut pdot);
        Ok((wdot, pdot))
    }

    fn check_inputs(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.input_count() {
            return Err(Error::Dimension {
                expected: self.input_count(),
                got: u.len(),
            });
        }
        check_finite(u, "u")
    }

    /// Zeroes every pinned node.
    pub fn apply_bcs(&self, values: &mut [f64]) {
        for (v, pin) in values.iter_mut().zip(&self.pinned) {
            if *pin {
                *v = 0.0;
            }
        }
    }

    /// Port outputs y_k = ∫ g_k ẇ.
    pub fn outputs(&self, s: &PlantState) -> Result<Vec<f64>> {
        self.check_state(s)?;
        Ok(self.port_outputs(&self.velocity(&s.p)))
    }

    pub(crate) fn port_outputs(&self, wdot: &[f64]) -> Vec<f64> {
        self.inputs
            .iter()
            .map(|g| {
                g.iter()
                    .zip(wdot)
                    .zip(&self.weights)
                    .map(|((g, v), q)| g * v * q)
                    .sum()
            })
            .collect()
    }

    pub fn kinetic_energy(&self, p: &[f64]) -> f64 {
        0.5 * p
            .iter()
            .zip(&self.mass)
            .zip(&self.weights)
            .map(|((p, m), q)| q * p * p / m)
            .sum::<f64>()
    }

    pub fn hamiltonian(&self, s: &PlantState) -> f64 {
        self.kinetic_energy(&s.p) + self.energy.energy(&s.w)
    }

    /// Chain-rule rate of H along (ẇ, ṗ).
    pub fn energy_rate(&self, s: &PlantState, wdot: &[f64], pdot: &[f64]) -> f64 {
        let v = self.velocity(&s.p);
        self.energy.directional(&s.w, wdot)
            + dot_weighted(
                &self.weights,
                &v.iter().zip(pdot).map(|(a, b)| a * b).collect::<Vec<_>>(),
            )
    }

    /// Lowest flexible mode: angular frequency and shape scaled to unit max.
    pub fn fundamental_mode(&self) -> Result<(f64, Vec<f64>)> {
        let free: Vec<usize> = (0..self.node_count()).filter(|k| !self.pinned[*k]).collect();
        let k = self.energy.to_dense();
        let s: Vec<f64> = free
            .iter()
            .map(|i| 1.0 / (self.weights[*i] * self.mass[*i]).sqrt())
            .collect();
        let nf = free.len();
        let a = DMatrix::from_fn(nf, nf, |r, c| s[r] * k[(free[r], free[c])] * s[c]);
        let eig = SymmetricEigen::new(a);
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
        let (idx, lam) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 1e-9 * top)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(Error::NotPositiveDefinite("stiffness"))?;
        let mut shape = vec![0.0; self.node_count()];
        for (r, node) in free.iter().enumerate() {
            shape[*node] = eig.eigenvectors[(r, idx)] * s[r];
        }
        let peak = shape.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sign = shape
            .iter()
            .find(|v| v.abs() > 0.5 * peak)
            .map_or(1.0, |v| v.signum());
        shape.iter_mut().for_each(|v| *v *= sign / peak);
        Ok((lam.sqrt(), shape))
    }
}

/// Common surface of the concrete plants.
pub trait PlantModel {
    fn discrete(&self) -> &DiscretePlant;

    /// ω_max estimate sqrt(max rigidity / min mass)·Σ 4/h².
    fn omega_max_estimate(&self) -> f64;

    /// The desired-shape-independent kinematic constraint applied to `w`.
    fn apply_bcs(&self, w: &mut [f64]) {
        self.discrete().apply_bcs(w);
    }

    fn field(&self, values: Vec<f64>) -> Result<Field> {
        Field::new(*self.discrete().grid(), values)
    }
}

/// RK4 step bound safety·2√2/ω_max.
pub fn stability_dt(plant: &impl PlantModel, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "safety".into(),
            reason: format!("{safety} outside (0, 1]"),
        });
    }
    Ok(safety * 2.0 * 2f64.sqrt() / plant.omega_max_estimate())
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MIN, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MAX, f64::min)
}
