//! Free-free Euler-Bernoulli beam driven by two point forces.
//!
//! Curvature terms are kept only at interior nodes: the free ends carry no
//! moment, so every affine deflection is force-free. The point forces act
//! through nodal indicators scaled by 1/h, which integrate to one under the
//! trapezoid rule.

use crate::energy::QuadraticEnergy;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Grid1D};
use crate::variational::QuadraticDensity1D;

use super::{max_of, min_of, DiscretePlant, PlantModel, PlantState};

#[derive(Debug, Clone, PartialEq)]
pub struct BeamParams {
    pub n: usize,
    pub length: f64,
    pub rho_a: f64,
    pub ei: f64,
    /// Actuation points A₁, A₂.
    pub actuators: [f64; 2],
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            n: 21,
            length: 1.0,
            rho_a: 1.0,
            ei: 1.0,
            actuators: [0.3, 0.7],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BeamPlant {
    params: BeamParams,
    grid: Grid1D,
    density: QuadraticDensity1D,
    nodes: [usize; 2],
    discrete: DiscretePlant,
}

impl BeamPlant {
    pub fn new(params: BeamParams) -> Result<Self> {
        let grid = Grid1D::new(params.n, params.length)?;
        let density = QuadraticDensity1D::new(
            Field::constant(grid, params.rho_a),
            Field::constant(grid, params.ei),
        )?;
        let mut nodes = [0; 2];
        for (slot, a) in nodes.iter_mut().zip(params.actuators) {
            *slot = grid
                .node_at(a)
                .filter(|i| *i > 0 && *i + 1 < grid.n())
                .ok_or(Error::OffGridActuator { position: a })?;
        }
        if nodes[0] == nodes[1] {
            return Err(Error::InvalidParameter {
                name: "actuators".into(),
                reason: "A1 and A2 coincide".into(),
            });
        }
        let h = grid.spacing();
        let weights = grid.weights();
        let mut energy = QuadraticEnergy::new(grid.n());
        let c = 1.0 / (h * h);
        for i in 1..grid.n() - 1 {
            energy.push(
                weights[i] * density.ei().values()[i],
                &[(i - 1, c), (i, -2.0 * c), (i + 1, c)],
            );
        }
        let inputs = nodes
            .iter()
            .map(|a| {
                let mut g = vec![0.0; grid.n()];
                g[*a] = 1.0 / h;
                g
            })
            .collect();
        let discrete = DiscretePlant::new(
            Grid::Line(grid),
            density.rho_a().values().to_vec(),
            energy,
            inputs,
            vec![false; grid.n()],
        );
        Ok(Self {
            params,
            grid,
            density,
            nodes,
            discrete,
        })
    }

    pub fn params(&self) -> &BeamParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn density(&self) -> &QuadraticDensity1D {
        &self.density
    }

    /// Node indices of A₁, A₂.
    pub fn actuator_nodes(&self) -> [usize; 2] {
        self.nodes
    }

    pub fn beam_rhs(&self, s: &PlantState, u: &[f64]) -> Result<(Field, Field)> {
        let (wd, pd) = self.discrete.rhs(s, u)?;
        Ok((Field::new(self.grid, wd)?, Field::new(self.grid, pd)?))
    }

    /// Collocated velocities ẇ(A₁), ẇ(A₂).
    pub fn beam_outputs(&self, s: &PlantState) -> Result<[f64; 2]> {
        let y = self.discrete.outputs(s)?;
        Ok([y[0], y[1]])
    }
}

impl PlantModel for BeamPlant {
    fn discrete(&self) -> &DiscretePlant {
        &self.discrete
    }

    fn omega_max_estimate(&self) -> f64 {
        let h = self.grid.spacing();
        (max_of(self.density.ei().values()) / min_of(self.density.rho_a().values())).sqrt() * 4.0
            / (h * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::stability_dt;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn plant() -> BeamPlant {
        BeamPlant::new(BeamParams::default()).unwrap()
    }

    #[test]
    fn affine_shapes_are_stationary() {
        let b = plant();
        let w: Vec<f64> = b.grid().coords().iter().map(|z| 0.4 * z - 0.1).collect();
        let s = PlantState {
            w,
            p: vec![0.0; 21],
        };
        let (wd, pd) = b.beam_rhs(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(wd.max_abs(), 0.0);
        assert!(pd.max_abs() < 1e-9);
    }

    #[test]
    fn unit_force_is_a_single_impulse() {
        let b = plant();
        let (_, pd) = b.beam_rhs(&PlantState::zeros(21), &[1.0, 0.0]).unwrap();
        for (i, v) in pd.values().iter().enumerate() {
            if i == 6 {
                assert_abs_diff_eq!(*v, 20.0, epsilon = 1e-12);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn outputs_and_energy() {
        let b = plant();
        assert_eq!(b.beam_outputs(&PlantState::zeros(21)).unwrap(), [0.0, 0.0]);
        let s = PlantState {
            w: vec![0.0; 21],
            p: vec![1.0; 21],
        };
        let y = b.beam_outputs(&s).unwrap();
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-14);
        let c = 3.0;
        let s = PlantState {
            w: vec![0.0; 21],
            p: vec![c; 21],
        };
        assert_abs_diff_eq!(b.discrete().hamiltonian(&s), c * c / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn actuators_must_sit_on_interior_nodes() {
        let mk = |a| {
            BeamPlant::new(BeamParams {
                actuators: a,
                ..BeamParams::default()
            })
        };
        assert!(matches!(mk([0.33, 0.7]), Err(Error::OffGridActuator { .. })));
        assert!(matches!(mk([0.0, 0.7]), Err(Error::OffGridActuator { .. })));
        assert!(mk([0.3, 0.3]).is_err());
    }

    #[test]
    fn step_bound_and_spectrum() {
        let b = plant();
        let h: f64 = 0.05;
        assert_abs_diff_eq!(
            stability_dt(&b, 0.8).unwrap(),
            0.8 * 2.0 * 2f64.sqrt() * h * h / 4.0,
            epsilon = 1e-15
        );
        let (w1, _) = b.discrete().fundamental_mode().unwrap();
        // free-free first flexible mode: (4.730)² ≈ 22.37
        assert!((w1 - 22.37).abs() < 0.5, "{w1}");
    }

    proptest! {
        #[test]
        fn affine_null_space(a in -10.0f64..10.0, c in -10.0f64..10.0, seed in proptest::collection::vec(-1.0f64..1.0, 21)) {
            let b = plant();
            let w2: Vec<f64> = seed.iter().zip(b.grid().coords()).map(|(s, z)| s + a * z + c).collect();
            let f1 = b.discrete().elastic_force(&seed);
            let f2 = b.discrete().elastic_force(&w2);
            for (x, y) in f1.iter().zip(&f2) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()) * (1.0 + a.abs() + c.abs()));
            }
        }
    }
}
