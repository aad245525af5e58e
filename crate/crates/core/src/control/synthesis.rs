//! Controller synthesis for the plate and beam examples, the desired shapes
//! and the static feedforward for the plate equilibrium.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_finite, Error, Result};
use crate::grid::{Field, Grid2D};
use crate::plant::{BeamPlant, DiscretePlant, PlantModel, PlatePlant};

use super::casimir::CasimirSpec;
use super::controller::{Controller, ControllerHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesiredEquilibrium {
    /// a(z¹)²k(z²) left of z_b¹, (b(z¹−z_b¹) + a(z_b¹)²)k(z²) right of it,
    /// with k(z²) = −c + d z².
    Plate { a: f64, b: f64, c: f64, d: f64, zb1: f64 },
    /// a z¹ + b.
    Beam { a: f64, b: f64 },
}

impl DesiredEquilibrium {
    pub fn plate_default() -> Self {
        Self::Plate {
            a: 0.16,
            b: 0.12,
            c: 1.0,
            d: 2.0,
            zb1: 0.5,
        }
    }

    pub fn beam_default() -> Self {
        Self::Beam { a: 0.1, b: 0.05 }
    }

    fn coefficients(&self) -> Vec<f64> {
        match *self {
            Self::Plate { a, b, c, d, zb1 } => vec![a, b, c, d, zb1],
            Self::Beam { a, b } => vec![a, b],
        }
    }

    /// Slope jump of the plate shape at z_b¹ (2a z_b¹ − b), zero for the beam.
    pub fn slope_mismatch(&self) -> f64 {
        match *self {
            Self::Plate { a, b, zb1, .. } => 2.0 * a * zb1 - b,
            Self::Beam { .. } => 0.0,
        }
    }
}

/// Gains for the two-state damping block (controller states 3, 4).
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGains {
    pub c: [f64; 2],
    pub jc34: f64,
    pub rc33: f64,
    pub rc34: f64,
    pub rc44: f64,
    pub mc: [[f64; 2]; 2],
    /// Rows 3 and 4 of Gc.
    pub gc_lower: [[f64; 2]; 2],
}

impl ControllerGains {
    pub fn plate_default() -> Self {
        Self {
            c: [0.1, 0.1],
            jc34: 1.0,
            rc33: 200.0,
            rc34: -1.0,
            rc44: 150.0,
            mc: [[1e4, 0.0], [0.0, 1e4]],
            gc_lower: [[100.0, 0.0], [100.0, 0.0]],
        }
    }

    /// The beam example lists no gains; these damp both actuated points
    /// independently.
    pub fn beam_default() -> Self {
        Self {
            c: [1.0, 1.0],
            jc34: 0.0,
            rc33: 0.5,
            rc34: 0.0,
            rc44: 0.5,
            mc: [[100.0, 0.0], [0.0, 100.0]],
            gc_lower: [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

/// Nodal samples of the desired plate shape.
pub fn desired_plate_shape(eq: &DesiredEquilibrium, grid: &Grid2D) -> Result<Field> {
    check_finite(&eq.coefficients(), "equilibrium")?;
    let DesiredEquilibrium::Plate { a, b, c, d, zb1 } = *eq else {
        return Err(Error::InvalidParameter {
            name: "equilibrium".into(),
            reason: "plate shape needs plate coefficients".into(),
        });
    };
    Ok(Field::from_fn_2d(*grid, |z1, z2| {
        let k = -c + d * z2;
        if z1 < zb1 {
            a * z1 * z1 * k
        } else {
            (b * (z1 - zb1) + a * zb1 * zb1) * k
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feedforward {
    pub us: Vec<f64>,
    /// ‖−δ_w H(w^d) + Σ g u_s‖₂ over the unpinned nodes.
    pub residual: f64,
}

/// Least-squares inputs making `wd` as close to a discrete static
/// equilibrium as the input fields allow.
pub fn compute_feedforward(plant: &DiscretePlant, wd: &[f64]) -> Result<Feedforward> {
    let n = plant.node_count();
    if wd.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: wd.len(),
        });
    }
    check_finite(wd, "wd")?;
    if let Some(k) = (0..n).find(|k| plant.is_pinned(*k) && wd[*k] != 0.0) {
        return Err(Error::InvalidParameter {
            name: "wd".into(),
            reason: format!("violates the kinematic constraint at node {k}"),
        });
    }
    let rows: Vec<usize> = (0..n).filter(|k| !plant.is_pinned(*k)).collect();
    let force = plant.elastic_force(wd);
    let l = plant.input_count();
    let a = DMatrix::from_fn(rows.len(), l, |r, c| plant.inputs()[c][rows[r]]);
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|k| force[*k]));
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    if l > 0 && (top == 0.0 || svd.singular_values.min() <= 1e-10 * top) {
        return Err(Error::RankDeficient(svd.singular_values.as_slice().to_vec()));
    }
    let us = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidParameter {
            name: "feedforward".into(),
            reason: e.to_string(),
        })?;
    let residual = (&a * &us - &rhs).norm();
    Ok(Feedforward {
        us: us.as_slice().to_vec(),
        residual,
    })
}

fn build(
    plant: &DiscretePlant,
    gains: &ControllerGains,
    gamma: Vec<Vec<f64>>,
    xcd: Vec<f64>,
    us: Vec<f64>,
    w0: &[f64],
) -> Result<(Controller, CasimirSpec)> {
    let g = gains;
    let ham = ControllerHamiltonian::new(
        g.c.to_vec(),
        xcd,
        us,
        DMatrix::from_fn(2, 2, |r, c| g.mc[r][c]),
    )?;
    let mut jc = DMatrix::zeros(4, 4);
    jc[(2, 3)] = g.jc34;
    jc[(3, 2)] = -g.jc34;
    let mut rc = DMatrix::zeros(4, 4);
    rc[(2, 2)] = g.rc33;
    rc[(2, 3)] = g.rc34;
    rc[(3, 2)] = g.rc34;
    rc[(3, 3)] = g.rc44;
    let mut gc = DMatrix::zeros(4, 2);
    gc[(0, 0)] = 1.0;
    gc[(1, 1)] = 1.0;
    for r in 0..2 {
        for c in 0..2 {
            gc[(2 + r, c)] = g.gc_lower[r][c];
        }
    }
    let spec = CasimirSpec::new(gamma, DMatrix::identity(2, 2))?;
    let mut xc = spec.matching_states(plant, w0);
    xc.resize(4, 0.0);
    let ctrl = Controller::new(jc, rc, gc, ham, xc)?;
    Ok((ctrl, spec))
}

fn check_initial(plant: &DiscretePlant, w0: &[f64]) -> Result<()> {
    if w0.len() != plant.node_count() {
        return Err(Error::Dimension {
            expected: plant.node_count(),
            got: w0.len(),
        });
    }
    check_finite(w0, "w0")
}

/// Plate controller with γ^λ = −g_{2λ}, K = I and x_c^{λ,d} = ∫ g_{2λ} w^d.
/// The controller starts where every Casimir vanishes for the deflection `w0`.
pub fn synthesize_plate_controller(
    plant: &PlatePlant,
    eq: &DesiredEquilibrium,
    gains: &ControllerGains,
    w0: &[f64],
) -> Result<(Controller, CasimirSpec, Feedforward)> {
    let d = plant.discrete();
    check_initial(d, w0)?;
    let wd = desired_plate_shape(eq, plant.grid())?;
    let ff = compute_feedforward(d, wd.values())?;
    let gamma: Vec<Vec<f64>> = d.inputs().iter().map(|g| g.iter().map(|v| -v).collect()).collect();
    let xcd = d
        .inputs()
        .iter()
        .map(|g| g.iter().zip(wd.values()).zip(d.weights()).map(|((g, w), q)| g * w * q).sum())
        .collect();
    let (ctrl, spec) = build(d, gains, gamma, xcd, ff.us.clone(), w0)?;
    Ok((ctrl, spec, ff))
}

/// Beam controller with C^λ = −δ_{A_λ} w, K = I and x_c^{λ,d} = aA_λ + b.
pub fn synthesize_beam_controller(
    plant: &BeamPlant,
    eq: &DesiredEquilibrium,
    gains: &ControllerGains,
    w0: &[f64],
) -> Result<(Controller, CasimirSpec)> {
    let d = plant.discrete();
    check_initial(d, w0)?;
    check_finite(&eq.coefficients(), "equilibrium")?;
    let DesiredEquilibrium::Beam { a, b } = *eq else {
        return Err(Error::InvalidParameter {
            name: "equilibrium".into(),
            reason: "beam controller needs line coefficients".into(),
        });
    };
    let gamma: Vec<Vec<f64>> = d.inputs().iter().map(|g| g.iter().map(|v| -v).collect()).collect();
    let xcd = plant
        .actuator_nodes()
        .iter()
        .map(|i| a * plant.grid().coord(*i) + b)
        .collect();
    build(d, gains, gamma, xcd, vec![0.0; 2], w0)
}

/// Deflection of the desired beam line at every node.
pub fn desired_beam_shape(eq: &DesiredEquilibrium, plant: &BeamPlant) -> Result<Field> {
    let DesiredEquilibrium::Beam { a, b } = *eq else {
        return Err(Error::InvalidParameter {
            name: "equilibrium".into(),
            reason: "beam shape needs line coefficients".into(),
        });
    };
    Ok(Field::from_fn_1d(*plant.grid(), |z| a * z + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::casimir::{casimir_residuals_prop1, casimir_residuals_prop2};
    use crate::plant::{BeamParams, PlateParams};
    use approx::assert_abs_diff_eq;

    fn plate() -> PlatePlant {
        PlatePlant::new(PlateParams::default()).unwrap()
    }

    #[test]
    fn plate_shape_values() {
        let g = Grid2D::new(21, 21, 1.0, 1.0).unwrap();
        let eq = DesiredEquilibrium::plate_default();
        let w = desired_plate_shape(&eq, &g).unwrap();
        assert_eq!(w.values()[g.index(0, 7)], 0.0);
        assert_abs_diff_eq!(w.values()[g.index(10, 20)], 0.04, epsilon = 1e-15);
        assert_abs_diff_eq!(eq.slope_mismatch(), 0.04, epsilon = 1e-15);
    }

    #[test]
    fn plate_shape_is_continuous_at_breakpoint() {
        let (a, b, zb) = (0.16, 0.12, 0.5);
        for z2 in [0.0, 0.3, 1.0] {
            let k = -1.0 + 2.0 * z2;
            let left = a * zb * zb * k;
            let right = (b * 0.0 + a * zb * zb) * k;
            assert_eq!(left, right);
        }
    }

    #[test]
    fn zero_shape_needs_no_feedforward() {
        let p = plate();
        let ff = compute_feedforward(p.discrete(), &vec![0.0; 441]).unwrap();
        assert_eq!(ff.us, vec![0.0, 0.0]);
        assert_eq!(ff.residual, 0.0);
        let b = BeamPlant::new(BeamParams::default()).unwrap();
        let line: Vec<f64> = b.grid().coords().iter().map(|z| 0.3 * z - 0.2).collect();
        let ff = compute_feedforward(b.discrete(), &line).unwrap();
        assert!(ff.us.iter().all(|u| u.abs() < 1e-9), "{:?}", ff.us);
    }

    #[test]
    fn plate_feedforward_is_pinned() {
        let p = plate();
        let wd = desired_plate_shape(&DesiredEquilibrium::plate_default(), p.grid()).unwrap();
        let ff = compute_feedforward(p.discrete(), wd.values()).unwrap();
        // least-squares oracle value at 20 intervals per side, first computation
        assert_abs_diff_eq!(ff.us[0], PLATE_US[0], epsilon = 1e-9);
        assert_abs_diff_eq!(ff.us[1], PLATE_US[1], epsilon = 1e-9);
        assert!(ff.residual.is_finite() && ff.residual > 0.0);
    }

    const PLATE_US: [f64; 2] = [0.236_232_308_571_8, -0.236_232_308_571_8];

    #[test]
    fn paper_gains_synthesize_and_verify() {
        let p = plate();
        let (ctrl, spec, _) = synthesize_plate_controller(
            &p,
            &DesiredEquilibrium::plate_default(),
            &ControllerGains::plate_default(),
            &vec![0.0; 441],
        )
        .unwrap();
        let rc = ctrl.rc().view((2, 2), (2, 2)).into_owned();
        assert_eq!(rc, DMatrix::from_row_slice(2, 2, &[200.0, -1.0, -1.0, 150.0]));
        let jr = ctrl.jc() - ctrl.rc();
        assert!(jr.rows(0, 2).iter().all(|v| *v == 0.0) && jr.columns(0, 2).iter().all(|v| *v == 0.0));
        let rep = casimir_residuals_prop1(&p, &ctrl, &spec).unwrap();
        assert!(rep.passes(), "{rep:?}");
    }

    #[test]
    fn indefinite_damping_is_rejected() {
        let p = plate();
        let gains = ControllerGains {
            rc33: -1.0,
            ..ControllerGains::plate_default()
        };
        let r = synthesize_plate_controller(&p, &DesiredEquilibrium::plate_default(), &gains, &vec![0.0; 441]);
        assert_eq!(r.unwrap_err(), Error::NotPositiveSemiDefinite("Rc"));
    }

    #[test]
    fn beam_targets() {
        let b = BeamPlant::new(BeamParams::default()).unwrap();
        let gains = ControllerGains::beam_default();
        let (c0, _) =
            synthesize_beam_controller(&b, &DesiredEquilibrium::Beam { a: 0.0, b: 0.0 }, &gains, &[0.0; 21]).unwrap();
        assert_eq!(c0.hamiltonian().minimizer(), vec![0.0; 4]);
        let (c, spec) =
            synthesize_beam_controller(&b, &DesiredEquilibrium::Beam { a: 0.1, b: 0.05 }, &gains, &[0.0; 21]).unwrap();
        assert_abs_diff_eq!(c.hamiltonian().xcd()[0], 0.08, epsilon = 1e-15);
        assert!(casimir_residuals_prop2(&b, &c, &spec).unwrap().passes());
    }
}
