//! Piezo patch footprints and the input distributions they induce.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGeometry {
    pub zp1: f64,
    /// z²-offset of each patch.
    pub zp2: Vec<f64>,
    pub lp1: f64,
    pub lp2: f64,
}

impl Default for PatchGeometry {
    fn default() -> Self {
        Self {
            zp1: 0.25,
            zp2: vec![0.1, 0.65],
            lp1: 0.25,
            lp2: 0.25,
        }
    }
}

impl PatchGeometry {
    pub fn count(&self) -> usize {
        self.zp2.len()
    }

    /// Every patch must keep clear of the two-node closure band.
    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        let tol = 1e-12;
        for (k, zp2) in self.zp2.iter().enumerate() {
            let checks = [
                (self.zp1, self.lp1, grid.h1(), grid.l1(), "z1"),
                (*zp2, self.lp2, grid.h2(), grid.l2(), "z2"),
            ];
            for (start, len, h, l, axis) in checks {
                if !(len > 0.0 && start.is_finite()) {
                    return Err(Error::PatchOutsideDomain {
                        index: k,
                        reason: format!("non-positive extent along {axis}"),
                    });
                }
                let band = 2.0 * h;
                if start < band - tol || start + len > l - band + tol {
                    return Err(Error::PatchOutsideDomain {
                        index: k,
                        reason: format!(
                            "[{start}, {}] along {axis} leaves [{band}, {}]",
                            start + len,
                            l - band
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiezoParams {
    pub psi_p: f64,
    pub a1: f64,
    pub a2: f64,
    pub sigma: f64,
    pub rho_p_h_p: f64,
    pub xi_p: f64,
}

impl Default for PiezoParams {
    fn default() -> Self {
        Self {
            psi_p: 1.0,
            a1: 1.0,
            a2: 1.0,
            sigma: 100.0,
            rho_p_h_p: 1.0,
            xi_p: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Heaviside,
    Smooth,
}

fn window(z: f64, start: f64, len: f64, profile: Profile, sigma: f64) -> f64 {
    match profile {
        Profile::Heaviside => {
            let step = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
            step(z - start) - step(z - start - len)
        }
        Profile::Smooth => {
            0.5 * (sigma * (z - start)).tanh() - 0.5 * (sigma * (z - start - len)).tanh()
        }
    }
}

/// Γ_k sampled on the grid.
pub fn characteristic_function(
    geom: &PatchGeometry,
    k: usize,
    grid: &Grid2D,
    profile: Profile,
    sigma: f64,
) -> Result<Field> {
    geom.validate(grid)?;
    if profile == Profile::Smooth && !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: format!("{sigma} is not positive"),
        });
    }
    let zp2 = *geom.zp2.get(k).ok_or_else(|| Error::PatchOutsideDomain {
        index: k,
        reason: format!("only {} patches defined", geom.count()),
    })?;
    Ok(Field::from_fn_2d(*grid, |a, b| {
        window(a, geom.zp1, geom.lp1, profile, sigma) * window(b, zp2, geom.lp2, profile, sigma)
    }))
}

/// g_{2k} = −Ψ_p(a¹ d_[20]Γ_k + a² d_[02]Γ_k), using the smooth profile.
///
/// The smooth profile is defined beyond the plate, so every node uses the
/// centred second difference of the profile sampled one spacing outside the
/// grid where needed. One-sided closures would otherwise pick up a patch
/// edge lying two nodes from the boundary and leak it onto the free edge.
pub fn input_distribution(
    geom: &PatchGeometry,
    k: usize,
    piezo: &PiezoParams,
    grid: &Grid2D,
    profile: Profile,
) -> Result<Field> {
    if profile == Profile::Heaviside {
        return Err(Error::HeavisideDerivative);
    }
    // validates geometry and sigma
    characteristic_function(geom, k, grid, profile, piezo.sigma)?;
    let zp2 = geom.zp2[k];
    let s = piezo.sigma;
    let f1 = |z: f64| window(z, geom.zp1, geom.lp1, profile, s);
    let f2 = |z: f64| window(z, zp2, geom.lp2, profile, s);
    let (h1, h2) = (grid.h1(), grid.h2());
    let d2 = |f: &dyn Fn(f64) -> f64, z: f64, h: f64| (f(z - h) - 2.0 * f(z) + f(z + h)) / (h * h);
    Ok(Field::from_fn_2d(*grid, |a, b| {
        let d20 = d2(&f1, a, h1) * f2(b);
        let d02 = f1(a) * d2(&f2, b, h2);
        -piezo.psi_p * (piezo.a1 * d20 + piezo.a2 * d02)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{edge_nodes, integrate, Edge};
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n, 1.0, 1.0).unwrap()
    }

    fn at(f: &Field, g: &Grid2D, z1: f64, z2: f64) -> f64 {
        let i = g.axis1().node_at(z1).unwrap();
        let j = g.axis2().node_at(z2).unwrap();
        f.values()[g.index(i, j)]
    }

    #[test]
    fn heaviside_inside_and_outside() {
        let g = grid(81);
        let geom = PatchGeometry::default();
        let gam = characteristic_function(&geom, 0, &g, Profile::Heaviside, 100.0).unwrap();
        assert_eq!(at(&gam, &g, 0.375, 0.225), 1.0);
        assert_eq!(at(&gam, &g, 0.9, 0.9), 0.0);
        let gam2 = characteristic_function(&geom, 1, &g, Profile::Heaviside, 100.0).unwrap();
        assert_eq!(at(&gam2, &g, 0.375, 0.775), 1.0);
    }

    #[test]
    fn smooth_corner_value() {
        let v = window(0.25, 0.25, 0.25, Profile::Smooth, 100.0)
            * window(0.1, 0.1, 0.25, Profile::Smooth, 100.0);
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-3);
    }

    #[test]
    fn patch_must_fit() {
        let g = grid(21);
        let bad = PatchGeometry {
            zp1: 0.9,
            ..PatchGeometry::default()
        };
        assert!(matches!(
            characteristic_function(&bad, 0, &g, Profile::Smooth, 100.0),
            Err(Error::PatchOutsideDomain { index: 0, .. })
        ));
        let near_edge = PatchGeometry {
            zp2: vec![0.0, 0.65],
            ..PatchGeometry::default()
        };
        assert!(near_edge.validate(&g).is_err());
        assert!(PatchGeometry::default().validate(&g).is_ok());
    }

    #[test]
    fn heaviside_distribution_rejected() {
        let g = grid(21);
        let r = input_distribution(
            &PatchGeometry::default(),
            0,
            &PiezoParams::default(),
            &g,
            Profile::Heaviside,
        );
        assert_eq!(r, Err(Error::HeavisideDerivative));
    }

    #[test]
    fn distribution_has_zero_mean() {
        let g = grid(21);
        for k in 0..2 {
            let lam = input_distribution(
                &PatchGeometry::default(),
                k,
                &PiezoParams::default(),
                &g,
                Profile::Smooth,
            )
            .unwrap();
            let l1 = integrate(&lam.map(f64::abs)).unwrap();
            let m = integrate(&lam).unwrap();
            // Both patches end 0.1 from a free edge, so the tanh tail is still
            // 4.5e-5 one node in; the half-weight boundary row then carries a
            // quadrature defect of the size of the boundary mass.
            let weights = g.weights();
            let rim: f64 = Edge::ALL
                .iter()
                .flat_map(|e| edge_nodes(lam.grid(), *e).unwrap())
                .map(|k| weights[k] * lam.values()[k].abs())
                .sum();
            assert!(m.abs() <= 1e-6 * l1 + rim, "{m} vs {l1}, rim {rim}");
        }
        let zero = PiezoParams {
            psi_p: 0.0,
            ..PiezoParams::default()
        };
        let g0 =
            input_distribution(&PatchGeometry::default(), 0, &zero, &g, Profile::Smooth).unwrap();
        assert_eq!(g0.max_abs(), 0.0);
    }

    #[test]
    fn ridge_pattern_matches_dense_oracle() {
        // Λ = −g with a¹ = 1, a² = 0 is d²Γ/dz¹² times the z² window. The
        // continuous second derivative of the tanh window is the oracle.
        let sigma = 100.0;
        let (zp, lp) = (0.25, 0.25);
        let exact = |z: f64| {
            let s = |x: f64| {
                let t = (sigma * x).tanh();
                -sigma * sigma * t * (1.0 - t * t)
            };
            s(z - zp) - s(z - zp - lp)
        };
        let piezo = PiezoParams {
            a2: 0.0,
            ..PiezoParams::default()
        };
        let g = grid(161);
        let lam = input_distribution(&PatchGeometry::default(), 0, &piezo, &g, Profile::Smooth)
            .unwrap()
            .map(|v| -v);
        let j = g.axis2().node_at(0.225).unwrap();
        let peak = (0..400).map(|k| exact(k as f64 / 400.0).abs()).fold(0.0, f64::max);
        let mut compared = 0;
        for (i, z) in g.axis1().coords().iter().enumerate() {
            let e = exact(*z);
            if e.abs() > 0.2 * peak {
                assert_eq!(lam.values()[g.index(i, j)].signum(), e.signum(), "z = {z}");
                compared += 1;
            }
        }
        assert!(compared >= 4);
        // outside the patch edge the lobe is positive, just inside negative
        assert!(exact(0.25 - 0.008) > 0.0 && exact(0.25 + 0.008) < 0.0);
    }
}
