//! Kirchhoff-Love plate clamped along ∂B₁ (z¹ = 0), free on ∂B₂–∂B₄,
//! actuated by bonded piezo patches.
//!
//! The bending energy is assembled node by node from curvatures in which the
//! boundary conditions have already eliminated the ghost values:
//! clamped nodes use the mirror ghost (zero slope), free edges drop the
//! normal curvature through the vanishing-moment condition, and free-free
//! corners carry no curvature. The twist term lives on cell centres.

use crate::energy::QuadraticEnergy;
use crate::error::{Error, Result};
use crate::grid::{Edge, Field, Grid, Grid2D};
use crate::variational::QuadraticDensity2D;

use super::patch::{characteristic_function, input_distribution, PatchGeometry, PiezoParams, Profile};
use super::{max_of, min_of, DiscretePlant, PlantModel, PlantState};

#[derive(Debug, Clone, PartialEq)]
pub struct PlateParams {
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
    pub nu: f64,
    /// Carrier areal mass ρ_c h_c.
    pub rho_c_h_c: f64,
    /// Carrier rigidity E_c I_c.
    pub xi_c: f64,
    pub geometry: PatchGeometry,
    pub piezo: PiezoParams,
}

impl Default for PlateParams {
    fn default() -> Self {
        Self {
            n1: 21,
            n2: 21,
            l1: 1.0,
            l2: 1.0,
            nu: 0.2,
            rho_c_h_c: 1.0,
            xi_c: 1.0,
            geometry: PatchGeometry::default(),
            piezo: PiezoParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlatePlant {
    params: PlateParams,
    grid: Grid2D,
    density: QuadraticDensity2D,
    gammas: Vec<Field>,
    g: Vec<Field>,
    discrete: DiscretePlant,
}

impl PlatePlant {
    pub fn new(params: PlateParams) -> Result<Self> {
        let grid = Grid2D::new(params.n1, params.n2, params.l1, params.l2)?;
        for (name, v) in [
            ("rho_c_h_c", params.rho_c_h_c),
            ("xi_c", params.xi_c),
            ("rho_p_h_p", params.piezo.rho_p_h_p),
            ("xi_p", params.piezo.xi_p),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("{v} is not a non-negative number"),
                });
            }
        }
        let geom = &params.geometry;
        let gammas = (0..geom.count())
            .map(|k| characteristic_function(geom, k, &grid, Profile::Smooth, params.piezo.sigma))
            .collect::<Result<Vec<_>>>()?;
        let g = (0..geom.count())
            .map(|k| input_distribution(geom, k, &params.piezo, &grid, Profile::Smooth))
            .collect::<Result<Vec<_>>>()?;
        let cover: Vec<f64> = (0..grid.node_count())
            .map(|k| gammas.iter().map(|f| f.values()[k]).sum())
            .collect();
        let mu = Field::new(
            grid,
            cover
                .iter()
                .map(|c| params.rho_c_h_c + 2.0 * params.piezo.rho_p_h_p * c)
                .collect(),
        )?;
        let xi = Field::new(
            grid,
            cover
                .iter()
                .map(|c| params.xi_c + 2.0 * params.piezo.xi_p * c)
                .collect(),
        )?;
        let density = QuadraticDensity2D::new(mu, xi, params.nu)?;
        let energy = bending_energy(&grid, density.xi().values(), params.nu);
        let pinned = (0..grid.node_count()).map(|k| k % grid.n1() == 0).collect();
        let discrete = DiscretePlant::new(
            Grid::Rect(grid),
            density.mu().values().to_vec(),
            energy,
            g.iter().map(|f| f.values().to_vec()).collect(),
            pinned,
        );
        Ok(Self {
            params,
            grid,
            density,
            gammas,
            g,
            discrete,
        })
    }

    pub fn params(&self) -> &PlateParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn density(&self) -> &QuadraticDensity2D {
        &self.density
    }

    /// Γ_k with the smooth profile.
    pub fn patch_profile(&self, k: usize) -> &Field {
        &self.gammas[k]
    }

    /// g_{2k}.
    pub fn input_field(&self, k: usize) -> &Field {
        &self.g[k]
    }

    /// Resolution warning: the tanh transition (≈ 4/σ) spans less than a cell.
    pub fn sigma_warning(&self) -> Option<String> {
        let sh = self.params.piezo.sigma * self.grid.h1().max(self.grid.h2());
        (sh > 4.0).then(|| format!("sigma*h = {sh:.3} exceeds 4; patch edges are under-resolved"))
    }

    /// (ẇ, ṗ) for inputs `u`.
    pub fn plate_rhs(&self, s: &PlantState, u: &[f64]) -> Result<(Field, Field)> {
        let (wd, pd) = self.discrete.rhs(s, u)?;
        Ok((Field::new(self.grid, wd)?, Field::new(self.grid, pd)?))
    }

    /// Output densities g_{2k}·ẇ.
    pub fn plate_outputs(&self, s: &PlantState) -> Result<Vec<Field>> {
        let v = self.discrete.velocity(&s.p);
        crate::error::check_finite(&v, "p")?;
        self.g
            .iter()
            .map(|g| Field::new(self.grid, g.values().iter().zip(&v).map(|(a, b)| a * b).collect()))
            .collect()
    }

    /// Deflection extended by one ghost layer consistent with the boundary
    /// conditions built into the stiffness.
    pub fn ghost_extend(&self, w: &[f64]) -> Result<GhostExtension> {
        if w.len() != self.grid.node_count() {
            return Err(Error::Dimension {
                expected: self.grid.node_count(),
                got: w.len(),
            });
        }
        Ok(GhostExtension::new(&self.grid, w, self.params.nu))
    }
}

impl PlantModel for PlatePlant {
    fn discrete(&self) -> &DiscretePlant {
        &self.discrete
    }

    fn omega_max_estimate(&self) -> f64 {
        let (h1, h2) = (self.grid.h1(), self.grid.h2());
        (max_of(self.density.xi().values()) / min_of(self.density.mu().values())).sqrt()
            * (4.0 / (h1 * h1) + 4.0 / (h2 * h2))
    }
}

type Row = Vec<(usize, f64)>;

fn scaled(row: &Row, s: f64) -> Row {
    row.iter().map(|(k, c)| (*k, c * s)).collect()
}

fn sum(a: &Row, b: &Row) -> Row {
    a.iter().chain(b).cloned().collect()
}

/// Boundary-aware curvature rows (κ20, κ02) at node (i, j).
fn curvature_rows(g: &Grid2D, i: usize, j: usize, nu: f64) -> (Row, Row) {
    let (n1, n2) = (g.n1(), g.n2());
    let (c1, c2) = (1.0 / (g.h1() * g.h1()), 1.0 / (g.h2() * g.h2()));
    let at = |a: usize, b: usize| g.index(a, b);
    let free1 = i == n1 - 1;
    let free2 = j == 0 || j == n2 - 1;
    let raw20 = if i == 0 {
        // mirror ghost w(−1, j) = w(1, j)
        vec![(at(1, j), 2.0 * c1), (at(0, j), -2.0 * c1)]
    } else if !free1 {
        vec![(at(i - 1, j), c1), (at(i, j), -2.0 * c1), (at(i + 1, j), c1)]
    } else {
        Vec::new()
    };
    let raw02 = if !free2 {
        vec![(at(i, j - 1), c2), (at(i, j), -2.0 * c2), (at(i, j + 1), c2)]
    } else {
        Vec::new()
    };
    match (free1, free2) {
        (true, true) => (Vec::new(), Vec::new()),
        (true, false) => (scaled(&raw02, -nu), raw02),
        (false, true) => {
            let k02 = scaled(&raw20, -nu);
            (raw20, k02)
        }
        (false, false) => (raw20, raw02),
    }
}

fn bending_energy(g: &Grid2D, xi: &[f64], nu: f64) -> QuadraticEnergy {
    let weights = g.weights();
    let mut e = QuadraticEnergy::new(g.node_count());
    for j in 0..g.n2() {
        for i in 0..g.n1() {
            let k = g.index(i, j);
            let (k20, k02) = curvature_rows(g, i, j, nu);
            let c = weights[k] * xi[k];
            e.push(c, &sum(&k20, &scaled(&k02, nu)));
            e.push(c * (1.0 - nu * nu), &k02);
        }
    }
    let t = 1.0 / (g.h1() * g.h2());
    for j in 0..g.n2() - 1 {
        for i in 0..g.n1() - 1 {
            let corners = [g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)];
            let xc = 0.25 * corners.iter().map(|k| xi[*k]).sum::<f64>();
            e.push(
                g.h1() * g.h2() * xc * 2.0 * (1.0 - nu),
                &[
                    (corners[3], t),
                    (corners[1], -t),
                    (corners[2], -t),
                    (corners[0], t),
                ],
            );
        }
    }
    e
}

/// Deflection on an (n1+2)×(n2+2) grid: one ghost layer on every side.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostExtension {
    grid: Grid2D,
    values: Vec<f64>,
}

impl GhostExtension {
    fn new(g: &Grid2D, w: &[f64], nu: f64) -> Self {
        let (n1, n2) = (g.n1(), g.n2());
        let mut ext = Self {
            grid: *g,
            values: vec![0.0; (n1 + 2) * (n2 + 2)],
        };
        for j in 0..n2 {
            for i in 0..n1 {
                ext.set(i as isize, j as isize, w[g.index(i, j)]);
            }
        }
        let (h1, h2) = (g.h1(), g.h2());
        let wv = |i: usize, j: usize| w[g.index(i, j)];
        // interior-direction curvatures on the physical grid
        let k02 = |i: usize, j: usize| {
            if j == 0 || j == n2 - 1 {
                0.0
            } else {
                (wv(i, j - 1) - 2.0 * wv(i, j) + wv(i, j + 1)) / (h2 * h2)
            }
        };
        let k20 = |i: usize, j: usize| {
            if i == 0 {
                2.0 * (wv(1, j) - wv(0, j)) / (h1 * h1)
            } else if i == n1 - 1 {
                0.0
            } else {
                (wv(i - 1, j) - 2.0 * wv(i, j) + wv(i + 1, j)) / (h1 * h1)
            }
        };
        for j in 0..n2 {
            ext.set(-1, j as isize, wv(1, j));
            let ghost = 2.0 * wv(n1 - 1, j) - wv(n1 - 2, j) - nu * h1 * h1 * k02(n1 - 1, j);
            ext.set(n1 as isize, j as isize, ghost);
        }
        for i in 0..n1 {
            let lo = 2.0 * wv(i, 0) - wv(i, 1) - nu * h2 * h2 * k20(i, 0);
            let hi = 2.0 * wv(i, n2 - 1) - wv(i, n2 - 2) - nu * h2 * h2 * k20(i, n2 - 1);
            ext.set(i as isize, -1, lo);
            ext.set(i as isize, n2 as isize, hi);
        }
        ext
    }

    fn slot(&self, i: isize, j: isize) -> usize {
        let w = self.grid.n1() + 2;
        (j + 1) as usize * w + (i + 1) as usize
    }

    fn set(&mut self, i: isize, j: isize, v: f64) {
        let s = self.slot(i, j);
        self.values[s] = v;
    }

    /// Value at node (i, j); indices −1 and n address the ghost layer.
    pub fn get(&self, i: isize, j: isize) -> f64 {
        self.values[self.slot(i, j)]
    }

    /// Central normal slope on the clamped edge ∂B₁.
    pub fn clamped_slope(&self) -> Vec<f64> {
        let h1 = self.grid.h1();
        (0..self.grid.n2() as isize)
            .map(|j| (self.get(1, j) - self.get(-1, j)) / (2.0 * h1))
            .collect()
    }

    /// Bending moment along a free edge from central stencils on the
    /// extension, normalised by the local rigidity.
    pub fn edge_moment(&self, edge: Edge, nu: f64) -> Vec<f64> {
        let (n1, n2) = (self.grid.n1() as isize, self.grid.n2() as isize);
        let (h1, h2) = (self.grid.h1(), self.grid.h2());
        let k20 = |i, j| (self.get(i - 1, j) - 2.0 * self.get(i, j) + self.get(i + 1, j)) / (h1 * h1);
        let k02 = |i, j| (self.get(i, j - 1) - 2.0 * self.get(i, j) + self.get(i, j + 1)) / (h2 * h2);
        let along_z1 = |j: isize| (0..n1).map(|i| k02(i, j) + nu * k20(i, j)).collect();
        let along_z2 = |i: isize| (0..n2).map(|j| k20(i, j) + nu * k02(i, j)).collect();
        match edge {
            Edge::B1 => along_z2(0),
            Edge::B3 => along_z2(n1 - 1),
            Edge::B2 => along_z1(0),
            Edge::B4 => along_z1(n2 - 1),
        }
    }
}
