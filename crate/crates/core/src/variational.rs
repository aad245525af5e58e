//! Variational derivatives and boundary operators of the quadratic bending
//! densities, evaluated with the stencils from [`crate::grid`].
//!
//! 1D density: ½p²/ρA + ½EI (w_[2])².
//! 2D density: ½p²/μ + ½Ξ(w_[20]² + w_[02]² + 2ν w_[20]w_[02] + 2(1−ν)w_[11]²).

use crate::error::{Error, Result};
use crate::grid::{diff, dot_weighted, edge_nodes, Edge, Field, Grid, Grid2D, MultiIndex};

fn mi(orders: &[usize]) -> MultiIndex {
    MultiIndex::new(orders).expect("static multi-index")
}

fn d(f: &Field, orders: &[usize]) -> Result<Field> {
    diff(f, mi(orders))
}

fn positive(f: &Field, name: &str) -> Result<()> {
    f.check_finite()?;
    if let Some(v) = f.values().iter().find(|v| **v <= 0.0) {
        return Err(Error::InvalidParameter {
            name: name.to_string(),
            reason: format!("must be strictly positive, found {v}"),
        });
    }
    Ok(())
}

/// Anything with a kinetic term ½p²/m.
pub trait Density {
    fn mass(&self) -> &Field;
}

#[derive(Debug, Clone)]
pub struct QuadraticDensity1D {
    rho_a: Field,
    ei: Field,
}

impl QuadraticDensity1D {
    pub fn new(rho_a: Field, ei: Field) -> Result<Self> {
        if !matches!(rho_a.grid(), Grid::Line(_)) {
            return Err(Error::GridMismatch("1D density needs a line grid".into()));
        }
        rho_a.same_grid(&ei)?;
        positive(&rho_a, "rhoA")?;
        positive(&ei, "EI")?;
        Ok(Self { rho_a, ei })
    }

    pub fn rho_a(&self) -> &Field {
        &self.rho_a
    }

    pub fn ei(&self) -> &Field {
        &self.ei
    }
}

impl Density for QuadraticDensity1D {
    fn mass(&self) -> &Field {
        &self.rho_a
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticDensity2D {
    mu: Field,
    xi: Field,
    nu: f64,
}

impl QuadraticDensity2D {
    pub fn new(mu: Field, xi: Field, nu: f64) -> Result<Self> {
        if !matches!(mu.grid(), Grid::Rect(_)) {
            return Err(Error::GridMismatch("2D density needs a rectangular grid".into()));
        }
        mu.same_grid(&xi)?;
        positive(&mu, "mu")?;
        positive(&xi, "Xi")?;
        if !(0.0..0.5).contains(&nu) {
            return Err(Error::InvalidParameter {
                name: "nu".into(),
                reason: format!("{nu} outside [0, 0.5)"),
            });
        }
        Ok(Self { mu, xi, nu })
    }

    pub fn mu(&self) -> &Field {
        &self.mu
    }

    pub fn xi(&self) -> &Field {
        &self.xi
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> Grid2D {
        match self.mu.grid() {
            Grid::Rect(g) => *g,
            Grid::Line(_) => unreachable!("checked in new"),
        }
    }

    /// Bending moments (M11, M22, M12) with M12 = Ξ(1−ν)w_[11].
    fn moments(&self, w: &Field) -> Result<Moments> {
        self.mu.same_grid(w)?;
        let w20 = d(w, &[2, 0])?;
        let w02 = d(w, &[0, 2])?;
        let w11 = d(w, &[1, 1])?;
        let nu = self.nu;
        let m11 = combine3(&self.xi, &w20, &w02, |x, a, b| x * (a + nu * b));
        let m22 = combine3(&self.xi, &w20, &w02, |x, a, b| x * (b + nu * a));
        let m12 = self.xi.zip_with(&w11, |x, c| x * (1.0 - nu) * c)?;
        Ok(Moments { m11, m22, m12 })
    }
}

impl Density for QuadraticDensity2D {
    fn mass(&self) -> &Field {
        &self.mu
    }
}

struct Moments {
    m11: Field,
    m22: Field,
    m12: Field,
}

fn combine3(a: &Field, b: &Field, c: &Field, f: impl Fn(f64, f64, f64) -> f64) -> Field {
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .zip(c.values())
        .map(|((x, y), z)| f(*x, *y, *z))
        .collect();
    Field::new(*a.grid(), values).expect("same grid, finite inputs")
}

fn add(a: &Field, b: &Field) -> Field {
    a.zip_with(b, |x, y| x + y).expect("same grid")
}

/// δ_w H for the plate density.
pub fn var_deriv_w_2d(dens: &QuadraticDensity2D, w: &Field) -> Result<Field> {
    let m = dens.moments(w)?;
    let t1 = d(&m.m11, &[2, 0])?;
    let t2 = d(&m.m22, &[0, 2])?;
    let t3 = d(&m.m12, &[1, 1])?.map(|v| 2.0 * v);
    Ok(add(&add(&t1, &t2), &t3))
}

/// δ_w H for the beam density: d_[2](EI w_[2]).
pub fn var_deriv_w_1d(dens: &QuadraticDensity1D, w: &Field) -> Result<Field> {
    dens.ei.same_grid(w)?;
    let m = dens.ei.zip_with(&d(w, &[2])?, |e, c| e * c)?;
    d(&m, &[2])
}

/// δ_p H = p / mass.
pub fn var_deriv_p(dens: &impl Density, p: &Field) -> Result<Field> {
    p.check_finite()?;
    dens.mass().zip_with(p, |m, v| v / m)
}

/// Shear-type (δ^∂,1) and moment-type (δ^∂,2) traces along one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub edge: Edge,
    pub shear: Vec<f64>,
    pub moment: Vec<f64>,
}

/// Both beam ends: ∂B₁ (z = 0) then ∂B₂ (z = L).
pub fn boundary_ops_1d(dens: &QuadraticDensity1D, w: &Field) -> Result<[BoundaryData; 2]> {
    dens.ei.same_grid(w)?;
    let m = dens.ei.zip_with(&d(w, &[2])?, |e, c| e * c)?;
    let q = d(&m, &[1])?;
    let n = w.len();
    let at = |edge, k: usize| BoundaryData {
        edge,
        shear: vec![-q.values()[k]],
        moment: vec![m.values()[k]],
    };
    Ok([at(Edge::B1, 0), at(Edge::B2, n - 1)])
}

/// Plate boundary operators in the frame adapted to `edge`: the normal
/// coordinate plays the role of z². Traces are unsigned (not multiplied by
/// the outward orientation).
pub fn boundary_ops_2d(dens: &QuadraticDensity2D, w: &Field, edge: Edge) -> Result<BoundaryData> {
    let m = dens.moments(w)?;
    let twist = m.m12.map(|v| 2.0 * v);
    let (mn, shear) = match edge {
        Edge::B2 | Edge::B4 => {
            let a = d(&m.m22, &[0, 1])?;
            let b = d(&twist, &[1, 0])?;
            (&m.m22, add(&a, &b))
        }
        Edge::B1 | Edge::B3 => {
            let a = d(&m.m11, &[1, 0])?;
            let b = d(&twist, &[0, 1])?;
            (&m.m11, add(&a, &b))
        }
    };
    let nodes = edge_nodes(w.grid(), edge)?;
    Ok(BoundaryData {
        edge,
        shear: nodes.iter().map(|k| -shear.values()[*k]).collect(),
        moment: nodes.iter().map(|k| mn.values()[*k]).collect(),
    })
}

/// Quadrature of the plate bending energy with stencil curvatures.
pub fn elastic_energy_2d(dens: &QuadraticDensity2D, w: &Field) -> Result<f64> {
    let m = dens.moments(w)?;
    let w20 = d(w, &[2, 0])?;
    let w02 = d(w, &[0, 2])?;
    let w11 = d(w, &[1, 1])?;
    let weights = w.grid().weights();
    let mut e = 0.0;
    for k in 0..w.len() {
        let dens_k = m.m11.values()[k] * w20.values()[k]
            + m.m22.values()[k] * w02.values()[k]
            + 2.0 * m.m12.values()[k] * w11.values()[k];
        e += 0.5 * weights[k] * dens_k;
    }
    Ok(e)
}

/// Quadrature of the beam bending energy with stencil curvatures.
pub fn elastic_energy_1d(dens: &QuadraticDensity1D, w: &Field) -> Result<f64> {
    dens.ei.same_grid(w)?;
    let w2 = d(w, &[2])?;
    let weights = w.grid().weights();
    Ok((0..w.len())
        .map(|k| 0.5 * weights[k] * dens.ei.values()[k] * w2.values()[k].powi(2))
        .sum())
}

fn kinetic_rate(dens: &impl Density, p: &Field, vp: &Field) -> Result<f64> {
    let dp = var_deriv_p(dens, p)?;
    p.same_grid(vp)?;
    Ok(dot_weighted(
        &p.grid().weights(),
        &dp.zip_with(vp, |a, b| a * b)?.into_values(),
    ))
}

fn weighted_dot(a: &Field, b: &Field) -> Result<f64> {
    a.same_grid(b)?;
    Ok(dot_weighted(
        &a.grid().weights(),
        &a.zip_with(b, |x, y| x * y)?.into_values(),
    ))
}

fn check_shapes(x: &[&Field]) -> Result<()> {
    for f in &x[1..] {
        if f.grid() != x[0].grid() {
            return Err(Error::ShapeMismatch(
                "state and candidate rate live on different grids".into(),
            ));
        }
    }
    Ok(())
}

/// |Ḣ_chain − (∫ v⌋δH + boundary terms)| for the beam density.
pub fn decomposition_check_1d(
    dens: &QuadraticDensity1D,
    w: &Field,
    p: &Field,
    vw: &Field,
    vp: &Field,
) -> Result<f64> {
    check_shapes(&[dens.ei(), w, p, vw, vp])?;
    let w2 = d(w, &[2])?;
    let v2 = d(vw, &[2])?;
    let m = dens.ei.zip_with(&w2, |e, c| e * c)?;
    let chain = weighted_dot(&m, &v2)? + kinetic_rate(dens, p, vp)?;

    let domain = weighted_dot(vw, &var_deriv_w_1d(dens, w)?)? + kinetic_rate(dens, p, vp)?;
    let v1 = d(vw, &[1])?;
    let ends = boundary_ops_1d(dens, w)?;
    let n = w.len();
    let mut boundary = 0.0;
    for (b, k, sign) in [(&ends[0], 0, -1.0), (&ends[1], n - 1, 1.0)] {
        boundary += sign * (vw.values()[k] * b.shear[0] + v1.values()[k] * b.moment[0]);
    }
    Ok((chain - domain - boundary).abs())
}

/// |Ḣ_chain − (∫ v⌋δH + edge terms + corner terms)| for the plate density.
pub fn decomposition_check_2d(
    dens: &QuadraticDensity2D,
    w: &Field,
    p: &Field,
    vw: &Field,
    vp: &Field,
) -> Result<f64> {
    check_shapes(&[dens.mu(), w, p, vw, vp])?;
    let g = dens.grid();
    let m = dens.moments(w)?;
    let v20 = d(vw, &[2, 0])?;
    let v02 = d(vw, &[0, 2])?;
    let v11 = d(vw, &[1, 1])?;
    let chain = weighted_dot(&m.m11, &v20)?
        + weighted_dot(&m.m22, &v02)?
        + 2.0 * weighted_dot(&m.m12, &v11)?
        + kinetic_rate(dens, p, vp)?;

    let domain = weighted_dot(vw, &var_deriv_w_2d(dens, w)?)? + kinetic_rate(dens, p, vp)?;

    let v10 = d(vw, &[1, 0])?;
    let v01 = d(vw, &[0, 1])?;
    let w1 = g.axis1().weights();
    let w2 = g.axis2().weights();
    let mut boundary = 0.0;
    for edge in Edge::ALL {
        let (sign, normal, tangential_weights) = match edge {
            Edge::B1 => (-1.0, &v10, &w2),
            Edge::B3 => (1.0, &v10, &w2),
            Edge::B2 => (-1.0, &v01, &w1),
            Edge::B4 => (1.0, &v01, &w1),
        };
        let data = boundary_ops_2d(dens, w, edge)?;
        let nodes = edge_nodes(w.grid(), edge)?;
        for (t, k) in nodes.iter().enumerate() {
            boundary += sign
                * tangential_weights[t]
                * (vw.values()[*k] * data.shear[t] + normal.values()[*k] * data.moment[t]);
        }
    }
    for (i, j, s) in [
        (0, 0, 1.0),
        (g.n1() - 1, 0, -1.0),
        (0, g.n2() - 1, -1.0),
        (g.n1() - 1, g.n2() - 1, 1.0),
    ] {
        let k = g.index(i, j);
        boundary += s * 2.0 * m.m12.values()[k] * vw.values()[k];
    }
    Ok((chain - domain - boundary).abs())
}
