//! Uniform grids, nodal fields, stencil application and trapezoidal quadrature.
//!
//! 2D fields are stored row-major with one row per z²-line: node `(i, j)`
//! (i along z¹, j along z²) lives at `j * n1 + i`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{check_finite, Error, Result};
use crate::stencil::{line_stencils, MIN_NODES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
    spacing: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::GridTooSmall {
                nodes: n,
                min: MIN_NODES,
            });
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        Ok(Self {
            n,
            length,
            spacing: length / (n - 1) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.length
        } else {
            i as f64 * self.spacing
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Trapezoidal weights.
    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n, self.spacing)
    }

    /// Index of the node located at `z`, if `z` coincides with one.
    pub fn node_at(&self, z: f64) -> Option<usize> {
        let s = z / self.spacing;
        let i = s.round();
        if i < 0.0 || i as usize >= self.n {
            return None;
        }
        ((s - i).abs() <= 1e-9).then_some(i as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n1: usize,
    n2: usize,
    l1: f64,
    l2: f64,
    h1: f64,
    h2: f64,
}

impl Grid2D {
    pub fn new(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self> {
        let a = Grid1D::new(n1, l1)?;
        let b = Grid1D::new(n2, l2)?;
        Ok(Self {
            n1,
            n2,
            l1,
            l2,
            h1: a.spacing,
            h2: b.spacing,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn l1(&self) -> f64 {
        self.l1
    }
    pub fn l2(&self) -> f64 {
        self.l2
    }
    pub fn h1(&self) -> f64 {
        self.h1
    }
    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn axis1(&self) -> Grid1D {
        Grid1D {
            n: self.n1,
            length: self.l1,
            spacing: self.h1,
        }
    }

    pub fn axis2(&self) -> Grid1D {
        Grid1D {
            n: self.n2,
            length: self.l2,
            spacing: self.h2,
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    pub fn node_count(&self) -> usize {
        self.n1 * self.n2
    }

    /// Tensor-product trapezoidal weights.
    pub fn weights(&self) -> Vec<f64> {
        let w1 = trapezoid_weights(self.n1, self.h1);
        let w2 = trapezoid_weights(self.n2, self.h2);
        let mut out = Vec::with_capacity(self.node_count());
        for b in &w2 {
            for a in &w1 {
                out.push(a * b);
            }
        }
        out
    }
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Line(Grid1D),
    Rect(Grid2D),
}

impl Grid {
    pub fn node_count(&self) -> usize {
        match self {
            Grid::Line(g) => g.n,
            Grid::Rect(g) => g.node_count(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Line(_) => 1,
            Grid::Rect(_) => 2,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        match self {
            Grid::Line(g) => g.weights(),
            Grid::Rect(g) => g.weights(),
        }
    }
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::Line(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::Rect(g)
    }
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: impl Into<Grid>, values: Vec<f64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.node_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        check_finite(&values, "field")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    pub fn constant(grid: impl Into<Grid>, c: f64) -> Self {
        let grid = grid.into();
        Self {
            values: vec![c; grid.node_count()],
            grid,
        }
    }

    pub fn from_fn_1d(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.coords().into_iter().map(f).collect(),
            grid: Grid::Line(grid),
        }
    }

    pub fn from_fn_2d(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let z1 = grid.axis1().coords();
        let z2 = grid.axis2().coords();
        let mut values = Vec::with_capacity(grid.node_count());
        for b in &z2 {
            for a in &z1 {
                values.push(f(*a, *b));
            }
        }
        Self {
            values,
            grid: Grid::Rect(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.values, "field")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.same_grid(other)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV with `digits` significant digits; 2D fields write one row per z²-line.
    pub fn write_csv<W: Write>(&self, out: &mut W, digits: usize) -> io::Result<()> {
        let precision = digits.max(1) - 1;
        let row_len = match self.grid {
            Grid::Line(g) => g.n,
            Grid::Rect(g) => g.n1,
        };
        for row in self.values.chunks(row_len) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.precision$e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Ordered multi-index of a partial derivative, e.g. `[2, 0]` for d_[20].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndex {
    orders: [usize; 2],
    dim: usize,
}

impl MultiIndex {
    pub fn new(orders: &[usize]) -> Result<Self> {
        let total: usize = orders.iter().sum();
        if total > 4 {
            return Err(Error::OrderTooHigh(total));
        }
        match orders {
            [a] => Ok(Self {
                orders: [*a, 0],
                dim: 1,
            }),
            [a, b] => Ok(Self {
                orders: [*a, *b],
                dim: 2,
            }),
            _ => Err(Error::MultiIndexDimension {
                got: orders.to_vec(),
                dim: orders.len(),
            }),
        }
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders[..self.dim]
    }

    pub fn total(&self) -> usize {
        self.orders[0] + self.orders[1]
    }
}

/// Total derivative `d_J f` by stencil composition (z¹ first, then z²).
pub fn diff(f: &Field, j: MultiIndex) -> Result<Field> {
    f.check_finite()?;
    match (f.grid, j.dim) {
        (Grid::Line(g), 1) => {
            let values = apply_line(&f.values, g.n, g.spacing, j.orders[0], 1, 1, 0);
            Ok(Field {
                grid: f.grid,
                values,
            })
        }
        (Grid::Rect(g), 2) => {
            let mut values = f.values.clone();
            if j.orders[0] > 0 {
                values = apply_line(&values, g.n1, g.h1, j.orders[0], 1, g.n2, g.n1);
            }
            if j.orders[1] > 0 {
                values = apply_line(&values, g.n2, g.h2, j.orders[1], g.n1, g.n1, 1);
            }
            Ok(Field {
                grid: f.grid,
                values,
            })
        }
        (grid, _) => Err(Error::MultiIndexDimension {
            got: j.orders().to_vec(),
            dim: grid.dim(),
        }),
    }
}

/// Applies a 1D stencil along lines of `n` nodes with `stride`; there are
/// `lines` such lines whose first nodes are `line_step` apart.
fn apply_line(
    values: &[f64],
    n: usize,
    h: f64,
    order: usize,
    stride: usize,
    lines: usize,
    line_step: usize,
) -> Vec<f64> {
    let stencils = line_stencils(n, h, order);
    let mut out = vec![0.0; values.len()];
    for line in 0..lines {
        let base = line * line_step;
        for (i, s) in stencils.iter().enumerate() {
            out[base + i * stride] = s.apply(values, stride, base);
        }
    }
    out
}

/// Trapezoidal (tensor-product) quadrature.
pub fn integrate(f: &Field) -> Result<f64> {
    f.check_finite()?;
    Ok(dot_weighted(&f.grid.weights(), &f.values))
}

pub(crate) fn dot_weighted(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Boundary pieces of the base manifold: ∂B₁ is z¹ = 0, ∂B₂ is z² = 0,
/// ∂B₃ is z¹ = L₁ and ∂B₄ is z² = L₂. On a line only ∂B₁ (z = 0) and
/// ∂B₂ (z = L) exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    B1,
    B2,
    B3,
    B4,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::B1, Edge::B2, Edge::B3, Edge::B4];
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Edge::B1 => "B1",
            Edge::B2 => "B2",
            Edge::B3 => "B3",
            Edge::B4 => "B4",
        };
        f.write_str(s)
    }
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("∂").to_ascii_uppercase().as_str() {
            "B1" => Ok(Edge::B1),
            "B2" => Ok(Edge::B2),
            "B3" => Ok(Edge::B3),
            "B4" => Ok(Edge::B4),
            _ => Err(Error::UnknownEdge(s.to_string())),
        }
    }
}

/// Node indices along `edge`, ordered by the tangential coordinate.
pub fn edge_nodes(grid: &Grid, edge: Edge) -> Result<Vec<usize>> {
    match (grid, edge) {
        (Grid::Line(_), Edge::B1) => Ok(vec![0]),
        (Grid::Line(g), Edge::B2) => Ok(vec![g.n - 1]),
        (Grid::Line(_), e) => Err(Error::UnknownEdge(format!("{e} on a 1D grid"))),
        (Grid::Rect(g), Edge::B1) => Ok((0..g.n2).map(|j| g.index(0, j)).collect()),
        (Grid::Rect(g), Edge::B3) => Ok((0..g.n2).map(|j| g.index(g.n1 - 1, j)).collect()),
        (Grid::Rect(g), Edge::B2) => Ok((0..g.n1).map(|i| g.index(i, 0)).collect()),
        (Grid::Rect(g), Edge::B4) => Ok((0..g.n1).map(|i| g.index(i, g.n2 - 1)).collect()),
    }
}

pub fn boundary_trace(f: &Field, edge: Edge) -> Result<Vec<f64>> {
    Ok(edge_nodes(&f.grid, edge)?
        .into_iter()
        .map(|k| f.values[k])
        .collect())
}
