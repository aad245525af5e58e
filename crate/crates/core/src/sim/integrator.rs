//! Fixed-step integrators on flat state vectors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One classical Runge-Kutta step of ẋ = f(x).
pub fn rk4_step<F>(f: F, x: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt".into(),
            reason: format!("{dt} is not positive"),
        });
    }
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + a * k).collect() };
    let k1 = f(x)?;
    let k2 = f(&axpy(0.5 * dt, &k1))?;
    let k3 = f(&axpy(0.5 * dt, &k2))?;
    let k4 = f(&axpy(dt, &k3))?;
    Ok((0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Recovers A and b of an affine field f(x) = A x + b by probing unit vectors.
pub fn affine_parts<F>(f: F, dim: usize) -> Result<(DMatrix<f64>, DVector<f64>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let zero = vec![0.0; dim];
    let b = DVector::from_vec(f(&zero)?);
    let mut a = DMatrix::zeros(dim, dim);
    let mut e = zero;
    for j in 0..dim {
        e[j] = 1.0;
        let col = f(&e)?;
        e[j] = 0.0;
        for i in 0..dim {
            a[(i, j)] = col[i] - b[i];
        }
    }
    Ok((a, b))
}

/// Exact step of the affine system ẋ = A x + b, via the exponential of the
/// augmented matrix [[A, b], [0, 0]]·dt.
#[derive(Debug, Clone)]
pub struct ExponentialStepper {
    phi: DMatrix<f64>,
    offset: DVector<f64>,
}

impl ExponentialStepper {
    pub fn new(a: &DMatrix<f64>, b: &DVector<f64>, dt: f64) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "A is {:?}, b has {}",
                a.shape(),
                b.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt".into(),
                reason: format!("{dt} is not positive"),
            });
        }
        let mut aug = DMatrix::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&(a * dt));
        aug.view_mut((0, n), (n, 1)).copy_from(&(b * dt));
        let e = aug.exp();
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: 0.0,
                reason: "matrix exponential overflowed".into(),
            });
        }
        Ok(Self {
            phi: e.view((0, 0), (n, n)).into_owned(),
            offset: e.view((0, n), (n, 1)).column(0).into_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn step(&self, x: &[f64]) -> Vec<f64> {
        let y = &self.phi * DVector::from_column_slice(x) + &self.offset;
        y.as_slice().to_vec()
    }
}
