use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// uc = K·y_int, u = −Kᵀ·yc, so that u·y_int + uc·yc = 0 for any K.
pub fn pcis_couple(y_int: &[f64], yc: &[f64], k: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = k.nrows();
    if !k.is_square() {
        return Err(Error::ShapeMismatch(format!("K is {:?}", k.shape())));
    }
    for len in [y_int.len(), yc.len()] {
        if len != l {
            return Err(Error::Dimension { expected: l, got: len });
        }
    }
    let uc = k * DVector::from_column_slice(y_int);
    let u = -(k.transpose() * DVector::from_column_slice(yc));
    Ok((u.as_slice().to_vec(), uc.as_slice().to_vec()))
}
