//! Finite-dimensional port-Hamiltonian controller
//! ẋc = (Jc − Rc)∇Hc + Gc·uc,  yc = Gcᵀ∇Hc.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_finite, Error, Result};

/// Hc = Σ_λ c_λ/2 (x_λ − x_λ^d − u_s^λ/c_λ)² + ½ x_rᵀ Mc x_r, where the
/// first `c.len()` states are shaped and the remaining ones (x_r) are
/// weighted by Mc.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerHamiltonian {
    c: Vec<f64>,
    xcd: Vec<f64>,
    us: Vec<f64>,
    mc: DMatrix<f64>,
}

impl ControllerHamiltonian {
    pub fn new(c: Vec<f64>, xcd: Vec<f64>, us: Vec<f64>, mc: DMatrix<f64>) -> Result<Self> {
        let l = c.len();
        for v in [xcd.len(), us.len()] {
            if v != l {
                return Err(Error::Dimension {
                    expected: l,
                    got: v,
                });
            }
        }
        check_finite(&c, "c")?;
        check_finite(&xcd, "xcd")?;
        check_finite(&us, "us")?;
        check_finite(mc.as_slice(), "Mc")?;
        if let Some(v) = c.iter().find(|v| **v <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "c".into(),
                reason: format!("shaping gains must be positive, found {v}"),
            });
        }
        if !mc.is_square() || (&mc - mc.transpose()).amax() > 1e-12 * mc.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite("Mc"));
        }
        if mc.nrows() > 0 && mc.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite("Mc"));
        }
        Ok(Self { c, xcd, us, mc })
    }

    pub fn shaped(&self) -> usize {
        self.c.len()
    }

    pub fn dim(&self) -> usize {
        self.c.len() + self.mc.nrows()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn xcd(&self) -> &[f64] {
        &self.xcd
    }

    pub fn us(&self) -> &[f64] {
        &self.us
    }

    pub fn mc(&self) -> &DMatrix<f64> {
        &self.mc
    }

    fn shift(&self, i: usize) -> f64 {
        self.xcd[i] + self.us[i] / self.c[i]
    }

    pub fn value(&self, xc: &[f64]) -> f64 {
        let l = self.shaped();
        let shaped: f64 = (0..l)
            .map(|i| 0.5 * self.c[i] * (xc[i] - self.shift(i)).powi(2))
            .sum();
        let r = DVector::from_column_slice(&xc[l..]);
        shaped + 0.5 * r.dot(&(&self.mc * &r))
    }

    /// The state minimising Hc (where Hc = 0).
    pub fn minimizer(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.shaped()).map(|i| self.shift(i)).collect();
        x.resize(self.dim(), 0.0);
        x
    }

    pub fn grad(&self, xc: &[f64]) -> DVector<f64> {
        let l = self.shaped();
        let mut g = DVector::zeros(self.dim());
        for i in 0..l {
            g[i] = self.c[i] * (xc[i] - self.shift(i));
        }
        let r = DVector::from_column_slice(&xc[l..]);
        g.rows_mut(l, self.dim() - l).copy_from(&(&self.mc * r));
        g
    }

    /// Block-diagonal weighting Q with ∇Hc = Q(x − x*).
    pub fn hessian(&self) -> DMatrix<f64> {
        let l = self.shaped();
        let mut q = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..l {
            q[(i, i)] = self.c[i];
        }
        q.view_mut((l, l), (self.mc.nrows(), self.mc.ncols()))
            .copy_from(&self.mc);
        q
    }
}

/// ∇Hc at `xc`.
pub fn grad_hc(ham: &ControllerHamiltonian, xc: &[f64]) -> Result<Vec<f64>> {
    if xc.len() != ham.dim() {
        return Err(Error::Dimension {
            expected: ham.dim(),
            got: xc.len(),
        });
    }
    Ok(ham.grad(xc).as_slice().to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub xc: Vec<f64>,
    jc: DMatrix<f64>,
    rc: DMatrix<f64>,
    gc: DMatrix<f64>,
    ham: ControllerHamiltonian,
}

impl Controller {
    pub fn new(
        jc: DMatrix<f64>,
        rc: DMatrix<f64>,
        gc: DMatrix<f64>,
        ham: ControllerHamiltonian,
        xc: Vec<f64>,
    ) -> Result<Self> {
        let nc = ham.dim();
        for (m, what) in [(&jc, "Jc"), (&rc, "Rc")] {
            if m.shape() != (nc, nc) {
                return Err(Error::ShapeMismatch(format!("{what} is {:?}, need {nc}x{nc}", m.shape())));
            }
            check_finite(m.as_slice(), "controller matrix")?;
        }
        if gc.nrows() != nc {
            return Err(Error::ShapeMismatch(format!("Gc has {} rows, need {nc}", gc.nrows())));
        }
        check_finite(gc.as_slice(), "Gc")?;
        if xc.len() != nc {
            return Err(Error::Dimension {
                expected: nc,
                got: xc.len(),
            });
        }
        check_finite(&xc, "xc")?;
        if (&jc + jc.transpose()).amax() > 1e-12 * jc.amax().max(1.0) {
            return Err(Error::NotSkewSymmetric("Jc"));
        }
        let scale = rc.amax();
        if (&rc - rc.transpose()).amax() > 1e-12 * scale.max(1.0) {
            return Err(Error::NotPositiveSemiDefinite("Rc"));
        }
        if nc > 0 && rc.clone().symmetric_eigenvalues().min() < -1e-12 * scale {
            return Err(Error::NotPositiveSemiDefinite("Rc"));
        }
        Ok(Self { xc, jc, rc, gc, ham })
    }

    pub fn dim(&self) -> usize {
        self.ham.dim()
    }

    pub fn ports(&self) -> usize {
        self.gc.ncols()
    }

    pub fn jc(&self) -> &DMatrix<f64> {
        &self.jc
    }

    pub fn rc(&self) -> &DMatrix<f64> {
        &self.rc
    }

    pub fn gc(&self) -> &DMatrix<f64> {
        &self.gc
    }

    pub fn hamiltonian(&self) -> &ControllerHamiltonian {
        &self.ham
    }

    fn check_xc(&self, xc: &[f64]) -> Result<()> {
        if xc.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: xc.len(),
            });
        }
        check_finite(xc, "xc")
    }

    /// ẋc at the stored state.
    pub fn controller_rhs(&self, uc: &[f64]) -> Result<Vec<f64>> {
        self.rhs_at(&self.xc, uc)
    }

    pub fn rhs_at(&self, xc: &[f64], uc: &[f64]) -> Result<Vec<f64>> {
        self.check_xc(xc)?;
        if uc.len() != self.ports() {
            return Err(Error::Dimension {
                expected: self.ports(),
                got: uc.len(),
            });
        }
        let g = self.ham.grad(xc);
        let r = (&self.jc - &self.rc) * g + &self.gc * DVector::from_column_slice(uc);
        Ok(r.as_slice().to_vec())
    }

    /// yc at the stored state.
    pub fn controller_output(&self) -> Result<Vec<f64>> {
        self.output_at(&self.xc)
    }

    pub fn output_at(&self, xc: &[f64]) -> Result<Vec<f64>> {
        self.check_xc(xc)?;
        Ok((self.gc.transpose() * self.ham.grad(xc)).as_slice().to_vec())
    }

    /// ∇Hcᵀ Rc ∇Hc ≥ 0.
    pub fn dissipation(&self, xc: &[f64]) -> f64 {
        let g = self.ham.grad(xc);
        g.dot(&(&self.rc * &g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn paper_like(us: [f64; 2]) -> Controller {
        let ham = ControllerHamiltonian::new(
            vec![0.1, 0.1],
            vec![0.3, -0.2],
            us.to_vec(),
            DMatrix::from_diagonal_element(2, 2, 1e4),
        )
        .unwrap();
        let mut jc = DMatrix::zeros(4, 4);
        jc[(2, 3)] = 1.0;
        jc[(3, 2)] = -1.0;
        let mut rc = DMatrix::zeros(4, 4);
        rc[(2, 2)] = 200.0;
        rc[(3, 3)] = 150.0;
        rc[(2, 3)] = -1.0;
        rc[(3, 2)] = -1.0;
        let gc = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 100.0, 0.0, 100.0, 0.0]);
        let x0 = ham.minimizer();
        Controller::new(jc, rc, gc, ham, x0).unwrap()
    }

    #[test]
    fn minimum_is_stationary() {
        let c = paper_like([0.05, -0.02]);
        let r = c.controller_rhs(&[0.0, 0.0]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(c.hamiltonian().value(&c.xc), 0.0);
    }

    #[test]
    fn identity_structure() {
        let ham = ControllerHamiltonian::new(vec![1.0], vec![0.0], vec![0.0], DMatrix::identity(1, 1)).unwrap();
        let gc = DMatrix::from_row_slice(2, 1, &[2.0, -1.0]);
        let c = Controller::new(DMatrix::zeros(2, 2), DMatrix::identity(2, 2), gc, ham, vec![0.5, -3.0]).unwrap();
        let r = c.controller_rhs(&[0.25]).unwrap();
        assert_abs_diff_eq!(r[0], -0.5 + 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 3.0 - 0.25, epsilon = 1e-15);
        assert!(c.controller_rhs(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn shaped_rows_do_not_move_without_input() {
        let mut c = paper_like([0.0, 0.0]);
        c.xc[2] = 0.7;
        c.xc[3] = -0.4;
        let r = c.controller_rhs(&[0.0, 0.0]).unwrap();
        assert_eq!((r[0], r[1]), (0.0, 0.0));
        assert!(r[2] != 0.0 && r[3] != 0.0);
    }

    #[test]
    fn output_delivers_feedforward_at_target() {
        let us = [0.05, -0.02];
        let mut c = paper_like(us);
        c.xc = vec![0.3, -0.2, 0.0, 0.0];
        let y = c.controller_output().unwrap();
        assert_abs_diff_eq!(y[0], -us[0], epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], -us[1], epsilon = 1e-15);
        let mut z = c.clone();
        z.gc = DMatrix::zeros(4, 2);
        assert_eq!(z.controller_output().unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn gradient_examples() {
        let ham = ControllerHamiltonian::new(
            vec![0.1, 0.1],
            vec![1.0, 0.0],
            vec![0.1, 0.0],
            DMatrix::from_diagonal_element(2, 2, 1e4),
        )
        .unwrap();
        // x¹ − x¹d − u¹s/c¹ = 4 − 1 − 1 = 2
        let g = grad_hc(&ham, &[4.0, 0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g[0], 0.2, epsilon = 1e-15);
        assert_eq!(g[2], 1e4);
        let g0 = grad_hc(&ham, &ham.minimizer()).unwrap();
        assert!(g0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn invalid_structures_rejected() {
        let ham = || ControllerHamiltonian::new(vec![1.0], vec![0.0], vec![0.0], DMatrix::identity(1, 1)).unwrap();
        let gc = DMatrix::zeros(2, 1);
        let mut rc = DMatrix::identity(2, 2);
        rc[(1, 1)] = -1.0;
        assert_eq!(
            Controller::new(DMatrix::zeros(2, 2), rc, gc.clone(), ham(), vec![0.0; 2]),
            Err(Error::NotPositiveSemiDefinite("Rc"))
        );
        assert_eq!(
            Controller::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2), gc, ham(), vec![0.0; 2]),
            Err(Error::NotSkewSymmetric("Jc"))
        );
        assert!(ControllerHamiltonian::new(vec![0.0], vec![0.0], vec![0.0], DMatrix::identity(1, 1)).is_err());
        assert_eq!(
            ControllerHamiltonian::new(vec![1.0], vec![0.0], vec![0.0], -DMatrix::identity(1, 1)),
            Err(Error::NotPositiveDefinite("Mc"))
        );
    }

    proptest! {
        #[test]
        fn hc_bounded_below_by_minimum(x in proptest::collection::vec(-10.0f64..10.0, 4)) {
            let c = paper_like([0.3, -0.1]);
            let h = c.hamiltonian();
            prop_assert!(h.value(&x) >= h.value(&h.minimizer()));
            // strict quadratic growth
            let d: f64 = x.iter().zip(h.minimizer()).map(|(a, b)| (a - b).powi(2)).sum();
            prop_assert!(h.value(&x) >= 0.5 * 0.1 * d - 1e-12);
        }

        #[test]
        fn dissipation_factorisation(x3 in -5.0f64..5.0, x4 in -5.0f64..5.0) {
            let mut c = paper_like([0.0, 0.0]);
            c.xc[2] = x3;
            c.xc[3] = x4;
            let m = c.hamiltonian().mc().clone();
            let v = DVector::from_vec(vec![x3, x4]);
            let block = c.rc().view((2, 2), (2, 2)).into_owned();
            let expected = -(v.transpose() * &m * block * &m * &v)[0];
            prop_assert!(expected <= 0.0);
            prop_assert!((-c.dissipation(&c.xc) - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }
}
