//! Quadratic energies of the form E(w) = ½ Σ_t c_t (r_t · w)² with sparse rows.
//!
//! Every discrete elastic energy in the crate is written this way, so the
//! stiffness K = Σ c_t r_tᵀ r_t is symmetric positive semi-definite by
//! construction and the force W⁻¹Kw is the exact gradient of the energy.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
struct Row {
    weight: f64,
    idx: Vec<usize>,
    coef: Vec<f64>,
}

impl Row {
    fn dot(&self, w: &[f64]) -> f64 {
        self.idx.iter().zip(&self.coef).map(|(i, c)| c * w[*i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEnergy {
    n: usize,
    rows: Vec<Row>,
}

impl QuadraticEnergy {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds the term ½·weight·(Σ coef·w[idx])². Duplicate indices are merged.
    pub fn push(&mut self, weight: f64, entries: &[(usize, f64)]) {
        if weight == 0.0 {
            return;
        }
        let mut sorted = entries.to_vec();
        sorted.sort_by_key(|e| e.0);
        let mut idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut coef: Vec<f64> = Vec::with_capacity(sorted.len());
        for (i, c) in sorted {
            assert!(i < self.n, "energy row index {i} out of range");
            if idx.last() == Some(&i) {
                *coef.last_mut().unwrap() += c;
            } else {
                idx.push(i);
                coef.push(c);
            }
        }
        let (idx, coef): (Vec<_>, Vec<_>) = idx
            .into_iter()
            .zip(coef)
            .filter(|(_, c)| *c != 0.0)
            .unzip();
        if !idx.is_empty() {
            self.rows.push(Row { weight, idx, coef });
        }
    }

    pub fn energy(&self, w: &[f64]) -> f64 {
        0.5 * self
            .rows
            .iter()
            .map(|r| {
                let s = r.dot(w);
                r.weight * s * s
            })
            .sum::<f64>()
    }

    /// Writes K·w into `out`.
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for r in &self.rows {
            let s = r.weight * r.dot(w);
            for (i, c) in r.idx.iter().zip(&r.coef) {
                out[*i] += c * s;
            }
        }
    }

    /// Directional derivative of the energy at `w` along `v`, i.e. vᵀKw.
    pub fn directional(&self, w: &[f64], v: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.weight * r.dot(w) * r.dot(v))
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.n, self.n);
        for r in &self.rows {
            for (a, ca) in r.idx.iter().zip(&r.coef) {
                for (b, cb) in r.idx.iter().zip(&r.coef) {
                    k[(*a, *b)] += r.weight * ca * cb;
                }
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_energy() {
        let mut e = QuadraticEnergy::new(3);
        e.push(2.0, &[(0, 1.0), (1, -1.0)]);
        e.push(0.5, &[(1, 1.0), (2, 3.0), (1, 1.0)]);
        let w = [0.3, -0.2, 0.7];
        let mut kw = [0.0; 3];
        e.apply(&w, &mut kw);
        let step = 1e-6;
        for i in 0..3 {
            let mut a = w;
            let mut b = w;
            a[i] += step;
            b[i] -= step;
            let fd = (e.energy(&a) - e.energy(&b)) / (2.0 * step);
            assert!((fd - kw[i]).abs() < 1e-8);
        }
        let k = e.to_dense();
        assert_eq!(k, k.transpose());
        assert!((e.directional(&w, &w) - 2.0 * e.energy(&w)).abs() < 1e-15);
    }

    #[test]
    fn cancelled_rows_are_dropped() {
        let mut e = QuadraticEnergy::new(2);
        e.push(1.0, &[(0, 1.0), (0, -1.0)]);
        assert_eq!(e.energy(&[5.0, 1.0]), 0.0);
        assert!(e.rows.is_empty());
    }
}
