//! Finite-difference weights on uniform nodes.
//!
//! Interior nodes use centred second-order stencils; nodes whose centred
//! stencil would leave the grid use a one-sided window of `order + 2`
//! nodes anchored at the nearest end, which keeps second-order accuracy.

/// Fornberg's recursion: weights for the `m`-th derivative at `z` using the
/// abscissae `x`.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more than {m} nodes for derivative order {m}");
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// A stencil: offset of the first node and its weights (already scaled by `h^-m`).
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn apply(&self, values: &[f64], stride: usize, base: usize) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * values[base + (self.start + k) * stride])
            .sum()
    }
}

/// Half-width of the centred stencil for derivative order `m`.
pub fn central_half_width(m: usize) -> usize {
    match m {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    }
}

/// Minimum number of nodes that supports every stencil up to order 4.
pub const MIN_NODES: usize = 9;

/// Stencils for derivative order `m` at every node of a uniform line of `n`
/// nodes with spacing `h`.
pub fn line_stencils(n: usize, h: f64, m: usize) -> Vec<Stencil> {
    if m == 0 {
        return (0..n)
            .map(|i| Stencil {
                start: i,
                weights: vec![1.0],
            })
            .collect();
    }
    let r = central_half_width(m);
    let scale = h.powi(-(m as i32));
    let unit = |z: f64, lo: usize, len: usize| -> Vec<f64> {
        let xs: Vec<f64> = (lo..lo + len).map(|k| k as f64).collect();
        fornberg(z, &xs, m).into_iter().map(|w| w * scale).collect()
    };
    let central = {
        let xs: Vec<f64> = (0..=2 * r).map(|k| k as f64).collect();
        fornberg(r as f64, &xs, m)
            .into_iter()
            .map(|w| w * scale)
            .collect::<Vec<_>>()
    };
    let window = m + 2;
    (0..n)
        .map(|i| {
            if i >= r && i + r < n {
                Stencil {
                    start: i - r,
                    weights: central.clone(),
                }
            } else if i < r {
                Stencil {
                    start: 0,
                    weights: unit(i as f64, 0, window),
                }
            } else {
                let lo = n - window;
                Stencil {
                    start: lo,
                    weights: unit(i as f64, lo, window),
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classic_central_weights() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[2], 1.0, epsilon = 1e-14);
        let w4 = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 4);
        for (a, b) in w4.iter().zip([1.0, -4.0, 6.0, -4.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_sided_second_derivative() {
        let w = fornberg(0.0, &[0.0, 1.0, 2.0, 3.0], 2);
        for (a, b) in w.iter().zip([2.0, -5.0, 4.0, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn boundary_band_width() {
        let s = line_stencils(11, 0.1, 4);
        assert_eq!(s[0].start, 0);
        assert_eq!(s[1].start, 0);
        assert_eq!(s[2].start, 0);
        assert_eq!(s[2].weights.len(), 5);
        assert_eq!(s[9].start, 5);
        assert_eq!(s[9].weights.len(), 6);
    }
}
