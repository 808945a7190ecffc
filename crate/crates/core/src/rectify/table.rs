//! Sampled functions with derivative data, interpolated by cubic Hermite
//! polynomials.

use num_complex::Complex64;
use serde::Serialize;

/// A real function of one variable known at scattered nodes.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    /// `(t, value, derivative)`, sorted by `t`.
    pub nodes: Vec<[f64; 3]>,
}

impl Table {
    /// Sorts the samples and averages those closer than `1e-6` of the range.
    pub fn new(mut samples: Vec<[f64; 3]>) -> Table {
        samples.retain(|s| s.iter().all(|v| v.is_finite()));
        samples.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let range = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => b[0] - a[0],
            _ => 0.0,
        };
        let gap = 1e-6 * range;
        let mut nodes: Vec<[f64; 3]> = Vec::with_capacity(samples.len());
        let mut count = 0.0;
        for s in samples {
            match nodes.last_mut() {
                Some(last) if s[0] - last[0] <= gap && count > 0.0 => {
                    count += 1.0;
                    for k in 0..3 {
                        last[k] += (s[k] - last[k]) / count;
                    }
                }
                _ => {
                    nodes.push(s);
                    count = 1.0;
                }
            }
        }
        Table { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn range(&self) -> [f64; 2] {
        [self.nodes[0][0], self.nodes[self.nodes.len() - 1][0]]
    }

    /// Value and derivative at `t`. Outside the node range the end node is
    /// paired with the nearest node at least as far from it as `t`, so the
    /// extrapolating cubic never spans a tiny interval.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.nodes.len();
        if n == 1 {
            let [t0, v, d] = self.nodes[0];
            return (v + d * (t - t0), d);
        }
        let (first, last) = (self.nodes[0][0], self.nodes[n - 1][0]);
        if t < first {
            let j = (1..n)
                .find(|&j| self.nodes[j][0] - first >= first - t)
                .unwrap_or(n - 1);
            return hermite(&self.nodes[0], &self.nodes[j], t);
        }
        if t > last {
            let j = (0..n - 1)
                .rev()
                .find(|&j| last - self.nodes[j][0] >= t - last)
                .unwrap_or(0);
            return hermite(&self.nodes[j], &self.nodes[n - 1], t);
        }
        let k = self.nodes.partition_point(|s| s[0] <= t).clamp(1, n - 1) - 1;
        hermite(&self.nodes[k], &self.nodes[k + 1], t)
    }
}

/// Cubic Hermite interpolant through two `(t, value, derivative)` nodes.
fn hermite(a: &[f64; 3], b: &[f64; 3], t: f64) -> (f64, f64) {
    let [t0, v0, d0] = *a;
    let [t1, v1, d1] = *b;
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1;
    let dh00 = 6.0 * s2 - 6.0 * s;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = (dh00 * v0 + dh01 * v1) / h + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

/// A holomorphic function known at scattered points of the plane.
#[derive(Debug, Clone)]
pub struct ComplexTable {
    /// `(z, h(z), h′(z))`
    pub nodes: Vec<(Complex64, Complex64, Complex64)>,
}

impl ComplexTable {
    /// Cubic Hermite interpolation in `z` between the nearest node `z₀` and
    /// the node closest to `z` among those at least `|z − z₀|` from `z₀`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let nearest = |keep: &dyn Fn(Complex64) -> bool| {
            self.nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| keep(n.0))
                .map(|(k, n)| ((n.0 - z).norm_sqr(), k))
                .min_by(|a, b| a.0.total_cmp(&b.0))
        };
        let Some((d0, k0)) = nearest(&|_| true) else {
            return Complex64::new(f64::NAN, f64::NAN);
        };
        let (z0, v0, d0v) = self.nodes[k0];
        let partner =
            nearest(&|w| w != z0 && (w - z0).norm_sqr() >= d0).or_else(|| nearest(&|w| w != z0));
        let Some((_, k1)) = partner else {
            return v0 + d0v * (z - z0);
        };
        let d0 = d0v;
        let (z1, v1, d1) = self.nodes[k1];
        let h = z1 - z0;
        let s = (z - z0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let one = Complex64::new(1.0, 0.0);
        let h00 = 2.0 * s3 - 3.0 * s2 + one;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_is_exact() {
        let f = |t: f64| [t, 1.0 - 2.0 * t + t * t * t, -2.0 + 3.0 * t * t];
        let t = Table::new(vec![f(0.7), f(-1.0), f(0.0), f(1.5)]);
        for &s in &[-1.0, -0.3, 0.25, 0.7, 1.2, 1.5] {
            let (v, d) = t.eval(s);
            assert_relative_eq!(v, f(s)[1], epsilon = 1e-13);
            assert_relative_eq!(d, f(s)[2], epsilon = 1e-12);
        }
    }

    #[test]
    fn merges_near_duplicates() {
        let t = Table::new(vec![[0.0, 1.0, 0.0], [1e-9, 3.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(t.len(), 2);
        assert_relative_eq!(t.nodes[0][1], 2.0);
    }

    #[test]
    fn extrapolation_ignores_a_tiny_end_interval() {
        // Two end nodes 1e-5 apart with slightly noisy data, queried a fifth
        // of a grid step beyond the end.
        let f = |t: f64| [t, t.sin(), t.cos()];
        let mut samples: Vec<[f64; 3]> = (0..=10).map(|k| f(0.1 * k as f64)).collect();
        let mut close = f(1.0 - 1e-5);
        close[1] += 1e-12;
        samples.push(close);
        let t = Table::new(samples);
        let (v, _) = t.eval(1.02);
        assert!((v - 1.02f64.sin()).abs() < 1e-6);
        let (v, _) = t.eval(-0.02);
        assert!((v - (-0.02f64).sin()).abs() < 1e-6);
    }

    #[test]
    fn complex_hermite_off_segment() {
        let h = |z: Complex64| (z.exp(), z.exp());
        let nodes = (0..5)
            .flat_map(|i| (0..5).map(move |j| Complex64::new(i as f64 * 0.1, j as f64 * 0.1)))
            .map(|z| (z, h(z).0, h(z).1))
            .collect();
        let t = ComplexTable { nodes };
        let z = Complex64::new(0.23, 0.17);
        assert!((t.eval(z) - z.exp()).norm() < 1e-5);
    }
}
