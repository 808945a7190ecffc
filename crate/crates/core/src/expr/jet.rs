use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Second-order jet of a scalar function of `(x, y)`.
///
/// Arithmetic propagates exact first and second partial derivatives; the
/// single `dxy` slot makes mixed-partial symmetry hold by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Jet2 {
        Jet2 {
            v,
            dx: 0.0,
            dy: 0.0,
            dxx: 0.0,
            dxy: 0.0,
            dyy: 0.0,
        }
    }

    pub const fn var_x(x: f64) -> Jet2 {
        Jet2 {
            v: x,
            dx: 1.0,
            ..Jet2::constant(0.0)
        }
    }

    pub const fn var_y(y: f64) -> Jet2 {
        Jet2 {
            v: y,
            dy: 1.0,
            ..Jet2::constant(0.0)
        }
    }

    /// Function of `x` alone with derivatives `[f, f', f'']`.
    pub const fn of_x(d: [f64; 3]) -> Jet2 {
        Jet2 {
            v: d[0],
            dx: d[1],
            dxx: d[2],
            ..Jet2::constant(0.0)
        }
    }

    /// Function of `y` alone with derivatives `[f, f', f'']`.
    pub const fn of_y(d: [f64; 3]) -> Jet2 {
        Jet2 {
            v: d[0],
            dy: d[1],
            dyy: d[2],
            ..Jet2::constant(0.0)
        }
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.dx, self.dy]
    }

    /// Composition `φ ∘ self` given `φ(v)`, `φ'(v)`, `φ''(v)`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        Jet2 {
            v: f0,
            dx: f1 * self.dx,
            dy: f1 * self.dy,
            dxx: f2 * self.dx * self.dx + f1 * self.dxx,
            dxy: f2 * self.dx * self.dy + f1 * self.dxy,
            dyy: f2 * self.dy * self.dy + f1 * self.dyy,
        }
    }

    /// `g(X, Y) = self(p(X), q(Y))` where `p = [p', p'']` and `q = [q', q'']`
    /// are the derivatives of the separable substitution at the point.
    pub fn compose_separable(&self, p: [f64; 2], q: [f64; 2]) -> Jet2 {
        Jet2 {
            v: self.v,
            dx: self.dx * p[0],
            dy: self.dy * q[0],
            dxx: self.dxx * p[0] * p[0] + self.dx * p[1],
            dxy: self.dxy * p[0] * q[0],
            dyy: self.dyy * q[0] * q[0] + self.dy * q[1],
        }
    }

    /// Jet in coordinates `(u, v)` related to `(x, y)` by the constant linear
    /// map `(x, y) = A (u, v) + c`.
    pub fn linear_pullback(&self, a: [[f64; 2]; 2]) -> Jet2 {
        let g = [self.dx, self.dy];
        let h = [[self.dxx, self.dxy], [self.dxy, self.dyy]];
        let grad = |k: usize| g[0] * a[0][k] + g[1] * a[1][k];
        let hess = |k: usize, l: usize| {
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    s += a[i][k] * h[i][j] * a[j][l];
                }
            }
            s
        };
        Jet2 {
            v: self.v,
            dx: grad(0),
            dy: grad(1),
            dxx: hess(0, 0),
            dxy: hess(0, 1),
            dyy: hess(1, 1),
        }
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Jet2 {
            v: self.v * s,
            dx: self.dx * s,
            dy: self.dy * s,
            dxx: self.dxx * s,
            dxy: self.dxy * s,
            dyy: self.dyy * s,
        }
    }

    pub fn recip(&self) -> Jet2 {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(&self) -> Jet2 {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn abs(&self) -> Jet2 {
        let s = self.v.signum();
        self.chain(self.v.abs(), s, 0.0)
    }

    pub fn powi(&self, n: i32) -> Jet2 {
        match n {
            0 => Jet2::constant(1.0),
            1 => *self,
            _ => {
                let (v, nf) = (self.v, n as f64);
                self.chain(
                    v.powi(n),
                    nf * v.powi(n - 1),
                    nf * (nf - 1.0) * v.powi(n - 2),
                )
            }
        }
    }

    pub fn powf(&self, p: f64) -> Jet2 {
        let v = self.v;
        self.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        )
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Jet2) {
        *self = *self + o;
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, o: f64) -> Jet2 {
        Jet2 {
            v: self.v + o,
            ..self
        }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, o: f64) -> Jet2 {
        self + (-o)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, o: f64) -> Jet2 {
        self.scale(o)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        o.scale(self)
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        o + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        (-o) + self
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, o: f64) -> Jet2 {
        self.scale(1.0 / o)
    }
}

impl Div<Jet2> for f64 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        o.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_and_chain_rules() {
        let x = Jet2::var_x(0.7);
        let y = Jet2::var_y(-1.3);
        let f = (x * y).sin();
        let xy = 0.7 * -1.3f64;
        assert_relative_eq!(f.dx, xy.cos() * -1.3, epsilon = 1e-15);
        assert_relative_eq!(f.dxy, -xy.sin() * 0.7 * -1.3 + xy.cos(), epsilon = 1e-15);
        assert_relative_eq!(f.dyy, -xy.sin() * 0.49, epsilon = 1e-15);
    }

    #[test]
    fn integer_powers_at_zero() {
        let x = Jet2::var_x(0.0);
        let c = x.powi(3);
        assert_eq!((c.v, c.dx, c.dxx), (0.0, 0.0, 0.0));
        let s = x.powi(2);
        assert_eq!((s.v, s.dx, s.dxx), (0.0, 0.0, 2.0));
        let r = Jet2::var_x(2.0).powi(-1);
        assert_relative_eq!(r.dxx, 2.0 / 8.0);
    }

    #[test]
    fn linear_pullback_of_quadratic() {
        // f = x^2 + 3xy, with x = u + v, y = u - v
        let at = |x: f64, y: f64| {
            let (x, y) = (Jet2::var_x(x), Jet2::var_y(y));
            x * x + 3.0 * x * y
        };
        let j = at(0.5, 0.1).linear_pullback([[1.0, 1.0], [1.0, -1.0]]);
        // f(u, v) = (u+v)^2 + 3(u^2 - v^2) = 4u^2 + 2uv - 2v^2 at u = 0.3, v = 0.2
        assert_relative_eq!(j.dx, 8.0 * 0.3 + 2.0 * 0.2, epsilon = 1e-14);
        assert_relative_eq!(j.dy, 2.0 * 0.3 - 4.0 * 0.2, epsilon = 1e-14);
        assert_relative_eq!(j.dxx, 8.0);
        assert_relative_eq!(j.dxy, 2.0);
        assert_relative_eq!(j.dyy, -4.0);
    }
}
