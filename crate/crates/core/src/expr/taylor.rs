use num_complex::{Complex64, ComplexFloat};
use std::ops::{Add, Mul, Neg, Sub};

/// Number of Taylor coefficients carried (derivatives up to order three).
pub const TAYLOR_TERMS: usize = 4;

/// Scalar type usable as a Taylor coefficient: `f64` or `Complex64`.
pub trait Coef:
    ComplexFloat<Real = f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Copy
    + std::fmt::Debug
{
    fn from_real(v: f64) -> Self;
}

impl Coef for f64 {
    fn from_real(v: f64) -> Self {
        v
    }
}

impl Coef for Complex64 {
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
}

/// Truncated univariate Taylor series `Σ c[k] (t - t0)^k`, `k < 4`.
///
/// Coefficients are normalised (`c[k] = f^(k)(t0) / k!`); use
/// [`Taylor::derivatives`] for plain derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor<T: Coef> {
    pub c: [T; TAYLOR_TERMS],
}

impl<T: Coef> Taylor<T> {
    pub fn constant(v: T) -> Self {
        let mut c = [T::from_real(0.0); TAYLOR_TERMS];
        c[0] = v;
        Taylor { c }
    }

    /// The independent variable at `t0`.
    pub fn variable(t0: T) -> Self {
        let mut s = Self::constant(t0);
        s.c[1] = T::from_real(1.0);
        s
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// `[f, f', f'', f''']` at the expansion point.
    pub fn derivatives(&self) -> [T; TAYLOR_TERMS] {
        let mut d = self.c;
        let mut fact = 1.0;
        for (k, dk) in d.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *dk = *dk * T::from_real(fact);
        }
        d
    }

    fn zero() -> Self {
        Self::constant(T::from_real(0.0))
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for c in out.c.iter_mut() {
            *c = *c * s;
        }
        out
    }

    /// Series reciprocal; the caller guarantees `c[0] != 0`.
    pub fn recip(&self) -> Self {
        let one = Self::constant(T::from_real(1.0));
        one.div(self)
    }

    pub fn div(&self, b: &Self) -> Self {
        let mut q = Self::zero();
        let b0 = b.c[0];
        for k in 0..TAYLOR_TERMS {
            let mut acc = self.c[k];
            for i in 1..=k {
                acc = acc - b.c[i] * q.c[k - i];
            }
            q.c[k] = acc / b0;
        }
        q
    }

    pub fn exp(&self) -> Self {
        let mut e = Self::zero();
        e.c[0] = self.c[0].exp();
        for k in 1..TAYLOR_TERMS {
            let mut acc = T::from_real(0.0);
            for j in 1..=k {
                acc = acc + T::from_real(j as f64) * self.c[j] * e.c[k - j];
            }
            e.c[k] = acc / T::from_real(k as f64);
        }
        e
    }

    /// Natural logarithm (principal branch); the caller checks the domain.
    pub fn ln(&self) -> Self {
        let mut l = Self::zero();
        let a0 = self.c[0];
        l.c[0] = a0.ln();
        for k in 1..TAYLOR_TERMS {
            let mut acc = self.c[k];
            for j in 1..k {
                acc = acc - T::from_real(j as f64 / k as f64) * l.c[j] * self.c[k - j];
            }
            l.c[k] = acc / a0;
        }
        l
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Self::zero();
        let mut c = Self::zero();
        s.c[0] = self.c[0].sin();
        c.c[0] = self.c[0].cos();
        for k in 1..TAYLOR_TERMS {
            let mut acc_s = T::from_real(0.0);
            let mut acc_c = T::from_real(0.0);
            for j in 1..=k {
                let w = T::from_real(j as f64) * self.c[j];
                acc_s = acc_s + w * c.c[k - j];
                acc_c = acc_c + w * s.c[k - j];
            }
            s.c[k] = acc_s / T::from_real(k as f64);
            c.c[k] = -acc_c / T::from_real(k as f64);
        }
        (s, c)
    }

    /// Principal square root; the caller guarantees `c[0] != 0`.
    pub fn sqrt(&self) -> Self {
        let mut r = Self::zero();
        r.c[0] = self.c[0].sqrt();
        let two_r0 = T::from_real(2.0) * r.c[0];
        for k in 1..TAYLOR_TERMS {
            let mut acc = self.c[k];
            for j in 1..k {
                acc = acc - r.c[j] * r.c[k - j];
            }
            r.c[k] = acc / two_r0;
        }
        r
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Self::constant(T::from_real(1.0));
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }

    /// Real power via the recurrence for `a^p`; requires `c[0] != 0`.
    pub fn powf(&self, p: f64) -> Self {
        let mut f = Self::zero();
        let a0 = self.c[0];
        f.c[0] = a0.powf(p);
        for k in 1..TAYLOR_TERMS {
            let mut acc = T::from_real(0.0);
            for j in 1..=k {
                let w = (p + 1.0) * j as f64 - k as f64;
                acc = acc + T::from_real(w) * self.c[j] * f.c[k - j];
            }
            f.c[k] = acc / (T::from_real(k as f64) * a0);
        }
        f
    }
}

impl<T: Coef> Add for Taylor<T> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a = *a + b;
        }
        self
    }
}

impl<T: Coef> Sub for Taylor<T> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a = *a - b;
        }
        self
    }
}

impl<T: Coef> Neg for Taylor<T> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl<T: Coef> Mul for Taylor<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero();
        for k in 0..TAYLOR_TERMS {
            let mut acc = T::from_real(0.0);
            for i in 0..=k {
                acc = acc + self.c[i] * o.c[k - i];
            }
            out.c[k] = acc;
        }
        out
    }
}
