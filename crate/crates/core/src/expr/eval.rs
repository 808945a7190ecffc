use num_complex::Complex64;

use super::taylor::{Coef, Taylor};
use super::{BinOp, Constant, Expr, Func, Jet2, Var};
use crate::error::DomainError;

/// `abs` is rejected this close to its kink.
const ABS_KINK: f64 = 1e-12;

/// Number types the evaluator can run on.
trait Number: Sized + Copy {
    fn constant(c: f64) -> Self;
    fn imag_unit() -> Option<Self>;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn div(self, o: Self) -> Result<Self, String>;
    fn powi(self, n: i32) -> Result<Self, String>;
    fn powf(self, p: f64) -> Result<Self, String>;
    fn pow(self, e: Self) -> Result<Self, String>;
    fn call(self, f: Func) -> Result<Self, String>;
}

fn nonzero(v: f64, what: &str) -> Result<(), String> {
    if v == 0.0 || !v.is_finite() {
        Err(format!("{what} at value {v}"))
    } else {
        Ok(())
    }
}

impl Number for Jet2 {
    fn constant(c: f64) -> Self {
        Jet2::constant(c)
    }
    fn imag_unit() -> Option<Self> {
        None
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn div(self, o: Self) -> Result<Self, String> {
        nonzero(o.v, "division by zero")?;
        Ok(self / o)
    }
    fn powi(self, n: i32) -> Result<Self, String> {
        if n < 0 {
            nonzero(self.v, "negative power of zero")?;
        }
        Ok(Jet2::powi(&self, n))
    }
    fn powf(self, p: f64) -> Result<Self, String> {
        if self.v <= 0.0 {
            return Err(format!(
                "non-integer power of non-positive value {}",
                self.v
            ));
        }
        Ok(Jet2::powf(&self, p))
    }
    fn pow(self, e: Self) -> Result<Self, String> {
        if self.v <= 0.0 {
            return Err(format!("variable power of non-positive value {}", self.v));
        }
        Ok((e * self.ln()).exp())
    }
    fn call(self, f: Func) -> Result<Self, String> {
        let v = self.v;
        Ok(match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
            Func::Log => {
                if v <= 0.0 {
                    return Err(format!("log of non-positive value {v}"));
                }
                self.ln()
            }
            Func::Sqrt => {
                if v <= 0.0 {
                    return Err(format!(
                        "sqrt of non-positive value {v} (derivative undefined)"
                    ));
                }
                self.sqrt()
            }
            Func::Abs => {
                if v.abs() < ABS_KINK {
                    return Err(format!("abs is not differentiable at {v}"));
                }
                self.abs()
            }
        })
    }
}

/// Domain checks shared by real and complex Taylor arithmetic.
trait TaylorDomain: Coef {
    fn imag() -> Option<Self>;
    /// Off the principal branch cut of log / sqrt / powf.
    fn log_ok(self) -> bool;
    fn is_zero(self) -> bool;
}

impl TaylorDomain for f64 {
    fn imag() -> Option<Self> {
        None
    }
    fn log_ok(self) -> bool {
        self > 0.0
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
}

impl TaylorDomain for Complex64 {
    fn imag() -> Option<Self> {
        Some(Complex64::new(0.0, 1.0))
    }
    fn log_ok(self) -> bool {
        !(self.im == 0.0 && self.re <= 0.0)
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl<T: TaylorDomain> Number for Taylor<T> {
    fn constant(c: f64) -> Self {
        Taylor::constant(T::from_real(c))
    }
    fn imag_unit() -> Option<Self> {
        T::imag().map(Taylor::constant)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn div(self, o: Self) -> Result<Self, String> {
        if o.c[0].is_zero() {
            return Err("division by zero".into());
        }
        Ok(Taylor::div(&self, &o))
    }
    fn powi(self, n: i32) -> Result<Self, String> {
        if n < 0 && self.c[0].is_zero() {
            return Err("negative power of zero".into());
        }
        Ok(Taylor::powi(&self, n))
    }
    fn powf(self, p: f64) -> Result<Self, String> {
        if !self.c[0].log_ok() {
            return Err(format!("non-integer power at {:?} (branch cut)", self.c[0]));
        }
        Ok(Taylor::powf(&self, p))
    }
    fn pow(self, e: Self) -> Result<Self, String> {
        if !self.c[0].log_ok() {
            return Err(format!("variable power at {:?} (branch cut)", self.c[0]));
        }
        Ok((e * self.ln()).exp())
    }
    fn call(self, f: Func) -> Result<Self, String> {
        let a0 = self.c[0];
        Ok(match f {
            Func::Sin => self.sin_cos().0,
            Func::Cos => self.sin_cos().1,
            Func::Exp => self.exp(),
            Func::Log => {
                if !a0.log_ok() {
                    return Err(format!("log at {a0:?} (pole or branch cut)"));
                }
                self.ln()
            }
            Func::Sqrt => {
                if !a0.log_ok() {
                    return Err(format!("sqrt at {a0:?} (branch point or cut)"));
                }
                self.sqrt()
            }
            Func::Abs => {
                if T::imag().is_some() {
                    return Err("abs is not holomorphic".into());
                }
                let re = a0.re();
                if re.abs() < ABS_KINK {
                    return Err(format!("abs is not differentiable at {re}"));
                }
                self.scale(T::from_real(re.signum()))
            }
        })
    }
}

fn integer_exponent(e: &Expr) -> Option<i32> {
    let v = e.constant_value()?;
    (v.fract() == 0.0 && v.abs() <= 64.0).then_some(v as i32)
}

fn eval_generic<N: Number>(e: &Expr, var: &impl Fn(Var) -> N) -> Result<N, DomainError> {
    let wrap = |reason: String| DomainError::new(e.render(), reason);
    match e {
        Expr::Num(v) => Ok(N::constant(*v)),
        Expr::Var(v) => Ok(var(*v)),
        Expr::Const(Constant::Pi) => Ok(N::constant(std::f64::consts::PI)),
        Expr::Const(Constant::I) => {
            N::imag_unit().ok_or_else(|| wrap("imaginary unit in real context".into()))
        }
        Expr::Neg(inner) => Ok(eval_generic(inner, var)?.neg()),
        Expr::Call(f, arg) => eval_generic(arg, var)?.call(*f).map_err(wrap),
        Expr::Binary(op, l, r) => {
            let a = eval_generic(l, var)?;
            if *op == BinOp::Pow {
                if let Some(n) = integer_exponent(r) {
                    return a.powi(n).map_err(wrap);
                }
                if let Some(p) = r.constant_value() {
                    return a.powf(p).map_err(wrap);
                }
            }
            let b = eval_generic(r, var)?;
            match op {
                BinOp::Add => Ok(a.add(b)),
                BinOp::Sub => Ok(a.sub(b)),
                BinOp::Mul => Ok(a.mul(b)),
                BinOp::Div => a.div(b).map_err(wrap),
                BinOp::Pow => a.pow(b).map_err(wrap),
            }
        }
    }
}

fn check_finite(e: &Expr, vals: &[f64]) -> Result<(), DomainError> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(DomainError::new(e.render(), "non-finite result"))
    }
}

/// Value and partial derivatives up to order two of a real expression.
pub fn eval_jet(e: &Expr, x: f64, y: f64) -> Result<Jet2, DomainError> {
    let jx = Jet2::var_x(x);
    let jy = Jet2::var_y(y);
    let j = eval_generic(e, &|v| match v {
        Var::X => jx,
        Var::Y => jy,
        // Complex context never reaches real evaluation; treat as constant 0.
        Var::Z => Jet2::constant(0.0),
    })?;
    check_finite(e, &[j.v, j.dx, j.dy, j.dxx, j.dxy, j.dyy])?;
    Ok(j)
}

/// `[f, f', f'', f''']` of a univariate real expression (in `x` or `y`) at `t`.
pub fn eval_univariate(e: &Expr, t: f64) -> Result<[f64; 4], DomainError> {
    let s = Taylor::variable(t);
    let r = eval_generic(e, &|_| s)?;
    let d = r.derivatives();
    check_finite(e, &d)?;
    Ok(d)
}

/// Value and complex derivatives of a holomorphic expression at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexJet {
    pub v: Complex64,
    pub dv: Complex64,
    /// Second derivative, used to build second-order jets of `Re h`, `Im h`.
    pub d2v: Complex64,
}

impl ComplexJet {
    /// Jets of `(Re h, Im h)` as functions of `(x, y)` with `z = x + i y`,
    /// using `∂/∂x = d/dz` and `∂/∂y = i d/dz`.
    pub fn real_imag_jets(&self) -> (Jet2, Jet2) {
        let (h, h1, h2) = (self.v, self.dv, self.d2v);
        let re = Jet2 {
            v: h.re,
            dx: h1.re,
            dy: -h1.im,
            dxx: h2.re,
            dxy: -h2.im,
            dyy: -h2.re,
        };
        let im = Jet2 {
            v: h.im,
            dx: h1.im,
            dy: h1.re,
            dxx: h2.im,
            dxy: h2.re,
            dyy: -h2.im,
        };
        (re, im)
    }
}

pub fn eval_complex(e: &Expr, z: Complex64) -> Result<ComplexJet, DomainError> {
    let s = Taylor::variable(z);
    let r = eval_generic(e, &|_| s)?;
    let d = r.derivatives();
    if d[..3]
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(DomainError::new(e.render(), "non-finite result (pole?)"));
    }
    Ok(ComplexJet {
        v: d[0],
        dv: d[1],
        d2v: d[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn jet(s: &str, x: f64, y: f64) -> Jet2 {
        eval_jet(&parse(s, Context::Real).unwrap(), x, y).unwrap()
    }

    #[test]
    fn polynomial_jet() {
        let j = jet("x^2+y", 1.0, 2.0);
        assert_eq!(
            j,
            Jet2 {
                v: 3.0,
                dx: 2.0,
                dy: 1.0,
                dxx: 2.0,
                dxy: 0.0,
                dyy: 0.0
            }
        );
        let j = jet("exp(x)", 0.0, 17.0);
        assert_eq!((j.v, j.dx, j.dxx), (1.0, 1.0, 1.0));
        let j = jet("x*y", 3.0, 5.0);
        assert_eq!((j.dxy, j.dx, j.dy), (1.0, 5.0, 3.0));
    }

    #[test]
    fn domain_errors_name_subexpression() {
        let e = parse("1 + sqrt(x - 2)", Context::Real).unwrap();
        let err = eval_jet(&e, 1.0, 0.0).unwrap_err();
        assert_eq!(err.expr, "sqrt(x-2)");
        let e = parse("x/(y-1)", Context::Real).unwrap();
        assert!(eval_jet(&e, 1.0, 1.0).is_err());
        let e = parse("abs(x)", Context::Real).unwrap();
        assert!(eval_jet(&e, 0.0, 1.0).is_err());
        assert_eq!(eval_jet(&e, -2.0, 1.0).unwrap().dx, -1.0);
        let e = parse("log(x)", Context::Real).unwrap();
        assert!(eval_jet(&e, -1.0, 1.0).is_err());
    }

    #[test]
    fn complex_examples() {
        let sq = parse("z^2", Context::Complex).unwrap();
        let j = eval_complex(&sq, Complex64::new(1.0, 1.0)).unwrap();
        assert_eq!(j.v, Complex64::new(0.0, 2.0));
        assert_eq!(j.dv, Complex64::new(2.0, 2.0));
        let id = parse("z", Context::Complex).unwrap();
        let j = eval_complex(&id, Complex64::new(0.3, -0.7)).unwrap();
        assert_eq!((j.v.re, j.v.im), (0.3, -0.7));
        let ex = parse("exp(z)", Context::Complex).unwrap();
        let j = eval_complex(&ex, Complex64::new(0.0, PI)).unwrap();
        assert_relative_eq!(j.v.re, -1.0, epsilon = 1e-15);
        assert!(j.v.im.abs() < 1e-15);
        let lg = parse("log(z)", Context::Complex).unwrap();
        assert!(eval_complex(&lg, Complex64::new(-1.0, 0.0)).is_err());
        let pole = parse("1/z", Context::Complex).unwrap();
        assert!(eval_complex(&pole, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn univariate_third_derivative() {
        let e = parse("y^3 - 2*y", Context::FunctionOfY).unwrap();
        assert_eq!(eval_univariate(&e, 2.0).unwrap(), [4.0, 10.0, 12.0, 6.0]);
    }

    fn arb_poly() -> impl Strategy<Value = String> {
        // sum of up to five monomials c * x^i * y^j
        prop::collection::vec((-3.0f64..3.0, 0u32..4, 0u32..4), 1..6).prop_map(|terms| {
            terms
                .iter()
                .map(|(c, i, j)| format!("({c})*x^{i}*y^{j}"))
                .collect::<Vec<_>>()
                .join("+")
        })
    }

    proptest! {
        #[test]
        fn first_partials_match_central_differences(p in arb_poly(), x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let e = parse(&p, Context::Real).unwrap();
            let j = eval_jet(&e, x, y).unwrap();
            let h = 1e-5;
            let val = |x: f64, y: f64| eval_jet(&e, x, y).unwrap().v;
            let fx = (val(x + h, y) - val(x - h, y)) / (2.0 * h);
            let fy = (val(x, y + h) - val(x, y - h)) / (2.0 * h);
            let scale = 1.0 + j.dx.abs().max(j.dy.abs()).max(j.v.abs());
            prop_assert!((fx - j.dx).abs() <= 1e-6 * scale, "dx {} vs {}", j.dx, fx);
            prop_assert!((fy - j.dy).abs() <= 1e-6 * scale, "dy {} vs {}", j.dy, fy);
        }

        #[test]
        fn holomorphic_parts_satisfy_cauchy_riemann(
            k in 0usize..5, x in 0.2f64..1.5, y in 0.2f64..1.5
        ) {
            let src = ["z^2 + 3*z", "exp(z)", "z + z^3", "sin(z)*z", "1/(z + 2)"][k];
            let e = parse(src, Context::Complex).unwrap();
            let h = 1e-6;
            let at = |x: f64, y: f64| eval_complex(&e, Complex64::new(x, y)).unwrap().v;
            let dx = (at(x + h, y) - at(x - h, y)) / (2.0 * h);
            let dy = (at(x, y + h) - at(x, y - h)) / (2.0 * h);
            let residual = (dx.re - dy.im).abs() + (dy.re + dx.im).abs();
            let scale = 1.0 + at(x, y).norm();
            prop_assert!(residual < 1e-8 * scale, "CR residual {}", residual);
        }
    }
}
