//! Scalar fields on a chart and quadratic forms in momenta.

use std::fmt;
use std::sync::Arc;

use crate::error::{DomainError, ParseError};
use crate::expr::{eval_jet, parse, Context, Expr, Jet2};

type JetFn = dyn Fn(f64, f64) -> Result<Jet2, DomainError> + Send + Sync;

/// A smooth function of `(x, y)` evaluable to second-order jets.
///
/// Fields are either parsed expressions or compositions built from other
/// fields (pullbacks, generator formulas); both evaluate through the same
/// closure so consumers never care which.
#[derive(Clone)]
pub struct ScalarField {
    label: Arc<str>,
    constant: Option<f64>,
    eval: Arc<JetFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.label)
    }
}

impl ScalarField {
    pub fn from_expr(e: Expr) -> Self {
        let label: Arc<str> = e.render().into();
        let constant = e.constant_value();
        let e = Arc::new(e);
        ScalarField {
            label,
            constant,
            eval: Arc::new(move |x, y| eval_jet(&e, x, y)),
        }
    }

    /// Parses a real-context expression in `x` and `y`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::from_expr(parse(text, Context::Real)?))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField {
            label: format!("{c}").into(),
            constant: Some(c),
            eval: Arc::new(move |_, _| Ok(Jet2::constant(c))),
        }
    }

    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> Result<Jet2, DomainError> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            label: label.into().into(),
            constant: None,
            eval: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Some(c)` when the field is known to be the constant `c`.
    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    pub fn jet(&self, x: f64, y: f64) -> Result<Jet2, DomainError> {
        (self.eval)(x, y)
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64, DomainError> {
        Ok(self.jet(x, y)?.v)
    }

    pub fn scale(&self, s: f64) -> Self {
        if let Some(c) = self.constant {
            return Self::constant(c * s);
        }
        let inner = self.clone();
        Self::from_fn(format!("{s}*({})", self.label), move |x, y| {
            Ok(inner.jet(x, y)?.scale(s))
        })
    }

    /// Pointwise combination of two fields.
    pub fn zip(
        &self,
        other: &ScalarField,
        label: impl Into<String>,
        op: impl Fn(Jet2, Jet2) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::from_fn(label, move |x, y| Ok(op(a.jet(x, y)?, b.jet(x, y)?)))
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        if let (Some(p), Some(q)) = (self.constant, other.constant) {
            return Self::constant(p + q);
        }
        self.zip(
            other,
            format!("({})+({})", self.label, other.label),
            |p, q| p + q,
        )
    }

    /// The field in coordinates `(u, v)` with `(x, y) = A (u, v) + c`.
    pub fn linear_pullback(&self, a: [[f64; 2]; 2], c: [f64; 2]) -> Self {
        if self.constant.is_some() {
            return self.clone();
        }
        let inner = self.clone();
        Self::from_fn(self.label.to_string(), move |u, v| {
            let x = a[0][0] * u + a[0][1] * v + c[0];
            let y = a[1][0] * u + a[1][1] * v + c[1];
            Ok(inner.jet(x, y)?.linear_pullback(a))
        })
    }
}

/// `F = a p_x² + b p_x p_y + c p_y²`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub a: ScalarField,
    pub b: ScalarField,
    pub c: ScalarField,
}

impl QuadraticForm {
    pub fn new(a: ScalarField, b: ScalarField, c: ScalarField) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn parse(a: &str, b: &str, c: &str) -> Result<Self, ParseError> {
        Ok(QuadraticForm {
            a: ScalarField::parse(a)?,
            b: ScalarField::parse(b)?,
            c: ScalarField::parse(c)?,
        })
    }

    pub fn jets(&self, x: f64, y: f64) -> Result<[Jet2; 3], DomainError> {
        Ok([self.a.jet(x, y)?, self.b.jet(x, y)?, self.c.jet(x, y)?])
    }

    pub fn coefficients(&self, x: f64, y: f64) -> Result<[f64; 3], DomainError> {
        let [a, b, c] = self.jets(x, y)?;
        Ok([a.v, b.v, c.v])
    }

    pub fn scale(&self, s: f64) -> Self {
        QuadraticForm {
            a: self.a.scale(s),
            b: self.b.scale(s),
            c: self.c.scale(s),
        }
    }

    /// The form in coordinates `(u, v)` with `(x, y) = A (u, v) + c`.
    ///
    /// Momenta transform as `p_new = Aᵀ p_old`, so the symmetric coefficient
    /// matrix becomes `A⁻¹ F A⁻ᵀ`.
    pub fn linear_change(&self, a: [[f64; 2]; 2], c: [f64; 2]) -> Self {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [
            [a[1][1] / det, -a[0][1] / det],
            [-a[1][0] / det, a[0][0] / det],
        ];
        let (fa, fb, fc) = (self.a.clone(), self.b.clone(), self.c.clone());
        let entry = move |i: usize, j: usize, m: &[[Jet2; 2]; 2]| {
            let mut s = Jet2::constant(0.0);
            for k in 0..2 {
                for l in 0..2 {
                    s += m[k][l] * (inv[i][k] * inv[j][l]);
                }
            }
            s
        };
        let coeff = move |i: usize, j: usize, factor: f64| {
            let (fa, fb, fc) = (fa.clone(), fb.clone(), fc.clone());
            ScalarField::from_fn("transformed coefficient", move |u, v| {
                let x = a[0][0] * u + a[0][1] * v + c[0];
                let y = a[1][0] * u + a[1][1] * v + c[1];
                let (ja, jb, jc) = (fa.jet(x, y)?, fb.jet(x, y)?, fc.jet(x, y)?);
                let half_b = jb.scale(0.5);
                let m = [[ja, half_b], [half_b, jc]];
                Ok(entry(i, j, &m).linear_pullback(a).scale(factor))
            })
        };
        QuadraticForm {
            a: coeff(0, 0, 1.0),
            b: coeff(0, 1, 2.0),
            c: coeff(1, 1, 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_are_tracked() {
        assert_eq!(
            ScalarField::parse("2*pi").unwrap().constant_value(),
            Some(2.0 * std::f64::consts::PI)
        );
        assert_eq!(ScalarField::parse("x").unwrap().constant_value(), None);
        let s = ScalarField::constant(2.0).add(&ScalarField::constant(3.0));
        assert_eq!(s.constant_value(), Some(5.0));
    }

    #[test]
    fn linear_change_preserves_values() {
        let f = QuadraticForm::parse("1+x^2", "x*y", "2-y").unwrap();
        let a = [[0.5, 0.5], [0.5, -0.5]];
        let g = f.linear_change(a, [0.1, 0.0]);
        let (u, v) = (0.3, -0.4);
        let (x, y) = (0.5 * u + 0.5 * v + 0.1, 0.5 * u - 0.5 * v);
        // p_new = Aᵀ p_old
        let p_old = [0.7, -1.1];
        let p_new = [
            a[0][0] * p_old[0] + a[1][0] * p_old[1],
            a[0][1] * p_old[0] + a[1][1] * p_old[1],
        ];
        let [fa, fb, fc] = f.coefficients(x, y).unwrap();
        let [ga, gb, gc] = g.coefficients(u, v).unwrap();
        let old = fa * p_old[0].powi(2) + fb * p_old[0] * p_old[1] + fc * p_old[1].powi(2);
        let new = ga * p_new[0].powi(2) + gb * p_new[0] * p_new[1] + gc * p_new[1].powi(2);
        assert_relative_eq!(old, new, epsilon = 1e-13);
    }
}
