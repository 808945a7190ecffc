//! Generators for the normal-form metric pairs and their quadratic
//! integrals, plus the complexification identity behind the
//! complex-Liouville form.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DomainError, Error, Result};
use crate::expr::{eval_complex, eval_univariate, parse, Context, Expr, Jet2};
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::{CaseTag, Chart, Metric2};

/// Sign choice in `(X − Y)(dx² ± dy²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The three normal-form families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Liouville,
    ComplexLiouville,
    JordanBlock,
}

impl Family {
    /// Eigenstructure of `G` that pairs of this family produce.
    pub fn case_tag(self) -> CaseTag {
        match self {
            Family::Liouville => CaseTag::RealDistinct,
            Family::ComplexLiouville => CaseTag::ComplexPair,
            Family::JordanBlock => CaseTag::JordanBlock,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    Liouville {
        x_fn: Expr,
        y_fn: Expr,
        sign: Sign,
    },
    ComplexLiouville {
        h: Expr,
    },
    JordanBlock {
        y_fn: Expr,
    },
    /// `(Ỹ(y) + x) dx dy`, the Jordan form without a Killing field.
    JordanKillingFree {
        y_tilde: Expr,
    },
}

impl Variant {
    pub fn liouville(x_fn: &str, y_fn: &str, sign: Sign) -> Result<Variant> {
        Ok(Variant::Liouville {
            x_fn: parse(x_fn, Context::FunctionOfX)?,
            y_fn: parse(y_fn, Context::FunctionOfY)?,
            sign,
        })
    }

    pub fn complex_liouville(h: &str) -> Result<Variant> {
        Ok(Variant::ComplexLiouville {
            h: parse(h, Context::Complex)?,
        })
    }

    pub fn jordan_block(y_fn: &str) -> Result<Variant> {
        Ok(Variant::JordanBlock {
            y_fn: parse(y_fn, Context::FunctionOfY)?,
        })
    }

    pub fn jordan_killing_free(y_tilde: &str) -> Result<Variant> {
        Ok(Variant::JordanKillingFree {
            y_tilde: parse(y_tilde, Context::FunctionOfY)?,
        })
    }

    pub fn family(&self) -> Family {
        match self {
            Variant::Liouville { .. } => Family::Liouville,
            Variant::ComplexLiouville { .. } => Family::ComplexLiouville,
            Variant::JordanBlock { .. } | Variant::JordanKillingFree { .. } => Family::JordanBlock,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormalFormSpec {
    pub variant: Variant,
    pub chart: Chart,
    /// Whether to build (and validate the invariants of) the partner `ḡ`.
    pub with_partner: bool,
}

impl NormalFormSpec {
    pub fn new(variant: Variant, chart: Chart) -> Self {
        NormalFormSpec {
            variant,
            chart,
            with_partner: true,
        }
    }
}

/// A generated metric, optionally its projectively equivalent partner, and
/// the quadratic integral shared by the pair.
#[derive(Debug, Clone)]
pub struct NormalFormPair {
    pub family: Family,
    pub g: Metric2,
    pub gbar: Option<Metric2>,
    pub integral: Option<QuadraticForm>,
}

/// Builds the pair for any variant.
pub fn generate(spec: &NormalFormSpec) -> Result<NormalFormPair> {
    match &spec.variant {
        Variant::Liouville { .. } => gen_liouville(spec),
        Variant::ComplexLiouville { .. } => gen_complex_liouville(spec),
        Variant::JordanBlock { .. } => gen_jordan_block(spec),
        Variant::JordanKillingFree { .. } => gen_jordan_killing_free(spec),
    }
}

fn univariate_x(e: &Expr) -> ScalarField {
    let e = e.clone();
    ScalarField::from_fn(e.render(), move |x, _| {
        let d = eval_univariate(&e, x)?;
        Ok(Jet2::of_x([d[0], d[1], d[2]]))
    })
}

fn univariate_y(e: &Expr) -> ScalarField {
    let e = e.clone();
    ScalarField::from_fn(e.render(), move |_, y| {
        let d = eval_univariate(&e, y)?;
        Ok(Jet2::of_y([d[0], d[1], d[2]]))
    })
}

/// Field built from the jets of `(X, Y)` at a point.
fn separable(
    x_fn: &ScalarField,
    y_fn: &ScalarField,
    label: &str,
    op: impl Fn(Jet2, Jet2) -> Jet2 + Send + Sync + 'static,
) -> ScalarField {
    x_fn.zip(y_fn, label, op)
}

/// Requires a field to be nonzero with one sign over the whole grid.
fn require_definite(field: &ScalarField, chart: &Chart, what: &str) -> Result<()> {
    let mut sign = 0.0;
    for (x, y) in chart.grid() {
        let v = field.value(x, y)?;
        let s = if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        };
        if s == 0.0 || (sign != 0.0 && s != sign) {
            return Err(Error::InvariantViolation {
                x,
                y,
                message: format!("{what} must not vanish on the chart (value {v})"),
            });
        }
        sign = s;
    }
    Ok(())
}

/// `g = (X − Y)(dx² ± dy²)`, `ḡ = (1/Y − 1/X)(dx²/X ± dy²/Y)` and
/// `F = (X p_y² ± Y p_x²)/(X − Y)`.
pub fn gen_liouville(spec: &NormalFormSpec) -> Result<NormalFormPair> {
    let Variant::Liouville { x_fn, y_fn, sign } = &spec.variant else {
        return Err(Error::Unsupported(
            "gen_liouville needs a Liouville variant".into(),
        ));
    };
    let s = sign.value();
    let chart = spec.chart;
    let (xf, yf) = (univariate_x(x_fn), univariate_y(y_fn));
    let diff = separable(&xf, &yf, "X-Y", |a, b| a - b);
    require_definite(&diff, &chart, "X - Y")?;
    let zero = ScalarField::constant(0.0);
    let g = Metric2::new(diff.clone(), zero.clone(), diff.scale(s), chart)?;

    let gbar = if spec.with_partner {
        require_definite(&xf, &chart, "X")?;
        require_definite(&yf, &chart, "Y")?;
        let b11 = separable(&xf, &yf, "(1/Y-1/X)/X", |a, b| (b.recip() - a.recip()) / a);
        let b22 = separable(&xf, &yf, "(1/Y-1/X)/Y", move |a, b| {
            (b.recip() - a.recip()) / b * s
        });
        Some(Metric2::new(b11, zero.clone(), b22, chart)?)
    } else {
        None
    };

    let fa = separable(&xf, &yf, "±Y/(X-Y)", move |a, b| b / (a - b) * s);
    let fc = separable(&xf, &yf, "X/(X-Y)", |a, b| a / (a - b));
    Ok(NormalFormPair {
        family: Family::Liouville,
        g,
        gbar,
        integral: Some(QuadraticForm::new(fa, zero, fc)),
    })
}

fn complex_parts(h: &Expr) -> (ScalarField, ScalarField) {
    let part = |im: bool| {
        let h = h.clone();
        ScalarField::from_fn(if im { "Im h" } else { "Re h" }, move |x, y| {
            let (re, imj) = eval_complex(&h, Complex64::new(x, y))?.real_imag_jets();
            Ok(if im { imj } else { re })
        })
    };
    (part(false), part(true))
}

/// `g = 2 Im(h) dx dy`, `F = p_x² − p_y² + 2 (Re h / Im h) p_x p_y`.
pub fn gen_complex_liouville(spec: &NormalFormSpec) -> Result<NormalFormPair> {
    let Variant::ComplexLiouville { h } = &spec.variant else {
        return Err(Error::Unsupported(
            "gen_complex_liouville needs a complex-Liouville variant".into(),
        ));
    };
    let chart = spec.chart;
    let (re, im) = complex_parts(h);
    require_definite(&im, &chart, "Im h")?;
    let g = Metric2::null_form(&im.scale(2.0), chart)?;

    let gbar = if spec.with_partner {
        let rho = re.zip(&im, "Re h^2 + Im h^2", |r, i| r * r + i * i);
        require_definite(&rho, &chart, "Re h^2 + Im h^2")?;
        let b11 = re.zip(&im, "-(Im h/rho)^2", |r, i| {
            let q = i / (r * r + i * i);
            -(q * q)
        });
        let b12 = re.zip(&im, "Re h Im h/rho^2", |r, i| {
            let rho = r * r + i * i;
            r * i / (rho * rho)
        });
        let b22 = re.zip(&im, "(Im h/rho)^2", |r, i| {
            let q = i / (r * r + i * i);
            q * q
        });
        Some(Metric2::new(b11, b12, b22, chart)?)
    } else {
        None
    };

    let fb = re.zip(&im, "2 Re h/Im h", |r, i| (r / i).scale(2.0));
    Ok(NormalFormPair {
        family: Family::ComplexLiouville,
        g,
        gbar,
        integral: Some(QuadraticForm::new(
            ScalarField::constant(1.0),
            fb,
            ScalarField::constant(-1.0),
        )),
    })
}

/// `Y` as a field together with `1 + x Y′(y)`, both with exact jets.
fn jordan_fields(y_fn: &Expr) -> (ScalarField, ScalarField) {
    let yf = univariate_y(y_fn);
    let e = y_fn.clone();
    let f = ScalarField::from_fn(format!("1+x*d/dy({})", y_fn.render()), move |x, y| {
        let d = eval_univariate(&e, y)?;
        let yp = Jet2::of_y([d[1], d[2], d[3]]);
        Ok(Jet2::var_x(x) * yp + 1.0)
    });
    (yf, f)
}

/// `ḡ = (f/Y⁴)(−2Y dx dy + f dy²)` for a conformal factor `f` and a
/// function `Y` of `y`.
fn jordan_partner(f: &ScalarField, yf: &ScalarField, chart: Chart) -> Result<Metric2> {
    let b12 = f.zip(yf, "-f/Y^3", |f, y| -(f / y.powi(3)));
    let b22 = f.zip(yf, "f^2/Y^4", |f, y| f * f / y.powi(4));
    Metric2::new(ScalarField::constant(0.0), b12, b22, chart)
}

/// `g = (1 + x Y′) dx dy`, `F = p_x² − 2 Y/(1 + x Y′) p_x p_y`.
pub fn gen_jordan_block(spec: &NormalFormSpec) -> Result<NormalFormPair> {
    let Variant::JordanBlock { y_fn } = &spec.variant else {
        return Err(Error::Unsupported(
            "gen_jordan_block needs a Jordan-block variant".into(),
        ));
    };
    let chart = spec.chart;
    let (yf, f) = jordan_fields(y_fn);
    for (x, y) in chart.grid() {
        let v = f.value(x, y)?;
        if !(v > 0.0) {
            return Err(Error::InvariantViolation {
                x,
                y,
                message: format!("1 + x Y'(y) must be positive (value {v})"),
            });
        }
    }
    let g = Metric2::null_form(&f, chart)?;
    let gbar = if spec.with_partner {
        require_definite(&yf, &chart, "Y")?;
        Some(jordan_partner(&f, &yf, chart)?)
    } else {
        None
    };
    let b = f.zip(&yf, "-2Y/(1+xY')", |f, y| (y / f).scale(-2.0));
    Ok(NormalFormPair {
        family: Family::JordanBlock,
        g,
        gbar,
        integral: Some(QuadraticForm::new(
            ScalarField::constant(1.0),
            b,
            ScalarField::constant(0.0),
        )),
    })
}

/// `g = (Ỹ + x) dx dy` with partner `−2(Ỹ + x)/y³ dx dy + (Ỹ + x)²/y⁴ dy²`.
/// No integral is produced.
pub fn gen_jordan_killing_free(spec: &NormalFormSpec) -> Result<NormalFormPair> {
    let Variant::JordanKillingFree { y_tilde } = &spec.variant else {
        return Err(Error::Unsupported(
            "gen_jordan_killing_free needs a Killing-free variant".into(),
        ));
    };
    let chart = spec.chart;
    let yt = univariate_y(y_tilde);
    let f = yt.zip(&ScalarField::parse("x")?, "Y~+x", |a, b| a + b);
    require_definite(&f, &chart, "Y~(y) + x")?;
    let ycoord = ScalarField::parse("y")?;
    require_definite(&ycoord, &chart, "y")?;
    let g = Metric2::null_form(&f, chart)?;
    let gbar = if spec.with_partner {
        Some(jordan_partner(&f, &ycoord, chart)?)
    } else {
        None
    };
    Ok(NormalFormPair {
        family: Family::JordanBlock,
        g,
        gbar,
        integral: None,
    })
}

/// A sign-`−` Liouville pair rewritten in the null coordinates
/// `u = x + y`, `v = x − y`, where `g = (X − Y) du dv`.
#[derive(Debug, Clone)]
pub struct NullLiouville {
    pub f: ScalarField,
    pub integral: QuadraticForm,
    /// Largest axis-aligned square of `(u, v)` inside the image of the
    /// original chart, sampled like the original.
    pub chart: Chart,
}

/// Rotates a sign-`−` Liouville spec into null coordinates. Requires
/// `X > Y` on the chart so that the conformal factor is positive.
pub fn liouville_null_coordinates(spec: &NormalFormSpec) -> Result<NullLiouville> {
    let Variant::Liouville {
        x_fn,
        y_fn,
        sign: Sign::Minus,
    } = &spec.variant
    else {
        return Err(Error::Unsupported(
            "null coordinates exist only for the (+,-) Liouville form".into(),
        ));
    };
    let src = spec.chart;
    let (xf, yf) = (univariate_x(x_fn), univariate_y(y_fn));
    let diff = separable(&xf, &yf, "X-Y", |a, b| a - b);
    for (x, y) in src.grid() {
        let v = diff.value(x, y)?;
        if !(v > 0.0) {
            return Err(Error::InvariantViolation {
                x,
                y,
                message: format!("X - Y must be positive for null coordinates (value {v})"),
            });
        }
    }
    let a = [[0.5, 0.5], [0.5, -0.5]];
    let (cx, cy) = src.center();
    let half = 0.5 * src.width().min(src.height());
    let (cu, cv) = (cx + cy, cx - cy);
    let chart = Chart::new(
        [cu - half, cu + half],
        [cv - half, cv + half],
        src.nx,
        src.ny,
    )?;
    let generic = spec.clone();
    let pair = gen_liouville(&NormalFormSpec {
        with_partner: false,
        ..generic
    })?;
    let integral = pair
        .integral
        .expect("Liouville pairs carry an integral")
        .linear_change(a, [0.0, 0.0]);
    Ok(NullLiouville {
        f: diff.linear_pullback(a, [0.0, 0.0]),
        integral,
        chart,
    })
}

/// Checks `−¼ (h̄(z̄) − h(z)) (dz̄² − dz²) = 2 Im(h) dx dy` at one point.
///
/// Both sides are expanded into `dx²`, `dx dy`, `dy²` coefficients via
/// `dz = dx + i dy`; returns the largest absolute coefficient difference.
pub fn complex_metric_identity_residual(h: &Expr, x: f64, y: f64) -> Result<f64, DomainError> {
    let hv = eval_complex(h, Complex64::new(x, y))?.v;
    let quad = |v: [f64; 2]| {
        let dz = Complex64::new(v[0], v[1]);
        -0.25 * (hv.conj() - hv) * (dz.conj() * dz.conj() - dz * dz)
    };
    let (q1, q2, q12) = (quad([1.0, 0.0]), quad([0.0, 1.0]), quad([1.0, 1.0]));
    let mixed = q12 - q1 - q2;
    let target = [0.0, 2.0 * hv.im, 0.0];
    Ok([q1, mixed, q2]
        .iter()
        .zip(target)
        .map(|(q, t)| (q - Complex64::new(t, 0.0)).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{verify_integral, verify_null_form, DEFAULT_VERIFY_TOL};
    use crate::geometry::{classify_pair, g_tensor_at, metric_at, DEFAULT_CLASSIFY_TOL};
    use approx::assert_relative_eq;

    fn chart(x: [f64; 2], y: [f64; 2]) -> Chart {
        Chart::new(x, y, 11, 11).unwrap()
    }

    fn coeffs(m: &Metric2, x: f64, y: f64) -> [f64; 3] {
        let p = metric_at(m, x, y).unwrap().m;
        [p[0][0], p[0][1], p[1][1]]
    }

    #[test]
    fn liouville_examples() {
        let v = Variant::liouville("2+x^2", "-1-y^2", Sign::Minus).unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([-0.5, 0.5], [-0.5, 0.5]))).unwrap();
        assert_eq!(coeffs(&pair.g, 0.0, 0.0), [3.0, 0.0, -3.0]);
        let f = pair.integral.as_ref().unwrap();
        assert_relative_eq!(
            f.coefficients(0.0, 0.0).unwrap()[0],
            1.0 / 3.0,
            epsilon = 1e-15
        );
        let rep = verify_integral(&pair.g, f, DEFAULT_VERIFY_TOL).unwrap();
        assert!(rep.max_residual < 1e-10, "{rep:?}");
        let cls =
            classify_pair(&pair.g, pair.gbar.as_ref().unwrap(), DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(cls.modal, CaseTag::RealDistinct);

        let v = Variant::liouville("2", "1", Sign::Plus).unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([0.0, 1.0], [0.0, 1.0]))).unwrap();
        assert_eq!(
            coeffs(pair.gbar.as_ref().unwrap(), 0.3, 0.3),
            [0.25, 0.0, 0.5]
        );
    }

    #[test]
    fn liouville_tensor_closed_form() {
        let v = Variant::liouville("3+x", "-1+y^2", Sign::Plus).unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([-0.5, 0.5], [-0.5, 0.5]))).unwrap();
        for (x, y) in pair.g.chart.grid() {
            let (xv, yv) = (3.0 + x, -1.0 + y * y);
            let m = g_tensor_at(&pair.g, pair.gbar.as_ref().unwrap(), x, y).unwrap();
            assert_relative_eq!(m[0][0], 1.0 / (xv * xv * yv), max_relative = 1e-10);
            assert_relative_eq!(m[1][1], 1.0 / (xv * yv * yv), max_relative = 1e-10);
            assert!(m[0][1].abs() < 1e-14 && m[1][0].abs() < 1e-14);
        }
    }

    #[test]
    fn liouville_rejects_crossing() {
        let v = Variant::liouville("x", "0", Sign::Minus).unwrap();
        let err = generate(&NormalFormSpec::new(v, chart([-1.0, 1.0], [0.0, 1.0]))).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }), "{err}");
    }

    #[test]
    fn complex_examples() {
        let v = Variant::complex_liouville("z").unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([0.0, 1.5], [0.5, 2.0]))).unwrap();
        assert_relative_eq!(coeffs(&pair.g, 1.0, 1.0)[1], 1.0, epsilon = 1e-15);
        let gb = coeffs(pair.gbar.as_ref().unwrap(), 1.0, 1.0);
        assert_relative_eq!(gb[0], -0.25, epsilon = 1e-15);
        // dx dy coefficient 0.5, so g12 = 0.25
        assert_relative_eq!(gb[1], 0.25, epsilon = 1e-15);
        assert_relative_eq!(gb[2], 0.25, epsilon = 1e-15);
        let f = pair.integral.as_ref().unwrap();
        assert_relative_eq!(
            f.coefficients(0.6, 1.5).unwrap()[1],
            2.0 * 0.6 / 1.5,
            epsilon = 1e-15
        );
        assert!(
            verify_integral(&pair.g, f, DEFAULT_VERIFY_TOL)
                .unwrap()
                .max_residual
                < 1e-10
        );
        let cls =
            classify_pair(&pair.g, pair.gbar.as_ref().unwrap(), DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(cls.modal, CaseTag::ComplexPair);
        assert_eq!(cls.fraction, 1.0);
    }

    #[test]
    fn jordan_examples() {
        let v = Variant::jordan_block("y").unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([-0.5, 0.5], [0.5, 2.0]))).unwrap();
        let f = pair.integral.as_ref().unwrap();
        let s = crate::dynamics::PhaseState::new(0.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(
            crate::dynamics::quadratic_value(f, &s).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        assert_eq!(
            coeffs(pair.gbar.as_ref().unwrap(), 0.0, 1.0),
            [0.0, -1.0, 1.0]
        );
        let nf = pair.g.null_factor().unwrap();
        assert!(
            verify_null_form(&nf, f, &pair.g.chart, DEFAULT_VERIFY_TOL)
                .unwrap()
                .max_residual
                < 1e-10
        );
        let cls =
            classify_pair(&pair.g, pair.gbar.as_ref().unwrap(), DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(cls.modal, CaseTag::JordanBlock);
    }

    #[test]
    fn jordan_tensor_closed_form() {
        let v = Variant::jordan_block("1.5+0.3*y-0.2*y^3").unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([-0.5, 0.5], [-0.5, 0.5]))).unwrap();
        for (x, y) in pair.g.chart.grid() {
            let yv = 1.5 + 0.3 * y - 0.2 * y.powi(3);
            let f = 1.0 + x * (0.3 - 0.6 * y * y);
            let m = g_tensor_at(&pair.g, pair.gbar.as_ref().unwrap(), x, y).unwrap();
            assert_relative_eq!(m[0][0], -2.0 / yv.powi(3), max_relative = 1e-12);
            assert_relative_eq!(m[0][1], 2.0 * f / yv.powi(4), max_relative = 1e-12);
            assert!(m[1][0].abs() < 1e-14);
            assert_relative_eq!(m[1][1], -2.0 / yv.powi(3), max_relative = 1e-12);
        }
    }

    #[test]
    fn killing_free_examples() {
        let v = Variant::jordan_killing_free("2").unwrap();
        let pair = generate(&NormalFormSpec::new(v, chart([-0.5, 0.5], [0.5, 2.0]))).unwrap();
        assert_eq!(coeffs(&pair.g, 0.0, 1.0)[1], 1.0);
        // dx dy coefficient −4 means g12 = −2
        assert_eq!(
            coeffs(pair.gbar.as_ref().unwrap(), 0.0, 1.0),
            [0.0, -2.0, 4.0]
        );
        assert!(pair.integral.is_none());
        assert!(matches!(
            Variant::jordan_killing_free("-x"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn null_coordinates_of_liouville() {
        let v = Variant::liouville("3+0.2*x^3", "-1+0.1*y", Sign::Minus).unwrap();
        let spec = NormalFormSpec::new(v, chart([-0.5, 0.5], [-0.5, 0.5]));
        let n = liouville_null_coordinates(&spec).unwrap();
        let [a, b, c] = n.integral.coefficients(0.2, -0.1).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c, 1.0, epsilon = 1e-14);
        let (x, y) = (0.05, 0.15);
        let (xv, yv) = (3.0 + 0.2 * x * x * x, -1.0 + 0.1 * y);
        assert_relative_eq!(b, -2.0 * (xv + yv) / (xv - yv), epsilon = 1e-14);
        assert_relative_eq!(n.f.value(0.2, -0.1).unwrap(), xv - yv, epsilon = 1e-14);
        assert!(
            verify_null_form(&n.f, &n.integral, &n.chart, DEFAULT_VERIFY_TOL)
                .unwrap()
                .max_residual
                < 1e-10
        );
    }

    #[test]
    fn complex_metric_identity_examples() {
        let z = parse("z", Context::Complex).unwrap();
        assert_eq!(
            complex_metric_identity_residual(&z, 0.3, -1.7).unwrap(),
            0.0
        );
        let z2 = parse("z^2", Context::Complex).unwrap();
        assert!(complex_metric_identity_residual(&z2, 1.0, 2.0).unwrap() < 1e-12);
        let ez = parse("exp(z)", Context::Complex).unwrap();
        assert!(complex_metric_identity_residual(&ez, 0.0, 1.0).unwrap() < 1e-12);
    }
}
