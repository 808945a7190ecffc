//! Admissible coordinate changes `x_new = φ(x)`, `y_new = ψ(y)` and their
//! action on null-form metrics and quadratic integrals.

use std::fmt;
use std::sync::Arc;

use crate::error::{DomainError, Error, Result};
use crate::expr::{eval_univariate, parse, Context, Expr, Jet2};
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::Chart;

/// Number of samples used to validate monotonicity.
const MONOTONE_SAMPLES: usize = 257;

/// A strictly increasing map of one variable.
pub trait MonotoneMap: fmt::Debug + Send + Sync {
    /// `[φ, φ′, φ″, φ‴]` at `t`.
    fn derivatives(&self, t: f64) -> Result<[f64; 4], DomainError>;

    /// Interval on which the map was validated.
    fn domain(&self) -> [f64; 2];

    fn forward(&self, t: f64) -> Result<f64, DomainError> {
        Ok(self.derivatives(t)?[0])
    }

    /// Solves `φ(t) = s` by safeguarded Newton iteration to `1e-12`.
    fn inverse(&self, s: f64) -> Result<f64, DomainError> {
        invert_monotone(self, s)
    }
}

fn invert_monotone<M: MonotoneMap + ?Sized>(map: &M, s: f64) -> Result<f64, DomainError> {
    let [mut lo, mut hi] = map.domain();
    let width = hi - lo;
    let (mut flo, mut fhi) = (map.forward(lo)? - s, map.forward(hi)? - s);
    // Points marginally outside the validated range still invert.
    let mut grow = 0;
    while flo > 0.0 || fhi < 0.0 {
        grow += 1;
        if grow > 8 {
            return Err(DomainError::new(
                format!("{map:?}"),
                format!("value {s} outside the map's range"),
            ));
        }
        if flo > 0.0 {
            lo -= width * 0.5f64.powi(8 - grow);
            flo = map.forward(lo)? - s;
        }
        if fhi < 0.0 {
            hi += width * 0.5f64.powi(8 - grow);
            fhi = map.forward(hi)? - s;
        }
    }
    let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let mut t = lo + (hi - lo) * (-flo / (fhi - flo));
    for _ in 0..200 {
        let d = map.derivatives(t)?;
        let r = d[0] - s;
        if r == 0.0 {
            return Ok(t);
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - r / d[1];
        let next = if newton > lo && newton < hi && d[1] > 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}

/// Checks `φ′ > 0` on evenly spaced samples of the domain.
pub fn check_monotone(map: &dyn MonotoneMap) -> Result<()> {
    let [lo, hi] = map.domain();
    for k in 0..MONOTONE_SAMPLES {
        let t = lo + (hi - lo) * k as f64 / (MONOTONE_SAMPLES - 1) as f64;
        let d = map.derivatives(t)?;
        if !(d[1] > 0.0) {
            return Err(Error::NonMonotone { at: t });
        }
    }
    Ok(())
}

/// A coordinate map given by an expression of one variable.
#[derive(Clone)]
pub struct ExprMap {
    expr: Expr,
    domain: [f64; 2],
}

impl fmt::Debug for ExprMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExprMap({})", self.expr)
    }
}

impl ExprMap {
    /// Parses `text` as a function of `x` (`axis_y = false`) or `y` and
    /// validates monotonicity on `domain`.
    pub fn parse(text: &str, axis_y: bool, domain: [f64; 2]) -> Result<ExprMap> {
        let context = if axis_y {
            Context::FunctionOfY
        } else {
            Context::FunctionOfX
        };
        let map = ExprMap {
            expr: parse(text, context)?,
            domain,
        };
        check_monotone(&map)?;
        Ok(map)
    }
}

impl MonotoneMap for ExprMap {
    fn derivatives(&self, t: f64) -> Result<[f64; 4], DomainError> {
        eval_univariate(&self.expr, t)
    }

    fn domain(&self) -> [f64; 2] {
        self.domain
    }
}

/// `t ↦ t`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap {
    pub domain: [f64; 2],
}

impl MonotoneMap for IdentityMap {
    fn derivatives(&self, t: f64) -> Result<[f64; 4], DomainError> {
        Ok([t, 1.0, 0.0, 0.0])
    }

    fn domain(&self) -> [f64; 2] {
        self.domain
    }

    fn inverse(&self, s: f64) -> Result<f64, DomainError> {
        Ok(s)
    }
}

/// Derivatives `[p′, p″, p‴]` of `p = φ⁻¹` at `φ(t)` from those of `φ` at `t`.
fn inverse_derivatives(d: [f64; 4]) -> [f64; 3] {
    let (d1, d2, d3) = (d[1], d[2], d[3]);
    [
        1.0 / d1,
        -d2 / d1.powi(3),
        -d3 / d1.powi(4) + 3.0 * d2 * d2 / d1.powi(5),
    ]
}

/// The inverse of another monotone map.
#[derive(Debug, Clone)]
pub struct InverseMap(pub Arc<dyn MonotoneMap>);

impl MonotoneMap for InverseMap {
    fn derivatives(&self, s: f64) -> Result<[f64; 4], DomainError> {
        let t = self.0.inverse(s)?;
        let [p1, p2, p3] = inverse_derivatives(self.0.derivatives(t)?);
        Ok([t, p1, p2, p3])
    }

    fn domain(&self) -> [f64; 2] {
        let [lo, hi] = self.0.domain();
        // Validated maps are increasing, so the image of the ends is ordered.
        [
            self.0.forward(lo).unwrap_or(f64::NEG_INFINITY),
            self.0.forward(hi).unwrap_or(f64::INFINITY),
        ]
    }

    fn inverse(&self, t: f64) -> Result<f64, DomainError> {
        self.0.forward(t)
    }
}

/// `x_new = φ(x)`, `y_new = ψ(y)` with both maps strictly increasing.
#[derive(Debug, Clone)]
pub struct AdmissibleChange {
    pub phi: Arc<dyn MonotoneMap>,
    pub psi: Arc<dyn MonotoneMap>,
}

impl AdmissibleChange {
    pub fn new(phi: Arc<dyn MonotoneMap>, psi: Arc<dyn MonotoneMap>) -> Result<Self> {
        check_monotone(phi.as_ref())?;
        check_monotone(psi.as_ref())?;
        Ok(AdmissibleChange { phi, psi })
    }

    /// Both maps from expressions, validated on the chart's ranges.
    pub fn parse(phi: &str, psi: &str, chart: &Chart) -> Result<Self> {
        Ok(AdmissibleChange {
            phi: Arc::new(ExprMap::parse(phi, false, chart.x_range)?),
            psi: Arc::new(ExprMap::parse(psi, true, chart.y_range)?),
        })
    }

    pub fn identity(chart: &Chart) -> Self {
        AdmissibleChange {
            phi: Arc::new(IdentityMap {
                domain: chart.x_range,
            }),
            psi: Arc::new(IdentityMap {
                domain: chart.y_range,
            }),
        }
    }

    pub fn inverse(&self) -> Self {
        AdmissibleChange {
            phi: Arc::new(InverseMap(self.phi.clone())),
            psi: Arc::new(InverseMap(self.psi.clone())),
        }
    }

    /// Image of a chart, with the same sample counts.
    pub fn map_chart(&self, chart: &Chart) -> Result<Chart> {
        let x = [
            self.phi.forward(chart.x_range[0])?,
            self.phi.forward(chart.x_range[1])?,
        ];
        let y = [
            self.psi.forward(chart.y_range[0])?,
            self.psi.forward(chart.y_range[1])?,
        ];
        Chart::new(x, y, chart.nx, chart.ny)
    }
}

/// Jets in new coordinates of the inverse maps: `(x_old, y_old)`, and the
/// jets of `p′(X)`, `q′(Y)`.
struct Pullback {
    x_old: f64,
    y_old: f64,
    p: [f64; 3],
    q: [f64; 3],
}

fn pullback(change: &AdmissibleChange, xn: f64, yn: f64) -> Result<Pullback, DomainError> {
    let x_old = change.phi.inverse(xn)?;
    let y_old = change.psi.inverse(yn)?;
    Ok(Pullback {
        x_old,
        y_old,
        p: inverse_derivatives(change.phi.derivatives(x_old)?),
        q: inverse_derivatives(change.psi.derivatives(y_old)?),
    })
}

impl Pullback {
    fn compose(&self, field: &ScalarField) -> Result<Jet2, DomainError> {
        let j = field.jet(self.x_old, self.y_old)?;
        Ok(j.compose_separable([self.p[0], self.p[1]], [self.q[0], self.q[1]]))
    }

    fn p_prime(&self) -> Jet2 {
        Jet2::of_x(self.p)
    }

    fn q_prime(&self) -> Jet2 {
        Jet2::of_y(self.q)
    }
}

/// Transforms `ds² = f dx dy` and `F` under an admissible change.
///
/// `f_new = f(p, q) p′ q′` with `p = φ⁻¹`, `q = ψ⁻¹`; the momenta transform
/// as `p_x = φ′ p_{x_new}`, so `a_new = a φ′²`, `b_new = b φ′ ψ′`,
/// `c_new = c ψ′²`, all pulled back to the new coordinates.
pub fn apply_admissible_change(
    f: &ScalarField,
    form: &QuadraticForm,
    change: &AdmissibleChange,
) -> (ScalarField, QuadraticForm) {
    let make = |field: &ScalarField, label: &str, weight: fn(&Pullback) -> Jet2| {
        let (field, change) = (field.clone(), change.clone());
        ScalarField::from_fn(format!("{label}[{}]", field.label()), move |xn, yn| {
            let pb = pullback(&change, xn, yn)?;
            Ok(pb.compose(&field)? * weight(&pb))
        })
    };
    let f_new = make(f, "f", |pb| pb.p_prime() * pb.q_prime());
    let a = make(&form.a, "a", |pb| {
        let r = pb.p_prime().recip();
        r * r
    });
    let b = make(&form.b, "b", |pb| (pb.p_prime() * pb.q_prime()).recip());
    let c = make(&form.c, "c", |pb| {
        let r = pb.q_prime().recip();
        r * r
    });
    (f_new, QuadraticForm::new(a, b, c))
}
