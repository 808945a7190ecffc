//! Bridges between metric pairs and quadratic integrals: the projective
//! integral `I`, the PDE system in null coordinates, bracket-based
//! verification and the triviality test.

use serde::Serialize;

use crate::dynamics::{poisson_bracket, MomentumQuadratic, PhaseState};
use crate::error::{Error, Result};
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::{invert, metric_at, Chart, Metric2};

/// Default pass threshold of [`verify_integral`] on normalised residuals.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;

/// Default threshold of [`triviality_check`].
pub const DEFAULT_TRIVIAL_TOL: f64 = 1e-8;

/// `(det g / det ḡ)^{2/3}` via the real cube root.
pub fn det_ratio_factor(g: &Metric2, gbar: &Metric2, x: f64, y: f64) -> Result<f64> {
    let p = metric_at(g, x, y)?;
    let q = metric_at(gbar, x, y)?;
    let ratio = p.det / q.det;
    if ratio < 0.0 {
        return Err(Error::SignatureMismatch { x, y });
    }
    Ok(ratio.cbrt().powi(2))
}

/// `I(ξ) = ḡ(ξ, ξ) (det g / det ḡ)^{2/3}` for a tangent vector `ξ` at `(x, y)`.
pub fn projective_integral(
    g: &Metric2,
    gbar: &Metric2,
    x: f64,
    y: f64,
    xi: [f64; 2],
) -> Result<f64> {
    let factor = det_ratio_factor(g, gbar, x, y)?;
    let q = metric_at(gbar, x, y)?.m;
    let quad = q[0][0] * xi[0] * xi[0] + 2.0 * q[0][1] * xi[0] * xi[1] + q[1][1] * xi[1] * xi[1];
    Ok(quad * factor)
}

/// `I` at a phase point, with the velocity `ξ = g⁻¹ p` obtained by raising
/// the momentum with `g`.
pub fn projective_integral_at(g: &Metric2, gbar: &Metric2, s: &PhaseState) -> Result<f64> {
    let p = metric_at(g, s.x, s.y)?;
    let inv = invert(&p.m, p.det);
    let xi = [
        inv[0][0] * s.px + inv[0][1] * s.py,
        inv[1][0] * s.px + inv[1][1] * s.py,
    ];
    projective_integral(g, gbar, s.x, s.y, xi)
}

/// Least-squares fit `I ≈ α F + β H` over a set of phase points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AffineFit {
    pub alpha: f64,
    pub beta: f64,
    /// `max |I − α F − β H| / max |I|`.
    pub residual: f64,
}

pub fn fit_integral_relation(
    g: &Metric2,
    gbar: &Metric2,
    f: &QuadraticForm,
    states: &[PhaseState],
) -> Result<AffineFit> {
    let mut rows = Vec::with_capacity(states.len());
    for s in states {
        let i = projective_integral_at(g, gbar, s)?;
        let fv = crate::dynamics::quadratic_value(f, s)?;
        let hv = crate::dynamics::hamiltonian(g, s)?;
        rows.push((i, fv, hv));
    }
    // Normal equations of the 2-parameter problem.
    let (mut sff, mut sfh, mut shh, mut sif, mut sih) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(i, fv, hv) in &rows {
        sff += fv * fv;
        sfh += fv * hv;
        shh += hv * hv;
        sif += i * fv;
        sih += i * hv;
    }
    let det = sff * shh - sfh * sfh;
    let (alpha, beta) = if det.abs() > 1e-14 * sff * shh {
        ((sif * shh - sih * sfh) / det, (sih * sff - sif * sfh) / det)
    } else if sff > 0.0 {
        (sif / sff, 0.0)
    } else {
        (0.0, 0.0)
    };
    let scale = rows
        .iter()
        .map(|r| r.0.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let residual = rows
        .iter()
        .map(|&(i, fv, hv)| (i - alpha * fv - beta * hv).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(AffineFit {
        alpha,
        beta,
        residual,
    })
}

/// A metric `ds² = f dx dy` with `f > 0` on the chart grid.
#[derive(Debug, Clone)]
pub struct NullFormMetric {
    pub f: ScalarField,
    pub chart: Chart,
}

impl NullFormMetric {
    pub fn new(f: ScalarField, chart: Chart) -> Result<Self> {
        for (x, y) in chart.grid() {
            let v = f.value(x, y)?;
            if !(v > 0.0) {
                return Err(Error::InvariantViolation {
                    x,
                    y,
                    message: format!("conformal factor must be positive, got {v}"),
                });
            }
        }
        Ok(NullFormMetric { f, chart })
    }

    pub fn metric(&self) -> Result<Metric2> {
        Metric2::null_form(&self.f, self.chart)
    }
}

/// Left-hand sides of the integrability system for `F` and `ds² = f dx dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SysResiduals {
    /// `a_y`
    pub r1: f64,
    /// `f a_x + f b_y + 2 f_x a + f_y b`
    pub r2: f64,
    /// `f b_x + f c_y + f_x b + 2 f_y c`
    pub r3: f64,
    /// `c_x`
    pub r4: f64,
}

impl SysResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.r1, self.r2, self.r3, self.r4]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// `{H, F}` at momentum `p` assembled from the residuals, for
    /// `H = ½ g^{ij} p_i p_j = 2 p_x p_y / f`.
    pub fn bracket(&self, f: f64, px: f64, py: f64) -> f64 {
        -(2.0 / (f * f))
            * (f * self.r1 * px.powi(3)
                + self.r2 * px * px * py
                + self.r3 * px * py * py
                + f * self.r4 * py.powi(3))
    }
}

pub fn sys_residuals(
    f: &ScalarField,
    form: &QuadraticForm,
    x: f64,
    y: f64,
) -> Result<SysResiduals> {
    let fj = f.jet(x, y)?;
    let [a, b, c] = form.jets(x, y)?;
    Ok(SysResiduals {
        r1: a.dy,
        r2: fj.v * a.dx + fj.v * b.dy + 2.0 * fj.dx * a.v + fj.dy * b.v,
        r3: fj.v * b.dx + fj.v * c.dy + fj.dx * b.v + 2.0 * fj.dy * c.v,
        r4: c.dx,
    })
}

/// Normalisation of the residuals at a point:
/// `(1 + |f| + |f_x| + |f_y|)(1 + |a| + |b| + |c|)`.
fn sys_scale(f: &ScalarField, form: &QuadraticForm, x: f64, y: f64) -> Result<f64> {
    let fj = f.jet(x, y)?;
    let [a, b, c] = form.coefficients(x, y)?;
    Ok((1.0 + fj.v.abs() + fj.dx.abs() + fj.dy.abs()) * (1.0 + a.abs() + b.abs() + c.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerifyMethod {
    SysResiduals,
    PoissonBracket,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub method: VerifyMethod,
    /// Largest normalised residual over the grid.
    pub max_residual: f64,
    pub worst_point: [f64; 2],
    pub tolerance: f64,
    pub passed: bool,
    pub points: usize,
}

/// The momenta at which a bracket (a cubic in `p`) is sampled; four values
/// pin the four cubic coefficients.
pub const MOMENTUM_BASIS: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]];

fn finish(method: VerifyMethod, worst: (f64, [f64; 2]), tol: f64, points: usize) -> VerifyReport {
    VerifyReport {
        method,
        max_residual: worst.0,
        worst_point: worst.1,
        tolerance: tol,
        passed: worst.0 < tol,
        points,
    }
}

/// Grid check of the integrability system for `ds² = f dx dy`.
pub fn verify_null_form(
    f: &ScalarField,
    form: &QuadraticForm,
    chart: &Chart,
    tol: f64,
) -> Result<VerifyReport> {
    let mut worst = (0.0, [f64::NAN; 2]);
    let mut points = 0;
    for (x, y) in chart.grid() {
        let r = sys_residuals(f, form, x, y)?.max_abs() / sys_scale(f, form, x, y)?;
        if r > worst.0 || worst.1[0].is_nan() {
            worst = (r, [x, y]);
        }
        points += 1;
    }
    Ok(finish(VerifyMethod::SysResiduals, worst, tol, points))
}

/// Grid check of `{H, F} = 0` through the Poisson bracket.
pub fn verify_bracket(g: &Metric2, form: &QuadraticForm, tol: f64) -> Result<VerifyReport> {
    let mut worst = (0.0, [f64::NAN; 2]);
    let mut points = 0;
    for (x, y) in g.chart.grid() {
        let hj = g.momentum_jets(x, y)?;
        let fj = form.jets(x, y)?;
        let size = |js: &[crate::expr::Jet2; 3]| {
            1.0 + js
                .iter()
                .map(|j| j.v.abs() + j.dx.abs() + j.dy.abs())
                .sum::<f64>()
        };
        let scale = size(&hj) * size(&fj);
        for p in MOMENTUM_BASIS {
            let s = PhaseState::new(x, y, p[0], p[1]);
            let r = poisson_bracket(g, form, &s)?.abs() / scale;
            if r > worst.0 || worst.1[0].is_nan() {
                worst = (r, [x, y]);
            }
        }
        points += 1;
    }
    Ok(finish(VerifyMethod::PoissonBracket, worst, tol, points))
}

/// Verifies that `F` is a first integral of the geodesic flow of `g`.
///
/// Null-form metrics go through the integrability system; any other metric
/// through the Poisson bracket on the momentum basis.
pub fn verify_integral(g: &Metric2, form: &QuadraticForm, tol: f64) -> Result<VerifyReport> {
    match g.null_factor() {
        Some(f) => verify_null_form(&f, form, &g.chart, tol),
        None => verify_bracket(g, form, tol),
    }
}

/// Agreement between the two verification routes on a null-form metric.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub sys: VerifyReport,
    pub bracket: VerifyReport,
    /// `max |{H,F} − (−2/f²)·cubic(r)|` over grid points and the momentum basis.
    pub max_difference: f64,
    pub same_verdict: bool,
}

pub fn cross_check(
    f: &ScalarField,
    form: &QuadraticForm,
    chart: &Chart,
    tol: f64,
) -> Result<CrossCheck> {
    let g = Metric2::null_form(f, *chart)?;
    let sys = verify_null_form(f, form, chart, tol)?;
    let bracket = verify_bracket(&g, form, tol)?;
    let mut max_difference: f64 = 0.0;
    for (x, y) in chart.grid() {
        let r = sys_residuals(f, form, x, y)?;
        let fv = f.value(x, y)?;
        for p in MOMENTUM_BASIS {
            let direct = poisson_bracket(&g, form, &PhaseState::new(x, y, p[0], p[1]))?;
            max_difference = max_difference.max((direct - r.bracket(fv, p[0], p[1])).abs());
        }
    }
    Ok(CrossCheck {
        same_verdict: sys.passed == bracket.passed,
        sys,
        bracket,
        max_difference,
    })
}

/// Largest relative `|a_y|` and `|c_x|` on the grid (both vanish for an
/// integral in null coordinates).
pub fn axis_dependence(form: &QuadraticForm, chart: &Chart) -> Result<(f64, f64)> {
    let (mut ay, mut cx): (f64, f64) = (0.0, 0.0);
    for (x, y) in chart.grid() {
        let [a, _, c] = form.jets(x, y)?;
        ay = ay.max(a.dy.abs() / (1.0 + a.v.abs() + a.dx.abs()));
        cx = cx.max(c.dx.abs() / (1.0 + c.v.abs() + c.dy.abs()));
    }
    Ok((ay, cx))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Triviality {
    pub trivial: bool,
    /// Best `λ` in `F ≈ λ H`.
    pub lambda: f64,
    /// `max ‖F − λ H‖ / max ‖F‖` over the grid (coefficient-wise).
    pub deviation: f64,
}

/// Decides whether `F` is a constant multiple of the Hamiltonian of `g`.
pub fn triviality_check(form: &QuadraticForm, g: &Metric2, tol: f64) -> Result<Triviality> {
    let mut samples = Vec::new();
    for (x, y) in g.chart.grid() {
        let h = g.momentum_jets(x, y)?.map(|j| j.v);
        samples.push((form.coefficients(x, y)?, h));
    }
    let dot = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let (num, den) = samples
        .iter()
        .fold((0.0, 0.0), |(n, d), (f, h)| (n + dot(f, h), d + dot(h, h)));
    let lambda = if den > 0.0 { num / den } else { 0.0 };
    let norm = |v: [f64; 3]| dot(&v, &v).sqrt();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (f, h) in &samples {
        let diff = [
            f[0] - lambda * h[0],
            f[1] - lambda * h[1],
            f[2] - lambda * h[2],
        ];
        worst = worst.max(norm(diff));
        scale = scale.max(norm(*f));
    }
    let deviation = if scale > 0.0 { worst / scale } else { 0.0 };
    Ok(Triviality {
        trivial: deviation <= tol,
        lambda,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chart(x: [f64; 2], y: [f64; 2]) -> Chart {
        Chart::new(x, y, 9, 9).unwrap()
    }

    #[test]
    fn projective_integral_of_proportional_metrics() {
        let c = chart([-0.5, 0.5], [-0.5, 0.5]);
        let g = Metric2::parse("2+x^2", "0.3*y", "1", c).unwrap();
        let xi = [0.4, -1.3];
        let gxx = {
            let m = metric_at(&g, 0.1, 0.2).unwrap().m;
            m[0][0] * xi[0] * xi[0] + 2.0 * m[0][1] * xi[0] * xi[1] + m[1][1] * xi[1] * xi[1]
        };
        assert_relative_eq!(
            projective_integral(&g, &g, 0.1, 0.2, xi).unwrap(),
            gxx,
            epsilon = 1e-14
        );
        let g3 = g.scale(3.0).unwrap();
        let i = projective_integral(&g, &g3, 0.1, 0.2, xi).unwrap();
        assert_relative_eq!(i, 3f64.powf(-1.0 / 3.0) * gxx, epsilon = 1e-13);
        let flipped = Metric2::parse("2+x^2", "0.3*y", "-1", c).unwrap();
        assert!(matches!(
            projective_integral(&g, &flipped, 0.1, 0.2, xi),
            Err(Error::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn sys_examples() {
        let one = ScalarField::constant(1.0);
        let f = QuadraticForm::parse("1", "0", "0").unwrap();
        assert_eq!(sys_residuals(&one, &f, 0.2, 0.3).unwrap().max_abs(), 0.0);
        let fj = ScalarField::parse("1+x").unwrap();
        let jordan = QuadraticForm::parse("1", "-2*y/(1+x)", "0").unwrap();
        assert!(sys_residuals(&fj, &jordan, 0.3, 1.2).unwrap().max_abs() < 1e-15);
        let fc = ScalarField::parse("2*y").unwrap();
        let complex = QuadraticForm::parse("1", "2*x/y", "-1").unwrap();
        assert!(sys_residuals(&fc, &complex, 0.7, 1.3).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn verify_examples() {
        let c = chart([-0.5, 0.5], [0.5, 2.0]);
        let fj = ScalarField::parse("1+x").unwrap();
        let jordan = QuadraticForm::parse("1", "-2*y/(1+x)", "0").unwrap();
        let rep = verify_null_form(&fj, &jordan, &c, DEFAULT_VERIFY_TOL).unwrap();
        assert!(rep.passed && rep.max_residual < 1e-12);
        let g = Metric2::null_form(&fj, c).unwrap();
        let h_form = QuadraticForm::parse("0", "2/(1+x)", "0").unwrap();
        assert!(
            verify_integral(&g, &h_form, DEFAULT_VERIFY_TOL)
                .unwrap()
                .max_residual
                < 1e-12
        );
        let perturbed = QuadraticForm::parse("1", "-2*y/(1+x)+0.01*x", "0").unwrap();
        let rep = verify_integral(&g, &perturbed, DEFAULT_VERIFY_TOL).unwrap();
        assert!(rep.max_residual > 1e-4 && !rep.passed);
        let cc = cross_check(&fj, &perturbed, &c, DEFAULT_VERIFY_TOL).unwrap();
        assert!(cc.same_verdict && cc.max_difference < 1e-9);
    }

    #[test]
    fn bracket_route_on_general_metric() {
        let c = chart([-0.5, 0.5], [-0.5, 0.5]);
        let g = Metric2::parse("2+x^2", "0.3*y", "1+y^2", c).unwrap();
        // H's own coefficient form is always an integral.
        let inv = |k: usize| {
            let g = g.clone();
            ScalarField::from_fn("inverse", move |x, y| {
                let j = g
                    .momentum_jets(x, y)
                    .map_err(|e| crate::DomainError::new("H", e.to_string()))?;
                Ok(j[k])
            })
        };
        let h_form = QuadraticForm::new(inv(0), inv(1), inv(2));
        assert!(
            verify_bracket(&g, &h_form, DEFAULT_VERIFY_TOL)
                .unwrap()
                .max_residual
                < 1e-12
        );
    }

    #[test]
    fn triviality_examples() {
        let c = chart([-0.5, 0.5], [0.5, 2.0]);
        let f = ScalarField::parse("1+x").unwrap();
        let g = Metric2::null_form(&f, c).unwrap();
        let three_h = QuadraticForm::parse("0", "6/(1+x)", "0").unwrap();
        let t = triviality_check(&three_h, &g, DEFAULT_TRIVIAL_TOL).unwrap();
        assert!(t.trivial);
        assert_relative_eq!(t.lambda, 3.0, epsilon = 1e-12);
        let five_h = QuadraticForm::parse("0", "5/(1+x)", "0").unwrap();
        assert!(
            triviality_check(&five_h, &g, DEFAULT_TRIVIAL_TOL)
                .unwrap()
                .trivial
        );
        let jordan = QuadraticForm::parse("1", "-2*y/(1+x)", "0").unwrap();
        assert!(
            !triviality_check(&jordan, &g, DEFAULT_TRIVIAL_TOL)
                .unwrap()
                .trivial
        );
    }
}
