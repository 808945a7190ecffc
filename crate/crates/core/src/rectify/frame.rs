//! Null directions of a `(+,−)` metric and the normalised closed 1-forms
//! built from them and the integral.

use crate::dynamics::rk45::{self, Flow, Rk45Error, Rk45Options};
use crate::error::{Axis, Error, Result};
use crate::expr::Jet2;
use crate::field::QuadraticForm;
use crate::geometry::{Chart, Metric2};

/// Relative size below which an extreme coefficient of `F` counts as zero.
pub const ZERO_COEFFICIENT_TOL: f64 = 1e-7;

type Vec2 = [Jet2; 2];

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn values(v: &Vec2) -> [f64; 2] {
    [v[0].v, v[1].v]
}

/// The two null directions `(C, −s)` and `(s, −A)` of
/// `A dx² + 2B dx dy + C dy²`, `s = B + sign(B) √(B² − AC)`.
fn null_candidates(g: [Jet2; 3]) -> [Vec2; 2] {
    let [a, b, c] = g;
    let d = b * b - a * c;
    let root = d.sqrt();
    let s = if b.v >= 0.0 { b + root } else { b - root };
    [[c, -s], [s, -a]]
}

/// `g(v, w)` for jets.
fn metric_pair(g: &[Jet2; 3], v: &Vec2, w: &Vec2) -> Jet2 {
    g[0] * v[0] * w[0] + g[1] * (v[0] * w[1] + v[1] * w[0]) + g[2] * v[1] * w[1]
}

/// `g(v, ·)` as a covector.
fn lower(g: &[Jet2; 3], v: &Vec2) -> Vec2 {
    [g[0] * v[0] + g[1] * v[1], g[1] * v[0] + g[2] * v[1]]
}

/// `F(ω, ω)` for the contravariant form `a p_x² + b p_x p_y + c p_y²`.
pub(crate) fn form_on(f: &[Jet2; 3], w: &Vec2) -> Jet2 {
    f[0] * w[0] * w[0] + f[1] * w[0] * w[1] + f[2] * w[1] * w[1]
}

/// Oriented null vectors at a point, `V₁` following the reference direction
/// and `V₂` oriented so that `g(V₁, V₂) > 0`.
fn oriented_null(g: &[Jet2; 3], reference: [f64; 2]) -> (Vec2, Vec2) {
    let cands = null_candidates(*g);
    let d0 = dot(unit(values(&cands[0])), reference);
    let d1 = dot(unit(values(&cands[1])), reference);
    let (first, second, d) = if d0.abs() >= d1.abs() {
        (0, 1, d0)
    } else {
        (1, 0, d1)
    };
    let flip = |v: Vec2, s: f64| [v[0].scale(s), v[1].scale(s)];
    let v1 = flip(cands[first], d.signum());
    let mut v2 = cands[second];
    if metric_pair(g, &v1, &v2).v < 0.0 {
        v2 = flip(v2, -1.0);
    }
    (v1, v2)
}

/// Which sign pattern the extreme coefficients of `F` show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPattern {
    /// `a`, `c` of the same sign.
    SameSign,
    /// `a`, `c` of opposite signs.
    OppositeSign,
    /// Exactly one of `a`, `c` vanishes identically.
    OneVanishes,
}

/// Null frame on a chart with continuous labels of the two null directions.
pub struct NullFrame<'a> {
    pub g: &'a Metric2,
    pub form: &'a QuadraticForm,
    /// Sign applied to `F` so that `F(B₁, B₁) = +1`.
    pub sigma: f64,
    /// Whether the labels of the null directions were exchanged so that the
    /// nonvanishing coefficient comes first.
    pub swapped: bool,
    pub pattern: SignPattern,
    /// Sign of `σ F(B₂, B₂)`, zero in the vanishing case.
    pub c_sign: f64,
    chart: Chart,
    reference: Vec<[f64; 2]>,
}

/// Frame quantities at one point, all as jets in the original coordinates.
pub struct FramePoint {
    pub g: [Jet2; 3],
    /// `σ F`
    pub form: [Jet2; 3],
    pub v1: Vec2,
    /// Normalised closed forms `B₁` and (unless one coefficient vanishes) `B₂`.
    pub b1: Vec2,
    pub b2: Option<Vec2>,
}

impl FramePoint {
    /// `f b = 2 g_{ij} (σF)^{ij}`, the trace of the normalised integral.
    pub fn fb(&self) -> Jet2 {
        let [g11, g12, g22] = self.g;
        let [a, b, c] = self.form;
        (g11 * a + g12 * b + g22 * c).scale(2.0)
    }

    pub fn metric(&self, v: &Vec2, w: &Vec2) -> Jet2 {
        metric_pair(&self.g, v, w)
    }

    pub fn lower(&self, v: &Vec2) -> Vec2 {
        lower(&self.g, v)
    }
}

impl<'a> NullFrame<'a> {
    /// Labels the null directions over the chart grid and reads off the sign
    /// pattern of `F` on them.
    pub fn new(g: &'a Metric2, form: &'a QuadraticForm) -> Result<Self> {
        let chart = g.chart;
        let (nx, ny) = (chart.nx, chart.ny);
        let mut reference = vec![[0.0; 2]; nx * ny];
        let (i0, j0) = (nx / 2, ny / 2);
        let seed = {
            let gj = g.jets(chart.x_at(i0), chart.y_at(j0))?;
            unit(values(&null_candidates(gj)[1]))
        };
        for (idx, parent) in sweep_order(nx, ny) {
            let (i, j) = (idx % nx, idx / nx);
            let gj = g.jets(chart.x_at(i), chart.y_at(j))?;
            let r = parent.map(|p| reference[p]).unwrap_or(seed);
            let (v1, _) = oriented_null(&gj, r);
            reference[idx] = unit(values(&v1));
        }
        let mut frame = NullFrame {
            g,
            form,
            sigma: 1.0,
            swapped: false,
            pattern: SignPattern::SameSign,
            c_sign: 1.0,
            chart,
            reference,
        };
        frame.read_signs()?;
        Ok(frame)
    }

    fn read_signs(&mut self) -> Result<()> {
        let mut signs = [Vec::new(), Vec::new()];
        for (x, y) in self.chart.grid() {
            let gj = self.g.jets(x, y)?;
            let fj = self.form.jets(x, y)?;
            let (v1, v2) = oriented_null(&gj, self.reference_at(x, y));
            let norm = (fj[0].v.powi(2) + 0.5 * fj[1].v.powi(2) + fj[2].v.powi(2)).sqrt();
            for (k, v) in [v2, v1].iter().enumerate() {
                let w = lower(&gj, v);
                let wv = values(&w);
                let rel = form_on(&fj, &w).v / (dot(wv, wv) * norm);
                signs[k].push(if rel.abs() < ZERO_COEFFICIENT_TOL {
                    0.0
                } else {
                    rel.signum()
                });
            }
        }
        let summarize = |s: &[f64], name: &str| -> Result<f64> {
            let first = s[0];
            if s.iter().all(|&v| v == first) {
                Ok(first)
            } else {
                Err(Error::AmbiguousCase(format!(
                    "coefficient {name} changes sign or vanishes inside the chart"
                )))
            }
        };
        let sa = summarize(&signs[0], "a")?;
        let sc = summarize(&signs[1], "c")?;
        let (sigma, swapped, pattern, c_sign) = match (sa != 0.0, sc != 0.0) {
            (true, true) if sa == sc => (sa, false, SignPattern::SameSign, 1.0),
            (true, true) => (sa, false, SignPattern::OppositeSign, -1.0),
            (true, false) => (sa, false, SignPattern::OneVanishes, 0.0),
            (false, true) => (sc, true, SignPattern::OneVanishes, 0.0),
            (false, false) => {
                return Err(Error::AmbiguousCase(
                    "both extreme coefficients of F vanish in null coordinates".into(),
                ))
            }
        };
        self.sigma = sigma;
        self.swapped = swapped;
        self.pattern = pattern;
        self.c_sign = c_sign;
        Ok(())
    }

    fn reference_at(&self, x: f64, y: f64) -> [f64; 2] {
        let c = &self.chart;
        let fi = (x - c.x_range[0]) / c.width() * (c.nx - 1) as f64;
        let fj = (y - c.y_range[0]) / c.height() * (c.ny - 1) as f64;
        let i = (fi.round().max(0.0) as usize).min(c.nx - 1);
        let j = (fj.round().max(0.0) as usize).min(c.ny - 1);
        self.reference[j * c.nx + i]
    }

    pub fn at(&self, x: f64, y: f64) -> Result<FramePoint> {
        let gj = self.g.jets(x, y)?;
        let form = self.form.jets(x, y)?.map(|j| j.scale(self.sigma));
        let (mut v1, mut v2) = oriented_null(&gj, self.reference_at(x, y));
        if self.swapped {
            std::mem::swap(&mut v1, &mut v2);
        }
        let normalize = |w: Vec2, sign: f64, axis: Axis| -> Result<Vec2> {
            let q = form_on(&form, &w).scale(sign);
            if !(q.v > 0.0) {
                return Err(Error::CoefficientVanishes { axis, x, y });
            }
            let r = q.sqrt().recip();
            Ok([w[0] * r, w[1] * r])
        };
        let b1 = normalize(lower(&gj, &v2), 1.0, Axis::X)?;
        let b2 = if self.c_sign != 0.0 {
            Some(normalize(lower(&gj, &v1), self.c_sign, Axis::Y)?)
        } else {
            None
        };
        Ok(FramePoint {
            g: gj,
            form,
            v1,
            b1,
            b2,
        })
    }
}

/// Visit order for a grid sweep from the central node: the central row
/// outwards, then every column outwards from that row. Each entry carries
/// the already-visited neighbour it continues from.
pub(crate) fn sweep_order(nx: usize, ny: usize) -> Vec<(usize, Option<usize>)> {
    let (i0, j0) = (nx / 2, ny / 2);
    let id = |i: usize, j: usize| j * nx + i;
    let mut order = vec![(id(i0, j0), None)];
    for i in (i0 + 1)..nx {
        order.push((id(i, j0), Some(id(i - 1, j0))));
    }
    for i in (0..i0).rev() {
        order.push((id(i, j0), Some(id(i + 1, j0))));
    }
    for i in 0..nx {
        for j in (j0 + 1)..ny {
            order.push((id(i, j), Some(id(i, j - 1))));
        }
        for j in (0..j0).rev() {
            order.push((id(i, j), Some(id(i, j + 1))));
        }
    }
    order
}

/// Integrates a pair of potentials along the grid sweep.
///
/// `rate(x, y, state)` returns the two 1-forms whose line integrals the
/// state accumulates (the second may depend on the first's potential).
/// Values at the central node are zero. Returns the state at every node.
pub(crate) fn integrate_potentials(
    chart: &Chart,
    rate: impl Fn(f64, f64, &[f64; 2]) -> Result<[[f64; 2]; 2]>,
) -> Result<Vec<[f64; 2]>> {
    let (nx, ny) = (chart.nx, chart.ny);
    let mut out = vec![[0.0; 2]; nx * ny];
    let opts = Rk45Options {
        rtol: 1e-12,
        atol: 1e-13,
        ..Default::default()
    };
    let pos = |idx: usize| (chart.x_at(idx % nx), chart.y_at(idx / nx));
    for (idx, parent) in sweep_order(nx, ny) {
        let Some(p) = parent else { continue };
        let (x0, y0) = pos(p);
        let (x1, y1) = pos(idx);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let rhs = |t: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
            let [w1, w2] = rate(x0 + t * dx, y0 + t * dy, s)?;
            Ok([w1[0] * dx + w1[1] * dy, w2[0] * dx + w2[1] * dy])
        };
        let result = rk45::integrate(rhs, 0.0, out[p], 1.0, &opts, |_, _| Flow::Continue);
        out[idx] = match result {
            Ok((_, s)) => s,
            Err(Rk45Error::Rhs(e)) | Err(Rk45Error::StepUnderflow { last: Some(e), .. }) => {
                return Err(e)
            }
            Err(e) => {
                return Err(Error::InvariantViolation {
                    x: x1,
                    y: y1,
                    message: format!("potential integration did not converge: {e:?}"),
                })
            }
        };
    }
    Ok(out)
}
