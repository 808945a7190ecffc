//! The three case solvers on top of a labelled null frame.

use num_complex::Complex64;
use serde::Serialize;

use super::frame::{integrate_potentials, FramePoint, NullFrame, SignPattern};
use super::table::{ComplexTable, Table};
use crate::error::{Error, Result};
use crate::expr::Jet2;
use crate::geometry::{Chart, Metric2};
use crate::normal_forms::Family;

/// Relative threshold of the single-variable and Cauchy–Riemann checks.
pub const CASE_TOL: f64 = 1e-6;
/// Relative threshold of the reconstruction residuals.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;
/// Refinement of the chart grid for potentials and parameter tables.
const REFINE: usize = 2;

/// Choices the recovered normal form depends on.
#[derive(Debug, Clone, Serialize)]
pub struct Gauge {
    /// Where both potentials vanish (the chart centre).
    pub base_point: [f64; 2],
    /// Sign applied to `F` before normalisation.
    pub sigma: f64,
    /// Whether the two null directions were relabelled.
    pub swapped: bool,
    /// Constant factor between the input metric and the reported normal
    /// form (2 for the Jordan-block case, whose `x` is half the potential).
    pub metric_scale: f64,
}

/// Potentials at one chart grid node.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NodeSample {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

/// Recovered parameter functions.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family")]
pub enum Parameters {
    /// `fb − 2f` as a function of `s = u + v` and `fb + 2f` of `t = u − v`;
    /// then `f = (Y − X)/4`, `b = 2(X + Y)/(Y − X)`.
    Liouville { x_of_s: Table, y_of_t: Table },
    /// Samples `[Re z, Im z, Re h, Im h]` of `h = fb + 2i f` with `z = u + i v`.
    ComplexLiouville { h: Vec<[f64; 4]> },
    /// `Y` as a function of `w`; for null-form input also `Ŷ(y) = dw/dy` along
    /// the central column.
    JordanBlock {
        y_of_w: Table,
        yhat: Option<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryResiduals {
    /// Relative curl of the normalised 1-forms.
    pub closedness: f64,
    /// Relative single-variable / Cauchy–Riemann / Jordan-structure check.
    pub case_check: f64,
    /// Relative max error of the reconstructed metric.
    pub metric: f64,
    /// Relative max error of the reconstructed integral.
    pub integral: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub family: Family,
    pub case: u8,
    pub gauge: Gauge,
    pub parameters: Parameters,
    pub samples: Vec<NodeSample>,
    pub residuals: RecoveryResiduals,
    pub tolerance: f64,
    pub passed: bool,
}

fn vals(v: &[Jet2; 2]) -> [f64; 2] {
    [v[0].v, v[1].v]
}

fn grad(j: &Jet2) -> [f64; 2] {
    [j.dx, j.dy]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Dual frame (columns of the inverse) of the covector rows `r1`, `r2`.
fn dual(r1: [f64; 2], r2: [f64; 2]) -> ([f64; 2], [f64; 2], f64) {
    let det = r1[0] * r2[1] - r1[1] * r2[0];
    (
        [r2[1] / det, -r2[0] / det],
        [-r1[1] / det, r1[0] / det],
        det,
    )
}

fn dual_jets(r1: &[Jet2; 2], r2: &[Jet2; 2]) -> ([Jet2; 2], [Jet2; 2]) {
    let det = r1[0] * r2[1] - r1[1] * r2[0];
    let inv = det.recip();
    ([r2[1] * inv, -(r2[0] * inv)], [-(r1[1] * inv), r1[0] * inv])
}

/// Input `g` and `F` at a point as `[g11, g12, g22]` and `[a, b, c]`.
fn input_at(g: &Metric2, frame: &NullFrame, x: f64, y: f64) -> Result<([f64; 3], [f64; 3])> {
    let gj = g.jets(x, y)?;
    let fj = frame.form.jets(x, y)?;
    Ok((gj.map(|j| j.v), fj.map(|j| j.v)))
}

/// `g` and `F` rebuilt from normal-form data in coordinates `(u, w)`:
/// `g = (f/2)(du dw + dw du)`, `σF = a ∂u² + b ∂u ∂w + c ∂w²`.
fn map_back(du: [f64; 2], dw: [f64; 2], f: f64, abc: [f64; 3], sigma: f64) -> ([f64; 3], [f64; 3]) {
    let (eu, ew, _) = dual(du, dw);
    let g = [
        f * du[0] * dw[0],
        0.5 * f * (du[0] * dw[1] + du[1] * dw[0]),
        f * du[1] * dw[1],
    ];
    let [a, b, c] = abc;
    let comp = |i: usize, j: usize| {
        sigma * (a * eu[i] * eu[j] + 0.5 * b * (eu[i] * ew[j] + ew[i] * eu[j]) + c * ew[i] * ew[j])
    };
    (g, [comp(0, 0), 2.0 * comp(0, 1), comp(1, 1)])
}

/// Accumulates the relative reconstruction error over the chart grid.
#[derive(Default)]
struct ReconError {
    g_err: f64,
    g_scale: f64,
    f_err: f64,
    f_scale: f64,
}

impl ReconError {
    fn add(&mut self, input: ([f64; 3], [f64; 3]), rec: ([f64; 3], [f64; 3])) {
        for k in 0..3 {
            self.g_err = self.g_err.max((input.0[k] - rec.0[k]).abs());
            self.g_scale = self.g_scale.max(input.0[k].abs());
            self.f_err = self.f_err.max((input.1[k] - rec.1[k]).abs());
            self.f_scale = self.f_scale.max(input.1[k].abs());
        }
    }

    fn finish(&self) -> (f64, f64) {
        (self.g_err / self.g_scale, self.f_err / self.f_scale)
    }
}

/// Largest relative curl of `B₁` (and `B₂`) on the chart grid.
pub(crate) fn closedness(frame: &NullFrame, chart: &Chart) -> Result<[f64; 2]> {
    let length = chart.width().max(chart.height());
    let mut curl = [0.0f64; 2];
    let mut scale = [0.0f64; 2];
    for (x, y) in chart.grid() {
        let p = frame.at(x, y)?;
        for (k, b) in [Some(p.b1), p.b2].iter().enumerate() {
            let Some(b) = b else { continue };
            curl[k] = curl[k].max((b[1].dx - b[0].dy).abs());
            let s = b[0].dx.abs() + b[0].dy.abs() + b[1].dx.abs() + b[1].dy.abs();
            scale[k] = scale[k].max(s + vals(b)[0].hypot(vals(b)[1]) / length);
        }
    }
    Ok([
        curl[0] / scale[0].max(f64::MIN_POSITIVE),
        curl[1] / scale[1].max(f64::MIN_POSITIVE),
    ])
}

/// Frame data of the two-potential cases at one node.
struct Node {
    x: f64,
    y: f64,
    pot: [f64; 2],
    du: [f64; 2],
    dv: [f64; 2],
    f: f64,
    fb: f64,
    /// `[∂_u f, ∂_v f]`
    df: [f64; 2],
    /// `[∂_u (fb), ∂_v (fb)]`
    dfb: [f64; 2],
}

fn node(p: &FramePoint, x: f64, y: f64, pot: [f64; 2]) -> Node {
    let b2 = p.b2.expect("two-potential case");
    let (eu, ev) = dual_jets(&p.b1, &b2);
    let f = p.metric(&eu, &ev).scale(2.0);
    let fb = p.fb();
    let (eu, ev) = (vals(&eu), vals(&ev));
    Node {
        x,
        y,
        pot,
        du: vals(&p.b1),
        dv: vals(&b2),
        f: f.v,
        fb: fb.v,
        df: [dot(eu, grad(&f)), dot(ev, grad(&f))],
        dfb: [dot(eu, grad(&fb)), dot(ev, grad(&fb))],
    }
}

struct Sampled<T> {
    /// Nodes of the refined grid that are not chart grid nodes.
    fine: Vec<T>,
    /// Chart grid nodes, in chart grid order.
    coarse: Vec<T>,
}

fn sample<T>(
    chart: &Chart,
    potentials: &[[f64; 2]],
    mut make: impl FnMut(f64, f64, [f64; 2]) -> Result<T>,
) -> Result<Sampled<T>> {
    let fine_chart = chart.refined(REFINE);
    let mut fine = Vec::new();
    let mut coarse: Vec<Option<T>> = (0..chart.nx * chart.ny).map(|_| None).collect();
    for j in 0..fine_chart.ny {
        for i in 0..fine_chart.nx {
            let (x, y) = (fine_chart.x_at(i), fine_chart.y_at(j));
            let n = make(x, y, potentials[j * fine_chart.nx + i])?;
            if i % REFINE == 0 && j % REFINE == 0 {
                coarse[(j / REFINE) * chart.nx + i / REFINE] = Some(n);
            } else {
                fine.push(n);
            }
        }
    }
    Ok(Sampled {
        fine,
        coarse: coarse
            .into_iter()
            .map(|n| n.expect("every chart node is visited"))
            .collect(),
    })
}

fn worst<T>(
    items: &[T],
    score: impl Fn(&T) -> f64,
    at: impl Fn(&T) -> (f64, f64),
) -> (f64, f64, f64) {
    let mut best = (0.0, f64::NAN, f64::NAN);
    for it in items {
        let s = score(it);
        if s > best.0 || best.1.is_nan() {
            let (x, y) = at(it);
            best = (s, x, y);
        }
    }
    best
}

fn gauge(frame: &NullFrame, chart: &Chart, metric_scale: f64) -> Gauge {
    let (cx, cy) = chart.center();
    Gauge {
        base_point: [cx, cy],
        sigma: frame.sigma,
        swapped: frame.swapped,
        metric_scale,
    }
}

fn derivative_scale(nodes: &[Node]) -> f64 {
    nodes
        .iter()
        .map(|n| {
            n.fb.abs()
                + 2.0 * n.f.abs()
                + n.dfb[0].abs()
                + n.dfb[1].abs()
                + 2.0 * (n.df[0].abs() + n.df[1].abs())
        })
        .fold(0.0, f64::max)
}

fn two_potentials(frame: &NullFrame, chart: &Chart) -> Result<Sampled<Node>> {
    let fine_chart = chart.refined(REFINE);
    let pots = integrate_potentials(&fine_chart, |x, y, _| {
        let p = frame.at(x, y)?;
        Ok([vals(&p.b1), vals(&p.b2.expect("two-potential case"))])
    })?;
    sample(chart, &pots, |x, y, pot| {
        Ok(node(&frame.at(x, y)?, x, y, pot))
    })
}

fn samples_of(nodes: &[Node]) -> Vec<NodeSample> {
    nodes
        .iter()
        .map(|n| NodeSample {
            x: n.x,
            y: n.y,
            u: n.pot[0],
            v: n.pot[1],
        })
        .collect()
}

/// Case `a = c = 1`: `fb + 2f` depends on `u − v` only and `fb − 2f` on
/// `u + v` only.
pub(crate) fn case1(frame: &NullFrame, chart: &Chart, closed: f64) -> Result<RecoveryReport> {
    debug_assert_eq!(frame.pattern, SignPattern::SameSign);
    let nodes = two_potentials(frame, chart)?;
    let scale = derivative_scale(&nodes.coarse);
    let (dev, x, y) = worst(
        &nodes.coarse,
        |n| {
            let plus = n.dfb[0] + 2.0 * n.df[0] + n.dfb[1] + 2.0 * n.df[1];
            let minus = n.dfb[0] - 2.0 * n.df[0] - n.dfb[1] + 2.0 * n.df[1];
            plus.abs().max(minus.abs()) / scale
        },
        |n| (n.x, n.y),
    );
    if dev > CASE_TOL {
        return Err(Error::NotCase1 {
            deviation: dev,
            x,
            y,
        });
    }
    let x_of_s = Table::new(
        nodes
            .fine
            .iter()
            .map(|n| {
                [
                    n.pot[0] + n.pot[1],
                    n.fb - 2.0 * n.f,
                    n.dfb[0] - 2.0 * n.df[0],
                ]
            })
            .collect(),
    );
    let y_of_t = Table::new(
        nodes
            .fine
            .iter()
            .map(|n| {
                [
                    n.pot[0] - n.pot[1],
                    n.fb + 2.0 * n.f,
                    n.dfb[0] + 2.0 * n.df[0],
                ]
            })
            .collect(),
    );
    let mut err = ReconError::default();
    for n in &nodes.coarse {
        let xs = x_of_s.eval(n.pot[0] + n.pot[1]).0;
        let yt = y_of_t.eval(n.pot[0] - n.pot[1]).0;
        let f = (yt - xs) / 4.0;
        let b = 2.0 * (xs + yt) / (yt - xs);
        let rec = map_back(n.du, n.dv, f, [1.0, b, 1.0], frame.sigma);
        err.add(input_at(frame.g, frame, n.x, n.y)?, rec);
    }
    let (metric, integral) = err.finish();
    Ok(RecoveryReport {
        family: Family::Liouville,
        case: 1,
        gauge: gauge(frame, chart, 1.0),
        parameters: Parameters::Liouville { x_of_s, y_of_t },
        samples: samples_of(&nodes.coarse),
        residuals: RecoveryResiduals {
            closedness: closed,
            case_check: dev,
            metric,
            integral,
        },
        tolerance: RECONSTRUCTION_TOL,
        passed: metric <= RECONSTRUCTION_TOL && integral <= RECONSTRUCTION_TOL,
    })
}

/// Case `a = 1`, `c = −1`: `fb + 2i f` is holomorphic in `u + i v`.
pub(crate) fn case2(frame: &NullFrame, chart: &Chart, closed: f64) -> Result<RecoveryReport> {
    debug_assert_eq!(frame.pattern, SignPattern::OppositeSign);
    let nodes = two_potentials(frame, chart)?;
    let scale = derivative_scale(&nodes.coarse);
    let (dev, x, y) = worst(
        &nodes.coarse,
        |n| ((n.dfb[0] - 2.0 * n.df[1]).abs() + (n.dfb[1] + 2.0 * n.df[0]).abs()) / scale,
        |n| (n.x, n.y),
    );
    if dev > CASE_TOL {
        return Err(Error::NotHolomorphic {
            residual: dev,
            x,
            y,
        });
    }
    let table = ComplexTable {
        nodes: nodes
            .fine
            .iter()
            .map(|n| {
                (
                    Complex64::new(n.pot[0], n.pot[1]),
                    Complex64::new(n.fb, 2.0 * n.f),
                    Complex64::new(n.dfb[0], 2.0 * n.df[0]),
                )
            })
            .collect(),
    };
    let mut err = ReconError::default();
    for n in &nodes.coarse {
        let h = table.eval(Complex64::new(n.pot[0], n.pot[1]));
        let f = 0.5 * h.im;
        let rec = map_back(n.du, n.dv, f, [1.0, h.re / f, -1.0], frame.sigma);
        err.add(input_at(frame.g, frame, n.x, n.y)?, rec);
    }
    let (metric, integral) = err.finish();
    Ok(RecoveryReport {
        family: Family::ComplexLiouville,
        case: 2,
        gauge: gauge(frame, chart, 1.0),
        parameters: Parameters::ComplexLiouville {
            h: nodes
                .coarse
                .iter()
                .map(|n| [n.pot[0], n.pot[1], n.fb, 2.0 * n.f])
                .collect(),
        },
        samples: samples_of(&nodes.coarse),
        residuals: RecoveryResiduals {
            closedness: closed,
            case_check: dev,
            metric,
            integral,
        },
        tolerance: RECONSTRUCTION_TOL,
        passed: metric <= RECONSTRUCTION_TOL && integral <= RECONSTRUCTION_TOL,
    })
}

/// `∂_u = V₁ / B₁(V₁)` and the form `θ = g(∂_u, ·)` as jets.
fn jordan_theta(p: &FramePoint) -> ([Jet2; 2], [Jet2; 2]) {
    let scale = (p.b1[0] * p.v1[0] + p.b1[1] * p.v1[1]).recip();
    let eu = [p.v1[0] * scale, p.v1[1] * scale];
    (eu, p.lower(&eu))
}

struct JordanNode {
    x: f64,
    y: f64,
    u: f64,
    w: f64,
    du: [f64; 2],
    dw: [f64; 2],
    /// `Y = −fb`
    yv: f64,
    /// `∂_w Y`
    y_w: f64,
    /// `|∂_u Y|` relative and the closedness defect of `2θ − (u/2) dY`.
    checks: [f64; 2],
    /// `|det(du, dw)| / (|du| |dw|)`
    independence: f64,
}

fn jordan_node(p: &FramePoint, x: f64, y: f64, pot: [f64; 2]) -> JordanNode {
    let (eu, theta) = jordan_theta(p);
    let yj = -p.fb();
    let dy = grad(&yj);
    let du = vals(&p.b1);
    let u = pot[0];
    let th = vals(&theta);
    let dw = [2.0 * th[0] - 0.5 * u * dy[0], 2.0 * th[1] - 0.5 * u * dy[1]];
    let (_, ew, det) = dual(du, dw);
    let eu_v = vals(&eu);
    let y_u = dot(eu_v, dy);
    let length = (dy[0].hypot(dy[1])) * eu_v[0].hypot(eu_v[1]);
    let d_theta = 2.0 * (theta[1].dx - theta[0].dy);
    let wedge = 0.5 * (du[0] * dy[1] - du[1] * dy[0]);
    let theta_scale = 2.0
        * (theta[0].dx.abs() + theta[0].dy.abs() + theta[1].dx.abs() + theta[1].dy.abs())
        + 0.5 * du[0].hypot(du[1]) * dy[0].hypot(dy[1]);
    JordanNode {
        x,
        y,
        u,
        w: pot[1],
        du,
        dw,
        yv: yj.v,
        y_w: dot(ew, dy),
        checks: [
            y_u.abs() / (yj.v.abs() + length).max(f64::MIN_POSITIVE),
            (d_theta - wedge).abs() / theta_scale.max(f64::MIN_POSITIVE),
        ],
        independence: det.abs() / (du[0].hypot(du[1]) * dw[0].hypot(dw[1])),
    }
}

/// Case `a = 1`, `c ≡ 0`: `Y = −fb` depends on one null coordinate and the
/// metric takes the form `(1 + x Y′(w)) dx dw` with `x = u/2`.
pub(crate) fn case3(frame: &NullFrame, chart: &Chart, closed: f64) -> Result<RecoveryReport> {
    debug_assert_eq!(frame.pattern, SignPattern::OneVanishes);
    let fine_chart = chart.refined(REFINE);
    let pots = integrate_potentials(&fine_chart, |x, y, s| {
        let p = frame.at(x, y)?;
        let (_, theta) = jordan_theta(&p);
        let dy = grad(&-p.fb());
        let th = vals(&theta);
        let u = s[0];
        Ok([
            vals(&p.b1),
            [2.0 * th[0] - 0.5 * u * dy[0], 2.0 * th[1] - 0.5 * u * dy[1]],
        ])
    })?;
    let nodes = sample(chart, &pots, |x, y, pot| {
        Ok(jordan_node(&frame.at(x, y)?, x, y, pot))
    })?;
    let mut dev = 0.0;
    for n in &nodes.coarse {
        let d = n.checks[0].max(n.checks[1]);
        if d > CASE_TOL {
            return Err(Error::NotCase3 {
                deviation: d,
                x: n.x,
                y: n.y,
            });
        }
        dev = f64::max(dev, d);
    }
    for n in nodes.coarse.iter().chain(&nodes.fine) {
        if n.independence < 1e-10 {
            return Err(Error::YhatVanishes { x: n.x, y: n.y });
        }
    }
    let y_of_w = Table::new(nodes.fine.iter().map(|n| [n.w, n.yv, n.y_w]).collect());
    let mut err = ReconError::default();
    for n in &nodes.coarse {
        let (yv, yw) = y_of_w.eval(n.w);
        let f = 1.0 + 0.5 * n.u * yw;
        let rec = map_back(n.du, n.dw, f, [1.0, -yv / f, 0.0], frame.sigma);
        err.add(input_at(frame.g, frame, n.x, n.y)?, rec);
    }
    let (metric, integral) = err.finish();
    let yhat = (frame.g.is_null_form() && !frame.swapped).then(|| {
        let (cx, _) = chart.center();
        nodes
            .coarse
            .iter()
            .filter(|n| (n.x - cx).abs() <= 1e-12 * (1.0 + cx.abs()))
            .map(|n| [n.y, n.dw[1]])
            .collect()
    });
    Ok(RecoveryReport {
        family: Family::JordanBlock,
        case: 3,
        gauge: gauge(frame, chart, 2.0),
        parameters: Parameters::JordanBlock { y_of_w, yhat },
        samples: nodes
            .coarse
            .iter()
            .map(|n| NodeSample {
                x: n.x,
                y: n.y,
                u: n.u,
                v: n.w,
            })
            .collect(),
        residuals: RecoveryResiduals {
            closedness: closed,
            case_check: dev,
            metric,
            integral,
        },
        tolerance: RECONSTRUCTION_TOL,
        passed: metric <= RECONSTRUCTION_TOL && integral <= RECONSTRUCTION_TOL,
    })
}
