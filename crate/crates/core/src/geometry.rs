//! Metrics on rectangular charts, Christoffel symbols, the (1,1)-tensor
//! `G = g⁻¹ ḡ` of a metric pair and its pointwise classification.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Jet2;
use crate::field::ScalarField;

pub type Mat2 = [[f64; 2]; 2];

/// Default relative tolerance of [`classify_at`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-8;

/// A metric is rejected as singular where `|det| < SINGULAR_REL · ‖g‖²`.
const SINGULAR_REL: f64 = 1e-12;

/// A rectangle `x_range × y_range` with an `nx × ny` sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chart {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Chart {
    pub fn new(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize) -> Result<Chart> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(x_range) || !ok(y_range) {
            return Err(Error::InvalidChart(format!(
                "ranges must be finite and increasing, got x {x_range:?}, y {y_range:?}"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidChart(format!(
                "grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        Ok(Chart {
            x_range,
            y_range,
            nx,
            ny,
        })
    }

    pub fn x_at(&self, i: usize) -> f64 {
        let [a, b] = self.x_range;
        if i + 1 == self.nx {
            b
        } else {
            a + (b - a) * i as f64 / (self.nx - 1) as f64
        }
    }

    pub fn y_at(&self, j: usize) -> f64 {
        let [a, b] = self.y_range;
        if j + 1 == self.ny {
            b
        } else {
            a + (b - a) * j as f64 / (self.ny - 1) as f64
        }
    }

    /// Grid points in row-major order (`x` fastest).
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (self.x_at(i), self.y_at(j))))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let slack = 1e-12 * (self.width() + self.height());
        x >= self.x_range[0] - slack
            && x <= self.x_range[1] + slack
            && y >= self.y_range[0] - slack
            && y <= self.y_range[1] + slack
    }

    pub fn width(&self) -> f64 {
        self.x_range[1] - self.x_range[0]
    }

    pub fn height(&self) -> f64 {
        self.y_range[1] - self.y_range[0]
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_range[0] + self.x_range[1]),
            0.5 * (self.y_range[0] + self.y_range[1]),
        )
    }

    /// Same rectangle with the grid refined `k` times (grid nodes are kept).
    pub fn refined(&self, k: usize) -> Chart {
        Chart {
            nx: (self.nx - 1) * k + 1,
            ny: (self.ny - 1) * k + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Signature {
    #[serde(rename = "(+,+)")]
    Positive,
    #[serde(rename = "(-,-)")]
    Negative,
    #[serde(rename = "(+,-)")]
    Lorentzian,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Signature::Positive => "(+,+)",
            Signature::Negative => "(-,-)",
            Signature::Lorentzian => "(+,-)",
        })
    }
}

/// Metric coefficients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPoint {
    pub m: Mat2,
    pub det: f64,
    pub signature: Signature,
}

/// `g = g11 dx² + 2 g12 dx dy + g22 dy²` on a chart.
///
/// Construction samples the grid and rejects singular points and signature
/// changes, so every later evaluation inside the chart can assume a fixed
/// signature.
#[derive(Debug, Clone)]
pub struct Metric2 {
    pub g11: ScalarField,
    pub g12: ScalarField,
    pub g22: ScalarField,
    pub chart: Chart,
    signature: Signature,
    null_form: bool,
}

impl Metric2 {
    pub fn new(
        g11: ScalarField,
        g12: ScalarField,
        g22: ScalarField,
        chart: Chart,
    ) -> Result<Metric2> {
        let null_form = g11.constant_value() == Some(0.0) && g22.constant_value() == Some(0.0);
        let mut metric = Metric2 {
            g11,
            g12,
            g22,
            chart,
            signature: Signature::Lorentzian,
            null_form,
        };
        let mut first: Option<Signature> = None;
        for (x, y) in chart.grid() {
            let p = metric_at(&metric, x, y)?;
            match first {
                None => first = Some(p.signature),
                Some(s) if s != p.signature => return Err(Error::SignatureChange { x, y }),
                _ => {}
            }
        }
        metric.signature = first.expect("grid is non-empty");
        Ok(metric)
    }

    /// `ds² = f dx dy`, i.e. `g12 = f/2`.
    pub fn null_form(f: &ScalarField, chart: Chart) -> Result<Metric2> {
        Self::new(
            ScalarField::constant(0.0),
            f.scale(0.5),
            ScalarField::constant(0.0),
            chart,
        )
    }

    pub fn parse(g11: &str, g12: &str, g22: &str, chart: Chart) -> Result<Metric2> {
        Self::new(
            ScalarField::parse(g11)?,
            ScalarField::parse(g12)?,
            ScalarField::parse(g22)?,
            chart,
        )
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// True when built as `f dx dy` (both diagonal coefficients identically 0).
    pub fn is_null_form(&self) -> bool {
        self.null_form
    }

    /// The conformal factor `f = 2 g12` of a null-form metric.
    pub fn null_factor(&self) -> Option<ScalarField> {
        self.null_form.then(|| self.g12.scale(2.0))
    }

    pub fn scale(&self, s: f64) -> Result<Metric2> {
        Self::new(
            self.g11.scale(s),
            self.g12.scale(s),
            self.g22.scale(s),
            self.chart,
        )
    }

    pub fn jets(&self, x: f64, y: f64) -> Result<[Jet2; 3]> {
        Ok([
            self.g11.jet(x, y)?,
            self.g12.jet(x, y)?,
            self.g22.jet(x, y)?,
        ])
    }

    /// The metric in coordinates `(u, v)` with `(x, y) = A (u, v) + c`, on a
    /// caller-supplied chart (`g_new = Aᵀ g A`).
    pub fn linear_change(&self, a: Mat2, c: [f64; 2], chart: Chart) -> Result<Metric2> {
        let comps = [self.g11.clone(), self.g12.clone(), self.g22.clone()];
        let entry = |k: usize, l: usize| {
            let comps = comps.clone();
            ScalarField::from_fn("transformed metric coefficient", move |u, v| {
                let x = a[0][0] * u + a[0][1] * v + c[0];
                let y = a[1][0] * u + a[1][1] * v + c[1];
                let j = [
                    comps[0].jet(x, y)?,
                    comps[1].jet(x, y)?,
                    comps[2].jet(x, y)?,
                ];
                let m = [[j[0], j[1]], [j[1], j[2]]];
                let mut s = Jet2::constant(0.0);
                for (i, row) in m.iter().enumerate() {
                    for (jj, mij) in row.iter().enumerate() {
                        s += *mij * (a[i][k] * a[jj][l]);
                    }
                }
                Ok(s.linear_pullback(a))
            })
        };
        let (n11, n12, n22) = (entry(0, 0), entry(0, 1), entry(1, 1));
        let mut out = Self::new(n11, n12, n22, chart)?;
        out.null_form = false;
        Ok(out)
    }
}

fn frobenius(m: &Mat2) -> f64 {
    (m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2)).sqrt()
}

fn classify_signature(m: &Mat2, det: f64) -> Signature {
    if det < 0.0 {
        Signature::Lorentzian
    } else if m[0][0] + m[1][1] > 0.0 {
        Signature::Positive
    } else {
        Signature::Negative
    }
}

pub fn metric_at(g: &Metric2, x: f64, y: f64) -> Result<MetricPoint> {
    let [a, b, c] = g.jets(x, y)?;
    let m = [[a.v, b.v], [b.v, c.v]];
    let det = a.v * c.v - b.v * b.v;
    let norm = frobenius(&m);
    if !(det.abs() >= SINGULAR_REL * norm * norm) || norm == 0.0 {
        return Err(Error::SingularMetric { x, y, det });
    }
    Ok(MetricPoint {
        m,
        det,
        signature: classify_signature(&m, det),
    })
}

/// Jets of the inverse metric components `(g^11, g^12, g^22)`.
pub fn inverse_jets(g: &Metric2, x: f64, y: f64) -> Result<[Jet2; 3]> {
    metric_at(g, x, y)?;
    let [a, b, c] = g.jets(x, y)?;
    let det = a * c - b * b;
    let r = det.recip();
    Ok([c * r, -(b * r), a * r])
}

/// `Γ[k][i][j] = Γ^k_{ij}`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

pub fn christoffel_at(g: &Metric2, x: f64, y: f64) -> Result<Christoffel> {
    let p = metric_at(g, x, y)?;
    let [a, b, c] = g.jets(x, y)?;
    let comp = [[a, b], [b, c]];
    // dg[l][i][j] = ∂_l g_ij
    let mut dg = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            dg[0][i][j] = comp[i][j].dx;
            dg[1][i][j] = comp[i][j].dy;
        }
    }
    let inv = invert(&p.m, p.det);
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in i..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += inv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
                gamma[k][j][i] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

pub fn invert(m: &Mat2, det: f64) -> Mat2 {
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

/// `G^i_j = Σ_α ḡ_{jα} g^{iα}`, i.e. the matrix `g⁻¹ ḡ`.
pub fn g_tensor_at(g: &Metric2, gbar: &Metric2, x: f64, y: f64) -> Result<Mat2> {
    let p = metric_at(g, x, y)?;
    let q = metric_at(gbar, x, y)?;
    let inv = invert(&p.m, p.det);
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            *o = (0..2).map(|a| q.m[j][a] * inv[i][a]).sum();
        }
    }
    Ok(out)
}

/// Eigenstructure class of a 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum ClassKind {
    /// Two real eigenvalues, `lambda < mu`.
    RealDistinct { lambda: f64, mu: f64 },
    /// Eigenvalues `re ± i·im`, `im > 0`.
    ComplexPair { re: f64, im: f64 },
    /// Double eigenvalue with a nonzero nilpotent part.
    JordanBlock { lambda: f64 },
    /// Scalar multiple of the identity.
    Proportional { lambda: f64 },
    /// Within ten tolerances of a case boundary; no label is forced.
    Ambiguous { nilpotent: f64, discriminant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CaseTag {
    RealDistinct,
    ComplexPair,
    JordanBlock,
    Proportional,
    Ambiguous,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl ClassKind {
    pub fn tag(&self) -> CaseTag {
        match self {
            ClassKind::RealDistinct { .. } => CaseTag::RealDistinct,
            ClassKind::ComplexPair { .. } => CaseTag::ComplexPair,
            ClassKind::JordanBlock { .. } => CaseTag::JordanBlock,
            ClassKind::Proportional { .. } => CaseTag::Proportional,
            ClassKind::Ambiguous { .. } => CaseTag::Ambiguous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub kind: ClassKind,
    pub tolerance: f64,
}

/// Classifies `G` by its characteristic polynomial.
///
/// With `s = ‖G‖_F`, the nilpotent measure is `n = ‖G − (tr G/2) I‖_F / s`
/// and the discriminant measure is `d = ((a−d)² + 4bc) / s²`. Both are
/// invariant under scaling of `G`. `n ≤ tol` is proportional, `|d| ≤ tol`
/// (with `n > tol`) a Jordan block; the sign of `d` separates the remaining
/// real and complex cases. Values within `10·tol` of either threshold are
/// reported as [`ClassKind::Ambiguous`].
pub fn classify_at(m: &Mat2, tol: f64) -> Classification {
    let tr = m[0][0] + m[1][1];
    let half = 0.5 * tr;
    let scale = frobenius(m);
    let done = |kind| Classification {
        kind,
        tolerance: tol,
    };
    if scale == 0.0 {
        return done(ClassKind::Proportional { lambda: 0.0 });
    }
    let traceless = [[m[0][0] - half, m[0][1]], [m[1][0], m[1][1] - half]];
    let n = frobenius(&traceless) / scale;
    let diff = m[0][0] - m[1][1];
    let disc = diff * diff + 4.0 * m[0][1] * m[1][0];
    let d = disc / (scale * scale);
    if n <= tol {
        return done(ClassKind::Proportional { lambda: half });
    }
    if n <= 10.0 * tol || (d.abs() > tol && d.abs() <= 10.0 * tol) {
        return done(ClassKind::Ambiguous {
            nilpotent: n,
            discriminant: d,
        });
    }
    if d.abs() <= tol {
        return done(ClassKind::JordanBlock { lambda: half });
    }
    if d > 0.0 {
        let root = disc.sqrt();
        // Avoid cancellation: compute the larger-magnitude root first.
        let q = half + 0.5 * root.copysign(tr);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let (r1, r2) = if q != 0.0 {
            (q, det / q)
        } else {
            (0.5 * root, -0.5 * root)
        };
        let (lambda, mu) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        done(ClassKind::RealDistinct { lambda, mu })
    } else {
        done(ClassKind::ComplexPair {
            re: half,
            im: 0.5 * (-disc).sqrt(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointClassification {
    pub x: f64,
    pub y: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairClassification {
    pub points: Vec<PointClassification>,
    pub counts: BTreeMap<CaseTag, usize>,
    /// Most frequent non-ambiguous tag (ambiguous only if nothing else occurs).
    pub modal: CaseTag,
    /// Fraction of grid points carrying the modal tag.
    pub fraction: f64,
}

pub fn classify_pair(g: &Metric2, gbar: &Metric2, tol: f64) -> Result<PairClassification> {
    let mut points = Vec::new();
    let mut counts = BTreeMap::new();
    for (x, y) in g.chart.grid() {
        let m = g_tensor_at(g, gbar, x, y)?;
        let classification = classify_at(&m, tol);
        *counts.entry(classification.kind.tag()).or_insert(0) += 1;
        points.push(PointClassification {
            x,
            y,
            classification,
        });
    }
    let modal = counts
        .iter()
        .filter(|(t, _)| **t != CaseTag::Ambiguous)
        .max_by_key(|(t, c)| (**c, std::cmp::Reverse(**t)))
        .map(|(t, _)| *t)
        .unwrap_or(CaseTag::Ambiguous);
    let fraction = counts[&modal] as f64 / points.len() as f64;
    Ok(PairClassification {
        points,
        counts,
        modal,
        fraction,
    })
}
