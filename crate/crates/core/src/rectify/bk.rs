//! Quadrature normalisation of null coordinates: `x_new = ∫ dx/√|a|`,
//! `y_new = ∫ dy/√|c|`.

use std::fmt;
use std::sync::Arc;

use super::change::{apply_admissible_change, AdmissibleChange, IdentityMap, MonotoneMap};
use crate::error::{Axis, DomainError, Error, Result};
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::Chart;
use crate::quadrature;

/// Coefficients below this magnitude count as zero.
pub const VANISHING_TOL: f64 = 1e-8;
/// Allowed relative cross-axis variation of `a` (resp. `c`).
pub const AXIS_TOL: f64 = 1e-8;

const QUAD_TOL: f64 = 1e-14;
/// Cumulative-integral table nodes per chart grid interval.
const TABLE_REFINE: usize = 4;

/// `t ↦ ∫_{t₀}^t |k(s)|^{-1/2} ds` for a coefficient `k` sampled along a line.
#[derive(Clone)]
pub struct QuadratureMap {
    axis: Axis,
    /// Position of the line on the other axis.
    line: f64,
    coefficient: ScalarField,
    sign: f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    domain: [f64; 2],
}

impl fmt::Debug for QuadratureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QuadratureMap({} along {} = {})",
            self.coefficient.label(),
            self.axis,
            self.line
        )
    }
}

impl QuadratureMap {
    fn new(
        axis: Axis,
        line: f64,
        coefficient: ScalarField,
        sign: f64,
        domain: [f64; 2],
        n: usize,
    ) -> Result<Self> {
        let mut map = QuadratureMap {
            axis,
            line,
            coefficient,
            sign,
            nodes: Vec::with_capacity(n),
            cumulative: Vec::with_capacity(n),
            domain,
        };
        let mut acc = 0.0;
        for k in 0..n {
            let t = domain[0] + (domain[1] - domain[0]) * k as f64 / (n - 1) as f64;
            if k > 0 {
                acc += map.segment(map.nodes[k - 1], t)?;
            }
            map.nodes.push(t);
            map.cumulative.push(acc);
        }
        Ok(map)
    }

    fn coefficient_jet(&self, t: f64) -> Result<[f64; 3], DomainError> {
        let (x, y) = match self.axis {
            Axis::X => (t, self.line),
            Axis::Y => (self.line, t),
        };
        let j = self.coefficient.jet(x, y)?;
        Ok(match self.axis {
            Axis::X => [j.v, j.dx, j.dxx],
            Axis::Y => [j.v, j.dy, j.dyy],
        })
    }

    fn density(&self, t: f64) -> Result<f64, DomainError> {
        let k = self.sign * self.coefficient_jet(t)?[0];
        if !(k > 0.0) {
            return Err(DomainError::new(
                self.coefficient.label(),
                format!("coefficient vanishes at {t}"),
            ));
        }
        Ok(k.powf(-0.5))
    }

    fn segment(&self, a: f64, b: f64) -> Result<f64, DomainError> {
        quadrature::integrate(
            &|t| self.density(t),
            a,
            b,
            QUAD_TOL * (b - a).abs().max(1e-300),
        )
    }
}

impl MonotoneMap for QuadratureMap {
    fn derivatives(&self, t: f64) -> Result<[f64; 4], DomainError> {
        let k = self
            .nodes
            .partition_point(|&n| n <= t)
            .clamp(1, self.nodes.len())
            - 1;
        let base = if (t - self.nodes[k]).abs()
            <= (t - self.nodes[(k + 1).min(self.nodes.len() - 1)]).abs()
        {
            k
        } else {
            k + 1
        };
        let value = self.cumulative[base] + self.segment(self.nodes[base], t)?;
        // ρ = s^{-1/2} with s = |k|
        let [k0, k1, k2] = self.coefficient_jet(t)?;
        let (s, s1, s2) = (self.sign * k0, self.sign * k1, self.sign * k2);
        if !(s > 0.0) {
            return Err(DomainError::new(
                self.coefficient.label(),
                format!("coefficient vanishes at {t}"),
            ));
        }
        let rho = s.powf(-0.5);
        let rho1 = -0.5 * s.powf(-1.5) * s1;
        let rho2 = 0.75 * s.powf(-2.5) * s1 * s1 - 0.5 * s.powf(-1.5) * s2;
        Ok([value, rho, rho1, rho2])
    }

    fn domain(&self) -> [f64; 2] {
        self.domain
    }
}

/// Result of [`bk_normalize`].
#[derive(Debug, Clone)]
pub struct BkNormalized {
    pub change: AdmissibleChange,
    pub f: ScalarField,
    pub form: QuadraticForm,
    pub chart: Chart,
    /// `sign(a)` and `sign(c)`; zero for a coefficient that vanishes identically.
    pub signs: [f64; 2],
}

/// Sign of a coefficient over the grid, after checking it depends on one
/// axis only. Returns 0 when it vanishes identically.
fn axis_sign(field: &ScalarField, chart: &Chart, axis: Axis) -> Result<f64> {
    let mut zero = 0usize;
    let mut sign = 0.0;
    let mut scale: f64 = 0.0;
    let mut total = 0usize;
    for (x, y) in chart.grid() {
        let v = field.value(x, y)?;
        scale = scale.max(v.abs());
        total += 1;
        if v.abs() < VANISHING_TOL {
            zero += 1;
            continue;
        }
        let s = v.signum();
        if sign != 0.0 && s != sign {
            return Err(Error::CoefficientVanishes { axis, x, y });
        }
        sign = s;
    }
    if zero == total {
        return Ok(0.0);
    }
    if zero > 0 {
        let (x, y) = chart
            .grid()
            .find(|&(x, y)| {
                field
                    .value(x, y)
                    .map(|v| v.abs() < VANISHING_TOL)
                    .unwrap_or(true)
            })
            .expect("counted above");
        return Err(Error::CoefficientVanishes { axis, x, y });
    }
    let (cx, cy) = chart.center();
    let mut deviation: f64 = 0.0;
    for (x, y) in chart.grid() {
        let reference = match axis {
            Axis::X => field.value(x, cy)?,
            Axis::Y => field.value(cx, y)?,
        };
        deviation = deviation.max((field.value(x, y)? - reference).abs() / scale);
    }
    if deviation > AXIS_TOL {
        return Err(Error::NotAxisAligned { axis, deviation });
    }
    Ok(sign)
}

/// Rescales null coordinates so that `a` and `c` become `±1`.
///
/// Each coordinate is replaced by `∫ dt/√|k(t)|` measured from the lower-left
/// corner of the chart, with `k = a` along the central horizontal line (or
/// `k = c` along the central vertical line). Axes whose coefficient vanishes
/// identically are left alone.
pub fn bk_normalize(f: &ScalarField, form: &QuadraticForm, chart: &Chart) -> Result<BkNormalized> {
    let sa = axis_sign(&form.a, chart, Axis::X)?;
    let sc = axis_sign(&form.c, chart, Axis::Y)?;
    let (cx, cy) = chart.center();
    let n = |m: usize| (m - 1) * TABLE_REFINE + 1;
    let phi: Arc<dyn MonotoneMap> = if sa == 0.0 {
        Arc::new(IdentityMap {
            domain: chart.x_range,
        })
    } else {
        Arc::new(QuadratureMap::new(
            Axis::X,
            cy,
            form.a.clone(),
            sa,
            chart.x_range,
            n(chart.nx),
        )?)
    };
    let psi: Arc<dyn MonotoneMap> = if sc == 0.0 {
        Arc::new(IdentityMap {
            domain: chart.y_range,
        })
    } else {
        Arc::new(QuadratureMap::new(
            Axis::Y,
            cx,
            form.c.clone(),
            sc,
            chart.y_range,
            n(chart.ny),
        )?)
    };
    let change = AdmissibleChange { phi, psi };
    let (f_new, form_new) = apply_admissible_change(f, form, &change);
    Ok(BkNormalized {
        chart: change.map_chart(chart)?,
        change,
        f: f_new,
        form: form_new,
        signs: [sa, sc],
    })
}
