//! Recovery of normal-form data from a `(+,−)` metric and a quadratic
//! integral.
//!
//! The pipeline never asks for null coordinates up front. At every point it
//! finds the two null directions `V₁`, `V₂` of `g`, builds the 1-forms
//! `ω₁ = g(V₂, ·)`, `ω₂ = g(V₁, ·)` (proportional to `du`, `dv` of any null
//! coordinates) and normalises them by the integral:
//! `B_k = ω_k / √|σ F(ω_k, ω_k)|`. For a genuine integral these forms are
//! closed, and their potentials are null coordinates in which `a`, `c` are
//! `±1` or `0`. The sign pattern then selects one of three solvers.

mod bk;
mod cases;
mod change;
mod frame;
mod table;

pub use bk::{bk_normalize, BkNormalized, QuadratureMap};
pub use cases::{
    Gauge, NodeSample, Parameters, RecoveryReport, RecoveryResiduals, CASE_TOL, RECONSTRUCTION_TOL,
};
pub use change::{
    apply_admissible_change, check_monotone, AdmissibleChange, ExprMap, IdentityMap, InverseMap,
    MonotoneMap,
};
pub use frame::{SignPattern, ZERO_COEFFICIENT_TOL};
pub use table::{ComplexTable, Table};

use crate::equivalence::{triviality_check, DEFAULT_TRIVIAL_TOL};
use crate::error::{Axis, Error, Result};
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::{Chart, Metric2, Signature};
use frame::NullFrame;

/// Allowed relative curl of the normalised 1-forms.
pub const CLOSEDNESS_TOL: f64 = 1e-6;

/// Recovers the normal-form family and its parameter functions.
pub fn rectification_pipeline(g: &Metric2, form: &QuadraticForm) -> Result<RecoveryReport> {
    rectify(g, form, None)
}

/// Runs the pipeline, optionally insisting on one case (1, 2 or 3).
pub fn rectify(g: &Metric2, form: &QuadraticForm, expected: Option<u8>) -> Result<RecoveryReport> {
    if g.signature() != Signature::Lorentzian {
        return Err(Error::Unsupported(format!(
            "metric has signature {}; rectification handles (+,-) only, definite metrics are not supported",
            g.signature()
        )));
    }
    let trivial = triviality_check(form, g, DEFAULT_TRIVIAL_TOL)?;
    if trivial.trivial {
        return Err(Error::TrivialIntegral {
            factor: trivial.lambda,
        });
    }
    let frame = NullFrame::new(g, form)?;
    let case = match frame.pattern {
        SignPattern::SameSign => 1,
        SignPattern::OppositeSign => 2,
        SignPattern::OneVanishes => 3,
    };
    if let Some(want) = expected {
        if want != case {
            return Err(Error::AmbiguousCase(format!(
                "sign pattern of the integral selects case {case}, not case {want}"
            )));
        }
    }
    let chart = g.chart;
    let [c1, c2] = cases::closedness(&frame, &chart)?;
    if c1 > CLOSEDNESS_TOL {
        return Err(Error::NotAxisAligned {
            axis: Axis::X,
            deviation: c1,
        });
    }
    if c2 > CLOSEDNESS_TOL {
        return Err(Error::NotAxisAligned {
            axis: Axis::Y,
            deviation: c2,
        });
    }
    let closed = c1.max(c2);
    match case {
        1 => cases::case1(&frame, &chart, closed),
        2 => cases::case2(&frame, &chart, closed),
        _ => cases::case3(&frame, &chart, closed),
    }
}

fn null_form_case(
    f: &ScalarField,
    form: &QuadraticForm,
    chart: &Chart,
    case: u8,
) -> Result<RecoveryReport> {
    let g = Metric2::null_form(f, *chart)?;
    rectify(&g, form, Some(case))
}

/// Liouville case for `ds² = f dx dy` with `a`, `c` of one sign.
pub fn solve_case1(f: &ScalarField, form: &QuadraticForm, chart: &Chart) -> Result<RecoveryReport> {
    null_form_case(f, form, chart, 1)
}

/// Complex-Liouville case for `ds² = f dx dy` with `a`, `c` of opposite sign.
pub fn solve_case2(f: &ScalarField, form: &QuadraticForm, chart: &Chart) -> Result<RecoveryReport> {
    null_form_case(f, form, chart, 2)
}

/// Jordan-block case for `ds² = f dx dy` with `c ≡ 0` (or `a ≡ 0`).
pub fn solve_case3(f: &ScalarField, form: &QuadraticForm, chart: &Chart) -> Result<RecoveryReport> {
    null_form_case(f, form, chart, 3)
}
