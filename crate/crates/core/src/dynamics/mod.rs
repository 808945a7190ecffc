//! Hamiltonian geodesic flow: energy, Poisson brackets, trajectories,
//! conservation logs and the projective (unparametrised geodesic) residual.

pub mod rk45;

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Error, Result};
use crate::expr::Jet2;
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::{christoffel_at, inverse_jets, Metric2};
use rk45::{Flow, Rk45Error, Rk45Options};

/// A point `(x, y, p_x, p_y)` of the cotangent bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        PhaseState { x, y, px, py }
    }

    fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    fn from_array(a: &[f64; 4]) -> Self {
        PhaseState::new(a[0], a[1], a[2], a[3])
    }
}

/// Accepted integrator steps with energy and integral logs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// `H` at every sample.
    pub energy: Vec<f64>,
    /// One log per registered integral, aligned with `times`.
    pub integrals: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, PhaseState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// `max |v_k − v_0| / |v_0|` over a logged quantity (absolute if `v_0 = 0`).
    pub fn relative_drift(values: &[f64]) -> f64 {
        let Some(&v0) = values.first() else {
            return 0.0;
        };
        let scale = if v0 == 0.0 { 1.0 } else { v0.abs() };
        values
            .iter()
            .map(|v| (v - v0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// A function on the cotangent bundle that is a quadratic form in the
/// momenta, `A p_x² + B p_x p_y + C p_y²`.
pub trait MomentumQuadratic {
    /// Jets of `(A, B, C)` at `(x, y)`.
    fn momentum_jets(&self, x: f64, y: f64) -> Result<[Jet2; 3]>;
}

/// The metric stands for its Hamiltonian `H = ½ g^{ij} p_i p_j`.
impl MomentumQuadratic for Metric2 {
    fn momentum_jets(&self, x: f64, y: f64) -> Result<[Jet2; 3]> {
        let [i11, i12, i22] = inverse_jets(self, x, y)?;
        Ok([i11.scale(0.5), i12, i22.scale(0.5)])
    }
}

impl MomentumQuadratic for QuadraticForm {
    fn momentum_jets(&self, x: f64, y: f64) -> Result<[Jet2; 3]> {
        Ok(self.jets(x, y)?)
    }
}

/// `H = ½ g^{ij} p_i p_j` as a quadratic form in momenta.
pub fn hamiltonian_form(g: &Metric2) -> QuadraticForm {
    let component = |k: usize, scale: f64| {
        let g = g.clone();
        ScalarField::from_fn(format!("H[{k}]"), move |x, y| {
            inverse_jets(&g, x, y)
                .map(|j| j[k].scale(scale))
                .map_err(|e| DomainError::new("H", e.to_string()))
        })
    };
    QuadraticForm::new(component(0, 0.5), component(1, 1.0), component(2, 0.5))
}

/// Value, position gradient and momentum gradient at a phase point.
struct PhaseGradient {
    value: f64,
    dq: [f64; 2],
    dp: [f64; 2],
}

fn phase_gradient(obj: &dyn MomentumQuadratic, s: &PhaseState) -> Result<PhaseGradient> {
    let [a, b, c] = obj.momentum_jets(s.x, s.y)?;
    let (px, py) = (s.px, s.py);
    let (m2, mx, my) = (px * px, px * py, py * py);
    Ok(PhaseGradient {
        value: a.v * m2 + b.v * mx + c.v * my,
        dq: [
            a.dx * m2 + b.dx * mx + c.dx * my,
            a.dy * m2 + b.dy * mx + c.dy * my,
        ],
        dp: [2.0 * a.v * px + b.v * py, b.v * px + 2.0 * c.v * py],
    })
}

pub fn hamiltonian(g: &Metric2, s: &PhaseState) -> Result<f64> {
    Ok(phase_gradient(g, s)?.value)
}

pub fn quadratic_value(f: &QuadraticForm, s: &PhaseState) -> Result<f64> {
    Ok(phase_gradient(f, s)?.value)
}

/// `{A, B} = Σ_i ∂A/∂x_i ∂B/∂p_i − ∂A/∂p_i ∂B/∂x_i`.
pub fn poisson_bracket(
    a: &dyn MomentumQuadratic,
    b: &dyn MomentumQuadratic,
    s: &PhaseState,
) -> Result<f64> {
    let ga = phase_gradient(a, s)?;
    let gb = phase_gradient(b, s)?;
    Ok((0..2)
        .map(|i| ga.dq[i] * gb.dp[i] - ga.dp[i] * gb.dq[i])
        .sum())
}

/// Hamilton's equations `(ẋ, ẏ, ṗ_x, ṗ_y)` for the Hamiltonian `h`.
pub fn hamilton_vector_field(h: &dyn MomentumQuadratic, s: &PhaseState) -> Result<[f64; 4]> {
    let gr = phase_gradient(h, s)?;
    Ok([gr.dp[0], gr.dp[1], -gr.dq[0], -gr.dq[1]])
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicOptions {
    /// Local relative and absolute tolerance of the integrator.
    pub tol: f64,
    pub max_steps: usize,
    pub h_max: f64,
    /// Allow initial covectors with `H = 0`.
    pub allow_null: bool,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            tol: 1e-10,
            max_steps: 1_000_000,
            h_max: f64::INFINITY,
            allow_null: false,
        }
    }
}

/// Integrates the geodesic flow of `g` from `s0` for time `t_end`, logging
/// `H` and each registered integral at every accepted step.
///
/// Stops with [`Error::ChartExit`] (carrying the in-chart part of the
/// trajectory) as soon as an accepted step leaves the chart.
pub fn integrate_geodesic(
    g: &Metric2,
    s0: PhaseState,
    t_end: f64,
    opts: &GeodesicOptions,
    integrals: &[&QuadraticForm],
) -> Result<Trajectory> {
    if !g.chart.contains(s0.x, s0.y) {
        return Err(Error::InvalidChart(format!(
            "initial point ({}, {}) lies outside the chart",
            s0.x, s0.y
        )));
    }
    let h0 = phase_gradient(g, &s0)?;
    if !opts.allow_null {
        let [a, b, c] = g.momentum_jets(s0.x, s0.y)?;
        let scale = (a.v.abs() + b.v.abs() + c.v.abs()) * (s0.px * s0.px + s0.py * s0.py);
        if h0.value.abs() <= 1e-12 * scale {
            return Err(Error::NullInitialState { h: h0.value });
        }
    }
    let mut traj = Trajectory {
        integrals: vec![Vec::new(); integrals.len()],
        ..Default::default()
    };
    let mut log_error: Option<Error> = None;
    let mut exited: Option<(f64, PhaseState)> = None;
    let record = |t: f64, s: PhaseState, traj: &mut Trajectory| -> Result<()> {
        let h = hamiltonian(g, &s)?;
        let values = integrals
            .iter()
            .map(|f| quadratic_value(f, &s))
            .collect::<Result<Vec<_>>>()?;
        traj.times.push(t);
        traj.states.push(s);
        traj.energy.push(h);
        for (log, v) in traj.integrals.iter_mut().zip(values) {
            log.push(v);
        }
        Ok(())
    };
    record(0.0, s0, &mut traj)?;
    let rk = Rk45Options {
        rtol: opts.tol,
        atol: opts.tol,
        h_max: opts.h_max,
        max_steps: opts.max_steps,
    };
    let result = rk45::integrate(
        |_, y: &[f64; 4]| hamilton_vector_field(g, &PhaseState::from_array(y)),
        0.0,
        s0.to_array(),
        t_end,
        &rk,
        |t, y| {
            let s = PhaseState::from_array(y);
            if !g.chart.contains(s.x, s.y) {
                exited = Some((t, s));
                return Flow::Stop;
            }
            if let Err(e) = record(t, s, &mut traj) {
                log_error = Some(e);
                return Flow::Stop;
            }
            Flow::Continue
        },
    );
    match result {
        Ok(_) => {}
        Err(Rk45Error::Rhs(e)) => return Err(e),
        Err(Rk45Error::StepUnderflow { t, y, .. }) | Err(Rk45Error::TooManySteps { t, y }) => {
            return Err(Error::StepFailure {
                t,
                state: PhaseState::from_array(&y),
            })
        }
    }
    if let Some(e) = log_error {
        return Err(e);
    }
    if let Some((t, state)) = exited {
        return Err(Error::ChartExit {
            t,
            state,
            partial: Box::new(traj),
        });
    }
    Ok(traj)
}

/// Maximum over samples of `|r ∧ γ̇| / |γ̇|³` with `r = γ̈ + Γ_g(γ̇, γ̇)`.
///
/// `traj` must come from the geodesic flow of `generator`; `γ̇` and `γ̈` are
/// computed analytically from the generator's Hamiltonian vector field. The
/// residual vanishes iff the curve is an unparametrised geodesic of `g`.
pub fn projective_residual(g: &Metric2, generator: &Metric2, traj: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (index, s) in traj.states.iter().enumerate() {
        let [a, b, c] = generator.momentum_jets(s.x, s.y)?;
        let (px, py) = (s.px, s.py);
        let vel = [2.0 * a.v * px + b.v * py, b.v * px + 2.0 * c.v * py];
        let speed = vel[0].hypot(vel[1]);
        if !(speed > 1e-12) {
            return Err(Error::ZeroVelocity { index });
        }
        let dpx = -(a.dx * px * px + b.dx * px * py + c.dx * py * py);
        let dpy = -(a.dy * px * px + b.dy * px * py + c.dy * py * py);
        let along = |j: Jet2| j.dx * vel[0] + j.dy * vel[1];
        let acc = [
            2.0 * along(a) * px + 2.0 * a.v * dpx + along(b) * py + b.v * dpy,
            along(b) * px + b.v * dpx + 2.0 * along(c) * py + 2.0 * c.v * dpy,
        ];
        let gamma = christoffel_at(g, s.x, s.y)?;
        let mut r = acc;
        for (k, rk) in r.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *rk += gamma[k][i][j] * vel[i] * vel[j];
                }
            }
        }
        let wedge = r[0] * vel[1] - r[1] * vel[0];
        worst = worst.max(wedge.abs() / speed.powi(3));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use approx::assert_relative_eq;

    fn chart() -> Chart {
        Chart::new([-2.0, 2.0], [-2.0, 2.0], 5, 5).unwrap()
    }

    fn euclid() -> Metric2 {
        Metric2::parse("1", "0", "1", chart()).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(
            hamiltonian(&euclid(), &PhaseState::new(0.0, 0.0, 1.0, 0.0)).unwrap(),
            0.5
        );
        let null = Metric2::parse("0", "1/2", "0", chart()).unwrap();
        // g⁻¹ of [[0, 1/2], [1/2, 0]] is [[0, 2], [2, 0]]: H = ½·2·2·p_x p_y
        assert_eq!(
            hamiltonian(&null, &PhaseState::new(0.3, 0.1, 1.0, 1.0)).unwrap(),
            2.0
        );
        let g = Metric2::parse("2+x^2", "0.3", "-1-y^2", chart()).unwrap();
        assert_eq!(
            hamiltonian(&g, &PhaseState::new(0.3, 0.1, 0.0, 0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn quadratic_value_examples() {
        let f = QuadraticForm::parse("1", "0", "0").unwrap();
        assert_eq!(
            quadratic_value(&f, &PhaseState::new(0.0, 0.0, 2.0, 7.0)).unwrap(),
            4.0
        );
        let jordan = QuadraticForm::parse("1", "-2*y/(1+x*1)", "0").unwrap();
        assert_eq!(
            quadratic_value(&jordan, &PhaseState::new(0.0, 1.0, 1.0, 1.0)).unwrap(),
            -1.0
        );
        let h_form = QuadraticForm::parse("0", "2", "0").unwrap();
        assert_eq!(
            quadratic_value(&h_form, &PhaseState::new(0.0, 0.0, 1.0, 1.0)).unwrap(),
            2.0
        );
    }

    #[test]
    fn bracket_examples() {
        let g = Metric2::parse("1+x^2", "0.2*x*y", "2+sin(y)", chart()).unwrap();
        let s = PhaseState::new(0.3, -0.4, 0.7, 1.1);
        assert_eq!(poisson_bracket(&g, &g, &s).unwrap(), 0.0);
        let flat = Metric2::parse("0", "1/2", "0", chart()).unwrap();
        let f = QuadraticForm::parse("1", "0", "0").unwrap();
        assert_eq!(poisson_bracket(&flat, &f, &s).unwrap(), 0.0);
        let upper = Chart::new([0.5, 2.0], [0.5, 2.0], 4, 4).unwrap();
        let cl = Metric2::parse("0", "y", "0", upper).unwrap();
        let fz = QuadraticForm::parse("1", "2*x/y", "-1").unwrap();
        let v = poisson_bracket(&cl, &fz, &PhaseState::new(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
        let q = QuadraticForm::parse("x*y", "y^2", "1+x").unwrap();
        let ab = poisson_bracket(&g, &q, &s).unwrap();
        let ba = poisson_bracket(&q, &g, &s).unwrap();
        assert_eq!(ab, -ba);
    }

    #[test]
    fn flat_flows_are_straight() {
        let opts = GeodesicOptions::default();
        let traj = integrate_geodesic(
            &euclid(),
            PhaseState::new(0.0, 0.0, 1.0, 0.0),
            1.0,
            &opts,
            &[],
        )
        .unwrap();
        let (t, s) = traj.last().unwrap();
        assert_eq!(t, 1.0);
        assert!((s.x - 1.0).abs() < 1e-9 && s.y.abs() < 1e-9);
        let null = Metric2::parse("0", "1/2", "0", chart()).unwrap();
        let traj = integrate_geodesic(&null, PhaseState::new(0.0, 0.0, 1.0, 1.0), 0.5, &opts, &[])
            .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            // ẋ = 2 p_y, ẏ = 2 p_x with constant momenta
            assert_relative_eq!(s.x, 2.0 * t, epsilon = 1e-12);
            assert_relative_eq!(s.y, 2.0 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn chart_exit_and_null_states() {
        let opts = GeodesicOptions::default();
        match integrate_geodesic(
            &euclid(),
            PhaseState::new(0.0, 0.0, 1.0, 0.0),
            5.0,
            &opts,
            &[],
        ) {
            Err(Error::ChartExit { t, partial, .. }) => {
                assert!(t > 2.0 && t < 5.0);
                assert!(partial.states.iter().all(|s| s.x <= 2.0));
            }
            other => panic!("{other:?}"),
        }
        let null = Metric2::parse("0", "1/2", "0", chart()).unwrap();
        let r = integrate_geodesic(&null, PhaseState::new(0.0, 0.0, 1.0, 0.0), 1.0, &opts, &[]);
        assert!(matches!(r, Err(Error::NullInitialState { .. })));
        let allow = GeodesicOptions {
            allow_null: true,
            ..opts
        };
        assert!(
            integrate_geodesic(&null, PhaseState::new(0.0, 0.0, 1.0, 0.0), 0.5, &allow, &[])
                .is_ok()
        );
    }

    #[test]
    fn liouville_energy_is_conserved() {
        let c = Chart::new([-0.5, 0.5], [-0.5, 0.5], 5, 5).unwrap();
        let g = Metric2::parse("(2+x^2)-(-1-y^2)", "0", "-((2+x^2)-(-1-y^2))", c).unwrap();
        let traj = integrate_geodesic(
            &g,
            PhaseState::new(0.0, 0.0, 0.3, 0.1),
            1.0,
            &GeodesicOptions::default(),
            &[],
        )
        .unwrap();
        assert!(Trajectory::relative_drift(&traj.energy) < 1e-8);
    }

    #[test]
    fn geodesics_are_their_own_reparametrisations() {
        let c = Chart::new([-1.0, 1.0], [-1.0, 1.0], 5, 5).unwrap();
        let g = Metric2::parse("2+x^2", "0.3*x*y", "1+y^2", c).unwrap();
        let s0 = PhaseState::new(0.1, -0.2, 0.4, 0.3);
        let opts = GeodesicOptions::default();
        let traj = integrate_geodesic(&g, s0, 1.0, &opts, &[]).unwrap();
        assert!(projective_residual(&g, &g, &traj).unwrap() < 1e-8);
        let g5 = g.scale(5.0).unwrap();
        let traj5 = integrate_geodesic(&g5, s0, 1.0, &opts, &[]).unwrap();
        assert!(projective_residual(&g, &g5, &traj5).unwrap() < 1e-8);
        // A different metric generally does not share geodesics.
        let other = Metric2::parse("1", "0", "1", c).unwrap();
        assert!(projective_residual(&other, &g, &traj).unwrap() > 1e-3);
    }
}
