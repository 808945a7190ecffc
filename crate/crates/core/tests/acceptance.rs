//! Acceptance suite: nine criteria over seeded random normal-form instances.
//! Each criterion prints one PASS/FAIL line; the test fails if any does.

mod common;

use common::*;
use projeq::dynamics::{
    hamiltonian_form, integrate_geodesic, projective_residual, GeodesicOptions, PhaseState,
    Trajectory,
};
use projeq::equivalence::{
    axis_dependence, cross_check, fit_integral_relation, projective_integral_at, triviality_check,
    verify_integral, DEFAULT_TRIVIAL_TOL, DEFAULT_VERIFY_TOL, MOMENTUM_BASIS,
};
use projeq::expr::{parse, Context};
use projeq::geometry::{classify_pair, metric_at, DEFAULT_CLASSIFY_TOL};
use projeq::normal_forms::{complex_metric_identity_residual, Family};
use projeq::rectify::{bk_normalize, rectification_pipeline};
use projeq::{Error, Metric2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const PER_FAMILY: usize = 20;
const GEODESICS: usize = 10;
const PROJECTIVE_TOL: f64 = 1e-6;
const INTEGRATOR_TOL: f64 = 1e-10;
const CLASSIFY_FRACTION: f64 = 0.95;
const DRIFT_TOL: f64 = 1e-6;
const FIT_TOL: f64 = 1e-8;
const AXIS_TOL: f64 = 1e-9;
const BK_TOL: f64 = 1e-8;
const ROUNDTRIP_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-12;
const NEGATIVE_FLOOR: f64 = 1e-4;
const CROSS_TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome { passed, detail }
    }
}

fn instances() -> Vec<Instance> {
    let mut rng = rng(20_240_601);
    FAMILIES
        .iter()
        .flat_map(|&family| (0..PER_FAMILY).map(move |k| (family, k)))
        .map(|(family, k)| family_instance(&mut rng, family, k))
        .collect()
}

fn integral_verification(all: &[Instance]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for inst in all {
        let r = verify_integral(&inst.pair.g, inst.integral(), DEFAULT_VERIFY_TOL).unwrap();
        worst = worst.max(r.max_residual);
        if !r.passed {
            failures.push(inst.label.clone());
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} instances, max normalised residual {worst:.2e} (tol {DEFAULT_VERIFY_TOL:e}){}",
            all.len(),
            fail_list(&failures)
        ),
    )
}

fn fail_list(failures: &[String]) -> String {
    match failures.first() {
        None => String::new(),
        Some(first) => format!("; {} failures, first: {first}", failures.len()),
    }
}

/// A geodesic of `m` from a random point in the middle of the chart, with a
/// short non-null initial velocity. Halves the speed when the curve leaves
/// the chart.
fn geodesic(rng: &mut ChaCha8Rng, m: &Metric2) -> Trajectory {
    let c = m.chart;
    let (cx, cy) = c.center();
    let opts = GeodesicOptions {
        tol: INTEGRATOR_TOL,
        ..Default::default()
    };
    loop {
        let x = cx + 0.3 * c.width() * rng.gen_range(-0.5..0.5);
        let y = cy + 0.3 * c.height() * rng.gen_range(-0.5..0.5);
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let g = metric_at(m, x, y).unwrap().m;
        let v = [angle.cos(), angle.sin()];
        let p = [
            g[0][0] * v[0] + g[0][1] * v[1],
            g[1][0] * v[0] + g[1][1] * v[1],
        ];
        let norm = v[0] * p[0] + v[1] * p[1];
        let size = g.iter().flatten().map(|e| e.abs()).fold(0.0, f64::max);
        if norm.abs() < 0.2 * size {
            continue;
        }
        let mut speed = 0.15 * c.width().min(c.height());
        for _ in 0..6 {
            let s0 = PhaseState::new(x, y, speed * p[0], speed * p[1]);
            match integrate_geodesic(m, s0, 1.0, &opts, &[]) {
                Ok(t) => return t,
                Err(Error::ChartExit { .. }) => speed *= 0.5,
                Err(e) => panic!("geodesic integration failed: {e}"),
            }
        }
    }
}

struct FlowData {
    /// Worst bidirectional projective residual per instance.
    projective: Vec<f64>,
    /// `g`-geodesics per instance, used for the conservation of `I`.
    g_paths: Vec<Vec<Trajectory>>,
}

fn flow_data(all: &[Instance]) -> FlowData {
    let mut rng = rng(7);
    let mut projective = Vec::new();
    let mut g_paths = Vec::new();
    for inst in all {
        let (g, gbar) = (&inst.pair.g, inst.gbar());
        let mut worst: f64 = 0.0;
        let mut paths = Vec::new();
        for _ in 0..GEODESICS {
            let forward = geodesic(&mut rng, g);
            worst = worst.max(projective_residual(gbar, g, &forward).unwrap());
            let backward = geodesic(&mut rng, gbar);
            worst = worst.max(projective_residual(g, gbar, &backward).unwrap());
            paths.push(forward);
        }
        projective.push(worst);
        g_paths.push(paths);
    }
    FlowData {
        projective,
        g_paths,
    }
}

fn projective_equivalence(all: &[Instance], flows: &FlowData) -> Outcome {
    let worst = flows.projective.iter().copied().fold(0.0, f64::max);
    let mut failures = Vec::new();
    let mut min_fraction: f64 = 1.0;
    for (inst, &r) in all.iter().zip(&flows.projective) {
        let cls = classify_pair(&inst.pair.g, inst.gbar(), DEFAULT_CLASSIFY_TOL).unwrap();
        let hits = cls
            .counts
            .get(&inst.pair.family.case_tag())
            .copied()
            .unwrap_or(0);
        let fraction = hits as f64 / cls.points.len() as f64;
        min_fraction = min_fraction.min(fraction);
        if r >= PROJECTIVE_TOL || fraction < CLASSIFY_FRACTION {
            failures.push(format!(
                "{} (residual {r:.2e}, class {fraction:.3})",
                inst.label
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} instances x {GEODESICS} geodesics each way, max residual {worst:.2e} (tol {PROJECTIVE_TOL:e}), min class fraction {min_fraction:.3}{}",
            all.len(),
            fail_list(&failures)
        ),
    )
}

fn integral_bridge(all: &[Instance], flows: &FlowData) -> Outcome {
    let (mut drift, mut fit_worst): (f64, f64) = (0.0, 0.0);
    let mut max_liouville_alpha = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for (inst, paths) in all.iter().zip(&flows.g_paths) {
        let (g, gbar) = (&inst.pair.g, inst.gbar());
        let mut d: f64 = 0.0;
        for t in paths {
            let values: Vec<f64> = t
                .states
                .iter()
                .map(|s| projective_integral_at(g, gbar, s).unwrap())
                .collect();
            d = d.max(Trajectory::relative_drift(&values));
        }
        let states: Vec<PhaseState> = g
            .chart
            .grid()
            .flat_map(|(x, y)| MOMENTUM_BASIS.map(|p| PhaseState::new(x, y, p[0], p[1])))
            .collect();
        let fit = fit_integral_relation(g, gbar, inst.integral(), &states).unwrap();
        drift = drift.max(d);
        fit_worst = fit_worst.max(fit.residual);
        let sign_ok = if inst.pair.family == Family::Liouville {
            max_liouville_alpha = max_liouville_alpha.max(fit.alpha);
            fit.alpha < 0.0
        } else {
            true
        };
        if d >= DRIFT_TOL || fit.residual >= FIT_TOL || !sign_ok {
            failures.push(format!(
                "{} (drift {d:.2e}, fit {:.2e}, alpha {})",
                inst.label, fit.residual, fit.alpha
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "max drift of I {drift:.2e} (tol {DRIFT_TOL:e}), max fit residual {fit_worst:.2e} (tol {FIT_TOL:e}), Liouville alpha <= {max_liouville_alpha:.3}{}",
            fail_list(&failures)
        ),
    )
}

fn null_coordinate_structure(all: &[Instance]) -> Outcome {
    let (mut axis, mut bk): (f64, f64) = (0.0, 0.0);
    let mut failures = Vec::new();
    for inst in all {
        let n = null_form(inst);
        let (ay, cx) = axis_dependence(&n.form, &n.chart).unwrap();
        let dev = match bk_normalize(&n.f, &n.form, &n.chart) {
            Ok(r) => {
                let mut dev: f64 = 0.0;
                for (x, y) in r.chart.grid() {
                    let [a, _, c] = r.form.coefficients(x, y).unwrap();
                    dev = dev.max((a - r.signs[0]).abs());
                    if r.signs[1] != 0.0 {
                        dev = dev.max((c - r.signs[1]).abs());
                    }
                }
                if r.signs[0] == 0.0 {
                    f64::INFINITY
                } else {
                    dev
                }
            }
            Err(_) => f64::INFINITY,
        };
        axis = axis.max(ay).max(cx);
        bk = bk.max(dev);
        if ay >= AXIS_TOL || cx >= AXIS_TOL || dev > BK_TOL {
            failures.push(format!(
                "{} (a_y {ay:.2e}, c_x {cx:.2e}, bk {dev:.2e})",
                n.label
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "max relative |a_y|, |c_x| {axis:.2e} (tol {AXIS_TOL:e}), max |a_new - (+-1)| {bk:.2e} (tol {BK_TOL:e}){}",
            fail_list(&failures)
        ),
    )
}

fn round_trip(all: &[Instance]) -> Outcome {
    let mut rng = rng(99);
    let mut recovered = 0;
    let mut worst: f64 = 0.0;
    let mut worst_label = String::new();
    let mut failures = Vec::new();
    for inst in all {
        let n = scrambled(&mut rng, &null_form(inst));
        let g = Metric2::null_form(&n.f, n.chart).unwrap();
        match rectification_pipeline(&g, &n.form) {
            Ok(r) => {
                let residual = r.residuals.metric.max(r.residuals.integral);
                if residual > worst {
                    worst = residual;
                    worst_label = n.label.clone();
                }
                if r.family == n.family && residual < ROUNDTRIP_TOL && r.passed {
                    recovered += 1;
                } else {
                    failures.push(format!(
                        "{} -> {:?} (residual {residual:.2e})",
                        n.label, r.family
                    ));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", n.label)),
        }
    }
    Outcome::new(
        recovered == all.len(),
        format!(
            "{recovered}/{} scrambled runs recovered, max reconstruction residual {worst:.2e} (tol {ROUNDTRIP_TOL:e}) on {worst_label}{}",
            all.len(),
            fail_list(&failures)
        ),
    )
}

fn complex_identity() -> Outcome {
    let mut rng = rng(5);
    let functions = ["z", "z^2", "exp(z)", "z+z^3", "sin(z)+i*z"];
    let mut worst: f64 = 0.0;
    for text in functions {
        let h = parse(text, Context::Complex).unwrap();
        for _ in 0..50 {
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            worst = worst.max(complex_metric_identity_residual(&h, x, y).unwrap());
        }
    }
    Outcome::new(
        worst < IDENTITY_TOL,
        format!(
            "{} functions x 50 points, max residual {worst:.2e} (tol {IDENTITY_TOL:e})",
            functions.len()
        ),
    )
}

fn triviality(all: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst_lambda: f64 = 0.0;
    let mut min_deviation = f64::INFINITY;
    for inst in all {
        let g = &inst.pair.g;
        let three_h = hamiltonian_form(g).scale(3.0);
        let t = triviality_check(&three_h, g, DEFAULT_TRIVIAL_TOL).unwrap();
        worst_lambda = worst_lambda.max((t.lambda - 3.0).abs());
        if !t.trivial {
            failures.push(format!("{}: 3H not trivial", inst.label));
        }
        let t = triviality_check(inst.integral(), g, DEFAULT_TRIVIAL_TOL).unwrap();
        min_deviation = min_deviation.min(t.deviation);
        if t.trivial {
            failures.push(format!("{}: integral trivial", inst.label));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "3H trivial with |lambda - 3| <= {worst_lambda:.2e}; smallest integral deviation {min_deviation:.3} (tol {DEFAULT_TRIVIAL_TOL:e}){}",
            fail_list(&failures)
        ),
    )
}

fn is_case_error(e: &Error) -> bool {
    matches!(
        e,
        Error::NotAxisAligned { .. }
            | Error::NotCase1 { .. }
            | Error::NotHolomorphic { .. }
            | Error::NotCase3 { .. }
            | Error::AmbiguousCase(_)
            | Error::CoefficientVanishes { .. }
    )
}

fn negative_controls(all: &[Instance]) -> Outcome {
    let mut min_residual = f64::INFINITY;
    let mut failures = Vec::new();
    for inst in all {
        let g = &inst.pair.g;
        let bad = perturb(inst.integral());
        let r = verify_integral(g, &bad, DEFAULT_VERIFY_TOL).unwrap();
        min_residual = min_residual.min(r.max_residual);
        let outcome = rectification_pipeline(g, &bad);
        let rejected = matches!(&outcome, Err(e) if is_case_error(e));
        if r.max_residual <= NEGATIVE_FLOOR || !rejected {
            failures.push(format!(
                "{} (residual {:.2e}, rectify {:?})",
                inst.label,
                r.max_residual,
                outcome.map(|r| r.family)
            ));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} perturbed integrals, min residual {min_residual:.2e} (floor {NEGATIVE_FLOOR:e}), all rejected by rectification: {}{}",
            all.len(),
            failures.is_empty(),
            fail_list(&failures)
        ),
    )
}

fn oracle_agreement(all: &[Instance]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for inst in all {
        let n = null_form(inst);
        for (form, label) in [
            (n.form.clone(), "integral"),
            (perturb(&n.form), "perturbed"),
        ] {
            let c = cross_check(&n.f, &form, &n.chart, DEFAULT_VERIFY_TOL).unwrap();
            worst = worst.max(c.max_difference);
            if !c.same_verdict || c.max_difference > CROSS_TOL {
                failures.push(format!(
                    "{} {label} (difference {:.2e})",
                    n.label, c.max_difference
                ));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} integrals and perturbations, same verdicts, max bracket difference {worst:.2e} (tol {CROSS_TOL:e}){}",
            all.len(),
            fail_list(&failures)
        ),
    )
}

fn main() {
    let all = instances();
    let flows = flow_data(&all);
    let results = [
        ("1 integral verification", integral_verification(&all)),
        (
            "2 projective equivalence",
            projective_equivalence(&all, &flows),
        ),
        (
            "3 projective integral bridge",
            integral_bridge(&all, &flows),
        ),
        (
            "4 null-coordinate structure",
            null_coordinate_structure(&all),
        ),
        ("5 rectification round trip", round_trip(&all)),
        ("6 complex metric identity", complex_identity()),
        ("7 triviality", triviality(&all)),
        ("8 negative controls", negative_controls(&all)),
        ("9 oracle cross-check", oracle_agreement(&all)),
    ];
    let mut failed = Vec::new();
    for (name, outcome) in &results {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", outcome.detail);
        if !outcome.passed {
            failed.push(*name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
