//! Command-line front end: `projeq <config.json> [--output-dir DIR] [--quiet]`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the
//! mathematics rejects the input (not an integral, wrong case, geodesic
//! leaving the chart), 2 for unreadable or invalid configs and inputs.

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::{integrate_geodesic, GeodesicOptions, PhaseState, Trajectory};
use crate::equivalence::{
    cross_check, fit_integral_relation, triviality_check, verify_integral, MOMENTUM_BASIS,
};
use crate::error::Error;
use crate::field::QuadraticForm;
use crate::geometry::{classify_pair, CaseTag, Chart, Metric2, PairClassification};
use crate::normal_forms::{generate, NormalFormSpec, Sign, Variant};
use crate::rectify::{rectification_pipeline, CASE_TOL, CLOSEDNESS_TOL};
use config::{parse_config, Command, ConfigError, JobConfig};
pub use report::{export_trajectory, Check, Report, Status};

#[derive(Debug, Parser)]
#[command(
    name = "projeq",
    version,
    about = "Classify, verify, generate and rectify projectively equivalent 2D metrics"
)]
pub struct Args {
    /// Job configuration (JSON).
    pub config: PathBuf,
    /// Directory for the report and trajectory files.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Print nothing on success.
    #[arg(long)]
    pub quiet: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Problems that stop a job before a report can be written.
#[derive(Debug)]
pub enum InputError {
    Config(ConfigError),
    Io(String),
    Rejected(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Config(e) => write!(f, "config error at {e}"),
            InputError::Io(m) => write!(f, "{m}"),
            InputError::Rejected(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl From<ConfigError> for InputError {
    fn from(e: ConfigError) -> Self {
        InputError::Config(e)
    }
}

/// Errors that say something about the mathematics of a valid input
/// (exit 1, with a report) rather than about the input itself (exit 2).
fn is_verdict(e: &Error) -> bool {
    matches!(
        e,
        Error::NotAxisAligned { .. }
            | Error::NotCase1 { .. }
            | Error::NotHolomorphic { .. }
            | Error::NotCase3 { .. }
            | Error::YhatVanishes { .. }
            | Error::TrivialIntegral { .. }
            | Error::AmbiguousCase(_)
            | Error::CoefficientVanishes { .. }
            | Error::ChartExit { .. }
            | Error::StepFailure { .. }
            | Error::ZeroVelocity { .. }
    )
}

fn reject(e: Error) -> InputError {
    InputError::Rejected(e.to_string())
}

/// What a command produced.
struct Outcome {
    checks: Vec<Check>,
    error: Option<String>,
    result: Value,
    trajectory: Option<Trajectory>,
}

impl Outcome {
    fn new(checks: Vec<Check>, result: Value) -> Outcome {
        Outcome {
            checks,
            error: None,
            result,
            trajectory: None,
        }
    }

    fn verdict(e: Error) -> Outcome {
        Outcome {
            checks: Vec::new(),
            error: Some(e.to_string()),
            result: Value::Null,
            trajectory: None,
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialise")
}

/// Parses the process arguments and runs the job; returns the exit code.
pub fn main() -> i32 {
    run(&Args::parse())
}

pub fn run(args: &Args) -> i32 {
    match execute(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("projeq: {e}");
            EXIT_INPUT
        }
    }
}

/// A finished job: its report and, for `geodesic`, the trajectory.
#[derive(Debug)]
pub struct JobOutput {
    pub report: Report,
    pub trajectory: Option<Trajectory>,
}

/// Runs a parsed job without touching the filesystem.
pub fn evaluate(config: &JobConfig) -> Result<JobOutput, InputError> {
    let chart = config.chart()?;
    let outcome = match config.command {
        Command::Classify => classify(config, chart)?,
        Command::Verify => verify(config, chart)?,
        Command::Generate => generate_job(config, chart)?,
        Command::Rectify => rectify(config, chart)?,
        Command::Geodesic => geodesic(config, chart)?,
    };
    let report = Report::new(
        config.command,
        chart,
        config.tolerances,
        outcome.checks,
        outcome.error,
        outcome.result,
    );
    Ok(JobOutput {
        report,
        trajectory: outcome.trajectory,
    })
}

fn execute(args: &Args) -> Result<i32, InputError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| InputError::Io(format!("cannot read {}: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    let JobOutput { report, trajectory } = evaluate(&config)?;
    std::fs::create_dir_all(&args.output_dir)
        .map_err(|e| InputError::Io(format!("cannot create {}: {e}", args.output_dir.display())))?;
    let mut files = Vec::new();
    if let Some(traj) = &trajectory {
        let path = args.output_dir.join(&config.output.trajectory);
        write_file(&path, |p| export_trajectory(traj, p))?;
        files.push(path);
    }
    let path = args.output_dir.join(&config.output.report);
    write_file(&path, |p| report.write(p))?;
    files.push(path);
    if let Some(e) = &report.error {
        eprintln!("projeq: {e}");
    }
    if !args.quiet {
        print_summary(&report, &files);
    }
    Ok(match report.status {
        Status::Pass => EXIT_OK,
        Status::Fail => EXIT_FAILED,
    })
}

fn write_file(path: &Path, write: impl Fn(&Path) -> std::io::Result<()>) -> Result<(), InputError> {
    write(path).map_err(|e| InputError::Io(format!("cannot write {}: {e}", path.display())))
}

fn print_summary(report: &Report, files: &[PathBuf]) {
    let status = match report.status {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
    };
    println!("{}: {status}", report.command.name());
    for c in &report.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!(
            "  [{mark}] {} = {:.3e} (tolerance {:.1e})",
            c.name, c.residual, c.tolerance
        );
    }
    for f in files {
        println!("  wrote {}", f.display());
    }
}

fn metric(config: &JobConfig, chart: Chart) -> Result<Metric2, InputError> {
    let m = config.metric.as_ref().expect("checked by parse_config");
    Ok(m.build(chart, "$.metric")?)
}

fn integral(config: &JobConfig) -> Result<Option<QuadraticForm>, InputError> {
    match &config.integral {
        Some(i) => Ok(Some(i.build("$.integral")?)),
        None => Ok(None),
    }
}

#[derive(Serialize)]
struct ClassSummary {
    modal: CaseTag,
    fraction: f64,
    counts: BTreeMap<CaseTag, usize>,
}

fn class_summary(c: &PairClassification) -> ClassSummary {
    ClassSummary {
        modal: c.modal,
        fraction: c.fraction,
        counts: c.counts.clone(),
    }
}

fn fraction_of(c: &PairClassification, tag: CaseTag) -> f64 {
    c.counts.get(&tag).copied().unwrap_or(0) as f64 / c.points.len() as f64
}

fn classify(config: &JobConfig, chart: Chart) -> Result<Outcome, InputError> {
    let pair = config
        .metric_pair
        .as_ref()
        .expect("checked by parse_config");
    let g = pair.g.build(chart, "$.metric_pair.g")?;
    let gbar = pair.gbar.build(chart, "$.metric_pair.gbar")?;
    let tol = &config.tolerances;
    let cls = classify_pair(&g, &gbar, tol.classify).map_err(reject)?;
    let ambiguous = fraction_of(&cls, CaseTag::Ambiguous);
    let points: Vec<Value> = cls
        .points
        .iter()
        .map(|p| json!([p.x, p.y, p.classification.kind.tag()]))
        .collect();
    let result = json!({
        "signatures": {"g": g.signature().to_string(), "gbar": gbar.signature().to_string()},
        "classification": class_summary(&cls),
        "points": points,
    });
    Ok(Outcome::new(
        vec![Check::at_most(
            "ambiguous_fraction",
            ambiguous,
            tol.class_fraction,
        )],
        result,
    ))
}

fn verify(config: &JobConfig, chart: Chart) -> Result<Outcome, InputError> {
    let g = metric(config, chart)?;
    let form = integral(config)?.expect("checked by parse_config");
    let tol = &config.tolerances;
    let report = verify_integral(&g, &form, tol.verify).map_err(reject)?;
    let trivial = triviality_check(&form, &g, tol.trivial).map_err(reject)?;
    let mut checks = vec![Check::at_most(
        "integral_residual",
        report.max_residual,
        tol.verify,
    )];
    let mut result = json!({
        "signature": g.signature().to_string(),
        "verification": report,
        "triviality": trivial,
    });
    if let Some(f) = g.null_factor() {
        let cross = cross_check(&f, &form, &chart, tol.verify).map_err(reject)?;
        let mut check = Check::at_most("oracle_agreement", cross.max_difference, tol.verify);
        check.passed &= cross.same_verdict;
        checks.push(check);
        result["cross_check"] = json!({
            "sys_residual": cross.sys.max_residual,
            "bracket_residual": cross.bracket.max_residual,
            "max_difference": cross.max_difference,
            "same_verdict": cross.same_verdict,
        });
    }
    Ok(Outcome::new(checks, result))
}

/// Closed-form expressions of a normal form with its parameters substituted.
#[derive(Serialize)]
struct Formulas {
    parameters: BTreeMap<&'static str, String>,
    g: String,
    gbar: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    integral: Option<String>,
}

fn formulas(variant: &Variant) -> Formulas {
    match variant {
        Variant::Liouville { x_fn, y_fn, sign } => {
            let (x, y) = (x_fn.render(), y_fn.render());
            let pm = match sign {
                Sign::Plus => "+",
                Sign::Minus => "-",
            };
            Formulas {
                parameters: BTreeMap::from([("X", x.clone()), ("Y", y.clone())]),
                g: format!("(({x}) - ({y}))*(dx^2 {pm} dy^2)"),
                gbar: format!("(1/({y}) - 1/({x}))*(dx^2/({x}) {pm} dy^2/({y}))"),
                integral: Some(format!("(({x})*py^2 {pm} ({y})*px^2)/(({x}) - ({y}))")),
            }
        }
        Variant::ComplexLiouville { h } => {
            let h = h.render();
            Formulas {
                parameters: BTreeMap::from([("h", h.clone())]),
                g: format!("2*Im({h}) dx dy"),
                gbar: format!(
                    "-(Im({h})/|{h}|^2)^2 dx^2 + 2*Re({h})*Im({h})/|{h}|^4 dx dy + (Im({h})/|{h}|^2)^2 dy^2"
                ),
                integral: Some(format!("px^2 + 2*Re({h})/Im({h})*px*py - py^2")),
            }
        }
        Variant::JordanBlock { y_fn } => {
            let y = y_fn.render();
            let f = format!("(1 + x*d/dy({y}))");
            Formulas {
                parameters: BTreeMap::from([("Y", y.clone())]),
                g: format!("{f} dx dy"),
                gbar: format!("-2*{f}/({y})^3 dx dy + {f}^2/({y})^4 dy^2"),
                integral: Some(format!("px^2 - 2*({y})/{f}*px*py")),
            }
        }
        Variant::JordanKillingFree { y_tilde } => {
            let y = y_tilde.render();
            let f = format!("(({y}) + x)");
            Formulas {
                parameters: BTreeMap::from([("Y~", y)]),
                g: format!("{f} dx dy"),
                gbar: format!("-2*{f}/y^3 dx dy + {f}^2/y^4 dy^2"),
                integral: None,
            }
        }
    }
}

fn generate_job(config: &JobConfig, chart: Chart) -> Result<Outcome, InputError> {
    let nf = config
        .normal_form
        .as_ref()
        .expect("checked by parse_config");
    let spec: NormalFormSpec = nf.build(chart, "$.normal_form")?;
    let pair = generate(&spec).map_err(reject)?;
    let tol = &config.tolerances;
    let gbar = pair.gbar.as_ref().expect("partner requested");
    let mut checks = Vec::new();
    let cls = classify_pair(&pair.g, gbar, tol.classify).map_err(reject)?;
    let generating = pair.family.case_tag();
    checks.push(Check::at_most(
        "classification_mismatch",
        1.0 - fraction_of(&cls, generating),
        tol.class_fraction,
    ));
    let mut result = json!({
        "family": pair.family,
        "formulas": formulas(&spec.variant),
        "signatures": {"g": pair.g.signature().to_string(), "gbar": gbar.signature().to_string()},
        "classification": class_summary(&cls),
    });
    if let Some(form) = &pair.integral {
        let report = verify_integral(&pair.g, form, tol.verify).map_err(reject)?;
        checks.push(Check::at_most(
            "integral_residual",
            report.max_residual,
            tol.verify,
        ));
        result["verification"] = to_value(&report);
        result["triviality"] =
            to_value(triviality_check(form, &pair.g, tol.trivial).map_err(reject)?);
        if pair.g.signature() == gbar.signature() {
            let states: Vec<PhaseState> = chart
                .grid()
                .flat_map(|(x, y)| MOMENTUM_BASIS.map(|p| PhaseState::new(x, y, p[0], p[1])))
                .collect();
            let fit = fit_integral_relation(&pair.g, gbar, form, &states).map_err(reject)?;
            checks.push(Check::at_most("integral_fit", fit.residual, tol.fit));
            result["projective_integral_fit"] = to_value(fit);
        } else {
            result["projective_integral_fit"] =
                json!("not applicable: g and gbar have different signatures");
        }
    }
    Ok(Outcome::new(checks, result))
}

fn rectify(config: &JobConfig, chart: Chart) -> Result<Outcome, InputError> {
    let g = metric(config, chart)?;
    let form = integral(config)?.expect("checked by parse_config");
    match rectification_pipeline(&g, &form) {
        Ok(rep) => {
            let r = &rep.residuals;
            let tol = config.tolerances.reconstruction;
            let checks = vec![
                Check::at_most("closedness", r.closedness, CLOSEDNESS_TOL),
                Check::at_most("case_check", r.case_check, CASE_TOL),
                Check::at_most("metric_reconstruction", r.metric, tol),
                Check::at_most("integral_reconstruction", r.integral, tol),
            ];
            Ok(Outcome::new(checks, to_value(&rep)))
        }
        Err(e) if is_verdict(&e) => Ok(Outcome::verdict(e)),
        Err(e) => Err(reject(e)),
    }
}

fn geodesic(config: &JobConfig, chart: Chart) -> Result<Outcome, InputError> {
    let g = metric(config, chart)?;
    let form = integral(config)?;
    let job = config.geodesic.as_ref().expect("checked by parse_config");
    let tol = &config.tolerances;
    let opts = GeodesicOptions {
        tol: tol.integrator,
        max_steps: job.max_steps,
        allow_null: job.allow_null,
        ..Default::default()
    };
    let [x, y, px, py] = job.initial;
    if !(job.t_end.is_finite()) {
        return Err(ConfigError::new("$.geodesic.t_end", "must be finite").into());
    }
    let logs: Vec<&QuadraticForm> = form.iter().collect();
    let (traj, error) =
        match integrate_geodesic(&g, PhaseState::new(x, y, px, py), job.t_end, &opts, &logs) {
            Ok(t) => (t, None),
            Err(Error::ChartExit { t, partial, .. }) => (
                *partial,
                Some(format!("trajectory left the chart at t = {t}")),
            ),
            Err(e) if is_verdict(&e) => return Ok(Outcome::verdict(e)),
            Err(e) => return Err(reject(e)),
        };
    let energy_drift = Trajectory::relative_drift(&traj.energy);
    let mut checks = vec![Check::at_most("energy_drift", energy_drift, tol.drift)];
    let mut result = json!({
        "samples": traj.len(),
        "final": traj.last().map(|(t, s)| json!({"t": t, "state": s})),
        "energy_drift": energy_drift,
    });
    if let Some(log) = traj.integrals.first() {
        let drift = Trajectory::relative_drift(log);
        checks.push(Check::at_most("integral_drift", drift, tol.drift));
        result["integral_drift"] = json!(drift);
    }
    Ok(Outcome {
        checks,
        error,
        result,
        trajectory: Some(traj),
    })
}
