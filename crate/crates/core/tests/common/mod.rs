//! Randomised normal-form instances shared by the integration suites.

#![allow(dead_code)]

use projeq::normal_forms::{
    generate, liouville_null_coordinates, Family, NormalFormPair, NormalFormSpec, Sign, Variant,
};
use projeq::rectify::{apply_admissible_change, AdmissibleChange};
use projeq::{Chart, QuadraticForm, ScalarField};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GRID: usize = 21;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coef(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    rng.gen_range(-bound..=bound)
}

/// `base + c1 t + c2 t² + c3 t³` in variable `var`.
fn cubic(rng: &mut ChaCha8Rng, var: &str, base: f64, bound: f64) -> String {
    let (c1, c2, c3) = (coef(rng, bound), coef(rng, bound), coef(rng, bound));
    format!("{base}+({c1})*{var}+({c2})*{var}^2+({c3})*{var}^3")
}

pub fn chart(x: [f64; 2], y: [f64; 2]) -> Chart {
    Chart::new(x, y, GRID, GRID).unwrap()
}

/// A generated instance together with the parameters it came from.
pub struct Instance {
    pub spec: NormalFormSpec,
    pub pair: NormalFormPair,
    pub label: String,
}

impl Instance {
    pub fn integral(&self) -> &QuadraticForm {
        self.pair.integral.as_ref().unwrap()
    }

    pub fn gbar(&self) -> &projeq::Metric2 {
        self.pair.gbar.as_ref().unwrap()
    }
}

fn instance(variant: Variant, chart: Chart, label: String) -> Instance {
    let spec = NormalFormSpec::new(variant, chart);
    let pair = generate(&spec).unwrap_or_else(|e| panic!("{label}: {e}"));
    Instance { spec, pair, label }
}

/// `X = 3 + cubic`, `Y = 1.5 + cubic` on `[−0.5, 0.5]²`.
pub fn liouville(rng: &mut ChaCha8Rng, sign: Sign) -> Instance {
    let x = cubic(rng, "x", 3.0, 0.5);
    let y = cubic(rng, "y", 1.5, 0.5);
    let label = format!("Liouville X={x} Y={y} sign={sign:?}");
    instance(
        Variant::liouville(&x, &y, sign).unwrap(),
        chart([-0.5, 0.5], [-0.5, 0.5]),
        label,
    )
}

pub const HOLOMORPHIC: [&str; 4] = ["z", "z^2", "exp(z)", "z+z^3"];

/// `h = k h₀(z) + d` for the `which`-th base function, on a chart where
/// `Im h` keeps one sign.
pub fn complex(rng: &mut ChaCha8Rng, which: usize) -> Instance {
    let k = rng.gen_range(0.5..=2.0);
    let d = coef(rng, 1.0);
    let base = HOLOMORPHIC[which % 4];
    let h = format!("({k})*({base})+({d})");
    let c = match which % 4 {
        0 | 2 => chart([-0.5, 0.5], [0.5, 1.5]),
        1 => chart([0.5, 1.5], [0.5, 1.5]),
        _ => chart([-0.5, 0.5], [0.3, 0.9]),
    };
    instance(
        Variant::complex_liouville(&h).unwrap(),
        c,
        format!("complex h={h}"),
    )
}

/// `Y = 1.5 + cubic` on `[−0.5, 0.5]²`.
pub fn jordan(rng: &mut ChaCha8Rng) -> Instance {
    let y = cubic(rng, "y", 1.5, 0.4);
    instance(
        Variant::jordan_block(&y).unwrap(),
        chart([-0.5, 0.5], [-0.5, 0.5]),
        format!("Jordan Y={y}"),
    )
}

/// `Ỹ = 2 + small cubic` on `[−0.5, 0.5] × [0.5, 1.5]`.
pub fn killing_free(rng: &mut ChaCha8Rng) -> Instance {
    let y = cubic(rng, "y", 2.0, 0.1);
    instance(
        Variant::jordan_killing_free(&y).unwrap(),
        chart([-0.5, 0.5], [0.5, 1.5]),
        format!("Killing-free Y~={y}"),
    )
}

/// The `k`-th instance of a family, cycling the holomorphic base functions.
pub fn family_instance(rng: &mut ChaCha8Rng, family: Family, k: usize) -> Instance {
    match family {
        Family::Liouville => liouville(rng, Sign::Minus),
        Family::ComplexLiouville => complex(rng, k),
        Family::JordanBlock => jordan(rng),
    }
}

pub const FAMILIES: [Family; 3] = [
    Family::Liouville,
    Family::ComplexLiouville,
    Family::JordanBlock,
];

/// An instance in null coordinates: `ds² = f dx dy` with integral `F`.
pub struct NullInstance {
    pub f: ScalarField,
    pub form: QuadraticForm,
    pub chart: Chart,
    pub family: Family,
    pub label: String,
}

pub fn null_form(inst: &Instance) -> NullInstance {
    let family = inst.pair.family;
    match family {
        Family::Liouville => {
            let n = liouville_null_coordinates(&inst.spec).unwrap();
            NullInstance {
                f: n.f,
                form: n.integral,
                chart: n.chart,
                family,
                label: inst.label.clone(),
            }
        }
        _ => NullInstance {
            f: inst.pair.g.null_factor().unwrap(),
            form: inst.integral().clone(),
            chart: inst.pair.g.chart,
            family,
            label: inst.label.clone(),
        },
    }
}

/// `t ↦ t + α (t − t₀)² + β (t − t₀)³` about the chart centre, `|α|, |β| ≤ 0.15`.
pub fn scramble(rng: &mut ChaCha8Rng, chart: &Chart) -> (AdmissibleChange, String) {
    let (cx, cy) = chart.center();
    let mut map = |var: &str, c: f64| {
        let (a, b) = (coef(rng, 0.15), coef(rng, 0.15));
        format!("{var}+({a})*({var}-({c}))^2+({b})*({var}-({c}))^3")
    };
    let (phi, psi) = (map("x", cx), map("y", cy));
    let label = format!("phi={phi} psi={psi}");
    (AdmissibleChange::parse(&phi, &psi, chart).unwrap(), label)
}

pub fn scrambled(rng: &mut ChaCha8Rng, inst: &NullInstance) -> NullInstance {
    let (change, label) = scramble(rng, &inst.chart);
    let (f, form) = apply_admissible_change(&inst.f, &inst.form, &change);
    NullInstance {
        f,
        form,
        chart: change.map_chart(&inst.chart).unwrap(),
        family: inst.family,
        label: format!("{} scrambled by {label}", inst.label),
    }
}

/// `b += 0.01 x`.
pub fn perturb(form: &QuadraticForm) -> QuadraticForm {
    let x = ScalarField::parse("x").unwrap();
    let b = form.b.zip(&x, "b+0.01x", |b, x| b + x.scale(0.01));
    QuadraticForm::new(form.a.clone(), b, form.c.clone())
}
