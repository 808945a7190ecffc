//! Dormand–Prince 5(4) integrator with PI step-size control.

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct Rk45Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Rk45Options {
            rtol: 1e-10,
            atol: 1e-10,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

/// What the step observer wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rk45Error<E, const N: usize> {
    /// The right-hand side failed at the initial point.
    Rhs(E),
    /// The step size shrank below round-off at `t`.
    StepUnderflow {
        t: f64,
        y: [f64; N],
        last: Option<E>,
    },
    TooManySteps {
        t: f64,
        y: [f64; N],
    },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last stage row, FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `observe` is called after every accepted step and may stop the run early.
/// A failing right-hand side inside a step is treated as a rejected step
/// (the step shrinks); it is reported only if it happens at the initial
/// point or the step size underflows. Returns the final `(t, y)`.
pub fn integrate<const N: usize, E>(
    mut rhs: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Rk45Options,
    mut observe: impl FnMut(f64, &[f64; N]) -> Flow,
) -> Result<(f64, [f64; N]), Rk45Error<E, N>> {
    let span = t_end - t0;
    if span == 0.0 {
        return Ok((t0, y0));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k0 = rhs(t, &y).map_err(Rk45Error::Rhs)?;
    let mut h = initial_step(&y, &k0, span.abs(), opts);
    let mut err_prev: f64 = 1e-4;
    let mut last_err = None;
    let mut steps = 0usize;

    while dir * (t_end - t) > 0.0 {
        if steps >= opts.max_steps {
            return Err(Rk45Error::TooManySteps { t, y });
        }
        let remaining = (t_end - t).abs();
        // Stretch a step that would leave a round-off sliver before `t_end`.
        let last = h >= remaining - 1e-10 * span.abs();
        if last {
            h = remaining;
        }
        if h <= 1e-14 * t.abs().max(span.abs()) {
            return Err(Rk45Error::StepUnderflow {
                t,
                y,
                last: last_err,
            });
        }
        let hs = dir * h;
        match try_step(&mut rhs, t, &y, &k0, hs, opts) {
            Err(e) => {
                last_err = Some(e);
                h *= 0.25;
            }
            Ok((y_new, k_new, err)) => {
                if err <= 1.0 {
                    steps += 1;
                    t = if last { t_end } else { t + hs };
                    y = y_new;
                    k0 = k_new;
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(0.2, 5.0)
                    };
                    err_prev = err.max(1e-4);
                    h = (h * factor).min(opts.h_max);
                    if observe(t, &y) == Flow::Stop {
                        break;
                    }
                } else {
                    let factor = (SAFETY * err.powf(-ALPHA)).clamp(0.1, 1.0);
                    h *= factor;
                }
            }
        }
    }
    Ok((t, y))
}

type StepResult<const N: usize> = ([f64; N], [f64; N], f64);

/// One Dormand–Prince step; returns the new state, its derivative (first
/// stage of the next step) and the scaled RMS error estimate.
fn try_step<const N: usize, E>(
    rhs: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    k0: &[f64; N],
    h: f64,
    opts: &Rk45Options,
) -> Result<StepResult<N>, E> {
    let mut k = [[0.0; N]; 7];
    k[0] = *k0;
    for s in 1..7 {
        let mut ys = *y;
        for (i, yi) in ys.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj[i];
            }
            *yi += h * acc;
        }
        k[s] = rhs(t + C[s] * h, &ys)?;
        if s == 6 {
            let mut err = 0.0;
            for i in 0..N {
                let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let scale = opts.atol + opts.rtol * y[i].abs().max(ys[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                // Treat overflow as a huge error so the step shrinks.
                return Ok((ys, k[6], 1e10));
            }
            debug_assert!(B5.iter().zip(A[6]).all(|(b, a)| *b == a));
            return Ok((ys, k[6], err));
        }
    }
    unreachable!("the loop returns at the last stage")
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], span: f64, opts: &Rk45Options) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).min(opts.h_max).max(1e-12 * span)
}
