//! Dormand–Prince 5(4) integration of the `(a, ȧ)` system with vanish detection.

use super::{hermite_quintic, Sample, ScalingOde, Trajectory, TrajectoryStatus};
use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
// fifth-order weights minus embedded fourth-order weights
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
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Steps are limited to `clamp · min(a/|ȧ|, sqrt(a/|ä|))`.
    pub clamp: f64,
    /// Vanish threshold as a fraction of `a0`.
    pub vanish_fraction: f64,
    /// Target width of the bisected threshold-crossing bracket.
    pub event_tol: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_steps: 2_000_000,
            clamp: 0.01,
            vanish_fraction: 1e-10,
            event_tol: 1e-13,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.rel_tol) || !in_unit(self.abs_tol) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must lie in (0, 1), got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.clamp > 0.0 && self.clamp <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "clamp must lie in (0, 1], got {}",
                self.clamp
            )));
        }
        if !in_unit(self.vanish_fraction) || !(self.event_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "vanish fraction and event tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Integrate `ode` on `[0, t_end]` with default step-control settings.
pub fn integrate(ode: &ScalingOde, t_end: f64, rel_tol: f64, abs_tol: f64) -> Result<Trajectory> {
    integrate_with(
        ode,
        t_end,
        &IntegratorOptions::with_tolerances(rel_tol, abs_tol),
    )
}

pub fn integrate_with(
    ode: &ScalingOde,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    ode.validate()?;
    opts.validate()?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }

    let threshold = opts.vanish_fraction * ode.a0;
    let rhs = |y: [f64; 2]| [y[1], ode.acceleration(y[0], y[1])];
    let scale = |y: f64, y_new: f64| opts.abs_tol + opts.rel_tol * y.abs().max(y_new.abs());

    let mut t = 0.0;
    let mut y = [ode.a0, ode.a1];
    let mut samples = vec![Sample {
        t,
        a: y[0],
        adot: y[1],
    }];
    let finish = |samples: Vec<Sample>, status| Trajectory {
        ode: *ode,
        samples,
        status,
        vanish_threshold: threshold,
    };

    if y[0] <= threshold {
        return Ok(finish(
            samples,
            TrajectoryStatus::VanishDetected {
                t_lower: 0.0,
                t_upper: 0.0,
            },
        ));
    }

    let mut k0 = rhs(y);
    let mut h = {
        let d0 = ((y[0] / scale(y[0], y[0])).powi(2) + (y[1] / scale(y[1], y[1])).powi(2)).sqrt();
        let d1 = ((k0[0] / scale(y[0], y[0])).powi(2) + (k0[1] / scale(y[1], y[1])).powi(2)).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0.min(t_end)
    };

    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Ok(finish(
                samples,
                TrajectoryStatus::StepFailure {
                    t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                },
            ));
        }

        let limit = geometric_step_limit(y, k0[1], opts.clamp);
        h = h.min(limit).min(t_end - t);
        let h_min = 4.0 * f64::EPSILON * t.abs().max(1e-3);
        if !(h > h_min) {
            return Ok(finish(
                samples,
                TrajectoryStatus::StepFailure {
                    t,
                    reason: format!("step size {h:e} underflowed at a = {:e}", y[0]),
                },
            ));
        }

        let Some((y_new, err_vec)) = dopri_step(&rhs, y, k0, h) else {
            // a stage left the physical domain a > 0
            h *= 0.25;
            continue;
        };
        if !(y_new[0] > 0.0) || !y_new[1].is_finite() {
            h *= 0.5;
            continue;
        }

        let err = (0.5
            * ((err_vec[0] / scale(y[0], y_new[0])).powi(2)
                + (err_vec[1] / scale(y[1], y_new[1])).powi(2)))
        .sqrt();
        let fac = if err == 0.0 {
            FAC_MAX
        } else {
            (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
        };
        if err > 1.0 {
            h *= fac.min(1.0);
            continue;
        }

        let t_new = if t_end - (t + h) <= 4.0 * f64::EPSILON * t_end {
            t_end
        } else {
            t + h
        };
        let k_new = rhs(y_new);

        if y_new[0] <= threshold {
            let (lo, hi) = bisect_crossing(ode, t, y, t_new, y_new, threshold, opts.event_tol);
            samples.push(Sample {
                t: t_new,
                a: y_new[0],
                adot: y_new[1],
            });
            return Ok(finish(
                samples,
                TrajectoryStatus::VanishDetected {
                    t_lower: lo,
                    t_upper: hi,
                },
            ));
        }

        t = t_new;
        y = y_new;
        k0 = k_new;
        samples.push(Sample {
            t,
            a: y[0],
            adot: y[1],
        });

        // Concave and decreasing: a stays below its tangent line, so it vanishes
        // before t + a/|ȧ|. Once that horizon is within the event tolerance the
        // bracket is final, even if the threshold itself is not resolvable in t
        // (for ä = λȧ/a² the remaining time scales like a²).
        if y[1] < 0.0 && k0[1] <= 0.0 {
            let horizon = y[0] / -y[1];
            if horizon <= opts.event_tol.max(1e3 * f64::EPSILON * t.max(1.0)) {
                // the threshold doubles as margin for accumulated integration error in a
                let t_upper = t + (y[0] + threshold) / -y[1];
                return Ok(finish(
                    samples,
                    TrajectoryStatus::VanishDetected {
                        t_lower: t,
                        t_upper,
                    },
                ));
            }
        }
        h *= fac;
    }

    Ok(finish(samples, TrajectoryStatus::ReachedTEnd))
}

fn geometric_step_limit(y: [f64; 2], acc: f64, clamp: f64) -> f64 {
    let a = y[0];
    let mut limit = f64::INFINITY;
    if y[1] < 0.0 {
        limit = limit.min(a / -y[1]);
    }
    if acc != 0.0 {
        limit = limit.min((a / acc.abs()).sqrt());
    }
    clamp * limit
}

/// State at `t >= from.t` reached by a single uncontrolled DOPRI5 step from `from`.
pub(crate) fn step_from(ode: &ScalingOde, from: Sample, t: f64) -> Option<(f64, f64)> {
    let h = t - from.t;
    if h == 0.0 {
        return Some((from.a, from.adot));
    }
    let rhs = |y: [f64; 2]| [y[1], ode.acceleration(y[0], y[1])];
    let y = [from.a, from.adot];
    let (y_new, _) = dopri_step(&rhs, y, rhs(y), h)?;
    (y_new[0] > 0.0).then_some((y_new[0], y_new[1]))
}

/// One DOPRI5 step. Returns `None` when a stage state has `a <= 0` or is non-finite.
fn dopri_step(
    rhs: &impl Fn([f64; 2]) -> [f64; 2],
    y: [f64; 2],
    k0: [f64; 2],
    h: f64,
) -> Option<([f64; 2], [f64; 2])> {
    let mut k = [[0.0; 2]; 7];
    k[0] = k0;
    let mut y_stage = y;
    for s in 1..7 {
        for (i, ys) in y_stage.iter_mut().enumerate() {
            *ys = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
        }
        if !(y_stage[0] > 0.0) || !y_stage[1].is_finite() {
            return None;
        }
        k[s] = rhs(y_stage);
    }
    // stage 7 is evaluated at the fifth-order solution (FSAL)
    let y_new = y_stage;
    let mut err = [0.0; 2];
    for (i, e) in err.iter_mut().enumerate() {
        *e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
    }
    Some((y_new, err))
}

fn bisect_crossing(
    ode: &ScalingOde,
    t0: f64,
    y0: [f64; 2],
    t1: f64,
    y1: [f64; 2],
    threshold: f64,
    tol: f64,
) -> (f64, f64) {
    let node = |y: [f64; 2]| (y[0], y[1], ode.acceleration(y[0], y[1]));
    let (n0, n1) = (node(y0), node(y1));
    let (mut lo, mut hi) = (t0, t1);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (a, _, _) = hermite_quintic(t0, t1, n0, n1, mid);
        if a > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
