use serde::{Deserialize, Serialize};

use super::dopri::step_from;
use super::{hermite_quintic, ScalingOde};
use crate::error::{Error, Result};

/// One accepted integrator step endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub a: f64,
    pub adot: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    ReachedTEnd,
    /// `a` crossed the vanish threshold somewhere in `(t_lower, t_upper]`, or,
    /// when `t_upper` lies past the last sample, `a` is concave and decreasing
    /// at `t_lower` and its tangent line reaches zero before `t_upper`.
    VanishDetected {
        t_lower: f64,
        t_upper: f64,
    },
    StepFailure {
        t: f64,
        reason: String,
    },
}

/// Time-ordered integration output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub ode: ScalingOde,
    pub samples: Vec<Sample>,
    pub status: TrajectoryStatus,
    pub vanish_threshold: f64,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    /// Last time at which the continuous extension may be queried.
    pub fn t_last(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn vanish_bracket(&self) -> Option<(f64, f64)> {
        match self.status {
            TrajectoryStatus::VanishDetected { t_lower, t_upper } => Some((t_lower, t_upper)),
            _ => None,
        }
    }

    /// Upper end of the interval on which the solution is known and `a` is above threshold.
    pub fn valid_until(&self) -> f64 {
        self.vanish_bracket().map_or(self.t_last(), |(lo, _)| lo)
    }

    /// `(a, ȧ, ä)` at time `t`.
    ///
    /// Computed by one DOPRI5 step from the last sample at or before `t`, so
    /// that `(a, ȧ)` satisfy the ODE to the integrator's local accuracy at
    /// every `t`, not only at samples; finite differences of the result in
    /// `t` therefore reproduce `ȧ` and `ä`. The extension agrees with the
    /// samples at the sample times.
    pub fn state_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        if let Some((t_lower, t_upper)) = self.vanish_bracket() {
            if t >= t_lower {
                return Err(Error::AfterBlowup {
                    t,
                    t_lower,
                    t_upper,
                });
            }
        }
        let (t0, t1) = (self.t_start(), self.t_last());
        if !(t >= t0 && t <= t1) {
            return Err(Error::OutOfRange {
                t,
                t_start: t0,
                t_end: t1,
            });
        }
        let left = self.samples[self.samples.partition_point(|s| s.t <= t) - 1];
        match step_from(&self.ode, left, t) {
            Some((a, adot)) => Ok((a, adot, self.ode.acceleration(a, adot))),
            None => self.interpolate(t),
        }
    }

    /// Quintic Hermite interpolant through `(a, ȧ, ä)` at the samples; admits
    /// times inside the final crossing step.
    pub(crate) fn interpolate(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (t0, t1) = (self.t_start(), self.t_last());
        if !(t >= t0 && t <= t1) {
            return Err(Error::OutOfRange {
                t,
                t_start: t0,
                t_end: t1,
            });
        }
        let n = self.samples.len();
        if n == 1 {
            let s = self.samples[0];
            return Ok((s.a, s.adot, self.ode.acceleration(s.a, s.adot)));
        }
        // index of the first sample with time > t, clamped to a valid interval
        let hi = self.samples.partition_point(|s| s.t <= t).clamp(1, n - 1);
        let (l, r) = (self.samples[hi - 1], self.samples[hi]);
        let node = |s: Sample| (s.a, s.adot, self.ode.acceleration(s.a, s.adot));
        Ok(hermite_quintic(l.t, r.t, node(l), node(r), t))
    }

    pub fn max_a(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.a)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
