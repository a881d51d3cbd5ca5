use serde::{Deserialize, Serialize};

use super::{integrate_with, IntegratorOptions, OdeKind, ScalingOde, Trajectory, TrajectoryStatus};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupStatus {
    FiniteTimeVanish,
    GlobalExistenceWitnessed,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub status: BlowupStatus,
    pub t_lower: f64,
    pub t_upper: f64,
    /// `e^{θ/λ}` upper bound on `a(t)`, classic kind with `λ > 0` only.
    pub bound_e_theta_lambda: Option<f64>,
    /// Bisected bracket of the threshold crossing, before any extension to `a = 0`.
    pub crossing: Option<(f64, f64)>,
    pub vanish_threshold: f64,
    pub max_a: f64,
    pub note: Option<String>,
}

/// Bracket the first time `a` vanishes, integrating up to `time_cap`.
pub fn detect_blowup(ode: &ScalingOde, time_cap: f64, tol: f64) -> Result<BlowupReport> {
    detect_blowup_with(ode, time_cap, tol, &blowup_options(ode, tol)).map(|(report, _)| report)
}

/// Tolerances used by [`detect_blowup`]: relative error control all the way
/// down to the vanish threshold.
fn blowup_options(ode: &ScalingOde, tol: f64) -> IntegratorOptions {
    let base = IntegratorOptions::default();
    IntegratorOptions {
        abs_tol: (base.rel_tol * base.vanish_fraction * ode.a0).min(0.5),
        event_tol: 0.25 * tol,
        ..base
    }
}

/// Time past the crossing bracket within which `a` reaches 0, when `a` is concave and decreasing there.
///
/// A concave, decreasing `a` stays below its tangent, which reaches 0 within
/// `(a + threshold)/|ȧ|`; the extra threshold is margin for integration error.
pub(crate) fn tangent_extension(trajectory: &Trajectory) -> Result<Option<f64>> {
    let Some((_, hi)) = trajectory.vanish_bracket() else {
        return Ok(None);
    };
    if hi > trajectory.t_last() {
        // tangent-line bracket from the integrator already covers a = 0
        return Ok(Some(0.0));
    }
    let (a, adot, _) = trajectory.interpolate(hi)?;
    // from the ODE itself: the interpolant's ä carries roundoff of either sign
    let acc = trajectory.ode.acceleration(a, adot);
    Ok((adot < 0.0 && acc <= 0.0).then(|| (a.max(0.0) + trajectory.vanish_threshold) / -adot))
}

pub fn detect_blowup_with(
    ode: &ScalingOde,
    time_cap: f64,
    tol: f64,
    opts: &IntegratorOptions,
) -> Result<(BlowupReport, Trajectory)> {
    if !(tol > 0.0) || !(time_cap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol and time_cap must be positive, got {tol} and {time_cap}"
        )));
    }
    let trajectory = integrate_with(ode, time_cap, opts)?;
    let bound = match (ode.kind, ode.lambda > 0.0) {
        (OdeKind::Classic, true) => Some((ode.theta()? / ode.lambda).exp()),
        _ => None,
    };
    let threshold = trajectory.vanish_threshold;
    let mut report = BlowupReport {
        status: BlowupStatus::Undetermined,
        t_lower: trajectory.t_last(),
        t_upper: trajectory.t_last(),
        bound_e_theta_lambda: bound,
        crossing: None,
        vanish_threshold: threshold,
        max_a: trajectory.max_a(),
        note: None,
    };

    match &trajectory.status {
        TrajectoryStatus::VanishDetected { t_lower, t_upper } => {
            let (lo, hi) = (*t_lower, *t_upper);
            report.crossing = Some((lo, hi));
            report.t_lower = lo;
            report.t_upper = hi;
            match tangent_extension(&trajectory)? {
                Some(ext) if hi + ext - lo <= tol => {
                    report.t_upper = hi + ext;
                    report.status = BlowupStatus::FiniteTimeVanish;
                }
                _ if hi - lo <= tol => {
                    report.status = BlowupStatus::FiniteTimeVanish;
                    report.note = Some(format!(
                        "bracket is for the crossing of a = {threshold:e}; a reaches 0 slightly later"
                    ));
                }
                _ => {
                    report.note = Some(format!(
                        "crossing bracket width {:e} exceeds tolerance",
                        hi - lo
                    ));
                }
            }
        }
        TrajectoryStatus::ReachedTEnd => {
            let last = trajectory
                .samples
                .last()
                .copied()
                .expect("non-empty trajectory");
            // ȧ ≥ 0 alone does not exclude a later turnaround when ä < 0
            let acc = ode.acceleration(last.a, last.adot);
            if last.adot >= 0.0 && acc >= 0.0 && last.a > threshold {
                report.status = BlowupStatus::GlobalExistenceWitnessed;
            } else {
                report.note = Some(format!(
                    "reached time cap with a = {:e}, ȧ = {:e}; vanish not excluded",
                    last.a, last.adot
                ));
            }
        }
        TrajectoryStatus::StepFailure { t, reason } => {
            report.note = Some(format!("integration failed at t = {t}: {reason}"));
        }
    }
    Ok((report, trajectory))
}
