//! Emden-type ODEs for the scale factor `a(t)` of the self-similar ansatz.
//!
//! Each kind is integrated as the first-order system `(a, ȧ)`:
//!
//! | kind                  | equation                 |
//! |-----------------------|--------------------------|
//! | `Classic`             | `ä = -λ/a`               |
//! | `Damped`              | `ä + βȧ = -λ/a`          |
//! | `PressurelessTheta1`  | `ä = λȧ/a²`              |
//! | `GeneralDamped`       | `ä + βȧ = -λȧ/a^S`       |

mod blowup;
mod dense;
mod dopri;
mod trajectory;

pub(crate) use blowup::tangent_extension;
pub use blowup::{detect_blowup, detect_blowup_with, BlowupReport, BlowupStatus};
pub use dense::hermite_quintic;
pub use dopri::{integrate, integrate_with, IntegratorOptions};
pub use trajectory::{Sample, Trajectory, TrajectoryStatus};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeKind {
    Classic,
    Damped,
    PressurelessTheta1,
    GeneralDamped,
}

/// One scale-factor ODE together with its initial data `a(0) = a0`, `ȧ(0) = a1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingOde {
    pub kind: OdeKind,
    pub lambda: f64,
    #[serde(default)]
    pub beta: f64,
    /// Exponent `S`, only read by [`OdeKind::GeneralDamped`].
    #[serde(default)]
    pub s_exponent: f64,
    pub a0: f64,
    pub a1: f64,
}

impl ScalingOde {
    pub fn classic(lambda: f64, a0: f64, a1: f64) -> Result<Self> {
        Self::build(OdeKind::Classic, lambda, 0.0, 0.0, a0, a1)
    }

    pub fn damped(lambda: f64, beta: f64, a0: f64, a1: f64) -> Result<Self> {
        Self::build(OdeKind::Damped, lambda, beta, 0.0, a0, a1)
    }

    pub fn pressureless_theta1(lambda: f64, a0: f64, a1: f64) -> Result<Self> {
        Self::build(OdeKind::PressurelessTheta1, lambda, 0.0, 0.0, a0, a1)
    }

    pub fn general_damped(
        lambda: f64,
        beta: f64,
        s_exponent: f64,
        a0: f64,
        a1: f64,
    ) -> Result<Self> {
        Self::build(OdeKind::GeneralDamped, lambda, beta, s_exponent, a0, a1)
    }

    fn build(
        kind: OdeKind,
        lambda: f64,
        beta: f64,
        s_exponent: f64,
        a0: f64,
        a1: f64,
    ) -> Result<Self> {
        let ode = Self {
            kind,
            lambda,
            beta,
            s_exponent,
            a0,
            a1,
        };
        ode.validate()?;
        Ok(ode)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.beta, self.s_exponent, self.a0, self.a1]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "ODE parameters must be finite".into(),
            ));
        }
        if self.a0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "a0 must be positive, got {}",
                self.a0
            )));
        }
        if self.beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        if matches!(self.kind, OdeKind::Classic | OdeKind::PressurelessTheta1) && self.beta != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be 0 for {:?}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Right-hand side `ä(a, ȧ)`.
    #[inline]
    pub fn acceleration(&self, a: f64, adot: f64) -> f64 {
        match self.kind {
            OdeKind::Classic => -self.lambda / a,
            OdeKind::Damped => -self.beta * adot - self.lambda / a,
            OdeKind::PressurelessTheta1 => self.lambda * adot / (a * a),
            OdeKind::GeneralDamped => {
                -self.beta * adot - self.lambda * adot / a.powf(self.s_exponent)
            }
        }
    }

    /// `½ȧ² + λ ln a`, conserved by the classic kind.
    pub fn energy_integral(&self, a: f64, adot: f64) -> Result<f64> {
        if self.kind != OdeKind::Classic {
            return Err(Error::InvalidParameter(format!(
                "energy integral is defined for the classic kind only, got {:?}",
                self.kind
            )));
        }
        if a <= 0.0 {
            return Err(Error::Domain(format!(
                "energy integral needs a > 0, got {a}"
            )));
        }
        Ok(0.5 * adot * adot + self.lambda * a.ln())
    }

    /// Energy level `θ = λ ln a0 + ½a1²` of the initial state.
    pub fn theta(&self) -> Result<f64> {
        self.energy_integral(self.a0, self.a1)
    }

    /// `ȧ + λ/a`, conserved by the `ä = λȧ/a²` kind.
    ///
    /// Differentiating gives `ä - λȧ/a² = 0`, so along a trajectory this stays
    /// at `a1 + λ/a0`, i.e. `ȧ = -λ/a + λ/a0 + a1`.
    pub fn pressureless_first_integral(&self, a: f64, adot: f64) -> Result<f64> {
        if self.kind != OdeKind::PressurelessTheta1 {
            return Err(Error::InvalidParameter(format!(
                "first integral is defined for the pressureless θ=1 kind only, got {:?}",
                self.kind
            )));
        }
        if a <= 0.0 {
            return Err(Error::Domain(format!(
                "first integral needs a > 0, got {a}"
            )));
        }
        Ok(adot + self.lambda / a)
    }
}
