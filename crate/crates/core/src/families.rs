//! Closed-form self-similar families `ρ = F(r/a(t))/a(t)^N`, `u = (ȧ/a) r`.
//!
//! Every family is bound to the scale-factor ODE that makes its momentum
//! equation vanish, and carries the integrated [`Trajectory`] of that ODE so
//! that `(a, ȧ)` are read from one consistent continuous extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate_with, IntegratorOptions, ScalingOde, Trajectory};

/// Parameters of one family. Serialized with a `variant` tag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyParams {
    /// Isothermal Navier–Stokes, `ä = -λ/a`, `y = λx²/(2K) + α`.
    IsothermalNs {
        dim: u32,
        k: f64,
        #[serde(default)]
        nu: f64,
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    },
    /// Isothermal with frictional damping `βρu`, `ä + βȧ = -λ/a`.
    IsothermalDamped {
        dim: u32,
        k: f64,
        #[serde(default)]
        nu: f64,
        beta: f64,
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    },
    /// Two-dimensional flow around a solid core on `[0, r0]`,
    /// `y = λx²/(2K) + M0 ln x + α`.
    SolidCore2d {
        k: f64,
        #[serde(default)]
        nu: f64,
        #[serde(default)]
        beta: f64,
        m0: f64,
        r0: f64,
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    },
    /// Pressureless, viscosity `κρ`, `ä = λȧ/a²`, `y = λx²/(2Nκ) + α`.
    PressurelessTheta1 {
        dim: u32,
        kappa: f64,
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    },
    /// Pressureless, viscosity `κρ^θ` with `θ ≠ 1`, `ä + βȧ = -λȧ/a^{Nθ-N+2}`,
    /// `ρ = y(r/a)/a^N` on the support of `y`.
    PressurelessThetaNe1 {
        dim: u32,
        kappa: f64,
        theta: f64,
        #[serde(default)]
        beta: f64,
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    },
}

impl FamilyParams {
    pub fn dim(&self) -> u32 {
        match *self {
            Self::IsothermalNs { dim, .. }
            | Self::IsothermalDamped { dim, .. }
            | Self::PressurelessTheta1 { dim, .. }
            | Self::PressurelessThetaNe1 { dim, .. } => dim,
            Self::SolidCore2d { .. } => 2,
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Self::IsothermalNs { alpha, .. }
            | Self::IsothermalDamped { alpha, .. }
            | Self::SolidCore2d { alpha, .. }
            | Self::PressurelessTheta1 { alpha, .. }
            | Self::PressurelessThetaNe1 { alpha, .. } => alpha,
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Self::IsothermalNs { lambda, .. }
            | Self::IsothermalDamped { lambda, .. }
            | Self::SolidCore2d { lambda, .. }
            | Self::PressurelessTheta1 { lambda, .. }
            | Self::PressurelessThetaNe1 { lambda, .. } => lambda,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::IsothermalNs { .. } => "isothermal_ns",
            Self::IsothermalDamped { .. } => "isothermal_damped",
            Self::SolidCore2d { .. } => "solid_core_2d",
            Self::PressurelessTheta1 { .. } => "pressureless_theta1",
            Self::PressurelessThetaNe1 { .. } => "pressureless_theta_ne1",
        }
    }

    /// True for the variants whose density is `e^y/a^N`.
    pub fn is_exponential(&self) -> bool {
        !matches!(self, Self::PressurelessThetaNe1 { .. })
    }

    /// The scale-factor ODE this family is paired with.
    pub fn ode(&self) -> Result<ScalingOde> {
        match *self {
            Self::IsothermalNs { lambda, a0, a1, .. } => ScalingOde::classic(lambda, a0, a1),
            Self::IsothermalDamped {
                lambda,
                beta,
                a0,
                a1,
                ..
            }
            | Self::SolidCore2d {
                lambda,
                beta,
                a0,
                a1,
                ..
            } => ScalingOde::damped(lambda, beta, a0, a1),
            Self::PressurelessTheta1 { lambda, a0, a1, .. } => {
                ScalingOde::pressureless_theta1(lambda, a0, a1)
            }
            Self::PressurelessThetaNe1 {
                dim,
                theta,
                beta,
                lambda,
                a0,
                a1,
                ..
            } => {
                let n = dim as f64;
                ScalingOde::general_damped(lambda, beta, n * theta - n + 2.0, a0, a1)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                bad(format!("{name} must be positive, got {v}"))
            }
        };
        let non_negative = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                bad(format!("{name} must be non-negative, got {v}"))
            }
        };
        if self.dim() < 1 {
            return bad("dim must be at least 1".into());
        }
        if !self.alpha().is_finite() || !self.lambda().is_finite() {
            return bad("alpha and lambda must be finite".into());
        }
        match *self {
            Self::IsothermalNs { k, nu, .. } => {
                positive("k", k)?;
                non_negative("nu", nu)?;
            }
            Self::IsothermalDamped { k, nu, beta, .. } => {
                positive("k", k)?;
                non_negative("nu", nu)?;
                non_negative("beta", beta)?;
            }
            Self::SolidCore2d {
                k,
                nu,
                beta,
                m0,
                r0,
                lambda,
                alpha,
                ..
            } => {
                positive("k", k)?;
                non_negative("nu", nu)?;
                non_negative("beta", beta)?;
                positive("m0", m0)?;
                positive("r0", r0)?;
                if alpha <= -lambda / (2.0 * k) {
                    return bad(format!(
                        "solid core needs alpha > -lambda/(2K) = {}",
                        -lambda / (2.0 * k)
                    ));
                }
            }
            Self::PressurelessTheta1 { kappa, .. } => positive("kappa", kappa)?,
            Self::PressurelessThetaNe1 {
                kappa,
                theta,
                beta,
                alpha,
                ..
            } => {
                positive("kappa", kappa)?;
                positive("theta", theta)?;
                non_negative("beta", beta)?;
                positive("alpha", alpha)?;
                if theta == 1.0 {
                    return bad("theta must differ from 1 for the θ≠1 family".into());
                }
            }
        }
        self.ode()?;
        Ok(())
    }

    /// Profile `y(x)`; `Ok(None)` outside the support of a θ≠1 profile.
    pub fn profile_y(&self, x: f64) -> Result<Option<f64>> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("profile needs x >= 0, got {x}")));
        }
        let y = match *self {
            Self::IsothermalNs {
                k, lambda, alpha, ..
            }
            | Self::IsothermalDamped {
                k, lambda, alpha, ..
            } => lambda / (2.0 * k) * x * x + alpha,
            Self::SolidCore2d {
                k,
                m0,
                lambda,
                alpha,
                ..
            } => {
                if x <= 0.0 {
                    return Err(Error::Domain(format!(
                        "solid-core profile needs x > 0, got {x}"
                    )));
                }
                lambda / (2.0 * k) * x * x + m0 * x.ln() + alpha
            }
            Self::PressurelessTheta1 {
                dim,
                kappa,
                lambda,
                alpha,
                ..
            } => lambda / (2.0 * dim as f64 * kappa) * x * x + alpha,
            Self::PressurelessThetaNe1 {
                dim,
                kappa,
                theta,
                lambda,
                alpha,
                ..
            } => {
                let xi = -lambda / (dim as f64 * kappa * theta);
                return Ok(separable_profile(theta - 2.0, xi, alpha, x));
            }
        };
        Ok(Some(y))
    }

    /// Edge of the compact support in the similarity variable `x`, if any.
    pub fn support_radius(&self) -> Option<f64> {
        let Self::PressurelessThetaNe1 {
            dim,
            kappa,
            theta,
            lambda,
            alpha,
            ..
        } = *self
        else {
            return None;
        };
        let coeff = 0.5 * (theta - 1.0) * (-lambda / (dim as f64 * kappa * theta));
        (coeff < 0.0).then(|| (alpha.powf(theta - 1.0) / -coeff).sqrt())
    }
}

/// Closed-form solution of `y' y^n = ξ x` with `y(0) = α > 0`:
/// `y = [½(n+1)ξx² + α^{n+1}]^{1/(n+1)}`.
///
/// `None` where the radicand is not positive (real positive branch only) or `n = -1`.
pub fn separable_profile(n: f64, xi: f64, alpha: f64, x: f64) -> Option<f64> {
    let m = n + 1.0;
    if m == 0.0 {
        return None;
    }
    // exact at the centre; the power/root round trip costs an ulp
    if x == 0.0 && alpha > 0.0 {
        return Some(alpha);
    }
    let radicand = 0.5 * m * xi * x * x + alpha.powf(m);
    (radicand > 0.0).then(|| radicand.powf(1.0 / m))
}

/// Density and velocity at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub t: f64,
    pub r: f64,
    pub rho: f64,
    pub u: f64,
    /// False where a θ≠1 profile is cut off and `rho` is set to zero.
    pub in_support: bool,
}

/// A family with its integrated scale factor.
#[derive(Clone, Debug)]
pub struct SolutionFamily {
    params: FamilyParams,
    trajectory: Trajectory,
}

impl SolutionFamily {
    /// Integrator settings for family trajectories.
    pub fn default_integrator(a0: f64) -> IntegratorOptions {
        let base = IntegratorOptions::default();
        IntegratorOptions {
            abs_tol: (base.rel_tol * base.vanish_fraction * a0).min(0.5),
            ..base
        }
    }

    /// Build the family and integrate its ODE on `[0, horizon]`.
    ///
    /// Integration stops early at a detected vanish of `a`, or with a
    /// `StepFailure` status when the step size underflows (stiff approach to
    /// an equilibrium, or `a → ∞` in finite time). The family is then defined
    /// only up to the last sample.
    pub fn new(params: FamilyParams, horizon: f64) -> Result<Self> {
        let a0 = params.ode().map(|o| o.a0).unwrap_or(1.0);
        Self::with_integrator(params, horizon, &Self::default_integrator(a0))
    }

    pub fn with_integrator(
        params: FamilyParams,
        horizon: f64,
        opts: &IntegratorOptions,
    ) -> Result<Self> {
        params.validate()?;
        let ode = params.ode()?;
        let trajectory = integrate_with(&ode, horizon, opts)?;
        Ok(Self { params, trajectory })
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn dim(&self) -> u32 {
        self.params.dim()
    }

    pub fn ode(&self) -> &ScalingOde {
        &self.trajectory.ode
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn vanish_bracket(&self) -> Option<(f64, f64)> {
        self.trajectory.vanish_bracket()
    }

    /// Bracket on the time at which `a` reaches 0: the threshold-crossing
    /// bracket, widened by the tangent-line bound when `a` is concave there.
    pub fn blowup_bracket(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self.trajectory.vanish_bracket()?;
        let ext = crate::ode::tangent_extension(&self.trajectory)
            .ok()
            .flatten()
            .unwrap_or(0.0);
        Some((lo, hi + ext))
    }

    /// `(a(t), ȧ(t))` from the continuous extension.
    pub fn scale_at(&self, t: f64) -> Result<(f64, f64)> {
        let (a, adot, _) = self.trajectory.state_at(t)?;
        Ok((a, adot))
    }

    pub fn profile_y(&self, x: f64) -> Result<Option<f64>> {
        self.params.profile_y(x)
    }

    pub fn eval_fields(&self, t: f64, r: f64) -> Result<FieldSample> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("r must be non-negative, got {r}")));
        }
        if let FamilyParams::SolidCore2d { r0, .. } = self.params {
            if r <= r0 {
                return Err(Error::Domain(format!(
                    "r = {r} lies inside the solid core r <= {r0}"
                )));
            }
        }
        let (a, adot) = self.scale_at(t)?;
        let n = self.dim() as i32;
        let x = r / a;
        let u = adot / a * r;
        let (rho, in_support) = match self.params.profile_y(x)? {
            Some(y) if self.params.is_exponential() => (y.exp() / a.powi(n), true),
            Some(y) => (y.max(0.0) / a.powi(n), true),
            None => (0.0, false),
        };
        Ok(FieldSample {
            t,
            r,
            rho,
            u,
            in_support,
        })
    }

    /// `|u(t, c·r) - c·u(t, r)| <= 1e-12 (1 + |u(t, r)|)`.
    pub fn velocity_is_linear_check(&self, t: f64, r: f64, c: f64) -> Result<bool> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor c must be positive, got {c}"
            )));
        }
        let base = self.eval_fields(t, r)?.u;
        let scaled = self.eval_fields(t, c * r)?.u;
        Ok((scaled - c * base).abs() <= 1e-12 * (1.0 + base.abs()))
    }
}
