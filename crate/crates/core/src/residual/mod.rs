//! Finite-difference residuals of the radial mass and momentum equations.
//!
//! Operators only see a [`FieldSampler`], a map `(t, r) -> (ρ, u)`. Spatial
//! derivatives use 5-point central differences; the time derivative uses a
//! 2-point or 5-point central difference depending on [`StencilOrder`].

pub mod controls;
mod sweep;

pub use sweep::{
    family_residual_nodes, residual_nodes, residual_sweep, residual_sweep_sampler, write_nodes_csv,
    Grid, NodeResidual, ResidualReport, StepScale, System,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::SolutionFamily;

/// Source of `(ρ, u)` values.
pub trait FieldSampler {
    fn sample(&self, t: f64, r: f64) -> Result<(f64, f64)>;
}

impl<F> FieldSampler for F
where
    F: Fn(f64, f64) -> Result<(f64, f64)>,
{
    fn sample(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        self(t, r)
    }
}

impl FieldSampler for SolutionFamily {
    fn sample(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let s = self.eval_fields(t, r)?;
        Ok((s.rho, s.u))
    }
}

/// Accuracy of the time derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilOrder {
    /// `(f(t+h) - f(t-h)) / 2h`.
    Second,
    /// 5-point central difference.
    #[default]
    Fourth,
}

/// Finite-difference steps for one residual evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Steps {
    pub h_t: f64,
    pub h_r: f64,
    /// Step for the second `r`-derivative, capped at `r/4` at each point.
    /// Sampled values carry relative noise near machine epsilon, which a second
    /// difference amplifies by `1/h²`.
    pub h_rr: f64,
    pub order: StencilOrder,
}

impl Steps {
    /// Steps with `h_rr = h_r`.
    pub fn new(h_t: f64, h_r: f64, order: StencilOrder) -> Self {
        Self {
            h_t,
            h_r,
            h_rr: h_r,
            order,
        }
    }

    pub fn with_h_rr(self, h_rr: f64) -> Self {
        Self { h_rr, ..self }
    }

    /// 2-point time difference.
    pub fn second(h_t: f64, h_r: f64) -> Self {
        Self::new(h_t, h_r, StencilOrder::Second)
    }

    pub fn fourth(h_t: f64, h_r: f64) -> Self {
        Self::new(h_t, h_r, StencilOrder::Fourth)
    }

    fn validate(&self, r: f64) -> Result<()> {
        if !(self.h_t > 0.0 && self.h_r > 0.0 && self.h_rr > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference steps must be positive, got h_t = {}, h_r = {}, h_rr = {}",
                self.h_t, self.h_r, self.h_rr
            )));
        }
        if !(r - 2.0 * self.h_r > 0.0) {
            return Err(Error::Domain(format!(
                "stencil at r = {r} with h_r = {} reaches r <= 0",
                self.h_r
            )));
        }
        Ok(())
    }
}

fn d1_5(f: [f64; 5], h: f64) -> f64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
}

fn d2_5(f: [f64; 5], h: f64) -> f64 {
    (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)
}

/// Sampled values around one point.
struct Stencil {
    r: f64,
    /// `(ρ, u)` at `r - 2h .. r + 2h`, fixed `t`.
    radial: [(f64, f64); 5],
    rho_t: f64,
    u_t: f64,
    u_rr: f64,
    h_r: f64,
}

impl Stencil {
    fn gather(sampler: &impl FieldSampler, t: f64, r: f64, steps: &Steps) -> Result<Self> {
        steps.validate(r)?;
        let mut radial = [(0.0, 0.0); 5];
        for (i, slot) in radial.iter_mut().enumerate() {
            *slot = sampler.sample(t, r + (i as f64 - 2.0) * steps.h_r)?;
        }
        let h2 = steps.h_rr.min(0.25 * r).max(steps.h_r);
        let u_rr = if h2 == steps.h_r {
            d2_5(radial.map(|(_, u)| u), h2)
        } else {
            let mut u = [radial[2].1; 5];
            for i in [0, 1, 3, 4] {
                u[i] = sampler.sample(t, r + (i as f64 - 2.0) * h2)?.1;
            }
            d2_5(u, h2)
        };
        let h = steps.h_t;
        let (rho_t, u_t) = match steps.order {
            StencilOrder::Second => {
                let (rp, up) = sampler.sample(t + h, r)?;
                let (rm, um) = sampler.sample(t - h, r)?;
                ((rp - rm) / (2.0 * h), (up - um) / (2.0 * h))
            }
            StencilOrder::Fourth => {
                let mut rho = [0.0; 5];
                let mut u = [0.0; 5];
                for i in 0..5 {
                    if i == 2 {
                        (rho[i], u[i]) = radial[2];
                    } else {
                        (rho[i], u[i]) = sampler.sample(t + (i as f64 - 2.0) * h, r)?;
                    }
                }
                (d1_5(rho, h), d1_5(u, h))
            }
        };
        Ok(Self {
            r,
            radial,
            rho_t,
            u_t,
            u_rr,
            h_r: steps.h_r,
        })
    }

    fn rho(&self) -> f64 {
        self.radial[2].0
    }

    fn u(&self) -> f64 {
        self.radial[2].1
    }

    fn rho_values(&self) -> [f64; 5] {
        self.radial.map(|(rho, _)| rho)
    }

    fn u_values(&self) -> [f64; 5] {
        self.radial.map(|(_, u)| u)
    }

    fn rho_r(&self) -> f64 {
        d1_5(self.rho_values(), self.h_r)
    }

    fn u_r(&self) -> f64 {
        d1_5(self.u_values(), self.h_r)
    }

    /// `u_rr + (N-1)/r u_r - (N-1)/r² u`.
    fn viscous(&self, n: u32) -> f64 {
        let m = n as f64 - 1.0;
        self.u_rr + m / self.r * self.u_r() - m / (self.r * self.r) * self.u()
    }

    /// `ρ(u_t + u u_r)`.
    fn inertia(&self) -> f64 {
        self.rho() * (self.u_t + self.u() * self.u_r())
    }
}

/// Individual terms of a residual; the residual is their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Terms(pub Vec<(&'static str, f64)>);

impl Terms {
    pub fn residual(&self) -> f64 {
        self.0.iter().map(|(_, v)| v).sum()
    }

    /// Residual with the term `name` multiplied by `factor`.
    pub fn residual_scaled(&self, name: &str, factor: f64) -> f64 {
        self.0
            .iter()
            .map(|&(n, v)| if n == name { factor * v } else { v })
            .sum()
    }
}

fn check_dim(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Terms of `ρ_t + uρ_r + ρu_r + (N-1)/r ρu`.
pub fn mass_terms(
    sampler: &impl FieldSampler,
    n: u32,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<Terms> {
    check_dim(n)?;
    let s = Stencil::gather(sampler, t, r, steps)?;
    let (rho, u) = (s.rho(), s.u());
    Ok(Terms(vec![
        ("rho_t", s.rho_t),
        ("u_rho_r", u * s.rho_r()),
        ("rho_u_r", rho * s.u_r()),
        ("geometric", (n as f64 - 1.0) / r * rho * u),
    ]))
}

pub fn mass_residual(
    sampler: &impl FieldSampler,
    n: u32,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<f64> {
    mass_terms(sampler, n, t, r, steps).map(|terms| terms.residual())
}

/// Terms of `ρ(u_t + uu_r) + Kρ_r + βρu - ν(u_rr + (N-1)/r u_r - (N-1)/r² u)`.
#[allow(clippy::too_many_arguments)]
pub fn momentum_terms_isothermal(
    sampler: &impl FieldSampler,
    n: u32,
    k: f64,
    nu: f64,
    beta: f64,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<Terms> {
    check_dim(n)?;
    let s = Stencil::gather(sampler, t, r, steps)?;
    Ok(Terms(vec![
        ("inertia", s.inertia()),
        ("pressure", k * s.rho_r()),
        ("damping", beta * s.rho() * s.u()),
        ("viscous", -nu * s.viscous(n)),
    ]))
}

#[allow(clippy::too_many_arguments)]
pub fn momentum_residual_isothermal(
    sampler: &impl FieldSampler,
    n: u32,
    k: f64,
    nu: f64,
    beta: f64,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<f64> {
    momentum_terms_isothermal(sampler, n, k, nu, beta, t, r, steps).map(|terms| terms.residual())
}

/// Terms of `ρ(u_t + uu_r) + βρu - (κρ^θ)_r((N-1)/r u + u_r) - κρ^θ(u_rr + (N-1)/r u_r - (N-1)/r² u)`.
///
/// `(κρ^θ)_r` is differenced on the composite `κρ^θ`. Fails with
/// [`Error::SupportBoundary`] when the radial stencil mixes `ρ = 0` and `ρ > 0`.
#[allow(clippy::too_many_arguments)]
pub fn momentum_terms_pressureless(
    sampler: &impl FieldSampler,
    n: u32,
    kappa: f64,
    theta: f64,
    beta: f64,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<Terms> {
    check_dim(n)?;
    let s = Stencil::gather(sampler, t, r, steps)?;
    let rho = s.rho_values();
    let vacuum = rho.iter().filter(|&&v| v == 0.0).count();
    if vacuum == 5 {
        return Ok(Terms(vec![("vacuum", 0.0)]));
    }
    if vacuum > 0 {
        return Err(Error::SupportBoundary { t, r });
    }
    let mu = rho.map(|v| kappa * v.powf(theta));
    let mu_r = d1_5(mu, s.h_r);
    let m = n as f64 - 1.0;
    Ok(Terms(vec![
        ("inertia", s.inertia()),
        ("damping", beta * s.rho() * s.u()),
        ("viscosity_gradient", -mu_r * (m / r * s.u() + s.u_r())),
        ("viscous", -mu[2] * s.viscous(n)),
    ]))
}

#[allow(clippy::too_many_arguments)]
pub fn momentum_residual_pressureless(
    sampler: &impl FieldSampler,
    n: u32,
    kappa: f64,
    theta: f64,
    beta: f64,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<f64> {
    momentum_terms_pressureless(sampler, n, kappa, theta, beta, t, r, steps)
        .map(|terms| terms.residual())
}

/// Form of the solid-core source term on the right of the momentum equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreSource {
    /// `M0/r`.
    Bare,
    /// `ρ M0/r`.
    DensityWeighted,
    /// `K ρ M0/r`, the form the logarithmic profile satisfies for every `K`.
    #[default]
    PressureWeighted,
}

impl CoreSource {
    fn value(self, k: f64, rho: f64, m0: f64, r: f64) -> f64 {
        match self {
            Self::Bare => m0 / r,
            Self::DensityWeighted => rho * m0 / r,
            Self::PressureWeighted => k * rho * m0 / r,
        }
    }
}

/// Terms of `ρ(u_t + uu_r) + Kρ_r + βρu - source - ν(u_rr + u_r/r - u/r²)`, `N = 2`.
#[allow(clippy::too_many_arguments)]
pub fn momentum_terms_solid_core(
    sampler: &impl FieldSampler,
    k: f64,
    nu: f64,
    beta: f64,
    m0: f64,
    source: CoreSource,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<Terms> {
    let s = Stencil::gather(sampler, t, r, steps)?;
    Ok(Terms(vec![
        ("inertia", s.inertia()),
        ("pressure", k * s.rho_r()),
        ("damping", beta * s.rho() * s.u()),
        ("source", -source.value(k, s.rho(), m0, r)),
        ("viscous", -nu * s.viscous(2)),
    ]))
}

#[allow(clippy::too_many_arguments)]
pub fn momentum_residual_solid_core(
    sampler: &impl FieldSampler,
    k: f64,
    nu: f64,
    beta: f64,
    m0: f64,
    source: CoreSource,
    t: f64,
    r: f64,
    steps: &Steps,
) -> Result<f64> {
    momentum_terms_solid_core(sampler, k, nu, beta, m0, source, t, r, steps)
        .map(|terms| terms.residual())
}

/// `u_rr + (N-1)/r u_r - (N-1)/r² u` by 5-point differences of `u`.
pub fn viscous_operator(u: impl Fn(f64) -> f64, n: u32, r: f64, h_r: f64) -> f64 {
    let f = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|i| u(r + i * h_r));
    let m = n as f64 - 1.0;
    d2_5(f, h_r) + m / r * d1_5(f, h_r) - m / (r * r) * f[2]
}
