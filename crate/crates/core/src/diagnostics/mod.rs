//! Mass and centre-density diagnostics.

pub mod quadrature;

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilyParams, SolutionFamily};

/// Which coefficient converts an N-dimensional radial integral into a 1-D one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// Surface measure of the unit sphere, `2π^{N/2}/Γ(N/2)`.
    #[default]
    SurfaceMeasure,
    /// `N(N-2)V(N)` with `V(N)` the unit-ball volume, for `N >= 3`; 1 and 2π below.
    ScaledBallVolume,
}

fn unit_ball_volume(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    PI.powf(h) / libm::tgamma(h + 1.0)
}

/// Coefficient `α(N)`; `α(1) = 1` and `α(2) = 2π` in both modes.
///
/// For `N = 1` the half-line convention is used: the mass is `∫₀^∞ ρ ds`.
pub fn surface_coefficient(n: u32, mode: CoefficientMode) -> Result<f64> {
    match (n, mode) {
        (0, _) => Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        )),
        (1, _) => Ok(1.0),
        (2, _) => Ok(2.0 * PI),
        (_, CoefficientMode::SurfaceMeasure) => {
            let h = 0.5 * n as f64;
            Ok(2.0 * PI.powf(h) / libm::tgamma(h))
        }
        (_, CoefficientMode::ScaledBallVolume) => Ok((n * (n - 2)) as f64 * unit_ball_volume(n)),
    }
}

/// Both coefficient modes side by side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientComparison {
    pub dim: u32,
    pub surface_measure: f64,
    pub scaled_ball_volume: f64,
    /// Agreement to 1e-14 relative.
    pub agree: bool,
}

pub fn compare_coefficients(n: u32) -> Result<CoefficientComparison> {
    let s = surface_coefficient(n, CoefficientMode::SurfaceMeasure)?;
    let b = surface_coefficient(n, CoefficientMode::ScaledBallVolume)?;
    Ok(CoefficientComparison {
        dim: n,
        surface_measure: s,
        scaled_ball_volume: b,
        agree: (s - b).abs() <= 1e-14 * s.abs(),
    })
}

/// Outcome of a total-mass computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MassResult {
    Finite {
        value: f64,
        quad_error: f64,
    },
    Divergent {
        reason: String,
    },
    Truncated {
        value: f64,
        quad_error: f64,
        r_max: f64,
    },
}

impl MassResult {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Finite { value, .. } | Self::Truncated { value, .. } => Some(value),
            Self::Divergent { .. } => None,
        }
    }
}

/// Behaviour of the profile integrand `F(x) x^{N-1}` at large `x`.
enum Tail {
    Divergent(String),
    /// `F(x) x^{N-1} <= c x^p e^{-b x²}`.
    Gaussian {
        c: f64,
        p: f64,
        b: f64,
    },
    /// `F(x) x^{N-1} <= c x^p` with `p < -1`.
    Power {
        c: f64,
        p: f64,
    },
    /// Support ends at `edge`.
    Compact {
        edge: f64,
    },
}

fn tail_of(params: &FamilyParams) -> Tail {
    let n = params.dim() as f64;
    let lambda = params.lambda();
    let alpha = params.alpha();
    let gaussian = |coeff: f64, extra_power: f64| {
        if coeff < 0.0 {
            Tail::Gaussian {
                c: alpha.exp(),
                p: n - 1.0 + extra_power,
                b: -coeff,
            }
        } else {
            Tail::Divergent(format!(
                "lambda = {lambda} >= 0: the profile does not decay"
            ))
        }
    };
    match *params {
        FamilyParams::IsothermalNs { k, .. } | FamilyParams::IsothermalDamped { k, .. } => {
            gaussian(lambda / (2.0 * k), 0.0)
        }
        FamilyParams::SolidCore2d { k, m0, .. } => gaussian(lambda / (2.0 * k), m0),
        FamilyParams::PressurelessTheta1 { dim, kappa, .. } => {
            gaussian(lambda / (2.0 * dim as f64 * kappa), 0.0)
        }
        FamilyParams::PressurelessThetaNe1 {
            dim, kappa, theta, ..
        } => {
            let e = 1.0 / (theta - 1.0);
            if let Some(edge) = params.support_radius() {
                if e > 0.0 {
                    Tail::Compact { edge }
                } else {
                    Tail::Divergent(format!(
                        "theta = {theta} < 1: density is not integrable at the support edge"
                    ))
                }
            } else {
                let coeff = 0.5 * (theta - 1.0) * (-lambda / (dim as f64 * kappa * theta));
                let p = 2.0 * e + n - 1.0;
                if coeff > 0.0 && p < -1.0 {
                    Tail::Power {
                        c: coeff.powf(e),
                        p,
                    }
                } else {
                    Tail::Divergent(format!(
                        "theta = {theta}, lambda = {lambda}: profile decays too slowly"
                    ))
                }
            }
        }
    }
}

/// Upper bound on `∫_R^∞ c x^p e^{-b x²} dx = ½ c b^{-s} Γ(s, bR²)` with `s = (p+1)/2`.
fn gaussian_tail_bound(c: f64, p: f64, b: f64, r: f64) -> f64 {
    let s = 0.5 * (p + 1.0);
    let z = b * r * r;
    // Γ(s, z) <= z^{s-1} e^{-z} · z/(z-(s-1)) for z > s-1 and s >= 1; the factor is 1 for s <= 1
    let factor = if s <= 1.0 {
        1.0
    } else if z > 2.0 * (s - 1.0) {
        z / (z - (s - 1.0))
    } else {
        return f64::INFINITY;
    };
    0.5 * c * b.powf(-s) * z.powf(s - 1.0) * (-z).exp() * factor
}

/// Doubling steps allowed before giving up on the tail.
const MAX_DOUBLINGS: usize = 80;

/// Total mass `α(N) ∫ ρ(t, s) s^{N-1} ds` at time `t`, or the partial mass up to `r_max`.
///
/// Non-decaying profiles are classified `Divergent` without quadrature.
/// The infinite range is covered by doubling intervals until an analytic tail bound drops below `quad_tol·|value|`.
pub fn total_mass(
    family: &SolutionFamily,
    t: f64,
    quad_tol: f64,
    r_max: Option<f64>,
) -> Result<MassResult> {
    total_mass_with(family, t, quad_tol, r_max, CoefficientMode::default())
}

pub fn total_mass_with(
    family: &SolutionFamily,
    t: f64,
    quad_tol: f64,
    r_max: Option<f64>,
    mode: CoefficientMode,
) -> Result<MassResult> {
    if !(quad_tol > 0.0 && quad_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quad_tol must lie in (0, 1), got {quad_tol}"
        )));
    }
    let params = family.params();
    let (a, _) = family.scale_at(t)?;
    let n = params.dim() as i32;
    let coeff = surface_coefficient(params.dim(), mode)?;
    let x_lo = match *params {
        FamilyParams::SolidCore2d { r0, .. } => r0 / a,
        _ => 0.0,
    };
    // the mass in the similarity variable x = r/a; the a^N factors cancel
    let integrand = |x: f64| -> f64 {
        let y = match params.profile_y(x) {
            Ok(Some(y)) => y,
            _ => return 0.0,
        };
        let f = if params.is_exponential() {
            y.exp()
        } else {
            y.max(0.0)
        };
        f * x.powi(n - 1)
    };
    let tail = tail_of(params);

    if let Some(r_max) = r_max {
        let lo_r = x_lo * a;
        if !(r_max >= lo_r) {
            return Err(Error::Domain(format!(
                "r_max = {r_max} lies below the inner radius {lo_r}"
            )));
        }
        let mut hi = r_max / a;
        if let Tail::Compact { edge } = tail {
            hi = hi.min(edge);
        }
        let rough = quadrature::integrate(integrand, x_lo, hi, f64::INFINITY)?
            .0
            .abs();
        let (v, e) = quadrature::integrate(integrand, x_lo, hi, 0.1 * quad_tol * rough)?;
        return Ok(MassResult::Truncated {
            value: coeff * v,
            quad_error: coeff * e,
            r_max,
        });
    }

    let (value, error) = match tail {
        Tail::Divergent(reason) => return Ok(MassResult::Divergent { reason }),
        Tail::Compact { edge } => {
            let rough = quadrature::integrate(integrand, x_lo, edge, f64::INFINITY)?
                .0
                .abs();
            quadrature::integrate(integrand, x_lo, edge, 0.1 * quad_tol * rough)?
        }
        Tail::Gaussian { c, p, b } => doubling(
            integrand,
            x_lo,
            x_lo + (1.0 + p.max(0.0)).sqrt() / b.sqrt(),
            quad_tol,
            |r| gaussian_tail_bound(c, p, b, r),
        )?,
        Tail::Power { c, p } => doubling(integrand, x_lo, x_lo.max(1.0), quad_tol, |r| {
            c * r.powf(p + 1.0) / -(p + 1.0)
        })?,
    };
    Ok(MassResult::Finite {
        value: coeff * value,
        quad_error: coeff * error,
    })
}

/// Integrates over `[lo, first]`, `[first, 2 first]`, ... until `tail(R) <= ½ quad_tol |value|`.
fn doubling(
    f: impl Fn(f64) -> f64 + Copy,
    lo: f64,
    first: f64,
    quad_tol: f64,
    tail: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let rough = quadrature::integrate(f, lo, first, f64::INFINITY)?.0.abs();
    let (mut value, mut error) = quadrature::integrate(f, lo, first, quad_tol * rough / 16.0)?;
    let (mut a, mut b) = (first, 2.0 * first);
    for _ in 0..MAX_DOUBLINGS {
        let bound = tail(a);
        if bound <= 0.5 * quad_tol * value.abs() {
            return Ok((value, error + bound));
        }
        let (v, e) = quadrature::integrate(f, a, b, quad_tol * value.abs() / 16.0)?;
        value += v;
        error += e;
        (a, b) = (b, 2.0 * b);
    }
    Err(Error::Quadrature { achieved: tail(a) })
}

/// `ρ(t, 0)`: `e^α/a^N` or, for θ≠1, `α/a^N`.
pub fn center_density(family: &SolutionFamily, t: f64) -> Result<f64> {
    if matches!(family.params(), FamilyParams::SolidCore2d { .. }) {
        return Err(Error::Domain(
            "the solid-core family has no centre: r <= r0 is excluded".into(),
        ));
    }
    Ok(family.eval_fields(t, 0.0)?.rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateVerdict {
    BoundedBelow,
    Inconclusive,
}

/// One sample of `ρ(t, 0)·(T* - t)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    pub gap: f64,
    pub center_density: f64,
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupRateEstimate {
    /// Midpoint of the vanish bracket.
    pub t_star: f64,
    pub t_lower: f64,
    pub t_upper: f64,
    pub blowup_exponent: f64,
    pub products: Vec<RateSample>,
    pub verdict: RateVerdict,
    /// Verdict with `T*` replaced by each end of the bracket.
    pub verdict_at_lower: RateVerdict,
    pub verdict_at_upper: RateVerdict,
    pub note: Option<String>,
}

/// The closest approach to `T*` is this many bracket widths.
const GAP_FLOOR_WIDTHS: f64 = 1e3;

fn rate_samples(
    family: &SolutionFamily,
    t_star: f64,
    exponent: f64,
    gap_min: f64,
    n_samples: usize,
) -> Result<Vec<RateSample>> {
    let t0 = family.trajectory().t_start();
    let gap0 = t_star - t0;
    let ratio = gap_min / gap0;
    (0..n_samples)
        .map(|k| {
            let gap = gap0 * ratio.powf(k as f64 / (n_samples - 1) as f64);
            let t = if k == 0 { t0 } else { t_star - gap };
            let rho = center_density(family, t)?;
            Ok(RateSample {
                t,
                gap,
                center_density: rho,
                product: rho * gap.powf(exponent),
            })
        })
        .collect()
}

/// `BoundedBelow` when the second half of the products is nondecreasing and the last exceeds the first.
fn verdict_of(samples: &[RateSample]) -> RateVerdict {
    let tail = &samples[samples.len() / 2..];
    let nondecreasing = tail.windows(2).all(|w| w[1].product >= w[0].product);
    let grew = samples.last().map(|s| s.product) > samples.first().map(|s| s.product);
    if nondecreasing && grew {
        RateVerdict::BoundedBelow
    } else {
        RateVerdict::Inconclusive
    }
}

/// Samples `ρ(t, 0)(T* - t)^exponent` at times approaching `T*` geometrically.
///
/// `exponent = N` is accepted as the borderline case. The closest sample stays
/// `10³` bracket widths away from `T*`, so the bracket cannot dominate the gap.
pub fn blowup_rate_estimate(
    family: &SolutionFamily,
    exponent: f64,
    n_samples: usize,
) -> Result<BlowupRateEstimate> {
    let n = family.dim() as f64;
    if !(exponent > 0.0 && exponent <= n) {
        return Err(Error::InvalidParameter(format!(
            "blowup exponent must lie in (0, N = {n}], got {exponent}"
        )));
    }
    if n_samples < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 samples, got {n_samples}"
        )));
    }
    let (t_lower, t_upper) = family.blowup_bracket().ok_or_else(|| {
        Error::Domain("no finite-time vanish detected on the integrated interval".into())
    })?;
    // the centre must be resolvable: the solid core is rejected by center_density
    let t_star = 0.5 * (t_lower + t_upper);
    // fields are defined strictly before the threshold crossing
    let t_cap = family
        .trajectory()
        .valid_until()
        .min(family.trajectory().t_last());
    let gap_min = GAP_FLOOR_WIDTHS * (t_upper - t_cap).max(4.0 * f64::EPSILON * t_upper);
    let t0 = family.trajectory().t_start();
    if gap_min >= t_lower - t0 {
        return Ok(BlowupRateEstimate {
            t_star,
            t_lower,
            t_upper,
            blowup_exponent: exponent,
            products: Vec::new(),
            verdict: RateVerdict::Inconclusive,
            verdict_at_lower: RateVerdict::Inconclusive,
            verdict_at_upper: RateVerdict::Inconclusive,
            note: Some(format!(
                "vanish bracket [{t_lower}, {t_upper}] too wide to resolve the approach"
            )),
        });
    }
    let products = rate_samples(family, t_star, exponent, gap_min, n_samples)?;
    let at_lower = verdict_of(&rate_samples(
        family, t_lower, exponent, gap_min, n_samples,
    )?);
    let at_upper = verdict_of(&rate_samples(
        family, t_upper, exponent, gap_min, n_samples,
    )?);
    let verdict = verdict_of(&products);
    let note = (at_lower != verdict || at_upper != verdict)
        .then(|| "verdict depends on the choice of T* within the bracket".to_string());
    Ok(BlowupRateEstimate {
        t_star,
        t_lower,
        t_upper,
        blowup_exponent: exponent,
        products,
        verdict,
        verdict_at_lower: at_lower,
        verdict_at_upper: at_upper,
        note,
    })
}

/// CSV with header `t,gap,center_density,product`.
pub fn write_products_csv(mut out: impl Write, samples: &[RateSample]) -> std::io::Result<()> {
    writeln!(out, "t,gap,center_density,product")?;
    for s in samples {
        writeln!(out, "{},{},{},{}", s.t, s.gap, s.center_density, s.product)?;
    }
    Ok(())
}
