use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    mass_residual, momentum_residual_isothermal, momentum_residual_pressureless,
    momentum_residual_solid_core, CoreSource, FieldSampler, StencilOrder, Steps,
};
use crate::error::{Error, Result};
use crate::families::{FamilyParams, SolutionFamily};
use crate::ode::TrajectoryStatus;

/// Tensor grid of evaluation points with stencil steps independent of spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub fd_step_t: f64,
    pub fd_step_r: f64,
    /// Step for second `r`-derivatives; defaults to `100 · fd_step_r`.
    #[serde(default)]
    pub fd_step_rr: Option<f64>,
    #[serde(default)]
    pub order: StencilOrder,
    #[serde(default)]
    pub step_scale: StepScale,
}

/// How the nominal time step is applied at a node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepScale {
    /// `h_t` as given.
    Fixed,
    /// `h_t · min(1, a/|ȧ|)` and `h_r · min(1, a)`, following the local time
    /// and length scales of the solution as `a` shrinks.
    /// Needs a family; samplers without one fall back to `Fixed`.
    #[default]
    ScaleFactor,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + i as f64 * step })
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_t < 2 || self.n_r < 2 {
            return bad(format!(
                "grid needs n_t, n_r >= 2, got {} x {}",
                self.n_t, self.n_r
            ));
        }
        if !(self.fd_step_t > 0.0
            && self.fd_step_r > 0.0
            && self.fd_step_rr.is_none_or(|h| h > 0.0))
        {
            return bad("finite-difference steps must be positive".into());
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return bad(format!(
                "need t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            ));
        }
        if !(self.r_min > 0.0 && self.r_max.is_finite() && self.r_min < self.r_max) {
            return bad(format!(
                "need 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> Steps {
        Steps::new(self.fd_step_t, self.fd_step_r, self.order)
            .with_h_rr(self.fd_step_rr.unwrap_or(100.0 * self.fd_step_r))
    }

    /// Node coordinates, `t` outer and `r` inner.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        linspace(self.t_min, self.t_max, self.n_t)
            .flat_map(move |t| linspace(self.r_min, self.r_max, self.n_r).map(move |r| (t, r)))
    }

    /// Reach of the time stencil beyond a node.
    fn t_reach(&self) -> f64 {
        match self.order {
            StencilOrder::Second => self.fd_step_t,
            StencilOrder::Fourth => 2.0 * self.fd_step_t,
        }
    }

    /// A grid inside the family's well-resolved domain.
    ///
    /// Times stop at `0.9` of the vanish lower bracket or of a step failure
    /// time, else at the integrated horizon. Radii keep the density within a
    /// factor `e²` of its central value at the smallest `a` on the window and
    /// stay inside 90% of a compact support; a solid core is cleared.
    pub fn auto(
        family: &SolutionFamily,
        n_t: usize,
        n_r: usize,
        h: f64,
        order: StencilOrder,
    ) -> Result<Self> {
        let tr = family.trajectory();
        let reach = match order {
            StencilOrder::Second => h,
            StencilOrder::Fourth => 2.0 * h,
        };
        let t_min = tr.t_start() + 1.5 * reach;
        let t_max = match (&tr.status, family.vanish_bracket()) {
            (_, Some((lo, _))) => 0.9 * lo,
            (TrajectoryStatus::StepFailure { t, .. }, None) => 0.9 * t,
            _ => tr.t_last() - 1.5 * reach,
        };
        if !(t_max > t_min) {
            return Err(Error::Domain(format!(
                "no room for a time grid: vanish bracket {:?}, horizon {}",
                family.vanish_bracket(),
                tr.t_last()
            )));
        }
        let a_min = tr
            .samples
            .iter()
            .filter(|s| s.t <= t_max)
            .map(|s| s.a)
            .chain(std::iter::once(family.scale_at(t_max)?.0))
            .fold(f64::INFINITY, f64::min);

        let params = family.params();
        let x_max = profile_window(params, PROFILE_SPREAD).min(2.0);
        let r_edge = x_max * a_min;
        let (r_min, r_max) = match *params {
            FamilyParams::SolidCore2d { r0, .. } => {
                let lo = r0 + (0.05 * r0).max(10.0 * h);
                (lo, (lo + 1.0).min(r_edge.max(lo + 0.1)))
            }
            _ => {
                let lo = (1e-3f64).max(10.0 * h);
                (lo, r_edge.max(2.0 * lo))
            }
        };
        let grid = Self {
            t_min,
            t_max,
            r_min,
            r_max,
            n_t,
            n_r,
            fd_step_t: h,
            fd_step_r: h,
            fd_step_rr: None,
            order,
            step_scale: StepScale::default(),
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Largest `|ln(F(x)/F(0))|` admitted by [`Grid::auto`], `F` being `e^y` or `y`.
const PROFILE_SPREAD: f64 = 2.0;

/// `x` at which the density profile has changed by the factor `e^spread` from
/// its central value, ignoring a solid core's logarithm; infinite when it never does.
fn profile_window(params: &FamilyParams, spread: f64) -> f64 {
    let quadratic = |c: f64| {
        if c == 0.0 {
            f64::INFINITY
        } else {
            (spread / c.abs()).sqrt()
        }
    };
    match *params {
        FamilyParams::IsothermalNs { k, lambda, .. }
        | FamilyParams::IsothermalDamped { k, lambda, .. }
        | FamilyParams::SolidCore2d { k, lambda, .. } => quadratic(lambda / (2.0 * k)),
        FamilyParams::PressurelessTheta1 {
            dim, kappa, lambda, ..
        } => quadratic(lambda / (2.0 * dim as f64 * kappa)),
        FamilyParams::PressurelessThetaNe1 {
            dim,
            kappa,
            theta,
            lambda,
            alpha,
            ..
        } => {
            // radicand c x² + α^{θ-1} with y = radicand^{1/(θ-1)}
            let c = 0.5 * (theta - 1.0) * (-lambda / (dim as f64 * kappa * theta));
            if c == 0.0 {
                return f64::INFINITY;
            }
            let growth = if c > 0.0 {
                (spread * (theta - 1.0).abs()).exp() - 1.0
            } else {
                1.0 - (-spread * (theta - 1.0).abs()).exp()
            };
            let window = (alpha.powf(theta - 1.0) * growth / c.abs()).sqrt();
            params
                .support_radius()
                .map_or(window, |xb| window.min(0.9 * xb))
        }
    }
}

/// Coefficients of the system a family solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum System {
    Isothermal {
        dim: u32,
        k: f64,
        nu: f64,
        beta: f64,
    },
    SolidCore {
        k: f64,
        nu: f64,
        beta: f64,
        m0: f64,
        source: CoreSource,
    },
    Pressureless {
        dim: u32,
        kappa: f64,
        theta: f64,
        beta: f64,
    },
}

impl System {
    pub fn for_family(params: &FamilyParams) -> Self {
        match *params {
            FamilyParams::IsothermalNs { dim, k, nu, .. } => Self::Isothermal {
                dim,
                k,
                nu,
                beta: 0.0,
            },
            FamilyParams::IsothermalDamped {
                dim, k, nu, beta, ..
            } => Self::Isothermal { dim, k, nu, beta },
            FamilyParams::SolidCore2d {
                k, nu, beta, m0, ..
            } => Self::SolidCore {
                k,
                nu,
                beta,
                m0,
                source: CoreSource::default(),
            },
            FamilyParams::PressurelessTheta1 { dim, kappa, .. } => Self::Pressureless {
                dim,
                kappa,
                theta: 1.0,
                beta: 0.0,
            },
            FamilyParams::PressurelessThetaNe1 {
                dim,
                kappa,
                theta,
                beta,
                ..
            } => Self::Pressureless {
                dim,
                kappa,
                theta,
                beta,
            },
        }
    }

    pub fn dim(&self) -> u32 {
        match *self {
            Self::Isothermal { dim, .. } | Self::Pressureless { dim, .. } => dim,
            Self::SolidCore { .. } => 2,
        }
    }

    /// `(mass, momentum)` residuals at one point.
    pub fn residuals(
        &self,
        sampler: &impl FieldSampler,
        t: f64,
        r: f64,
        steps: &Steps,
    ) -> Result<(f64, f64)> {
        let mass = mass_residual(sampler, self.dim(), t, r, steps)?;
        let momentum = match *self {
            Self::Isothermal { dim, k, nu, beta } => {
                momentum_residual_isothermal(sampler, dim, k, nu, beta, t, r, steps)?
            }
            Self::SolidCore {
                k,
                nu,
                beta,
                m0,
                source,
            } => momentum_residual_solid_core(sampler, k, nu, beta, m0, source, t, r, steps)?,
            Self::Pressureless {
                dim,
                kappa,
                theta,
                beta,
            } => momentum_residual_pressureless(sampler, dim, kappa, theta, beta, t, r, steps)?,
        };
        Ok((mass, momentum))
    }
}

/// Residuals at one grid node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeResidual {
    pub t: f64,
    pub r: f64,
    pub mass: f64,
    pub momentum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub grid: Grid,
    pub max_abs_mass: f64,
    pub mean_abs_mass: f64,
    pub max_abs_momentum: f64,
    pub mean_abs_momentum: f64,
    /// Node with the largest of the two absolute residuals.
    pub worst_point: (f64, f64),
}

impl ResidualReport {
    pub fn from_nodes(grid: Grid, nodes: &[NodeResidual]) -> Self {
        let count = nodes.len().max(1) as f64;
        let mut report = Self {
            grid,
            max_abs_mass: 0.0,
            mean_abs_mass: 0.0,
            max_abs_momentum: 0.0,
            mean_abs_momentum: 0.0,
            worst_point: (grid.t_min, grid.r_min),
        };
        let mut worst = -1.0;
        for n in nodes {
            let (m, p) = (n.mass.abs(), n.momentum.abs());
            report.max_abs_mass = report.max_abs_mass.max(m);
            report.max_abs_momentum = report.max_abs_momentum.max(p);
            report.mean_abs_mass += m / count;
            report.mean_abs_momentum += p / count;
            if m.max(p) > worst {
                worst = m.max(p);
                report.worst_point = (n.t, n.r);
            }
        }
        // summation rounding must not break max >= mean
        report.mean_abs_mass = report.mean_abs_mass.min(report.max_abs_mass);
        report.mean_abs_momentum = report.mean_abs_momentum.min(report.max_abs_momentum);
        report
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_mass.max(self.max_abs_momentum)
    }
}

/// Evaluate both residuals at every grid node with the grid's nominal steps.
pub fn residual_nodes(
    system: &System,
    sampler: &impl FieldSampler,
    grid: &Grid,
) -> Result<Vec<NodeResidual>> {
    nodes_scaled(system, sampler, grid, |_| Ok((1.0, 1.0)))
}

fn nodes_scaled(
    system: &System,
    sampler: &impl FieldSampler,
    grid: &Grid,
    step_scale: impl Fn(f64) -> Result<(f64, f64)>,
) -> Result<Vec<NodeResidual>> {
    grid.validate()?;
    grid.nodes()
        .map(|(t, r)| {
            let mut steps = grid.steps();
            let (ft, fr) = step_scale(t)?;
            steps.h_t *= ft;
            steps.h_r *= fr;
            steps.h_rr *= fr;
            let (mass, momentum) =
                system
                    .residuals(sampler, t, r, &steps)
                    .map_err(|e| match e {
                        Error::Domain(msg) => {
                            Error::Domain(format!("{msg} (grid node t = {t}, r = {r})"))
                        }
                        other => other,
                    })?;
            Ok(NodeResidual {
                t,
                r,
                mass,
                momentum,
            })
        })
        .collect()
}

fn check_time_window(family: &SolutionFamily, grid: &Grid) -> Result<()> {
    let tr = family.trajectory();
    let reach = grid.t_reach();
    if let Some((t_lower, t_upper)) = family.vanish_bracket() {
        if grid.t_max + reach >= t_lower {
            return Err(Error::AfterBlowup {
                t: grid.t_max + reach,
                t_lower,
                t_upper,
            });
        }
    }
    if grid.t_min - reach < tr.t_start() || grid.t_max + reach > tr.t_last() {
        return Err(Error::OutOfRange {
            t: if grid.t_min - reach < tr.t_start() {
                grid.t_min - reach
            } else {
                grid.t_max + reach
            },
            t_start: tr.t_start(),
            t_end: tr.t_last(),
        });
    }
    Ok(())
}

/// Mass and momentum residuals of a family over a grid.
pub fn residual_sweep(family: &SolutionFamily, grid: &Grid) -> Result<ResidualReport> {
    residual_sweep_sampler(family, family, grid)
}

/// As [`residual_sweep`], with `sampler` standing in for the family's fields.
pub fn residual_sweep_sampler(
    family: &SolutionFamily,
    sampler: &impl FieldSampler,
    grid: &Grid,
) -> Result<ResidualReport> {
    let nodes = family_residual_nodes(family, sampler, grid)?;
    Ok(ResidualReport::from_nodes(*grid, &nodes))
}

/// Per-node residuals behind [`residual_sweep_sampler`]; rejects grids whose stencils leave the trajectory.
pub fn family_residual_nodes(
    family: &SolutionFamily,
    sampler: &impl FieldSampler,
    grid: &Grid,
) -> Result<Vec<NodeResidual>> {
    grid.validate()?;
    check_time_window(family, grid)?;
    let system = System::for_family(family.params());
    match grid.step_scale {
        StepScale::Fixed => residual_nodes(&system, sampler, grid),
        StepScale::ScaleFactor => nodes_scaled(&system, sampler, grid, |t| {
            let (a, adot) = family.scale_at(t)?;
            Ok((
                if adot.abs() > a { a / adot.abs() } else { 1.0 },
                a.min(1.0),
            ))
        }),
    }
}

/// CSV with header `t,r,mass,momentum`.
pub fn write_nodes_csv(mut out: impl Write, nodes: &[NodeResidual]) -> std::io::Result<()> {
    writeln!(out, "t,r,mass,momentum")?;
    for n in nodes {
        writeln!(out, "{},{},{},{}", n.t, n.r, n.mass, n.momentum)?;
    }
    Ok(())
}
