//! JSON run configuration. Unknown keys are rejected at every level.

use std::path::Path;

use radialns_core::diagnostics::CoefficientMode;
use radialns_core::residual::{Grid, StencilOrder};
use radialns_core::{FamilyParams, IntegratorOptions, SolutionFamily};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyParams,
    /// Integration horizon for the scale factor.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    /// Explicit grid; overrides `auto_grid`.
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub auto_grid: AutoGrid,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub mass: MassConfig,
    #[serde(default)]
    pub blowup: BlowupConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_horizon() -> f64 {
    10.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// Required width of the vanish bracket.
    pub bracket_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            bracket_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutoGrid {
    pub n_t: usize,
    pub n_r: usize,
    pub fd_step: f64,
    pub order: StencilOrder,
}

impl Default for AutoGrid {
    fn default() -> Self {
        Self {
            n_t: 16,
            n_r: 16,
            fd_step: 1e-4,
            order: StencilOrder::Fourth,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub mass_threshold: f64,
    pub momentum_threshold: f64,
    /// Verify a density with the wrong power of `a`; must fail.
    pub negative_control: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            mass_threshold: 1e-6,
            momentum_threshold: 1e-6,
            negative_control: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MassConfig {
    pub t: f64,
    pub quad_tol: f64,
    pub r_max: Option<f64>,
    pub coefficient_mode: CoefficientMode,
}

impl Default for MassConfig {
    fn default() -> Self {
        Self {
            t: 0.0,
            quad_tol: 1e-10,
            r_max: None,
            coefficient_mode: CoefficientMode::SurfaceMeasure,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupConfig {
    /// Defaults to `N - 0.5`.
    pub exponent: Option<f64>,
    /// Defaults to 40.
    pub n_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        self.family.validate()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("horizon", self.horizon)?;
        positive("integrator.rel_tol", self.integrator.rel_tol)?;
        positive("integrator.bracket_tol", self.integrator.bracket_tol)?;
        positive("auto_grid.fd_step", self.auto_grid.fd_step)?;
        positive("verify.mass_threshold", self.verify.mass_threshold)?;
        positive("verify.momentum_threshold", self.verify.momentum_threshold)?;
        positive("mass.quad_tol", self.mass.quad_tol)?;
        if self.auto_grid.n_t == 0 || self.auto_grid.n_r == 0 {
            return Err(CliError::Config(
                "auto_grid needs at least one node per axis".into(),
            ));
        }
        // sampling may include the axis; residual sweeps apply the stricter `Grid::validate`
        if let Some(g) = &self.grid {
            let ok = g.n_t >= 2
                && g.n_r >= 2
                && g.t_min.is_finite()
                && g.t_min < g.t_max
                && g.r_min >= 0.0
                && g.r_min < g.r_max
                && g.t_max.is_finite()
                && g.r_max.is_finite();
            if !ok {
                return Err(CliError::Config(format!(
                    "grid needs n_t, n_r >= 2, t_min < t_max and 0 <= r_min < r_max, got {g:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn integrator_options(&self) -> IntegratorOptions {
        let a0 = match self.family {
            FamilyParams::IsothermalNs { a0, .. }
            | FamilyParams::IsothermalDamped { a0, .. }
            | FamilyParams::SolidCore2d { a0, .. }
            | FamilyParams::PressurelessTheta1 { a0, .. }
            | FamilyParams::PressurelessThetaNe1 { a0, .. } => a0,
        };
        let mut opts = SolutionFamily::default_integrator(a0);
        let scale = self.integrator.rel_tol / opts.rel_tol;
        opts.rel_tol = self.integrator.rel_tol;
        opts.abs_tol *= scale;
        opts
    }

    pub fn build_family(&self) -> CliResult<SolutionFamily> {
        Ok(SolutionFamily::with_integrator(
            self.family,
            self.horizon,
            &self.integrator_options(),
        )?)
    }

    pub fn grid_for(&self, family: &SolutionFamily) -> CliResult<Grid> {
        match &self.grid {
            Some(g) => Ok(*g),
            None => Ok(Grid::auto(
                family,
                self.auto_grid.n_t,
                self.auto_grid.n_r,
                self.auto_grid.fd_step,
                self.auto_grid.order,
            )?),
        }
    }
}
