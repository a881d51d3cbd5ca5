//! Each command renders its whole output in memory first, so failures leave no partial files.

use std::io::Write;

use radialns_core::diagnostics::{
    compare_coefficients, total_mass_with, write_products_csv, CoefficientComparison,
};
use radialns_core::residual::controls::{Corrupted, Corruption};
use radialns_core::residual::{
    family_residual_nodes, write_nodes_csv, Grid, NodeResidual, ResidualReport, StepScale, System,
};
use radialns_core::{
    blowup_rate_estimate, ode::detect_blowup_with, Error, FamilyParams, MassResult,
    TrajectoryStatus,
};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::TableSampler;

/// Rendered output plus the verdict for the exit code.
pub struct Rendered {
    pub body: Vec<u8>,
    /// Secondary document (blowup report of `solve` in CSV mode).
    pub report: Option<Vec<u8>>,
    pub passed: bool,
}

impl Rendered {
    fn ok(body: Vec<u8>) -> Self {
        Self {
            body,
            report: None,
            passed: true,
        }
    }
}

fn json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Numeric(format!("cannot serialize output: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write output: {e}"))
}

pub fn solve(cfg: &RunConfig, format: Format) -> CliResult<Rendered> {
    let ode = cfg.family.ode()?;
    let (report, trajectory) = detect_blowup_with(
        &ode,
        cfg.horizon,
        cfg.integrator.bracket_tol,
        &cfg.integrator_options(),
    )?;
    if let TrajectoryStatus::StepFailure { t, reason } = &trajectory.status {
        return Err(CliError::Numeric(format!(
            "integration failed at t = {t}: {reason}"
        )));
    }
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                family: &'a FamilyParams,
                report: &'a radialns_core::BlowupReport,
                samples: &'a [radialns_core::Sample],
            }
            Ok(Rendered::ok(json(&Doc {
                family: &cfg.family,
                report: &report,
                samples: &trajectory.samples,
            })?))
        }
        Format::Csv => {
            let mut body = Vec::new();
            writeln!(body, "t,a,adot").map_err(io_err)?;
            for s in &trajectory.samples {
                writeln!(body, "{},{},{}", s.t, s.a, s.adot).map_err(io_err)?;
            }
            Ok(Rendered {
                body,
                report: Some(json(&report)?),
                passed: true,
            })
        }
    }
}

pub fn fields(cfg: &RunConfig, format: Format) -> CliResult<Rendered> {
    let family = cfg.build_family()?;
    let grid = cfg.grid_for(&family)?;
    let r0 = match cfg.family {
        FamilyParams::SolidCore2d { r0, .. } => Some(r0),
        _ => None,
    };
    let samples = grid
        .nodes()
        .filter(|&(_, r)| r0.is_none_or(|r0| r > r0))
        .map(|(t, r)| family.eval_fields(t, r))
        .collect::<Result<Vec<_>, Error>>()?;
    match format {
        Format::Json => Ok(Rendered::ok(json(&samples)?)),
        Format::Csv => {
            let with_support = matches!(cfg.family, FamilyParams::PressurelessThetaNe1 { .. });
            let mut body = Vec::new();
            writeln!(
                body,
                "t,r,rho,u{}",
                if with_support { ",support" } else { "" }
            )
            .map_err(io_err)?;
            for s in &samples {
                write!(body, "{},{},{},{}", s.t, s.r, s.rho, s.u).map_err(io_err)?;
                if with_support {
                    write!(body, ",{}", u8::from(s.in_support)).map_err(io_err)?;
                }
                writeln!(body).map_err(io_err)?;
            }
            Ok(Rendered::ok(body))
        }
    }
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    family: &'a FamilyParams,
    source: &'static str,
    negative_control: bool,
    mass_threshold: f64,
    momentum_threshold: f64,
    passed: bool,
    /// Nodes whose stencil touched a θ≠1 support edge (table mode only).
    skipped_nodes: usize,
    report: ResidualReport,
}

pub struct VerifyOptions<'a> {
    pub negative_control: bool,
    pub table: Option<&'a TableSampler>,
}

/// Residuals of the table at its interior nodes, with steps equal to the table spacing.
fn table_nodes(
    system: &System,
    table: &TableSampler,
    cfg: &RunConfig,
) -> CliResult<(Grid, Vec<NodeResidual>, usize)> {
    let (ts, rs) = (table.t_axis(), table.r_axis());
    if ts.len() < 5 || rs.len() < 5 {
        return Err(CliError::Config(
            "field table needs at least 5 nodes per axis for 5-point stencils".into(),
        ));
    }
    let h_t = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    let h_r = (rs[rs.len() - 1] - rs[0]) / (rs.len() - 1) as f64;
    let grid = Grid {
        t_min: ts[2],
        t_max: ts[ts.len() - 3],
        r_min: rs[2],
        r_max: rs[rs.len() - 3],
        n_t: ts.len() - 4,
        n_r: rs.len() - 4,
        fd_step_t: h_t,
        fd_step_r: h_r,
        fd_step_rr: Some(h_r),
        order: cfg.auto_grid.order,
        step_scale: StepScale::Fixed,
    };
    let steps = grid.steps();
    let mut nodes = Vec::new();
    let mut skipped = 0;
    for (t, r) in grid.nodes() {
        match system.residuals(table, t, r, &steps) {
            Ok((mass, momentum)) => nodes.push(NodeResidual {
                t,
                r,
                mass,
                momentum,
            }),
            Err(Error::SupportBoundary { .. }) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if nodes.is_empty() {
        return Err(CliError::Config(
            "no table node admits a residual stencil".into(),
        ));
    }
    Ok((grid, nodes, skipped))
}

pub fn verify(cfg: &RunConfig, format: Format, opts: &VerifyOptions) -> CliResult<Rendered> {
    let negative_control = opts.negative_control || cfg.verify.negative_control;
    let (grid, nodes, skipped, source) = match opts.table {
        Some(table) => {
            if negative_control {
                return Err(CliError::Config(
                    "the negative control applies to family mode only, not to --fields".into(),
                ));
            }
            let (grid, nodes, skipped) = table_nodes(&System::for_family(&cfg.family), table, cfg)?;
            (grid, nodes, skipped, "table")
        }
        None => {
            let family = cfg.build_family()?;
            let grid = cfg.grid_for(&family)?;
            let nodes = if negative_control {
                family_residual_nodes(
                    &family,
                    &Corrupted::new(&family, Corruption::ScaleExponent(1)),
                    &grid,
                )?
            } else {
                family_residual_nodes(&family, &family, &grid)?
            };
            (grid, nodes, 0, "family")
        }
    };
    let report = ResidualReport::from_nodes(grid, &nodes);
    let passed = report.max_abs_mass < cfg.verify.mass_threshold
        && report.max_abs_momentum < cfg.verify.momentum_threshold;
    let body = match format {
        Format::Json => json(&VerifyDoc {
            family: &cfg.family,
            source,
            negative_control,
            mass_threshold: cfg.verify.mass_threshold,
            momentum_threshold: cfg.verify.momentum_threshold,
            passed,
            skipped_nodes: skipped,
            report,
        })?,
        Format::Csv => {
            let mut body = Vec::new();
            write_nodes_csv(&mut body, &nodes).map_err(io_err)?;
            body
        }
    };
    Ok(Rendered {
        body,
        report: None,
        passed,
    })
}

pub fn mass(cfg: &RunConfig, format: Format) -> CliResult<Rendered> {
    if format == Format::Csv {
        return Err(CliError::Config("mass output is JSON only".into()));
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        family: &'a FamilyParams,
        t: f64,
        quad_tol: f64,
        coefficient_mode: radialns_core::CoefficientMode,
        /// Both coefficient conventions, so disagreements stay visible.
        coefficients: CoefficientComparison,
        result: MassResult,
    }
    let family = cfg.build_family()?;
    let m = &cfg.mass;
    let result = total_mass_with(&family, m.t, m.quad_tol, m.r_max, m.coefficient_mode)?;
    Ok(Rendered::ok(json(&Doc {
        family: &cfg.family,
        t: m.t,
        quad_tol: m.quad_tol,
        coefficient_mode: m.coefficient_mode,
        coefficients: compare_coefficients(cfg.family.dim())?,
        result,
    })?))
}

pub fn blowup(cfg: &RunConfig, format: Format) -> CliResult<Rendered> {
    let family = cfg.build_family()?;
    let exponent = cfg.blowup.exponent.unwrap_or(cfg.family.dim() as f64 - 0.5);
    let estimate = blowup_rate_estimate(&family, exponent, cfg.blowup.n_samples.unwrap_or(40))?;
    match format {
        Format::Json => Ok(Rendered::ok(json(&estimate)?)),
        Format::Csv => {
            let mut body = Vec::new();
            write_products_csv(&mut body, &estimate.products).map_err(io_err)?;
            Ok(Rendered::ok(body))
        }
    }
}
