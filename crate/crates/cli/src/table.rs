//! Field tables read back from `fields` output, sampled by piecewise-cubic interpolation.

use std::path::Path;

use radialns_core::residual::FieldSampler;
use radialns_core::{Error, Result};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Deserialize)]
struct Row {
    t: f64,
    r: f64,
    rho: f64,
    u: f64,
}

/// `(ρ, u)` on a full tensor grid in `(t, r)`.
#[derive(Clone, Debug)]
pub struct TableSampler {
    ts: Vec<f64>,
    rs: Vec<f64>,
    /// Row-major, `t` outer.
    rho: Vec<f64>,
    u: Vec<f64>,
}

/// Distinct coordinates in ascending order.
fn axis(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl TableSampler {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<Row>, _>>()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_rows(rows.into_iter().map(|r| (r.t, r.r, r.rho, r.u))).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_rows(rows: impl IntoIterator<Item = (f64, f64, f64, f64)>) -> CliResult<Self> {
        let rows: Vec<_> = rows.into_iter().collect();
        if rows
            .iter()
            .any(|r| ![r.0, r.1, r.2, r.3].iter().all(|v| v.is_finite()))
        {
            return Err(CliError::Config(
                "field table contains non-finite values".into(),
            ));
        }
        let ts = axis(rows.iter().map(|r| r.0));
        let rs = axis(rows.iter().map(|r| r.1));
        if ts.len() < 4 || rs.len() < 4 {
            return Err(CliError::Config(
                "field table needs at least 4 distinct t and r values".into(),
            ));
        }
        if rows.len() != ts.len() * rs.len() {
            return Err(CliError::Config(format!(
                "field table is not a full grid: {} rows for {} x {} nodes",
                rows.len(),
                ts.len(),
                rs.len()
            )));
        }
        let mut rho = vec![f64::NAN; rows.len()];
        let mut u = vec![f64::NAN; rows.len()];
        for (t, r, p, v) in rows {
            let i = ts.partition_point(|&x| x < t);
            let j = rs.partition_point(|&x| x < r);
            let k = i * rs.len() + j;
            if !rho[k].is_nan() {
                return Err(CliError::Config(format!(
                    "duplicate node (t = {t}, r = {r})"
                )));
            }
            rho[k] = p;
            u[k] = v;
        }
        Ok(Self { ts, rs, rho, u })
    }

    pub fn t_axis(&self) -> &[f64] {
        &self.ts
    }

    pub fn r_axis(&self) -> &[f64] {
        &self.rs
    }

    fn at(&self, field: &[f64], i: usize, j: usize) -> f64 {
        field[i * self.rs.len() + j]
    }
}

/// Start index and Lagrange weights of the 4-node stencil around `x`.
fn cubic_weights(nodes: &[f64], x: f64) -> Option<(usize, [f64; 4])> {
    let n = nodes.len();
    // stencil offsets built from the mean spacing may overshoot the last node by rounding
    let slack = 1e-9 * (nodes[n - 1] - nodes[0]);
    if !(x >= nodes[0] - slack && x <= nodes[n - 1] + slack) {
        return None;
    }
    let cell = nodes.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let start = cell.saturating_sub(1).min(n - 4);
    let xs = &nodes[start..start + 4];
    let mut w = [1.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        for (m, &xm) in xs.iter().enumerate() {
            if m != k {
                *wk *= (x - xm) / (xs[k] - xm);
            }
        }
    }
    Some((start, w))
}

impl FieldSampler for TableSampler {
    fn sample(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let outside = || Error::Domain(format!("(t = {t}, r = {r}) lies outside the field table"));
        let (ti, wt) = cubic_weights(&self.ts, t).ok_or_else(outside)?;
        let (rj, wr) = cubic_weights(&self.rs, r).ok_or_else(outside)?;
        let mut rho = 0.0;
        let mut u = 0.0;
        for (a, &wa) in wt.iter().enumerate() {
            for (b, &wb) in wr.iter().enumerate() {
                rho += wa * wb * self.at(&self.rho, ti + a, rj + b);
                u += wa * wb * self.at(&self.u, ti + a, rj + b);
            }
        }
        Ok((rho, u))
    }
}
