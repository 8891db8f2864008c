//! Constraining-limit convergence studies.

use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub e_full: f64,
    pub e_perp: f64,
    /// `E_full - E_perp`.
    pub e_residual: f64,
    pub e_effective: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `log |error|` against `log eps`; `None` when the errors are at
    /// round-off level.
    pub order: Option<f64>,
}

impl ConvergenceReport {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["epsilon", "E_full", "E_perp", "E_residual", "E_effective", "abs_error"])
            .map_err(crate::effective::field::csv_err)?;
        for r in &self.rows {
            wr.write_record(
                [r.epsilon, r.e_full, r.e_perp, r.e_residual, r.e_effective, r.abs_error].map(crate::numerics::fmt_num),
            )
            .map_err(crate::effective::field::csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_order(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Runs `oracle(eps) -> (E_full, E_perp)` for each width (in parallel) and
/// compares `E_full - E_perp` with the effective level. Errors below
/// `floor` count as exact.
pub fn epsilon_convergence<F>(oracle: F, eps_list: &[f64], e_effective: f64, floor: f64) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Result<(f64, f64)> + Sync,
{
    if eps_list.len() < 3 {
        return Err(Error::InvalidInput("convergence study needs at least 3 widths".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput(format!("widths must be positive and strictly decreasing: {eps_list:?}")));
    }
    let results: Vec<Result<(f64, f64)>> = eps_list.par_iter().map(|&e| oracle(e)).collect();
    let mut rows = Vec::with_capacity(eps_list.len());
    for (&epsilon, r) in eps_list.iter().zip(results) {
        let (e_full, e_perp) = r?;
        let e_residual = e_full - e_perp;
        let abs_error = (e_residual - e_effective).abs();
        if !abs_error.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite error at eps = {epsilon}")));
        }
        rows.push(ConvergenceRow { epsilon, e_full, e_perp, e_residual, e_effective, abs_error });
    }
    let significant: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.abs_error > floor).collect();
    let order = if significant.len() >= 2 {
        fit_order(
            &significant.iter().map(|r| r.epsilon).collect::<Vec<_>>(),
            &significant.iter().map(|r| r.abs_error).collect::<Vec<_>>(),
        )
    } else {
        None
    };
    Ok(ConvergenceReport { rows, order })
}
