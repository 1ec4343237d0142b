//! Pe sweeps, CSV reports, scaling fits, streamline rendering and self-tests.
//!
//! This layer works in `f64` only.

mod config;
mod render;
mod selftest;
mod table;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{FlowSpec, ModesPolicy, SweepConfig};
pub use render::{azimuthal_sign_changes, cell_counts, render_field, render_streamlines, svg_for_field};
pub use selftest::{selftest, CheckOutcome, CheckResult, SelftestOptions, SelftestReport};
pub use table::{read_csv, write_csv, SweepRow, SweepTable, CSV_COLUMNS};

use crate::advdiff::solve_steady;
use crate::bounds::{bound_report, BoundReport};
use crate::disc::PolarGrid;
use crate::error::{Error, Result};
use crate::flows::{branching_flow, energy_roll_design, roll_flow, BranchingPlan, Constraint, FlowDesign, FlowKind};
use crate::sources::{Source, SourceKind};

/// Grid modes a design needs under the automatic policy: max(256, 8/l_n).
pub fn auto_modes(flow: &FlowSpec, pe: f64) -> Result<usize> {
    let finest = match flow.kind {
        FlowKind::Roll => flow.n,
        FlowKind::Branching => BranchingPlan::for_pe(pe)?.max_wavenumber(),
        FlowKind::EnergyRoll => BranchingPlan::energy_roll(pe)?.max_wavenumber(),
    };
    Ok(256.max(8 * finest))
}

/// Builds the source and the (un-rescaled) design for one sweep row.
pub fn build_design(cfg: &SweepConfig, pe: f64, modes: usize) -> Result<(Source<f64>, FlowDesign<f64>)> {
    let grid = PolarGrid::new(cfg.nr, modes, cfg.stretch)?;
    let source = Source::new(SourceKind::parse(&cfg.source)?, &grid)?;
    let design = match cfg.flow.kind {
        FlowKind::Roll => roll_flow(&source, cfg.flow.n, 0.0)?,
        FlowKind::Branching => branching_flow(&source, &BranchingPlan::for_pe(pe)?)?,
        FlowKind::EnergyRoll => energy_roll_design(&source, pe)?,
    };
    Ok((source, design))
}

impl SweepConfig {
    /// Fourier modes used for the row at `pe`.
    pub fn modes_at(&self, pe: f64) -> Result<usize> {
        match self.modes {
            ModesPolicy::Fixed(m) => Ok(m),
            ModesPolicy::Auto => auto_modes(&self.flow, pe),
        }
    }
}

fn evaluate_row(cfg: &SweepConfig, pe: f64, with_exact: bool) -> SweepRow {
    let start = Instant::now();
    let mut note = None;
    let modes = cfg.modes_at(pe);
    let report = modes.clone().and_then(|modes| {
        let (source, design) = build_design(cfg, pe, modes)?;
        let mut rep = bound_report(&design, &source, pe, cfg.constraint)?;
        if with_exact && pe <= cfg.exact_cap {
            match solve_steady(&design, &source, pe, cfg.constraint) {
                Ok(sol) => rep.exact = Some(sol.cooling),
                Err(e) => note = Some(format!("exact solve skipped: {e}")),
            }
        }
        Ok(rep)
    });
    SweepRow {
        pe,
        modes: modes.unwrap_or(0),
        report: report.map_err(|e| e.to_string()),
        note,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

fn run(cfg: &SweepConfig, with_exact: bool) -> Result<SweepTable> {
    cfg.validate()?;
    let mut pes = cfg.pe.clone();
    pes.sort_by(f64::total_cmp);
    let rows = pes.par_iter().map(|&pe| evaluate_row(cfg, pe, with_exact)).collect();
    Ok(SweepTable { config: SweepConfig { pe: pes, ..cfg.clone() }, rows })
}

/// One bound report per Pe, sorted ascending, with exact values filled in
/// where Pe ≤ `exact_cap`. Row failures are recorded, not raised.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    run(cfg, true)
}

/// As [`run_sweep`] but without any coupled solves.
pub fn run_bounds(cfg: &SweepConfig) -> Result<SweepTable> {
    run(cfg, false)
}

/// Least-squares power law of a series against Pe, with the compensated spread.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    /// d ln(value) / d ln(pe).
    pub raw_slope: f64,
    /// max/min of the compensated values; at least 1.
    pub compensated_spread: f64,
    /// Coefficient of determination of the raw log-log fit.
    pub r_squared: f64,
}

/// value·Pe^{2/3}/ln^{4/3}Pe for enstrophy, value·Pe for energy.
pub fn compensate(c: Constraint, pe: f64, value: f64) -> f64 {
    match c {
        Constraint::Enstrophy => value * pe.powf(2.0 / 3.0) / pe.ln().powf(4.0 / 3.0),
        Constraint::Energy => value * pe,
    }
}

/// Fits ln(value) against ln(pe) and reports the spread of `comp(pe, value)`.
pub fn fit_series(pe: &[f64], values: &[f64], comp: impl Fn(f64, f64) -> f64) -> Result<ScalingFit> {
    if pe.len() != values.len() {
        return Err(Error::InvalidParameter("pe and value series differ in length".into()));
    }
    let lo = pe.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if pe.len() < 4 || !(hi / lo >= 100.0 * (1.0 - 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 4 rows spanning two decades (got {} rows over {:.2} decades)",
            pe.len(),
            if pe.is_empty() { 0.0 } else { (hi / lo).log10() }
        )));
    }
    if values.iter().chain(pe).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("scaling fit needs positive finite values".into()));
    }
    let x: Vec<f64> = pe.iter().map(|p| p.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let comp: Vec<f64> = pe.iter().zip(values).map(|(&p, &v)| comp(p, v)).collect();
    let cmax = comp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cmin = comp.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ScalingFit { raw_slope: slope, compensated_spread: cmax / cmin, r_squared })
}

/// Fits the upper bounds of the successful rows.
pub fn fit_scaling(t: &SweepTable, c: Constraint) -> Result<ScalingFit> {
    let ok: Vec<&BoundReport<f64>> = t.reports().collect();
    let pe: Vec<f64> = ok.iter().map(|r| r.pe).collect();
    let up: Vec<f64> = ok.iter().map(|r| r.upper).collect();
    fit_series(&pe, &up, |p, v| compensate(c, p, v))
}
