use std::fmt;
use std::sync::Arc;

use super::config::SweepConfig;
use super::table::{SweepRow, SweepTable};
use super::{compensate, fit_series};
use crate::advdiff::{duality_check, solve_steady};
use crate::bounds::{bound_report, lower_quotient, residual_parts, BoundReport};
use crate::disc::{divergence, perp_gradient, product, Parity, PolarGrid, SpectralScalar, VectorFieldPolar};
use crate::error::{Error, Result};
use crate::flows::{branching_flow, roll_flow, BranchingPlan, Constraint};
use crate::poisson::hminus1_energy;
use crate::sources::{Source, SourceKind};

/// Grid size of the suite and an optional Poisson-stencil fault for testing the suite itself.
#[derive(Clone, Copy, Debug)]
pub struct SelftestOptions {
    pub nr: usize,
    pub modes: usize,
    /// Relative perturbation of the Poisson stencil; `None` for a healthy run.
    pub poisson_fault: Option<f64>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { nr: 256, modes: 256, poisson_fault: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CheckOutcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: CheckOutcome,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            CheckOutcome::Pass(m) => write!(f, "PASS {}: {m}", self.name),
            CheckOutcome::Fail(m) => write!(f, "FAIL {}: {m}", self.name),
            CheckOutcome::Skip(m) => write!(f, "SKIP {}: {m}", self.name),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(|c| matches!(c.outcome, CheckOutcome::Fail(_)))
    }
    pub fn outcome(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.outcome)
    }
}

type Grid = Arc<PolarGrid<f64>>;

fn verdict(ok: bool, msg: String) -> Result<CheckOutcome> {
    Ok(if ok { CheckOutcome::Pass(msg) } else { CheckOutcome::Fail(msg) })
}

fn source(g: &Grid, name: &str) -> Result<Source<f64>> {
    Source::new(SourceKind::parse(name)?, g)
}

fn quadrature(g: &Grid) -> Result<CheckOutcome> {
    let area = g.weights().iter().sum::<f64>() * 2.0;
    let r2 = SpectralScalar::radial(g, Parity::Scalar, |r| r * r).mean();
    let err = (area - 1.0).abs().max((r2 - 0.5).abs());
    verdict(err < 1e-10, format!("area and ⨍r² error {err:.2e}"))
}

fn round_trip(g: &Grid) -> Result<CheckOutcome> {
    let f = SpectralScalar::sample(g, Parity::Scalar, |r, t| 1.0 + r * r * (3.0 * t).cos() - r.powi(5) * (7.0 * t).sin());
    let back = SpectralScalar::from_physical(g, Parity::Scalar, &f.to_physical());
    let err = back.sub(&f).max_abs_coef();
    let parseval = (product(&f, &f).mean() - f.mean_square()).abs();
    verdict(err < 1e-12 && parseval < 1e-10, format!("round trip {err:.2e}, Parseval {parseval:.2e}"))
}

fn divergence_free(g: &Grid) -> Result<CheckOutcome> {
    let psi = SpectralScalar::sample(g, Parity::Scalar, |r, t| r * r * (2.0 * t).cos() + r.powi(3) * (3.0 * t).sin());
    let div = divergence(&perp_gradient(&psi))?.max_abs();
    verdict(div < 1e-8, format!("max |∇·∇⊥ψ| = {div:.2e}"))
}

fn poisson_value(g: &Grid) -> Result<CheckOutcome> {
    let e = hminus1_energy(source(g, "constant")?.field());
    verdict((e - 0.125).abs() < 1e-8, format!("⨍|∇Δ⁻¹1|² = {e:.12}"))
}

fn source_divergence(g: &Grid) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for name in ["constant", "gaussian_center", "quadrupole"] {
        let s = source(g, name)?;
        let v = VectorFieldPolar::new(s.radial_potential().clone(), SpectralScalar::zeros(g, Parity::Vector))?;
        worst = worst.max(divergence(&v)?.sub(s.field()).max_abs());
    }
    verdict(worst < 1e-6, format!("max |∇·(g ê_r) − f| = {worst:.2e}"))
}

fn cutoffs(_: &Grid) -> Result<CheckOutcome> {
    let plan = BranchingPlan::for_pe(1e3)?;
    let c = plan.cutoffs();
    let mut worst: f64 = 0.0;
    for i in 0..=400 {
        let r = i as f64 / 400.0 * plan.r_bl();
        let sum: f64 = (0..c.len()).map(|k| c.eval(k, r)[0].powi(2)).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    verdict(worst < 1e-12, format!("Σχ² − 1 error {worst:.2e} on [0, r_bl]"))
}

fn design_invariants(g: &Grid) -> Result<CheckOutcome> {
    let s = source(g, "constant")?;
    roll_flow(&s, 4, 0.0)?.check_invariants()?;
    branching_flow(&s, &BranchingPlan::for_pe(1e3)?)?.check_invariants()?;
    verdict(true, "roll n=4 and branching Pe=1e3 divergence-free and no-slip".into())
}

fn identity(g: &Grid) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let still = source(g, "constant")?;
    let r = residual_parts(&VectorFieldPolar::zeros(g), &SpectralScalar::zeros(g, Parity::Scalar), &still)?;
    worst = worst.max((r.lhs - r.flux - r.q).abs() / r.lhs);
    for name in ["constant", "quadrupole"] {
        let s = source(g, name)?;
        let d = roll_flow(&s, 8, 0.0)?;
        let r = residual_parts(d.velocity(), d.test_function(), &s)?;
        worst = worst.max((r.lhs - r.flux - r.q).abs() / r.lhs);
    }
    verdict(worst <= 1e-5, format!("|lhs − (flux + Q)|/lhs ≤ {worst:.2e}"))
}

fn scale_invariance(g: &Grid) -> Result<CheckOutcome> {
    let s = source(g, "constant")?;
    let u = roll_flow(&s, 4, 0.0)?.rescale_to_pe(50.0, Constraint::Enstrophy)?.velocity().clone();
    let xi = SpectralScalar::radial(g, Parity::Scalar, |r| 1.0 - r * r);
    let a = lower_quotient(&u, &s, &xi)?;
    let b = lower_quotient(&u, &s, &xi.scale(3.0))?;
    let rel = (a - b).abs() / a;
    verdict(rel < 1e-12, format!("quotient change under ξ → 3ξ: {rel:.2e}"))
}

fn sandwich(g: &Grid) -> Result<CheckOutcome> {
    let s = source(g, "constant")?;
    let d = roll_flow(&s, 4, 0.0)?;
    let rep = bound_report(&d, &s, 50.0, Constraint::Enstrophy)?;
    let exact = solve_steady(&d, &s, 50.0, Constraint::Enstrophy)?.cooling;
    let lower = rep.lower.unwrap_or(f64::NAN);
    verdict(
        lower <= exact + 1e-8 && exact <= rep.upper + 1e-8,
        format!("{lower:.6} ≤ {exact:.6} ≤ {:.6}", rep.upper),
    )
}

fn poisson_limit(g: &Grid) -> Result<CheckOutcome> {
    let s = source(g, "constant")?;
    let d = roll_flow(&s, 4, 0.0)?;
    let sol = solve_steady(&d, &s, 0.0, Constraint::Enstrophy)?;
    let gap = sol.energy_gap();
    verdict(
        (sol.cooling - 0.125).abs() < 1e-8 && gap < 1e-6,
        format!("cooling {:.12}, energy gap {gap:.2e}", sol.cooling),
    )
}

fn duality(g: &Grid) -> Result<CheckOutcome> {
    let s = source(g, "constant")?;
    let d = roll_flow(&s, 4, 0.0)?;
    let rep = duality_check(&d, &s, 50.0, Constraint::Enstrophy)?;
    verdict(
        rep.passes(1e-4),
        format!("gaps {:.2e}, {:.2e} against exact {:.6}", rep.upper_gap, rep.lower_gap, rep.exact),
    )
}

fn high_pe_plan(g: &Grid) -> Result<CheckOutcome> {
    let s = source(g, "constant")?;
    match branching_flow(&s, &BranchingPlan::for_pe(1e6)?) {
        Err(Error::Unresolved { required, available }) => Ok(CheckOutcome::Skip(format!(
            "plan(1e6) needs {required} modes, grid has {available}"
        ))),
        Err(e) => Err(e),
        Ok(d) => {
            d.check_invariants()?;
            verdict(true, "plan(1e6) resolved".into())
        }
    }
}

fn csv_round_trip(_: &Grid) -> Result<CheckOutcome> {
    let cfg = SweepConfig { pe: vec![0.1 + 0.2, 1e3 / 3.0], ..SweepConfig::default() };
    let rep = |pe: f64| BoundReport {
        pe,
        constraint: Constraint::Enstrophy,
        upper: std::f64::consts::PI / pe,
        lower: Some(1.0 / 3.0),
        exact: None,
        residual_flux: f64::MIN_POSITIVE,
        residual_q: 1e300,
        grad_eta: std::f64::consts::E,
        flow_norm: 2f64.sqrt(),
        delta_star: Some(0.1),
    };
    let rows: Vec<SweepRow> = cfg
        .pe
        .iter()
        .map(|&pe| SweepRow { pe, modes: 256, report: Ok(rep(pe)), note: None, wall_time: 0.0 })
        .collect();
    let t = SweepTable { config: cfg, rows };
    let back = SweepTable::from_csv(&t.to_csv()?)?;
    let same = back.config == t.config
        && back.rows.len() == t.rows.len()
        && back.rows.iter().zip(&t.rows).all(|(a, b)| a.same_content(b));
    verdict(same, "table → CSV → table is lossless".into())
}

fn scaling_fit(_: &Grid) -> Result<CheckOutcome> {
    let pe: Vec<f64> = (0..7).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
    let v: Vec<f64> = pe.iter().map(|p| p.ln().powf(4.0 / 3.0) / p.powf(2.0 / 3.0)).collect();
    let fit = fit_series(&pe, &v, |p, x| compensate(Constraint::Enstrophy, p, x))?;
    verdict((fit.compensated_spread - 1.0).abs() < 1e-12, format!("spread {:.3e}", fit.compensated_spread - 1.0))
}

type Check = fn(&Grid) -> Result<CheckOutcome>;

const CHECKS: [(&str, Check); 15] = [
    ("disc.quadrature", quadrature),
    ("disc.round_trip", round_trip),
    ("disc.divergence_free", divergence_free),
    ("poisson.constant_source", poisson_value),
    ("sources.radial_potential", source_divergence),
    ("flows.cutoff_partition", cutoffs),
    ("flows.design_invariants", design_invariants),
    ("flows.plan_1e6", high_pe_plan),
    ("bounds.flux_q_identity", identity),
    ("bounds.scale_invariance", scale_invariance),
    ("bounds.sandwich", sandwich),
    ("advdiff.poisson_limit", poisson_limit),
    ("advdiff.duality", duality),
    ("sweep.csv_round_trip", csv_round_trip),
    ("sweep.scaling_fit", scaling_fit),
];

/// Runs the invariant checks of every module on a small grid.
pub fn selftest(opts: &SelftestOptions) -> Result<SelftestReport> {
    let grid = match opts.poisson_fault {
        Some(eps) => PolarGrid::with_poisson_fault(opts.nr, opts.modes, 2.0, eps)?,
        None => PolarGrid::new(opts.nr, opts.modes, 2.0)?,
    };
    let checks = CHECKS
        .iter()
        .map(|&(name, check)| CheckResult {
            name,
            outcome: check(&grid).unwrap_or_else(|e| CheckOutcome::Fail(e.to_string())),
        })
        .collect();
    Ok(SelftestReport { checks })
}
