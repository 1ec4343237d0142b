//! Steady advection–diffusion u·∇T = ΔT + f on the disc with T = 0 at r = 1.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bounds::{lower_quotient, upper_functional};
use crate::disc::{grad_energy, gradient, product_sum, Parity, PolarGrid, SpectralScalar, VectorFieldPolar};
use crate::error::{Error, Result};
use crate::flows::{Constraint, FlowDesign};
use crate::linalg::gmres;
use crate::poisson::inv_laplacian_dirichlet;
use crate::real::{lit, Real};
use crate::sources::Source;

/// Krylov settings for [`solve_velocity`].
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub restart: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest accepted λ·|u|·h.
    pub max_cell_pe: f64,
    /// Solves whose relative gap |⨍|∇T|² − ⨍fT| / ⨍|∇T|² exceeds this are rejected.
    pub max_energy_gap: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { restart: 60, tol: 1e-10, max_iter: 10_000, max_cell_pe: 2.0, max_energy_gap: Some(1e-6) }
    }
}

/// A converged steady temperature with solver diagnostics.
#[derive(Clone, Debug)]
pub struct SteadySolution<T: Real> {
    pub temperature: SpectralScalar<T>,
    pub iterations: usize,
    /// Relative residual after each Krylov step.
    pub history: Vec<f64>,
    /// ⨍|∇T|².
    pub cooling: T,
    /// ⨍ f T.
    pub heat_input: T,
    /// Largest λ|u|h seen by the resolvability guard.
    pub cell_pe: T,
}

impl<T: Real> SteadySolution<T> {
    /// |⨍|∇T|² − ⨍fT| / ⨍|∇T|².
    pub fn energy_gap(&self) -> T {
        if self.cooling == T::zero() {
            return self.heat_input.abs();
        }
        (self.cooling - self.heat_input).abs() / self.cooling
    }
}

/// ⨍|∇T|².
pub fn cooling_value<T: Real>(t: &SpectralScalar<T>) -> T {
    grad_energy(t)
}

/// Largest λ|u|h over the collocation grid.
pub fn cell_peclet<T: Real>(u: &VectorFieldPolar<T>) -> T {
    let g = u.grid();
    let nt = g.ntheta();
    let ur = u.r.to_physical();
    let ut = u.t.to_physical();
    (0..g.nr())
        .into_par_iter()
        .map(|k| {
            let h = g.spacing(k);
            (0..nt)
                .map(|j| {
                    let (a, b) = (ur[k * nt + j], ut[k * nt + j]);
                    (a * a + b * b).sqrt() * h
                })
                .fold(T::zero(), T::max)
        })
        .reduce(T::zero, T::max)
}

/// Solves U·∇T = ΔT + f for a physical velocity U.
///
/// Right-preconditioned by the Dirichlet Laplacian: with T = Δ⁻¹y the system
/// becomes y − U·∇Δ⁻¹y = −f on interior nodes.
pub fn solve_velocity<T: Real>(u: &VectorFieldPolar<T>, s: &Source<T>, opts: &SolverOptions) -> Result<SteadySolution<T>> {
    let g: Arc<PolarGrid<T>> = s.grid().clone();
    if !Arc::ptr_eq(u.grid(), &g) {
        return Err(Error::GridMismatch);
    }
    let cell_pe = cell_peclet(u);
    let cp = cell_pe.to_f64().unwrap();
    if cp > opts.max_cell_pe {
        let factor = cp / opts.max_cell_pe;
        return Err(Error::Resolvability {
            cell_pe: cp,
            required_nr: (g.nr() as f64 * factor).ceil() as usize,
            required_modes: (g.modes() as f64 * factor).ceil() as usize,
        });
    }
    let nc = g.ncoef();
    let n_in = (g.nr() - 1) * nc;
    let still = u.r.max_abs_coef() == T::zero() && u.t.max_abs_coef() == T::zero();
    let unpack = |y: &[T]| {
        let mut f = SpectralScalar::zeros(&g, Parity::Scalar);
        f.data_mut()[..n_in].copy_from_slice(y);
        f
    };
    let (y, iterations, history) = if still {
        (s.field().scale(-T::one()).data()[..n_in].to_vec(), 0, Vec::new())
    } else {
        let b: Vec<T> = s.field().data()[..n_in].iter().map(|&v| -v).collect();
        let out = gmres(
            |x, out| {
                let w = inv_laplacian_dirichlet(&unpack(x));
                let gw = gradient(&w);
                let adv = product_sum(&[(&u.r, &gw.r), (&u.t, &gw.t)]);
                out.par_iter_mut()
                    .zip(x.par_iter().zip(adv.data()[..n_in].par_iter()))
                    .for_each(|(o, (&xi, &ai))| *o = xi - ai);
            },
            &b,
            opts.restart,
            opts.tol,
            opts.max_iter,
        );
        if !out.converged {
            return Err(Error::NoConvergence {
                iterations: out.iterations,
                last: out.history.last().copied().unwrap_or(f64::NAN),
                history: out.history,
            });
        }
        (out.x, out.iterations, out.history)
    };
    let temperature = inv_laplacian_dirichlet(&unpack(&y));
    let cooling = cooling_value(&temperature);
    let heat_input = s.field().inner(&temperature);
    let sol = SteadySolution { temperature, iterations, history, cooling, heat_input, cell_pe };
    if let Some(tol) = opts.max_energy_gap {
        let gap = sol.energy_gap().to_f64().unwrap();
        if gap > tol {
            return Err(Error::Rejected(format!(
                "energy identity off by {gap:.3e} (tolerance {tol:.1e}); refine nr"
            )));
        }
    }
    Ok(sol)
}

/// Physical velocity of the design at `pe` under the given constraint.
pub fn physical_velocity<T: Real>(d: &FlowDesign<T>, pe: T, c: Constraint) -> Result<VectorFieldPolar<T>> {
    if !(pe >= T::zero()) {
        return Err(Error::InvalidParameter(format!("Pe must be non-negative (got {pe})")));
    }
    if pe == T::zero() {
        return Ok(VectorFieldPolar::zeros(d.grid()));
    }
    Ok(d.rescale_to_pe(pe, c)?.velocity().clone())
}

/// Steady temperature for the design rescaled to `pe`.
pub fn solve_steady<T: Real>(d: &FlowDesign<T>, s: &Source<T>, pe: T, c: Constraint) -> Result<SteadySolution<T>> {
    solve_velocity(&physical_velocity(d, pe, c)?, s, &SolverOptions::default())
}

/// Result of the two-sided steady duality check.
#[derive(Clone, Debug)]
pub struct DualityReport<T> {
    /// ⨍|∇T₊|² for the forward flow.
    pub exact: T,
    /// Upper functional at η* = (T₊ − T₋)/2.
    pub upper: T,
    /// Lower quotient at ξ* = (T₊ + T₋)/2.
    pub lower: T,
    pub upper_gap: T,
    pub lower_gap: T,
    /// Energy-identity gaps of the forward and reversed solves.
    pub energy_gaps: [T; 2],
}

impl<T: Real> DualityReport<T> {
    /// Both gaps in [−1e-6, tol·exact].
    pub fn passes(&self, rel_tol: T) -> bool {
        let lo = -lit::<T>(1e-6);
        let hi = rel_tol * self.exact;
        [self.upper_gap, self.lower_gap].iter().all(|&g| g >= lo && g <= hi)
    }
}

/// Solves with +λu and −λu and evaluates both variational bounds at the
/// optimal test functions built from the two temperatures.
pub fn duality_check<T: Real>(d: &FlowDesign<T>, s: &Source<T>, pe: T, c: Constraint) -> Result<DualityReport<T>> {
    let u = physical_velocity(d, pe, c)?;
    let back = u.scale(-T::one());
    let opts = SolverOptions::default();
    let (plus, minus) = rayon::join(|| solve_velocity(&u, s, &opts), || solve_velocity(&back, s, &opts));
    let (plus, minus) = (plus?, minus?);
    let half = lit::<T>(0.5);
    let eta = plus.temperature.sub(&minus.temperature).scale(half);
    let xi = plus.temperature.add(&minus.temperature).scale(half);
    let exact = plus.cooling;
    let upper = upper_functional(&u, &eta, s)?;
    let lower = lower_quotient(&u, s, &xi)?;
    Ok(DualityReport {
        exact,
        upper,
        lower,
        upper_gap: upper - exact,
        lower_gap: exact - lower,
        energy_gaps: [plus.energy_gap(), minus.energy_gap()],
    })
}

/// Relative change of the cooling value when nr and modes are doubled.
pub fn grid_doubling_error<T: Real>(coarse: T, fine: T) -> T {
    (coarse - fine).abs() / fine.abs().max(T::min_positive_value())
}
