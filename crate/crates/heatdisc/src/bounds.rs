//! Upper-bound functional, its flux/Q decomposition, and certified lower bounds.

use std::sync::Arc;

use rayon::prelude::*;

use crate::disc::{advect, grad_energy, product, Parity, SpectralScalar, VectorFieldPolar};
use crate::error::{Error, Result};
use crate::flows::{Constraint, CutoffSet, FlowDesign};
use crate::poisson::{hminus1_energy, qform};
use crate::real::{cnt, lit, Real};
use crate::sources::Source;

/// One evaluation of the bounds at a given Pe.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport<T> {
    pub pe: T,
    pub constraint: Constraint,
    pub upper: T,
    pub lower: Option<T>,
    pub exact: Option<T>,
    /// ⨍|w̄_r|², the θ-mean radial flux mismatch.
    pub residual_flux: T,
    /// Q of the non-radial remainder.
    pub residual_q: T,
    /// ⨍|∇η|² of the un-rescaled design.
    pub grad_eta: T,
    /// ⨍|∇u|² or ⨍|u|² of the un-rescaled design.
    pub flow_norm: T,
    pub delta_star: Option<T>,
}

/// The two sides of the radial/non-radial splitting of ⨍|∇Δ⁻¹(u·∇η − f)|².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual<T> {
    pub flux: T,
    pub q: T,
    /// ⨍|∇Δ⁻¹(u·∇η − f)|² computed directly from the advection term.
    pub lhs: T,
}

fn same_grid<T: Real>(u: &VectorFieldPolar<T>, s: &Source<T>) -> Result<()> {
    if Arc::ptr_eq(u.grid(), s.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// w = uη − g ê_r, whose divergence is u·∇η − f.
fn flux_field<T: Real>(u: &VectorFieldPolar<T>, eta: &SpectralScalar<T>, s: &Source<T>) -> VectorFieldPolar<T> {
    VectorFieldPolar {
        r: product(&u.r, eta).sub(s.radial_potential()),
        t: product(&u.t, eta),
    }
}

/// flux + Q, without the independent left-hand side.
fn split<T: Real>(u: &VectorFieldPolar<T>, eta: &SpectralScalar<T>, s: &Source<T>) -> (T, T) {
    let w = flux_field(u, eta, s);
    let mut mean = SpectralScalar::zeros(u.grid(), Parity::Vector);
    for k in 0..u.grid().nr() {
        mean.set_a(0, k, w.r.a(0, k));
    }
    (mean.mean_square(), qform(&w))
}

/// Splits the residual of (u, η) into the radial flux term and Q, and
/// computes the left-hand side independently.
pub fn residual_parts<T: Real>(u: &VectorFieldPolar<T>, eta: &SpectralScalar<T>, s: &Source<T>) -> Result<Residual<T>> {
    same_grid(u, s)?;
    let (flux, q) = split(u, eta, s);
    let lhs = hminus1_energy(&advect(u, eta).sub(s.field()));
    Ok(Residual { flux, q, lhs })
}

pub fn decompose_residual<T: Real>(d: &FlowDesign<T>, s: &Source<T>) -> Result<Residual<T>> {
    residual_parts(d.velocity(), d.test_function(), s)
}

/// ⨍|∇Δ⁻¹(U·∇η − f)|² + ⨍|∇η|² for a physical velocity U and any η.
pub fn upper_functional<T: Real>(u: &VectorFieldPolar<T>, eta: &SpectralScalar<T>, s: &Source<T>) -> Result<T> {
    same_grid(u, s)?;
    let (flux, q) = split(u, eta, s);
    Ok(flux + q + grad_energy(eta))
}

fn check_resolved<T: Real>(d: &FlowDesign<T>) -> Result<()> {
    if let Some(p) = d.plan() {
        let required = 4 * p.max_wavenumber();
        if d.grid().modes() < required {
            return Err(Error::Unresolved { required, available: d.grid().modes() });
        }
    }
    Ok(())
}

fn check_pe<T: Real>(pe: T) -> Result<()> {
    if pe > T::zero() && pe.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Pe must be positive (got {pe})")))
    }
}

/// Upper bound on ⟨|∇T|²⟩ for the design rescaled to `pe`.
pub fn upper_bound<T: Real>(d: &FlowDesign<T>, s: &Source<T>, pe: T, c: Constraint) -> Result<BoundReport<T>> {
    check_pe(pe)?;
    same_grid(d.velocity(), s)?;
    check_resolved(d)?;
    let (flux, q) = split(d.velocity(), d.test_function(), s);
    let norm = d.norm(c);
    let grad_eta = d.grad_eta();
    Ok(BoundReport {
        pe,
        constraint: c,
        upper: flux + q + norm * grad_eta / (pe * pe),
        lower: None,
        exact: None,
        residual_flux: flux,
        residual_q: q,
        grad_eta,
        flow_norm: norm,
        delta_star: None,
    })
}

/// ⟨fξ⟩² / (⨍|∇ξ|² + ⨍|∇Δ⁻¹(U·∇ξ)|²) for a physical velocity U.
pub fn lower_quotient<T: Real>(u: &VectorFieldPolar<T>, s: &Source<T>, xi: &SpectralScalar<T>) -> Result<T> {
    same_grid(u, s)?;
    let num = product(s.field(), xi).mean();
    let den = grad_energy(xi) + hminus1_energy(&advect(u, xi));
    Ok(num * num / den)
}

/// The lower quotient for the radial cutoff ξ_δ, with ∇ξ_δ taken analytically.
pub fn cutoff_quotient<T: Real>(u: &VectorFieldPolar<T>, s: &Source<T>, delta: T) -> Result<T> {
    same_grid(u, s)?;
    let g = s.grid();
    let chi = CutoffSet::wall(T::one() - delta);
    let (val, der): (Vec<T>, Vec<T>) = g
        .r_nodes()
        .iter()
        .map(|&r| {
            let [c, dc, _] = chi.eval(0, r);
            (c, dc)
        })
        .unzip();
    let num = s.field().scale_rows(&val, Parity::Scalar).mean();
    let mut dxi = SpectralScalar::zeros(g, Parity::Vector);
    for (k, &v) in der.iter().enumerate() {
        dxi.set_a(0, k, v);
    }
    let adv = u.r.scale_rows(&der, Parity::Scalar);
    Ok(num * num / (dxi.mean_square() + hminus1_energy(&adv)))
}

/// 32 log-spaced widths in [max(1/Pe, 1e-4), 0.5].
pub fn default_deltas<T: Real>(pe: T) -> Vec<T> {
    let lo = (T::one() / pe).max(lit(1e-4)).min(lit(0.5));
    let hi = lit::<T>(0.5);
    let n = 32;
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * cnt::<T>(i) / cnt::<T>(n - 1)).exp())
        .collect()
}

/// Maximum of the cutoff quotient over `deltas`, with its argmax.
pub fn lower_bound_scan<T: Real>(u: &VectorFieldPolar<T>, s: &Source<T>, deltas: &[T]) -> Result<(T, T)> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("empty delta grid".into()));
    }
    if !(s.mean() > T::zero()) {
        return Err(Error::InadmissibleSource("lower bound needs positive mean heating".into()));
    }
    let vals: Vec<T> = deltas.par_iter().map(|&d| cutoff_quotient(u, s, d)).collect::<Result<_>>()?;
    let (i, v) = vals
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok((v, deltas[i]))
}

/// Certified lower bound on ⟨|∇T|²⟩ for this design rescaled to `pe`.
pub fn lower_bound_certify<T: Real>(d: &FlowDesign<T>, s: &Source<T>, pe: T, c: Constraint) -> Result<(T, T)> {
    check_pe(pe)?;
    let scaled = d.rescale_to_pe(pe, c)?;
    lower_bound_scan(scaled.velocity(), s, &default_deltas(pe))
}

/// Upper bound with the certified lower bound filled in.
pub fn bound_report<T: Real>(d: &FlowDesign<T>, s: &Source<T>, pe: T, c: Constraint) -> Result<BoundReport<T>> {
    let mut rep = upper_bound(d, s, pe, c)?;
    let (lower, delta) = lower_bound_certify(d, s, pe, c)?;
    rep.lower = Some(lower);
    rep.delta_star = Some(delta);
    Ok(rep)
}
