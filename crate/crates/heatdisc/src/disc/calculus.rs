use std::sync::Arc;

use rayon::prelude::*;

use super::field::{SpectralScalar, VectorFieldPolar};
use super::grid::{Parity, PolarGrid};
use crate::error::Result;
use crate::real::{cnt, Real};

/// ∂_r φ by the folded fourth-order stencils; parity flips.
pub fn radial_derivative<T: Real>(phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    apply_stencil(phi, |g, c| g.d1(c), phi.parity().flip())
}

fn apply_stencil<T: Real>(
    phi: &SpectralScalar<T>,
    pick: impl for<'a> Fn(&'a PolarGrid<T>, usize) -> &'a [super::grid::Stencil<T>] + Sync,
    out_parity: Parity,
) -> SpectralScalar<T> {
    let g = phi.grid();
    let nc = g.ncoef();
    let src = phi.data();
    let par = phi.parity();
    let st = [pick(g, 0), pick(g, 1)];
    let mut out = vec![T::zero(); src.len()];
    out.par_chunks_mut(nc).enumerate().for_each(|(k, row)| {
        for (c, v) in row.iter_mut().enumerate() {
            let s = &st[par.class(PolarGrid::<T>::mode_of(c))][k];
            *v = s.apply(|j| src[j * nc + c]);
        }
    });
    SpectralScalar::from_data(g, out_parity, out)
}

/// ∂_θ φ, exact per mode.
pub fn theta_derivative<T: Real>(phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    let g = phi.grid();
    let nc = g.ncoef();
    let mut out = vec![T::zero(); phi.data().len()];
    for (dst, src) in out.chunks_mut(nc).zip(phi.data().chunks(nc)) {
        for m in 1..g.modes() {
            let mm = cnt::<T>(m);
            dst[2 * m - 1] = mm * src[2 * m];
            dst[2 * m] = -mm * src[2 * m - 1];
        }
    }
    SpectralScalar::from_data(g, phi.parity(), out)
}

/// Mean-free θ-antiderivative ∂_θ⁻¹φ.
pub fn theta_antiderivative<T: Real>(phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    let g = phi.grid();
    let nc = g.ncoef();
    let mut out = vec![T::zero(); phi.data().len()];
    for (dst, src) in out.chunks_mut(nc).zip(phi.data().chunks(nc)) {
        for m in 1..g.modes() {
            let mm = cnt::<T>(m);
            dst[2 * m - 1] = -src[2 * m] / mm;
            dst[2 * m] = src[2 * m - 1] / mm;
        }
    }
    SpectralScalar::from_data(g, phi.parity(), out)
}

/// a_0(r) at every radial node.
pub fn theta_average<T: Real>(phi: &SpectralScalar<T>) -> Vec<T> {
    (0..phi.grid().nr()).map(|k| phi.a(0, k)).collect()
}

/// φ / r; parity flips.
pub fn div_by_r<T: Real>(phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    phi.scale_rows(phi.grid().inv_r(), phi.parity().flip())
}

/// r φ; parity flips.
pub fn mul_by_r<T: Real>(phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    phi.scale_rows(phi.grid().r_nodes(), phi.parity().flip())
}

/// (∂_r φ, (1/r) ∂_θ φ).
pub fn gradient<T: Real>(phi: &SpectralScalar<T>) -> VectorFieldPolar<T> {
    VectorFieldPolar { r: radial_derivative(phi), t: div_by_r(&theta_derivative(phi)) }
}

/// (1/r) ∂_r (r v_r) + (1/r) ∂_θ v_θ.
pub fn divergence<T: Real>(v: &VectorFieldPolar<T>) -> Result<SpectralScalar<T>> {
    v.r.same_grid(&v.t)?;
    let flux = radial_derivative(&mul_by_r(&v.r));
    let turn = theta_derivative(&v.t);
    Ok(div_by_r(&flux.add(&turn)))
}

/// u = ∇⊥ψ = (-(1/r) ∂_θ ψ, ∂_r ψ). Discretely divergence-free because the
/// radial stencil commutes with ∂_θ.
pub fn perp_gradient<T: Real>(psi: &SpectralScalar<T>) -> VectorFieldPolar<T> {
    VectorFieldPolar {
        r: div_by_r(&theta_derivative(psi)).scale(-T::one()),
        t: radial_derivative(psi),
    }
}

/// Δφ with the same stencils as the Poisson solver (unperturbed).
pub fn laplacian<T: Real>(phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    let g = phi.grid();
    let nc = g.ncoef();
    let src = phi.data();
    let par = phi.parity();
    let (d1, d2) = ([g.d1(0), g.d1(1)], [g.d2(0), g.d2(1)]);
    let inv_r = g.inv_r();
    let mut out = vec![T::zero(); src.len()];
    out.par_chunks_mut(nc).enumerate().for_each(|(k, row)| {
        let ir = inv_r[k];
        for (c, v) in row.iter_mut().enumerate() {
            let m = PolarGrid::<T>::mode_of(c);
            let pc = par.class(m);
            let f = |j: usize| src[j * nc + c];
            *v = d2[pc][k].apply(f) + ir * d1[pc][k].apply(f) - cnt::<T>(m * m) * ir * ir * src[k * nc + c];
        }
    });
    SpectralScalar::from_data(g, par, out)
}

/// ⨍_D φ.
pub fn mean_over_disc<T: Real>(phi: &SpectralScalar<T>) -> T {
    phi.mean()
}

/// ⨍_D |∇φ|² via Parseval, without forming products on the collocation grid.
pub fn grad_energy<T: Real>(phi: &SpectralScalar<T>) -> T {
    gradient(phi).mean_square()
}

/// Σ_i a_i b_i evaluated pseudospectrally: every factor goes to the
/// collocation grid, products are summed, and the result is projected back.
pub fn product_sum<T: Real>(terms: &[(&SpectralScalar<T>, &SpectralScalar<T>)]) -> SpectralScalar<T> {
    assert!(!terms.is_empty());
    let g = terms[0].0.grid().clone();
    let parity = terms[0].0.parity().times(terms[0].1.parity());
    for (a, b) in terms {
        assert!(Arc::ptr_eq(a.grid(), &g) && Arc::ptr_eq(b.grid(), &g), "fields live on different grids");
        assert_eq!(a.parity().times(b.parity()), parity, "inconsistent product parity");
    }
    let mut acc = vec![T::zero(); g.nr() * g.ntheta()];
    for (a, b) in terms {
        let pa = a.to_physical();
        let pb = b.to_physical();
        acc.par_iter_mut().zip(pa.par_iter().zip(pb.par_iter())).for_each(|(s, (&x, &y))| {
            *s = *s + x * y;
        });
    }
    SpectralScalar::from_physical(&g, parity, &acc)
}

/// Pointwise product of two fields (dealiased).
pub fn product<T: Real>(a: &SpectralScalar<T>, b: &SpectralScalar<T>) -> SpectralScalar<T> {
    product_sum(&[(a, b)])
}

/// v·∇φ formed pseudospectrally.
pub fn advect<T: Real>(v: &VectorFieldPolar<T>, phi: &SpectralScalar<T>) -> SpectralScalar<T> {
    let grad = gradient(phi);
    product_sum(&[(&v.r, &grad.r), (&v.t, &grad.t)])
}
