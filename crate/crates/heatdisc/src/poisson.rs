//! Inverse Dirichlet Laplacian and the non-local quadratic functionals built on it.

use rayon::prelude::*;

use crate::disc::{
    divergence, grad_energy, mul_by_r, radial_derivative, theta_antiderivative, Parity, PolarGrid,
    SpectralScalar, VectorFieldPolar,
};
use crate::real::Real;

/// Solves Δw = ρ with w = 0 at r = 1, mode by mode.
pub fn inv_laplacian_dirichlet<T: Real>(rho: &SpectralScalar<T>) -> SpectralScalar<T> {
    assert_eq!(rho.parity(), Parity::Scalar, "Poisson data must be a scalar field");
    let g = rho.grid();
    let nr = g.nr();
    let nc = g.ncoef();
    let lu = g.poisson_factors();
    let src = rho.data();
    let cols: Vec<Vec<T>> = (0..nc)
        .into_par_iter()
        .map(|c| {
            let mut b: Vec<T> = (0..nr - 1).map(|k| src[k * nc + c]).collect();
            lu[PolarGrid::<T>::mode_of(c)].solve(&mut b);
            b
        })
        .collect();
    let mut out = vec![T::zero(); nr * nc];
    for (c, col) in cols.iter().enumerate() {
        for (k, &v) in col.iter().enumerate() {
            out[k * nc + c] = v;
        }
    }
    SpectralScalar::from_data(g, Parity::Scalar, out)
}

/// ⨍ |∇Δ⁻¹ρ|².
pub fn hminus1_energy<T: Real>(rho: &SpectralScalar<T>) -> T {
    grad_energy(&inv_laplacian_dirichlet(rho))
}

/// Q(v) = min_φ ⨍ |∇⊥φ + v - v̄_r ê_r|², evaluated as ⨍|∇Δ⁻¹∇·w|² with
/// w = v minus the θ-mean of its radial component.
pub fn qform<T: Real>(v: &VectorFieldPolar<T>) -> T {
    let mut w = v.clone();
    for k in 0..v.grid().nr() {
        w.r.set_a(0, k, T::zero());
    }
    hminus1_energy(&divergence(&w).expect("components share a grid"))
}

/// ⨍ |∂_r(r ∂_θ⁻¹ v_r) + v_θ|², the value of Q's functional at the
/// particular test function φ = r ∂_θ⁻¹ v_r.
pub fn qform_upper<T: Real>(v: &VectorFieldPolar<T>) -> T {
    let phi = mul_by_r(&theta_antiderivative(&v.r));
    radial_derivative(&phi).add(&v.t).mean_square()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::{laplacian, perp_gradient, product};
    use crate::linalg::gauss_legendre;
    use std::sync::Arc;

    fn grid(nr: usize, modes: usize) -> Arc<PolarGrid<f64>> {
        PolarGrid::new(nr, modes, 2.0).unwrap()
    }

    #[test]
    fn radial_and_mode_one_solutions() {
        let g = grid(128, 8);
        let one = SpectralScalar::radial(&g, Parity::Scalar, |_| 1.0);
        let w = inv_laplacian_dirichlet(&one);
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((w.a(0, k) - (r * r - 1.0) / 4.0).abs() < 1e-12);
        }
        let rho = SpectralScalar::sample(&g, Parity::Scalar, |r, t| r * t.sin());
        let w = inv_laplacian_dirichlet(&rho);
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((w.b(1, k) - (r.powi(3) - r) / 8.0).abs() < 1e-12);
        }
        let zero = SpectralScalar::zeros(&g, Parity::Scalar);
        assert_eq!(inv_laplacian_dirichlet(&zero).max_abs_coef(), 0.0);
    }

    #[test]
    fn hminus1_examples() {
        let g = grid(512, 8);
        let one = SpectralScalar::radial(&g, Parity::Scalar, |_| 1.0);
        assert!((hminus1_energy(&one) - 0.125).abs() < 1e-8);
        let rho = SpectralScalar::sample(&g, Parity::Scalar, |r, t| r * t.sin());
        assert!((hminus1_energy(&rho) - 1.0 / 96.0).abs() < 1e-8);
        assert_eq!(hminus1_energy(&SpectralScalar::zeros(&g, Parity::Scalar)), 0.0);
    }

    #[test]
    fn laplacian_inverts_and_integrates_by_parts() {
        let g = grid(256, 16);
        let rho = SpectralScalar::sample(&g, Parity::Scalar, |r, t| {
            (-4.0 * r * r).exp() + r.powi(3) * (3.0 * t).cos() + r * r * (1.0 - r) * (2.0 * t).sin()
        });
        let w = inv_laplacian_dirichlet(&rho);
        let lw = laplacian(&w);
        let scale = rho.max_abs_coef();
        for k in 0..g.nr() - 1 {
            for (a, b) in lw.row(k).iter().zip(rho.row(k)) {
                assert!((a - b).abs() <= 1e-8 * scale);
            }
        }
        let e = hminus1_energy(&rho);
        let ibp = -product(&rho, &w).mean();
        assert!((e - ibp).abs() <= 1e-8 * e, "{e} vs {ibp}");
    }

    #[test]
    fn qform_of_radial_and_solenoidal_fields_vanishes() {
        let g = grid(256, 16);
        let v = VectorFieldPolar::new(
            SpectralScalar::radial(&g, Parity::Vector, |r| r * (1.0 - r)),
            SpectralScalar::zeros(&g, Parity::Vector),
        )
        .unwrap();
        assert!(qform(&v) < 1e-20);
        assert!(qform_upper(&v) < 1e-20);
        let psi = SpectralScalar::sample(&g, Parity::Scalar, |r, t| r.powi(3) * (3.0 * t).sin() + r * r * (2.0 * t).cos());
        assert!(qform(&perp_gradient(&psi)) < 1e-8);
    }

    #[test]
    fn qform_cos2theta_radial_field() {
        // Ritz minimization of ⨍|∇⊥φ + cos2θ ê_r|² over φ = b(r) sin 2θ,
        // b = Σ c_j r^j, evaluated with Gauss-Legendre in r.
        let oracle = {
            let nb = 12;
            let (xs, ws) = gauss_legendre(80);
            let mut a = vec![vec![0.0; nb]; nb];
            let mut rhs = vec![0.0; nb];
            let mut c0 = 0.0;
            for (&x, &w) in xs.iter().zip(&ws) {
                let r = 0.5 * (x + 1.0);
                let wr = 0.5 * w * r;
                // e_r component: 1 - 2b/r, e_θ component: b'
                let er: Vec<f64> = (1..=nb).map(|j| -2.0 * r.powi(j as i32 - 1)).collect();
                let et: Vec<f64> = (1..=nb).map(|j| j as f64 * r.powi(j as i32 - 1)).collect();
                for i in 0..nb {
                    for j in 0..nb {
                        a[i][j] += wr * (er[i] * er[j] + et[i] * et[j]);
                    }
                    rhs[i] -= wr * er[i];
                }
                c0 += wr;
            }
            let c = solve_dense(a.clone(), rhs.clone());
            let quad: f64 = (0..nb).map(|i| (0..nb).map(|j| c[i] * a[i][j] * c[j]).sum::<f64>()).sum();
            let lin: f64 = (0..nb).map(|i| c[i] * rhs[i]).sum();
            quad - 2.0 * lin + c0
        };
        let g = grid(2048, 8);
        let v = VectorFieldPolar::new(
            SpectralScalar::sample(&g, Parity::Vector, |_, t| (2.0 * t).cos()),
            SpectralScalar::zeros(&g, Parity::Vector),
        )
        .unwrap();
        assert!((qform(&v) - oracle).abs() < 1e-6, "{} vs {oracle}", qform(&v));
        assert!((oracle - 1.0 / 18.0).abs() < 1e-9);
    }

    #[test]
    fn qform_upper_dominates_on_roll_vectors() {
        let g = grid(256, 64);
        for n in [8usize, 16] {
            let nf = n as f64;
            let v = VectorFieldPolar::new(
                SpectralScalar::sample(&g, Parity::Vector, |r, t| -0.5 * r * (2.0 * nf * t).cos()),
                SpectralScalar::sample(&g, Parity::Vector, |r, t| r / nf * (2.0 * nf * t).sin()),
            )
            .unwrap();
            let up = qform_upper(&v);
            assert!((up - 1.0 / (16.0 * nf * nf)).abs() < 1e-10);
            let q = qform(&v);
            assert!((q - 1.0 / (16.0 * (nf + 1.0).powi(2))).abs() < 1e-7 * up);
            assert!(up >= q);
        }
    }

    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= l * a[k][j];
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            x[k] = (b[k] - (k + 1..n).map(|j| a[k][j] * x[j]).sum::<f64>()) / a[k][k];
        }
        x
    }
}
