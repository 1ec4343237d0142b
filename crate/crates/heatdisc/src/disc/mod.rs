//! Polar grid, spectral fields and calculus on the unit disc.

mod calculus;
mod field;
mod grid;

pub use calculus::{
    advect, div_by_r, divergence, grad_energy, gradient, laplacian, mean_over_disc, mul_by_r,
    perp_gradient, product, product_sum, radial_derivative, theta_antiderivative, theta_average,
    theta_derivative,
};
pub use field::{SpectralScalar, VectorFieldPolar};
pub use grid::{Parity, PolarGrid};

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn grid(nr: usize, modes: usize) -> Arc<PolarGrid<f64>> {
        PolarGrid::new(nr, modes, 2.0).unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn uniform_grid_nodes() {
        let g = PolarGrid::<f64>::new(16, 4, 1.0).unwrap();
        for (i, &r) in g.r_nodes().iter().enumerate() {
            assert!((r - (i + 1) as f64 / 16.0).abs() < 1e-15);
        }
        assert!(g.ntheta() >= 12);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(PolarGrid::<f64>::new(8, 4, 2.0).is_err());
        assert!(PolarGrid::<f64>::new(32, 2, 2.0).is_err());
        assert!(PolarGrid::<f64>::new(32, 8, 0.5).is_err());
    }

    #[test]
    fn stretched_grid_clusters_at_wall() {
        let g = grid(256, 128);
        let r = g.r_nodes();
        let first = r[0];
        let last = r[255] - r[254];
        assert!(last < 1.0 / 256.0 && last < first);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(r[255], 1.0);
    }

    #[test]
    fn quadrature_weights_give_disc_area() {
        for &(nr, p) in &[(16, 1.0), (64, 2.0), (300, 1.5), (1024, 2.0)] {
            let g = PolarGrid::<f64>::new(nr, 8, p).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let area: f64 = g.weights().iter().sum::<f64>() * 2.0 * std::f64::consts::PI;
            assert!((area / std::f64::consts::PI - 1.0).abs() < 1e-10, "nr={nr}: {area}");
        }
    }

    #[test]
    fn mean_of_even_powers() {
        let g = grid(256, 8);
        for k in 0..=4 {
            let f = SpectralScalar::radial(&g, Parity::Scalar, |r| r.powi(2 * k));
            assert!((f.mean() - 1.0 / (k as f64 + 1.0)).abs() < 1e-8, "k={k}");
        }
        let q = SpectralScalar::sample(&g, Parity::Scalar, |_, t| (2.0 * t).sin().powi(2));
        assert!((q.mean() - 0.5).abs() < 1e-12);
        let avg = theta_average(&q);
        assert!(avg.iter().all(|a| (a - 0.5).abs() < 1e-13));
    }

    #[test]
    fn round_trip_is_identity() {
        let g = grid(64, 16);
        let f = SpectralScalar::sample(&g, Parity::Scalar, |r, t| {
            1.0 + r * r * (3.0 * t).cos() - r.powi(5) * (7.0 * t).sin() + r.powi(15) * (15.0 * t).cos()
        });
        let back = SpectralScalar::from_physical(&g, Parity::Scalar, &f.to_physical());
        let d: Vec<f64> = back.data().iter().zip(f.data()).map(|(a, b)| a - b).collect();
        assert!(max_abs(&d) < 1e-12);
    }

    #[test]
    fn parseval_matches_collocation_average() {
        let g = grid(64, 16);
        let f = SpectralScalar::sample(&g, Parity::Scalar, |r, t| r * r * (1.0 + (2.0 * t).cos()) + r.powi(3) * t.sin());
        let sq = product(&f, &f);
        assert!((sq.mean() - f.mean_square()).abs() < 1e-10);
    }

    #[test]
    fn gradient_examples() {
        let g = grid(128, 8);
        let f = SpectralScalar::radial(&g, Parity::Scalar, |r| r * r);
        let gr = gradient(&f);
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((gr.r.a(0, k) - 2.0 * r).abs() < 1e-9);
        }
        assert!(gr.t.max_abs_coef() < 1e-14);

        let f = SpectralScalar::sample(&g, Parity::Scalar, |r, t| r * t.sin());
        let gr = gradient(&f);
        for k in 0..g.nr() {
            assert!((gr.r.b(1, k) - 1.0).abs() < 1e-9);
            assert!((gr.t.a(1, k) - 1.0).abs() < 1e-9);
        }

        let f = SpectralScalar::radial(&g, Parity::Scalar, |r| (r * r - 1.0) / 4.0);
        let gr = gradient(&f);
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((gr.r.a(0, k) - r / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn divergence_examples() {
        let g = grid(128, 8);
        let v = VectorFieldPolar::new(
            SpectralScalar::radial(&g, Parity::Vector, |r| r),
            SpectralScalar::zeros(&g, Parity::Vector),
        )
        .unwrap();
        let d = divergence(&v).unwrap();
        assert!(d.to_physical().iter().all(|x| (x - 2.0).abs() < 1e-9));
        let v = VectorFieldPolar::new(
            SpectralScalar::radial(&g, Parity::Vector, |r| r / 2.0),
            SpectralScalar::zeros(&g, Parity::Vector),
        )
        .unwrap();
        let d = divergence(&v).unwrap();
        assert!(d.to_physical().iter().all(|x| (x - 1.0).abs() < 1e-9));

        let psi = SpectralScalar::sample(&g, Parity::Scalar, |r, t| r * r * (2.0 * t).cos());
        let d = divergence(&perp_gradient(&psi)).unwrap();
        assert!(d.max_abs() < 1e-8);

        let other = grid(128, 8);
        let bad = VectorFieldPolar {
            r: SpectralScalar::zeros(&g, Parity::Vector),
            t: SpectralScalar::zeros(&other, Parity::Vector),
        };
        assert!(divergence(&bad).is_err());
    }

    #[test]
    fn perp_gradient_of_roll_streamfunction() {
        let g = grid(128, 8);
        let n = 2.0;
        let psi = SpectralScalar::sample(&g, Parity::Scalar, |r, t| {
            r * r / (2f64.sqrt() * n) * (n * t).cos()
        });
        let u = perp_gradient(&psi);
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((u.r.b(2, k) - r / 2f64.sqrt()).abs() < 1e-9);
            assert!((u.t.a(2, k) - 2f64.sqrt() * r / 2.0).abs() < 1e-9);
        }
        let zero = SpectralScalar::radial(&g, Parity::Scalar, |_| 3.0);
        assert!(perp_gradient(&zero).mean_square() < 1e-20);
    }

    #[test]
    fn theta_antiderivative_inverts_derivative() {
        let g = grid(32, 8);
        let f = SpectralScalar::sample(&g, Parity::Scalar, |r, t| 2.0 + r * (3.0 * t).cos() + r * r * t.sin());
        let a = theta_antiderivative(&f);
        assert!(theta_average(&a).iter().all(|x| *x == 0.0));
        let back = theta_derivative(&a);
        let mut expect = f.clone();
        for k in 0..g.nr() {
            expect.set_a(0, k, 0.0);
        }
        let d: Vec<f64> = back.data().iter().zip(expect.data()).map(|(a, b)| a - b).collect();
        assert!(max_abs(&d) < 1e-12);
        let c = SpectralScalar::sample(&g, Parity::Scalar, |_, t| (3.0 * t).cos());
        let s = theta_antiderivative(&c);
        for k in 0..g.nr() {
            assert!((s.b(3, k) - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_divergence_adjointness() {
        let g = grid(256, 16);
        let phi = SpectralScalar::sample(&g, Parity::Scalar, |r, t| 1.0 + r * r * (2.0 * t).cos() + r * t.sin());
        let v = VectorFieldPolar::new(
            SpectralScalar::sample(&g, Parity::Vector, |r, t| (1.0 - r * r) * (t.sin() + r * (2.0 * t).cos())),
            SpectralScalar::sample(&g, Parity::Vector, |r, t| r * (2.0 * t).cos() + (1.0 + r * r) * t.cos()),
        )
        .unwrap();
        let lhs = product(&phi, &divergence(&v).unwrap()).mean();
        let gr = gradient(&phi);
        let rhs = -(v.r.inner(&gr.r) + v.t.inner(&gr.t));
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn single_precision_smoke() {
        let g = PolarGrid::<f32>::new(64, 8, 2.0).unwrap();
        let f = SpectralScalar::radial(&g, Parity::Scalar, |r| r * r);
        assert!((f.mean() - 0.5).abs() < 1e-5);
    }
}
