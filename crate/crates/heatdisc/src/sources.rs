//! Heat sources f(r, θ) and the derived radial flux F and potential g.

use std::fmt;
use std::sync::Arc;

use crate::disc::{Parity, PolarGrid, SpectralScalar};
use crate::error::{Error, Result};
use crate::linalg::gauss_legendre;
use crate::real::{cnt, lit, Real};

type ScalarFn<T> = dyn Fn(T, T) -> T + Send + Sync;
type GradFn<T> = dyn Fn(T, T) -> [T; 2] + Send + Sync;
type HessFn<T> = dyn Fn(T, T) -> [T; 3] + Send + Sync;

/// User-supplied source with analytic derivatives.
///
/// `grad` returns (∂_r f, (1/r)∂_θ f); `hess` returns the Hessian in the
/// orthonormal polar frame as (H_rr, H_rθ, H_θθ).
#[derive(Clone)]
pub struct CustomSource<T> {
    pub name: String,
    pub f: Arc<ScalarFn<T>>,
    pub grad: Arc<GradFn<T>>,
    pub hess: Arc<HessFn<T>>,
}

/// Analytic description of a heat source.
#[derive(Clone)]
pub enum SourceKind<T> {
    /// f = 1.
    Constant,
    /// f = exp(-a r²).
    GaussianCenter { a: T },
    /// f = exp(-a (1 - r)²).
    GaussianRing { a: T },
    /// f = sin²(k θ).
    Quadrupole { k: usize },
    Custom(CustomSource<T>),
}

impl<T: Real> fmt::Debug for SourceKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl<T: Real> SourceKind<T> {
    /// Parses `name[:param]`, e.g. `gaussian_center:4` or `quadrupole`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        let num = |default: f64| -> Result<f64> {
            match param {
                None => Ok(default),
                Some(p) => p
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad source parameter '{p}'"))),
            }
        };
        match name {
            "constant" => Ok(SourceKind::Constant),
            "gaussian_center" => Ok(SourceKind::GaussianCenter { a: lit(num(4.0)?) }),
            "gaussian_ring" => Ok(SourceKind::GaussianRing { a: lit(num(4.0)?) }),
            "quadrupole" => {
                let k = num(2.0)?;
                if k < 1.0 || k.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!("quadrupole order {k} must be a positive integer")));
                }
                Ok(SourceKind::Quadrupole { k: k as usize })
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown source '{other}' (expected constant, gaussian_center, gaussian_ring, quadrupole)"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SourceKind::Constant => "constant".into(),
            SourceKind::GaussianCenter { a } => format!("gaussian_center:{a}"),
            SourceKind::GaussianRing { a } => format!("gaussian_ring:{a}"),
            SourceKind::Quadrupole { k } => format!("quadrupole:{k}"),
            SourceKind::Custom(c) => format!("custom:{}", c.name),
        }
    }

    /// Whether f(r, -θ) = f(r, θ).
    pub fn is_reflection_symmetric(&self) -> bool {
        !matches!(self, SourceKind::Custom(_))
    }

    pub fn eval(&self, r: T, th: T) -> T {
        match self {
            SourceKind::Constant => T::one(),
            SourceKind::GaussianCenter { a } => (-*a * r * r).exp(),
            SourceKind::GaussianRing { a } => (-*a * (T::one() - r).powi(2)).exp(),
            SourceKind::Quadrupole { k } => (cnt::<T>(*k) * th).sin().powi(2),
            SourceKind::Custom(c) => (c.f)(r, th),
        }
    }

    /// (∂_r f, (1/r) ∂_θ f).
    pub fn grad(&self, r: T, th: T) -> [T; 2] {
        let two = lit::<T>(2.0);
        match self {
            SourceKind::Constant => [T::zero(); 2],
            SourceKind::GaussianCenter { a } => [-two * *a * r * self.eval(r, th), T::zero()],
            SourceKind::GaussianRing { a } => [two * *a * (T::one() - r) * self.eval(r, th), T::zero()],
            SourceKind::Quadrupole { k } => {
                let kk = cnt::<T>(*k);
                [T::zero(), kk * (two * kk * th).sin() / r]
            }
            SourceKind::Custom(c) => (c.grad)(r, th),
        }
    }

    /// Polar-frame Hessian (H_rr, H_rθ, H_θθ).
    pub fn hess(&self, r: T, th: T) -> [T; 3] {
        let two = lit::<T>(2.0);
        let four = lit::<T>(4.0);
        match self {
            SourceKind::Constant => [T::zero(); 3],
            SourceKind::GaussianCenter { a } => {
                let f = self.eval(r, th);
                [(four * *a * *a * r * r - two * *a) * f, T::zero(), -two * *a * f]
            }
            SourceKind::GaussianRing { a } => {
                let f = self.eval(r, th);
                let d = T::one() - r;
                [(four * *a * *a * d * d - two * *a) * f, T::zero(), two * *a * d * f / r]
            }
            SourceKind::Quadrupole { k } => {
                let kk = cnt::<T>(*k);
                let ir2 = T::one() / (r * r);
                [T::zero(), -kk * (two * kk * th).sin() * ir2, two * kk * kk * (two * kk * th).cos() * ir2]
            }
            SourceKind::Custom(c) => (c.hess)(r, th),
        }
    }

    /// g(r, θ) = (1/r) ∫₀^r ρ f(ρ, θ) dρ at an arbitrary point.
    pub fn g_at(&self, r: T, th: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        let (x, w) = gauss_legendre(24);
        let half = r / lit(2.0);
        let s: T = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| {
                let rho = half * (T::one() + lit(xi));
                lit::<T>(wi) * rho * self.eval(rho, th)
            })
            .sum();
        half * s / r
    }
}

/// A heat source bound to a grid, with cached samples and derived fields.
#[derive(Clone, Debug)]
pub struct Source<T: Real> {
    kind: SourceKind<T>,
    f: SpectralScalar<T>,
    g: SpectralScalar<T>,
    mean: T,
    c0: T,
}

impl<T: Real> Source<T> {
    /// Samples `kind` on `grid` and builds F and g. Rejects ⟨f⟩ ≤ 0.
    pub fn new(kind: SourceKind<T>, grid: &Arc<PolarGrid<T>>) -> Result<Self> {
        let f = SpectralScalar::sample(grid, Parity::Scalar, |r, t| kind.eval(r, t));
        let mean = f.mean();
        let scale = f.mean_square().sqrt();
        if !(mean > lit::<T>(1e-12) * scale) {
            return Err(Error::InadmissibleSource(format!(
                "mean heating {:.3e} is not positive",
                mean.to_f64().unwrap()
            )));
        }
        let c0 = SpectralScalar::sample(grid, Parity::Scalar, |r, t| {
            let v = kind.eval(r, t);
            let [gr, gt] = kind.grad(r, t);
            let [hrr, hrt, htt] = kind.hess(r, t);
            v * v + gr * gr + gt * gt + hrr * hrr + lit::<T>(2.0) * hrt * hrt + htt * htt
        })
        .mean();
        if !c0.is_finite() {
            return Err(Error::InadmissibleSource("c0 is not finite".into()));
        }
        let g = radial_potential_of(&f);
        Ok(Self { kind, f, g, mean, c0 })
    }

    pub fn kind(&self) -> &SourceKind<T> {
        &self.kind
    }
    pub fn grid(&self) -> &Arc<PolarGrid<T>> {
        self.f.grid()
    }
    /// Sampled f.
    pub fn field(&self) -> &SpectralScalar<T> {
        &self.f
    }
    /// ⟨f⟩.
    pub fn mean(&self) -> T {
        self.mean
    }
    /// ⟨|f|² + |∇f|² + |∇∇f|²⟩ by collocation quadrature.
    pub fn c0(&self) -> T {
        self.c0
    }
    /// g(r, θ) = (1/r) ∫₀^r ρ f(ρ, θ) dρ, so that ∇·(g ê_r) = f.
    pub fn radial_potential(&self) -> &SpectralScalar<T> {
        &self.g
    }
    /// F(r) = (1/2πr) ∫_{D_r} f, the θ-mean of g.
    pub fn cumulative_flux(&self) -> Vec<T> {
        (0..self.grid().nr()).map(|k| self.g.a(0, k)).collect()
    }
}

/// Cumulative composite quadrature of ρ f(ρ) per mode, divided by r.
fn radial_potential_of<T: Real>(f: &SpectralScalar<T>) -> SpectralScalar<T> {
    let grid = f.grid();
    let nr = grid.nr();
    let nc = grid.ncoef();
    let src = f.data();
    let mut out = vec![T::zero(); nr * nc];
    for c in 0..nc {
        let cum = grid.cum(Parity::Scalar.class(PolarGrid::<T>::mode_of(c)));
        let mut acc = T::zero();
        for k in 0..nr {
            acc = acc + cum[k].apply(|j| src[j * nc + c]);
            out[k * nc + c] = acc * grid.inv_r()[k];
        }
    }
    SpectralScalar::from_data(grid, Parity::Vector, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::{divergence, theta_average, VectorFieldPolar};

    fn grid() -> Arc<PolarGrid<f64>> {
        PolarGrid::new(256, 16, 2.0).unwrap()
    }

    #[test]
    fn mean_heating_and_admissibility() {
        let g = grid();
        let c = Source::new(SourceKind::Constant, &g).unwrap();
        assert!((c.mean() - 1.0).abs() < 1e-12);
        assert!((c.c0() - 1.0).abs() < 1e-12);
        let q = Source::new(SourceKind::Quadrupole { k: 2 }, &g).unwrap();
        assert!((q.mean() - 0.5).abs() < 1e-12);
        let cos = SourceKind::Custom(CustomSource {
            name: "cos".into(),
            f: Arc::new(|_, t: f64| t.cos()),
            grad: Arc::new(|r, t: f64| [0.0, -t.sin() / r]),
            hess: Arc::new(|r, t: f64| [0.0, t.sin() / (r * r), -t.cos() / (r * r)]),
        });
        assert!(matches!(Source::new(cos, &g), Err(Error::InadmissibleSource(_))));
    }

    #[test]
    fn cumulative_flux_closed_forms() {
        let g = grid();
        let r = g.r_nodes();
        let one = Source::new(SourceKind::Constant, &g).unwrap();
        for (k, v) in one.cumulative_flux().iter().enumerate() {
            assert!((v - r[k] / 2.0).abs() < 1e-13);
        }
        let gauss = Source::new(SourceKind::GaussianCenter { a: 4.0 }, &g).unwrap();
        for (k, v) in gauss.cumulative_flux().iter().enumerate() {
            let exact = (1.0 - (-4.0 * r[k] * r[k]).exp()) / (8.0 * r[k]);
            assert!((v - exact).abs() < 1e-8, "k={k}");
        }
        let quad = Source::new(SourceKind::Quadrupole { k: 2 }, &g).unwrap();
        for (k, v) in quad.cumulative_flux().iter().enumerate() {
            assert!((v - r[k] / 4.0).abs() < 1e-13);
        }
    }

    #[test]
    fn potential_closed_forms_and_divergence() {
        let g = grid();
        let one = Source::new(SourceKind::Constant, &g).unwrap();
        let pot = one.radial_potential();
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((pot.a(0, k) - r / 2.0).abs() < 1e-13);
        }
        let quad = Source::new(SourceKind::Quadrupole { k: 2 }, &g).unwrap();
        let pot = quad.radial_potential();
        for (k, &r) in g.r_nodes().iter().enumerate() {
            assert!((pot.a(0, k) - r / 4.0).abs() < 1e-13);
            assert!((pot.a(4, k) + r / 4.0).abs() < 1e-13);
        }
        for kind in [
            SourceKind::Constant,
            SourceKind::GaussianCenter { a: 4.0 },
            SourceKind::GaussianRing { a: 4.0 },
            SourceKind::Quadrupole { k: 2 },
        ] {
            let s = Source::new(kind, &g).unwrap();
            let v = VectorFieldPolar::new(s.radial_potential().clone(), SpectralScalar::zeros(&g, Parity::Vector)).unwrap();
            let d = divergence(&v).unwrap().sub(s.field());
            // The ring profile has a |r| cusp at the pole, so compare in mean square.
            assert!(d.mean_square().sqrt() < 1e-5, "{:?}: {}", s.kind(), d.mean_square().sqrt());
            let avg = theta_average(s.radial_potential());
            assert_eq!(avg, s.cumulative_flux());
            let fmax = 1.0;
            for (k, &fl) in s.cumulative_flux().iter().enumerate() {
                assert!(fl >= 0.0 && fl <= fmax * g.r_nodes()[k] / 2.0 + 1e-14);
            }
        }
    }

    #[test]
    fn pointwise_potential_matches_grid() {
        let g = grid();
        let s = Source::new(SourceKind::GaussianRing { a: 4.0 }, &g).unwrap();
        for k in [3usize, 100, 250] {
            let r = g.r_nodes()[k];
            assert!((s.kind().g_at(r, 0.3) - s.radial_potential().eval_at_node(k, 0.3)).abs() < 1e-6);
        }
    }

    #[test]
    fn parse_names() {
        assert!(matches!(SourceKind::<f64>::parse("constant"), Ok(SourceKind::Constant)));
        assert!(matches!(SourceKind::<f64>::parse("gaussian_ring:3"), Ok(SourceKind::GaussianRing { a }) if a == 3.0));
        assert!(SourceKind::<f64>::parse("nope").is_err());
        assert!(SourceKind::<f64>::parse("quadrupole:1.5").is_err());
    }
}
