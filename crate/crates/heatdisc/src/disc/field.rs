use std::sync::Arc;

use rayon::prelude::*;
use realfft::num_complex::Complex;

use super::grid::{Parity, PolarGrid};
use crate::error::{Error, Result};
use crate::real::{cnt, lit, Real};

/// Scalar field on the disc: per radial node, coefficients of
/// a_0 + Σ_{m≥1} a_m cos mθ + b_m sin mθ.
///
/// Storage is radius-major: `data[k * ncoef + c]` with slot 0 = a_0,
/// slot 2m-1 = a_m, slot 2m = b_m.
#[derive(Clone, Debug)]
pub struct SpectralScalar<T: Real> {
    grid: Arc<PolarGrid<T>>,
    parity: Parity,
    data: Vec<T>,
}

/// Polar components (u_r, u_θ) of a planar vector field.
#[derive(Clone, Debug)]
pub struct VectorFieldPolar<T: Real> {
    pub r: SpectralScalar<T>,
    pub t: SpectralScalar<T>,
}

impl<T: Real> VectorFieldPolar<T> {
    pub fn new(r: SpectralScalar<T>, t: SpectralScalar<T>) -> Result<Self> {
        r.same_grid(&t)?;
        Ok(Self { r, t })
    }

    pub fn zeros(grid: &Arc<PolarGrid<T>>) -> Self {
        Self {
            r: SpectralScalar::zeros(grid, Parity::Vector),
            t: SpectralScalar::zeros(grid, Parity::Vector),
        }
    }

    pub fn grid(&self) -> &Arc<PolarGrid<T>> {
        self.r.grid()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { r: self.r.scale(s), t: self.t.scale(s) }
    }

    /// ⨍ |v|².
    pub fn mean_square(&self) -> T {
        self.r.mean_square() + self.t.mean_square()
    }
}

impl<T: Real> SpectralScalar<T> {
    pub fn zeros(grid: &Arc<PolarGrid<T>>, parity: Parity) -> Self {
        Self { grid: grid.clone(), parity, data: vec![T::zero(); grid.nr() * grid.ncoef()] }
    }

    pub(crate) fn from_data(grid: &Arc<PolarGrid<T>>, parity: Parity, data: Vec<T>) -> Self {
        assert_eq!(data.len(), grid.nr() * grid.ncoef());
        Self { grid: grid.clone(), parity, data }
    }

    /// Field whose only nonzero mode is m = 0 with the given radial profile.
    pub fn radial(grid: &Arc<PolarGrid<T>>, parity: Parity, profile: impl Fn(T) -> T) -> Self {
        let mut f = Self::zeros(grid, parity);
        let nc = grid.ncoef();
        for (k, &r) in grid.r_nodes().iter().enumerate() {
            f.data[k * nc] = profile(r);
        }
        f
    }

    /// Samples `f(r, θ)` on the collocation grid and projects onto the modes.
    pub fn sample(grid: &Arc<PolarGrid<T>>, parity: Parity, f: impl Fn(T, T) -> T + Sync) -> Self {
        let nt = grid.ntheta();
        let theta: Vec<T> = (0..nt).map(|j| grid.theta(j)).collect();
        let mut phys = vec![T::zero(); grid.nr() * nt];
        phys.par_chunks_mut(nt).zip(grid.r_nodes().par_iter()).for_each(|(row, &r)| {
            for (v, &th) in row.iter_mut().zip(&theta) {
                *v = f(r, th);
            }
        });
        Self::from_physical(grid, parity, &phys)
    }

    /// Projects collocation values (radius-major, `nr × ntheta`) onto the modes.
    pub fn from_physical(grid: &Arc<PolarGrid<T>>, parity: Parity, phys: &[T]) -> Self {
        let nt = grid.ntheta();
        let nc = grid.ncoef();
        let m = grid.modes();
        assert_eq!(phys.len(), grid.nr() * nt);
        let mut data = vec![T::zero(); grid.nr() * nc];
        let r2c = grid.r2c().clone();
        let scale = T::one() / cnt::<T>(nt);
        let two = lit::<T>(2.0);
        data.par_chunks_mut(nc).zip(phys.par_chunks(nt)).for_each_init(
            || (r2c.make_input_vec(), r2c.make_output_vec(), r2c.make_scratch_vec()),
            |(inp, out, scratch), (coef, row)| {
                inp.copy_from_slice(row);
                r2c.process_with_scratch(inp, out, scratch).expect("fft sizes");
                coef[0] = out[0].re * scale;
                for mm in 1..m {
                    coef[2 * mm - 1] = two * out[mm].re * scale;
                    coef[2 * mm] = -two * out[mm].im * scale;
                }
            },
        );
        Self { grid: grid.clone(), parity, data }
    }

    /// Collocation values, radius-major `nr × ntheta`.
    pub fn to_physical(&self) -> Vec<T> {
        let g = &self.grid;
        let nt = g.ntheta();
        let nc = g.ncoef();
        let m = g.modes();
        let c2r = g.c2r().clone();
        let half = lit::<T>(0.5);
        let mut phys = vec![T::zero(); g.nr() * nt];
        phys.par_chunks_mut(nt).zip(self.data.par_chunks(nc)).for_each_init(
            || (c2r.make_input_vec(), c2r.make_output_vec(), c2r.make_scratch_vec()),
            |(spec, out, scratch), (row, coef)| {
                spec.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
                spec[0] = Complex::new(coef[0], T::zero());
                for mm in 1..m {
                    spec[mm] = Complex::new(half * coef[2 * mm - 1], -half * coef[2 * mm]);
                }
                c2r.process_with_scratch(spec, out, scratch).expect("fft sizes");
                row.copy_from_slice(out);
            },
        );
        phys
    }

    pub fn grid(&self) -> &Arc<PolarGrid<T>> {
        &self.grid
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }
    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
    /// Coefficient row at radial node k.
    pub fn row(&self, k: usize) -> &[T] {
        let nc = self.grid.ncoef();
        &self.data[k * nc..(k + 1) * nc]
    }

    /// a_m at node k.
    pub fn a(&self, m: usize, k: usize) -> T {
        let c = if m == 0 { 0 } else { 2 * m - 1 };
        self.data[k * self.grid.ncoef() + c]
    }

    /// b_m at node k (zero for m = 0).
    pub fn b(&self, m: usize, k: usize) -> T {
        if m == 0 {
            T::zero()
        } else {
            self.data[k * self.grid.ncoef() + 2 * m]
        }
    }

    pub fn set_a(&mut self, m: usize, k: usize, v: T) {
        let c = if m == 0 { 0 } else { 2 * m - 1 };
        let nc = self.grid.ncoef();
        self.data[k * nc + c] = v;
    }

    pub fn set_b(&mut self, m: usize, k: usize, v: T) {
        assert!(m > 0, "b_0 does not exist");
        let nc = self.grid.ncoef();
        self.data[k * nc + 2 * m] = v;
    }

    /// Value at an arbitrary angle on radial node k.
    pub fn eval_at_node(&self, k: usize, theta: T) -> T {
        let row = self.row(k);
        let mut s = row[0];
        for m in 1..self.grid.modes() {
            let (sn, cs) = (cnt::<T>(m) * theta).sin_cos();
            s = s + row[2 * m - 1] * cs + row[2 * m] * sn;
        }
        s
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "fields live on different grids");
        assert_eq!(self.parity, other.parity, "parity mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), parity: self.parity, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }
    pub fn scale(&self, s: T) -> Self {
        Self {
            grid: self.grid.clone(),
            parity: self.parity,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Multiplies each radial row by `factor[k]`, with the result tagged `parity`.
    pub fn scale_rows(&self, factor: &[T], parity: Parity) -> Self {
        let nc = self.grid.ncoef();
        let mut data = self.data.clone();
        for (row, &f) in data.chunks_mut(nc).zip(factor) {
            row.iter_mut().for_each(|v| *v = *v * f);
        }
        Self { grid: self.grid.clone(), parity, data }
    }

    /// Maximum absolute coefficient.
    pub fn max_abs_coef(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Maximum absolute value over the collocation grid.
    pub fn max_abs(&self) -> T {
        self.to_physical().iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// ⨍_D φ.
    pub fn mean(&self) -> T {
        let w = self.grid.weights_for(self.parity.class(0));
        let nc = self.grid.ncoef();
        let two = lit::<T>(2.0);
        w.iter().enumerate().map(|(k, &wk)| two * wk * self.data[k * nc]).sum()
    }

    /// ⨍_D φψ via Parseval.
    pub fn inner(&self, other: &Self) -> T {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "fields live on different grids");
        let class = self.parity.times(other.parity).class(0);
        let w = self.grid.weights_for(class);
        let nc = self.grid.ncoef();
        let half = lit::<T>(0.5);
        let two = lit::<T>(2.0);
        w.iter()
            .enumerate()
            .map(|(k, &wk)| {
                let a = &self.data[k * nc..(k + 1) * nc];
                let b = &other.data[k * nc..(k + 1) * nc];
                let rest: T = a[1..].iter().zip(&b[1..]).map(|(&x, &y)| x * y).sum();
                two * wk * (a[0] * b[0] + half * rest)
            })
            .sum()
    }

    /// ⨍_D φ².
    pub fn mean_square(&self) -> T {
        self.inner(self)
    }
}
