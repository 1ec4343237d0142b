use std::sync::{Arc, OnceLock};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::linalg::{fd_weights, gauss_legendre, BandLu};
use crate::real::{cnt, lit, Real};

/// Parity class of a spectral field under the reflection r -> -r.
///
/// Scalars carry mode-m coefficients with parity (-1)^m; polar components of
/// vector fields carry (-1)^(m+1). Pole closures use the matching reflection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Scalar,
    Vector,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Scalar => Parity::Vector,
            Parity::Vector => Parity::Scalar,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Scalar
        } else {
            Parity::Vector
        }
    }

    /// 0 if the mode-m radial profile is even, 1 if odd.
    #[inline]
    pub fn class(self, m: usize) -> usize {
        match self {
            Parity::Scalar => m & 1,
            Parity::Vector => (m + 1) & 1,
        }
    }
}

/// Folded finite-difference stencil on physical node indices.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil<T> {
    pub cols: [usize; 5],
    pub w: [T; 5],
    pub len: usize,
}

impl<T: Real> Stencil<T> {
    fn fold(entries: &[(usize, T)]) -> Self {
        let mut s = Stencil { cols: [0; 5], w: [T::zero(); 5], len: 0 };
        for &(c, w) in entries {
            match s.cols[..s.len].iter().position(|&x| x == c) {
                Some(p) => s.w[p] = s.w[p] + w,
                None => {
                    s.cols[s.len] = c;
                    s.w[s.len] = w;
                    s.len += 1;
                }
            }
        }
        s
    }

    #[inline]
    pub fn apply(&self, f: impl Fn(usize) -> T) -> T {
        let mut acc = T::zero();
        for j in 0..self.len {
            acc = acc + self.w[j] * f(self.cols[j]);
        }
        acc
    }
}

fn lagrange(xs: &[f64], j: usize, x: f64) -> f64 {
    let mut l = 1.0;
    for (i, &xi) in xs.iter().enumerate() {
        if i != j {
            l *= (x - xi) / (xs[j] - xi);
        }
    }
    l
}

/// ∫_a^b ℓ_j(s) r(s) r'(s) ds in closed form for intervals next to the
/// wall, where the Jacobian p t^(p-1) (t = 1 - s) is not smooth enough for
/// Gauss-Legendre when p is not an integer. Works in u = t·nr.
fn wall_interval_weights(a: f64, b: f64, xs: &[f64], nr: usize, p: f64) -> [f64; 4] {
    let h = 1.0 / nr as f64;
    let us: Vec<f64> = xs.iter().map(|&x| (1.0 - x) * nr as f64).collect();
    let (ua, ub) = ((1.0 - b) * nr as f64, (1.0 - a) * nr as f64);
    let prim = |e: f64| (ub.powf(e) - ua.max(0.0).powf(e)) / e;
    let mut out = [0.0; 4];
    for j in 0..4 {
        let mut c = vec![1.0];
        for (i, &ui) in us.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = us[j] - ui;
            let mut next = vec![0.0; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck / d;
                next[k] -= ck * ui / d;
            }
            c = next;
        }
        out[j] = c
            .iter()
            .enumerate()
            .map(|(k, &ck)| {
                let k = k as f64;
                ck * (p * h.powf(p) * prim(k + p) - p * h.powf(2.0 * p) * prim(k + 2.0 * p))
            })
            .sum();
    }
    out
}

/// Discretization of the unit disc: stretched radial nodes on (0, 1] times
/// a truncated Fourier series in θ with a dealiased collocation grid.
pub struct PolarGrid<T: Real> {
    nr: usize,
    modes: usize,
    ntheta: usize,
    stretch: T,
    r: Vec<T>,
    inv_r: Vec<T>,
    /// Weights of ∫₀¹ φ(r) r dr per parity class.
    wq: [Vec<T>; 2],
    d1: [Vec<Stencil<T>>; 2],
    d2: [Vec<Stencil<T>>; 2],
    /// Per-interval weights of ∫ φ ρ dρ, interval q ending at node q.
    cum: [Vec<Stencil<T>>; 2],
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    poisson_fault: T,
    poisson: OnceLock<Vec<BandLu<T>>>,
}

impl<T: Real> std::fmt::Debug for PolarGrid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarGrid")
            .field("nr", &self.nr)
            .field("modes", &self.modes)
            .field("ntheta", &self.ntheta)
            .field("stretch", &self.stretch)
            .finish()
    }
}

fn smooth_fft_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut k = n;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return n;
        }
        n += 1;
    }
}

impl<T: Real> PolarGrid<T> {
    /// Builds a grid with `nr` radial nodes r_i = 1 - (1 - i/nr)^p and
    /// `modes` Fourier modes m = 0..modes-1.
    pub fn new(nr: usize, modes: usize, stretch: f64) -> Result<Arc<Self>> {
        Self::build(nr, modes, stretch, 0.0)
    }

    /// As [`PolarGrid::new`], with the 1/r first-derivative coefficient of the
    /// Poisson stencil scaled by `1 + eps`. Used only for fault injection.
    pub fn with_poisson_fault(nr: usize, modes: usize, stretch: f64, eps: f64) -> Result<Arc<Self>> {
        Self::build(nr, modes, stretch, eps)
    }

    fn build(nr: usize, modes: usize, stretch: f64, eps: f64) -> Result<Arc<Self>> {
        if nr < 16 {
            return Err(Error::InvalidGrid(format!("nr = {nr} < 16")));
        }
        if modes < 4 {
            return Err(Error::InvalidGrid(format!("modes = {modes} < 4")));
        }
        if !(stretch >= 1.0) || !stretch.is_finite() {
            return Err(Error::InvalidGrid(format!("stretch exponent {stretch} < 1")));
        }
        let p: T = lit(stretch);
        let r: Vec<T> = (1..=nr)
            .map(|i| {
                if i == nr {
                    T::one()
                } else {
                    T::one() - (T::one() - cnt::<T>(i) / cnt::<T>(nr)).powf(p)
                }
            })
            .collect();
        let inv_r = r.iter().map(|&x| T::one() / x).collect();
        let pos = |e: isize| -> T {
            if e >= 0 {
                r[e as usize]
            } else {
                -r[(-e - 1) as usize]
            }
        };
        let col = |e: isize, sign: T| -> (usize, T) {
            if e >= 0 {
                (e as usize, T::one())
            } else {
                ((-e - 1) as usize, sign)
            }
        };
        let signs = [T::one(), -T::one()];

        let mut d1: [Vec<Stencil<T>>; 2] = [Vec::with_capacity(nr), Vec::with_capacity(nr)];
        let mut d2: [Vec<Stencil<T>>; 2] = [Vec::with_capacity(nr), Vec::with_capacity(nr)];
        for k in 0..nr as isize {
            let start = (k - 2).min(nr as isize - 5);
            let es: Vec<isize> = (start..start + 5).collect();
            let xs: Vec<T> = es.iter().map(|&e| pos(e)).collect();
            let w = fd_weights(r[k as usize], &xs, 2);
            for (pc, &sg) in signs.iter().enumerate() {
                let e1: Vec<(usize, T)> = es
                    .iter()
                    .zip(&w)
                    .map(|(&e, wj)| {
                        let (c, s) = col(e, sg);
                        (c, s * wj[1])
                    })
                    .collect();
                let e2: Vec<(usize, T)> = es
                    .iter()
                    .zip(&w)
                    .map(|(&e, wj)| {
                        let (c, s) = col(e, sg);
                        (c, s * wj[2])
                    })
                    .collect();
                d1[pc].push(Stencil::fold(&e1));
                d2[pc].push(Stencil::fold(&e2));
            }
        }

        // Composite rule in the uniform variable s, where the Jacobian
        // r r' is known in closed form and node spacing is regular.
        let (gx, gw) = gauss_legendre(8);
        let s_of = |e: isize| -> f64 {
            if e >= 0 {
                (e + 1) as f64 / nr as f64
            } else {
                -((-e) as f64) / nr as f64
            }
        };
        let jac = |s: f64| -> f64 { (1.0 - (1.0 - s).powf(stretch)) * stretch * (1.0 - s).powf(stretch - 1.0) };
        let mut cum: [Vec<Stencil<T>>; 2] = [Vec::with_capacity(nr), Vec::with_capacity(nr)];
        for q in 0..nr as isize {
            let a = if q == 0 { 0.0 } else { s_of(q - 1) };
            let b = s_of(q);
            let start = (q - 2).min(nr as isize - 4);
            let es: Vec<isize> = (start..start + 4).collect();
            let xs: Vec<f64> = es.iter().map(|&e| s_of(e)).collect();
            let wl = if (nr as isize - 1 - q) < 8 {
                wall_interval_weights(a, b, &xs, nr, stretch)
            } else {
                let half = (b - a) / 2.0;
                let mid = (b + a) / 2.0;
                let mut wl = [0.0f64; 4];
                for (x0, w0) in gx.iter().zip(&gw) {
                    let x = mid + half * x0;
                    let jw = half * w0 * jac(x);
                    for j in 0..4 {
                        wl[j] += jw * lagrange(&xs, j, x);
                    }
                }
                wl
            };
            for (pc, &sg) in signs.iter().enumerate() {
                let e: Vec<(usize, T)> = es
                    .iter()
                    .zip(wl)
                    .map(|(&e, w)| {
                        let (c, s) = col(e, sg);
                        (c, s * lit::<T>(w))
                    })
                    .collect();
                cum[pc].push(Stencil::fold(&e));
            }
        }
        let mut wq = [vec![T::zero(); nr], vec![T::zero(); nr]];
        for pc in 0..2 {
            for st in &cum[pc] {
                for j in 0..st.len {
                    wq[pc][st.cols[j]] = wq[pc][st.cols[j]] + st.w[j];
                }
            }
        }
        if let Some(bad) = wq[0].iter().position(|&w| w <= T::zero()) {
            return Err(Error::InvalidGrid(format!("non-positive quadrature weight at node {bad}")));
        }

        let ntheta = smooth_fft_size(3 * modes);
        let mut planner = RealFftPlanner::<T>::new();
        let r2c = planner.plan_fft_forward(ntheta);
        let c2r = planner.plan_fft_inverse(ntheta);
        Ok(Arc::new(PolarGrid {
            nr,
            modes,
            ntheta,
            stretch: p,
            r,
            inv_r,
            wq,
            d1,
            d2,
            cum,
            r2c,
            c2r,
            poisson_fault: T::one() + lit(eps),
            poisson: OnceLock::new(),
        }))
    }

    pub fn nr(&self) -> usize {
        self.nr
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn ntheta(&self) -> usize {
        self.ntheta
    }
    /// Coefficients per radius: a_0, then (a_m, b_m) for m = 1..modes-1.
    pub fn ncoef(&self) -> usize {
        2 * self.modes - 1
    }
    pub fn stretch_exponent(&self) -> T {
        self.stretch
    }
    pub fn r_nodes(&self) -> &[T] {
        &self.r
    }
    pub(crate) fn inv_r(&self) -> &[T] {
        &self.inv_r
    }
    /// Quadrature weights w_i for ∫₀¹ φ(r) r dr (so Σ w_i · 2π ≈ π).
    pub fn weights(&self) -> &[T] {
        &self.wq[0]
    }
    pub(crate) fn weights_for(&self, class: usize) -> &[T] {
        &self.wq[class]
    }
    pub fn theta(&self, j: usize) -> T {
        lit::<T>(2.0) * T::PI() * cnt::<T>(j) / cnt::<T>(self.ntheta)
    }
    pub(crate) fn d1(&self, class: usize) -> &[Stencil<T>] {
        &self.d1[class]
    }
    pub(crate) fn d2(&self, class: usize) -> &[Stencil<T>] {
        &self.d2[class]
    }
    pub(crate) fn cum(&self, class: usize) -> &[Stencil<T>] {
        &self.cum[class]
    }
    pub(crate) fn r2c(&self) -> &Arc<dyn RealToComplex<T>> {
        &self.r2c
    }
    pub(crate) fn c2r(&self) -> &Arc<dyn ComplexToReal<T>> {
        &self.c2r
    }
    /// Local spacing used by the cell-Péclet guard at node k.
    pub fn spacing(&self, k: usize) -> T {
        let lo = if k == 0 { self.r[0] } else { self.r[k] - self.r[k - 1] };
        let hi = if k + 1 < self.nr { self.r[k + 1] - self.r[k] } else { lo };
        let ang = T::PI() * self.r[k] / cnt(self.modes);
        lo.max(hi).max(ang)
    }

    /// Mode index of coefficient slot `c`.
    #[inline]
    pub fn mode_of(c: usize) -> usize {
        (c + 1) / 2
    }

    /// Per-mode Dirichlet Laplacian factorizations, built on first use.
    pub(crate) fn poisson_factors(&self) -> &[BandLu<T>] {
        self.poisson.get_or_init(|| {
            use rayon::prelude::*;
            (0..self.modes).into_par_iter().map(|m| self.laplacian_matrix(m).factor()).collect()
        })
    }

    /// Banded matrix of a'' + a'/r - m² a / r² on interior nodes 0..nr-2
    /// with a = 0 at r = 1.
    pub(crate) fn laplacian_matrix(&self, m: usize) -> BandLu<T> {
        let n = self.nr - 1;
        let pc = Parity::Scalar.class(m);
        let mut a = BandLu::zeros(n, 3, 2);
        let m2 = cnt::<T>(m * m);
        for k in 0..n {
            let s1 = &self.d1[pc][k];
            let s2 = &self.d2[pc][k];
            let c1 = self.poisson_fault * self.inv_r[k];
            for j in 0..s2.len {
                if s2.cols[j] < n {
                    a.add(k, s2.cols[j], s2.w[j]);
                }
            }
            for j in 0..s1.len {
                if s1.cols[j] < n {
                    a.add(k, s1.cols[j], c1 * s1.w[j]);
                }
            }
            a.add(k, k, -m2 * self.inv_r[k] * self.inv_r[k]);
        }
        a
    }
}
