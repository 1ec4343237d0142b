//! Small dense/banded kernels and a restarted GMRES.

use crate::real::{cnt, Real};

/// Finite-difference weights for derivatives `0..=order` at `z` on nodes `x`
/// (Fornberg's recursion). Returns `w[node][derivative]`.
pub fn fd_weights<T: Real>(z: T, x: &[T], order: usize) -> Vec<Vec<T>> {
    let n = x.len();
    let mut c = vec![vec![T::zero(); order + 1]; n];
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (cnt::<T>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - cnt::<T>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Banded matrix with `kl` sub- and `ku` super-diagonals, factorized in place
/// by Gaussian elimination with partial pivoting.
#[derive(Clone, Debug)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<T>,
    piv: Vec<usize>,
    factored: bool,
}

impl<T: Real> BandLu<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            a: vec![T::zero(); n * width],
            piv: (0..n).collect(),
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + j + self.kl - i
    }

    /// Adds `v` to entry `(i, j)`; `j` must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(!self.factored, "matrix already factorized");
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.a[k] = self.a[k] + v;
    }

    /// Matrix-vector product with the unfactorized matrix.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert!(!self.factored);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = T::zero();
            for j in lo..=hi {
                s = s + self.a[self.idx(i, j)] * x[j];
            }
            y[i] = s;
        }
    }

    pub fn factor(mut self) -> Self {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.a[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.a[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (ip, ik) = (self.idx(p, j), self.idx(k, j));
                    self.a.swap(ip, ik);
                }
            }
            let d = self.a[self.idx(k, k)];
            if d == T::zero() {
                continue;
            }
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.a[ik] / d;
                self.a[ik] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let (ij, kj) = (self.idx(i, j), self.idx(k, j));
                    self.a[ij] = self.a[ij] - l * self.a[kj];
                }
            }
        }
        self.factored = true;
        self
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [T]) {
        assert!(self.factored, "factor() first");
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(p, k);
            }
            let bk = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                b[i] = b[i] - self.a[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s = s - self.a[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.a[self.idx(k, k)];
        }
    }
}

/// Outcome of a Krylov solve.
#[derive(Clone, Debug)]
pub struct KrylovOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Restarted GMRES for `A x = b` from `x = 0`, stopping when
/// `|b - A x| <= tol |b|`.
pub fn gmres<T: Real, F>(
    mut apply: F,
    b: &[T],
    restart: usize,
    tol: f64,
    max_iter: usize,
) -> KrylovOutcome<T>
where
    F: FnMut(&[T], &mut [T]),
{
    let n = b.len();
    let mut x = vec![T::zero(); n];
    let bnorm = norm(b).to_f64().unwrap();
    let mut history = Vec::new();
    if bnorm == 0.0 {
        return KrylovOutcome { x, iterations: 0, history, converged: true };
    }
    let target = bnorm * tol;
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut w = vec![T::zero(); n];
    loop {
        let beta = norm(&r);
        if beta.to_f64().unwrap() <= target {
            return KrylovOutcome { x, iterations, history, converged: true };
        }
        if iterations >= max_iter {
            return KrylovOutcome { x, iterations, history, converged: false };
        }
        let mut v: Vec<Vec<T>> = Vec::with_capacity(restart + 1);
        v.push(r.iter().map(|&ri| ri / beta).collect());
        let mut h = vec![vec![T::zero(); restart]; restart + 1];
        let (mut cs, mut sn) = (vec![T::zero(); restart], vec![T::zero(); restart]);
        let mut g = vec![T::zero(); restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            apply(&v[k], &mut w);
            for (j, vj) in v.iter().enumerate() {
                let hjk = dot(&w, vj);
                h[j][k] = hjk;
                w.iter_mut().zip(vj).for_each(|(wi, &vi)| *wi = *wi - hjk * vi);
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let den = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            cs[k] = h[k][k] / den;
            sn[k] = h[k + 1][k] / den;
            h[k][k] = den;
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            iterations += 1;
            k_used = k + 1;
            let res = g[k + 1].abs().to_f64().unwrap();
            history.push(res / bnorm);
            if res <= target || iterations >= max_iter || hn == T::zero() {
                break;
            }
            v.push(w.iter().map(|&wi| wi / hn).collect());
        }
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s = s - h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&v[j]).for_each(|(xi, &vi)| *xi = *xi + *yj * vi);
        }
        apply(&x, &mut w);
        r.iter_mut().zip(b.iter().zip(&w)).for_each(|(ri, (&bi, &wi))| *ri = bi - wi);
    }
}
