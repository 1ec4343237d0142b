use crate::error::{Error, Result};
use crate::real::{cnt, lit, Real};

/// Quintic smoothstep 6t⁵ − 15t⁴ + 10t³ and its first two derivatives,
/// clamped to [0, 1] outside the unit interval.
pub fn smoothstep<T: Real>(t: T) -> [T; 3] {
    if t <= T::zero() {
        return [T::zero(); 3];
    }
    if t >= T::one() {
        return [T::one(), T::zero(), T::zero()];
    }
    let u = T::one() - t;
    let s = t * t * t * (lit::<T>(10.0) - lit::<T>(15.0) * t + lit::<T>(6.0) * t * t);
    let ds = lit::<T>(30.0) * t * t * u * u;
    let dds = lit::<T>(60.0) * t * u * (T::one() - lit::<T>(2.0) * t);
    [s, ds, dds]
}

/// cos((π/2) S(t)) on an interval of width `w`, differentiated in r.
/// Evaluated as sin((π/2) S(1 − t)) so it vanishes without cancellation at t = 1.
fn fall<T: Real>(t: T, w: T) -> [T; 3] {
    let [s, ds, dds] = smoothstep(T::one() - t);
    let h = T::FRAC_PI_2();
    let (sn, cs) = (h * s).sin_cos();
    let a = h * ds / w;
    [sn, -cs * a, -sn * a * a + cs * h * dds / (w * w)]
}

/// sin((π/2) S(t)) on an interval of width `w`, differentiated in r.
fn rise<T: Real>(t: T, w: T) -> [T; 3] {
    let [s, ds, dds] = smoothstep(t);
    let h = T::FRAC_PI_2();
    let (sn, cs) = (h * s).sin_cos();
    let a = h * ds / w;
    [sn, cs * a, -sn * a * a + cs * h * dds / (w * w)]
}

/// Layer scales and radii of a branching flow.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchingPlan<T> {
    pub pe: T,
    /// 1/l_k, one positive integer per layer.
    pub inv_l: Vec<usize>,
    /// Transition radii r_1 < … < r_n.
    pub r: Vec<T>,
    /// Radius of the core taper applied to η.
    pub r_core: T,
    /// Scale-function prefactor c in ℓ(r) = c √(1 − r), when the plan follows one.
    pub ell_coeff: Option<T>,
}

impl<T: Real> BranchingPlan<T> {
    /// Multi-layer plan with ℓ(r) = (ln^{1/6} Pe / Pe^{1/3}) √(1 − r).
    pub fn for_pe(pe: T) -> Result<Self> {
        if !(pe >= lit(70.0)) {
            return Err(Error::InvalidParameter(format!(
                "branching plans need Pe >= 70 (got {pe}); use a roll flow instead"
            )));
        }
        let big_r = pe.cbrt() / pe.ln().powf(lit(1.0 / 6.0));
        let n = big_r.log2().floor().to_usize().unwrap().max(1);
        let base = (lit::<T>(2.0) * big_r).ceil().to_usize().unwrap();
        let inv_l: Vec<usize> = (0..n).map(|k| base << k).collect();
        let r = inv_l
            .iter()
            .map(|&il| {
                let x = big_r / cnt::<T>(il);
                T::one() - x * x
            })
            .collect::<Vec<T>>();
        let r_core = lit::<T>(0.1).min(r[0] / lit(4.0));
        let plan = Self { pe, inv_l, r, r_core, ell_coeff: Some(T::one() / big_r) };
        plan.validate()?;
        Ok(plan)
    }

    /// Single-layer plan with 1/l = round(√Pe) and δ_bl = l.
    pub fn energy_roll(pe: T) -> Result<Self> {
        if !(pe >= lit(4.0)) {
            return Err(Error::InvalidParameter(format!("energy-roll designs need Pe >= 4 (got {pe})")));
        }
        let il = pe.sqrt().round().to_usize().unwrap();
        let r1 = T::one() - T::one() / cnt::<T>(il);
        let plan = Self { pe, inv_l: vec![il], r: vec![r1], r_core: lit::<T>(0.1).min(r1 / lit(4.0)), ell_coeff: None };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("inconsistent plan: {m}")));
        if self.inv_l.is_empty() || self.inv_l.len() != self.r.len() {
            return bad("layer count");
        }
        if self.inv_l.windows(2).any(|w| w[1] != 2 * w[0]) {
            return bad("scales are not dyadic");
        }
        if self.r[0] < lit(0.5) || self.r.windows(2).any(|w| w[1] <= w[0]) || self.r[self.n() - 1] >= T::one() {
            return bad("radii out of order");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.inv_l.len()
    }
    /// l_k for k = 1..n (0-based here).
    pub fn l(&self, k: usize) -> T {
        T::one() / cnt::<T>(self.inv_l[k])
    }
    pub fn l_bulk(&self) -> T {
        self.l(0)
    }
    pub fn l_bl(&self) -> T {
        self.l(self.n() - 1)
    }
    pub fn r_bulk(&self) -> T {
        self.r[0]
    }
    pub fn r_bl(&self) -> T {
        self.r[self.n() - 1]
    }
    pub fn delta_bulk(&self) -> T {
        T::one() - self.r_bulk()
    }
    pub fn delta_bl(&self) -> T {
        T::one() - self.r_bl()
    }
    /// δ_k = r_{k+1} − r_k, with δ_n = δ_bl.
    pub fn delta(&self, k: usize) -> T {
        if k + 1 < self.n() {
            self.r[k + 1] - self.r[k]
        } else {
            self.delta_bl()
        }
    }
    /// ℓ(r) for plans derived from a scale function.
    pub fn ell(&self, r: T) -> Option<T> {
        self.ell_coeff.map(|c| c * (T::one() - r).sqrt())
    }
    /// Highest azimuthal wavenumber in the design.
    pub fn max_wavenumber(&self) -> usize {
        self.inv_l[self.n() - 1]
    }
    pub fn cutoffs(&self) -> CutoffSet<T> {
        CutoffSet { r: self.r.clone() }
    }
}

/// Radial partition of unity: χ_1 = 1 on (0, r_1], neighbours overlap on
/// [r_k, r_{k+1}], and χ_n ramps to 0 on [r_bl, 1].
#[derive(Clone, Debug)]
pub struct CutoffSet<T> {
    r: Vec<T>,
}

impl<T: Real> CutoffSet<T> {
    /// A single cutoff equal to 1 everywhere (no wall ramp).
    pub fn unit() -> Self {
        Self { r: Vec::new() }
    }

    /// A single cutoff equal to 1 on [0, r0] that ramps to 0 on [r0, 1].
    pub fn wall(r0: T) -> Self {
        Self { r: vec![r0] }
    }

    pub fn len(&self) -> usize {
        self.r.len().max(1)
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// (χ_k, χ_k', χ_k'') at r, k 0-based.
    pub fn eval(&self, k: usize, r: T) -> [T; 3] {
        let n = self.r.len();
        if n == 0 {
            return [T::one(), T::zero(), T::zero()];
        }
        let hi = if k + 1 < n { self.r[k + 1] } else { T::one() };
        if k > 0 && r >= self.r[k - 1] && r < self.r[k] {
            let w = self.r[k] - self.r[k - 1];
            return rise((r - self.r[k - 1]) / w, w);
        }
        if r >= self.r[k] && r <= hi {
            let w = hi - self.r[k];
            return fall((r - self.r[k]) / w, w);
        }
        if k == 0 && r < self.r[0] {
            return [T::one(), T::zero(), T::zero()];
        }
        [T::zero(); 3]
    }

    /// Indices of cutoffs that may be nonzero at r.
    pub fn active(&self, r: T) -> std::ops::Range<usize> {
        let n = self.r.len();
        if n == 0 {
            return 0..1;
        }
        let j = self.r.iter().take_while(|&&rk| rk <= r).count();
        j.saturating_sub(1)..(j + 1).min(n)
    }
}
