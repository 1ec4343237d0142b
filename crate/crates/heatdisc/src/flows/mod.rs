//! Roll and branching flow designs, their test functions, and Pe rescaling.

mod plan;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

pub use plan::{smoothstep, BranchingPlan, CutoffSet};

use crate::disc::{
    div_by_r, divergence, grad_energy, perp_gradient, radial_derivative, theta_derivative, Parity, PolarGrid,
    SpectralScalar, VectorFieldPolar,
};
use crate::error::{Error, Result};
use crate::real::{cnt, lit, Real};
use crate::sources::{Source, SourceKind};

/// Which norm of u is held at Pe².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    Enstrophy,
    Energy,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Enstrophy => "enstrophy",
            Constraint::Energy => "energy",
        })
    }
}

impl FromStr for Constraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enstrophy" => Ok(Constraint::Enstrophy),
            "energy" => Ok(Constraint::Energy),
            _ => Err(Error::InvalidParameter(format!("unknown constraint '{s}' (expected enstrophy or energy)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowKind {
    Roll,
    Branching,
    EnergyRoll,
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::Roll => "roll",
            FlowKind::Branching => "branching",
            FlowKind::EnergyRoll => "energy-roll",
        })
    }
}

impl FromStr for FlowKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roll" => Ok(FlowKind::Roll),
            "branching" => Ok(FlowKind::Branching),
            "energy-roll" | "energy_roll" => Ok(FlowKind::EnergyRoll),
            _ => Err(Error::InvalidParameter(format!(
                "unknown flow '{s}' (expected roll, branching, energy-roll)"
            ))),
        }
    }
}

/// A velocity field u = ∇⊥ψ together with its test function η.
#[derive(Clone, Debug)]
pub struct FlowDesign<T: Real> {
    kind: FlowKind,
    source: SourceKind<T>,
    inv_l: Vec<usize>,
    cutoffs: CutoffSet<T>,
    plan: Option<BranchingPlan<T>>,
    taper: T,
    lambda: T,
    psi: SpectralScalar<T>,
    u: VectorFieldPolar<T>,
    eta: SpectralScalar<T>,
    enstrophy: T,
    energy: T,
    grad_eta: T,
}

impl<T: Real> FlowDesign<T> {
    pub fn kind(&self) -> FlowKind {
        self.kind
    }
    pub fn grid(&self) -> &Arc<PolarGrid<T>> {
        self.psi.grid()
    }
    pub fn plan(&self) -> Option<&BranchingPlan<T>> {
        self.plan.as_ref()
    }
    /// Azimuthal wavenumbers 1/l_k of the layers, bulk first.
    pub fn wavenumbers(&self) -> &[usize] {
        &self.inv_l
    }
    pub fn cutoffs(&self) -> &CutoffSet<T> {
        &self.cutoffs
    }
    /// Factor applied to u (and 1/factor to η) since construction.
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn streamfunction(&self) -> &SpectralScalar<T> {
        &self.psi
    }
    pub fn velocity(&self) -> &VectorFieldPolar<T> {
        &self.u
    }
    pub fn test_function(&self) -> &SpectralScalar<T> {
        &self.eta
    }
    /// ⨍|∇u|².
    pub fn enstrophy(&self) -> T {
        self.enstrophy
    }
    /// ⨍|u|².
    pub fn energy(&self) -> T {
        self.energy
    }
    /// ⨍|∇η|².
    pub fn grad_eta(&self) -> T {
        self.grad_eta
    }
    pub fn norm(&self, c: Constraint) -> T {
        match c {
            Constraint::Enstrophy => self.enstrophy,
            Constraint::Energy => self.energy,
        }
    }
    /// Whether the design vanishes at the wall (every kind except the pure roll).
    pub fn is_no_slip(&self) -> bool {
        self.kind != FlowKind::Roll
    }

    /// ψ at an arbitrary point, from the analytic layer formula.
    pub fn psi_at(&self, r: T, th: T) -> T {
        let g = self.source.g_at(r, th);
        self.lambda * self.layer_sum(r, th, |il, th| lit::<T>(2.0).sqrt() / cnt::<T>(il) * (cnt::<T>(il) * th).cos()) * r * g
    }

    /// η at an arbitrary point, from the analytic layer formula.
    pub fn eta_at(&self, r: T, th: T) -> T {
        let taper = core_taper(r, self.taper);
        taper / self.lambda * self.layer_sum(r, th, |il, th| lit::<T>(2.0).sqrt() * (cnt::<T>(il) * th).sin())
    }

    fn layer_sum(&self, r: T, th: T, f: impl Fn(usize, T) -> T) -> T {
        self.cutoffs.active(r).map(|k| self.cutoffs.eval(k, r)[0] * f(self.inv_l[k], th)).sum()
    }

    /// Copy with u scaled so the chosen norm equals pe², and η scaled inversely.
    pub fn rescale_to_pe(&self, pe: T, c: Constraint) -> Result<Self> {
        let norm = self.norm(c);
        if !(norm > T::zero()) {
            return Err(Error::ZeroNorm(match c {
                Constraint::Enstrophy => "enstrophy",
                Constraint::Energy => "energy",
            }));
        }
        let lam = pe / norm.sqrt();
        let mut d = self.clone();
        d.lambda = self.lambda * lam;
        d.psi = self.psi.scale(lam);
        d.u = self.u.scale(lam);
        d.eta = self.eta.scale(T::one() / lam);
        d.enstrophy = self.enstrophy * lam * lam;
        d.energy = self.energy * lam * lam;
        d.grad_eta = self.grad_eta / (lam * lam);
        Ok(d)
    }

    /// Checks incompressibility, and for wall-bounded designs the no-slip
    /// condition and η = 0 at r = 1.
    pub fn check_invariants(&self) -> Result<()> {
        let div = divergence(&self.u)?.max_abs();
        let scale = T::one().max(self.energy.sqrt());
        if !(div <= lit::<T>(1e-8) * scale) {
            return Err(Error::Rejected(format!("divergence {div:e} exceeds 1e-8")));
        }
        if self.is_no_slip() {
            let last = self.grid().nr() - 1;
            let wall = |f: &SpectralScalar<T>| f.row(last).iter().fold(T::zero(), |s, v| s + v.abs());
            let uw = wall(&self.u.r) + wall(&self.u.t);
            if !(uw <= lit::<T>(1e-10) * scale) {
                return Err(Error::Rejected(format!("wall velocity {uw:e} exceeds 1e-10")));
            }
            let ew = wall(&self.eta);
            if !(ew <= lit(1e-12)) {
                return Err(Error::Rejected(format!("wall test function {ew:e} exceeds 1e-12")));
            }
        }
        Ok(())
    }
}

/// ⨍|∇u|² from the four entries of the polar velocity gradient.
pub fn velocity_gradient_energy<T: Real>(u: &VectorFieldPolar<T>) -> T {
    let rr = radial_derivative(&u.r);
    let rt = div_by_r(&theta_derivative(&u.r).sub(&u.t));
    let tr = radial_derivative(&u.t);
    let tt = div_by_r(&theta_derivative(&u.t).add(&u.r));
    rr.mean_square() + rt.mean_square() + tr.mean_square() + tt.mean_square()
}

fn core_taper<T: Real>(r: T, taper: T) -> T {
    if taper > T::zero() {
        smoothstep(r / taper)[0]
    } else {
        T::one()
    }
}

struct Layout<T: Real> {
    kind: FlowKind,
    inv_l: Vec<usize>,
    cutoffs: CutoffSet<T>,
    plan: Option<BranchingPlan<T>>,
    taper: T,
}

fn build<T: Real>(s: &Source<T>, lay: Layout<T>) -> Result<FlowDesign<T>> {
    let grid = s.grid().clone();
    let nt = grid.ntheta();
    let theta: Vec<T> = (0..nt).map(|j| grid.theta(j)).collect();
    let gphys = s.radial_potential().to_physical();
    let sqrt2 = lit::<T>(2.0).sqrt();
    let mut psi = vec![T::zero(); grid.nr() * nt];
    let mut eta = vec![T::zero(); grid.nr() * nt];
    psi.par_chunks_mut(nt)
        .zip(eta.par_chunks_mut(nt))
        .zip(gphys.par_chunks(nt))
        .zip(grid.r_nodes().par_iter())
        .for_each(|(((prow, erow), grow), &r)| {
            let taper = core_taper(r, lay.taper);
            for k in lay.cutoffs.active(r) {
                let chi = lay.cutoffs.eval(k, r)[0];
                if chi == T::zero() {
                    continue;
                }
                let il = lay.inv_l[k];
                let w = cnt::<T>(il);
                for j in 0..nt {
                    let (sn, cs) = (w * theta[j]).sin_cos();
                    prow[j] = prow[j] + chi * r * grow[j] * sqrt2 / w * cs;
                    erow[j] = erow[j] + taper * chi * sqrt2 * sn;
                }
            }
        });
    let psi = SpectralScalar::from_physical(&grid, Parity::Scalar, &psi);
    let eta = SpectralScalar::from_physical(&grid, Parity::Scalar, &eta);
    let u = perp_gradient(&psi);
    let d = FlowDesign {
        kind: lay.kind,
        source: s.kind().clone(),
        inv_l: lay.inv_l,
        cutoffs: lay.cutoffs,
        plan: lay.plan,
        taper: lay.taper,
        lambda: T::one(),
        enstrophy: velocity_gradient_energy(&u),
        energy: u.mean_square(),
        grad_eta: grad_energy(&eta),
        psi,
        u,
        eta,
    };
    d.check_invariants()?;
    Ok(d)
}

fn require_modes<T: Real>(grid: &PolarGrid<T>, required: usize) -> Result<()> {
    if grid.modes() < required {
        return Err(Error::Unresolved { required, available: grid.modes() });
    }
    Ok(())
}

/// Single-scale roll ψ = r g Ψ(θ), Ψ = (√2/n) cos nθ, with η = −Ψ'.
///
/// `taper` ∈ [0, 1/4] ramps η to zero near the pole; 0 disables it.
pub fn roll_flow<T: Real>(s: &Source<T>, n: usize, taper: T) -> Result<FlowDesign<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("roll wavenumber must be positive".into()));
    }
    if !(taper >= T::zero() && taper <= lit(0.25)) {
        return Err(Error::InvalidParameter(format!("taper {taper} outside [0, 1/4]")));
    }
    require_modes(s.grid(), 2 * n)?;
    build(s, Layout { kind: FlowKind::Roll, inv_l: vec![n], cutoffs: CutoffSet::unit(), plan: None, taper })
}

/// Branching flow ψ = Σ χ_k r g Ψ_k with Ψ_k = √2 l_k cos(θ/l_k).
pub fn branching_flow<T: Real>(s: &Source<T>, plan: &BranchingPlan<T>) -> Result<FlowDesign<T>> {
    require_modes(s.grid(), 4 * plan.max_wavenumber())?;
    build(
        s,
        Layout {
            kind: FlowKind::Branching,
            inv_l: plan.inv_l.clone(),
            cutoffs: plan.cutoffs(),
            plan: Some(plan.clone()),
            taper: plan.r_core,
        },
    )
}

/// One-layer design with 1/l_bulk = round(√Pe) and δ_bl = l_bulk.
pub fn energy_roll_design<T: Real>(s: &Source<T>, pe: T) -> Result<FlowDesign<T>> {
    let plan = BranchingPlan::energy_roll(pe)?;
    let mut d = branching_flow(s, &plan)?;
    d.kind = FlowKind::EnergyRoll;
    Ok(d)
}

#[cfg(test)]
mod tests;
