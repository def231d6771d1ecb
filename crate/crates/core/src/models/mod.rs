//! Conditional-intensity families: Poisson, pairwise interaction processes,
//! area interaction, and their restrictions to `A_k`.

mod activity;
mod ak;
mod area;
mod interaction;
mod kernel;
mod spec;

pub use activity::{sup_ball_measure, Activity};
pub use ak::{addition_violates, in_ak, miniball_radius, MINIBALL_BUDGET};
pub use area::uncovered_volume;
pub use interaction::{lj_potential, Interaction, PipConstants};
pub use kernel::{double_integral, sup_weighted_integral, weighted_integral, Kernel, Profile};
pub use spec::{KindSpec, ModelSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};
use crate::scalar::Real;

/// Products with more factors than this are accumulated as sums of logs.
const LOG_SPACE_THRESHOLD: usize = 32;

/// Ruelle stability constants: `u(xi) <= c_star * prod psi_star(x_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ruelle<T> {
    pub c_star: T,
    /// Constant majorant `psi_star`.
    pub psi_star: T,
}

/// Lennard–Jones type constants `(rho, r, R, M)` of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LennardJonesParams<T> {
    pub b: T,
    pub rho: T,
    pub r: T,
    pub big_r: T,
    pub m: T,
}

impl<T: Real> LennardJonesParams<T> {
    /// The classical 12-6 potential with `rho = 6`, `r = R` and `M = 1/4`.
    pub fn classical(b: T, big_r: T) -> Self {
        LennardJonesParams {
            b,
            rho: T::lit(6.0),
            r: big_r,
            big_r,
            m: T::lit(0.25),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipParams<T> {
    pub beta: Activity<T>,
    pub phi: Interaction<T>,
    pub ruelle: Option<Ruelle<T>>,
    pub lj: Option<LennardJonesParams<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaInteractionParams<T> {
    pub beta: T,
    pub gamma: T,
    /// Balls have radius `big_r / 2`.
    pub big_r: T,
    /// Uncovered-volume quadrature tolerance relative to the ball volume.
    pub rel_tol: T,
}

/// A base model restricted to `A_k`.
#[derive(Clone, Debug)]
pub struct Conditioned<T> {
    pub base: Model<T>,
    pub k: usize,
    pub delta: T,
    /// `m` of the covering bound (zero when it does not apply).
    pub m: T,
    /// `ln M_k`.
    pub ln_mk: T,
}

impl<T: Real> Conditioned<T> {
    pub fn mk(&self) -> T {
        self.ln_mk.exp()
    }
}

#[derive(Clone, Debug)]
pub enum ModelKind<T> {
    Poisson { beta: Activity<T> },
    Pip(PipParams<T>),
    AreaInteraction(AreaInteractionParams<T>),
    Conditioned(Box<Conditioned<T>>),
}

/// A Gibbs point process on a window, given through its conditional intensity.
#[derive(Clone, Debug)]
pub struct Model<T> {
    window: Window<T>,
    kind: ModelKind<T>,
}

/// Outcome of [`Model::validate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

/// `m = alpha_D D^{D/2} ((R/delta + 1)^D - (r/delta - 1)_+^D)`.
pub fn covering_m<T: Real>(dim: usize, r: T, big_r: T, delta: T) -> T {
    let d = dim as i32;
    let a = crate::scalar::unit_ball_volume::<T>(dim) * T::from_usize_lossy(dim).powf(T::from_usize_lossy(dim) * T::lit(0.5));
    let outer = (big_r / delta + T::one()).powi(d);
    let inner = (r / delta - T::one()).max(T::zero()).powi(d);
    a * (outer - inner)
}

/// `ln M_k` for a Lennard–Jones type potential.
pub fn lj_ln_mk<T: Real>(dim: usize, lj: &LennardJonesParams<T>, k: usize, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta <= lj.r && delta + delta < lj.big_r) {
        return Err(Error::param(format!(
            "Lennard-Jones restriction needs 0 < delta <= r and delta < R/2 (delta = {delta}, r = {}, R = {})",
            lj.r, lj.big_r
        )));
    }
    let dd = T::from_usize_lossy(dim);
    let m = if lj.r < lj.big_r {
        covering_m(dim, lj.r, lj.big_r, delta)
    } else {
        T::zero()
    };
    let far = crate::scalar::unit_ball_volume::<T>(dim) * dd / (lj.rho - dd)
        * (dd.sqrt() / delta).powi(dim as i32)
        * (lj.big_r - delta).powi(dim as i32 - 1)
        / (lj.big_r - delta - delta).powf(lj.rho - T::one());
    Ok(lj.b * T::from_usize_lossy(k) * (m * lj.m + far))
}

fn log_product<T: Real>(factors: impl Iterator<Item = T>, n: usize) -> T {
    if n > LOG_SPACE_THRESHOLD {
        let mut s = T::zero();
        for f in factors {
            if f == T::zero() {
                return T::zero();
            }
            s = s + f.ln();
        }
        s.exp()
    } else {
        factors.fold(T::one(), |a, b| a * b)
    }
}

impl<T: Real> Model<T> {
    pub fn new(window: Window<T>, kind: ModelKind<T>) -> Result<Self> {
        match &kind {
            ModelKind::Poisson { beta } => beta.check(&window)?,
            ModelKind::Pip(p) => {
                p.beta.check(&window)?;
                p.phi.check()?;
                if let Some(r) = p.ruelle {
                    if !(r.c_star > T::zero() && r.psi_star >= T::zero()) {
                        return Err(Error::param("Ruelle constants must be positive"));
                    }
                }
                if let Some(lj) = p.lj {
                    if !(lj.rho > T::from_usize_lossy(window.dim())) {
                        return Err(Error::param("Lennard-Jones exponent rho must exceed the dimension"));
                    }
                    if !(lj.r <= lj.big_r && lj.m >= T::zero()) {
                        return Err(Error::param("Lennard-Jones constants need r <= R and M >= 0"));
                    }
                }
            }
            ModelKind::AreaInteraction(a) => {
                if !(a.beta > T::zero() && a.beta.is_finite()) {
                    return Err(Error::param("area-interaction beta must be positive"));
                }
                if !(a.gamma > T::zero() && a.gamma <= T::one()) {
                    return Err(Error::param(format!("area-interaction gamma must lie in (0, 1], got {}", a.gamma)));
                }
                if !(a.big_r > T::zero()) || !(a.rel_tol > T::zero()) {
                    return Err(Error::param("area-interaction R and tolerance must be positive"));
                }
            }
            ModelKind::Conditioned(c) => {
                if c.k == 0 || !(c.delta > T::zero()) {
                    return Err(Error::param("conditioning needs k >= 1 and delta > 0"));
                }
            }
        }
        Ok(Model { window, kind })
    }

    pub fn poisson(window: Window<T>, beta: T) -> Result<Self> {
        Model::new(window, ModelKind::Poisson { beta: Activity::Constant(beta) })
    }

    pub fn pip(window: Window<T>, beta: Activity<T>, phi: Interaction<T>) -> Result<Self> {
        let lj = match &phi {
            Interaction::LennardJones { b, radius } => Some(LennardJonesParams::classical(*b, *radius)),
            _ => None,
        };
        Model::new(
            window,
            ModelKind::Pip(PipParams {
                beta,
                phi,
                ruelle: None,
                lj,
            }),
        )
    }

    pub fn strauss(window: Window<T>, beta: T, gamma: T, radius: T) -> Result<Self> {
        Model::pip(window, Activity::Constant(beta), Interaction::Strauss { gamma, radius })
    }

    pub fn hard_core_strauss(window: Window<T>, beta: T, hard_core: T, gamma: T, radius: T) -> Result<Self> {
        Model::pip(
            window,
            Activity::Constant(beta),
            Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius,
            },
        )
    }

    pub fn bi_scale_strauss(window: Window<T>, beta: T, gamma: T, r: T, c: T, radius: T) -> Result<Self> {
        Model::pip(window, Activity::Constant(beta), Interaction::BiScaleStrauss { gamma, r, c, radius })
    }

    pub fn lennard_jones(window: Window<T>, beta: T, b: T, radius: T) -> Result<Self> {
        Model::pip(window, Activity::Constant(beta), Interaction::LennardJones { b, radius })
    }

    pub fn area_interaction(window: Window<T>, beta: T, gamma: T, big_r: T) -> Result<Self> {
        Model::new(
            window,
            ModelKind::AreaInteraction(AreaInteractionParams {
                beta,
                gamma,
                big_r,
                rel_tol: T::lit(1e-10),
            }),
        )
    }

    /// Replaces the Ruelle constants of a PIP.
    pub fn with_ruelle(mut self, ruelle: Ruelle<T>) -> Result<Self> {
        match &mut self.kind {
            ModelKind::Pip(p) => {
                p.ruelle = Some(ruelle);
                Ok(self)
            }
            _ => Err(Error::param("Ruelle constants apply to pairwise interaction processes only")),
        }
    }

    /// Replaces the Lennard–Jones constants `(rho, r, R, M)` of a Lennard–Jones PIP.
    pub fn with_lj_constants(mut self, lj: LennardJonesParams<T>) -> Result<Self> {
        let dim = self.window.dim();
        match &mut self.kind {
            ModelKind::Pip(p) if p.lj.is_some() => {
                if let Interaction::LennardJones { b, radius } = p.phi {
                    if lj.b != b || lj.big_r != radius {
                        return Err(Error::param("Lennard-Jones constants must use the interaction's b and R"));
                    }
                }
                if !(lj.rho > T::from_usize_lossy(dim) && lj.r <= lj.big_r && lj.m >= T::zero()) {
                    return Err(Error::param("Lennard-Jones constants need rho > D, r <= R, M >= 0"));
                }
                p.lj = Some(lj);
                Ok(self)
            }
            _ => Err(Error::param("not a Lennard-Jones model")),
        }
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn kind(&self) -> &ModelKind<T> {
        &self.kind
    }

    /// Family name: Poisson, PIP, Strauss, BiScaleStrauss, HardCorePIP,
    /// AreaInteraction, LennardJones or Conditioned.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ModelKind::Poisson { .. } => "Poisson",
            ModelKind::Pip(p) => {
                if p.phi.hard_core().is_some() && !matches!(p.phi, Interaction::HardCoreStrauss { .. }) {
                    "HardCorePIP"
                } else {
                    p.phi.family()
                }
            }
            ModelKind::AreaInteraction(_) => "AreaInteraction",
            ModelKind::Conditioned(_) => "Conditioned",
        }
    }

    /// The model with any conditioning removed.
    pub fn unconditioned(&self) -> &Model<T> {
        match &self.kind {
            ModelKind::Conditioned(c) => c.base.unconditioned(),
            _ => self,
        }
    }

    pub fn conditioning(&self) -> Option<&Conditioned<T>> {
        match &self.kind {
            ModelKind::Conditioned(c) => Some(c),
            _ => None,
        }
    }

    pub fn pip_params(&self) -> Option<&PipParams<T>> {
        match &self.unconditioned().kind {
            ModelKind::Pip(p) => Some(p),
            _ => None,
        }
    }

    pub fn interaction(&self) -> Option<&Interaction<T>> {
        self.pip_params().map(|p| &p.phi)
    }

    pub fn pip_constants(&self) -> Option<PipConstants<T>> {
        self.interaction().map(Interaction::constants)
    }

    pub fn lj_params(&self) -> Option<&LennardJonesParams<T>> {
        self.pip_params().and_then(|p| p.lj.as_ref())
    }

    pub fn activity(&self) -> Activity<T> {
        match &self.unconditioned().kind {
            ModelKind::Poisson { beta } => beta.clone(),
            ModelKind::Pip(p) => p.beta.clone(),
            ModelKind::AreaInteraction(a) => Activity::Constant(a.beta),
            ModelKind::Conditioned(_) => unreachable!(),
        }
    }

    pub fn beta(&self, x: &[T]) -> T {
        match &self.unconditioned().kind {
            ModelKind::Poisson { beta } => beta.value(&self.window, x),
            ModelKind::Pip(p) => p.beta.value(&self.window, x),
            ModelKind::AreaInteraction(a) => a.beta,
            ModelKind::Conditioned(_) => unreachable!(),
        }
    }

    pub fn beta_max(&self) -> T {
        self.activity().max()
    }

    /// `∫_X beta`.
    pub fn beta_integral(&self) -> T {
        self.activity().integral(&self.window)
    }

    /// `λ(x|xi)` without checking that `u(xi) > 0`.
    pub fn cond_intensity_unchecked(&self, x: &[T], xi: &PointConfig<T>) -> T {
        match &self.kind {
            ModelKind::Poisson { beta } => beta.value(&self.window, x),
            ModelKind::Pip(p) => {
                let b = p.beta.value(&self.window, x);
                if b == T::zero() {
                    return b;
                }
                let w = &self.window;
                let phi = &p.phi;
                let prod = log_product(xi.iter().map(|y| phi.value(x, y, w.distance(x, y))), xi.len());
                b * prod
            }
            ModelKind::AreaInteraction(a) => {
                if a.gamma == T::one() {
                    return a.beta;
                }
                let u = self.uncovered(a, x, xi.iter());
                a.beta * (-u * a.gamma.ln()).exp()
            }
            ModelKind::Conditioned(c) => {
                if addition_violates(&self.window, xi, x, c.k, c.delta) {
                    T::zero()
                } else {
                    c.base.cond_intensity_unchecked(x, xi)
                }
            }
        }
    }

    /// `λ(x|xi) = u(xi + x) / u(xi)`, zero when `u(xi) = 0`.
    pub fn cond_intensity(&self, x: &[T], xi: &PointConfig<T>) -> T {
        if !self.admissible(xi) {
            return T::zero();
        }
        self.cond_intensity_unchecked(x, xi)
    }

    fn uncovered<'a>(&self, a: &AreaInteractionParams<T>, x: &[T], pts: impl Iterator<Item = &'a [T]>) -> T {
        let half = a.big_r * T::lit(0.5);
        let dim = self.window.dim();
        let reach2 = a.big_r * a.big_r;
        let mut cs = Vec::new();
        for y in pts {
            if self.window.dist2(x, y) < reach2 {
                let mut d = vec![T::zero(); dim];
                self.window.displacement(x, y, &mut d);
                cs.push(d);
            }
        }
        let full = self.window.alpha() * half.powi(dim as i32);
        let tol = full * a.rel_tol;
        match uncovered_volume(dim, &cs, half, tol) {
            Ok(v) => v,
            Err(Error::Quadrature { estimate, .. }) => T::lit(estimate).max(T::zero()).min(full),
            Err(_) => full,
        }
    }

    /// Whether `u(xi) > 0`.
    pub fn admissible(&self, xi: &PointConfig<T>) -> bool {
        match &self.kind {
            ModelKind::Poisson { beta } => {
                beta.constant().map_or(true, |b| b > T::zero() || xi.is_empty())
                    && xi.iter().all(|p| beta.value(&self.window, p) > T::zero())
            }
            ModelKind::AreaInteraction(_) => true,
            ModelKind::Pip(p) => {
                let can_vanish = p.phi.hard_core().is_some()
                    || matches!(p.phi, Interaction::LennardJones { .. } | Interaction::Custom { .. })
                    || matches!(&p.phi, Interaction::Step { values, .. } if values.iter().any(|v| *v == T::zero()));
                if xi.iter().any(|x| p.beta.value(&self.window, x) == T::zero()) {
                    return false;
                }
                if !can_vanish {
                    return true;
                }
                let n = xi.len();
                for i in 0..n {
                    for j in i + 1..n {
                        let (a, b) = (xi.point(i), xi.point(j));
                        if p.phi.value(a, b, self.window.distance(a, b)) == T::zero() {
                            return false;
                        }
                    }
                }
                true
            }
            ModelKind::Conditioned(c) => c.base.admissible(xi) && in_ak(&self.window, xi, c.k, c.delta),
        }
    }

    /// `ln u(xi)`; `-inf` when the density vanishes.
    pub fn ln_unnormalized_density(&self, xi: &PointConfig<T>) -> T {
        let w = &self.window;
        match &self.kind {
            ModelKind::Poisson { beta } => xi.iter().map(|x| beta.value(w, x).ln()).sum(),
            ModelKind::Pip(p) => {
                let mut s = T::zero();
                let n = xi.len();
                for i in 0..n {
                    let x = xi.point(i);
                    s = s + p.beta.value(w, x).ln();
                    for j in i + 1..n {
                        let y = xi.point(j);
                        s = s + p.phi.value(x, y, w.distance(x, y)).ln();
                    }
                }
                s
            }
            ModelKind::AreaInteraction(a) => {
                // telescoping: |∪ B| = Σ_i |B(x_i) \ ∪_{j<i} B(x_j)|
                let mut union = T::zero();
                for i in 0..xi.len() {
                    let prev = (0..i).map(|j| xi.point(j));
                    union = union + self.uncovered(a, xi.point(i), prev);
                }
                T::from_usize_lossy(xi.len()) * a.beta.ln() - union * a.gamma.ln()
            }
            ModelKind::Conditioned(c) => {
                if in_ak(w, xi, c.k, c.delta) {
                    c.base.ln_unnormalized_density(xi)
                } else {
                    T::neg_infinity()
                }
            }
        }
    }

    /// `u(xi)`, the unnormalized density with respect to the unit-rate Poisson process.
    pub fn unnormalized_density(&self, xi: &PointConfig<T>) -> T {
        match &self.kind {
            ModelKind::Pip(p) if xi.len() <= LOG_SPACE_THRESHOLD => {
                let w = &self.window;
                let n = xi.len();
                let mut prod = T::one();
                for i in 0..n {
                    let x = xi.point(i);
                    prod = prod * p.beta.value(w, x);
                    for j in i + 1..n {
                        let y = xi.point(j);
                        prod = prod * p.phi.value(x, y, w.distance(x, y));
                    }
                }
                prod
            }
            ModelKind::Poisson { beta } if xi.len() <= LOG_SPACE_THRESHOLD => {
                xi.iter().fold(T::one(), |a, x| a * beta.value(&self.window, x))
            }
            ModelKind::Conditioned(c) => {
                if in_ak(&self.window, xi, c.k, c.delta) {
                    c.base.unnormalized_density(xi)
                } else {
                    T::zero()
                }
            }
            _ => self.ln_unnormalized_density(xi).exp(),
        }
    }

    /// Multiplier `M` with `λ(x|xi) <= M beta(x)` for every admissible `xi`.
    pub fn envelope_const(&self) -> Result<T> {
        match &self.kind {
            ModelKind::Poisson { .. } => Ok(T::one()),
            ModelKind::AreaInteraction(a) => {
                let half = a.big_r * T::lit(0.5);
                let full = self.window.alpha() * half.powi(self.window.dim() as i32);
                Ok((-full * a.gamma.ln()).exp())
            }
            ModelKind::Pip(p) => {
                if p.phi.is_inhibitory() {
                    return Ok(T::one());
                }
                if let (Some(h), false) = (p.phi.hard_core(), p.lj.is_some()) {
                    // every admissible configuration lies in A_1 with delta = h
                    let k = p.phi.constants();
                    let m = covering_m(self.window.dim(), k.r, k.big_r, h);
                    return Ok(k.c.powf(m));
                }
                Err(Error::Stability(format!(
                    "{} interaction is not locally stable; restrict it with restrict_to_ak",
                    self.kind_name()
                )))
            }
            ModelKind::Conditioned(c) => {
                let own = c.mk();
                Ok(match c.base.envelope_const() {
                    Ok(b) => b.min(own),
                    Err(_) => own,
                })
            }
        }
    }

    /// Local-stability envelope `psi*(x) >= sup_xi λ(x|xi)`.
    pub fn envelope(&self, x: &[T]) -> Result<T> {
        Ok(self.beta(x) * self.envelope_const()?)
    }

    /// Upper bound on `sup_x λ(x|xi)` for the given configuration. Finite for
    /// every model with bounded interaction, including non-locally-stable ones.
    pub fn birth_rate_bound(&self, xi: &PointConfig<T>) -> Result<T> {
        let beta = self.beta_max();
        let env = self.envelope_const();
        let per_state = self.pip_constants().map(|k| {
            if k.c <= T::one() {
                T::one()
            } else {
                k.c.powi(xi.len() as i32)
            }
        });
        let factor = match (env, per_state) {
            (Ok(e), Some(s)) => e.min(s),
            (Ok(e), None) => e,
            (Err(_), Some(s)) => s,
            (Err(e), None) => return Err(e),
        };
        let b = beta * factor;
        if b.is_finite() {
            Ok(b)
        } else {
            Err(Error::Stability("birth rate bound overflows".into()))
        }
    }

    /// The restriction to `A_k`: at most `k` points in every closed ball of
    /// radius `delta / 2`.
    pub fn restrict_to_ak(&self, k: usize, delta: T) -> Result<Model<T>> {
        if k == 0 || !(delta > T::zero()) {
            return Err(Error::param("restriction needs k >= 1 and delta > 0"));
        }
        let dim = self.window.dim();
        let (m, ln_mk) = match &self.unconditioned().kind {
            ModelKind::Poisson { .. } => (T::zero(), T::zero()),
            ModelKind::AreaInteraction(_) => (T::zero(), self.unconditioned().envelope_const()?.ln()),
            ModelKind::Pip(p) => {
                if let Some(lj) = &p.lj {
                    let m = if lj.r < lj.big_r {
                        covering_m(dim, lj.r, lj.big_r, delta)
                    } else {
                        T::zero()
                    };
                    (m, lj_ln_mk(dim, lj, k, delta)?)
                } else {
                    let c = p.phi.constants();
                    if c.c <= T::one() || !(c.r < c.big_r) {
                        (T::zero(), T::zero())
                    } else {
                        let m = covering_m(dim, c.r, c.big_r, delta);
                        (m, m * T::from_usize_lossy(k) * c.c.ln())
                    }
                }
            }
            ModelKind::Conditioned(_) => unreachable!(),
        };
        Model::new(
            self.window.clone(),
            ModelKind::Conditioned(Box::new(Conditioned {
                base: self.unconditioned().clone(),
                k,
                delta,
                m,
                ln_mk,
            })),
        )
    }

    /// Ruelle constants: explicit ones, else `(1, sup envelope)` for locally stable models.
    pub fn ruelle(&self) -> Option<Ruelle<T>> {
        if let Some(r) = self.pip_params().and_then(|p| p.ruelle) {
            if self.conditioning().is_none() {
                return Some(r);
            }
        }
        let e = self.envelope_const().ok()?;
        Some(Ruelle {
            c_star: T::one(),
            psi_star: self.beta_max() * e,
        })
    }

    /// Checks the stability conditions and declared constants on a sample grid.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let dim = self.window.dim();
        match &self.unconditioned().kind {
            ModelKind::Poisson { beta } => {
                if let Err(e) = beta.check(&self.window) {
                    rep.violations.push(e.to_string());
                }
            }
            ModelKind::AreaInteraction(a) => {
                if self.window.is_torus() && a.big_r + a.big_r > self.window.min_edge() {
                    rep.warnings.push("interaction balls wrap onto themselves on this torus".into());
                }
                if a.gamma > T::one() {
                    rep.violations.push("gamma must not exceed 1".into());
                }
            }
            ModelKind::Pip(p) => self.validate_pip(p, dim, &mut rep),
            ModelKind::Conditioned(_) => unreachable!(),
        }
        rep.pass = rep.violations.is_empty();
        rep
    }

    fn validate_pip(&self, p: &PipParams<T>, dim: usize, rep: &mut ValidationReport) {
        if let Err(e) = p.phi.check() {
            rep.violations.push(e.to_string());
        }
        if let Err(e) = p.beta.check(&self.window) {
            rep.violations.push(e.to_string());
        }
        let k = p.phi.constants();
        let tol = T::lit(1e-12);
        let check_at = |x: &[T], y: &[T], rep: &mut ValidationReport| {
            let d = self.window.distance(x, y);
            let a = p.phi.value(x, y, d);
            let b = p.phi.value(y, x, d);
            if (a - b).abs() > tol * (T::one() + a.abs()) {
                push_once(&mut rep.violations, "symmetry: phi(x, y) != phi(y, x)");
            }
            if !(a >= T::zero()) {
                push_once(&mut rep.violations, "phi must be non-negative");
            }
            if a > k.c * (T::one() + tol) {
                push_once(&mut rep.violations, "upper bound (UB): phi exceeds C");
            }
            if d <= k.delta && a > k.gamma * (T::one() + tol) {
                push_once(&mut rep.violations, "repulsion (RC): phi exceeds gamma within delta");
            }
            if p.lj.is_none() && (d <= k.r || d > k.big_r) && a > T::one() + tol {
                push_once(&mut rep.violations, "interaction ranges (IR): phi exceeds 1 outside (r, R]");
            }
        };
        // sampled pairs: a coarse grid against a few anchor points
        let n = 9usize;
        let lo = self.window.lower();
        let mut anchors: Vec<Vec<T>> = vec![self.window.center(), lo.to_vec()];
        let mut q = self.window.center();
        q[0] = q[0] + k.r.max(k.big_r) * T::lit(0.5);
        self.window.wrap(&mut q);
        anchors.push(q);
        let cells = n.pow(dim as u32).min(20_000);
        let mut idx = vec![0usize; dim];
        let mut frac = vec![T::zero(); dim];
        let mut y = vec![T::zero(); dim];
        for _ in 0..cells {
            for i in 0..dim {
                frac[i] = T::from_usize_lossy(idx[i]) / T::from_usize_lossy(n - 1);
            }
            self.window.from_unit(&frac, &mut y);
            for a in &anchors {
                check_at(a, &y, rep);
            }
            for i in (0..dim).rev() {
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
            }
        }
        // radial profiles: dense sampling in the distance
        if p.phi.is_radial() {
            let top = k.big_r.max(k.r).max(T::lit(1e-9)) * T::lit(3.0);
            let steps = 4000;
            for s in 1..=steps {
                let d = top * T::from_usize_lossy(s) / T::from_usize_lossy(steps);
                let v = p.phi.radial_value(d).unwrap_or(T::zero());
                if v > k.c * (T::one() + tol) {
                    push_once(&mut rep.violations, "upper bound (UB): phi exceeds C");
                }
                if d <= k.delta && v > k.gamma * (T::one() + tol) {
                    push_once(&mut rep.violations, "repulsion (RC): phi exceeds gamma within delta");
                }
                if p.lj.is_none() && (d <= k.r || d > k.big_r) && v > T::one() + tol {
                    push_once(&mut rep.violations, "interaction ranges (IR): phi exceeds 1 outside (r, R]");
                }
            }
        }
        if !p.phi.is_inhibitory() && !(k.delta <= k.r && (k.r < k.big_r || k.r == k.big_r)) {
            rep.violations.push("constants must satisfy delta <= r < R or r = R".into());
        }
        if let Interaction::BiScaleStrauss { gamma, r, c, radius } = &p.phi {
            let m = covering_m(dim, *r, *radius, *r);
            let limit = if *gamma == T::zero() {
                T::infinity()
            } else {
                gamma.powf(-T::one() / (m + m))
            };
            if *c > limit {
                rep.violations.push(format!(
                    "Ruelle criterion: C = {c} exceeds gamma^(-1/(2m)) = {limit} with m = {m}"
                ));
            }
        }
        if let Some(lj) = &p.lj {
            self.validate_lj(lj, dim, rep);
        }
        if !p.phi.is_inhibitory() && p.phi.hard_core().is_none() && p.ruelle.is_none() && p.lj.is_none() {
            rep.warnings.push("non-inhibitory interaction without declared Ruelle constants".into());
        }
        if !p.phi.is_radial() {
            rep.warnings.push("conditions checked on a sample grid only".into());
        }
    }

    fn validate_lj(&self, lj: &LennardJonesParams<T>, dim: usize, rep: &mut ValidationReport) {
        if !(lj.rho > T::from_usize_lossy(dim)) {
            rep.violations.push("Lennard-Jones: rho must exceed D".into());
        }
        let steps = 20_000;
        let top = lj.big_r * T::lit(20.0);
        let mut near_fail: Option<T> = None;
        let mut far_fail = false;
        let mut floor_fail = false;
        for s in 1..=steps {
            let d = top * T::from_usize_lossy(s) / T::from_usize_lossy(steps);
            let v = lj_potential(lj.big_r, d);
            let p = d.powf(-lj.rho);
            if d <= lj.r && v < p && near_fail.is_none() {
                near_fail = Some(d);
            }
            if d >= lj.big_r && v < -p {
                far_fail = true;
            }
            if v < -lj.m * (T::one() + T::lit(1e-12)) {
                floor_fail = true;
            }
        }
        if let Some(d0) = near_fail {
            rep.warnings.push(format!(
                "Lennard-Jones condition V(d) >= d^-rho fails for d in [{d0:.6}, r]; it holds below, which covers every delta < {d0:.6}"
            ));
        }
        if far_fail {
            rep.violations.push("Lennard-Jones condition V(d) >= -d^-rho fails beyond R (requires R <= 1 for the 12-6 potential)".into());
        }
        if floor_fail {
            rep.violations.push("Lennard-Jones condition V >= -M fails".into());
        }
    }
}

fn push_once(v: &mut Vec<String>, msg: &str) {
    if !v.iter().any(|s| s == msg) {
        v.push(msg.to_string());
    }
}
