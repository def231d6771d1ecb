//! Integrals of radial functions `g(d(x, y))` over the window, evaluated in
//! polar coordinates around `y`.

use crate::error::Result;
use crate::quadrature::{gauss_kronrod, sphere_integral};
use crate::scalar::{unit_sphere_area, Real};

use super::Window;

/// A radial profile `g(s)` described through its radial cumulative
/// `G(t) = ∫_0^t g(s) s^{D-1} ds`.
pub trait RadialProfile<T: Real> {
    /// `G(t)` for `t >= 0`.
    fn cumulative(&self, dim: usize, t: T) -> Result<T>;

    /// Radius beyond which `g` vanishes, if any.
    fn support(&self) -> Option<T>;
}

/// Piecewise-constant profile: value `values[i]` on `(radii[i-1], radii[i]]`
/// (with `radii[-1] = 0`), zero beyond the last radius.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile<T> {
    pub radii: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> StepProfile<T> {
    pub fn indicator(r: T) -> Self {
        StepProfile {
            radii: vec![r],
            values: vec![T::one()],
        }
    }
}

impl<T: Real> RadialProfile<T> for StepProfile<T> {
    fn cumulative(&self, dim: usize, t: T) -> Result<T> {
        let d = T::from_usize_lossy(dim);
        let mut acc = T::zero();
        let mut prev = T::zero();
        for (&r, &v) in self.radii.iter().zip(&self.values) {
            let hi = r.min(t);
            if hi > prev {
                acc = acc + v * (hi.powi(dim as i32) - prev.powi(dim as i32)) / d;
            }
            if r >= t {
                break;
            }
            prev = r;
        }
        Ok(acc)
    }

    fn support(&self) -> Option<T> {
        self.radii.last().copied()
    }
}

/// Profile given by a closure, integrated radially by adaptive quadrature.
pub struct SmoothProfile<T, F> {
    pub g: F,
    pub breaks: Vec<T>,
    pub support: Option<T>,
    pub tol: T,
}

impl<T: Real, F: Fn(T) -> T> RadialProfile<T> for SmoothProfile<T, F> {
    fn cumulative(&self, dim: usize, t: T) -> Result<T> {
        let t = match self.support {
            Some(s) => t.min(s),
            None => t,
        };
        let e = gauss_kronrod(
            |s: T| Ok((self.g)(s) * s.powi(dim as i32 - 1)),
            T::zero(),
            t,
            &self.breaks,
            self.tol,
            2_000_000,
        )?;
        Ok(e.value)
    }

    fn support(&self) -> Option<T> {
        self.support
    }
}

/// `∫_X g(d(x, y)) dx` for a radial profile `g` centred at `y`.
///
/// Uses the closed form `|S^{D-1}| G(support)` when the support ball fits in
/// the window around `y`, otherwise integrates `G(exit distance)` over
/// directions.
pub fn radial_integral<T: Real, P: RadialProfile<T> + ?Sized>(w: &Window<T>, y: &[T], g: &P, tol: T) -> Result<T> {
    let d = w.dim();
    let inscribed = w.inscribed_radius(y);
    if let Some(s) = g.support() {
        if s <= inscribed {
            return Ok(unit_sphere_area::<T>(d) * g.cumulative(d, s)?);
        }
    }
    let est = sphere_integral(
        d,
        |u: &[T]| {
            let t = w.exit_distance(y, u);
            g.cumulative(d, t)
        },
        tol,
        5_000_000,
    )?;
    Ok(est.value)
}

/// Lebesgue measure of the closed ball `B(center, r)` intersected with the
/// window (wrapped on a torus).
pub fn ball_measure<T: Real>(w: &Window<T>, center: &[T], r: T) -> T {
    if !(r > T::zero()) {
        return T::zero();
    }
    let vol = w.volume();
    let tol = (vol * T::lit(1e-11)).max(T::epsilon() * vol * T::lit(16.0));
    radial_integral(w, center, &StepProfile::indicator(r), tol)
        .map(|v| v.min(vol))
        .unwrap_or_else(|_| vol.min(w.alpha() * r.powi(w.dim() as i32)))
}
