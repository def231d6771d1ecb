//! Pair kernels `k(x, y) >= 0` built from interactions, and the
//! activity-weighted integrals `∫ beta(x) k(x, y) dx` used by the bounds.

use std::sync::Arc;

use crate::error::Result;
use crate::geometry::{integrate_window, radial_integral, RadialProfile, StepProfile, Window};
use crate::quadrature::{gauss_kronrod, sphere_integral};
use crate::scalar::Real;

use super::{Activity, Interaction};

type RadialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type PairFn<T> = Arc<dyn Fn(&[T], &[T], T) -> T + Send + Sync>;

/// Radial profile of a kernel: either piecewise constant or a smooth
/// function with known kinks.
#[derive(Clone)]
pub enum Profile<T> {
    Step(StepProfile<T>),
    Smooth {
        g: RadialFn<T>,
        breaks: Vec<T>,
        support: Option<T>,
    },
}

impl<T: Real> Profile<T> {
    pub fn value(&self, s: T) -> T {
        match self {
            Profile::Step(p) => {
                for (r, v) in p.radii.iter().zip(&p.values) {
                    if s <= *r {
                        return *v;
                    }
                }
                T::zero()
            }
            Profile::Smooth { g, support, .. } => match support {
                Some(r) if s > *r => T::zero(),
                _ => g(s),
            },
        }
    }

    pub fn support(&self) -> Option<T> {
        match self {
            Profile::Step(p) => Some(p.radii.last().copied().unwrap_or(T::zero())),
            Profile::Smooth { support, .. } => *support,
        }
    }

    fn breaks(&self) -> Vec<T> {
        match self {
            Profile::Step(p) => p.radii.clone(),
            Profile::Smooth { breaks, .. } => breaks.clone(),
        }
    }
}

struct WithTol<'a, T> {
    p: &'a Profile<T>,
    tol: T,
}

impl<T: Real> RadialProfile<T> for WithTol<'_, T> {
    fn cumulative(&self, dim: usize, t: T) -> Result<T> {
        match self.p {
            Profile::Step(s) => s.cumulative(dim, t),
            Profile::Smooth { g, breaks, support } => {
                let t = support.map_or(t, |s| t.min(s));
                if !(t > T::zero()) {
                    return Ok(T::zero());
                }
                let e = gauss_kronrod(|s: T| Ok(g(s) * s.powi(dim as i32 - 1)), T::zero(), t, breaks, self.tol, 2_000_000)?;
                Ok(e.value)
            }
        }
    }

    fn support(&self) -> Option<T> {
        self.p.support()
    }
}

/// A non-negative pair function with an optional radial description.
#[derive(Clone)]
pub struct Kernel<T> {
    pub profile: Option<Profile<T>>,
    pub pair: PairFn<T>,
}

fn step_union<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let mut r: Vec<T> = a.iter().chain(b).copied().collect();
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r.dedup();
    r
}

impl<T: Real> Kernel<T> {
    /// Kernel from a radial function, used when no step form is available.
    fn radial(g: RadialFn<T>, breaks: Vec<T>, support: Option<T>) -> Self {
        let h = g.clone();
        let sup = support;
        Kernel {
            pair: Arc::new(move |_, _, d| match sup {
                Some(r) if d > r => T::zero(),
                _ => h(d),
            }),
            profile: Some(Profile::Smooth { g, breaks, support }),
        }
    }

    fn step(radii: Vec<T>, values: Vec<T>) -> Self {
        let p = Profile::Step(StepProfile { radii, values });
        let q = p.clone();
        Kernel {
            pair: Arc::new(move |_, _, d| q.value(d)),
            profile: Some(p),
        }
    }

    /// `1 - phi`, for inhibitory interactions.
    pub fn deficit(phi: &Interaction<T>) -> Self {
        Self::combine(phi, None, |a, _| (T::one() - a).max(T::zero()))
    }

    /// `|phi_1 - phi_2|`.
    pub fn difference(a: &Interaction<T>, b: &Interaction<T>) -> Self {
        Self::combine(a, Some(b), |x, y| (x - y).abs())
    }

    /// `1` within `delta`, `|phi - 1|` beyond.
    pub fn outside_deviation(phi: &Interaction<T>, delta: T) -> Self {
        let base = Self::combine(phi, None, |a, _| (a - T::one()).abs());
        match base.profile {
            Some(Profile::Step(s)) => {
                let mut radii = vec![delta];
                let mut values = vec![T::one()];
                for (r, v) in s.radii.iter().zip(&s.values) {
                    if *r > delta {
                        radii.push(*r);
                        values.push(*v);
                    }
                }
                Self::step(radii, values)
            }
            Some(Profile::Smooth { g, mut breaks, support }) => {
                breaks.push(delta);
                let support = support.map(|s| s.max(delta));
                Self::radial(Arc::new(move |d| if d <= delta { T::one() } else { g(d) }), breaks, support)
            }
            None => {
                let p = base.pair;
                Kernel {
                    profile: None,
                    pair: Arc::new(move |x, y, d| if d <= delta { T::one() } else { p(x, y, d) }),
                }
            }
        }
    }

    fn combine(a: &Interaction<T>, b: Option<&Interaction<T>>, f: fn(T, T) -> T) -> Self {
        let one = Interaction::Constant(T::one());
        let b = b.unwrap_or(&one);
        if let (Some((ra, _)), Some((rb, _))) = (a.step_profile(), b.step_profile()) {
            let radii = step_union(&ra, &rb);
            let values = radii
                .iter()
                .map(|&r| f(a.radial_value(r).unwrap(), b.radial_value(r).unwrap()))
                .collect();
            return Self::step(radii, values);
        }
        if a.is_radial() && b.is_radial() {
            let (a2, b2) = (a.clone(), b.clone());
            let support = match (a.support(), b.support()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            };
            let breaks = step_union(&a.breakpoints(), &b.breakpoints());
            return Self::radial(
                Arc::new(move |d| f(a2.radial_value(d).unwrap(), b2.radial_value(d).unwrap())),
                breaks,
                support,
            );
        }
        let (a2, b2) = (a.clone(), b.clone());
        Kernel {
            profile: None,
            pair: Arc::new(move |x, y, d| f(a2.value(x, y, d), b2.value(x, y, d))),
        }
    }

    /// Whether the kernel vanishes identically (exactly, for step forms).
    pub fn is_zero(&self) -> bool {
        match &self.profile {
            Some(Profile::Step(s)) => s.values.iter().all(|v| *v == T::zero()),
            _ => false,
        }
    }
}

/// `∫_X beta(x) k(x, y) dx`.
pub fn weighted_integral<T: Real>(w: &Window<T>, beta: &Activity<T>, y: &[T], k: &Kernel<T>, tol: T) -> Result<T> {
    if k.is_zero() {
        return Ok(T::zero());
    }
    let dim = w.dim();
    match (&k.profile, beta.constant()) {
        (Some(p), Some(b)) => {
            if b == T::zero() {
                return Ok(T::zero());
            }
            let inner = WithTol { p, tol: tol / b };
            Ok(b * radial_integral(w, y, &inner, tol / b)?)
        }
        (Some(p), None) => {
            // polar coordinates around y with the activity inside the radial integral
            let breaks = p.breaks();
            let mut x = vec![T::zero(); dim];
            let est = sphere_integral(
                dim,
                |u: &[T]| {
                    let mut t = w.exit_distance(y, u);
                    if let Some(s) = p.support() {
                        t = t.min(s);
                    }
                    if !(t > T::zero()) {
                        return Ok(T::zero());
                    }
                    let e = gauss_kronrod(
                        |s: T| {
                            for i in 0..dim {
                                x[i] = y[i] + s * u[i];
                            }
                            w.wrap(&mut x);
                            Ok(beta.value(w, &x) * p.value(s) * s.powi(dim as i32 - 1))
                        },
                        T::zero(),
                        t,
                        &breaks,
                        tol,
                        2_000_000,
                    )?;
                    Ok(e.value)
                },
                tol,
                5_000_000,
            )?;
            Ok(est.value)
        }
        (None, _) => {
            let f = &k.pair;
            integrate_window(w, |x: &[T]| beta.value(w, x) * f(x, y, w.distance(x, y)), tol)
        }
    }
}

/// `sup_y ∫_X beta(x) k(x, y) dx`, with `k` non-negative.
///
/// Exact for translation-invariant cases and for kernels whose support fits
/// around the window centre; otherwise the maximum over a grid of `y`,
/// refined until it changes by less than `rel` relatively.
pub fn sup_weighted_integral<T: Real>(w: &Window<T>, beta: &Activity<T>, k: &Kernel<T>, tol: T, rel: T) -> Result<T> {
    let centre = w.center();
    if beta.constant().is_some() {
        let fits = k.profile.as_ref().and_then(|p| p.support()).is_some_and(|s| s <= w.inscribed_radius(&centre));
        if w.is_torus() && k.profile.is_some() || fits {
            return weighted_integral(w, beta, &centre, k, tol);
        }
    }
    let dim = w.dim();
    let mut best = weighted_integral(w, beta, &centre, k, tol)?;
    let mut prev = T::neg_infinity();
    let mut n = 3usize;
    let mut y = vec![T::zero(); dim];
    let mut frac = vec![T::zero(); dim];
    while n.pow(dim as u32) <= 5_000 {
        let mut idx = vec![0usize; dim];
        for _ in 0..n.pow(dim as u32) {
            for i in 0..dim {
                frac[i] = T::from_usize_lossy(idx[i]) / T::from_usize_lossy(n - 1);
            }
            w.from_unit(&frac, &mut y);
            best = best.max(weighted_integral(w, beta, &y, k, tol)?);
            for i in (0..dim).rev() {
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
            }
        }
        if (best - prev).abs() <= rel * best.abs() {
            break;
        }
        prev = best;
        n = 2 * n - 1;
    }
    Ok(best)
}

/// `∫_X nu(y) ∫_X beta(x) k(x, y) dx dy`.
pub fn double_integral<T: Real, N>(w: &Window<T>, beta: &Activity<T>, nu: N, k: &Kernel<T>, tol: T) -> Result<T>
where
    N: Fn(&[T]) -> T,
{
    if k.is_zero() {
        return Ok(T::zero());
    }
    if w.is_torus() && beta.constant().is_some() && k.profile.is_some() {
        let c = w.center();
        let inner = weighted_integral(w, beta, &c, k, tol / w.volume())?;
        let mass = integrate_window(w, |y: &[T]| nu(y), tol)?;
        return Ok(mass * inner);
    }
    let vol = w.volume();
    if let Some(p) = &k.profile {
        let breaks = axis_breaks(w, beta, p);
        let mut y = vec![T::zero(); w.dim()];
        let mut f = |y: &[T]| -> Result<T> {
            let n = nu(y);
            if n == T::zero() {
                return Ok(T::zero());
            }
            Ok(n * weighted_integral(w, beta, y, k, tol / vol)?)
        };
        return iterated(w, &breaks, 0, &mut y, &mut f, tol / vol);
    }
    let mut err = None;
    let v = integrate_window(
        w,
        |y: &[T]| {
            let n = nu(y);
            if n == T::zero() {
                return T::zero();
            }
            match weighted_integral(w, beta, y, k, tol / vol) {
                Ok(v) => n * v,
                Err(e) => {
                    err.get_or_insert(e);
                    T::zero()
                }
            }
        },
        tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Per-axis points where `y -> ∫ beta k(., y)` may fail to be smooth: a wall
/// plus or minus a kernel radius, and the activity grid nodes.
fn axis_breaks<T: Real>(w: &Window<T>, beta: &Activity<T>, p: &Profile<T>) -> Vec<Vec<T>> {
    let mut radii = p.breaks();
    radii.extend(p.support());
    (0..w.dim())
        .map(|i| {
            let (lo, hi) = (w.lower()[i], w.upper()[i]);
            let mut b = Vec::new();
            if !w.is_torus() {
                for &r in &radii {
                    b.push(lo + r);
                    b.push(hi - r);
                }
            }
            if let Activity::Grid { shape, .. } = beta {
                let n = shape[i] - 1;
                for j in 1..n {
                    b.push(lo + (hi - lo) * T::from_usize_lossy(j) / T::from_usize_lossy(n));
                }
            }
            b.retain(|x| *x > lo && *x < hi);
            b.sort_by(|a, c| a.partial_cmp(c).unwrap());
            b.dedup();
            b
        })
        .collect()
}

/// Iterated adaptive Gauss–Kronrod over the window, axis by axis.
fn iterated<T: Real>(
    w: &Window<T>,
    breaks: &[Vec<T>],
    axis: usize,
    y: &mut Vec<T>,
    f: &mut dyn FnMut(&[T]) -> Result<T>,
    tol: T,
) -> Result<T> {
    let (lo, hi) = (w.lower()[axis], w.upper()[axis]);
    // per-axis share of the absolute tolerance on the full volume
    let rest: T = (axis + 1..w.dim()).map(|i| w.edge(i)).fold(T::one(), |a, b| a * b);
    let e = gauss_kronrod(
        |t: T| {
            y[axis] = t;
            if axis + 1 == w.dim() {
                f(y)
            } else {
                let mut inner = y.clone();
                let v = iterated(w, breaks, axis + 1, &mut inner, f, tol);
                v
            }
        },
        lo,
        hi,
        &breaks[axis],
        tol * rest * (hi - lo),
        5_000_000,
    )?;
    Ok(e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn step_difference_of_strauss_pair() {
        let a = Interaction::Strauss { gamma: 0.5, radius: 0.12 };
        let b = Interaction::Strauss { gamma: 0.5, radius: 0.1 };
        let k = Kernel::difference(&a, &b);
        let w = Window::unit(2, true);
        let v = weighted_integral(&w, &Activity::Constant(50.0), &[0.5, 0.5], &k, 1e-12).unwrap();
        assert!((v - 50.0 * 0.5 * PI * (0.0144 - 0.01)).abs() < 1e-10);
        assert!(Kernel::difference(&a, &a).is_zero());
    }

    #[test]
    fn deficit_sup_on_open_window() {
        let s = Interaction::Strauss { gamma: 0.5, radius: 0.1 };
        let k = Kernel::deficit(&s);
        let w = Window::unit(2, false);
        let v = sup_weighted_integral(&w, &Activity::Constant(50.0), &k, 1e-12, 1e-4).unwrap();
        assert!((v - 50.0 * 0.5 * PI * 0.01).abs() < 1e-9);
        let corner = weighted_integral(&w, &Activity::Constant(50.0), &[0.0, 0.0], &k, 1e-12).unwrap();
        assert!((corner - v / 4.0).abs() < 1e-9);
    }

    #[test]
    fn ramp_and_grid_activity() {
        let r = Interaction::Ramp { range: 0.2, floor: 0.0 };
        let k = Kernel::deficit(&r);
        let w = Window::unit(2, true);
        // ∫ (1 - s/0.2) 2 pi s ds on [0, 0.2] = 2 pi 0.04 / 6
        let v = weighted_integral(&w, &Activity::Constant(1.0), &[0.3, 0.3], &k, 1e-12).unwrap();
        assert!((v - 2.0 * PI * 0.04 / 6.0).abs() < 1e-10);
        let grid = Activity::Grid { shape: vec![2, 2], values: vec![1.0; 4] };
        let g = weighted_integral(&w, &grid, &[0.3, 0.3], &k, 1e-10).unwrap();
        assert!((g - v).abs() < 1e-8);
        // outside deviation adds the full ball of radius delta
        let o = Kernel::outside_deviation(&r, 0.05);
        let vo = weighted_integral(&w, &Activity::Constant(1.0), &[0.3, 0.3], &o, 1e-12).unwrap();
        let inner = 2.0 * PI * (0.05f64.powi(2) / 2.0 - 0.05f64.powi(3) / 0.6);
        assert!((vo - (v - inner + PI * 0.0025)).abs() < 1e-10);
    }

    #[test]
    fn double_integral_non_torus() {
        let s = Interaction::Strauss { gamma: 0.0, radius: 0.1 };
        let k = Kernel::deficit(&s);
        let w = Window::unit(2, false);
        let v = double_integral(&w, &Activity::Constant(1.0), |_| 1.0, &k, 1e-7).unwrap();
        // ∫∫ 1{|x-y| <= r} over the unit square = pi r^2 - (8/3) r^3 + r^4 / 2
        let r: f64 = 0.1;
        let exact = PI * r * r - 8.0 / 3.0 * r.powi(3) + r.powi(4) / 2.0;
        assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
    }
}
