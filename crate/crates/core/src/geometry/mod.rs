//! Windows, point configurations, configuration metrics and quadrature over
//! the window.

mod config;
mod metrics;
mod radial;

pub use config::PointConfig;
pub use metrics::{d1_distance, symdiff_norm, MAX_ASSIGNMENT};
pub use radial::{ball_measure, radial_integral, RadialProfile, SmoothProfile, StepProfile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{dyadic_box, BoxOptions, Estimate};
use crate::scalar::{unit_ball_volume, Real};

#[derive(Clone, Debug, Deserialize)]
struct RawWindow<T> {
    dim: usize,
    lower: Vec<T>,
    upper: Vec<T>,
    #[serde(default)]
    torus: bool,
}

/// Axis-aligned box in `R^D` with Lebesgue measure, optionally with
/// opposite faces identified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow<T>", bound(deserialize = "T: Real"))]
pub struct Window<T> {
    dim: usize,
    lower: Vec<T>,
    upper: Vec<T>,
    torus: bool,
}

impl<T: Real> TryFrom<RawWindow<T>> for Window<T> {
    type Error = Error;

    fn try_from(raw: RawWindow<T>) -> Result<Self> {
        if raw.lower.len() != raw.dim || raw.upper.len() != raw.dim {
            return Err(Error::Window(format!(
                "dim = {} but bounds have lengths {} and {}",
                raw.dim,
                raw.lower.len(),
                raw.upper.len()
            )));
        }
        Window::new(raw.lower, raw.upper, raw.torus)
    }
}

impl<T: Real> Window<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, torus: bool) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Window("bounds must be non-empty and of equal length".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && *l < *u) {
                return Err(Error::Window(format!("axis {i}: need lower < upper, got {l} and {u}")));
            }
        }
        Ok(Window {
            dim: lower.len(),
            lower,
            upper,
            torus,
        })
    }

    /// The unit cube `[0,1]^dim`.
    pub fn unit(dim: usize, torus: bool) -> Self {
        Window::new(vec![T::zero(); dim], vec![T::one(); dim], torus).expect("unit cube is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn lower(&self) -> &[T] {
        &self.lower
    }
    pub fn upper(&self) -> &[T] {
        &self.upper
    }
    pub fn is_torus(&self) -> bool {
        self.torus
    }

    pub fn edge(&self, i: usize) -> T {
        self.upper[i] - self.lower[i]
    }

    pub fn min_edge(&self) -> T {
        (0..self.dim).map(|i| self.edge(i)).fold(T::infinity(), T::min)
    }

    pub fn volume(&self) -> T {
        (0..self.dim).map(|i| self.edge(i)).fold(T::one(), |a, b| a * b)
    }

    pub fn center(&self) -> Vec<T> {
        (0..self.dim)
            .map(|i| (self.lower[i] + self.upper[i]) * T::lit(0.5))
            .collect()
    }

    /// Volume of the unit ball `alpha_D` for this window's dimension.
    pub fn alpha(&self) -> T {
        unit_ball_volume(self.dim)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim && x.iter().enumerate().all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }

    /// Signed per-axis difference `y - x`, reduced to the minimum image on a torus.
    #[inline]
    pub fn delta(&self, i: usize, x: T, y: T) -> T {
        let mut d = y - x;
        if self.torus {
            let l = self.edge(i);
            let h = l * T::lit(0.5);
            if d > h {
                d = d - l;
            } else if d < -h {
                d = d + l;
            }
        }
        d
    }

    /// Displacement from `x` to `y` (minimum image on a torus).
    pub fn displacement(&self, x: &[T], y: &[T], out: &mut [T]) {
        for i in 0..self.dim {
            out[i] = self.delta(i, x[i], y[i]);
        }
    }

    #[inline]
    pub fn dist2(&self, x: &[T], y: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.dim {
            let d = self.delta(i, x[i], y[i]);
            s = s + d * d;
        }
        s
    }

    #[inline]
    pub fn distance(&self, x: &[T], y: &[T]) -> T {
        self.dist2(x, y).sqrt()
    }

    /// Maps a point into the window by periodic wrapping (torus) or clamping.
    pub fn wrap(&self, x: &mut [T]) {
        for i in 0..self.dim {
            if self.torus {
                let l = self.edge(i);
                let mut v = (x[i] - self.lower[i]) % l;
                if v < T::zero() {
                    v = v + l;
                }
                x[i] = self.lower[i] + v;
            } else {
                x[i] = x[i].max(self.lower[i]).min(self.upper[i]);
            }
        }
    }

    /// Point with coordinates `lower + frac * edge`.
    pub fn from_unit(&self, frac: &[T], out: &mut [T]) {
        for i in 0..self.dim {
            out[i] = self.lower[i] + frac[i] * self.edge(i);
            if out[i] >= self.upper[i] {
                out[i] = self.upper[i];
            }
        }
    }

    /// Volume of the inner parallel set `{x : d(x, X^c) >= r}`. A torus has
    /// no boundary, so its erosion is the whole window.
    pub fn erosion_volume(&self, r: T) -> T {
        if self.torus {
            return self.volume();
        }
        (0..self.dim)
            .map(|i| (self.edge(i) - r - r).max(T::zero()))
            .fold(T::one(), |a, b| a * b)
    }

    /// Largest radius of a ball around `y` that stays inside the window
    /// (for a torus: that does not wrap onto itself).
    pub fn inscribed_radius(&self, y: &[T]) -> T {
        if self.torus {
            return self.min_edge() * T::lit(0.5);
        }
        (0..self.dim)
            .map(|i| (y[i] - self.lower[i]).min(self.upper[i] - y[i]))
            .fold(T::infinity(), T::min)
    }

    /// Distance from `y` along the unit direction `u` to the boundary of the
    /// region over which the minimum-image chart around `y` is one-to-one.
    pub fn exit_distance(&self, y: &[T], u: &[T]) -> T {
        let mut t = T::infinity();
        for i in 0..self.dim {
            let ui = u[i];
            if ui == T::zero() {
                continue;
            }
            let room = if self.torus {
                self.edge(i) * T::lit(0.5)
            } else if ui > T::zero() {
                self.upper[i] - y[i]
            } else {
                y[i] - self.lower[i]
            };
            t = t.min(room / ui.abs());
        }
        t
    }
}

/// Integrates `f` over the window with absolute error at most `tol`.
pub fn integrate_window<T: Real, F>(w: &Window<T>, f: F, tol: T) -> Result<T>
where
    F: FnMut(&[T]) -> T,
{
    integrate_window_with(w, f, tol, BoxOptions::for_dim(w.dim())).map(|e| e.value)
}

/// As [`integrate_window`], with explicit subdivision options and the full estimate.
pub fn integrate_window_with<T: Real, F>(w: &Window<T>, f: F, tol: T, opts: BoxOptions) -> Result<Estimate<T>>
where
    F: FnMut(&[T]) -> T,
{
    if !(tol > T::zero()) {
        return Err(Error::param("tolerance must be positive"));
    }
    dyadic_box(f, w.lower(), w.upper(), tol, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_validation() {
        assert!(Window::<f64>::new(vec![0.0], vec![0.0], false).is_err());
        assert!(Window::<f64>::new(vec![0.0, 1.0], vec![1.0], false).is_err());
        let w: Window<f64> = serde_json::from_str(r#"{"dim":2,"lower":[0,0],"upper":[2,3],"torus":true}"#).unwrap();
        assert_eq!(w.volume(), 6.0);
        assert!(serde_json::from_str::<Window<f64>>(r#"{"dim":3,"lower":[0,0],"upper":[2,3]}"#).is_err());
        assert!(serde_json::from_str::<Window<f64>>(r#"{"dim":1,"lower":[1],"upper":[0]}"#).is_err());
    }

    #[test]
    fn torus_distance_wraps() {
        let w = Window::<f64>::unit(2, true);
        assert!((w.distance(&[0.05, 0.5], &[0.95, 0.5]) - 0.1).abs() < 1e-12);
        let w = Window::<f64>::unit(2, false);
        assert!((w.distance(&[0.05, 0.5], &[0.95, 0.5]) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn wrap_and_erosion() {
        let w = Window::<f64>::unit(2, true);
        let mut x = [1.25, -0.25];
        w.wrap(&mut x);
        assert!((x[0] - 0.25).abs() < 1e-12 && (x[1] - 0.75).abs() < 1e-12);
        let w = Window::<f64>::unit(2, false);
        assert!((w.erosion_volume(0.2) - 0.36).abs() < 1e-12);
        assert_eq!(w.erosion_volume(0.6), 0.0);
    }

    #[test]
    fn integrate_window_examples() {
        let w = Window::<f64>::unit(2, false);
        assert!((integrate_window(&w, |_| 1.0, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!((integrate_window(&w, |_| 50.0, 1e-9).unwrap() - 50.0).abs() < 1e-10);
        let tol = 1e-4;
        let v = integrate_window(
            &w,
            |x| {
                let d = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
                if d <= 0.1 {
                    1.0
                } else {
                    0.0
                }
            },
            tol,
        )
        .unwrap();
        let b = ball_measure(&w, &[0.5, 0.5], 0.1);
        assert!((v - b).abs() <= 2.0 * tol, "{v} vs {b}");
        assert!((v - 0.031_415_9).abs() < 2.0 * tol);
    }

    #[test]
    fn integrate_window_budget_error_carries_estimate() {
        let w = Window::<f64>::unit(2, false);
        let opts = BoxOptions {
            min_depth: 0,
            max_depth: 40,
            max_evals: 500,
        };
        let r = integrate_window_with(&w, |x| if x[0] * x[0] + x[1] * x[1] < 0.5 { 1.0 } else { 0.0 }, 1e-12, opts);
        match r {
            Err(Error::Quadrature { estimate, .. }) => assert!((estimate - std::f64::consts::PI / 8.0).abs() < 0.05),
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }
}
