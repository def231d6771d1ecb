use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball_measure, Window};
use crate::scalar::Real;

/// Activity function `beta(x)`: a constant, or values on a regular node grid
/// spanning the window with multilinear interpolation between nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound(deserialize = "T: Real"))]
pub enum Activity<T> {
    Constant(T),
    Grid {
        /// Nodes per axis (each at least 2).
        shape: Vec<usize>,
        /// Node values, first axis slowest.
        values: Vec<T>,
    },
}

impl<T: Real> Activity<T> {
    pub fn check(&self, w: &Window<T>) -> Result<()> {
        match self {
            Activity::Constant(b) => {
                if *b >= T::zero() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param(format!("activity must be non-negative and finite, got {b}")))
                }
            }
            Activity::Grid { shape, values } => {
                if shape.len() != w.dim() || shape.iter().any(|&n| n < 2) {
                    return Err(Error::param("activity grid needs at least two nodes on every axis"));
                }
                if shape.iter().product::<usize>() != values.len() {
                    return Err(Error::param("activity grid values do not match its shape"));
                }
                if values.iter().any(|v| !(*v >= T::zero() && v.is_finite())) {
                    return Err(Error::param("activity grid values must be non-negative"));
                }
                Ok(())
            }
        }
    }

    pub fn constant(&self) -> Option<T> {
        match self {
            Activity::Constant(b) => Some(*b),
            Activity::Grid { .. } => None,
        }
    }

    /// `beta(x)` at a point of the window.
    pub fn value(&self, w: &Window<T>, x: &[T]) -> T {
        match self {
            Activity::Constant(b) => *b,
            Activity::Grid { shape, values } => {
                let d = shape.len();
                let mut base = 0usize;
                let mut frac = vec![T::zero(); d];
                let mut stride = vec![1usize; d];
                for i in (0..d.saturating_sub(1)).rev() {
                    stride[i] = stride[i + 1] * shape[i + 1];
                }
                for i in 0..d {
                    let cells = shape[i] - 1;
                    let s = ((x[i] - w.lower()[i]) / w.edge(i)).max(T::zero()).min(T::one())
                        * T::from_usize_lossy(cells);
                    let j = s.floor().to_usize().unwrap_or(0).min(cells - 1);
                    frac[i] = s - T::from_usize_lossy(j);
                    base += j * stride[i];
                }
                let mut acc = T::zero();
                for corner in 0..(1usize << d) {
                    let mut wgt = T::one();
                    let mut off = 0usize;
                    for i in 0..d {
                        if corner >> i & 1 == 1 {
                            wgt = wgt * frac[i];
                            off += stride[i];
                        } else {
                            wgt = wgt * (T::one() - frac[i]);
                        }
                    }
                    if wgt != T::zero() {
                        acc = acc + wgt * values[base + off];
                    }
                }
                acc
            }
        }
    }

    /// `sup_x beta(x)`.
    pub fn max(&self) -> T {
        match self {
            Activity::Constant(b) => *b,
            Activity::Grid { values, .. } => values.iter().fold(T::zero(), |a, &b| a.max(b)),
        }
    }

    /// `∫_X beta`, exact for the multilinear interpolant (tensor trapezoid weights).
    pub fn integral(&self, w: &Window<T>) -> T {
        match self {
            Activity::Constant(b) => *b * w.volume(),
            Activity::Grid { shape, values } => {
                let d = shape.len();
                let mut total = T::zero();
                let mut idx = vec![0usize; d];
                for &v in values {
                    let mut wgt = T::one();
                    for i in 0..d {
                        let h = w.edge(i) / T::from_usize_lossy(shape[i] - 1);
                        let end = idx[i] == 0 || idx[i] == shape[i] - 1;
                        wgt = wgt * if end { h * T::lit(0.5) } else { h };
                    }
                    total = total + wgt * v;
                    for i in (0..d).rev() {
                        idx[i] += 1;
                        if idx[i] < shape[i] {
                            break;
                        }
                        idx[i] = 0;
                    }
                }
                total
            }
        }
    }

    /// Upper bound on `B_delta = sup_y ∫_{B(y, delta)} beta`; exact for a
    /// constant activity.
    pub fn sup_ball_integral(&self, w: &Window<T>, delta: T) -> T {
        self.max() * sup_ball_measure(w, delta)
    }
}

/// `sup_y |B(y, r) ∩ X|` over centres in the window.
pub fn sup_ball_measure<T: Real>(w: &Window<T>, r: T) -> T {
    // |B(y, r) ∩ X| is log-concave and symmetric in y, so the centre maximises it
    ball_measure(w, &w.center(), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_interpolation_and_integral() {
        let w = Window::<f64>::new(vec![0.0, 0.0], vec![2.0, 1.0], false).unwrap();
        // beta(x, y) = 1 + x + 3y sampled on a 3 x 2 grid
        let mut values = Vec::new();
        for i in 0..3 {
            for j in 0..2 {
                values.push(1.0 + i as f64 + 3.0 * j as f64);
            }
        }
        let a = Activity::Grid {
            shape: vec![3, 2],
            values,
        };
        a.check(&w).unwrap();
        assert!((a.value(&w, &[0.5, 0.25]) - (1.0 + 0.5 + 0.75)).abs() < 1e-12);
        assert!((a.value(&w, &[2.0, 1.0]) - 6.0).abs() < 1e-12);
        // ∫ (1 + x + 3y) over [0,2]x[0,1] = 2 + 2 + 3
        assert!((a.integral(&w) - 7.0).abs() < 1e-12);
        assert_eq!(a.max(), 6.0);
    }

    #[test]
    fn constant_activity() {
        let w = Window::<f64>::unit(2, true);
        let a = Activity::Constant(50.0);
        assert_eq!(a.integral(&w), 50.0);
        assert!((a.sup_ball_integral(&w, 0.1) - 50.0 * std::f64::consts::PI * 0.01).abs() < 1e-12);
        assert!(Activity::Constant(-1.0).check(&w).is_err());
    }

    #[test]
    fn untagged_json() {
        let a: Activity<f64> = serde_json::from_str("12.5").unwrap();
        assert_eq!(a, Activity::Constant(12.5));
        let g: Activity<f64> = serde_json::from_str(r#"{"shape":[2,2],"values":[1,2,3,4]}"#).unwrap();
        assert!(matches!(g, Activity::Grid { .. }));
    }
}
