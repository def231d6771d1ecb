use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetric pair interaction `phi(x, y)`.
///
/// All variants except [`Interaction::Custom`] depend on `x` and `y` only
/// through their distance.
#[derive(Clone)]
pub enum Interaction<T> {
    /// `phi = value` everywhere (`value = 1` is the Poisson process).
    Constant(T),
    /// `gamma` within distance `radius`, 1 beyond.
    Strauss { gamma: T, radius: T },
    /// 0 within `hard_core`, `gamma` up to `radius`, 1 beyond.
    HardCoreStrauss { hard_core: T, gamma: T, radius: T },
    /// `gamma` up to `r`, `c` on `(r, radius]`, 1 beyond.
    BiScaleStrauss { gamma: T, r: T, c: T, radius: T },
    /// Piecewise constant: `values[i]` on `(radii[i-1], radii[i]]`, 1 beyond the last radius.
    Step { radii: Vec<T>, values: Vec<T> },
    /// `floor + (1 - floor) * min(d / range, 1)`; Lipschitz with constant `(1 - floor) / range`.
    Ramp { range: T, floor: T },
    /// `exp(-b V(d))` with `V(d) = (R/d)^12 - (R/d)^6`.
    LennardJones { b: T, radius: T },
    /// Arbitrary function of the two points with user-declared constants.
    Custom {
        phi: Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>,
        constants: PipConstants<T>,
    },
}

impl<T: fmt::Debug> fmt::Debug for Interaction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interaction::Constant(v) => write!(f, "Constant({v:?})"),
            Interaction::Strauss { gamma, radius } => write!(f, "Strauss {{ gamma: {gamma:?}, radius: {radius:?} }}"),
            Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius,
            } => write!(f, "HardCoreStrauss {{ hard_core: {hard_core:?}, gamma: {gamma:?}, radius: {radius:?} }}"),
            Interaction::BiScaleStrauss { gamma, r, c, radius } => {
                write!(f, "BiScaleStrauss {{ gamma: {gamma:?}, r: {r:?}, c: {c:?}, radius: {radius:?} }}")
            }
            Interaction::Step { radii, values } => write!(f, "Step {{ radii: {radii:?}, values: {values:?} }}"),
            Interaction::Ramp { range, floor } => write!(f, "Ramp {{ range: {range:?}, floor: {floor:?} }}"),
            Interaction::LennardJones { b, radius } => write!(f, "LennardJones {{ b: {b:?}, radius: {radius:?} }}"),
            Interaction::Custom { constants, .. } => write!(f, "Custom {{ constants: {constants:?} }}"),
        }
    }
}

/// Constants of the stability conditions (UB), (RC) and (IR).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipConstants<T> {
    /// `phi <= c` everywhere.
    pub c: T,
    /// `phi <= gamma` for `d <= delta`.
    pub delta: T,
    pub gamma: T,
    /// `phi <= 1` for `d <= r` and for `d > big_r`.
    pub r: T,
    pub big_r: T,
}

/// Classical Lennard–Jones potential `(R/d)^12 - (R/d)^6`.
#[inline]
pub fn lj_potential<T: Real>(radius: T, d: T) -> T {
    let s6 = (radius / d).powi(6);
    s6 * s6 - s6
}

impl<T: Real> Interaction<T> {
    /// Checks parameter ranges.
    pub fn check(&self) -> Result<()> {
        let pos = |v: T, name: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let unit = |v: T, name: &str| {
            if v >= T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        match self {
            Interaction::Constant(v) => {
                if *v >= T::zero() && v.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("constant interaction must be non-negative"))
                }
            }
            Interaction::Strauss { gamma, radius } => {
                unit(*gamma, "gamma")?;
                pos(*radius, "radius")
            }
            Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius,
            } => {
                unit(*gamma, "gamma")?;
                pos(*hard_core, "hard_core")?;
                pos(*radius, "radius")?;
                if hard_core > radius {
                    return Err(Error::param("hard_core must not exceed radius"));
                }
                Ok(())
            }
            Interaction::BiScaleStrauss { gamma, r, c, radius } => {
                unit(*gamma, "gamma")?;
                pos(*r, "r")?;
                pos(*radius, "radius")?;
                if !(*c >= T::zero() && c.is_finite()) {
                    return Err(Error::param("c must be non-negative"));
                }
                if !(r < radius) {
                    return Err(Error::param("bi-scale Strauss needs r < radius"));
                }
                Ok(())
            }
            Interaction::Step { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::param("step interaction needs matching non-empty radii and values"));
                }
                if radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] > T::zero()) {
                    return Err(Error::param("step radii must be positive and increasing"));
                }
                if values.iter().any(|v| !(*v >= T::zero() && v.is_finite())) {
                    return Err(Error::param("step values must be non-negative"));
                }
                Ok(())
            }
            Interaction::Ramp { range, floor } => {
                pos(*range, "range")?;
                unit(*floor, "floor")
            }
            Interaction::LennardJones { b, radius } => {
                pos(*b, "b")?;
                pos(*radius, "radius")
            }
            Interaction::Custom { .. } => Ok(()),
        }
    }

    /// `phi` as a function of distance; `None` for non-radial interactions.
    #[inline]
    pub fn radial_value(&self, d: T) -> Option<T> {
        Some(match self {
            Interaction::Constant(v) => *v,
            Interaction::Strauss { gamma, radius } => {
                if d <= *radius {
                    *gamma
                } else {
                    T::one()
                }
            }
            Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius,
            } => {
                if d <= *hard_core {
                    T::zero()
                } else if d <= *radius {
                    *gamma
                } else {
                    T::one()
                }
            }
            Interaction::BiScaleStrauss { gamma, r, c, radius } => {
                if d <= *r {
                    *gamma
                } else if d <= *radius {
                    *c
                } else {
                    T::one()
                }
            }
            Interaction::Step { radii, values } => {
                let mut v = T::one();
                for (rad, val) in radii.iter().zip(values) {
                    if d <= *rad {
                        v = *val;
                        break;
                    }
                }
                v
            }
            Interaction::Ramp { range, floor } => *floor + (T::one() - *floor) * (d / *range).min(T::one()),
            Interaction::LennardJones { b, radius } => {
                if d == T::zero() {
                    T::zero()
                } else {
                    (-*b * lj_potential(*radius, d)).exp()
                }
            }
            Interaction::Custom { .. } => return None,
        })
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, Interaction::Custom { .. })
    }

    /// `phi(x, y)` given the points and their (window) distance.
    #[inline]
    pub fn value(&self, x: &[T], y: &[T], d: T) -> T {
        match self {
            Interaction::Custom { phi, .. } => phi(x, y),
            _ => self.radial_value(d).expect("radial interaction"),
        }
    }

    /// Radii at which the radial profile jumps.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            Interaction::Strauss { radius, .. } => vec![*radius],
            Interaction::HardCoreStrauss { hard_core, radius, .. } => vec![*hard_core, *radius],
            Interaction::BiScaleStrauss { r, radius, .. } => vec![*r, *radius],
            Interaction::Step { radii, .. } => radii.clone(),
            Interaction::Ramp { range, .. } => vec![*range],
            Interaction::LennardJones { radius, .. } => vec![*radius],
            _ => Vec::new(),
        }
    }

    /// Radius beyond which `phi == 1` exactly; `None` if unbounded or non-radial.
    pub fn support(&self) -> Option<T> {
        match self {
            Interaction::Constant(v) => {
                if *v == T::one() {
                    Some(T::zero())
                } else {
                    None
                }
            }
            Interaction::Strauss { radius, .. }
            | Interaction::HardCoreStrauss { radius, .. }
            | Interaction::BiScaleStrauss { radius, .. } => Some(*radius),
            Interaction::Step { radii, .. } => radii.last().copied(),
            Interaction::Ramp { range, .. } => Some(*range),
            Interaction::LennardJones { .. } | Interaction::Custom { .. } => None,
        }
    }

    /// Whether the profile is piecewise constant (exact radial cumulatives).
    pub fn step_profile(&self) -> Option<(Vec<T>, Vec<T>)> {
        match self {
            Interaction::Strauss { gamma, radius } => Some((vec![*radius], vec![*gamma])),
            Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius,
            } => Some((vec![*hard_core, *radius], vec![T::zero(), *gamma])),
            Interaction::BiScaleStrauss { gamma, r, c, radius } => Some((vec![*r, *radius], vec![*gamma, *c])),
            Interaction::Step { radii, values } => Some((radii.clone(), values.clone())),
            Interaction::Constant(v) if *v == T::one() => Some((vec![], vec![])),
            _ => None,
        }
    }

    /// Hard-core radius: `phi = 0` for `d <= h`.
    pub fn hard_core(&self) -> Option<T> {
        match self {
            Interaction::HardCoreStrauss { hard_core, .. } => Some(*hard_core),
            Interaction::BiScaleStrauss { gamma, r, .. } if *gamma == T::zero() => Some(*r),
            Interaction::Strauss { gamma, radius } if *gamma == T::zero() => Some(*radius),
            Interaction::Step { radii, values } if values[0] == T::zero() => {
                let mut h = radii[0];
                for (r, v) in radii.iter().zip(values) {
                    if *v == T::zero() {
                        h = *r;
                    } else {
                        break;
                    }
                }
                Some(h)
            }
            Interaction::Constant(v) if *v == T::zero() => Some(T::infinity()),
            _ => None,
        }
    }

    /// Constants `(C, delta, gamma, r, R)` of (UB), (RC), (IR).
    pub fn constants(&self) -> PipConstants<T> {
        let one = T::one();
        let zero = T::zero();
        match self {
            Interaction::Constant(v) => PipConstants {
                c: v.max(one),
                delta: zero,
                gamma: v.min(one),
                r: zero,
                big_r: zero,
            },
            Interaction::Strauss { gamma, radius } => PipConstants {
                c: one,
                delta: *radius,
                gamma: *gamma,
                r: *radius,
                big_r: *radius,
            },
            Interaction::HardCoreStrauss {
                hard_core, radius, ..
            } => PipConstants {
                c: one,
                delta: *hard_core,
                gamma: zero,
                r: *radius,
                big_r: *radius,
            },
            Interaction::BiScaleStrauss { gamma, r, c, radius } => PipConstants {
                c: c.max(one),
                delta: *r,
                gamma: *gamma,
                r: if *c > one { *r } else { *radius },
                big_r: *radius,
            },
            Interaction::Step { radii, values } => {
                let c = values.iter().fold(one, |a, &b| a.max(b));
                // r: end of the initial run with phi <= 1; R: start of the final run with phi <= 1
                let mut r = zero;
                for (rad, v) in radii.iter().zip(values) {
                    if *v <= one {
                        r = *rad;
                    } else {
                        break;
                    }
                }
                let mut big_r = zero;
                for (rad, v) in radii.iter().zip(values) {
                    if *v > one {
                        big_r = *rad;
                    }
                }
                if big_r == zero {
                    big_r = r;
                }
                PipConstants {
                    c,
                    delta: radii[0],
                    gamma: values[0],
                    r,
                    big_r,
                }
            }
            Interaction::Ramp { range, floor } => PipConstants {
                c: one,
                delta: zero,
                gamma: *floor,
                r: *range,
                big_r: *range,
            },
            Interaction::LennardJones { b, radius } => PipConstants {
                c: (*b * T::lit(0.25)).exp(),
                delta: zero,
                gamma: one,
                r: *radius,
                big_r: *radius,
            },
            Interaction::Custom { constants, .. } => *constants,
        }
    }

    /// `phi <= 1` everywhere.
    pub fn is_inhibitory(&self) -> bool {
        match self {
            Interaction::LennardJones { .. } => false,
            _ => self.constants().c <= T::one(),
        }
    }

    /// Lipschitz constant in the distance, when known.
    pub fn lipschitz(&self) -> Option<T> {
        match self {
            Interaction::Constant(_) => Some(T::zero()),
            Interaction::Ramp { range, floor } => Some((T::one() - *floor) / *range),
            _ => None,
        }
    }

    /// Spec-facing name of the family.
    pub fn family(&self) -> &'static str {
        match self {
            Interaction::Constant(_) => "PIP",
            Interaction::Strauss { .. } => "Strauss",
            Interaction::HardCoreStrauss { .. } => "HardCorePIP",
            Interaction::BiScaleStrauss { .. } => "BiScaleStrauss",
            Interaction::Step { .. } => "PIP",
            Interaction::Ramp { .. } => "PIP",
            Interaction::LennardJones { .. } => "LennardJones",
            Interaction::Custom { .. } => "PIP",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strauss_values_and_constants() {
        let s = Interaction::Strauss {
            gamma: 0.5,
            radius: 0.1,
        };
        assert_eq!(s.radial_value(0.05), Some(0.5));
        assert_eq!(s.radial_value(0.1), Some(0.5));
        assert_eq!(s.radial_value(0.100001), Some(1.0));
        assert!(s.is_inhibitory());
        assert_eq!(s.hard_core(), None);
    }

    #[test]
    fn bi_scale_constants() {
        let b = Interaction::BiScaleStrauss {
            gamma: 0.01,
            r: 0.02,
            c: 1.04,
            radius: 0.04,
        };
        let k = b.constants();
        assert_eq!((k.c, k.delta, k.gamma, k.r, k.big_r), (1.04, 0.02, 0.01, 0.02, 0.04));
        assert!(!b.is_inhibitory());
        assert!(b.check().is_ok());
        let bad = Interaction::BiScaleStrauss {
            gamma: 0.01,
            r: 0.05,
            c: 1.04,
            radius: 0.04,
        };
        assert!(bad.check().is_err());
    }

    #[test]
    fn step_constants() {
        let s = Interaction::Step {
            radii: vec![0.01, 0.02, 0.05],
            values: vec![0.0, 0.5, 1.3],
        };
        let k = s.constants();
        assert_eq!((k.c, k.delta, k.gamma, k.r, k.big_r), (1.3, 0.01, 0.0, 0.02, 0.05));
        assert_eq!(s.hard_core(), Some(0.01));
    }

    #[test]
    fn lennard_jones_profile() {
        let lj = Interaction::LennardJones { b: 1.0, radius: 1.0 };
        assert_eq!(lj.radial_value(1.0), Some(1.0));
        let min_d = 2f64.powf(1.0 / 6.0);
        assert!((lj.radial_value(min_d).unwrap() - 0.25f64.exp()).abs() < 1e-12);
        assert!((lj.constants().c - 0.25f64.exp()).abs() < 1e-15);
        assert_eq!(lj.radial_value(0.0), Some(0.0));
    }

    #[test]
    fn ramp_lipschitz() {
        let r = Interaction::<f64>::Ramp { range: 0.1, floor: 0.2 };
        assert!((r.lipschitz().unwrap() - 8.0).abs() < 1e-12);
        assert!((r.radial_value(0.05).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(r.radial_value(0.5), Some(1.0));
    }
}
