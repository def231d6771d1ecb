//! Uncovered volume `|B(x, a) \ ∪_y B(y, a)|` for the area-interaction model.

use crate::error::Result;
use crate::quadrature::{gauss_kronrod, sphere_integral};
use crate::scalar::Real;

/// Volume of the part of `B(0, a)` not covered by the balls `B(c, a)`, where
/// `centres` are displacements relative to the ball's own centre.
///
/// Integrates the uncovered radial measure along rays; in the plane the
/// angular integral is split at every tangency and circle intersection so
/// each piece is smooth.
pub fn uncovered_volume<T: Real>(dim: usize, centres: &[Vec<T>], a: T, tol: T) -> Result<T> {
    let full = crate::scalar::unit_ball_volume::<T>(dim) * a.powi(dim as i32);
    let two_a = a + a;
    let near: Vec<&Vec<T>> = centres
        .iter()
        .filter(|c| norm2(c) < two_a * two_a)
        .collect();
    if near.is_empty() {
        return Ok(full);
    }
    if near.iter().any(|c| norm2(c) == T::zero()) {
        return Ok(T::zero());
    }
    let d = T::from_usize_lossy(dim);
    let ad = a.powi(dim as i32);
    let mut ivals: Vec<(T, T)> = Vec::with_capacity(near.len());
    let mut ray = |u: &[T]| -> T {
        ivals.clear();
        for c in &near {
            let p = dot(u, c);
            let disc = p * p - norm2(c) + a * a;
            if disc <= T::zero() {
                continue;
            }
            let s = disc.sqrt();
            let lo = (p - s).max(T::zero());
            let hi = (p + s).min(a);
            if hi > lo {
                ivals.push((lo, hi));
            }
        }
        if ivals.is_empty() {
            return ad / d;
        }
        ivals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut covered = T::zero();
        let (mut lo, mut hi) = ivals[0];
        for &(l, h) in &ivals[1..] {
            if l > hi {
                covered = covered + hi.powi(dim as i32) - lo.powi(dim as i32);
                lo = l;
                hi = h;
            } else if h > hi {
                hi = h;
            }
        }
        covered = covered + hi.powi(dim as i32) - lo.powi(dim as i32);
        ((ad - covered) / d).max(T::zero())
    };
    let v = if dim == 2 {
        let breaks = planar_breaks(&near, a);
        let mut u = [T::zero(); 2];
        gauss_kronrod(
            |t: T| {
                u[0] = t.cos();
                u[1] = t.sin();
                Ok(ray(&u))
            },
            T::zero(),
            T::PI() + T::PI(),
            &breaks,
            tol,
            4_000_000,
        )?
        .value
    } else {
        sphere_integral(dim, |u: &[T]| Ok(ray(u)), tol, 20_000_000)?.value
    };
    Ok(v.max(T::zero()).min(full))
}

fn norm2<T: Real>(c: &[T]) -> T {
    c.iter().fold(T::zero(), |s, &v| s + v * v)
}

fn dot<T: Real>(u: &[T], c: &[T]) -> T {
    u.iter().zip(c).fold(T::zero(), |s, (&a, &b)| s + a * b)
}

fn angle<T: Real>(y: T, x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let t = y.atan2(x);
    if t < T::zero() {
        t + two_pi
    } else {
        t
    }
}

fn planar_breaks<T: Real>(near: &[&Vec<T>], a: T) -> Vec<T> {
    let two_pi = T::PI() + T::PI();
    let mut out = Vec::new();
    let wrap = |t: T| {
        let mut t = t % two_pi;
        if t < T::zero() {
            t = t + two_pi;
        }
        t
    };
    for c in near {
        let rho = norm2(c).sqrt();
        let phi = angle(c[1], c[0]);
        if rho > a {
            let s = (a / rho).asin();
            out.push(wrap(phi + s));
            out.push(wrap(phi - s));
        }
        let k = (rho / (a + a)).min(T::one()).acos();
        out.push(wrap(phi + k));
        out.push(wrap(phi - k));
    }
    // pairwise circle intersections inside B(0, a)
    for i in 0..near.len() {
        for j in i + 1..near.len() {
            let (p, q) = (near[i], near[j]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let l2 = dx * dx + dy * dy;
            if l2 == T::zero() || l2 >= T::lit(4.0) * a * a {
                continue;
            }
            let h = (a * a - l2 * T::lit(0.25)).sqrt() / l2.sqrt();
            let (mx, my) = ((p[0] + q[0]) * T::lit(0.5), (p[1] + q[1]) * T::lit(0.5));
            for s in [h, -h] {
                let (x, y) = (mx - s * dy, my + s * dx);
                if x * x + y * y <= a * a {
                    out.push(angle(y, x));
                }
            }
        }
    }
    out.retain(|t| *t > T::zero() && *t < two_pi);
    out.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    out.dedup();
    out
}
