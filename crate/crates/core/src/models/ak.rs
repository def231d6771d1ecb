//! Membership in `A_k`: at most `k` points in every closed ball of radius
//! `delta / 2`.

use crate::geometry::{PointConfig, Window};
use crate::scalar::Real;

/// Smallest-enclosing-ball evaluations allowed per membership query before
/// the test gives up and reports a violation.
pub const MINIBALL_BUDGET: usize = 10_000;

/// Radius of the smallest ball enclosing `pts`.
///
/// The optimal ball is the circumscribed ball of some affinely independent
/// subset of at most `D + 1` points; all such subsets are tried.
pub fn miniball_radius<T: Real>(pts: &[Vec<T>]) -> T {
    let n = pts.len();
    if n <= 1 {
        return T::zero();
    }
    let dim = pts[0].len();
    let max_support = (dim + 1).min(n);
    let slack = T::one() + T::lit(1e-12);
    let mut best = T::infinity();
    let mut subset = Vec::with_capacity(max_support);
    for size in 2..=max_support {
        combos(n, size, &mut subset, 0, &mut |s: &[usize]| {
            if let Some((c, r2)) = circumsphere(pts, s) {
                let r = r2.sqrt();
                if r < best && pts.iter().all(|p| dist2(p, &c).sqrt() <= r * slack + T::lit(1e-300)) {
                    best = r;
                }
            }
        });
    }
    best
}

fn combos(n: usize, size: usize, cur: &mut Vec<usize>, start: usize, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == size {
        f(cur);
        return;
    }
    for i in start..n {
        if n - i < size - cur.len() {
            break;
        }
        cur.push(i);
        combos(n, size, cur, i + 1, f);
        cur.pop();
    }
}

fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y))
}

/// Centre and squared radius of the smallest sphere through the points
/// `pts[s]`, within their affine hull. `None` when they are affinely dependent.
fn circumsphere<T: Real>(pts: &[Vec<T>], s: &[usize]) -> Option<(Vec<T>, T)> {
    let p0 = &pts[s[0]];
    let m = s.len() - 1;
    let v: Vec<Vec<T>> = s[1..]
        .iter()
        .map(|&i| pts[i].iter().zip(p0).map(|(&a, &b)| a - b).collect())
        .collect();
    // Gram system 2 <v_i, v_j> l_j = |v_i|^2
    let mut a = vec![vec![T::zero(); m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = (v[i].iter().zip(&v[j]).fold(T::zero(), |s, (&x, &y)| s + x * y)) * T::lit(2.0);
        }
        a[i][m] = v[i].iter().fold(T::zero(), |s, &x| s + x * x);
    }
    let scale = (0..m).map(|i| a[i][i]).fold(T::zero(), T::max);
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() <= scale * T::lit(1e-12) {
            return None;
        }
        a.swap(col, piv);
        for row in 0..m {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=m {
                    let t = a[col][k];
                    a[row][k] = a[row][k] - f * t;
                }
            }
        }
    }
    let mut c = p0.clone();
    for j in 0..m {
        let l = a[j][m] / a[j][j];
        for (ci, vi) in c.iter_mut().zip(&v[j]) {
            *ci = *ci + l * *vi;
        }
    }
    let r2 = dist2(&c, p0);
    Some((c, r2))
}

/// Searches for `k` points among `cands` (displacements from an anchor at
/// the origin) that fit with the anchor into a closed ball of radius
/// `delta / 2`. Returns `true` when such a set exists or the budget runs out.
fn crowded<T: Real>(cands: &[Vec<T>], k: usize, delta: T, budget: &mut usize) -> bool {
    if cands.len() < k {
        return false;
    }
    if k == 0 {
        return true;
    }
    let half = delta * T::lit(0.5);
    let origin = vec![T::zero(); cands[0].len()];
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    fn rec<T: Real>(
        cands: &[Vec<T>],
        k: usize,
        delta: T,
        half: T,
        origin: &[T],
        start: usize,
        chosen: &mut Vec<usize>,
        budget: &mut usize,
    ) -> bool {
        if chosen.len() == k {
            return true;
        }
        for i in start..cands.len() {
            if cands.len() - i < k - chosen.len() {
                return false;
            }
            if chosen.iter().any(|&j| dist2(&cands[i], &cands[j]).sqrt() > delta) {
                continue;
            }
            chosen.push(i);
            let ok = if chosen.len() == 1 {
                true
            } else {
                if *budget == 0 {
                    return true;
                }
                *budget -= 1;
                let mut pts: Vec<Vec<T>> = chosen.iter().map(|&j| cands[j].clone()).collect();
                pts.push(origin.to_vec());
                miniball_radius(&pts) <= half * (T::one() + T::lit(1e-12))
            };
            if ok && rec(cands, k, delta, half, origin, i + 1, chosen, budget) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    rec(cands, k, delta, half, &origin, 0, &mut chosen, budget)
}

fn neighbours<T: Real>(w: &Window<T>, x: &[T], pts: impl Iterator<Item = Vec<T>>, delta: T) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for p in pts {
        if w.distance(x, &p) <= delta {
            let mut d = vec![T::zero(); w.dim()];
            w.displacement(x, &p, &mut d);
            out.push(d);
        }
    }
    out
}

/// Whether adding `x` to `xi` creates a ball of radius `delta / 2` with more
/// than `k` points that contains `x`.
pub fn addition_violates<T: Real>(w: &Window<T>, xi: &PointConfig<T>, x: &[T], k: usize, delta: T) -> bool {
    let near = neighbours(w, x, xi.iter().map(|p| p.to_vec()), delta);
    if k == 1 {
        return !near.is_empty();
    }
    let mut budget = MINIBALL_BUDGET;
    crowded(&near, k, delta, &mut budget)
}

/// Whether `xi` lies in `A_k`.
pub fn in_ak<T: Real>(w: &Window<T>, xi: &PointConfig<T>, k: usize, delta: T) -> bool {
    let n = xi.len();
    let mut budget = MINIBALL_BUDGET;
    for i in 0..n {
        let x = xi.point(i);
        let near = neighbours(w, x, (i + 1..n).map(|j| xi.point(j).to_vec()), delta);
        if near.len() < k {
            continue;
        }
        if k == 1 || crowded(&near, k, delta, &mut budget) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn miniball_small_cases() {
        let r: f64 = miniball_radius(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        assert!((r - 1.0).abs() < 1e-15);
        // equilateral triangle of side 1: circumradius 1/sqrt(3)
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        assert!((miniball_radius::<f64>(&tri) - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        // obtuse triangle: the longest edge is a diameter
        let obt = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.2]];
        assert!((miniball_radius::<f64>(&obt) - 1.0).abs() < 1e-12);
        // collinear points
        let col = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![3.0, 0.0]];
        assert!((miniball_radius::<f64>(&col) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ak_membership() {
        let w = Window::<f64>::unit(2, false);
        let xi = PointConfig::from_points(2, &[[0.5, 0.5], [0.53, 0.5]]).unwrap();
        assert!(!in_ak(&w, &xi, 1, 0.05));
        assert!(in_ak(&w, &xi, 2, 0.05));
        assert!(in_ak(&w, &xi, 1, 0.02));
        // triangle with side 0.04 has circumradius 0.0231 > 0.02
        let tri = PointConfig::from_points(2, &[[0.5, 0.5], [0.54, 0.5], [0.52, 0.5 + 0.04 * 0.75f64.sqrt()]]).unwrap();
        assert!(in_ak(&w, &tri, 2, 0.04));
        assert!(!in_ak(&w, &tri, 2, 0.047));
        assert!(addition_violates(&w, &xi, &[0.515, 0.51], 2, 0.05));
        assert!(!addition_violates(&w, &xi, &[0.7, 0.7], 2, 0.05));
    }

    fn brute_in_ak(pts: &[[f64; 2]], k: usize, delta: f64) -> bool {
        // every (k+1)-subset must have miniball radius > delta / 2
        let n = pts.len();
        let mut ok = true;
        let mut cur = Vec::new();
        combos(n, k + 1, &mut cur, 0, &mut |s: &[usize]| {
            let sub: Vec<Vec<f64>> = s.iter().map(|&i| pts[i].to_vec()).collect();
            if miniball_radius(&sub) <= delta / 2.0 {
                ok = false;
            }
        });
        ok
    }

    proptest! {
        #[test]
        fn ak_matches_subset_enumeration(
            pts in proptest::collection::vec((0.3f64..0.5, 0.3f64..0.5), 0..8),
            k in 1usize..4,
            delta in 0.02f64..0.2,
        ) {
            let p: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let w = Window::unit(2, false);
            let xi = PointConfig::from_points(2, &p).unwrap();
            prop_assert_eq!(in_ak(&w, &xi, k, delta), brute_in_ak(&p, k, delta));
        }

        #[test]
        fn miniball_contains_points_and_is_tight(pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..7)) {
            let p: Vec<Vec<f64>> = pts.iter().map(|&(x, y, z)| vec![x, y, z]).collect();
            let r = miniball_radius(&p);
            // at least half the diameter, at most the diameter-based Jung bound
            let mut diam: f64 = 0.0;
            for a in &p { for b in &p { diam = diam.max(dist2(a, b).sqrt()); } }
            prop_assert!(r + 1e-12 >= diam / 2.0);
            prop_assert!(r <= diam * (3.0f64 / 8.0).sqrt() + 1e-12);
        }
    }
}
