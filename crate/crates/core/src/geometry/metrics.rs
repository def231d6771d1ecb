use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{PointConfig, Window};

/// Largest configuration size accepted by [`d1_distance`].
pub const MAX_ASSIGNMENT: usize = 64;

fn point_key<T: Real>(p: &[T]) -> Vec<u64> {
    // +0 and -0 are the same coordinate
    p.iter()
        .map(|&v| {
            let f = v.as_f64();
            if f == 0.0 {
                0
            } else {
                f.to_bits()
            }
        })
        .collect()
}

/// Size of the symmetric difference of two point multisets, comparing
/// coordinates exactly.
pub fn symdiff_norm<T: Real>(xi: &PointConfig<T>, eta: &PointConfig<T>) -> usize {
    let mut a: Vec<Vec<u64>> = xi.iter().map(point_key).collect();
    let mut b: Vec<Vec<u64>> = eta.iter().map(point_key).collect();
    a.sort_unstable();
    b.sort_unstable();
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// The configuration metric `d_1`: 1 for different cardinalities, otherwise
/// the optimal-assignment mean of point distances clamped at 1.
pub fn d1_distance<T: Real>(w: &Window<T>, xi: &PointConfig<T>, eta: &PointConfig<T>) -> Result<T> {
    let n = xi.len();
    if n != eta.len() {
        return Ok(T::one());
    }
    if n == 0 {
        return Ok(T::zero());
    }
    if n > MAX_ASSIGNMENT {
        return Err(Error::TooLarge(format!(
            "d1 assignment limited to {MAX_ASSIGNMENT} points, got {n}"
        )));
    }
    let mut cost = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            cost[i * n + j] = w.distance(xi.point(i), eta.point(j)).min(T::one()).as_f64();
        }
    }
    let assign = hungarian(&cost, n);
    let total: T = (0..n)
        .map(|i| w.distance(xi.point(i), eta.point(assign[i])).min(T::one()))
        .sum();
    Ok(total / T::from_usize_lossy(n))
}

/// Minimum-cost perfect assignment on a dense `n x n` matrix (row-major);
/// returns the column assigned to each row.
fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(pts: &[[f64; 2]]) -> PointConfig<f64> {
        PointConfig::from_points(2, pts).unwrap()
    }

    #[test]
    fn symdiff_examples() {
        let (a, b, c) = ([0.1, 0.1], [0.2, 0.2], [0.3, 0.3]);
        assert_eq!(symdiff_norm(&cfg(&[a, b]), &cfg(&[b, c])), 2);
        assert_eq!(symdiff_norm(&cfg(&[a, b]), &cfg(&[b, a])), 0);
        assert_eq!(symdiff_norm(&cfg(&[a]), &cfg(&[])), 1);
        assert_eq!(symdiff_norm(&cfg(&[a, a]), &cfg(&[a])), 1);
        assert_eq!(symdiff_norm(&cfg(&[[0.0, 0.5]]), &cfg(&[[-0.0, 0.5]])), 0);
    }

    #[test]
    fn d1_examples() {
        let w = Window::<f64>::new(vec![-1.0, -1.0], vec![2.0, 2.0], false).unwrap();
        assert_eq!(d1_distance(&w, &cfg(&[[0.0, 0.0]]), &cfg(&[[0.0, 0.0], [1.0, 0.0]])).unwrap(), 1.0);
        assert!((d1_distance(&w, &cfg(&[[0.0, 0.0]]), &cfg(&[[0.3, 0.0]])).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(
            d1_distance(&w, &cfg(&[[0.0, 0.0], [1.0, 0.0]]), &cfg(&[[1.0, 0.0], [0.0, 0.0]])).unwrap(),
            0.0
        );
        assert_eq!(d1_distance(&w, &cfg(&[]), &cfg(&[])).unwrap(), 0.0);
        // clamping at 1
        assert!((d1_distance(&w, &cfg(&[[-1.0, -1.0]]), &cfg(&[[2.0, 2.0]])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn d1_rejects_large_inputs() {
        let w = Window::<f64>::unit(1, false);
        let pts: Vec<[f64; 1]> = (0..65).map(|i| [i as f64 / 65.0]).collect();
        let c = PointConfig::from_points(1, &pts).unwrap();
        assert!(matches!(d1_distance(&w, &c, &c), Err(Error::TooLarge(_))));
    }

    fn brute_force(w: &Window<f64>, a: &PointConfig<f64>, b: &PointConfig<f64>) -> f64 {
        fn rec(i: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64, c: &dyn Fn(usize, usize) -> f64, n: usize) {
            if i == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(i + 1, used, acc + c(i, j), best, c, n);
                    used[j] = false;
                }
            }
        }
        let n = a.len();
        let c = |i: usize, j: usize| w.distance(a.point(i), b.point(j)).min(1.0);
        let mut best = f64::INFINITY;
        rec(0, &mut vec![false; n], 0.0, &mut best, &c, n);
        best / n as f64
    }

    fn arb_config(n: usize) -> impl Strategy<Value = PointConfig<f64>> {
        proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), n)
            .prop_map(|v| PointConfig::from_points(2, &v.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>()).unwrap())
    }

    proptest! {
        #[test]
        fn d1_matches_permutation_oracle((a, b) in (1usize..7).prop_flat_map(|n| (arb_config(n), arb_config(n)))) {
            let w = Window::new(vec![0.0, 0.0], vec![3.0, 3.0], false).unwrap();
            let fast = d1_distance(&w, &a, &b).unwrap();
            let slow = brute_force(&w, &a, &b);
            prop_assert!((fast - slow).abs() < 1e-12, "{} vs {}", fast, slow);
            prop_assert!((0.0..=1.0).contains(&fast));
            prop_assert!((d1_distance(&w, &b, &a).unwrap() - fast).abs() < 1e-12);
        }

        #[test]
        fn d1_permutation_invariant(a in arb_config(6), b in arb_config(6), rot in 0usize..6) {
            let w = Window::new(vec![0.0, 0.0], vec![3.0, 3.0], true).unwrap();
            let pts = b.to_points();
            let rotated: Vec<Vec<f64>> = pts[rot..].iter().chain(pts[..rot].iter()).cloned().collect();
            let b2 = PointConfig::from_points(2, &rotated).unwrap();
            prop_assert!((d1_distance(&w, &a, &b).unwrap() - d1_distance(&w, &a, &b2).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn symdiff_is_a_metric(
            pool in proptest::collection::vec((0u8..4, 0u8..4), 12),
            ia in proptest::collection::vec(0usize..12, 0..6),
            ib in proptest::collection::vec(0usize..12, 0..6),
            ic in proptest::collection::vec(0usize..12, 0..6),
        ) {
            let pick = |idx: &Vec<usize>| {
                let pts: Vec<[f64; 2]> = idx.iter().map(|&i| [pool[i].0 as f64 / 4.0, pool[i].1 as f64 / 4.0]).collect();
                PointConfig::from_points(2, &pts).unwrap()
            };
            let (a, b, c) = (pick(&ia), pick(&ib), pick(&ic));
            prop_assert_eq!(symdiff_norm(&a, &b), symdiff_norm(&b, &a));
            prop_assert!(symdiff_norm(&a, &c) <= symdiff_norm(&a, &b) + symdiff_norm(&b, &c));
            prop_assert_eq!(symdiff_norm(&a, &a), 0);
            let mut sa = a.to_points(); sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut sb = b.to_points(); sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assert_eq!(symdiff_norm(&a, &b) == 0, sa == sb);
        }
    }
}
