//! Deterministic adaptive quadrature: 1-D Gauss–Kronrod, dyadic box
//! subdivision with Richardson extrapolation, and nested integration over
//! the unit sphere.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A quadrature value together with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F>(f: &mut F, a: T, b: T) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid)?;
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx)? + f(mid + dx)?;
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    let k = kron * half;
    let g = gauss * half;
    Ok((k, (k - g).abs()))
}

/// Adaptive Gauss–Kronrod (7/15) over `[a, b]` with optional interior
/// breakpoints. Stops when the summed error estimate is at most `tol`.
pub fn gauss_kronrod<T: Real, F>(
    mut f: F,
    a: T,
    b: T,
    breaks: &[T],
    tol: T,
    max_evals: usize,
) -> Result<Estimate<T>>
where
    F: FnMut(T) -> Result<T>,
{
    if !(b > a) {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let mut cuts = vec![a];
    let mut inner: Vec<T> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut segs: Vec<(T, T, T, T)> = Vec::with_capacity(64);
    let mut evals = 0usize;
    for w in cuts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1])?;
        evals += 15;
        segs.push((w[0], w[1], v, e));
    }
    loop {
        let total_err: T = segs.iter().map(|s| s.3).sum();
        if total_err <= tol {
            break;
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -T::one()), |best, (i, s)| if s.3 > best.1 { (i, s.3) } else { best });
        let (lo, hi, _, _) = segs[idx];
        let mid = (lo + hi) * T::lit(0.5);
        if evals + 30 > max_evals || !(mid > lo && mid < hi) {
            let value: T = segs.iter().map(|s| s.2).sum();
            return Err(Error::Quadrature {
                estimate: value.as_f64(),
                error: total_err.as_f64(),
                evaluations: evals,
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        evals += 30;
        segs[idx] = (lo, mid, v1, e1);
        segs.push((mid, hi, v2, e2));
    }
    Ok(Estimate {
        value: segs.iter().map(|s| s.2).sum(),
        error: segs.iter().map(|s| s.3).sum(),
        evaluations: evals,
    })
}

/// Options for [`dyadic_box`].
#[derive(Clone, Copy, Debug)]
pub struct BoxOptions {
    /// Every axis is split at least `2^min_depth` times before error control starts.
    pub min_depth: u32,
    pub max_depth: u32,
    pub max_evals: usize,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions {
            min_depth: 0,
            max_depth: 40,
            max_evals: 20_000_000,
        }
    }
}

impl BoxOptions {
    /// Default options with a starting grid of at least 4096 cells.
    pub fn for_dim(dim: usize) -> Self {
        let min_depth = ((12 + dim - 1) / dim.max(1)) as u32;
        BoxOptions {
            min_depth,
            ..Default::default()
        }
    }
}

/// An active cell: bounds, midpoint sums at three levels, and the
/// extrapolated value with its error estimate.
struct BoxCell<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    /// Values of the `2^D` children, then of the `4^D` grandchildren in
    /// child-major order.
    kids: Vec<T>,
    grand: Vec<T>,
    value: T,
    error: T,
}

struct Sampler<'a, T, F> {
    f: &'a mut F,
    dim: usize,
    evals: usize,
    mid: Vec<T>,
}

impl<'a, T: Real, F: FnMut(&[T]) -> T> Sampler<'a, T, F> {
    fn child_bounds(&self, lo: &[T], hi: &[T], mask: usize) -> (Vec<T>, Vec<T>) {
        let mut clo = lo.to_vec();
        let mut chi = hi.to_vec();
        for i in 0..self.dim {
            let m = (lo[i] + hi[i]) * T::lit(0.5);
            if mask >> i & 1 == 0 {
                chi[i] = m;
            } else {
                clo[i] = m;
            }
        }
        (clo, chi)
    }

    /// Midpoint-rule values of the `2^D` children of `[lo, hi]`.
    fn children(&mut self, lo: &[T], hi: &[T], out: &mut Vec<T>) {
        for mask in 0..1usize << self.dim {
            let (clo, chi) = self.child_bounds(lo, hi, mask);
            let mut vol = T::one();
            for i in 0..self.dim {
                self.mid[i] = (clo[i] + chi[i]) * T::lit(0.5);
                vol = vol * (chi[i] - clo[i]);
            }
            out.push((self.f)(&self.mid) * vol);
            self.evals += 1;
        }
    }

    fn cell(&mut self, lo: Vec<T>, hi: Vec<T>, m1: T, kids: Vec<T>) -> BoxCell<T> {
        let n = 1usize << self.dim;
        let mut grand = Vec::with_capacity(n * n);
        for mask in 0..n {
            let (clo, chi) = self.child_bounds(&lo, &hi, mask);
            self.children(&clo, &chi, &mut grand);
        }
        let m2: T = kids.iter().copied().sum();
        let m4: T = grand.iter().copied().sum();
        let three = T::lit(3.0);
        let r1 = (m2 * T::lit(4.0) - m1) / three;
        let r2 = (m4 * T::lit(4.0) - m2) / three;
        BoxCell {
            lo,
            hi,
            kids,
            grand,
            value: r2,
            error: (r2 - r1).abs(),
        }
    }

    /// Splits a cell into its children, reusing the known midpoint sums.
    fn split(&mut self, c: BoxCell<T>) -> Vec<BoxCell<T>> {
        let n = 1usize << self.dim;
        let mut out = Vec::with_capacity(n);
        for mask in 0..n {
            let (clo, chi) = self.child_bounds(&c.lo, &c.hi, mask);
            let kids = c.grand[mask * n..(mask + 1) * n].to_vec();
            out.push(self.cell(clo, chi, c.kids[mask], kids));
        }
        out
    }
}

#[derive(PartialEq)]
struct Keyed(f64, usize);

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Integrates `f` over the box `[lo, hi]` by dyadic subdivision.
///
/// Every cell carries midpoint sums on itself, its children and its
/// grandchildren; the two Richardson extrapolants from consecutive levels
/// give the value and the error estimate. After a uniform start at
/// `min_depth`, the cell with the largest error is split until the summed
/// error is at most `tol`.
pub fn dyadic_box<T: Real, F>(mut f: F, lo: &[T], hi: &[T], tol: T, opts: BoxOptions) -> Result<Estimate<T>>
where
    F: FnMut(&[T]) -> T,
{
    let d = lo.len();
    if d == 0 || hi.len() != d {
        return Err(Error::param("box bounds must share a positive dimension"));
    }
    let total_vol: T = (0..d).map(|i| hi[i] - lo[i]).fold(T::one(), |a, b| a * b);
    if !(total_vol > T::zero()) {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let mut s = Sampler {
        f: &mut f,
        dim: d,
        evals: 0,
        mid: vec![T::zero(); d],
    };
    let mid: Vec<T> = (0..d).map(|i| (lo[i] + hi[i]) * T::lit(0.5)).collect();
    let m1 = (s.f)(&mid) * total_vol;
    s.evals += 1;
    let mut kids = Vec::new();
    s.children(lo, hi, &mut kids);
    let mut level = vec![s.cell(lo.to_vec(), hi.to_vec(), m1, kids)];
    for _ in 0..opts.min_depth.min(opts.max_depth) {
        let mut next = Vec::with_capacity(level.len() << d);
        for c in level {
            next.extend(s.split(c));
        }
        level = next;
    }

    let mut cells: Vec<Option<(BoxCell<T>, u32)>> = Vec::new();
    let mut heap = std::collections::BinaryHeap::new();
    let mut value = T::zero();
    let mut error = T::zero();
    let depth0 = opts.min_depth.min(opts.max_depth);
    for c in level {
        value = value + c.value;
        error = error + c.error;
        heap.push(Keyed(c.error.as_f64(), cells.len()));
        cells.push(Some((c, depth0)));
    }
    let split_cost = (1usize << d) * (1usize << (2 * d));
    while error > tol {
        let Some(Keyed(_, idx)) = heap.pop() else { break };
        let (c, depth) = cells[idx].take().expect("active cell");
        if depth >= opts.max_depth || s.evals + split_cost > opts.max_evals {
            return Err(Error::Quadrature {
                estimate: value.as_f64(),
                error: error.as_f64(),
                evaluations: s.evals,
            });
        }
        value = value - c.value;
        error = error - c.error;
        for k in s.split(c) {
            value = value + k.value;
            error = error + k.error;
            heap.push(Keyed(k.error.as_f64(), cells.len()));
            cells.push(Some((k, depth + 1)));
        }
        // running sums drift; recompute occasionally
        if cells.len() % 4096 == 0 {
            value = cells.iter().flatten().map(|c| c.0.value).sum();
            error = cells.iter().flatten().map(|c| c.0.error).sum();
        }
    }
    Ok(Estimate {
        value: cells.iter().flatten().map(|c| c.0.value).sum(),
        error: error.max(T::zero()),
        evaluations: s.evals,
    })
}

/// Unit vector for hyperspherical angles `theta` (length `dim - 1`).
pub fn direction<T: Real>(theta: &[T], out: &mut [T]) {
    let d = out.len();
    let mut s = T::one();
    for i in 0..d - 1 {
        out[i] = s * theta[i].cos();
        s = s * theta[i].sin();
    }
    out[d - 1] = s;
}

/// Integrates `f(u)` over the unit sphere `S^{dim-1}` with respect to surface
/// measure, by nested adaptive Gauss–Kronrod in hyperspherical angles.
pub fn sphere_integral<T: Real, F>(dim: usize, mut f: F, tol: T, max_evals: usize) -> Result<Estimate<T>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    if dim == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    if dim == 1 {
        let v = f(&[T::one()])? + f(&[-T::one()])?;
        return Ok(Estimate {
            value: v,
            error: T::zero(),
            evaluations: 2,
        });
    }
    let mut theta = vec![T::zero(); dim - 1];
    let mut u = vec![T::zero(); dim];
    let mut evals = 0usize;
    let value = nest(dim, 0, &mut theta, &mut u, &mut f, tol, max_evals, &mut evals)?;
    Ok(Estimate {
        value,
        error: tol,
        evaluations: evals,
    })
}

#[allow(clippy::too_many_arguments)]
fn nest<T: Real, F>(
    dim: usize,
    level: usize,
    theta: &mut Vec<T>,
    u: &mut Vec<T>,
    f: &mut F,
    tol: T,
    max_evals: usize,
    evals: &mut usize,
) -> Result<T>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let last = level == dim - 2;
    let upper = if last { T::PI() + T::PI() } else { T::PI() };
    let power = dim - 2 - level;
    // inner integrals get a share of the tolerance scaled by the outer range
    let inner_tol = tol / (T::lit(4.0) * T::PI());
    let est = gauss_kronrod(
        |t: T| {
            theta[level] = t;
            let w = crate::scalar::powi(t.sin(), power);
            if last {
                direction(theta, u);
                *evals += 1;
                Ok(f(u)? * w)
            } else if w == T::zero() {
                Ok(T::zero())
            } else {
                Ok(nest(dim, level + 1, theta, u, f, inner_tol, max_evals, evals)? * w)
            }
        },
        T::zero(),
        upper,
        &[],
        tol,
        max_evals,
    )?;
    Ok(est.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_and_kinks() {
        let e = gauss_kronrod(|x: f64| Ok(x * x), 0.0, 1.0, &[], 1e-12, 10_000).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-14);
        let e = gauss_kronrod(|x: f64| Ok((x - 0.3).abs()), 0.0, 1.0, &[], 1e-10, 100_000).unwrap();
        assert!((e.value - (0.045 + 0.245)).abs() < 1e-9);
        let e = gauss_kronrod(|x: f64| Ok((x - 0.3).abs()), 0.0, 1.0, &[0.3], 1e-12, 100).unwrap();
        assert!((e.value - 0.29).abs() < 1e-14);
    }

    #[test]
    fn gk_reports_budget_failure() {
        let r = gauss_kronrod(|x: f64| Ok(if x < 0.123 { 0.0 } else { 1.0 }), 0.0, 1.0, &[], 1e-15, 60);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn dyadic_box_constants_and_smooth() {
        let e = dyadic_box(|_x: &[f64]| 50.0, &[0.0, 0.0], &[1.0, 1.0], 1e-9, BoxOptions::for_dim(2)).unwrap();
        assert!((e.value - 50.0).abs() < 1e-12);
        let e = dyadic_box(
            |x: &[f64]| x[0] * x[0] + x[1],
            &[0.0, 0.0],
            &[1.0, 2.0],
            1e-8,
            BoxOptions::for_dim(2),
        )
        .unwrap();
        assert!((e.value - (2.0 / 3.0 + 2.0)).abs() < 1e-8);
    }

    #[test]
    fn sphere_areas() {
        for d in 1..=4usize {
            let e = sphere_integral(d, |_u: &[f64]| Ok(1.0), 1e-10, 1_000_000).unwrap();
            let exact: f64 = crate::scalar::unit_sphere_area(d);
            assert!((e.value - exact).abs() < 1e-9, "d={d} {} vs {exact}", e.value);
        }
        // second moment of a coordinate: |S^{d-1}| / d
        let e = sphere_integral(3, |u: &[f64]| Ok(u[2] * u[2]), 1e-10, 1_000_000).unwrap();
        assert!((e.value - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
    }
}
