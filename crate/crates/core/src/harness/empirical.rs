use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};
use crate::models::{Model, ModelKind};
use crate::rng::{derive_seed, replica_stream, uniform};
use crate::sbdp::sample_equilibrium_chains;
use crate::scalar::Real;
use crate::stein::MeanEstimate;

use super::DEFAULT_BURN_IN;

/// Fixed family of `[0, 1]`-valued statistics for the empirical lower estimates.
///
/// Total variation uses the count law (counts at or above `count_cap` pooled),
/// the count law in each of `boxes_per_axis^D` sub-boxes and the indicators
/// `{min pairwise distance <= t}`. The `d₂` estimate uses the count law and
/// `min(mpd, t) / (2 |ξ|)`, both 1-Lipschitz for `d₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct StatFamily<T> {
    pub count_cap: usize,
    pub boxes_per_axis: usize,
    pub distances: Vec<T>,
}

impl<T: Real> StatFamily<T> {
    pub fn new(count_cap: usize, boxes_per_axis: usize, mut distances: Vec<T>) -> Result<Self> {
        if count_cap == 0 || boxes_per_axis == 0 {
            return Err(Error::param("count cap and boxes per axis must be positive"));
        }
        if distances.iter().any(|t| !(*t > T::zero() && *t <= T::one())) {
            return Err(Error::param("distance thresholds must lie in (0, 1]"));
        }
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distances.dedup();
        Ok(StatFamily {
            count_cap,
            boxes_per_axis,
            distances,
        })
    }

    /// Thresholds at the interaction ranges of both models and at
    /// `1/40, 1/20, 1/10` of the shortest edge.
    pub fn for_models(a: &Model<T>, b: &Model<T>) -> Self {
        let edge = a.window().min_edge();
        let mut ts: Vec<T> = [40.0, 20.0, 10.0].iter().map(|&k| edge / T::lit(k)).collect();
        for m in [a, b] {
            ts.extend(interaction_radii(m).into_iter().filter(|&r| r < edge * T::lit(0.5)));
        }
        ts.retain(|&t| t > T::zero() && t <= T::one());
        StatFamily::new(1000, 2, ts).expect("thresholds filtered to (0, 1]")
    }
}

/// Radii at which the interaction of `m` changes character.
pub fn interaction_radii<T: Real>(m: &Model<T>) -> Vec<T> {
    let m = m.unconditioned();
    match m.kind() {
        ModelKind::AreaInteraction(a) => vec![a.big_r],
        _ => match m.interaction() {
            Some(phi) => {
                let mut v: Vec<T> = phi.breakpoints().into_iter().filter(|r| r.is_finite() && *r > T::zero()).collect();
                v.extend(phi.support());
                v.extend(phi.hard_core().filter(|&h| h > T::zero()));
                v
            }
            None => Vec::new(),
        },
    }
}

/// An empirical lower estimate with its (family-widened) standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerEstimate {
    pub lower: f64,
    pub se: f64,
    /// Name of the statistic attaining the maximum.
    pub statistic: String,
    pub family_size: usize,
    pub n_a: usize,
    pub n_b: usize,
}

struct Candidate {
    name: String,
    diff: f64,
    se: f64,
}

fn count_law(name: &str, a: &[usize], b: &[usize], cap: usize, out: &mut Vec<Candidate>, k: &mut usize) {
    let mut hist: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for &c in a {
        hist.entry(c.min(cap)).or_default().0 += 1;
    }
    for &c in b {
        hist.entry(c.min(cap)).or_default().1 += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    // the set of counts more frequent under `a` attains the total variation
    let (ia, ib) = hist
        .values()
        .filter(|(x, y)| *x as f64 / na > *y as f64 / nb)
        .fold((0, 0), |(s, t), (x, y)| (s + x, t + y));
    *k += hist.len();
    out.push(indicator(name, ia, a.len(), ib, b.len()));
}

/// Difference of two proportions with the binomial standard error at the
/// smoothed proportions `(i + 1) / (n + 2)`.
fn indicator(name: &str, ia: usize, na: usize, ib: usize, nb: usize) -> Candidate {
    let var = |i: usize, n: usize| {
        let p = (i as f64 + 1.0) / (n as f64 + 2.0);
        p * (1.0 - p) / n as f64
    };
    Candidate {
        name: name.to_string(),
        diff: (ia as f64 / na as f64 - ib as f64 / nb as f64).abs(),
        se: (var(ia, na) + var(ib, nb)).sqrt(),
    }
}

fn box_counts<T: Real>(w: &Window<T>, xi: &PointConfig<T>, per_axis: usize) -> Vec<usize> {
    let dim = w.dim();
    let mut out = vec![0usize; per_axis.pow(dim as u32)];
    for x in xi.iter() {
        let mut idx = 0;
        for i in 0..dim {
            let f = ((x[i] - w.lower()[i]) / w.edge(i)).as_f64();
            let j = ((f * per_axis as f64) as usize).min(per_axis - 1);
            idx = idx * per_axis + j;
        }
        out[idx] += 1;
    }
    out
}

fn finish(cands: Vec<Candidate>, k: usize, na: usize, nb: usize) -> LowerEstimate {
    let best = cands
        .into_iter()
        .max_by(|x, y| x.diff.total_cmp(&y.diff))
        .expect("the count law is always present");
    LowerEstimate {
        lower: best.diff,
        se: best.se * (k.max(1) as f64).sqrt(),
        statistic: best.name,
        family_size: k,
        n_a: na,
        n_b: nb,
    }
}

fn check_samples<T>(xs: &[PointConfig<T>], ys: &[PointConfig<T>]) -> Result<()> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::param("both sample sets must be non-empty"));
    }
    Ok(())
}

/// Largest absolute mean difference over the family between two samples.
pub fn tv_lower_from_samples<T: Real>(
    w: &Window<T>,
    xs: &[PointConfig<T>],
    ys: &[PointConfig<T>],
    family: &StatFamily<T>,
) -> Result<LowerEstimate> {
    check_samples(xs, ys)?;
    let (na, nb) = (xs.len(), ys.len());
    let mut cands = Vec::new();
    let mut k = 0;
    let ca: Vec<usize> = xs.iter().map(|c| c.len()).collect();
    let cb: Vec<usize> = ys.iter().map(|c| c.len()).collect();
    count_law("count", &ca, &cb, family.count_cap, &mut cands, &mut k);

    let ba: Vec<Vec<usize>> = xs.par_iter().map(|c| box_counts(w, c, family.boxes_per_axis)).collect();
    let bb: Vec<Vec<usize>> = ys.par_iter().map(|c| box_counts(w, c, family.boxes_per_axis)).collect();
    let boxes = family.boxes_per_axis.pow(w.dim() as u32);
    if boxes > 1 {
        for j in 0..boxes {
            let a: Vec<usize> = ba.iter().map(|v| v[j]).collect();
            let b: Vec<usize> = bb.iter().map(|v| v[j]).collect();
            count_law(&format!("box_{j}_count"), &a, &b, family.count_cap, &mut cands, &mut k);
        }
    }

    let ma: Vec<T> = xs.par_iter().map(|c| c.min_pair_distance(w)).collect();
    let mb: Vec<T> = ys.par_iter().map(|c| c.min_pair_distance(w)).collect();
    for &t in &family.distances {
        let ia = ma.iter().filter(|&&d| d <= t).count();
        let ib = mb.iter().filter(|&&d| d <= t).count();
        k += 1;
        cands.push(indicator(&format!("min_distance_le_{:e}", t.as_f64()), ia, na, ib, nb));
    }
    Ok(finish(cands, k, na, nb))
}

/// Largest absolute mean difference over `d₁`-Lipschitz statistics; a lower
/// estimate of `d₂`.
pub fn d2_lower_from_samples<T: Real>(
    w: &Window<T>,
    xs: &[PointConfig<T>],
    ys: &[PointConfig<T>],
    family: &StatFamily<T>,
) -> Result<LowerEstimate> {
    check_samples(xs, ys)?;
    let (na, nb) = (xs.len(), ys.len());
    let mut cands = Vec::new();
    let mut k = 0;
    let ca: Vec<usize> = xs.iter().map(|c| c.len()).collect();
    let cb: Vec<usize> = ys.iter().map(|c| c.len()).collect();
    count_law("count", &ca, &cb, family.count_cap, &mut cands, &mut k);

    let ma: Vec<T> = xs.par_iter().map(|c| c.min_pair_distance(w)).collect();
    let mb: Vec<T> = ys.par_iter().map(|c| c.min_pair_distance(w)).collect();
    for &t in &family.distances {
        let stat = |d: &[T], n: &[usize]| -> Vec<f64> {
            d.iter()
                .zip(n)
                .map(|(&m, &c)| (m.min(t) / T::from_usize_lossy(2 * c.max(1))).as_f64())
                .collect()
        };
        let ea = MeanEstimate::from_samples(&stat(&ma, &ca));
        let eb = MeanEstimate::from_samples(&stat(&mb, &cb));
        k += 1;
        cands.push(Candidate {
            name: format!("clamped_min_distance_{:e}", t.as_f64()),
            diff: (ea.mean - eb.mean).abs(),
            se: ea.stderr.hypot(eb.stderr),
        });
    }
    Ok(finish(cands, k, na, nb))
}

/// Empirical lower estimate of `d_TV(a, b)` from `n` independent equilibrium
/// samples of each model (one chain per sample, burn-in [`DEFAULT_BURN_IN`]).
pub fn empirical_tv_lower<T: Real>(
    a: &Model<T>,
    b: &Model<T>,
    stats: &StatFamily<T>,
    n: usize,
    seed: u64,
) -> Result<LowerEstimate> {
    if a.window() != b.window() {
        return Err(Error::param("models live on different windows"));
    }
    let burn = T::lit(DEFAULT_BURN_IN);
    let xs = sample_equilibrium_chains(a, burn, n, T::one(), derive_seed(seed, 1), n)?;
    let ys = sample_equilibrium_chains(b, burn, n, T::one(), derive_seed(seed, 2), n)?;
    tv_lower_from_samples(a.window(), &xs.configs, &ys.configs, stats)
}

/// Test function of the GNZ check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound(deserialize = "T: Real", serialize = "T: Real"))]
pub enum GnzFunction<T> {
    One,
    /// `1{ξ(B(x, r)) = 0}`.
    EmptyBall { r: T },
}

impl<T: Real> GnzFunction<T> {
    pub fn eval(&self, w: &Window<T>, x: &[T], xi: &PointConfig<T>) -> T {
        match *self {
            GnzFunction::One => T::one(),
            GnzFunction::EmptyBall { r } => {
                if xi.count_within(w, x, r) == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            GnzFunction::One => "one".into(),
            GnzFunction::EmptyBall { r } => format!("empty_ball_{:e}", r.as_f64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnzResidual {
    pub model: String,
    pub function: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub se: f64,
    pub n: usize,
    pub within_3se: bool,
}

/// Mean and batch-means standard error over `batches` contiguous groups.
fn batch_mean(xs: &[f64], batches: usize) -> MeanEstimate {
    let n = xs.len();
    let b = batches.clamp(1, n.max(1));
    if b == n || b < 2 {
        return MeanEstimate::from_samples(xs);
    }
    let means: Vec<f64> = (0..b)
        .map(|i| {
            let (lo, hi) = (i * n / b, (i + 1) * n / b);
            xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let e = MeanEstimate::from_samples(&means);
    MeanEstimate {
        mean: xs.iter().sum::<f64>() / n as f64,
        stderr: e.stderr,
        n,
    }
}

/// Both sides of `E Σ_{x∈Ξ} h(x, Ξ - δ_x) = ∫ E h(x, Ξ) λ(x | Ξ) dx` over the
/// given equilibrium samples. The right side integrates over `x` with
/// `points` uniform draws per sample; the standard error uses batch means
/// over `batches` groups of consecutive samples.
pub fn gnz_residual_from_samples<T: Real>(
    m: &Model<T>,
    h: &(dyn Fn(&[T], &PointConfig<T>) -> T + Sync),
    samples: &[PointConfig<T>],
    batches: usize,
    points: usize,
    seed: u64,
) -> Result<(MeanEstimate, MeanEstimate, MeanEstimate)> {
    if samples.is_empty() || points == 0 {
        return Err(Error::param("need samples and at least one integration point"));
    }
    let w = m.window();
    let vol = w.volume();
    let check = |v: T| -> Result<T> {
        if v >= T::zero() && v <= T::one() {
            Ok(v)
        } else {
            Err(Error::param(format!("test function value {v} outside [0, 1]")))
        }
    };
    let pairs: Vec<(f64, f64)> = samples
        .par_iter()
        .enumerate()
        .map(|(i, xi)| {
            let mut lhs = T::zero();
            for j in 0..xi.len() {
                lhs = lhs + check(h(xi.point(j), &xi.without(j)))?;
            }
            let mut rng = replica_stream(seed, i as u64);
            let dim = w.dim();
            let (mut frac, mut x) = (vec![T::zero(); dim], vec![T::zero(); dim]);
            let mut rhs = T::zero();
            for _ in 0..points {
                for f in frac.iter_mut() {
                    *f = T::lit(uniform(&mut rng));
                }
                w.from_unit(&frac, &mut x);
                rhs = rhs + check(h(&x, xi))? * m.cond_intensity(&x, xi);
            }
            Ok((lhs.as_f64(), (rhs * vol / T::from_usize_lossy(points)).as_f64()))
        })
        .collect::<Result<_>>()?;
    let l: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let r: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    Ok((batch_mean(&l, batches), batch_mean(&r, batches), batch_mean(&d, batches)))
}

/// GNZ residual of `m` for `h` over `n` independent equilibrium samples.
pub fn gnz_residual<T: Real>(m: &Model<T>, h: &GnzFunction<T>, n: usize, seed: u64) -> Result<GnzResidual> {
    let s = sample_equilibrium_chains(m, T::lit(DEFAULT_BURN_IN), n, T::one(), derive_seed(seed, 1), n)?;
    gnz_report(m, m.kind_name(), h, &s.configs, n, 16, derive_seed(seed, 2))
}

pub(crate) fn gnz_report<T: Real>(
    m: &Model<T>,
    label: &str,
    h: &GnzFunction<T>,
    samples: &[PointConfig<T>],
    batches: usize,
    points: usize,
    seed: u64,
) -> Result<GnzResidual> {
    let w = m.window();
    let f = |x: &[T], xi: &PointConfig<T>| h.eval(w, x, xi);
    let (l, r, d) = gnz_residual_from_samples(m, &f, samples, batches, points, seed)?;
    Ok(GnzResidual {
        model: label.to_string(),
        function: h.name(),
        lhs: l.mean,
        rhs: r.mean,
        residual: d.mean,
        se: d.stderr,
        n: samples.len(),
        within_3se: d.mean.abs() <= 3.0 * d.stderr,
    })
}
