//! Lattice partitions of the window and the bound between a continuous
//! process and its discrete analogue.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, Intensity, TheoremId};
use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};
use crate::models::{sup_weighted_integral, Activity, Interaction, Kernel, Model, ModelKind};
use crate::rng::{exponential, replica_stream, uniform};
use crate::scalar::{unit_ball_volume, Real};
use crate::stein::{stein_params, MeanEstimate, Regime};

/// Axis-aligned cell with its lattice point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct Cell<T> {
    pub center: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

/// Regular grid partition; cells are numbered with the first axis slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct Partition<T> {
    pub window: Window<T>,
    pub n_per_dim: usize,
    pub cells: Vec<Cell<T>>,
    /// Largest distance from a cell point to its centre.
    pub r_v: T,
}

/// Counts per cell, in cell order.
pub type LatticeConfig = Vec<u32>;

/// `n_per_dim^D` congruent cells with centres at the cell midpoints.
pub fn build_grid_partition<T: Real>(w: &Window<T>, n_per_dim: usize) -> Result<Partition<T>> {
    if n_per_dim == 0 {
        return Err(Error::param("n_per_dim must be at least 1"));
    }
    let dim = w.dim();
    let total = n_per_dim
        .checked_pow(dim as u32)
        .filter(|n| *n <= 50_000_000)
        .ok_or_else(|| Error::TooLarge(format!("{n_per_dim}^{dim} cells")))?;
    let nf = T::from_usize_lossy(n_per_dim);
    let mut cells = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut lower = vec![T::zero(); dim];
        let mut upper = vec![T::zero(); dim];
        let mut center = vec![T::zero(); dim];
        for i in 0..dim {
            let h = w.edge(i) / nf;
            lower[i] = w.lower()[i] + h * T::from_usize_lossy(idx[i]);
            upper[i] = if idx[i] + 1 == n_per_dim {
                w.upper()[i]
            } else {
                w.lower()[i] + h * T::from_usize_lossy(idx[i] + 1)
            };
            center[i] = w.lower()[i] + h * (T::from_usize_lossy(idx[i]) + T::lit(0.5));
        }
        cells.push(Cell { center, lower, upper });
        for i in (0..dim).rev() {
            idx[i] += 1;
            if idx[i] < n_per_dim {
                break;
            }
            idx[i] = 0;
        }
    }
    let r_v = (0..dim)
        .map(|i| (w.edge(i) / nf * T::lit(0.5)).powi(2))
        .fold(T::zero(), |a, b| a + b)
        .sqrt();
    Ok(Partition {
        window: w.clone(),
        n_per_dim,
        cells,
        r_v,
    })
}

impl<T: Real> Partition<T> {
    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: &[T]) -> usize {
        let w = &self.window;
        let n = self.n_per_dim;
        let mut id = 0usize;
        for (i, &xi) in x.iter().enumerate() {
            let f = ((xi - w.lower()[i]) / w.edge(i) * T::from_usize_lossy(n)).floor();
            let j = f.to_usize().unwrap_or(0).min(n - 1);
            id = id * n + j;
        }
        id
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// `t(ξ)`: the number of points of `ξ` in each cell.
pub fn project<T: Real>(p: &Partition<T>, xi: &PointConfig<T>) -> LatticeConfig {
    let mut counts = vec![0u32; p.len()];
    for x in xi.iter() {
        counts[p.cell_of(x)] += 1;
    }
    counts
}

/// The lattice points of a lattice configuration, with multiplicity.
pub fn lattice_points<T: Real>(p: &Partition<T>, counts: &[u32]) -> PointConfig<T> {
    let mut out = PointConfig::new(p.window.dim());
    for (cell, &n) in p.cells.iter().zip(counts) {
        for _ in 0..n {
            out.push(&cell.center);
        }
    }
    out
}

/// Replaces every lattice point by an independent uniform point of its cell.
pub fn randomize<T: Real>(p: &Partition<T>, counts: &[u32], seed: u64) -> Result<PointConfig<T>> {
    randomize_replica(p, counts, seed, 0)
}

pub fn randomize_replica<T: Real>(p: &Partition<T>, counts: &[u32], seed: u64, replica: u64) -> Result<PointConfig<T>> {
    if counts.len() != p.len() {
        return Err(Error::param(format!(
            "lattice configuration has {} entries for {} cells",
            counts.len(),
            p.len()
        )));
    }
    let mut rng = replica_stream(seed, replica);
    let dim = p.window.dim();
    let mut out = PointConfig::new(dim);
    let mut x = vec![T::zero(); dim];
    for (cell, &n) in p.cells.iter().zip(counts) {
        for _ in 0..n {
            for i in 0..dim {
                let u = T::lit(uniform(&mut rng));
                x[i] = cell.lower[i] + u * (cell.upper[i] - cell.lower[i]);
            }
            out.push(&x);
        }
    }
    Ok(out)
}

/// Equilibrium samples of the lattice analogue of `m` on `p`: at most one
/// point per cell, birth rate `|V_i| λ(y_i | η)` into an empty cell `i`, unit
/// death rate per point. Each chain starts empty and is read at
/// `burn_in + j * spacing`; output order is chain by chain.
pub fn sample_lattice_analogue<T: Real>(
    m: &Model<T>,
    p: &Partition<T>,
    burn_in: T,
    n: usize,
    spacing: T,
    seed: u64,
    chains: usize,
) -> Result<Vec<LatticeConfig>> {
    if m.window() != &p.window {
        return Err(Error::param("model and partition live on different windows"));
    }
    if !(burn_in >= T::zero()) || !(spacing > T::zero()) {
        return Err(Error::param("burn-in must be non-negative and spacing positive"));
    }
    let env = m.envelope_const()? * m.beta_max();
    let cells = p.len();
    let proposal = (env * p.window.volume()).as_f64();
    let chains = chains.max(1).min(n.max(1));
    let per: Vec<usize> = (0..chains).map(|c| n / chains + usize::from(c < n % chains)).collect();
    let runs: Vec<Vec<LatticeConfig>> = per
        .par_iter()
        .enumerate()
        .map(|(c, &k)| {
            let mut rng = replica_stream(seed, c as u64);
            let mut counts = vec![0u32; cells];
            let mut occupied: Vec<usize> = Vec::new();
            let mut centres = PointConfig::new(p.window.dim());
            let mut t = 0.0;
            let mut out = Vec::with_capacity(k);
            for j in 0..k {
                let until = (burn_in + spacing * T::from_usize_lossy(j)).as_f64();
                loop {
                    let rate = proposal + occupied.len() as f64;
                    let dt = exponential(&mut rng, rate);
                    if t + dt > until {
                        // memoryless: restart the clock at the reading time
                        t = until;
                        break;
                    }
                    t += dt;
                    if uniform(&mut rng) * rate < proposal {
                        let i = ((uniform(&mut rng) * cells as f64) as usize).min(cells - 1);
                        let u = uniform(&mut rng);
                        if counts[i] > 0 {
                            continue;
                        }
                        let lam = m.cond_intensity(&p.cells[i].center, &centres);
                        if T::lit(u) * env < lam {
                            counts[i] = 1;
                            occupied.push(i);
                            centres.push(&p.cells[i].center);
                        }
                    } else {
                        let d = ((uniform(&mut rng) * occupied.len() as f64) as usize).min(occupied.len() - 1);
                        counts[occupied[d]] = 0;
                        occupied.swap_remove(d);
                        centres.swap_remove(d);
                    }
                }
                out.push(counts.clone());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// `sup_y α(A(y, a, b))`, the largest measure of an annulus `a < d <= b` in the window.
pub fn sup_annulus_measure<T: Real>(w: &Window<T>, a: T, b: T) -> Result<T> {
    let phi = if a > T::zero() {
        Interaction::Step {
            radii: vec![a, b],
            values: vec![T::one(), T::zero()],
        }
    } else {
        Interaction::Strauss {
            gamma: T::zero(),
            radius: b,
        }
    };
    let one = Activity::Constant(T::one());
    let tol = (w.volume() * T::lit(1e-12)).max(T::lit(1e-15));
    sup_weighted_integral(w, &one, &Kernel::deficit(&phi), tol, T::lit(1e-6))
}

/// Wasserstein `d₂` bound between an inhibitory pairwise interaction process
/// with constant activity and its discrete analogue on the partition.
///
/// Strauss interactions use the annulus measure; other interactions need a
/// Lipschitz constant, either `lipschitz` or the interaction's own.
pub fn d2_bound_discrete<T: Real>(
    m: &Model<T>,
    p: &Partition<T>,
    intensity: Intensity<'_, T>,
    lipschitz: Option<T>,
) -> Result<BoundReport> {
    let params = match m.kind() {
        ModelKind::Pip(pp) => pp,
        _ => return Err(Error::param(format!("{} is not an unrestricted pairwise interaction process", m.kind_name()))),
    };
    let beta = params
        .beta
        .constant()
        .ok_or_else(|| Error::param("the discretization bound needs a constant activity"))?;
    if !params.phi.is_inhibitory() {
        return Err(Error::param("the discretization bound needs an inhibitory interaction"));
    }
    if m.window() != &p.window {
        return Err(Error::param("partition and model windows differ"));
    }
    let w = m.window();
    let dim = w.dim();
    let r_v = p.r_v;
    let stein = stein_params(m, Regime::Optimal)?;
    let mut rep = BoundReport::new(TheoremId::Discretization, intensity.mode());
    rep.with_stein(&stein);
    rep.set("r_V", r_v.as_f64());
    rep.set("cells", p.len() as f64);

    let sup_int = match (&params.phi, lipschitz.or(params.phi.lipschitz())) {
        (Interaction::Strauss { gamma, radius }, _) => {
            let (a, b) = (*radius - r_v - r_v, *radius + r_v + r_v);
            let ann = sup_annulus_measure(w, a, b)?;
            let ad = unit_ball_volume::<T>(dim);
            let euclid = T::lit(4.0) * ad * T::from_usize_lossy(dim) * b.powi(dim as i32 - 1) * r_v;
            rep.set("annulus_measure", ann.as_f64());
            rep.set("annulus_euclidean_bound", euclid.as_f64());
            rep.set("gamma", gamma.as_f64());
            (T::one() - *gamma) * ann
        }
        (_, Some(l)) => {
            if !(l >= T::zero()) {
                return Err(Error::param("Lipschitz constant must be non-negative"));
            }
            rep.set("lipschitz", l.as_f64());
            T::lit(2.0) * l * w.volume() * r_v
        }
        (_, None) => {
            return Err(Error::param(
                "interaction is neither Strauss nor has a Lipschitz constant; supply one",
            ))
        }
    };
    let mean = match intensity {
        Intensity::Envelope => beta.as_f64() * w.volume().as_f64(),
        Intensity::Samples(s) => {
            if s.is_empty() {
                return Err(Error::param("Monte Carlo mode needs at least one sample"));
            }
            let counts: Vec<f64> = s.iter().map(|c| c.len() as f64).collect();
            let e = MeanEstimate::from_samples(&counts);
            rep.set("mean_count_stderr", e.stderr);
            e.mean + 3.0 * e.stderr
        }
    };
    let term = stein.c1.as_f64() * mean * beta.as_f64() * sup_int.as_f64();
    rep.set("mean_count", mean);
    rep.set("sup_interaction_change", sup_int.as_f64());
    rep.set("discretization_term", term);
    rep.finish(r_v.as_f64() + term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Poisson};
    use std::f64::consts::PI;

    fn torus() -> Window<f64> {
        Window::<f64>::unit(2, true)
    }

    #[test]
    fn grid_radii() {
        let p = build_grid_partition(&Window::<f64>::unit(2, false), 10).unwrap();
        assert_eq!(p.len(), 100);
        assert!((p.r_v - 2f64.sqrt() / 20.0).abs() < 1e-15);
        let one = build_grid_partition(&Window::<f64>::unit(2, false), 1).unwrap();
        assert_eq!(one.cells[0].center, vec![0.5, 0.5]);
        let cube = build_grid_partition(&Window::<f64>::unit(3, false), 4).unwrap();
        assert_eq!(cube.len(), 64);
        assert!((cube.r_v - 3f64.sqrt() / 8.0).abs() < 1e-15);
        assert!(build_grid_partition(&torus(), 0).is_err());
    }

    #[test]
    fn cells_tile_window() {
        let w = Window::new(vec![-1.0, 0.0], vec![1.0, 3.0], false).unwrap();
        let p = build_grid_partition(&w, 7).unwrap();
        let vol: f64 = p
            .cells
            .iter()
            .map(|c| (0..2).map(|i| c.upper[i] - c.lower[i]).product::<f64>())
            .sum();
        assert!((vol - 6.0).abs() < 1e-12);
        for (i, c) in p.cells.iter().enumerate() {
            assert_eq!(p.cell_of(&c.center), i);
        }
    }

    #[test]
    fn projection_examples() {
        let p = build_grid_partition(&Window::<f64>::unit(2, false), 4).unwrap();
        assert!(project(&p, &PointConfig::new(2)).iter().all(|&n| n == 0));
        let c = &p.cells[3];
        let xi = PointConfig::from_points(2, &[[c.lower[0] + 0.01, c.lower[1] + 0.2], [c.center[0], c.center[1]]]).unwrap();
        let t = project(&p, &xi);
        assert_eq!(t[3], 2);
        assert_eq!(t.iter().sum::<u32>(), 2);
        assert_eq!(lattice_points(&p, &t).len(), 2);
        assert!(randomize(&p, &[0; 16], 1).unwrap().is_empty());
        assert!(randomize(&p, &[0; 3], 1).is_err());
        let json = serde_json::to_string(&p).unwrap();
        let back: Partition<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn randomized_poisson_counts() {
        let p = build_grid_partition(&Window::<f64>::unit(2, false), 5).unwrap();
        let beta = 8.0;
        let cell = Poisson::new(beta / 25.0).unwrap();
        let mut rng = replica_stream(99, 0);
        let totals: Vec<f64> = (0..4000)
            .map(|r| {
                let counts: Vec<u32> = (0..25).map(|_| cell.sample(&mut rng) as u32).collect();
                let x = randomize_replica(&p, &counts, 5, r).unwrap();
                assert_eq!(project(&p, &x), counts);
                x.len() as f64
            })
            .collect();
        let e = MeanEstimate::from_samples(&totals);
        let var = totals.iter().map(|t| (t - e.mean).powi(2)).sum::<f64>() / 3999.0;
        assert!((e.mean - beta).abs() < 4.0 * e.stderr, "{}", e.mean);
        assert!((var - beta).abs() < 0.1 * beta, "{var}");
    }

    #[test]
    fn strauss_example() {
        let m = Model::strauss(torus(), 50.0, 0.5, 0.1).unwrap();
        let p = build_grid_partition(&torus(), 10).unwrap();
        let r = d2_bound_discrete(&m, &p, Intensity::Envelope, None).unwrap();
        let rv = 2f64.sqrt() / 20.0;
        let euclid = 4.0 * PI * 2.0 * (0.1 + 2.0 * rv) * rv;
        assert!((r.get("annulus_euclidean_bound").unwrap() - euclid).abs() < 1e-12);
        let ann = PI * (0.1 + 2.0 * rv).powi(2);
        assert!((r.get("annulus_measure").unwrap() - ann).abs() < 1e-10);
        assert!(ann <= euclid);
        let c1 = stein_params(&m, Regime::Optimal).unwrap().c1;
        let want = rv + c1 * 50.0 * 50.0 * 0.5 * ann;
        assert!((r.bound - want).abs() < 1e-9 * want);
    }

    #[test]
    fn strauss_slope_is_linear() {
        let m = Model::strauss(torus(), 50.0, 0.5, 0.1).unwrap();
        let pts: Vec<(f64, f64)> = [5, 10, 20, 40]
            .iter()
            .map(|&n| {
                let p = build_grid_partition(&torus(), n).unwrap();
                let r = d2_bound_discrete(&m, &p, Intensity::Envelope, None).unwrap();
                (p.r_v.ln(), (r.bound - p.r_v).ln())
            })
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((slope - 1.0).abs() <= 0.15, "{slope}");
    }

    #[test]
    fn lipschitz_cases() {
        let flat = Model::pip(torus(), Activity::Constant(20.0), Interaction::Ramp { range: 0.1, floor: 1.0 }).unwrap();
        let p = build_grid_partition(&torus(), 8).unwrap();
        let r = d2_bound_discrete(&flat, &p, Intensity::Envelope, None).unwrap();
        assert_eq!(r.bound, p.r_v);

        let ramp = Model::pip(torus(), Activity::Constant(20.0), Interaction::Ramp { range: 0.1, floor: 0.5 }).unwrap();
        let coarse = d2_bound_discrete(&ramp, &build_grid_partition(&torus(), 8).unwrap(), Intensity::Envelope, None).unwrap();
        let fine = d2_bound_discrete(&ramp, &build_grid_partition(&torus(), 16).unwrap(), Intensity::Envelope, None).unwrap();
        let ratio = fine.get("discretization_term").unwrap() / coarse.get("discretization_term").unwrap();
        assert!((ratio - 0.5).abs() < 1e-12);
        let c1 = stein_params(&ramp, Regime::Optimal).unwrap().c1;
        let rv = coarse.get("r_V").unwrap();
        let want = c1 * 20.0 * 20.0 * 2.0 * 5.0 * rv;
        assert!((coarse.get("discretization_term").unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn rejects_unsupported_models() {
        let p = build_grid_partition(&torus(), 4).unwrap();
        let bi = Model::bi_scale_strauss(torus(), 20.0, 0.2, 0.05, 1.1, 0.1).unwrap();
        assert!(d2_bound_discrete(&bi, &p, Intensity::Envelope, None).is_err());
        let grid = Model::pip(
            torus(),
            Activity::Grid {
                shape: vec![2, 2],
                values: vec![5.0; 4],
            },
            Interaction::Strauss { gamma: 0.5, radius: 0.1 },
        )
        .unwrap();
        assert!(d2_bound_discrete(&grid, &p, Intensity::Envelope, None).is_err());
        let hc = Model::hard_core_strauss(torus(), 20.0, 0.02, 0.5, 0.1).unwrap();
        assert!(d2_bound_discrete(&hc, &p, Intensity::Envelope, None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn counts_preserved(pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..40), n in 1usize..12, seed in any::<u64>()) {
            let w = Window::<f64>::unit(2, false);
            let p = build_grid_partition(&w, n).unwrap();
            let xi = PointConfig::from_points(2, &pts.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>()).unwrap();
            let t = project(&p, &xi);
            prop_assert_eq!(t.iter().sum::<u32>() as usize, xi.len());
            let back = randomize(&p, &t, seed).unwrap();
            prop_assert_eq!(back.len(), xi.len());
            prop_assert_eq!(project(&p, &back), t);
        }

        #[test]
        fn bound_at_least_cell_radius(n in 1usize..30, gamma in 0.0f64..1.0) {
            let m = Model::strauss(torus(), 10.0, gamma, 0.05).unwrap();
            let p = build_grid_partition(&torus(), n).unwrap();
            let r = d2_bound_discrete(&m, &p, Intensity::Envelope, None).unwrap();
            prop_assert!(r.bound >= p.r_v);
        }
    }
}
