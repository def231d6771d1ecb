//! Spatial birth-death processes with birth rate `λ(·|·)` and unit
//! per-capita death rate, simulated exactly by thinning, and the maximal
//! coupling of two such processes.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};
use crate::models::Model;
use crate::rng::{exponential, replica_stream, Stream};
use crate::scalar::Real;
use crate::stein::MeanEstimate;

/// Default cap on the number of jumps of a coupling run.
pub const DEFAULT_MAX_JUMPS: u64 = 1_000_000;

/// Mean birth acceptance below which a run is flagged as inefficient.
pub const EFFICIENCY_FLOOR: f64 = 1e-6;

/// Proposals allowed per counted jump before a run is abandoned.
const PROPOSALS_PER_JUMP: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct SbdpState<T> {
    pub config: PointConfig<T>,
    pub time: T,
    pub jump_count: u64,
    pub births: u64,
    pub deaths: u64,
    pub birth_proposals: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl<T: Real> SbdpState<T> {
    pub fn acceptance(&self) -> f64 {
        if self.birth_proposals == 0 {
            1.0
        } else {
            self.births as f64 / self.birth_proposals as f64
        }
    }

    fn check_efficiency(&mut self) {
        if self.birth_proposals >= 1000 && self.acceptance() < EFFICIENCY_FLOOR {
            self.warning = Some(format!(
                "birth acceptance {:.3e} is below {EFFICIENCY_FLOOR:e}; the envelope is far from the intensity",
                self.acceptance()
            ));
        }
    }
}

/// One line of a JSON-lines trajectory dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    pub kind: JumpKind,
    pub point: Vec<f64>,
    pub chain: Chain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    Birth,
    Death,
    Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chain {
    #[serde(rename = "xi")]
    Xi,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "both")]
    Both,
}

fn dump<T: Real>(sink: &mut Option<&mut dyn Write>, t: T, kind: JumpKind, point: &[T], chain: Chain) -> Result<()> {
    if let Some(w) = sink.as_mut() {
        let rec = JumpRecord {
            t: t.as_f64(),
            kind,
            point: point.iter().map(|v| v.as_f64()).collect(),
            chain,
        };
        serde_json::to_writer(&mut **w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn uniform_point<T: Real>(w: &Window<T>, rng: &mut Stream, frac: &mut [T], out: &mut [T]) {
    for f in frac.iter_mut() {
        *f = T::lit(rng.gen::<f64>());
    }
    w.from_unit(frac, out);
}

fn check_start<T: Real>(m: &Model<T>, xi: &PointConfig<T>) -> Result<()> {
    if xi.dim() != m.window().dim() || !xi.in_window(m.window()) {
        return Err(Error::param("initial configuration must lie in the model window"));
    }
    if !m.admissible(xi) {
        return Err(Error::param("initial configuration has zero density"));
    }
    Ok(())
}

/// Exact simulation of one trajectory.
pub struct Simulator<'a, T> {
    model: &'a Model<T>,
    rng: Stream,
    state: SbdpState<T>,
    frac: Vec<T>,
    y: Vec<T>,
}

impl<'a, T: Real> Simulator<'a, T> {
    pub fn new(model: &'a Model<T>, xi0: PointConfig<T>, rng: Stream) -> Result<Self> {
        check_start(model, &xi0)?;
        model.birth_rate_bound(&xi0)?;
        let d = model.window().dim();
        Ok(Simulator {
            model,
            rng,
            state: SbdpState {
                config: xi0,
                time: T::zero(),
                jump_count: 0,
                births: 0,
                deaths: 0,
                birth_proposals: 0,
                warning: None,
            },
            frac: vec![T::zero(); d],
            y: vec![T::zero(); d],
        })
    }

    pub fn state(&self) -> &SbdpState<T> {
        &self.state
    }

    pub fn into_state(mut self) -> SbdpState<T> {
        self.state.check_efficiency();
        self.state
    }

    /// Runs until `time`, optionally writing every jump to `sink`.
    pub fn advance_to(&mut self, time: T, mut sink: Option<&mut dyn Write>) -> Result<()> {
        let w = self.model.window();
        let vol = w.volume();
        loop {
            let n = self.state.config.len();
            let bound = self.model.birth_rate_bound(&self.state.config)?;
            let birth_rate = (bound * vol).as_f64();
            let total = birth_rate + n as f64;
            let dt = T::lit(exponential(&mut self.rng, total));
            if self.state.time + dt > time || total == 0.0 {
                self.state.time = time;
                return Ok(());
            }
            self.state.time = self.state.time + dt;
            let u = self.rng.gen::<f64>() * total;
            if u < birth_rate {
                self.state.birth_proposals += 1;
                uniform_point(w, &mut self.rng, &mut self.frac, &mut self.y);
                let lam = self.model.cond_intensity_unchecked(&self.y, &self.state.config);
                let v = T::lit(self.rng.gen::<f64>()) * bound;
                if v < lam {
                    self.state.config.push(&self.y);
                    self.state.births += 1;
                    self.state.jump_count += 1;
                    dump(&mut sink, self.state.time, JumpKind::Birth, &self.y, Chain::Xi)?;
                }
            } else {
                let i = ((u - birth_rate) as usize).min(n - 1);
                let p = self.state.config.point(i).to_vec();
                self.state.config.swap_remove(i);
                self.state.deaths += 1;
                self.state.jump_count += 1;
                dump(&mut sink, self.state.time, JumpKind::Death, &p, Chain::Xi)?;
            }
        }
    }
}

/// State of the process at time `horizon` started from `xi0`.
pub fn simulate<T: Real>(m: &Model<T>, xi0: &PointConfig<T>, horizon: T, seed: u64) -> Result<SbdpState<T>> {
    simulate_replica(m, xi0, horizon, seed, 0, None)
}

/// As [`simulate`] on stream `replica`, with an optional trajectory dump.
pub fn simulate_replica<T: Real>(
    m: &Model<T>,
    xi0: &PointConfig<T>,
    horizon: T,
    seed: u64,
    replica: u64,
    sink: Option<&mut dyn Write>,
) -> Result<SbdpState<T>> {
    if !(horizon >= T::zero()) {
        return Err(Error::param("horizon must be non-negative"));
    }
    let mut s = Simulator::new(m, xi0.clone(), replica_stream(seed, replica))?;
    s.advance_to(horizon, sink)?;
    Ok(s.into_state())
}

/// Configurations read off trajectories after a burn-in.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct EquilibriumSample<T> {
    pub configs: Vec<PointConfig<T>>,
    /// `(time, |Z(t)|)` during the burn-in of the first chain.
    pub burn_in_trace: Vec<(f64, usize)>,
    pub chains: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Real> EquilibriumSample<T> {
    pub fn counts(&self) -> Vec<f64> {
        self.configs.iter().map(|c| c.len() as f64).collect()
    }
}

/// `n` configurations from one trajectory started empty, at times
/// `burn_in + i * spacing`.
pub fn sample_equilibrium<T: Real>(m: &Model<T>, burn_in: T, n: usize, spacing: T, seed: u64) -> Result<EquilibriumSample<T>> {
    sample_equilibrium_chains(m, burn_in, n, spacing, seed, 1)
}

/// As [`sample_equilibrium`], splitting the `n` samples over independent
/// chains run in parallel. Output order is chain by chain.
pub fn sample_equilibrium_chains<T: Real>(
    m: &Model<T>,
    burn_in: T,
    n: usize,
    spacing: T,
    seed: u64,
    chains: usize,
) -> Result<EquilibriumSample<T>> {
    if !(burn_in >= T::zero()) || !(spacing > T::zero()) {
        return Err(Error::param("burn-in must be non-negative and spacing positive"));
    }
    let chains = chains.max(1).min(n.max(1));
    let empty = PointConfig::new(m.window().dim());
    let per: Vec<usize> = (0..chains).map(|c| n / chains + usize::from(c < n % chains)).collect();
    let runs: Vec<(Vec<PointConfig<T>>, Vec<(f64, usize)>, Option<String>)> = per
        .par_iter()
        .enumerate()
        .map(|(c, &k)| {
            let mut sim = Simulator::new(m, empty.clone(), replica_stream(seed, c as u64))?;
            let mut trace = Vec::new();
            let steps = 100;
            for i in 1..=steps {
                let t = burn_in * T::from_usize_lossy(i) / T::from_usize_lossy(steps);
                sim.advance_to(t, None)?;
                trace.push((t.as_f64(), sim.state().config.len()));
            }
            let mut out = Vec::with_capacity(k);
            for i in 0..k {
                sim.advance_to(burn_in + spacing * T::from_usize_lossy(i), None)?;
                out.push(sim.state().config.clone());
            }
            let st = sim.into_state();
            Ok((out, trace, st.warning))
        })
        .collect::<Result<_>>()?;
    let mut configs = Vec::with_capacity(n);
    let mut burn_in_trace = Vec::new();
    let mut warnings = Vec::new();
    for (i, (c, t, w)) in runs.into_iter().enumerate() {
        configs.extend(c);
        if i == 0 {
            burn_in_trace = t;
        }
        if let Some(w) = w {
            warnings.push(format!("chain {i}: {w}"));
        }
    }
    Ok(EquilibriumSample {
        configs,
        burn_in_trace,
        chains,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    /// Coupling time; `None` on timeout.
    pub tau: Option<f64>,
    pub jumps: u64,
    pub good_deaths: u64,
    pub bad_births: u64,
    pub initial_symdiff: u64,
    pub final_symdiff: u64,
}

impl CouplingRecord {
    pub fn coupled(&self) -> bool {
        self.final_symdiff == 0
    }
}

/// The pair `(Z_xi, Z_eta)` as common points plus the points of each side only.
#[derive(Clone, Debug)]
pub struct CoupledPair<T> {
    pub common: PointConfig<T>,
    pub only_xi: PointConfig<T>,
    pub only_eta: PointConfig<T>,
}

impl<T: Real> CoupledPair<T> {
    /// Splits by exact coordinate multiset matching.
    pub fn split(xi: &PointConfig<T>, eta: &PointConfig<T>) -> Self {
        let mut rest = eta.clone();
        let mut common = PointConfig::new(xi.dim());
        let mut only_xi = PointConfig::new(xi.dim());
        for p in xi.iter() {
            if rest.remove_exact(p) {
                common.push(p);
            } else {
                only_xi.push(p);
            }
        }
        CoupledPair {
            common,
            only_xi,
            only_eta: rest,
        }
    }

    pub fn xi(&self) -> PointConfig<T> {
        let mut z = self.common.clone();
        for p in self.only_xi.iter() {
            z.push(p);
        }
        z
    }

    pub fn eta(&self) -> PointConfig<T> {
        let mut z = self.common.clone();
        for p in self.only_eta.iter() {
            z.push(p);
        }
        z
    }

    pub fn symdiff(&self) -> usize {
        self.only_xi.len() + self.only_eta.len()
    }
}

/// Runs the coupled pair. Stops at coupling when `stop_at_coupling`, at
/// `horizon`, or after `max_jumps` jumps, whichever comes first.
struct CoupledRun<'a, T> {
    model: &'a Model<T>,
    pair: CoupledPair<T>,
    zx: PointConfig<T>,
    ze: PointConfig<T>,
    time: T,
    record: CouplingRecord,
}

impl<'a, T: Real> CoupledRun<'a, T> {
    fn new(model: &'a Model<T>, xi: &PointConfig<T>, eta: &PointConfig<T>) -> Result<Self> {
        check_start(model, xi)?;
        check_start(model, eta)?;
        let pair = CoupledPair::split(xi, eta);
        let d = pair.symdiff() as u64;
        Ok(CoupledRun {
            model,
            zx: pair.xi(),
            ze: pair.eta(),
            pair,
            time: T::zero(),
            record: CouplingRecord {
                tau: if d == 0 { Some(0.0) } else { None },
                jumps: 0,
                good_deaths: 0,
                bad_births: 0,
                initial_symdiff: d,
                final_symdiff: d,
            },
        })
    }

    fn run(
        &mut self,
        rng: &mut Stream,
        horizon: Option<T>,
        stop_at_coupling: bool,
        max_jumps: u64,
        mut sink: Option<&mut dyn Write>,
    ) -> Result<()> {
        let w = self.model.window();
        let vol = w.volume();
        let dim = w.dim();
        let mut frac = vec![T::zero(); dim];
        let mut y = vec![T::zero(); dim];
        let mut proposals = 0u64;
        loop {
            if stop_at_coupling && self.pair.symdiff() == 0 {
                return Ok(());
            }
            if self.record.jumps >= max_jumps || proposals >= max_jumps.saturating_mul(PROPOSALS_PER_JUMP) {
                return Ok(());
            }
            let bound = self.model.birth_rate_bound(&self.zx)?.max(self.model.birth_rate_bound(&self.ze)?);
            let birth_rate = (bound * vol).as_f64();
            let (nc, nx, ne) = (self.pair.common.len(), self.pair.only_xi.len(), self.pair.only_eta.len());
            let total = birth_rate + (nc + nx + ne) as f64;
            let dt = exponential(rng, total);
            let next = self.time + T::lit(dt);
            if let Some(h) = horizon {
                if next > h || total == 0.0 {
                    self.time = h;
                    return Ok(());
                }
            } else if total == 0.0 {
                return Ok(());
            }
            self.time = next;
            proposals += 1;
            let u = rng.gen::<f64>() * total;
            if u < birth_rate {
                uniform_point(w, rng, &mut frac, &mut y);
                let a = self.model.cond_intensity_unchecked(&y, &self.zx);
                let b = self.model.cond_intensity_unchecked(&y, &self.ze);
                let v = T::lit(rng.gen::<f64>()) * bound;
                if v < a.min(b) {
                    self.pair.common.push(&y);
                    self.zx.push(&y);
                    self.ze.push(&y);
                    dump(&mut sink, self.time, JumpKind::Common, &y, Chain::Both)?;
                } else if v < a.max(b) {
                    if a > b {
                        self.pair.only_xi.push(&y);
                        self.zx.push(&y);
                        dump(&mut sink, self.time, JumpKind::Birth, &y, Chain::Xi)?;
                    } else {
                        self.pair.only_eta.push(&y);
                        self.ze.push(&y);
                        dump(&mut sink, self.time, JumpKind::Birth, &y, Chain::Eta)?;
                    }
                    self.record.bad_births += 1;
                } else {
                    continue;
                }
            } else {
                let i = ((u - birth_rate) as usize).min(nc + nx + ne - 1);
                if i < nc {
                    let p = self.pair.common.point(i).to_vec();
                    self.pair.common.swap_remove(i);
                    self.zx.remove_exact(&p);
                    self.ze.remove_exact(&p);
                    dump(&mut sink, self.time, JumpKind::Death, &p, Chain::Both)?;
                } else if i < nc + nx {
                    let p = self.pair.only_xi.point(i - nc).to_vec();
                    self.pair.only_xi.swap_remove(i - nc);
                    self.zx.remove_exact(&p);
                    self.record.good_deaths += 1;
                    dump(&mut sink, self.time, JumpKind::Death, &p, Chain::Xi)?;
                } else {
                    let p = self.pair.only_eta.point(i - nc - nx).to_vec();
                    self.pair.only_eta.swap_remove(i - nc - nx);
                    self.ze.remove_exact(&p);
                    self.record.good_deaths += 1;
                    dump(&mut sink, self.time, JumpKind::Death, &p, Chain::Eta)?;
                }
            }
            self.record.jumps += 1;
            self.record.final_symdiff = self.pair.symdiff() as u64;
            if self.record.tau.is_none() && self.pair.symdiff() == 0 {
                self.record.tau = Some(self.time.as_f64());
            }
        }
    }
}

/// Couples the processes started at `xi` and `eta` until they agree.
pub fn couple<T: Real>(m: &Model<T>, xi: &PointConfig<T>, eta: &PointConfig<T>, seed: u64, max_jumps: u64) -> Result<CouplingRecord> {
    couple_replica(m, xi, eta, seed, 0, max_jumps, None)
}

/// As [`couple`] on stream `replica`, with an optional trajectory dump.
pub fn couple_replica<T: Real>(
    m: &Model<T>,
    xi: &PointConfig<T>,
    eta: &PointConfig<T>,
    seed: u64,
    replica: u64,
    max_jumps: u64,
    sink: Option<&mut dyn Write>,
) -> Result<CouplingRecord> {
    let mut run = CoupledRun::new(m, xi, eta)?;
    let mut rng = replica_stream(seed, replica);
    run.run(&mut rng, None, true, max_jumps, sink)?;
    Ok(run.record)
}

/// Runs the coupled pair for a fixed time and returns both marginals.
pub fn coupled_marginals<T: Real>(
    m: &Model<T>,
    xi: &PointConfig<T>,
    eta: &PointConfig<T>,
    horizon: T,
    seed: u64,
    replica: u64,
) -> Result<(PointConfig<T>, PointConfig<T>, CouplingRecord)> {
    let mut run = CoupledRun::new(m, xi, eta)?;
    let mut rng = replica_stream(seed, replica);
    run.run(&mut rng, Some(horizon), false, u64::MAX / PROPOSALS_PER_JUMP, None)?;
    Ok((run.zx, run.ze, run.record))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub mean: f64,
    pub stderr: f64,
    pub timeout_fraction: f64,
    pub reps: usize,
    /// Set when more than 1% of the runs timed out.
    pub flagged: bool,
    pub mean_bad_births: f64,
    pub mean_good_deaths: f64,
}

fn summarize(records: &[CouplingRecord]) -> CouplingSummary {
    let taus: Vec<f64> = records.iter().filter_map(|r| r.tau).collect();
    let est = MeanEstimate::from_samples(&taus);
    let n = records.len().max(1) as f64;
    let timeout_fraction = (records.len() - taus.len()) as f64 / n;
    CouplingSummary {
        mean: if taus.is_empty() { f64::NAN } else { est.mean },
        stderr: if taus.is_empty() { f64::NAN } else { est.stderr },
        timeout_fraction,
        reps: records.len(),
        flagged: timeout_fraction > 0.01,
        mean_bad_births: records.iter().map(|r| r.bad_births as f64).sum::<f64>() / n,
        mean_good_deaths: records.iter().map(|r| r.good_deaths as f64).sum::<f64>() / n,
    }
}

/// Mean coupling time over `reps` independent runs from `(xi, eta)`.
pub fn mean_coupling_time<T: Real>(m: &Model<T>, xi: &PointConfig<T>, eta: &PointConfig<T>, reps: usize, seed: u64) -> Result<CouplingSummary> {
    mean_coupling_time_with(m, reps, seed, DEFAULT_MAX_JUMPS, |_, _| Ok((xi.clone(), eta.clone())))
}

/// Mean coupling time with the start pair of replica `r` produced by
/// `start(rng, r)` from that replica's own stream.
pub fn mean_coupling_time_with<T, F>(m: &Model<T>, reps: usize, seed: u64, max_jumps: u64, start: F) -> Result<CouplingSummary>
where
    T: Real,
    F: Fn(&mut Stream, usize) -> Result<(PointConfig<T>, PointConfig<T>)> + Sync,
{
    if reps == 0 {
        return Err(Error::param("reps must be positive"));
    }
    let records: Vec<CouplingRecord> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_stream(seed, r as u64);
            let (xi, eta) = start(&mut rng, r)?;
            let mut run = CoupledRun::new(m, &xi, &eta)?;
            run.run(&mut rng, None, true, max_jumps, None)?;
            Ok(run.record)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&records))
}

/// Adds one uniform point to `xi`, drawn from `rng`.
pub fn add_uniform_point<T: Real>(w: &Window<T>, xi: &PointConfig<T>, rng: &mut Stream) -> PointConfig<T> {
    let mut frac = vec![T::zero(); w.dim()];
    let mut y = vec![T::zero(); w.dim()];
    uniform_point(w, rng, &mut frac, &mut y);
    xi.with_point(&y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Window<f64> {
        Window::unit(2, true)
    }

    #[test]
    fn zero_horizon_and_identical_starts() {
        let m = Model::strauss(unit(), 50.0, 0.5, 0.05).unwrap();
        let xi = PointConfig::from_points(2, &[[0.1, 0.2], [0.7, 0.7]]).unwrap();
        let s = simulate(&m, &xi, 0.0, 3).unwrap();
        assert_eq!(s.config, xi);
        assert_eq!(s.jump_count, 0);
        let r = couple(&m, &xi, &xi, 1, 100).unwrap();
        assert_eq!(r.tau, Some(0.0));
        assert_eq!(r.jumps, 0);
        let s = mean_coupling_time(&m, &xi, &xi, 10, 1).unwrap();
        assert_eq!((s.mean, s.stderr, s.timeout_fraction), (0.0, 0.0, 0.0));
    }

    #[test]
    fn poisson_equilibrium_count() {
        let m = Model::poisson(unit(), 10.0).unwrap();
        let eq = sample_equilibrium_chains(&m, 10.0, 4000, 3.0, 5, 8).unwrap();
        let e = MeanEstimate::from_samples(&eq.counts());
        assert!((e.mean - 10.0).abs() < 4.0 * e.stderr, "{e:?}");
        assert_eq!(eq.burn_in_trace.len(), 100);
        assert!(sample_equilibrium(&m, 1.0, 0, 1.0, 1).unwrap().configs.is_empty());
    }

    #[test]
    fn strauss_is_inhibited_and_hard_core_stays_legal() {
        let m = Model::strauss(unit(), 50.0, 0.5, 0.05).unwrap();
        let eq = sample_equilibrium_chains(&m, 5.0, 400, 1.0, 7, 4).unwrap();
        let e = MeanEstimate::from_samples(&eq.counts());
        assert!(e.mean + 3.0 * e.stderr < 50.0);
        let hc = Model::hard_core_strauss(Window::unit(2, false), 200.0, 0.05, 0.5, 0.08).unwrap();
        let mut sim = Simulator::new(&hc, PointConfig::new(2), replica_stream(2, 0)).unwrap();
        for i in 1..=50 {
            sim.advance_to(i as f64 * 0.1, None).unwrap();
            assert!(hc.unnormalized_density(&sim.state().config) > 0.0);
            assert!(sim.state().config.min_pair_distance(hc.window()) > 0.05);
        }
    }

    #[test]
    fn coupling_bookkeeping() {
        let m = Model::strauss(unit(), 40.0, 0.3, 0.1).unwrap();
        let xi = PointConfig::from_points(2, &[[0.1, 0.1], [0.5, 0.5], [0.52, 0.5]]).unwrap();
        let eta = PointConfig::from_points(2, &[[0.1, 0.1], [0.9, 0.2]]).unwrap();
        for seed in 0..30 {
            let r = couple(&m, &xi, &eta, seed, 10_000).unwrap();
            assert_eq!(r.initial_symdiff, 3);
            assert_eq!(r.final_symdiff + r.good_deaths, r.initial_symdiff + r.bad_births);
            assert!(r.coupled());
        }
        // poisson: never a bad birth
        let p = Model::poisson(unit(), 10.0).unwrap();
        for seed in 0..30 {
            let r = couple(&p, &xi, &eta, seed, 10_000).unwrap();
            assert_eq!(r.bad_births, 0);
        }
        let r = couple(&m, &xi, &eta, 1, 1).unwrap();
        assert!(r.jumps <= 1);
    }

    #[test]
    fn poisson_one_point_coupling_time_is_exponential() {
        let p = Model::poisson(unit(), 10.0).unwrap();
        let xi = PointConfig::from_points(2, &[[0.3, 0.3]]).unwrap();
        let eta = xi.with_point(&[0.6, 0.6]);
        let s = mean_coupling_time(&p, &xi, &eta, 20_000, 9).unwrap();
        assert!((s.mean - 1.0).abs() < 4.0 * s.stderr, "{s:?}");
        assert_eq!(s.timeout_fraction, 0.0);
    }

    #[test]
    fn dump_and_replay() {
        let m = Model::strauss(unit(), 20.0, 0.5, 0.1).unwrap();
        let xi = PointConfig::new(2);
        let eta = PointConfig::from_points(2, &[[0.5, 0.5]]).unwrap();
        let mut buf = Vec::new();
        let r = couple_replica(&m, &xi, &eta, 4, 0, 10_000, Some(&mut buf)).unwrap();
        let lines: Vec<JumpRecord> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len() as u64, r.jumps);
        assert_eq!(lines.last().unwrap().t, r.tau.unwrap());
        let again = couple_replica(&m, &xi, &eta, 4, 0, 10_000, None).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn non_locally_stable_model_runs_with_state_bound() {
        let b = Model::bi_scale_strauss(unit(), 20.0, 0.01, 0.02, 1.04, 0.04).unwrap();
        let s = simulate(&b, &PointConfig::new(2), 5.0, 1).unwrap();
        assert!(s.config.len() > 0);
        assert!(s.warning.is_none());
    }
}
