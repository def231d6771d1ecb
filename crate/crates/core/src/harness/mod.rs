//! Scenario files, the bound-versus-simulation checks and the reports
//! written by the command-line tool.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    tv_bound_area_vs_hardcore, tv_bound_general_pip, tv_bound_hardcore_pip, tv_bound_inhibitory_pip,
    tv_bound_lennard_jones, tv_bound_main, tv_lower_area, BoundReport, Intensity, IntensityMode, Moments, SweepRow,
    TheoremId,
};
use crate::discretize::{build_grid_partition, d2_bound_discrete, lattice_points, randomize_replica, sample_lattice_analogue};
use crate::error::{Error, Result, ResultExt};
use crate::geometry::PointConfig;
use crate::models::{Model, ModelKind, ModelSpec};
use crate::rng::derive_seed;
use crate::sbdp::{add_uniform_point, mean_coupling_time_with, sample_equilibrium_chains, simulate_replica, CouplingSummary, DEFAULT_MAX_JUMPS};
use crate::stein::{c1_upper, choose_nstar, stein_c, stein_eps, MeanEstimate, Regime, SteinParams};

mod empirical;

pub use empirical::{
    d2_lower_from_samples, empirical_tv_lower, gnz_residual, gnz_residual_from_samples, interaction_radii,
    tv_lower_from_samples, GnzFunction, GnzResidual, LowerEstimate, StatFamily,
};

/// Burn-in used when none is given.
pub const DEFAULT_BURN_IN: f64 = 10.0;

/// Uniform draws tried for an admissible extra point of a coupling start.
const START_ATTEMPTS: usize = 10_000;

const TAG_XI: u64 = 1;
const TAG_H: u64 = 2;
const TAG_GNZ: u64 = 3;
const TAG_COUPLE: u64 = 4;
const TAG_LATTICE: u64 = 5;
const TAG_RANDOMIZE: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Bound,
    Couple,
    Verify,
    Discretize,
    Simulate,
}

/// Monte Carlo settings shared by every task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub reps: usize,
    pub burn_in: f64,
    pub spacing: f64,
    pub seed: u64,
    /// Relative truncation tolerance of the Stein series in the coupling check.
    pub tol: f64,
    /// Independent chains per sample set; one chain per sample when absent.
    pub chains: Option<usize>,
    pub intensity: IntensityMode,
    /// Replicas of the coupling-time check; 0 skips it, absent means `min(reps, 1000)`.
    pub coupling_reps: Option<usize>,
    /// Uniform integration points per sample on the right side of the GNZ check.
    pub gnz_points: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            reps: 2000,
            burn_in: DEFAULT_BURN_IN,
            spacing: 1.0,
            seed: 1,
            tol: 1e-12,
            chains: None,
            intensity: IntensityMode::Envelope,
            coupling_reps: None,
            gnz_points: 16,
        }
    }
}

impl McSettings {
    fn chains(&self) -> usize {
        self.chains.unwrap_or(self.reps).clamp(1, self.reps.max(1))
    }
}

/// Source of the moments `E|Ξ| C^{k|Ξ|}` in the general pairwise bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MomentChoice {
    #[default]
    Samples,
    Ruelle {
        cstar_star: f64,
    },
    Given {
        xi: f64,
        h: f64,
    },
}

/// Which bound a scenario evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum BoundChoice {
    /// The first of inhibitory, hard-core, area-vs-hard-core and the general
    /// conditional-intensity bound that applies.
    #[default]
    Auto,
    Main,
    InhibitoryPip,
    HardCorePip,
    GeneralPip {
        k: usize,
        delta: f64,
        #[serde(default)]
        moments: MomentChoice,
    },
    LennardJones {
        k: usize,
        delta: f64,
    },
    AreaVsHardCore {
        /// Erosion radius of the lower bound; `R` when absent.
        #[serde(default)]
        r0: Option<f64>,
    },
    Discretization {
        n_per_dim: usize,
        #[serde(default)]
        lipschitz: Option<f64>,
    },
}

impl BoundChoice {
    fn with_params(self, p: &BTreeMap<String, f64>) -> Result<Self> {
        let int = |name: &str, v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::param(format!("sweep value {name} = {v} is not a non-negative integer")))
            }
        };
        let mut out = self;
        for (name, &v) in p {
            match (&mut out, name.as_str()) {
                (BoundChoice::GeneralPip { k, .. } | BoundChoice::LennardJones { k, .. }, "k") => *k = int(name, v)?,
                (BoundChoice::GeneralPip { delta, .. } | BoundChoice::LennardJones { delta, .. }, "delta") => *delta = v,
                (BoundChoice::Discretization { n_per_dim, .. }, "n_per_dim") => *n_per_dim = int(name, v)?,
                (BoundChoice::Discretization { lipschitz, .. }, "lipschitz") => *lipschitz = Some(v),
                _ => return Err(Error::param(format!("sweep parameter {name} does not apply to {self:?}"))),
            }
        }
        Ok(out)
    }
}

/// A scenario file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub model_xi: ModelSpec<f64>,
    pub model_h: ModelSpec<f64>,
    pub task: Task,
    #[serde(default)]
    pub bound: BoundChoice,
    #[serde(default)]
    pub mc: McSettings,
    /// Named parameter grid; every combination is evaluated and the smallest bound kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatFamily<f64>>,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::from).context(format!("reading {}", path.display()))?;
        Scenario::from_json(&text).context(format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc.reps == 0 {
            return Err(Error::param("mc.reps must be at least 1"));
        }
        if !(self.mc.burn_in >= 0.0) || !(self.mc.spacing > 0.0) || !(self.mc.tol > 0.0) {
            return Err(Error::param("mc.burn_in must be >= 0, mc.spacing and mc.tol > 0"));
        }
        if let Some(grid) = &self.sweep {
            if grid.values().any(|v| v.is_empty()) {
                return Err(Error::param("sweep lists must be non-empty"));
            }
        }
        Ok(())
    }

    pub fn models(&self) -> Result<(Model<f64>, Model<f64>)> {
        let xi = self.model_xi.build().context("model_xi")?;
        let h = self.model_h.build().context("model_h")?;
        Ok((xi, h))
    }

    fn grid(&self) -> Vec<BTreeMap<String, f64>> {
        let mut out = vec![BTreeMap::new()];
        for (name, values) in self.sweep.iter().flatten() {
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

fn equilibrium(m: &Model<f64>, mc: &McSettings, tag: u64) -> Result<Vec<PointConfig<f64>>> {
    let s = sample_equilibrium_chains(m, mc.burn_in, mc.reps, mc.spacing, derive_seed(mc.seed, tag), mc.chains())?;
    Ok(s.configs)
}

/// Draws of the randomized lattice analogue of `m` on an `n`-per-axis grid.
fn lattice_samples(m: &Model<f64>, n: usize, mc: &McSettings) -> Result<(Vec<Vec<u32>>, Vec<PointConfig<f64>>)> {
    let p = build_grid_partition(m.window(), n)?;
    let seed = derive_seed(derive_seed(mc.seed, TAG_LATTICE), n as u64);
    let lat = sample_lattice_analogue(m, &p, mc.burn_in, mc.reps, mc.spacing, seed, mc.chains())?;
    let rseed = derive_seed(seed, TAG_RANDOMIZE);
    let rand = lat
        .iter()
        .enumerate()
        .map(|(i, c)| randomize_replica(&p, c, rseed, i as u64))
        .collect::<Result<_>>()?;
    Ok((lat, rand))
}

fn hard_core_target(h: &Model<f64>) -> Option<(f64, f64)> {
    let p = h.pip_params()?;
    let beta = p.beta.constant()?;
    match p.phi {
        crate::models::Interaction::Strauss { gamma, radius } if gamma == 0.0 => Some((beta, radius)),
        crate::models::Interaction::HardCoreStrauss {
            hard_core,
            gamma,
            radius,
        } if gamma == 0.0 || hard_core == radius => Some((beta, hard_core)),
        _ => None,
    }
}

/// Evaluates one bound; `samples` caches equilibrium draws of `Ξ` (or its
/// restriction) by key.
fn evaluate(
    xi: &Model<f64>,
    h: &Model<f64>,
    choice: BoundChoice,
    mc: &McSettings,
    cache: &mut BTreeMap<String, Vec<PointConfig<f64>>>,
) -> Result<BoundReport> {
    let mc_mode = mc.intensity == IntensityMode::MonteCarlo;
    let mut draw = |m: &Model<f64>, key: String, tag: u64| -> Result<Vec<PointConfig<f64>>> {
        if let Some(s) = cache.get(&key) {
            return Ok(s.clone());
        }
        let s = equilibrium(m, mc, tag)?;
        cache.insert(key, s.clone());
        Ok(s)
    };
    match choice {
        BoundChoice::Auto => {
            let mut last = None;
            for c in [
                BoundChoice::InhibitoryPip,
                BoundChoice::HardCorePip,
                BoundChoice::AreaVsHardCore { r0: None },
                BoundChoice::Main,
            ] {
                match evaluate(xi, h, c, mc, cache) {
                    Ok(mut r) => {
                        r.notes.push(format!("selected automatically: {:?}", r.theorem_id));
                        return Ok(r);
                    }
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("candidate list is non-empty").context("no bound applies to this pair"))
        }
        BoundChoice::Main => {
            let s = if mc_mode { Some(draw(xi, "xi".into(), TAG_XI)?) } else { None };
            tv_bound_main(xi, h, s.as_deref(), derive_seed(mc.seed, TAG_XI))
        }
        BoundChoice::InhibitoryPip | BoundChoice::HardCorePip => {
            let s = if mc_mode { Some(draw(xi, "xi".into(), TAG_XI)?) } else { None };
            let intensity = s.as_deref().map_or(Intensity::Envelope, Intensity::Samples);
            if choice == BoundChoice::InhibitoryPip {
                tv_bound_inhibitory_pip(xi, h, intensity)
            } else {
                tv_bound_hardcore_pip(xi, h, intensity)
            }
        }
        BoundChoice::GeneralPip { k, delta, moments } => {
            let s = if mc_mode {
                let r = xi.restrict_to_ak(k, delta)?;
                Some(draw(&r, format!("xi_ak_{k}_{delta:e}"), derive_seed(TAG_XI, k as u64 ^ delta.to_bits()))?)
            } else {
                None
            };
            let (mx, mh);
            let mom = match moments {
                MomentChoice::Samples => {
                    mx = draw(xi, "xi".into(), TAG_XI)?;
                    mh = draw(h, "h".into(), TAG_H)?;
                    Moments::Samples { xi: &mx, h: &mh }
                }
                MomentChoice::Ruelle { cstar_star } => Moments::Ruelle { cstar_star },
                MomentChoice::Given { xi, h } => Moments::Given { xi, h },
            };
            let intensity = s.as_deref().map_or(Intensity::Envelope, Intensity::Samples);
            tv_bound_general_pip(xi, h, k, delta, intensity, mom)
        }
        BoundChoice::LennardJones { k, delta } => {
            let s = if mc_mode {
                let r = xi.restrict_to_ak(k, delta)?;
                Some(draw(&r, format!("xi_ak_{k}_{delta:e}"), derive_seed(TAG_XI, k as u64 ^ delta.to_bits()))?)
            } else {
                None
            };
            let intensity = s.as_deref().map_or(Intensity::Envelope, Intensity::Samples);
            tv_bound_lennard_jones(xi, h, k, delta, intensity)
        }
        BoundChoice::AreaVsHardCore { r0 } => {
            let a = match xi.kind() {
                ModelKind::AreaInteraction(a) => *a,
                _ => return Err(Error::param("the area bound needs an area-interaction process as model_xi")),
            };
            let (beta0, r) = hard_core_target(h)
                .ok_or_else(|| Error::param("the area bound needs a hard-core process with constant activity as model_h"))?;
            if (r - a.big_r).abs() > 1e-12 * r {
                return Err(Error::param("hard-core distance must equal the interaction range R"));
            }
            let mean = if mc_mode {
                let counts: Vec<f64> = draw(xi, "xi".into(), TAG_XI)?.iter().map(|c| c.len() as f64).collect();
                let e = MeanEstimate::from_samples(&counts);
                Some(e.mean + 3.0 * e.stderr)
            } else {
                None
            };
            let mut rep = tv_bound_area_vs_hardcore(xi.window(), a.beta, a.gamma, a.big_r, beta0, mean)?;
            let r0 = r0.unwrap_or(a.big_r);
            match tv_lower_area(xi.window(), beta0, a.gamma, a.big_r, r0) {
                Ok(l) => rep.set("lower_bound", l),
                Err(e) => rep.notes.push(format!("lower bound unavailable: {e}")),
            }
            Ok(rep)
        }
        BoundChoice::Discretization { n_per_dim, lipschitz } => {
            let p = build_grid_partition(xi.window(), n_per_dim)?;
            if mc_mode {
                let (_, rand) = lattice_samples(xi, n_per_dim, mc)?;
                d2_bound_discrete(xi, &p, Intensity::Samples(&rand), lipschitz)
            } else {
                d2_bound_discrete(xi, &p, Intensity::Envelope, lipschitz)
            }
        }
    }
}

/// The designated bound over the sweep grid; the smallest bound and every row.
pub fn run_bound(s: &Scenario) -> Result<(BoundReport, Vec<SweepRow>)> {
    let (xi, h) = s.models()?;
    bound_sweep(s, &xi, &h)
}

fn bound_sweep(s: &Scenario, xi: &Model<f64>, h: &Model<f64>) -> Result<(BoundReport, Vec<SweepRow>)> {
    let mut cache = BTreeMap::new();
    let mut rows = Vec::new();
    let mut first_err = None;
    for params in s.grid() {
        let choice = s.bound.with_params(&params)?;
        match evaluate(xi, h, choice, &s.mc, &mut cache) {
            Ok(report) => rows.push(SweepRow { params, report }),
            Err(e) => {
                let ctx = if params.is_empty() {
                    "bound".to_string()
                } else {
                    format!("bound at {params:?}")
                };
                first_err.get_or_insert(e.context(ctx));
            }
        }
    }
    let best = rows.iter().min_by(|a, b| a.report.bound.total_cmp(&b.report.bound)).cloned();
    match best {
        Some(b) => {
            let mut report = b.report;
            if rows.len() > 1 {
                report.notes.push(format!("minimum over {} sweep points at {:?}", rows.len(), b.params));
            }
            Ok((report, rows))
        }
        None => Err(first_err.unwrap_or_else(|| Error::param("empty sweep grid"))),
    }
}

/// Mean coupling time of `h` against its Stein factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCheck {
    pub stein: SteinParams<f64>,
    pub summary: CouplingSummary,
    /// `mean - 3 se <= c₁`.
    pub ok: bool,
}

/// Coupling from `(ξ, ξ + δ_x)` with `ξ` the state of an SBDP run from empty
/// for the burn-in time and `x` uniform among points keeping `ξ + δ_x` admissible.
pub fn coupling_check(h: &Model<f64>, mc: &McSettings, reps: usize) -> Result<CouplingCheck> {
    let eps = stein_eps(h)?;
    let c = if eps == 0.0 { 0.0 } else { stein_c(h)? };
    let stein = c1_upper(eps, c, choose_nstar(eps, c, Regime::Optimal), mc.tol)?;
    let seed = derive_seed(mc.seed, TAG_COUPLE);
    let empty = PointConfig::new(h.window().dim());
    let summary = mean_coupling_time_with(h, reps, seed, DEFAULT_MAX_JUMPS, |rng, r| {
        let xi = simulate_replica(h, &empty, mc.burn_in, derive_seed(seed, 1), r as u64, None)?.config;
        for _ in 0..START_ATTEMPTS {
            let eta = add_uniform_point(h.window(), &xi, rng);
            if h.admissible(&eta) {
                return Ok((xi, eta));
            }
        }
        Err(Error::param(format!("no admissible extra point found in {START_ATTEMPTS} draws")))
    })?;
    let ok = summary.mean - 3.0 * summary.stderr <= stein.c1;
    Ok(CouplingCheck { stein, summary, ok })
}

/// Lower bound, empirical range and upper bound for the area scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub empirical_lower: f64,
    pub empirical_se: f64,
    pub upper: f64,
    /// `lower <= upper`.
    pub ordered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub name: String,
    pub theoretical: BoundReport,
    pub empirical_lower: f64,
    pub empirical_se: f64,
    pub empirical_statistic: String,
    pub family_size: usize,
    /// `empirical_lower - 3 empirical_se <= theoretical.bound`.
    pub ordering_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingCheck>,
    pub gnz_residuals: Vec<GnzResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<Sandwich>,
    pub notes: Vec<String>,
}

fn gnz_functions(m: &Model<f64>) -> Vec<GnzFunction<f64>> {
    let half = m.window().min_edge() * 0.5;
    let r = interaction_radii(m)
        .into_iter()
        .filter(|&r| r < half)
        .fold(f64::NAN, f64::max);
    let r = if r.is_finite() { r } else { m.window().min_edge() / 20.0 };
    vec![GnzFunction::One, GnzFunction::EmptyBall { r }]
}

/// Runs the designated bound, the empirical lower estimate, the coupling
/// check and the GNZ residuals of both models.
pub fn verify_bounds_report(s: &Scenario) -> Result<(VerifyReport, Vec<SweepRow>)> {
    let (xi, h) = s.models()?;
    let (theoretical, rows) = bound_sweep(s, &xi, &h)?;
    let mc = &s.mc;
    let family = s.stats.clone().unwrap_or_else(|| StatFamily::for_models(&xi, &h));
    let mut notes = Vec::new();

    let xs = equilibrium(&xi, mc, TAG_XI).context("sampling model_xi")?;
    let (est, ys, h_label) = if theoretical.theorem_id == TheoremId::Discretization {
        let n = theoretical.get("cells").map_or(1, |c| (c.powf(1.0 / xi.window().dim() as f64)).round() as usize);
        let (lat, _) = lattice_samples(&xi, n, mc).context("sampling the lattice analogue")?;
        let p = build_grid_partition(xi.window(), n)?;
        let pts: Vec<PointConfig<f64>> = lat.iter().map(|c| lattice_points(&p, c)).collect();
        notes.push(format!("d2 lower estimate against the lattice process with {n} cells per axis"));
        (d2_lower_from_samples(xi.window(), &xs, &pts, &family)?, None, "")
    } else {
        let ys = equilibrium(&h, mc, TAG_H).context("sampling model_h")?;
        (tv_lower_from_samples(xi.window(), &xs, &ys, &family)?, Some(ys), "h")
    };
    let ordering_ok = est.lower - 3.0 * est.se <= theoretical.bound;

    let reps = mc.coupling_reps.unwrap_or(mc.reps.min(1000));
    let coupling = if reps == 0 {
        None
    } else if h.envelope_const().is_err() {
        notes.push("coupling check skipped: model_h is not locally stable".into());
        None
    } else {
        match coupling_check(&h, mc, reps) {
            Ok(c) => Some(c),
            Err(Error::TooLarge(msg)) => {
                notes.push(format!("coupling check skipped: {msg}"));
                None
            }
            Err(e) => return Err(e.context("coupling check")),
        }
    };

    let mut gnz_residuals = Vec::new();
    let batches = mc.chains();
    let gseed = derive_seed(mc.seed, TAG_GNZ);
    for f in gnz_functions(&xi) {
        gnz_residuals.push(empirical::gnz_report(&xi, "xi", &f, &xs, batches, mc.gnz_points, gseed)?);
    }
    if let Some(ys) = &ys {
        for f in gnz_functions(&h) {
            gnz_residuals.push(empirical::gnz_report(&h, h_label, &f, ys, batches, mc.gnz_points, derive_seed(gseed, 1))?);
        }
    }

    let sandwich = theoretical.get("lower_bound").map(|lower| Sandwich {
        lower,
        empirical_lower: est.lower,
        empirical_se: est.se,
        upper: theoretical.bound,
        ordered: lower <= theoretical.bound,
    });

    let report = VerifyReport {
        name: s.name.clone(),
        theoretical,
        empirical_lower: est.lower,
        empirical_se: est.se,
        empirical_statistic: est.statistic,
        family_size: est.family_size,
        ordering_ok,
        coupling,
        gnz_residuals,
        sandwich,
        notes,
    };
    Ok((report, rows))
}

/// Equilibrium samples of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub model: String,
    pub n: usize,
    pub chains: usize,
    pub mean_count: f64,
    pub count_se: f64,
    pub warnings: Vec<String>,
    pub configs: Vec<PointConfig<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub xi: SampleSummary,
    pub h: SampleSummary,
}

/// Equilibrium samples of both models; the first burn-in of `model_xi` is
/// written to `trajectory` as JSON lines.
pub fn run_simulate(s: &Scenario, trajectory: Option<&mut dyn Write>) -> Result<SimulateReport> {
    let (xi, h) = s.models()?;
    let mc = &s.mc;
    if let Some(sink) = trajectory {
        let empty = PointConfig::new(xi.window().dim());
        simulate_replica(&xi, &empty, mc.burn_in, derive_seed(mc.seed, TAG_XI), 0, Some(sink))?;
    }
    let summary = |m: &Model<f64>, label: &str, tag: u64| -> Result<SampleSummary> {
        let e = sample_equilibrium_chains(m, mc.burn_in, mc.reps, mc.spacing, derive_seed(mc.seed, tag), mc.chains())?;
        let est = MeanEstimate::from_samples(&e.counts());
        Ok(SampleSummary {
            model: label.to_string(),
            n: e.configs.len(),
            chains: e.chains,
            mean_count: est.mean,
            count_se: est.stderr,
            warnings: e.warnings,
            configs: e.configs,
        })
    };
    Ok(SimulateReport {
        xi: summary(&xi, "xi", TAG_XI)?,
        h: summary(&h, "h", TAG_H)?,
    })
}

/// The discretization bound at one grid size together with its empirical check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct D2Check {
    pub n_per_dim: usize,
    pub r_v: f64,
    pub bound: f64,
    pub empirical_lower: f64,
    pub empirical_se: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizeReport {
    pub best: BoundReport,
    pub checks: Vec<D2Check>,
}

/// The discretization bound of `model_xi` for every grid size of the sweep,
/// each checked against a `d₂` lower estimate.
pub fn run_discretize(s: &Scenario) -> Result<(DiscretizeReport, Vec<SweepRow>)> {
    if !matches!(s.bound, BoundChoice::Discretization { .. }) {
        return Err(Error::param("the discretize task needs bound.theorem = discretization"));
    }
    let (xi, h) = s.models()?;
    let (best, rows) = bound_sweep(s, &xi, &h)?;
    let mc = &s.mc;
    let family = s.stats.clone().unwrap_or_else(|| StatFamily::for_models(&xi, &xi));
    let xs = equilibrium(&xi, mc, TAG_XI)?;
    let mut checks = Vec::new();
    for row in &rows {
        let n = match s.bound.with_params(&row.params)? {
            BoundChoice::Discretization { n_per_dim, .. } => n_per_dim,
            _ => unreachable!(),
        };
        let p = build_grid_partition(xi.window(), n)?;
        let (lat, _) = lattice_samples(&xi, n, mc)?;
        let pts: Vec<PointConfig<f64>> = lat.iter().map(|c| lattice_points(&p, c)).collect();
        let est = d2_lower_from_samples(xi.window(), &xs, &pts, &family)?;
        checks.push(D2Check {
            n_per_dim: n,
            r_v: p.r_v,
            bound: row.report.bound,
            empirical_lower: est.lower,
            empirical_se: est.se,
            ok: est.lower - 3.0 * est.se <= row.report.bound,
        });
    }
    Ok((DiscretizeReport { best, checks }, rows))
}

/// The result of running a scenario.
#[derive(Clone, Debug)]
pub enum Outcome {
    Bound(BoundReport, Vec<SweepRow>),
    Simulate(SimulateReport),
    Couple(CouplingCheck),
    Discretize(DiscretizeReport, Vec<SweepRow>),
    Verify(VerifyReport, Vec<SweepRow>),
}

impl Outcome {
    pub fn report_json(&self) -> Result<String> {
        let mut s = match self {
            Outcome::Bound(r, _) => serde_json::to_string_pretty(r)?,
            Outcome::Simulate(r) => serde_json::to_string_pretty(r)?,
            Outcome::Couple(r) => serde_json::to_string_pretty(r)?,
            Outcome::Discretize(r, _) => serde_json::to_string_pretty(r)?,
            Outcome::Verify(r, _) => serde_json::to_string_pretty(r)?,
        };
        s.push('\n');
        Ok(s)
    }

    pub fn sweep_rows(&self) -> &[SweepRow] {
        match self {
            Outcome::Bound(_, r) | Outcome::Discretize(_, r) | Outcome::Verify(_, r) => r,
            _ => &[],
        }
    }

    /// The headline bound exceeds 1.
    pub fn vacuous(&self) -> bool {
        match self {
            Outcome::Bound(r, _) => r.vacuous,
            Outcome::Discretize(r, _) => r.best.vacuous,
            Outcome::Verify(r, _) => r.theoretical.vacuous,
            _ => false,
        }
    }

    /// A failed soundness check, if any.
    pub fn failure(&self) -> Option<String> {
        match self {
            Outcome::Verify(r, _) if !r.ordering_ok => Some(format!(
                "empirical lower estimate {} - 3 x {} exceeds the bound {}",
                r.empirical_lower, r.empirical_se, r.theoretical.bound
            )),
            Outcome::Couple(c) if !c.ok => Some(format!(
                "mean coupling time {} - 3 x {} exceeds c1 = {}",
                c.summary.mean, c.summary.stderr, c.stein.c1
            )),
            Outcome::Discretize(r, _) => r
                .checks
                .iter()
                .find(|c| !c.ok)
                .map(|c| format!("d2 lower estimate exceeds the bound at n_per_dim = {}", c.n_per_dim)),
            _ => None,
        }
    }
}

/// Runs the scenario's task.
pub fn run(s: &Scenario, trajectory: Option<&mut dyn Write>) -> Result<Outcome> {
    s.validate()?;
    Ok(match s.task {
        Task::Bound => {
            let (b, rows) = run_bound(s)?;
            Outcome::Bound(b, rows)
        }
        Task::Simulate => Outcome::Simulate(run_simulate(s, trajectory)?),
        Task::Couple => {
            let (_, h) = s.models()?;
            let reps = s.mc.coupling_reps.unwrap_or(s.mc.reps);
            if reps == 0 {
                return Err(Error::param("the couple task needs at least one replica"));
            }
            Outcome::Couple(coupling_check(&h, &s.mc, reps)?)
        }
        Task::Discretize => {
            let (r, rows) = run_discretize(s)?;
            Outcome::Discretize(r, rows)
        }
        Task::Verify => {
            let (r, rows) = verify_bounds_report(s)?;
            Outcome::Verify(r, rows)
        }
    })
}

#[cfg(test)]
mod tests;
