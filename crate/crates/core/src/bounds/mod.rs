//! Total variation bounds between pairs of Gibbs processes.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};
use crate::models::{Activity, Interaction, Model, ModelKind};
use crate::scalar::Real;
use crate::stein::{MeanEstimate, SteinParams};

mod area;
mod lj;
mod pip;

pub use area::{interaction_integral, interaction_integral_closed, lens_volume, tv_bound_area_vs_hardcore, tv_lower_area};
pub use lj::{lj_l, lj_tail, tv_bound_lennard_jones};
pub use pip::{
    moment_bound_ruelle, tv_bound_general_pip, tv_bound_general_pip_sweep, tv_bound_hardcore_pip,
    tv_bound_inhibitory_pip, tv_bound_main, Moments,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Main,
    InhibitoryPip,
    GeneralPip,
    HardCorePip,
    LennardJones,
    AreaVsHardCore,
    Discretization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityMode {
    Envelope,
    MonteCarlo,
}

/// How the intensity `ν` of the first process enters a double integral.
#[derive(Clone, Copy, Debug)]
pub enum Intensity<'a, T> {
    /// `ν <= envelope`, deterministic.
    Envelope,
    /// Sample average over equilibrium configurations of the first process.
    Samples(&'a [PointConfig<T>]),
}

impl<T> Intensity<'_, T> {
    pub fn mode(&self) -> IntensityMode {
        match self {
            Intensity::Envelope => IntensityMode::Envelope,
            Intensity::Samples(_) => IntensityMode::MonteCarlo,
        }
    }
}

/// A theorem-level bound together with every constant that went into it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    pub bound: f64,
    pub stein: Option<SteinParams<f64>>,
    pub intermediates: BTreeMap<String, f64>,
    pub intensity_mode: IntensityMode,
    /// `bound > 1`; the value is kept as computed.
    pub vacuous: bool,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(theorem_id: TheoremId, intensity_mode: IntensityMode) -> Self {
        BoundReport {
            theorem_id,
            bound: 0.0,
            stein: None,
            intermediates: BTreeMap::new(),
            intensity_mode,
            vacuous: false,
            notes: Vec::new(),
        }
    }

    pub fn set(&mut self, name: &str, v: impl Into<f64>) {
        self.intermediates.insert(name.to_string(), v.into());
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.intermediates.get(name).copied()
    }

    pub fn with_stein<T: Real>(&mut self, s: &SteinParams<T>) {
        self.stein = Some(SteinParams {
            eps: s.eps.as_f64(),
            c: s.c.as_f64(),
            nstar: s.nstar,
            c1: s.c1.as_f64(),
            truncation_error: s.truncation_error.as_f64(),
        });
    }

    pub(crate) fn finish(mut self, bound: f64) -> Result<Self> {
        if !(bound >= 0.0) {
            return Err(Error::param(format!("bound evaluated to {bound}")));
        }
        self.bound = bound;
        self.vacuous = bound > 1.0;
        Ok(self)
    }
}

/// One point of a parameter sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub params: BTreeMap<String, f64>,
    pub report: BoundReport,
}

/// Writes one CSV row per sweep point: the parameters, the bound, the Stein
/// constants and the union of all intermediate names.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let params: BTreeSet<&str> = rows.iter().flat_map(|r| r.params.keys().map(String::as_str)).collect();
    let inter: BTreeSet<&str> = rows
        .iter()
        .flat_map(|r| r.report.intermediates.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = params.iter().map(|s| s.to_string()).collect();
    header.extend(["theorem_id", "bound", "vacuous", "intensity_mode", "eps", "c", "nstar", "c1"].map(String::from));
    header.extend(inter.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        let mut rec: Vec<String> = params.iter().map(|p| num(r.params.get(*p).copied())).collect();
        let id = serde_json::to_value(r.report.theorem_id)?;
        let mode = serde_json::to_value(r.report.intensity_mode)?;
        rec.push(id.as_str().unwrap_or_default().to_string());
        rec.push(num(Some(r.report.bound)));
        rec.push(r.report.vacuous.to_string());
        rec.push(mode.as_str().unwrap_or_default().to_string());
        match &r.report.stein {
            Some(s) => {
                rec.push(num(Some(s.eps)));
                rec.push(num(Some(s.c)));
                rec.push(s.nstar.to_string());
                rec.push(num(Some(s.c1)));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        rec.extend(inter.iter().map(|k| num(r.report.get(k))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Activity and interaction of a Poisson or pairwise interaction model.
pub(crate) struct PipView<T> {
    pub beta: Activity<T>,
    pub phi: Interaction<T>,
}

pub(crate) fn pip_view<T: Real>(m: &Model<T>) -> Result<PipView<T>> {
    match m.unconditioned().kind() {
        ModelKind::Poisson { beta } => Ok(PipView {
            beta: beta.clone(),
            phi: Interaction::Constant(T::one()),
        }),
        ModelKind::Pip(p) => Ok(PipView {
            beta: p.beta.clone(),
            phi: p.phi.clone(),
        }),
        _ => Err(Error::param(format!(
            "{} is not a pairwise interaction process",
            m.kind_name()
        ))),
    }
}

pub(crate) fn same_window<T: Real>(a: &Model<T>, b: &Model<T>) -> Result<()> {
    if a.window() != b.window() {
        return Err(Error::param("the two models live on different windows"));
    }
    Ok(())
}

pub(crate) fn shared_beta<T: Real>(a: &PipView<T>, b: &PipView<T>) -> Result<Activity<T>> {
    if a.beta != b.beta {
        return Err(Error::param("the two processes must share the activity function beta"));
    }
    Ok(a.beta.clone())
}

/// Relative tolerance of nested quadratures without a translation-invariant shortcut.
const NESTED_REL_TOL: f64 = 1e-7;

/// Absolute tolerance for integrals of size about `scale`.
pub(crate) fn quad_tol<T: Real>(scale: T) -> T {
    (scale.abs() * T::lit(1e-11)).max(T::lit(1e-14))
}

/// `∬ beta(x) ν(y) k(x, y)` with `ν` from `intensity`; returns the value and
/// its Monte Carlo standard error.
pub(crate) fn pair_integral<T: Real>(
    w: &Window<T>,
    beta: &Activity<T>,
    kernel: &crate::models::Kernel<T>,
    nu_beta: &Activity<T>,
    envelope: T,
    intensity: Intensity<'_, T>,
) -> Result<(f64, f64, Option<usize>)> {
    let scale = beta.max() * nu_beta.integral(w) * envelope.max(T::one());
    let exact = w.is_torus() && beta.constant().is_some() && kernel.profile.is_some();
    let tol = if exact { quad_tol(scale) } else { scale * T::lit(NESTED_REL_TOL) };
    match intensity {
        Intensity::Envelope => {
            let v = crate::models::double_integral(w, beta, |y: &[T]| nu_beta.value(w, y) * envelope, kernel, tol)?;
            Ok((v.as_f64(), 0.0, None))
        }
        Intensity::Samples(configs) => {
            if configs.is_empty() {
                return Err(Error::param("Monte Carlo intensity needs at least one sample"));
            }
            let itol = if exact {
                quad_tol(beta.max() * w.volume())
            } else {
                beta.max() * w.volume() * T::lit(NESTED_REL_TOL)
            };
            let constant = if exact {
                Some(crate::models::weighted_integral(w, beta, &w.center(), kernel, itol)?)
            } else {
                None
            };
            let mut vals = Vec::with_capacity(configs.len());
            for c in configs {
                let s = match constant {
                    Some(v) => v * T::from_usize_lossy(c.len()),
                    None => {
                        let mut acc = T::zero();
                        for y in c.iter() {
                            acc = acc + crate::models::weighted_integral(w, beta, y, kernel, itol)?;
                        }
                        acc
                    }
                };
                vals.push(s.as_f64());
            }
            let e = MeanEstimate::from_samples(&vals);
            Ok((e.mean, e.stderr, Some(e.n)))
        }
    }
}
