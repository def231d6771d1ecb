//! Stein factor `c_1(λ)`: the constants `(eps, c, n*)`, the series bound on
//! the expected coupling time `e_1`, and a Monte Carlo oracle for the
//! dominating birth-death chain.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::models::{sup_weighted_integral, Kernel, Model, ModelKind};
use crate::rng::{exponential, replica_stream, uniform};
use crate::scalar::Real;

/// Series terms evaluated at most.
pub const MAX_TERMS: usize = 10_000;

/// Level at which the oracle chain is declared explosive.
pub const LEVEL_CAP: u64 = 1_000_000;

/// Relative stability required of grid suprema over `y`.
const SUP_REL: f64 = 1e-4;

/// Threshold level `n*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NStar {
    Finite(u64),
    Infinite,
}

impl fmt::Display for NStar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NStar::Finite(n) => write!(f, "{n}"),
            NStar::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for NStar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NStar::Finite(n) => s.serialize_u64(*n),
            NStar::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NStar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(0) => Err(serde::de::Error::custom("n* must be positive")),
            Raw::N(n) => Ok(NStar::Finite(n)),
            Raw::S(s) if s == "inf" || s == "infinity" => Ok(NStar::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad n*: {s}"))),
        }
    }
}

/// How `n*` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `n* = ceil(c / eps)`.
    #[default]
    Optimal,
    /// `n* = inf` when `eps < 1`, ignoring `c`.
    EpsOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct SteinParams<T> {
    pub eps: T,
    pub c: T,
    pub nstar: NStar,
    pub c1: T,
    pub truncation_error: T,
}

fn stein_tol<T: Real>(m: &Model<T>) -> T {
    (m.beta_integral().abs() * T::lit(1e-10)).max(T::lit(1e-13))
}

/// `eps`, the sup over `y` of the `L^1` change of `λ` caused by one extra point `y`.
///
/// Poisson: 0. Inhibitory PIP: `sup_y ∫ beta (1 - phi(x, y)) dx`. Hard-core or
/// `A_k`-restricted PIP: `M sup_y (∫_{d > delta} beta |phi - 1| + ∫_{d <= delta} beta)`.
pub fn stein_eps<T: Real>(h: &Model<T>) -> Result<T> {
    let w = h.window();
    let tol = stein_tol(h);
    let rel = T::lit(SUP_REL);
    match h.kind() {
        ModelKind::Poisson { .. } => Ok(T::zero()),
        ModelKind::AreaInteraction(_) => Err(Error::param(
            "no closed form of eps for the area-interaction model; compare against its hard-core limit",
        )),
        ModelKind::Pip(p) if p.phi.is_inhibitory() => sup_weighted_integral(w, &p.beta, &Kernel::deficit(&p.phi), tol, rel),
        ModelKind::Pip(p) => match (p.phi.hard_core(), h.envelope_const()) {
            (Some(delta), Ok(m)) => {
                let k = Kernel::outside_deviation(&p.phi, delta);
                Ok(m * sup_weighted_integral(w, &p.beta, &k, tol, rel)?)
            }
            _ => Err(Error::Stability(format!(
                "{} is not locally stable; restrict it with restrict_to_ak before computing Stein constants",
                h.kind_name()
            ))),
        },
        ModelKind::Conditioned(c) => {
            let p = c.base.pip_params().ok_or_else(|| {
                Error::param(format!("Stein constants of a restricted {} model are not available", c.base.kind_name()))
            })?;
            if matches!(c.base.kind(), ModelKind::Poisson { .. }) {
                return Ok(T::zero());
            }
            let m = h.envelope_const()?;
            let k = Kernel::outside_deviation(&p.phi, c.delta);
            Ok(m * sup_weighted_integral(w, &p.beta, &k, tol, rel)?)
        }
    }
}

/// `c`, an `n*`-free bound on `sup ∫ |λ(x|xi) - λ(x|eta)| dx`: `M ∫ beta`.
pub fn stein_c<T: Real>(h: &Model<T>) -> Result<T> {
    match h.kind() {
        ModelKind::Poisson { .. } => Ok(T::zero()),
        ModelKind::AreaInteraction(_) => Err(Error::param("no closed form of c for the area-interaction model")),
        ModelKind::Conditioned(c) if matches!(c.base.kind(), ModelKind::Poisson { .. }) => Ok(T::zero()),
        ModelKind::Conditioned(c) if c.base.pip_params().is_none() => Err(Error::param(format!(
            "Stein constants of a restricted {} model are not available",
            c.base.kind_name()
        ))),
        _ => {
            let m = h.envelope_const().map_err(|_| {
                Error::Stability(format!(
                    "{} is not locally stable; restrict it with restrict_to_ak before computing Stein constants",
                    h.kind_name()
                ))
            })?;
            Ok(m * h.beta_integral())
        }
    }
}

/// `n* = ceil(c / eps)` (at least 1), or infinity in the `eps`-only regime with `eps < 1`.
pub fn choose_nstar<T: Real>(eps: T, c: T, regime: Regime) -> NStar {
    if eps == T::zero() {
        return NStar::Finite(1);
    }
    if regime == Regime::EpsOnly && eps < T::one() {
        return NStar::Infinite;
    }
    let q = (c / eps).ceil();
    let n = q.to_u64().unwrap_or(u64::MAX).max(1);
    NStar::Finite(n)
}

fn log_sum_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Evaluates the bound `e_1` on the expected coupling time of two chains
/// started one point apart.
///
/// `e_1 = eps^{n*-1} Σ_{i>=0} c^i / Π_{k=0}^{i} (n*+k) (1 + c/(n*+i))
///        + (1+eps)/eps Σ_{j=1}^{n*-1} eps^j / j`,
/// with the infinite-`n*` limit `(1+eps)/eps ln(1/(1-eps))` and `e_1 = 1`
/// at `eps = 0`. The first series stops when a term drops below
/// `tol` times the partial sum; the remaining tail is bounded geometrically.
pub fn c1_upper<T: Real>(eps: T, c: T, nstar: NStar, tol: T) -> Result<SteinParams<T>> {
    if !(eps >= T::zero()) || !(c >= T::zero()) || !eps.is_finite() || !c.is_finite() {
        return Err(Error::param(format!("eps and c must be finite and non-negative (eps = {eps}, c = {c})")));
    }
    if !(tol > T::zero()) {
        return Err(Error::param("tolerance must be positive"));
    }
    let done = |c1: T, err: T| {
        Ok(SteinParams {
            eps,
            c,
            nstar,
            c1,
            truncation_error: err,
        })
    };
    if eps == T::zero() {
        return done(T::one(), T::zero());
    }
    let ns = match nstar {
        NStar::Infinite => {
            if eps >= T::one() {
                return Err(Error::Divergence(format!("n* = inf needs eps < 1 (eps = {eps})")));
            }
            let v = (T::one() + eps) / eps * -(-eps).ln_1p();
            return done(v, T::zero());
        }
        NStar::Finite(0) => return Err(Error::param("n* must be positive")),
        NStar::Finite(n) => n,
    };
    let nsf = T::lit(ns as f64);
    // first series in log space: ln a_i = i ln c - Σ_{k<=i} ln(n*+k)
    let ln_c = c.ln();
    let mut ln_a = -nsf.ln();
    let mut ln_sum = ln_a + (c / nsf).ln_1p();
    let mut err = T::zero();
    let mut converged = c == T::zero();
    for i in 1..MAX_TERMS {
        if converged {
            break;
        }
        let denom = nsf + T::from_usize_lossy(i);
        ln_a = ln_a + ln_c - denom.ln();
        let ln_term = ln_a + (c / denom).ln_1p();
        ln_sum = log_sum_exp(ln_sum, ln_term);
        // ratio of the next a's: c / (n* + i + 1), decreasing in i
        let q = c / (denom + T::one());
        if q < T::one() && ln_term - ln_sum < tol.ln() {
            let next = ln_a + ln_c - (denom + T::one()).ln() + (c / (denom + T::one())).ln_1p();
            err = (next - (T::one() - q).ln()).exp();
            converged = true;
        }
    }
    if !converged {
        return Err(Error::TooLarge(format!(
            "series for c = {c}, n* = {ns} did not settle within {MAX_TERMS} terms"
        )));
    }
    let ln_eps = eps.ln();
    let ln_w = (nsf - T::one()) * ln_eps;
    let ln_first = ln_w + ln_sum;
    let mut ln_second = T::neg_infinity();
    let mut j = 1u64;
    while j < ns {
        let jf = T::lit(j as f64);
        ln_second = log_sum_exp(ln_second, jf * ln_eps - jf.ln());
        // remaining terms are negligible once they fall below the sum by 1e-17 for eps < 1
        if eps < T::one() && jf * ln_eps - ln_second < T::lit(-40.0) {
            break;
        }
        j += 1;
    }
    let ln_second = ln_second + ((T::one() + eps) / eps).ln();
    let c1 = log_sum_exp(ln_first, ln_second).exp();
    done(c1, err * (ln_w).exp())
}

/// Stein constants of `h` with `n*` chosen by `regime`.
pub fn stein_params<T: Real>(h: &Model<T>, regime: Regime) -> Result<SteinParams<T>> {
    let eps = stein_eps(h)?;
    let c = if eps == T::zero() { T::zero() } else { stein_c(h)? };
    let nstar = choose_nstar(eps, c, regime);
    c1_upper(eps, c, nstar, T::lit(1e-12))
}

/// Sample mean and standard error of a replicated quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanEstimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }
}

/// Absorption time at 0 of the dominating chain started at level 1.
fn oracle_run(eps: f64, c: f64, nstar: NStar, seed: u64, replica: u64) -> Result<f64> {
    let mut rng = replica_stream(seed, replica);
    let mut n: u64 = 1;
    let mut t = 0.0;
    while n > 0 {
        t += exponential(&mut rng, n as f64);
        let below = match nstar {
            NStar::Finite(s) => n < s,
            NStar::Infinite => true,
        };
        let p = if below { 1.0 / (1.0 + eps) } else { 1.0 / (1.0 + c / n as f64) };
        if uniform(&mut rng) < p {
            n -= 1;
        } else {
            n += 1;
            if n >= LEVEL_CAP {
                return Err(Error::Explosion { level: n });
            }
        }
    }
    Ok(t)
}

/// Monte Carlo estimate of `e_1` for the chain with holding rate `n` at
/// level `n` and down-step probability `1/(1+eps)` below `n*`, `1/(1+c/n)`
/// from `n*` on. `eps = 0` is read as `c = 0`.
pub fn e1_mc_oracle(eps: f64, c: f64, nstar: NStar, reps: usize, seed: u64) -> Result<MeanEstimate> {
    if reps == 0 {
        return Err(Error::param("reps must be positive"));
    }
    let c = if eps == 0.0 { 0.0 } else { c };
    let xs: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| oracle_run(eps, c, nstar, seed, r))
        .collect::<Result<_>>()?;
    Ok(MeanEstimate::from_samples(&xs))
}
