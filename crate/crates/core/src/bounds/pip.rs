use std::collections::BTreeMap;

use super::{pair_integral, pip_view, quad_tol, same_window, shared_beta, BoundReport, Intensity, IntensityMode, SweepRow, TheoremId};
use crate::error::{Error, Result};
use crate::geometry::{integrate_window, PointConfig};
use crate::models::{covering_m, Interaction, Kernel, Model};
use crate::rng::{replica_stream, uniform};
use crate::scalar::{ln_factorial, Real};
use crate::stein::{stein_params, MeanEstimate, Regime};

/// Uniform points per configuration in the Monte Carlo integral over `x`.
const X_POINTS: usize = 256;

/// Source of the moments `E(|Ξ| C^{k|Ξ|})` and `E(|H| C^{k|H|})`.
#[derive(Clone, Copy, Debug)]
pub enum Moments<'a, T> {
    /// Closed-form bound from Ruelle stability with the user's `c**`.
    Ruelle { cstar_star: T },
    /// Sample means (plus three standard errors) over unconditioned equilibrium samples.
    Samples { xi: &'a [PointConfig<T>], h: &'a [PointConfig<T>] },
    Given { xi: T, h: T },
}

fn ruelle_moment<T: Real>(m: &Model<T>, c: T, k: usize, cstar_star: T) -> Result<T> {
    if !(cstar_star > T::zero()) {
        return Err(Error::param("c** must be positive"));
    }
    let r = m
        .ruelle()
        .ok_or_else(|| Error::param(format!("{} carries no Ruelle constants", m.kind_name())))?;
    let a = r.psi_star * m.window().volume();
    let ck = c.powi(k as i32);
    let ln = cstar_star.ln() + ck.ln() + a.ln() + ck * a - m.window().volume();
    let v = ln.exp();
    if !v.is_finite() {
        return Err(Error::TooLarge(format!("Ruelle moment bound overflows (log value {ln})")));
    }
    Ok(v)
}

/// `c** C^k α(ψ*) exp(C^k α(ψ*) - α(X))`, a bound on `E(|Ξ| C^{k|Ξ|})`.
pub fn moment_bound_ruelle<T: Real>(m: &Model<T>, k: usize, cstar_star: T) -> Result<T> {
    let c = match m.pip_constants() {
        Some(p) => p.c.max(T::one()),
        None if m.pip_params().is_none() && matches!(m.unconditioned().kind(), crate::models::ModelKind::Poisson { .. }) => {
            T::one()
        }
        None => return Err(Error::param(format!("{} has no pairwise constant C", m.kind_name()))),
    };
    ruelle_moment(m, c, k, cstar_star)
}

fn sample_moment<T: Real>(configs: &[PointConfig<T>], c: T, k: usize) -> Result<MeanEstimate> {
    if configs.is_empty() {
        return Err(Error::param("moment estimate needs at least one sample"));
    }
    let lc = c.as_f64().ln() * k as f64;
    let v: Vec<f64> = configs.iter().map(|x| x.len() as f64 * (lc * x.len() as f64).exp()).collect();
    Ok(MeanEstimate::from_samples(&v))
}

/// `c₁(λ) ∫ E|ν(x|Ξ) - λ(x|Ξ)| dx`.
///
/// With samples of `Ξ` the inner integral is estimated at uniform points
/// and the bound is the estimate plus three standard errors. Without samples
/// both models must be inhibitory pairwise interaction processes, and
/// `|β₁ - β₂| + β₂ Σ |φ₁ - φ₂|` majorises the integrand.
pub fn tv_bound_main<T: Real>(xi: &Model<T>, h: &Model<T>, samples: Option<&[PointConfig<T>]>, seed: u64) -> Result<BoundReport> {
    same_window(xi, h)?;
    h.envelope_const()?;
    let stein = stein_params(h, Regime::Optimal)?;
    let w = xi.window();
    let vol = w.volume();
    let mode = if samples.is_some() {
        IntensityMode::MonteCarlo
    } else {
        IntensityMode::Envelope
    };
    let mut rep = BoundReport::new(TheoremId::Main, mode);
    rep.with_stein(&stein);
    let (est, se) = match samples {
        Some(configs) => {
            if configs.is_empty() {
                return Err(Error::param("Monte Carlo mode needs at least one sample"));
            }
            let dim = w.dim();
            let vals: Vec<f64> = configs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut rng = replica_stream(seed, i as u64);
                    let mut frac = vec![T::zero(); dim];
                    let mut x = vec![T::zero(); dim];
                    let mut acc = T::zero();
                    for _ in 0..X_POINTS {
                        for f in frac.iter_mut() {
                            *f = T::lit(uniform(&mut rng));
                        }
                        w.from_unit(&frac, &mut x);
                        acc = acc + (xi.cond_intensity(&x, c) - h.cond_intensity(&x, c)).abs();
                    }
                    (acc * vol / T::from_usize_lossy(X_POINTS)).as_f64()
                })
                .collect();
            let e = MeanEstimate::from_samples(&vals);
            rep.set("samples", e.n as f64);
            rep.set("x_points", X_POINTS as f64);
            (e.mean, e.stderr)
        }
        None => {
            let (a, b) = (pip_view(xi)?, pip_view(h)?);
            if xi.conditioning().is_some() || h.conditioning().is_some() || !a.phi.is_inhibitory() || !b.phi.is_inhibitory() {
                return Err(Error::param(
                    "without samples both models must be unrestricted inhibitory pairwise interaction processes",
                ));
            }
            let tol = quad_tol(a.beta.max().max(b.beta.max()) * vol);
            let db = integrate_window(w, |x: &[T]| (a.beta.value(w, x) - b.beta.value(w, x)).abs(), tol)?;
            let kernel = Kernel::difference(&a.phi, &b.phi);
            let (pair, _, _) = pair_integral(w, &b.beta, &kernel, &a.beta, T::one(), Intensity::Envelope)?;
            rep.set("activity_difference", db.as_f64());
            rep.set("pair_term", pair);
            rep.notes.push("integrand majorised by |β₁-β₂| + β₂ Σ|φ₁-φ₂| with ν ≤ β₁".into());
            (db.as_f64() + pair, 0.0)
        }
    };
    rep.set("integral", est);
    rep.set("stderr", se);
    let c1 = stein.c1.as_f64();
    rep.finish(c1 * (est + 3.0 * se))
}

fn l1_phi<T: Real>(kernel: &Kernel<T>, w: &crate::geometry::Window<T>) -> Result<f64> {
    let one = crate::models::Activity::Constant(T::one());
    let c = w.center();
    Ok(crate::models::weighted_integral(w, &one, &c, kernel, quad_tol(w.volume()))?.as_f64())
}

/// `c₁(λ) ∬ β(x) ν(y) |φ₁(x, y) - φ₂(x, y)| dx dy` for two inhibitory
/// processes with a common activity.
pub fn tv_bound_inhibitory_pip<T: Real>(xi: &Model<T>, h: &Model<T>, intensity: Intensity<'_, T>) -> Result<BoundReport> {
    same_window(xi, h)?;
    let (a, b) = (pip_view(xi)?, pip_view(h)?);
    if xi.conditioning().is_some() || h.conditioning().is_some() {
        return Err(Error::param("restricted models go through tv_bound_general_pip"));
    }
    if !a.phi.is_inhibitory() || !b.phi.is_inhibitory() {
        return Err(Error::param("both interaction functions must satisfy phi <= 1"));
    }
    let beta = shared_beta(&a, &b)?;
    let stein = stein_params(h, Regime::Optimal)?;
    let w = xi.window();
    let kernel = Kernel::difference(&a.phi, &b.phi);
    let (v, se, n) = pair_integral(w, &beta, &kernel, &beta, T::one(), intensity)?;
    let mut rep = BoundReport::new(TheoremId::InhibitoryPip, intensity.mode());
    rep.with_stein(&stein);
    rep.set("double_integral", v);
    rep.set("stderr", se);
    if let Some(n) = n {
        rep.set("samples", n as f64);
    }
    rep.set("phi_l1_distance", l1_phi(&kernel, w)?);
    let c1 = stein.c1.as_f64();
    rep.finish(c1 * (v + 3.0 * se))
}

/// Constants valid for both interaction functions at once.
struct Common<T> {
    c: T,
    gamma: T,
    r: T,
    big_r: T,
}

/// `sup_{d <= delta} max(φ₁, φ₂)(d)`, exact for piecewise constant and monotone profiles.
fn gamma_within<T: Real>(phis: &[&Interaction<T>], delta: T) -> Result<T> {
    let mut g = T::zero();
    for phi in phis {
        if !phi.is_radial() {
            let k = phi.constants();
            if delta > k.delta {
                return Err(Error::param(format!(
                    "delta = {delta} exceeds the declared range {} of the interaction's gamma",
                    k.delta
                )));
            }
            g = g.max(k.gamma);
            continue;
        }
        let mut pts: Vec<T> = phi.breakpoints().into_iter().filter(|r| *r <= delta && *r > T::zero()).collect();
        pts.push(delta);
        for i in 1..=256 {
            pts.push(delta * T::from_usize_lossy(i) / T::lit(256.0));
        }
        for d in pts {
            g = g.max(phi.radial_value(d).unwrap());
        }
    }
    Ok(g)
}

fn common_constants<T: Real>(a: &Interaction<T>, b: &Interaction<T>, delta: T) -> Result<Common<T>> {
    let (ka, kb) = (a.constants(), b.constants());
    let one = T::one();
    // Constant(1) (Poisson) has r = R = 0 and places no constraint.
    let trivial = |k: &crate::models::PipConstants<T>| k.c <= one && k.big_r == T::zero();
    let (r, big_r) = match (trivial(&ka), trivial(&kb)) {
        (true, true) => (T::zero(), T::zero()),
        (true, false) => (kb.r, kb.big_r),
        (false, true) => (ka.r, ka.big_r),
        (false, false) => (ka.r.min(kb.r), ka.big_r.max(kb.big_r)),
    };
    Ok(Common {
        c: ka.c.max(kb.c).max(one),
        gamma: gamma_within(&[a, b], delta)?,
        r,
        big_r,
    })
}

/// `γ^{k(k+1)/2} B_δ^k / ((k+1)! C^k)`.
fn pak_coefficient<T: Real>(gamma: T, b_delta: T, c: T, k: usize) -> T {
    if gamma == T::zero() || b_delta == T::zero() {
        return T::zero();
    }
    let kf = T::from_usize_lossy(k);
    let ln = kf * (kf + T::one()) * T::lit(0.5) * gamma.ln() + kf * b_delta.ln() - ln_factorial::<T>(k + 1) - kf * c.ln();
    ln.exp()
}

/// `c₁(λ_{A_k}) M_k ∬ β ν_{A_k} |φ₁ - φ₂| + P(Ξ ∉ A_k) + P(H ∉ A_k)` for
/// pairwise interaction processes that need not be inhibitory.
///
/// Monte Carlo samples in `intensity` are of `Ξ` restricted to `A_k`.
pub fn tv_bound_general_pip<T: Real>(
    xi: &Model<T>,
    h: &Model<T>,
    k: usize,
    delta: T,
    intensity: Intensity<'_, T>,
    moments: Moments<'_, T>,
) -> Result<BoundReport> {
    same_window(xi, h)?;
    if k == 0 || !(delta > T::zero()) {
        return Err(Error::param("need k >= 1 and delta > 0"));
    }
    if xi.conditioning().is_some() || h.conditioning().is_some() {
        return Err(Error::param("pass the unrestricted models; the restriction to A_k is applied here"));
    }
    let (a, b) = (pip_view(xi)?, pip_view(h)?);
    if xi.lj_params().is_some() || h.lj_params().is_some() {
        return Err(Error::param("Lennard-Jones pairs go through tv_bound_lennard_jones"));
    }
    let beta = shared_beta(&a, &b)?;
    let w = xi.window();
    let dim = w.dim();
    let com = common_constants(&a.phi, &b.phi, delta)?;
    let m = if com.c > T::one() && com.r < com.big_r {
        covering_m(dim, com.r, com.big_r, delta)
    } else {
        T::zero()
    };
    let kf = T::from_usize_lossy(k);
    let ln_mk = m * kf * com.c.ln();
    let mk = ln_mk.exp();

    let h_k = h.restrict_to_ak(k, delta)?;
    let stein = stein_params(&h_k, Regime::Optimal)?;
    let xi_k = xi.restrict_to_ak(k, delta)?;
    let env_xi = xi_k.envelope_const()?;

    let kernel = Kernel::difference(&a.phi, &b.phi);
    let (v, se, n) = pair_integral(w, &beta, &kernel, &beta, env_xi, intensity)?;
    let c1 = stein.c1.as_f64();
    let first = c1 * mk.as_f64() * (v + 3.0 * se);

    let b_delta = beta.sup_ball_integral(w, delta);
    let coef = pak_coefficient(com.gamma, b_delta, com.c, k);
    let mut rep = BoundReport::new(TheoremId::GeneralPip, intensity.mode());
    let (mom_xi, mom_h) = match moments {
        Moments::Ruelle { cstar_star } => {
            rep.set("cstar_star", cstar_star.as_f64());
            (
                ruelle_moment(xi, com.c, k, cstar_star)?.as_f64(),
                ruelle_moment(h, com.c, k, cstar_star)?.as_f64(),
            )
        }
        Moments::Samples { xi: sx, h: sh } => {
            let (ex, eh) = (sample_moment(sx, com.c, k)?, sample_moment(sh, com.c, k)?);
            rep.set("moment_xi_stderr", ex.stderr);
            rep.set("moment_h_stderr", eh.stderr);
            (ex.mean + 3.0 * ex.stderr, eh.mean + 3.0 * eh.stderr)
        }
        Moments::Given { xi, h } => (xi.as_f64(), h.as_f64()),
    };
    let p_xi = coef.as_f64() * mom_xi;
    let p_h = coef.as_f64() * mom_h;

    rep.with_stein(&stein);
    rep.set("k", k as f64);
    rep.set("delta", delta.as_f64());
    rep.set("C", com.c.as_f64());
    rep.set("gamma", com.gamma.as_f64());
    rep.set("r", com.r.as_f64());
    rep.set("R", com.big_r.as_f64());
    rep.set("m", m.as_f64());
    rep.set("m_k", (m * kf).as_f64());
    rep.set("M_k", mk.as_f64());
    rep.set("nu_envelope_factor", env_xi.as_f64());
    rep.set("B_delta", b_delta.as_f64());
    rep.set("double_integral", v);
    rep.set("stderr", se);
    if let Some(n) = n {
        rep.set("samples", n as f64);
    }
    rep.set("phi_l1_distance", l1_phi(&kernel, w)?);
    rep.set("first_term", first);
    rep.set("pak_coefficient", coef.as_f64());
    rep.set("moment_xi", mom_xi);
    rep.set("moment_h", mom_h);
    rep.set("P_notin_Ak_xi", p_xi);
    rep.set("P_notin_Ak_h", p_h);
    rep.set("tail", p_xi + p_h);
    rep.finish(first + p_xi + p_h)
}

/// Supplies Monte Carlo samples of `Ξ` restricted to `A_k` for a given `(k, δ)`.
pub type SampleSource<'a, T> = &'a (dyn Fn(usize, T) -> Result<Vec<PointConfig<T>>> + Sync);

/// [`tv_bound_general_pip`] over a `(k, δ)` grid; returns the smallest bound
/// and every successfully evaluated grid point.
pub fn tv_bound_general_pip_sweep<T: Real>(
    xi: &Model<T>,
    h: &Model<T>,
    ks: &[usize],
    deltas: &[T],
    samples: Option<SampleSource<'_, T>>,
    moments: Moments<'_, T>,
) -> Result<(BoundReport, Vec<SweepRow>)> {
    let mut rows = Vec::new();
    let mut first_err = None;
    for &k in ks {
        for &d in deltas {
            let drawn = match samples {
                Some(f) => Some(f(k, d)?),
                None => None,
            };
            let intensity = match &drawn {
                Some(s) => Intensity::Samples(s),
                None => Intensity::Envelope,
            };
            match tv_bound_general_pip(xi, h, k, d, intensity, moments) {
                Ok(report) => rows.push(SweepRow {
                    params: BTreeMap::from([("k".to_string(), k as f64), ("delta".to_string(), d.as_f64())]),
                    report,
                }),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
    }
    let best = rows
        .iter()
        .min_by(|x, y| x.report.bound.total_cmp(&y.report.bound))
        .map(|r| r.report.clone());
    match best {
        Some(mut b) => {
            b.notes.push(format!("minimum over {} sweep points", rows.len()));
            Ok((b, rows))
        }
        None => Err(first_err.unwrap_or_else(|| Error::param("empty sweep grid"))),
    }
}

/// `c₁(λ) M₁ ∬ β ν |φ₁ - φ₂|` for two processes with a common hard core.
pub fn tv_bound_hardcore_pip<T: Real>(xi: &Model<T>, h: &Model<T>, intensity: Intensity<'_, T>) -> Result<BoundReport> {
    same_window(xi, h)?;
    if xi.conditioning().is_some() || h.conditioning().is_some() {
        return Err(Error::param("hard-core bound expects unrestricted models"));
    }
    let (a, b) = (pip_view(xi)?, pip_view(h)?);
    if xi.lj_params().is_some() || h.lj_params().is_some() {
        return Err(Error::param("Lennard-Jones interactions have no hard core"));
    }
    let delta = match (a.phi.hard_core(), b.phi.hard_core()) {
        (Some(x), Some(y)) if x > T::zero() && y > T::zero() && x.is_finite() && y.is_finite() => x.min(y),
        _ => return Err(Error::param("both interaction functions need a positive hard-core radius")),
    };
    let beta = shared_beta(&a, &b)?;
    let w = xi.window();
    let com = common_constants(&a.phi, &b.phi, delta)?;
    let m = if com.c > T::one() && com.r < com.big_r {
        covering_m(w.dim(), com.r, com.big_r, delta)
    } else {
        T::zero()
    };
    let m1 = (m * com.c.ln()).exp();
    let stein = stein_params(h, Regime::Optimal)?;
    let env_xi = xi.envelope_const()?;
    let kernel = Kernel::difference(&a.phi, &b.phi);
    let (v, se, n) = pair_integral(w, &beta, &kernel, &beta, env_xi, intensity)?;
    let mut rep = BoundReport::new(TheoremId::HardCorePip, intensity.mode());
    rep.with_stein(&stein);
    rep.set("delta", delta.as_f64());
    rep.set("C", com.c.as_f64());
    rep.set("m", m.as_f64());
    rep.set("M_1", m1.as_f64());
    rep.set("nu_envelope_factor", env_xi.as_f64());
    rep.set("double_integral", v);
    rep.set("stderr", se);
    if let Some(n) = n {
        rep.set("samples", n as f64);
    }
    rep.set("phi_l1_distance", l1_phi(&kernel, w)?);
    rep.finish(stein.c1.as_f64() * m1.as_f64() * (v + 3.0 * se))
}
