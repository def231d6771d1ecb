use super::{BoundReport, IntensityMode, TheoremId};
use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::models::Model;
use crate::quadrature::gauss_kronrod;
use crate::scalar::{unit_ball_volume, Real};
use crate::stein::{stein_params, Regime};

const MAX_EVALS: usize = 200_000;

/// Volume of the intersection of two balls of radius `a` in `R^dim` whose
/// centres are `s` apart.
pub fn lens_volume<T: Real>(dim: usize, a: T, s: T) -> Result<T> {
    if s >= a + a {
        return Ok(T::zero());
    }
    let h = a - s * T::lit(0.5);
    Ok(match dim {
        1 => h + h,
        2 => {
            let x = s * T::lit(0.5);
            T::lit(2.0) * (a * a * (x / a).acos() - x * (a * a - x * x).sqrt())
        }
        3 => T::PI() * (a + a + a + a + s) * (a + a - s).powi(2) / T::lit(12.0),
        _ => {
            let e = T::from_usize_lossy(dim - 1) * T::lit(0.5);
            let cap = gauss_kronrod(
                |t: T| Ok((a * a - t * t).max(T::zero()).powf(e)),
                a - h,
                a,
                &[],
                a.powi(dim as i32) * T::lit(1e-13),
                MAX_EVALS,
            )?;
            T::lit(2.0) * unit_ball_volume::<T>(dim - 1) * cap.value
        }
    })
}

/// `I_D(R, γ) = ∫_{B(0, R)} γ^{|B(x, R/2) ∩ B(0, R/2)|} dx` by radial quadrature.
pub fn interaction_integral<T: Real>(dim: usize, gamma: T, big_r: T) -> Result<T> {
    check_gamma(gamma)?;
    if !(big_r > T::zero()) {
        return Err(Error::param("R must be positive"));
    }
    let a = big_r * T::lit(0.5);
    let ln_g = gamma.ln();
    let shell = T::from_usize_lossy(dim) * unit_ball_volume::<T>(dim);
    let scale = unit_ball_volume::<T>(dim) * big_r.powi(dim as i32);
    let est = gauss_kronrod(
        |s: T| Ok((ln_g * lens_volume(dim, a, s)?).exp() * s.powi(dim as i32 - 1)),
        T::zero(),
        big_r,
        &[],
        scale / shell * T::lit(1e-12),
        MAX_EVALS,
    )?;
    Ok(shell * est.value)
}

/// `2 α_D D R^{D-1} log(γ^{-α_D})^{-1/D}`, an upper bound on `I_D`; infinite at `γ = 1`.
pub fn interaction_integral_closed<T: Real>(dim: usize, gamma: T, big_r: T) -> T {
    let ad = unit_ball_volume::<T>(dim);
    let d = T::from_usize_lossy(dim);
    T::lit(2.0) * ad * d * big_r.powi(dim as i32 - 1) * (-ad * gamma.ln()).powf(-T::one() / d)
}

fn check_gamma<T: Real>(gamma: T) -> Result<()> {
    if gamma > T::zero() && gamma <= T::one() {
        Ok(())
    } else {
        Err(Error::param(format!("gamma must lie in (0, 1], got {gamma}")))
    }
}

/// Distance between an area-interaction process `(β, γ, R)` and the hard-core
/// process with activity `β₀` and hard-core distance `R`.
///
/// `mean_xi` is `E|Ξ|`; when absent the envelope `β γ^{-α_D (R/2)^D} |X|` is used.
pub fn tv_bound_area_vs_hardcore<T: Real>(
    window: &Window<T>,
    beta: T,
    gamma: T,
    big_r: T,
    beta0: T,
    mean_xi: Option<T>,
) -> Result<BoundReport> {
    check_gamma(gamma)?;
    if !(beta > T::zero() && beta0 > T::zero() && big_r > T::zero()) {
        return Err(Error::param("beta, beta0 and R must be positive"));
    }
    let dim = window.dim();
    let vol = window.volume();
    let ad = unit_ball_volume::<T>(dim);
    let beta_eff = beta * (-ad * (big_r * T::lit(0.5)).powi(dim as i32) * gamma.ln()).exp();
    let target = Model::strauss(window.clone(), beta0, T::zero(), big_r)?;
    let stein = stein_params(&target, Regime::Optimal)?;
    let i_d = interaction_integral(dim, gamma, big_r)?;
    let closed = interaction_integral_closed(dim, gamma, big_r);
    let mode = if mean_xi.is_some() {
        IntensityMode::MonteCarlo
    } else {
        IntensityMode::Envelope
    };
    let mean = mean_xi.unwrap_or(beta_eff * vol);
    let first = (beta_eff - beta0).abs() * vol;
    let second = beta_eff * mean * i_d;
    let mut rep = BoundReport::new(TheoremId::AreaVsHardCore, mode);
    rep.with_stein(&stein);
    rep.set("beta_effective", beta_eff.as_f64());
    rep.set("mean_xi", mean.as_f64());
    rep.set("I_D", i_d.as_f64());
    if closed.is_finite() {
        rep.set("I_D_closed", closed.as_f64());
    } else {
        rep.notes.push("closed bound on I_D is infinite at gamma = 1".into());
    }
    rep.set("activity_term", first.as_f64());
    rep.set("interaction_term", second.as_f64());
    rep.finish(stein.c1.as_f64() * (first + second).as_f64())
}

/// Lower bound `κ I_D(R, γ)` with `κ = e^{-β₀|X|} β₀² |X^{(-R₀)}| / 2`, valid
/// for calibrated activity and `R <= R₀`.
pub fn tv_lower_area<T: Real>(window: &Window<T>, beta0: T, gamma: T, big_r: T, r0: T) -> Result<T> {
    check_gamma(gamma)?;
    if !(beta0 > T::zero()) || !(big_r > T::zero() && big_r <= r0) {
        return Err(Error::param("need beta0 > 0 and 0 < R <= R0"));
    }
    let eroded = window.erosion_volume(r0);
    if !(eroded > T::zero()) {
        return Err(Error::Window(format!("window too small: erosion by R0 = {r0} is empty")));
    }
    let kappa = (-beta0 * window.volume()).exp() * beta0 * beta0 * eroded * T::lit(0.5);
    Ok(kappa * interaction_integral(window.dim(), gamma, big_r)?)
}
