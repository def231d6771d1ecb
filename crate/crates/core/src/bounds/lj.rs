use super::{pair_integral, pip_view, same_window, shared_beta, BoundReport, Intensity, TheoremId};
use crate::error::{Error, Result};
use crate::models::{lj_potential, Kernel, LennardJonesParams, Model};
use crate::scalar::{ln_factorial, Real};
use crate::stein::{stein_params, Regime};

/// Terms beyond this index are never summed.
const MAX_TAIL_TERMS: usize = 100_000;

/// `4π√3 (R - δ)² / (δ³ (R - 2δ)⁵)`.
fn lj_k<T: Real>(big_r: T, delta: T) -> T {
    let four_pi_sqrt3 = T::lit(4.0) * T::PI() * T::lit(3.0).sqrt();
    four_pi_sqrt3 * (big_r - delta).powi(2) / (delta.powi(3) * (big_r - delta - delta).powi(5))
}

/// `L(δ) = δ^{-6}/4 - 4π√3 (R - δ)² / (δ³ (R - 2δ)⁵)` of the classical potential in three dimensions.
pub fn lj_l<T: Real>(big_r: T, delta: T) -> T {
    delta.powi(-6) * T::lit(0.25) - lj_k(big_r, delta)
}

/// `Σ_{j > k} B^{j-1}/j! exp(-j² b L)`; returns the sum and a bound on the
/// omitted remainder.
pub fn lj_tail<T: Real>(b_delta: T, b: T, l: T, k: usize) -> (T, T) {
    let ln_b = b_delta.ln();
    let term = |j: usize| {
        let jf = T::from_usize_lossy(j);
        (jf - T::one()) * ln_b - ln_factorial::<T>(j) - jf * jf * b * l
    };
    let mut sum = T::zero();
    let mut j = k + 1;
    loop {
        let t = term(j).exp();
        sum = sum + t;
        // ratio of consecutive terms: B/(j+1) exp(-(2j+1) b L)
        let jf = T::from_usize_lossy(j);
        let ln_q = ln_b - (jf + T::one()).ln() - (jf + jf + T::one()) * b * l;
        let q = ln_q.exp();
        if q < T::lit(0.5) && (t <= sum * T::lit(1e-17) || t == T::zero()) {
            let next = term(j + 1).exp();
            return (sum, next / (T::one() - q));
        }
        j += 1;
        if j - k > MAX_TAIL_TERMS {
            return (sum, T::infinity());
        }
    }
}

fn classical<T: Real>(m: &Model<T>) -> Result<LennardJonesParams<T>> {
    let lj = *m
        .lj_params()
        .ok_or_else(|| Error::param(format!("{} is not a Lennard-Jones process", m.kind_name())))?;
    if m.window().dim() != 3 || lj.rho != T::lit(6.0) || lj.r != lj.big_r {
        return Err(Error::param("the classical bound needs D = 3, rho = 6 and r = R"));
    }
    Ok(lj)
}

/// Bound for two classical Lennard-Jones processes with a common activity,
/// conditioning both on `A_k` with ball diameter `δ`.
pub fn tv_bound_lennard_jones<T: Real>(
    xi: &Model<T>,
    h: &Model<T>,
    k: usize,
    delta: T,
    intensity: Intensity<'_, T>,
) -> Result<BoundReport> {
    same_window(xi, h)?;
    if xi.conditioning().is_some() || h.conditioning().is_some() {
        return Err(Error::param("pass the unrestricted models; the restriction to A_k is applied here"));
    }
    let (l1p, l2p) = (classical(xi)?, classical(h)?);
    let (a, b) = (pip_view(xi)?, pip_view(h)?);
    let beta = shared_beta(&a, &b)?;
    if k == 0 || !(delta > T::zero()) || !(delta + delta < l1p.big_r.min(l2p.big_r)) {
        return Err(Error::param(format!(
            "need k >= 1 and 0 < delta < min(R1, R2)/2 (delta = {delta})"
        )));
    }
    let (l1, l2) = (lj_l(l1p.big_r, delta), lj_l(l2p.big_r, delta));
    for (i, l) in [(1, l1), (2, l2)] {
        if !(l > T::zero()) {
            return Err(Error::param(format!(
                "delta = {delta} too large: L{i}(delta) = {l} must be positive"
            )));
        }
    }
    let kf = T::from_usize_lossy(k);
    let (k1, k2) = (lj_k(l1p.big_r, delta), lj_k(l2p.big_r, delta));
    let ln_m2 = l2p.b * kf * k2;
    let ln_nu = l1p.b * kf * k1;
    let w = xi.window();

    let h_k = h.restrict_to_ak(k, delta)?;
    let stein = stein_params(&h_k, Regime::Optimal)?;
    let kernel = Kernel::difference(&a.phi, &b.phi);
    let (v, se, n) = pair_integral(w, &beta, &kernel, &beta, ln_nu.exp(), intensity)?;
    let first = stein.c1.as_f64() * ln_m2.exp().as_f64() * (v + 3.0 * se);

    let b_delta = beta.sup_ball_integral(w, delta);
    let total = beta.integral(w);
    let (s1, e1) = lj_tail(b_delta, l1p.b, l1, k);
    let (s2, e2) = lj_tail(b_delta, l2p.b, l2, k);
    let tail = total * (s1 + s2 + e1 + e2);

    let mut rep = BoundReport::new(TheoremId::LennardJones, intensity.mode());
    rep.with_stein(&stein);
    rep.set("k", k as f64);
    rep.set("delta", delta.as_f64());
    rep.set("L1", l1.as_f64());
    rep.set("L2", l2.as_f64());
    rep.set("M_k", ln_m2.exp().as_f64());
    rep.set("nu_envelope_factor", ln_nu.exp().as_f64());
    rep.set("B_delta", b_delta.as_f64());
    rep.set("beta_integral", total.as_f64());
    rep.set("double_integral", v);
    rep.set("stderr", se);
    if let Some(n) = n {
        rep.set("samples", n as f64);
    }
    rep.set("first_term", first);
    rep.set("P_notin_Ak_xi", (total * (s1 + e1)).as_f64());
    rep.set("P_notin_Ak_h", (total * (s2 + e2)).as_f64());
    rep.set("tail_truncation", (total * (e1 + e2)).as_f64());
    rep.set("tail", tail.as_f64());
    if tail < T::lit(1e-30) {
        rep.notes.push("tail below 1e-30; series truncated where terms vanish".into());
    }
    for (i, p) in [(1, &l1p), (2, &l2p)] {
        let v_delta = lj_potential(p.big_r, delta);
        if v_delta < delta.powi(-6) {
            rep.notes.push(format!(
                "model {i}: V(delta) = {v_delta:e} < delta^-6, the near-field condition does not hold at this delta"
            ));
        }
        if p.big_r > T::one() {
            rep.notes.push(format!(
                "model {i}: R = {} > 1, so V >= -d^-6 fails beyond R",
                p.big_r
            ));
        }
    }
    rep.finish(first + tail.as_f64())
}
