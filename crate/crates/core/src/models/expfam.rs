//! Maximum likelihood for one-parameter exponential families over bins.
//!
//! Every 1-D family in the catalog can be written `pⱼ(η) ∝ exp(log_wⱼ + η tⱼ)`
//! for some natural parameter `η`. The log-likelihood is concave in `η` and its
//! stationary point solves the moment equation `E_η[t] = t̄`, where `t̄` is the
//! count-weighted mean of `t`. The mean is increasing in `η`, so a bracketed
//! Newton iteration converges to machine precision.

use crate::stats::CompensatedSum;

/// Mean and variance of `t` under `η`, evaluated with a max-shift.
fn moments(log_w: &[f64], t: &[f64], eta: f64) -> (f64, f64) {
    let max = log_w
        .iter()
        .zip(t)
        .map(|(&lw, &tj)| lw + eta * tj)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z = CompensatedSum::default();
    let mut s1 = CompensatedSum::default();
    for (&lw, &tj) in log_w.iter().zip(t) {
        let w = (lw + eta * tj - max).exp();
        z.add(w);
        s1.add(w * tj);
    }
    let z = z.value();
    let mean = s1.value() / z;
    let mut s2 = CompensatedSum::default();
    for (&lw, &tj) in log_w.iter().zip(t) {
        let w = (lw + eta * tj - max).exp();
        let d = tj - mean;
        s2.add(w * d * d);
    }
    (mean, s2.value() / z)
}

/// Count-weighted mean of `t`.
pub(crate) fn target_mean(counts: &[u64], t: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let s = crate::stats::compensated_sum(counts.iter().zip(t).map(|(&c, &tj)| c as f64 * tj));
    s / total as f64
}

/// Solve `E_η[t] = target` for `η ∈ [lo, hi]`, clamping to an endpoint when
/// the target lies outside the attainable range.
///
/// Returns `Err` with a reason when the moments cannot be evaluated.
pub(crate) fn solve_moment_equation(
    log_w: &[f64],
    t: &[f64],
    target: f64,
    lo: f64,
    hi: f64,
    init: f64,
) -> Result<f64, String> {
    if !target.is_finite() {
        return Err(format!("sufficient-statistic mean is {target}"));
    }
    let (mu_lo, _) = moments(log_w, t, lo);
    let (mu_hi, _) = moments(log_w, t, hi);
    if !mu_lo.is_finite() || !mu_hi.is_finite() {
        return Err(format!("moments not finite on the bracket [{lo}, {hi}]"));
    }
    if target <= mu_lo {
        return Ok(lo);
    }
    if target >= mu_hi {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = if init > lo && init < hi { init } else { 0.5 * (lo + hi) };
    for _ in 0..500 {
        let (mu, var) = moments(log_w, t, x);
        let f = mu - target;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - f / var;
        let next = if var > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        let scale = next.abs().max(1.0);
        if (next - x).abs() <= 4.0 * f64::EPSILON * scale || (b - a) <= 4.0 * f64::EPSILON * scale {
            return Ok(next);
        }
        x = next;
    }
    Err("moment equation did not converge".into())
}

/// Log-likelihood `Σ cⱼ ln pⱼ(η)` (without the multinomial coefficient).
#[cfg(test)]
pub(crate) fn log_likelihood(counts: &[u64], log_w: &[f64], t: &[f64], eta: f64) -> f64 {
    let max = log_w
        .iter()
        .zip(t)
        .map(|(&lw, &tj)| lw + eta * tj)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + crate::stats::compensated_sum(log_w.iter().zip(t).map(|(&lw, &tj)| (lw + eta * tj - max).exp())).ln();
    crate::stats::compensated_sum(
        counts
            .iter()
            .zip(log_w.iter().zip(t))
            .filter(|(&c, _)| c > 0)
            .map(|(&c, (&lw, &tj))| c as f64 * (lw + eta * tj - log_z)),
    )
}
