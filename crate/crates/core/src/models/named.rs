//! Fixed distributions used as null models and as actual (alternative)
//! distributions in power experiments.

use crate::error::{Error, Result};
use crate::stats::{compensated_sum, ln_factorial, ProbabilityVector};

fn need(name: &str, m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::InvalidInput(format!(
            "{name} needs at least {min} bins, got {m}"
        )));
    }
    Ok(())
}

fn head_then_flat(head: &[f64], m: usize, tail: f64) -> Result<ProbabilityVector> {
    let mut p = head.to_vec();
    p.extend(std::iter::repeat_n(tail, m - head.len()));
    ProbabilityVector::from_weights(p)
}

/// `(¼, ¼, 1/(2m−4), …)`.
pub fn synth(m: usize) -> Result<ProbabilityVector> {
    need("synth", m, 3)?;
    head_then_flat(&[0.25, 0.25], m, 1.0 / (2 * m - 4) as f64)
}

/// `(⅜, ⅛, 1/(2m−4), …)`.
pub fn synth_alt(m: usize) -> Result<ProbabilityVector> {
    need("synth-alt", m, 3)?;
    head_then_flat(&[0.375, 0.125], m, 1.0 / (2 * m - 4) as f64)
}

/// Truncated power law `C / j^s`, `j = 1..=m`.
pub fn zipf(m: usize, s: f64) -> Result<ProbabilityVector> {
    need("zipf", m, 1)?;
    let lw: Vec<f64> = (1..=m).map(|j| -s * (j as f64).ln()).collect();
    ProbabilityVector::from_log_weights(&lw)
}

/// Truncated geometric `c_t t^j`, `j = 1..=m`.
pub fn geometric(m: usize, t: f64) -> Result<ProbabilityVector> {
    need("geometric", m, 1)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("geometric ratio {t} must be positive")));
    }
    let lw: Vec<f64> = (1..=m).map(|j| j as f64 * t.ln()).collect();
    ProbabilityVector::from_log_weights(&lw)
}

/// Poisson with the given mean truncated to bins `1..=m` (bin `j` ↔ value `j−1`).
pub fn poisson(m: usize, mean: f64) -> Result<ProbabilityVector> {
    shifted_poisson(m, mean, 0.0)
}

/// `B̃ λ^{j−1+t} / (j−1+t)!` for `j = 1..=m`.
pub fn shifted_poisson(m: usize, mean: f64, t: f64) -> Result<ProbabilityVector> {
    need("poisson", m, 1)?;
    if !(mean > 0.0 && mean.is_finite()) || t.is_nan() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "poisson mean {mean} must be positive and shift {t} non-negative"
        )));
    }
    let lw: Vec<f64> = (0..m)
        .map(|k| {
            let x = k as f64 + t;
            let lf = if t == 0.0 { ln_factorial(k as u64) } else { libm::lgamma(x + 1.0) };
            x * mean.ln() - lf
        })
        .collect();
    ProbabilityVector::from_log_weights(&lw)
}

/// Truncated Poisson with mean `3m/8` whose three central bins `3m/8 − 1`,
/// `3m/8`, `3m/8 + 1` are redistributed as `S/10, 4S/5, S/10`.
pub fn poisson_bump(m: usize) -> Result<ProbabilityVector> {
    if m < 8 || !m.is_multiple_of(8) {
        return Err(Error::InvalidInput(format!(
            "poisson-bump needs m a positive multiple of 8, got {m}"
        )));
    }
    let centre = 3 * m / 8;
    let base = poisson(m, centre as f64)?;
    let mut p = base.probs().to_vec();
    let (a, b, c) = (centre - 2, centre - 1, centre);
    let s = compensated_sum([p[a], p[b], p[c]]);
    p[a] = s / 10.0;
    p[b] = 4.0 * s / 5.0;
    p[c] = s / 10.0;
    ProbabilityVector::from_weights(p)
}

/// `(¼, ⅛, ⅛, 1/(2m−6), …)`.
pub fn castle_alt(m: usize) -> Result<ProbabilityVector> {
    need("castle-alt", m, 4)?;
    head_then_flat(&[0.25, 0.125, 0.125], m, 1.0 / (2 * m - 6) as f64)
}

/// `(¼, ¼, ¼, 1/(4m−12), …)`.
pub fn split_alt(m: usize) -> Result<ProbabilityVector> {
    need("split-alt", m, 4)?;
    head_then_flat(&[0.25, 0.25, 0.25], m, 1.0 / (4 * m - 12) as f64)
}

/// `(9/32, 3/32, 3/32, 1/32, 1/(2m−8), …)`.
pub fn two_alt(m: usize) -> Result<ProbabilityVector> {
    need("two-alt", m, 5)?;
    head_then_flat(
        &[9.0 / 32.0, 3.0 / 32.0, 3.0 / 32.0, 1.0 / 32.0],
        m,
        1.0 / (2 * m - 8) as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructions_sum_to_one() {
        for m in [8usize, 16, 64, 256] {
            for p in [
                synth(m).unwrap(),
                synth_alt(m).unwrap(),
                zipf(m, 1.0).unwrap(),
                zipf(m, 0.5).unwrap(),
                geometric(m, 0.9).unwrap(),
                poisson(m, 3.0 * m as f64 / 8.0).unwrap(),
                poisson_bump(m).unwrap(),
                castle_alt(m).unwrap(),
                split_alt(m).unwrap(),
                two_alt(m).unwrap(),
                shifted_poisson(m, 5.0, 2.0).unwrap(),
            ] {
                let s = compensated_sum(p.probs().iter().copied());
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn synth_entries() {
        let p = synth(16).unwrap();
        assert_eq!(p.probs()[0], 0.25);
        assert!((p.probs()[5] - 1.0 / 28.0).abs() < 1e-15);
        let a = synth_alt(16).unwrap();
        assert_eq!(a.probs()[0], 0.375);
        assert_eq!(a.probs()[1], 0.125);
    }

    #[test]
    fn zipf_two_bins() {
        let p = zipf(2, 1.0).unwrap();
        assert!((p.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shift_zero_matches_poisson() {
        let a = shifted_poisson(21, 5.0, 0.0).unwrap();
        let b = poisson(21, 5.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bump_keeps_centre_mass() {
        let m = 16;
        let base = poisson(m, 6.0).unwrap();
        let bump = poisson_bump(m).unwrap();
        let s0: f64 = base.probs()[4..7].iter().sum();
        let s1: f64 = bump.probs()[4..7].iter().sum();
        assert!((s0 - s1).abs() < 1e-14);
        assert!((bump.probs()[5] - 0.8 * s0).abs() < 1e-14);
        assert_eq!(bump.probs()[0], base.probs()[0]);
    }
}
