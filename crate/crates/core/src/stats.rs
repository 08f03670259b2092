//! Count vectors, model probability vectors and the discrepancy kernels.
//!
//! Every kernel returns an `f64`; a model that assigns probability zero to a
//! bin holding draws yields `f64::INFINITY` for χ², G² and the negative
//! log-likelihood, which orders above every finite value under plain `>=`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a [`ProbabilityVector`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Observed draw counts per bin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidInput("count vector needs at least one bin".into()));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0; m])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }

    /// Total number of draws.
    pub fn total(&self) -> u64 {
        self.n
    }

    /// Number of bins.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Observed fractions `counts[j] / n`.
    pub fn fractions(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Keep only the first `m` bins, dropping the draws beyond them.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("cannot truncate to zero bins".into()));
        }
        Self::new(self.counts.iter().copied().take(m).collect())
    }

    /// Append zero-count bins up to `m` bins in total.
    pub fn extend(&self, m: usize) -> Result<Self> {
        if m < self.len() {
            return Err(Error::InvalidInput(format!(
                "cannot extend {} bins to {m}",
                self.len()
            )));
        }
        let mut counts = self.counts.clone();
        counts.resize(m, 0);
        Self::new(counts)
    }

    /// Apply a bin permutation: bin `j` of the result holds bin `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let counts = perm.iter().map(|&j| self.counts[j]).collect();
        Self { counts, n: self.n }
    }
}

/// A model distribution over `m` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    /// Validates non-negativity and unit mass (to [`PROB_SUM_TOLERANCE`]).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("probability vector needs at least one bin".into()));
        }
        if let Some((j, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidInput(format!("probability of bin {} is {p}", j + 1)));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights to unit mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
        }
        let total = compensated_sum(weights.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidInput("weights have zero total mass".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Normalizes log-weights with a max shift; `-inf` entries become zero.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidInput("log-weights have no finite maximum".into()));
        }
        Self::from_weights(log_weights.iter().map(|w| (w - max).exp()).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            probs: perm.iter().map(|&j| self.probs[j]).collect(),
        }
    }
}

/// The five supported discrepancy statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatisticKind {
    Rms,
    Chi2,
    G2,
    FreemanTukey,
    NegLogLikelihood,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 5] = [
        StatisticKind::Chi2,
        StatisticKind::G2,
        StatisticKind::FreemanTukey,
        StatisticKind::NegLogLikelihood,
        StatisticKind::Rms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::Rms => "rms",
            StatisticKind::Chi2 => "chi2",
            StatisticKind::G2 => "g2",
            StatisticKind::FreemanTukey => "freeman-tukey",
            StatisticKind::NegLogLikelihood => "nll",
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rms" | "root-mean-square" => Ok(StatisticKind::Rms),
            "chi2" | "chi-square" | "x2" => Ok(StatisticKind::Chi2),
            "g2" | "llr" => Ok(StatisticKind::G2),
            "ft" | "freeman-tukey" | "hellinger" => Ok(StatisticKind::FreemanTukey),
            "nll" | "neg-log-likelihood" => Ok(StatisticKind::NegLogLikelihood),
            other => Err(Error::InvalidInput(format!(
                "unknown statistic `{other}` (expected rms, chi2, g2, ft or nll)"
            ))),
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

fn check(obs: &CountVector, model: &ProbabilityVector) -> Result<()> {
    if obs.len() != model.len() {
        return Err(Error::Dimension {
            expected: model.len(),
            actual: obs.len(),
        });
    }
    Ok(())
}

fn check_nonempty(obs: &CountVector, model: &ProbabilityVector) -> Result<()> {
    check(obs, model)?;
    if obs.total() == 0 {
        return Err(Error::InvalidInput("statistic of zero draws is undefined".into()));
    }
    Ok(())
}

/// `sqrt((1/m) Σ (p̂ⱼ − pⱼ)²)`.
pub fn rms_statistic(obs: &CountVector, model: &ProbabilityVector) -> Result<f64> {
    check_nonempty(obs, model)?;
    let n = obs.total() as f64;
    let m = obs.len() as f64;
    let ss = compensated_sum(obs.counts().iter().zip(model.probs()).map(|(&c, &p)| {
        let d = c as f64 / n - p;
        d * d
    }));
    Ok((ss / m).sqrt())
}

/// Pearson's `n Σ (p̂ⱼ − pⱼ)² / pⱼ`; a `0/0` term is dropped.
pub fn chi2_statistic(obs: &CountVector, model: &ProbabilityVector) -> Result<f64> {
    check_nonempty(obs, model)?;
    let n = obs.total() as f64;
    let mut acc = CompensatedSum::default();
    for (&c, &p) in obs.counts().iter().zip(model.probs()) {
        if p == 0.0 {
            if c > 0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        let d = c as f64 / n - p;
        acc.add(d * d / p);
    }
    Ok(n * acc.value())
}

/// Log-likelihood ratio `2n Σ p̂ⱼ ln(p̂ⱼ / pⱼ)`; empty bins contribute zero.
pub fn g2_statistic(obs: &CountVector, model: &ProbabilityVector) -> Result<f64> {
    check_nonempty(obs, model)?;
    let n = obs.total() as f64;
    let mut acc = CompensatedSum::default();
    for (&c, &p) in obs.counts().iter().zip(model.probs()) {
        if c == 0 {
            continue;
        }
        if p == 0.0 {
            return Ok(f64::INFINITY);
        }
        let f = c as f64 / n;
        acc.add(f * (f / p).ln());
    }
    // Rounding can leave a perfect fit a hair below zero.
    Ok((2.0 * n * acc.value()).max(0.0))
}

/// Freeman-Tukey / Hellinger `4n Σ (√p̂ⱼ − √pⱼ)²`.
pub fn freeman_tukey_statistic(obs: &CountVector, model: &ProbabilityVector) -> Result<f64> {
    check_nonempty(obs, model)?;
    let n = obs.total() as f64;
    let ss = compensated_sum(obs.counts().iter().zip(model.probs()).map(|(&c, &p)| {
        let d = (c as f64 / n).sqrt() - p.sqrt();
        d * d
    }));
    Ok(4.0 * n * ss)
}

/// The weighted-Euclidean form `4n Σ (p̂ⱼ − pⱼ)² / (√p̂ⱼ + √pⱼ)²` of the
/// Freeman-Tukey statistic, skipping bins where both fractions vanish.
pub fn freeman_tukey_weighted(obs: &CountVector, model: &ProbabilityVector) -> Result<f64> {
    check_nonempty(obs, model)?;
    let n = obs.total() as f64;
    let ss = compensated_sum(
        obs.counts()
            .iter()
            .zip(model.probs())
            .filter(|(&c, &p)| c > 0 || p > 0.0)
            .map(|(&c, &p)| {
                let f = c as f64 / n;
                let d = f - p;
                let s = f.sqrt() + p.sqrt();
                d * d / (s * s)
            }),
    );
    Ok(4.0 * n * ss)
}

/// `ln k!` via the log-gamma function.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        libm::lgamma(k as f64 + 1.0)
    }
}

/// Negative log of the full multinomial probability of the counts.
pub fn nll_statistic(obs: &CountVector, model: &ProbabilityVector) -> Result<f64> {
    check_nonempty(obs, model)?;
    let mut acc = CompensatedSum::default();
    acc.add(ln_factorial(obs.total()));
    for (&c, &p) in obs.counts().iter().zip(model.probs()) {
        if c == 0 {
            continue;
        }
        if p == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc.add(c as f64 * p.ln() - ln_factorial(c));
    }
    Ok(-acc.value())
}

pub fn compute_statistic(
    kind: StatisticKind,
    obs: &CountVector,
    model: &ProbabilityVector,
) -> Result<f64> {
    match kind {
        StatisticKind::Rms => rms_statistic(obs, model),
        StatisticKind::Chi2 => chi2_statistic(obs, model),
        StatisticKind::G2 => g2_statistic(obs, model),
        StatisticKind::FreemanTukey => freeman_tukey_statistic(obs, model),
        StatisticKind::NegLogLikelihood => nll_statistic(obs, model),
    }
}

/// Evaluate several kinds at once, in the order given.
pub fn compute_statistics(
    kinds: &[StatisticKind],
    obs: &CountVector,
    model: &ProbabilityVector,
) -> Result<Vec<f64>> {
    kinds
        .iter()
        .map(|&k| compute_statistic(k, obs, model))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    fn pv(p: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(p.to_vec()).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn perfect_fit_is_zero() {
        let obs = cv(&[5, 5, 5, 5]);
        let model = ProbabilityVector::uniform(4).unwrap();
        for kind in [
            StatisticKind::Rms,
            StatisticKind::Chi2,
            StatisticKind::G2,
            StatisticKind::FreemanTukey,
        ] {
            assert_eq!(compute_statistic(kind, &obs, &model).unwrap(), 0.0, "{kind}");
        }
    }

    #[test]
    fn hand_values_fifteen_five() {
        let obs = cv(&[15, 5, 0, 0]);
        let model = ProbabilityVector::uniform(4).unwrap();
        let rms = rms_statistic(&obs, &model).unwrap();
        assert!(rel_close(rms, (0.375f64 / 4.0).sqrt(), 1e-12));
        assert!(rel_close(rms, 0.306_186_217_847_897_2, 1e-12));
        assert!(rel_close(chi2_statistic(&obs, &model).unwrap(), 30.0, 1e-12));
        let g2 = g2_statistic(&obs, &model).unwrap();
        assert!(rel_close(g2, 30.0 * 3f64.ln(), 1e-12));
        let ft = freeman_tukey_statistic(&obs, &model).unwrap();
        let want = 80.0 * ((0.75f64.sqrt() - 0.5).powi(2) + 0.5);
        assert!(rel_close(ft, want, 1e-12));
        assert!((ft - 50.7179).abs() < 1e-4);
    }

    #[test]
    fn rms_over_hundred_bins() {
        let mut counts = vec![0u64; 100];
        counts[0] = 15;
        counts[1] = 5;
        let mut probs = vec![1.0 / 196.0; 100];
        probs[0] = 0.25;
        probs[1] = 0.25;
        let rms = rms_statistic(&cv(&counts), &pv(&probs)).unwrap();
        let want = ((0.25 + 98.0 / (196.0f64 * 196.0)) / 100.0).sqrt();
        assert!(rel_close(rms, want, 1e-12));
        assert!((rms - 0.0502544).abs() < 1e-6);
    }

    #[test]
    fn zero_probability_conventions() {
        assert_eq!(chi2_statistic(&cv(&[1, 0]), &pv(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(
            chi2_statistic(&cv(&[1, 1]), &pv(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        assert_eq!(g2_statistic(&cv(&[0, 1]), &pv(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert_eq!(nll_statistic(&cv(&[0, 1]), &pv(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert!(freeman_tukey_statistic(&cv(&[0, 1]), &pv(&[1.0, 0.0])).unwrap().is_finite());
    }

    #[test]
    fn g2_and_ft_with_empty_bin() {
        let obs = cv(&[0, 10]);
        let half = pv(&[0.5, 0.5]);
        assert!(rel_close(g2_statistic(&obs, &half).unwrap(), 20.0 * 2f64.ln(), 1e-12));
        let want = 40.0 * (0.5 + (1.0 - 0.5f64.sqrt()).powi(2));
        assert!(rel_close(freeman_tukey_statistic(&obs, &half).unwrap(), want, 1e-12));
        assert!((want - 23.4314).abs() < 1e-4);
    }

    #[test]
    fn nll_hand_values() {
        assert_eq!(nll_statistic(&cv(&[1, 0]), &pv(&[1.0, 0.0])).unwrap(), 0.0);
        let half = pv(&[0.5, 0.5]);
        assert!(rel_close(nll_statistic(&cv(&[1, 1]), &half).unwrap(), 2f64.ln(), 1e-12));
        assert!(rel_close(nll_statistic(&cv(&[2, 0]), &half).unwrap(), 4f64.ln(), 1e-12));
    }

    #[test]
    fn errors() {
        let model = ProbabilityVector::uniform(3).unwrap();
        assert!(matches!(
            rms_statistic(&cv(&[1, 2]), &model),
            Err(Error::Dimension { expected: 3, actual: 2 })
        ));
        assert!(matches!(
            rms_statistic(&cv(&[0, 0, 0]), &model),
            Err(Error::InvalidInput(_))
        ));
        assert!(CountVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn statistic_kind_parsing() {
        for kind in StatisticKind::ALL {
            assert_eq!(kind.name().parse::<StatisticKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn truncate_and_extend() {
        let c = cv(&[3, 2, 1]);
        assert_eq!(c.truncate(2).unwrap().counts(), &[3, 2]);
        assert_eq!(c.truncate(2).unwrap().total(), 5);
        assert_eq!(c.extend(5).unwrap().counts(), &[3, 2, 1, 0, 0]);
        assert!(c.extend(2).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat_n(1e-16, 1_000_000));
        let s = compensated_sum(v.iter().copied());
        assert!((s - (1.0 + 1e-10)).abs() < 1e-15);
    }
}
