//! Model families `p₀(θ)`: probability construction and maximum likelihood.
//!
//! Each [`ModelFamily`] variant carries its structural constants (bin count,
//! truncation, offsets). [`ModelFamily::probabilities`] builds the model for a
//! parameter value and [`ModelFamily::fit`] returns the maximum-likelihood
//! parameters for a count vector. Permutation-valued parameters are estimated
//! by sorting the counts into nonincreasing order, ties broken by bin index.

mod expfam;
pub mod named;
pub mod spec;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{compensated_sum, ln_factorial, CountVector, ProbabilityVector};

pub use spec::{parse_distribution, parse_family};

/// Upper end of the admissible exponent for power-law families.
pub const MAX_EXPONENT: f64 = 50.0;
/// Upper end of the admissible Poisson mean.
pub const MAX_POISSON_MEAN: f64 = 1e6;
/// Smallest positive value tried for parameters bounded below by zero.
const MIN_POSITIVE: f64 = 1e-300;

/// A permutation of bins, stored as the 1-based rank of each bin.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        let m = ranks.len();
        let mut seen = vec![false; m];
        for &r in &ranks {
            if r == 0 || r > m || seen[r - 1] {
                return Err(Error::InvalidInput(format!(
                    "{ranks:?} is not a permutation of 1..={m}"
                )));
            }
            seen[r - 1] = true;
        }
        Ok(Self(ranks))
    }

    pub fn identity(m: usize) -> Self {
        Self((1..=m).collect())
    }

    /// Rank of each bin (1-based).
    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bin index (0-based) holding each rank, in rank order.
    pub fn bins_by_rank(&self) -> Vec<usize> {
        let mut inv = vec![0; self.0.len()];
        for (bin, &r) in self.0.iter().enumerate() {
            inv[r - 1] = bin;
        }
        inv
    }
}

/// Ranks the bins by nonincreasing count; equal counts keep bin order.
pub fn sort_permutation(obs: &CountVector) -> Permutation {
    let counts = obs.counts();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]));
    let mut ranks = vec![0; counts.len()];
    for (pos, &bin) in order.iter().enumerate() {
        ranks[bin] = pos + 1;
    }
    Permutation(ranks)
}

/// A parameter value θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Params {
    None,
    Perm(Permutation),
    Reals(Vec<f64>),
    Int(u64),
    Mixed { perm: Permutation, reals: Vec<f64> },
}

/// How the truncated-Poisson family estimates its mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoissonMean {
    /// Maximizer of the truncated likelihood.
    TruncatedMle,
    /// Raw sample mean of `j − 1`.
    SampleMean,
}

/// The catalog of model families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelFamily {
    /// A fixed distribution with no free parameter.
    FullySpecified(ProbabilityVector),
    /// `C₁ / θ(j)` with θ a permutation.
    ZipfPermutation { m: usize },
    /// `C_θ / j^θ`.
    ZipfExponent { m: usize },
    /// `θ^{j−1}(1−θ)` for `j < m`, with the tail mass `θ^{m−1}` in bin `m`.
    RebinnedGeometric { m: usize },
    /// `B_θ θ^{j−1} / (j−1)!` truncated to `m` bins.
    TruncatedPoisson { m: usize, mean: PoissonMean },
    /// Genotype frequencies `θⱼ²` and `2θⱼθₖ` over the `k(k+1)/2` unordered
    /// pairs, flattened row-major over the lower triangle.
    HardyWeinberg { k: usize },
    /// Symmetric `r × r` table, flattened row-major over all `r²` cells.
    Symmetry { r: usize },
    /// The top three ranks fitted exactly, a power law `C / rank^θ₄` beyond.
    TruncatedPowerLawTop3 { m: usize },
    /// `A θ₁^{rank} / sqrt(rank + offset)` with a bin permutation.
    WeightedGeometric { m: usize, offset: f64 },
    /// `(θ, θ, ½ − 2θ, 1/(2m−6), …)` with `θ ∈ [0, ¼]`.
    Castle { m: usize },
    /// Half the mass uniform over bins `1..=θ`, half over the rest.
    SplitUniform { m: usize },
    /// `(θ₁, θ₁, θ₂, θ₂, (1−2θ₁−2θ₂)/(m−4), …)`.
    TwoFlat { m: usize },
}

/// A family together with fitted parameters and their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedModel {
    pub family: ModelFamily,
    pub params: Params,
    pub probs: ProbabilityVector,
}

fn domain(family: &ModelFamily, reason: impl Into<String>) -> Error {
    Error::Domain {
        family: family.name().into(),
        reason: reason.into(),
    }
}

fn estimation(family: &ModelFamily, reason: impl Into<String>) -> Error {
    Error::Estimation {
        family: family.name().into(),
        reason: reason.into(),
    }
}

impl ModelFamily {
    /// Checks the structural constants.
    pub fn validate(&self) -> Result<()> {
        let need = |min: usize, got: usize| {
            if got < min {
                Err(domain(self, format!("needs at least {min} bins, got {got}")))
            } else {
                Ok(())
            }
        };
        match self {
            ModelFamily::FullySpecified(_) => Ok(()),
            ModelFamily::ZipfPermutation { m }
            | ModelFamily::ZipfExponent { m }
            | ModelFamily::TruncatedPoisson { m, .. } => need(1, *m),
            ModelFamily::RebinnedGeometric { m } | ModelFamily::SplitUniform { m } => need(2, *m),
            ModelFamily::HardyWeinberg { k } => need(1, *k),
            ModelFamily::Symmetry { r } => need(1, *r),
            ModelFamily::TruncatedPowerLawTop3 { m } | ModelFamily::Castle { m } => need(4, *m),
            ModelFamily::TwoFlat { m } => need(5, *m),
            ModelFamily::WeightedGeometric { m, offset } => {
                need(1, *m)?;
                if !(offset.is_finite() && *offset > -1.0) {
                    return Err(domain(self, format!("offset {offset} must exceed -1")));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::FullySpecified(_) => "fully-specified",
            ModelFamily::ZipfPermutation { .. } => "zipf-perm",
            ModelFamily::ZipfExponent { .. } => "zipf-exp",
            ModelFamily::RebinnedGeometric { .. } => "geom-rebinned",
            ModelFamily::TruncatedPoisson { .. } => "poisson-trunc",
            ModelFamily::HardyWeinberg { .. } => "hardy-weinberg",
            ModelFamily::Symmetry { .. } => "symmetry",
            ModelFamily::TruncatedPowerLawTop3 { .. } => "powerlaw-top3",
            ModelFamily::WeightedGeometric { .. } => "weighted-geom",
            ModelFamily::Castle { .. } => "castle",
            ModelFamily::SplitUniform { .. } => "split-uniform",
            ModelFamily::TwoFlat { .. } => "two-flat",
        }
    }

    /// Number of bins (cells) the family is defined over.
    pub fn bins(&self) -> usize {
        match self {
            ModelFamily::FullySpecified(p) => p.len(),
            ModelFamily::HardyWeinberg { k } => k * (k + 1) / 2,
            ModelFamily::Symmetry { r } => r * r,
            ModelFamily::ZipfPermutation { m }
            | ModelFamily::ZipfExponent { m }
            | ModelFamily::RebinnedGeometric { m }
            | ModelFamily::TruncatedPoisson { m, .. }
            | ModelFamily::TruncatedPowerLawTop3 { m }
            | ModelFamily::WeightedGeometric { m, .. }
            | ModelFamily::Castle { m }
            | ModelFamily::SplitUniform { m }
            | ModelFamily::TwoFlat { m } => *m,
        }
    }

    /// `false` only for [`ModelFamily::FullySpecified`].
    pub fn is_parametric(&self) -> bool {
        !matches!(self, ModelFamily::FullySpecified(_))
    }

    /// The model distribution `p₀(θ)`.
    pub fn probabilities(&self, params: &Params) -> Result<ProbabilityVector> {
        self.validate()?;
        let bad = || domain(self, format!("parameters {params:?} have the wrong shape"));
        match (self, params) {
            (ModelFamily::FullySpecified(p), Params::None) => Ok(p.clone()),
            (ModelFamily::ZipfPermutation { m }, Params::Perm(perm)) => {
                self.check_perm(perm, *m)?;
                let c1 = 1.0 / compensated_sum((1..=*m).map(|j| 1.0 / j as f64));
                ProbabilityVector::from_weights(
                    perm.ranks().iter().map(|&r| c1 / r as f64).collect(),
                )
            }
            (ModelFamily::ZipfExponent { m }, Params::Reals(v)) if v.len() == 1 => {
                let theta = v[0];
                if theta.is_nan() || theta.abs() > MAX_EXPONENT {
                    return Err(domain(self, format!("exponent {theta} outside [-{MAX_EXPONENT}, {MAX_EXPONENT}]")));
                }
                let lw: Vec<f64> = (1..=*m).map(|j| -theta * (j as f64).ln()).collect();
                ProbabilityVector::from_log_weights(&lw)
            }
            (ModelFamily::RebinnedGeometric { m }, Params::Reals(v)) if v.len() == 1 => {
                let theta = v[0];
                if !(0.0..=1.0).contains(&theta) {
                    return Err(domain(self, format!("θ = {theta} outside [0, 1]")));
                }
                let mut w: Vec<f64> = (0..*m - 1)
                    .map(|j| theta.powi(j as i32) * (1.0 - theta))
                    .collect();
                w.push(theta.powi(*m as i32 - 1));
                ProbabilityVector::from_weights(w)
            }
            (ModelFamily::TruncatedPoisson { m, .. }, Params::Reals(v)) if v.len() == 1 => {
                let theta = v[0];
                if !(0.0..=MAX_POISSON_MEAN).contains(&theta) {
                    return Err(domain(self, format!("mean {theta} outside [0, {MAX_POISSON_MEAN}]")));
                }
                if theta == 0.0 {
                    let mut p = vec![0.0; *m];
                    p[0] = 1.0;
                    return ProbabilityVector::new(p);
                }
                let (lw, t) = poisson_terms(*m);
                let eta = theta.ln();
                let logs: Vec<f64> = lw.iter().zip(&t).map(|(a, b)| a + eta * b).collect();
                ProbabilityVector::from_log_weights(&logs)
            }
            (ModelFamily::HardyWeinberg { k }, Params::Reals(theta)) if theta.len() == *k => {
                check_simplex(self, theta)?;
                let mut p = Vec::with_capacity(self.bins());
                for j in 0..*k {
                    for l in 0..=j {
                        p.push(if j == l {
                            theta[j] * theta[j]
                        } else {
                            2.0 * theta[j] * theta[l]
                        });
                    }
                }
                ProbabilityVector::from_weights(p)
            }
            (ModelFamily::Symmetry { r }, Params::Reals(cells)) if cells.len() == r * r => {
                check_simplex(self, cells)?;
                for j in 0..*r {
                    for l in 0..j {
                        if cells[j * r + l] != cells[l * r + j] {
                            return Err(domain(self, format!("cells ({}, {}) and ({}, {}) differ", j + 1, l + 1, l + 1, j + 1)));
                        }
                    }
                }
                ProbabilityVector::from_weights(cells.clone())
            }
            (ModelFamily::TruncatedPowerLawTop3 { m }, Params::Mixed { perm, reals })
                if reals.len() == 4 =>
            {
                self.check_perm(perm, *m)?;
                let head = &reals[..3];
                let exponent = reals[3];
                let tail_mass = 1.0 - head.iter().sum::<f64>();
                if head.iter().any(|&t| !(0.0..=1.0).contains(&t)) || tail_mass < -1e-12 {
                    return Err(domain(self, format!("head probabilities {head:?} are not sub-stochastic")));
                }
                if !(0.0..=MAX_EXPONENT).contains(&exponent) {
                    return Err(domain(self, format!("exponent {exponent} outside [0, {MAX_EXPONENT}]")));
                }
                let tail_mass = tail_mass.max(0.0);
                let norm = compensated_sum((4..=*m).map(|r| (r as f64).powf(-exponent)));
                let c = tail_mass / norm;
                let p = perm
                    .ranks()
                    .iter()
                    .map(|&r| if r <= 3 { head[r - 1] } else { c * (r as f64).powf(-exponent) })
                    .collect();
                ProbabilityVector::from_weights(p)
            }
            (ModelFamily::WeightedGeometric { m, offset }, Params::Mixed { perm, reals })
                if reals.len() == 1 =>
            {
                self.check_perm(perm, *m)?;
                let theta = reals[0];
                if !(0.0..=1.0).contains(&theta) {
                    return Err(domain(self, format!("θ₁ = {theta} outside [0, 1]")));
                }
                if theta == 0.0 {
                    return ProbabilityVector::new(
                        perm.ranks().iter().map(|&r| if r == 1 { 1.0 } else { 0.0 }).collect(),
                    );
                }
                let eta = theta.ln();
                let logs: Vec<f64> = perm
                    .ranks()
                    .iter()
                    .map(|&r| eta * r as f64 - 0.5 * (r as f64 + offset).ln())
                    .collect();
                ProbabilityVector::from_log_weights(&logs)
            }
            (ModelFamily::Castle { m }, Params::Reals(v)) if v.len() == 1 => {
                let theta = v[0];
                if !(0.0..=0.25).contains(&theta) {
                    return Err(domain(self, format!("θ = {theta} outside [0, 1/4]")));
                }
                let mut p = vec![theta, theta, 0.5 - 2.0 * theta];
                p.extend(std::iter::repeat_n(1.0 / (2 * m - 6) as f64, m - 3));
                ProbabilityVector::from_weights(p)
            }
            (ModelFamily::SplitUniform { m }, Params::Int(theta)) => {
                let theta = *theta as usize;
                if theta < 1 || theta >= *m {
                    return Err(domain(self, format!("θ = {theta} outside 1..={}", m - 1)));
                }
                let head = 1.0 / (2 * theta) as f64;
                let tail = 1.0 / (2 * (m - theta)) as f64;
                ProbabilityVector::from_weights(
                    (1..=*m).map(|j| if j <= theta { head } else { tail }).collect(),
                )
            }
            (ModelFamily::TwoFlat { m }, Params::Reals(v)) if v.len() == 2 => {
                let (t1, t2) = (v[0], v[1]);
                let rest = 1.0 - 2.0 * t1 - 2.0 * t2;
                if t1 < 0.0 || t2 < 0.0 || rest < -1e-12 {
                    return Err(domain(self, format!("(θ₁, θ₂) = ({t1}, {t2}) violates 2θ₁ + 2θ₂ ≤ 1")));
                }
                let mut p = vec![t1, t1, t2, t2];
                p.extend(std::iter::repeat_n(rest.max(0.0) / (m - 4) as f64, m - 4));
                ProbabilityVector::from_weights(p)
            }
            _ => Err(bad()),
        }
    }

    fn check_perm(&self, perm: &Permutation, m: usize) -> Result<()> {
        if perm.len() != m {
            return Err(domain(self, format!("permutation has {} entries, expected {m}", perm.len())));
        }
        Ok(())
    }

    /// Maximum-likelihood parameters for `obs`.
    pub fn fit(&self, obs: &CountVector) -> Result<Params> {
        self.validate()?;
        if obs.len() != self.bins() {
            return Err(Error::Dimension {
                expected: self.bins(),
                actual: obs.len(),
            });
        }
        if obs.total() == 0 {
            return Err(Error::InvalidInput(format!(
                "cannot fit {} to zero draws",
                self.name()
            )));
        }
        let counts = obs.counts();
        let n = obs.total() as f64;
        match self {
            ModelFamily::FullySpecified(_) => Ok(Params::None),
            ModelFamily::ZipfPermutation { .. } => Ok(Params::Perm(sort_permutation(obs))),
            ModelFamily::ZipfExponent { m } => {
                let t: Vec<f64> = (1..=*m).map(|j| -(j as f64).ln()).collect();
                let lw = vec![0.0; *m];
                let target = expfam::target_mean(counts, &t);
                let theta = expfam::solve_moment_equation(&lw, &t, target, -MAX_EXPONENT, MAX_EXPONENT, 1.0)
                    .map_err(|e| estimation(self, e))?;
                Ok(Params::Reals(vec![theta]))
            }
            ModelFamily::RebinnedGeometric { m } => {
                let last = m - 1;
                let mut tt = 0.0;
                let mut head = 0.0;
                for (j, &c) in counts.iter().enumerate() {
                    tt += j as f64 * c as f64;
                    if j < last {
                        head += c as f64;
                    }
                }
                Ok(Params::Reals(vec![tt / (tt + head)]))
            }
            ModelFamily::TruncatedPoisson { m, mean } => {
                let (lw, t) = poisson_terms(*m);
                let target = expfam::target_mean(counts, &t);
                if target == 0.0 {
                    return Ok(Params::Reals(vec![0.0]));
                }
                if *mean == PoissonMean::SampleMean {
                    return Ok(Params::Reals(vec![target.min(MAX_POISSON_MEAN)]));
                }
                let eta = expfam::solve_moment_equation(
                    &lw,
                    &t,
                    target,
                    MIN_POSITIVE.ln(),
                    MAX_POISSON_MEAN.ln(),
                    target.ln(),
                )
                .map_err(|e| estimation(self, e))?;
                Ok(Params::Reals(vec![eta.exp().min(MAX_POISSON_MEAN)]))
            }
            ModelFamily::HardyWeinberg { k } => {
                let mut alleles = vec![0.0; *k];
                let mut idx = 0;
                for j in 0..*k {
                    for l in 0..=j {
                        let c = counts[idx] as f64;
                        alleles[j] += c;
                        alleles[l] += c;
                        idx += 1;
                    }
                }
                Ok(Params::Reals(alleles.into_iter().map(|a| a / (2.0 * n)).collect()))
            }
            ModelFamily::Symmetry { r } => {
                let mut cells = vec![0.0; r * r];
                for j in 0..*r {
                    for l in 0..*r {
                        cells[j * r + l] =
                            (counts[j * r + l] + counts[l * r + j]) as f64 / (2.0 * n);
                    }
                }
                Ok(Params::Reals(cells))
            }
            ModelFamily::TruncatedPowerLawTop3 { m } => {
                let perm = sort_permutation(obs);
                let sorted = sorted_counts(obs, &perm);
                let mut reals: Vec<f64> = sorted[..3].iter().map(|&c| c as f64 / n).collect();
                let tail = &sorted[3..];
                let exponent = if tail.iter().all(|&c| c == 0) {
                    // Flat likelihood: the tail carries no mass.
                    1.0
                } else {
                    let t: Vec<f64> = (4..=*m).map(|r| -(r as f64).ln()).collect();
                    let lw = vec![0.0; t.len()];
                    let target = expfam::target_mean(tail, &t);
                    expfam::solve_moment_equation(&lw, &t, target, 0.0, MAX_EXPONENT, 1.0)
                        .map_err(|e| estimation(self, e))?
                };
                reals.push(exponent);
                Ok(Params::Mixed { perm, reals })
            }
            ModelFamily::WeightedGeometric { m, offset } => {
                let perm = sort_permutation(obs);
                let sorted = sorted_counts(obs, &perm);
                let t: Vec<f64> = (1..=*m).map(|r| r as f64).collect();
                let lw: Vec<f64> = (1..=*m).map(|r| -0.5 * (r as f64 + offset).ln()).collect();
                let target = expfam::target_mean(&sorted, &t);
                let theta = if target <= 1.0 {
                    0.0
                } else {
                    expfam::solve_moment_equation(&lw, &t, target, MIN_POSITIVE.ln(), 0.0, -0.1)
                        .map_err(|e| estimation(self, e))?
                        .exp()
                        .min(1.0)
                };
                Ok(Params::Mixed {
                    perm,
                    reals: vec![theta],
                })
            }
            ModelFamily::Castle { .. } => {
                let head = (counts[0] + counts[1]) as f64;
                let third = counts[2] as f64;
                let theta = if head + third == 0.0 {
                    // Flat likelihood; equalize the first three bins.
                    1.0 / 6.0
                } else {
                    (head / (4.0 * (head + third))).clamp(0.0, 0.25)
                };
                Ok(Params::Reals(vec![theta]))
            }
            ModelFamily::SplitUniform { m } => {
                let mut best = (f64::NEG_INFINITY, 1u64);
                let mut prefix = 0u64;
                for theta in 1..*m {
                    prefix += counts[theta - 1];
                    let suffix = obs.total() - prefix;
                    let mut ll = 0.0;
                    if prefix > 0 {
                        ll -= prefix as f64 * (2.0 * theta as f64).ln();
                    }
                    if suffix > 0 {
                        ll -= suffix as f64 * (2.0 * (m - theta) as f64).ln();
                    }
                    if ll > best.0 {
                        best = (ll, theta as u64);
                    }
                }
                Ok(Params::Int(best.1))
            }
            ModelFamily::TwoFlat { .. } => {
                let t1 = (counts[0] + counts[1]) as f64 / (2.0 * n);
                let t2 = (counts[2] + counts[3]) as f64 / (2.0 * n);
                Ok(Params::Reals(vec![t1, t2]))
            }
        }
    }

    /// `Σ cⱼ ln pⱼ(θ)`, without the multinomial coefficient.
    pub fn log_likelihood(&self, obs: &CountVector, params: &Params) -> Result<f64> {
        let p = self.probabilities(params)?;
        if p.len() != obs.len() {
            return Err(Error::Dimension {
                expected: p.len(),
                actual: obs.len(),
            });
        }
        let mut acc = crate::stats::CompensatedSum::default();
        for (&c, &pj) in obs.counts().iter().zip(p.probs()) {
            if c > 0 {
                if pj == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                acc.add(c as f64 * pj.ln());
            }
        }
        Ok(acc.value())
    }

    /// Fit and build the fitted model in one step.
    pub fn fit_model(&self, obs: &CountVector) -> Result<FittedModel> {
        let params = self.fit(obs)?;
        let probs = self.probabilities(&params)?;
        Ok(FittedModel {
            family: self.clone(),
            params,
            probs,
        })
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFamily::FullySpecified(p) => write!(f, "fully-specified{{m={}}}", p.len()),
            ModelFamily::HardyWeinberg { k } => write!(f, "hardy-weinberg{{k={k}}}"),
            ModelFamily::Symmetry { r } => write!(f, "symmetry{{r={r}}}"),
            ModelFamily::TruncatedPoisson { m, mean } => match mean {
                PoissonMean::TruncatedMle => write!(f, "poisson-trunc{{m={m}}}"),
                PoissonMean::SampleMean => write!(f, "poisson-trunc{{m={m},mean=sample}}"),
            },
            ModelFamily::WeightedGeometric { m, offset } => {
                write!(f, "weighted-geom{{m={m},offset={offset}}}")
            }
            other => write!(f, "{}{{m={}}}", other.name(), other.bins()),
        }
    }
}

fn check_simplex(family: &ModelFamily, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(domain(family, "entries must lie in [0, 1]"));
    }
    let s = compensated_sum(v.iter().copied());
    if (s - 1.0).abs() > 1e-9 {
        return Err(domain(family, format!("entries sum to {s}, not 1")));
    }
    Ok(())
}

/// Log-weights `−ln (j−1)!` and statistics `j − 1` of the Poisson family.
fn poisson_terms(m: usize) -> (Vec<f64>, Vec<f64>) {
    let lw = (0..m as u64).map(|k| -ln_factorial(k)).collect();
    let t = (0..m).map(|k| k as f64).collect();
    (lw, t)
}

/// Counts in rank order under `perm`.
fn sorted_counts(obs: &CountVector, perm: &Permutation) -> Vec<u64> {
    perm.bins_by_rank()
        .into_iter()
        .map(|bin| obs.counts()[bin])
        .collect()
}
