//! Detection rates and minimum sample sizes.
//!
//! For a null family and an actual distribution, the harness draws a null
//! sample of `ℓ₀` statistics (full three-step procedure with re-fitting) once
//! per `n`, then draws `ℓ₁` datasets of `n` draws from the actual distribution,
//! fits each, and ranks its statistic against the sorted null sample. The
//! detection rate is the fraction of those P-values at most `alpha`.
//!
//! Parameterized nulls are centred on `θ̂` fitted once to a large calibration
//! sample of the actual distribution.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{ModelFamily, Params};
use crate::pvalue::{score, NullSimulator, TIE_RELATIVE_TOLERANCE};
use crate::sampling::{derive_stream, MultinomialSampler, Seed};
use crate::stats::{CountVector, ProbabilityVector, StatisticKind};

const NULL_TAG: u64 = 0x6e75_6c6c;
const ALT_TAG: u64 = 0x0061_6c74;
const CALIBRATION_TAG: u64 = 0x0063_616c_6962;
const ALT_RETRY_TAG: u64 = 0x616c_7472_6574;
const CHUNK: u64 = 256;

pub const DEFAULT_SIMS: u64 = 4_000;
pub const DEFAULT_CALIBRATION_DRAWS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerConfig {
    /// The null model.
    pub family: ModelFamily,
    /// Distribution the alternative datasets are drawn from.
    pub actual: ProbabilityVector,
    pub kind: StatisticKind,
    pub alpha: f64,
    pub beta: f64,
    pub sims_null: u64,
    pub sims_alt: u64,
    pub seed: Seed,
    pub calibration_draws: u64,
}

impl PowerConfig {
    /// Level 1%, required detection 99%, desk-scale simulation counts.
    pub fn new(family: ModelFamily, actual: ProbabilityVector, kind: StatisticKind, seed: Seed) -> Self {
        Self {
            family,
            actual,
            kind,
            alpha: 0.01,
            beta: 0.99,
            sims_null: DEFAULT_SIMS,
            sims_alt: DEFAULT_SIMS,
            seed,
            calibration_draws: DEFAULT_CALIBRATION_DRAWS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.actual.len() != self.family.bins() {
            return Err(Error::Dimension {
                expected: self.family.bins(),
                actual: self.actual.len(),
            });
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!("{name} = {v} must lie strictly between 0 and 1")));
            }
        }
        if self.sims_null == 0 || self.sims_alt == 0 {
            return Err(Error::InvalidInput("simulation counts must be at least 1".into()));
        }
        if self.family.is_parametric() && self.calibration_draws == 0 {
            return Err(Error::InvalidInput("calibration needs at least one draw".into()));
        }
        Ok(())
    }
}

/// Grid strategy for [`min_draws_to_distinguish`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchGrid {
    pub start: u64,
    pub granularity: u64,
    pub cap: u64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            start: 16,
            granularity: 5,
            cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCell {
    pub n: u64,
    pub rejections: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerResult {
    pub kind: StatisticKind,
    /// Smallest tested `n` whose detection rate reached `beta`.
    pub min_n: Option<u64>,
    /// The search reached the cap without distinguishing.
    pub capped: bool,
    /// Every evaluated `n`, ascending.
    pub table: Vec<RateCell>,
}

/// Shared state for power queries over several statistics and sample sizes.
///
/// Rates are cached per `n`, so searches for different statistics reuse the
/// simulations they have in common.
pub struct PowerHarness {
    family: ModelFamily,
    kinds: Vec<StatisticKind>,
    alpha: f64,
    sims_null: u64,
    sims_alt: u64,
    seed: Seed,
    null_params: Params,
    null_model: ProbabilityVector,
    actual_sampler: MultinomialSampler,
    cache: BTreeMap<u64, Vec<RateCell>>,
}

impl PowerHarness {
    /// Builds the harness, calibrating `θ̂` for parameterized nulls.
    pub fn new(config: &PowerConfig, kinds: &[StatisticKind]) -> Result<Self> {
        config.validate()?;
        if kinds.is_empty() {
            return Err(Error::InvalidInput("at least one statistic is required".into()));
        }
        let actual_sampler = MultinomialSampler::new(&config.actual);
        let null_params = match &config.family {
            ModelFamily::FullySpecified(_) => Params::None,
            family => {
                let mut rng = derive_stream(config.seed.child(CALIBRATION_TAG), 0);
                let sample = actual_sampler.draw(config.calibration_draws, &mut rng);
                family.fit(&sample)?
            }
        };
        let null_model = config.family.probabilities(&null_params)?;
        Ok(Self {
            family: config.family.clone(),
            kinds: kinds.to_vec(),
            alpha: config.alpha,
            sims_null: config.sims_null,
            sims_alt: config.sims_alt,
            seed: config.seed,
            null_params,
            null_model,
            actual_sampler,
            cache: BTreeMap::new(),
        })
    }

    pub fn kinds(&self) -> &[StatisticKind] {
        &self.kinds
    }

    /// `θ̂` the null simulations are drawn from.
    pub fn null_params(&self) -> &Params {
        &self.null_params
    }

    /// Detection rates at `n`, one cell per configured kind.
    pub fn rates(&mut self, n: u64) -> Result<Vec<RateCell>> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if let Some(cells) = self.cache.get(&n) {
            return Ok(cells.clone());
        }
        let cells = self.compute(n)?;
        self.cache.insert(n, cells.clone());
        Ok(cells)
    }

    /// Every evaluated `n` with its rate for `kind`, ascending in `n`.
    pub fn table(&self, kind: StatisticKind) -> Vec<RateCell> {
        let Some(k) = self.kinds.iter().position(|&x| x == kind) else {
            return Vec::new();
        };
        self.cache.values().map(|cells| cells[k]).collect()
    }

    fn compute(&self, n: u64) -> Result<Vec<RateCell>> {
        let kinds = &self.kinds;
        let k = kinds.len();
        let null = NullSimulator::new(
            &self.family,
            &self.null_model,
            kinds,
            n,
            self.seed.child(NULL_TAG).child(n),
        );
        let (mut sample, _) = null.sample(self.sims_null)?;
        for s in &mut sample {
            s.sort_by(f64::total_cmp);
        }
        let l0 = self.sims_null as f64;
        let alpha = self.alpha;
        let alt_seed = self.seed.child(ALT_TAG).child(n);
        let m = self.actual_sampler.bins();
        let rejections = (0..self.sims_alt.div_ceil(CHUNK))
            .into_par_iter()
            .map(|b| {
                let lo = b * CHUNK;
                let hi = (lo + CHUNK).min(self.sims_alt);
                let mut counts = vec![0u64; m];
                let mut stats = vec![0.0; k];
                let mut rej = vec![0u64; k];
                for i in lo..hi {
                    self.alternative(alt_seed, i, n, &mut counts, &mut stats)?;
                    for ((r, &s), sorted) in rej.iter_mut().zip(&stats).zip(&sample) {
                        if exceed_count(sorted, s) as f64 / l0 <= alpha {
                            *r += 1;
                        }
                    }
                }
                Ok(rej)
            })
            .try_reduce(
                || vec![0u64; k],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    Ok(a)
                },
            )?;
        Ok(rejections
            .into_iter()
            .map(|r| RateCell {
                n,
                rejections: r,
                rate: r as f64 / self.sims_alt as f64,
            })
            .collect())
    }

    fn alternative(&self, seed: Seed, index: u64, n: u64, counts: &mut [u64], stats: &mut [f64]) -> Result<()> {
        let mut retry = 0u64;
        loop {
            let mut rng = if retry == 0 {
                derive_stream(seed, index)
            } else {
                derive_stream(seed.child(ALT_RETRY_TAG.wrapping_add(retry)), index)
            };
            self.actual_sampler.draw_into(n, &mut rng, counts);
            match score(&self.family, &CountVector::new(counts.to_vec())?, &self.kinds, stats) {
                Ok(()) => return Ok(()),
                Err(Error::Estimation { .. }) if retry < crate::pvalue::MAX_RETRIES as u64 => retry += 1,
                Err(e) => return Err(e),
            }
        }
    }

    /// Doubling from `grid.start` until the rate for `kind` reaches `beta`,
    /// then bisection down to `grid.granularity`.
    pub fn min_n(&mut self, kind: StatisticKind, beta: f64, grid: SearchGrid) -> Result<PowerResult> {
        let Some(k) = self.kinds.iter().position(|&x| x == kind) else {
            return Err(Error::InvalidInput(format!("{kind} is not among the harness statistics")));
        };
        if grid.start == 0 || grid.granularity == 0 || grid.cap < grid.start {
            return Err(Error::InvalidInput(format!("bad search grid {grid:?}")));
        }
        let hits = |cells: &[RateCell]| cells[k].rate >= beta;
        let mut lo = 0u64;
        let mut n = grid.start;
        let hi = loop {
            if hits(&self.rates(n)?) {
                break n;
            }
            lo = n;
            if n >= grid.cap {
                return Ok(PowerResult {
                    kind,
                    min_n: None,
                    capped: true,
                    table: self.table(kind),
                });
            }
            n = n.saturating_mul(2).min(grid.cap);
        };
        let mut hi = hi;
        while hi - lo > grid.granularity {
            let mid = lo + (hi - lo) / 2;
            if hits(&self.rates(mid)?) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(PowerResult {
            kind,
            min_n: Some(hi),
            capped: false,
            table: self.table(kind),
        })
    }
}

/// Number of entries of ascending `sorted` that are at least `stat`.
pub fn exceed_count(sorted: &[f64], stat: f64) -> usize {
    let threshold = if stat.is_finite() {
        stat - TIE_RELATIVE_TOLERANCE * stat.abs()
    } else {
        stat
    };
    sorted.len() - sorted.partition_point(|&x| x < threshold)
}

pub fn detection_rate(config: &PowerConfig, n: u64) -> Result<f64> {
    let mut h = PowerHarness::new(config, &[config.kind])?;
    Ok(h.rates(n)?[0].rate)
}

pub fn min_draws_to_distinguish(config: &PowerConfig, grid: SearchGrid) -> Result<PowerResult> {
    let mut h = PowerHarness::new(config, &[config.kind])?;
    h.min_n(config.kind, config.beta, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::named;

    #[test]
    fn exceed_count_edges() {
        let s = [0.5, 1.0, 2.0, f64::INFINITY];
        assert_eq!(exceed_count(&s, 1.0), 3);
        assert_eq!(exceed_count(&s, 0.0), 4);
        assert_eq!(exceed_count(&s, 3.0), 1);
        assert_eq!(exceed_count(&s, f64::INFINITY), 1);
        assert_eq!(exceed_count(&s[..3], f64::INFINITY), 0);
    }

    #[test]
    fn config_validation() {
        let model = named::synth(8).unwrap();
        let mut c = PowerConfig::new(ModelFamily::FullySpecified(model.clone()), model, StatisticKind::Rms, Seed(1));
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        c.alpha = 0.01;
        c.actual = named::synth(9).unwrap();
        assert!(matches!(c.validate(), Err(Error::Dimension { .. })));
    }

    #[test]
    fn rates_are_reproducible() {
        let model = named::synth(16).unwrap();
        let mut c = PowerConfig::new(
            ModelFamily::FullySpecified(model),
            named::synth_alt(16).unwrap(),
            StatisticKind::Rms,
            Seed(7),
        );
        c.sims_null = 500;
        c.sims_alt = 500;
        let a = detection_rate(&c, 100).unwrap();
        let b = detection_rate(&c, 100).unwrap();
        assert_eq!(a, b);
        assert!((a * 500.0).fract() == 0.0);
    }

    #[test]
    fn identical_distributions_hit_the_cap() {
        let model = named::synth(8).unwrap();
        let mut c = PowerConfig::new(ModelFamily::FullySpecified(model.clone()), model, StatisticKind::Chi2, Seed(2));
        c.sims_null = 300;
        c.sims_alt = 300;
        let r = min_draws_to_distinguish(&c, SearchGrid { start: 16, granularity: 5, cap: 4096 }).unwrap();
        assert!(r.capped);
        assert_eq!(r.min_n, None);
        assert_eq!(r.table.last().unwrap().n, 4096);
    }

    #[test]
    fn parameterized_null_is_calibrated() {
        let c = PowerConfig {
            calibration_draws: 100_000,
            ..PowerConfig::new(
                ModelFamily::ZipfExponent { m: 20 },
                named::zipf(20, 1.0).unwrap(),
                StatisticKind::Rms,
                Seed(3),
            )
        };
        let h = PowerHarness::new(&c, &[StatisticKind::Rms]).unwrap();
        match h.null_params() {
            Params::Reals(v) => assert!((v[0] - 1.0).abs() < 0.02, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }
}
