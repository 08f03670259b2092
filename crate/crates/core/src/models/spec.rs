//! Text grammar for model families and fixed distributions.
//!
//! ```text
//! spec   := name [ "{" [ entry ( "," entry )* ] "}" ]
//! entry  := key "=" value ( "," value )*      values without "=" extend the
//!                                              previous key's list
//! value  := number | word | "@" path          "@path" reads a count/probability
//!                                              list from a file
//! ```
//!
//! Examples: `zipf-perm{m=7500}`, `poisson-trunc{m=16}`,
//! `fully-specified{probs=0.25,0.25,0.5}`, `fully-specified{probs=@p.txt}`,
//! `castle{m=8,theta=0.2}` (a parameter value freezes the family into a fixed
//! distribution).

use std::collections::BTreeMap;

use super::{named, ModelFamily, Params, PoissonMean};
use crate::error::{Error, Result};
use crate::stats::ProbabilityVector;

struct Parsed {
    spec: String,
    name: String,
    entries: BTreeMap<String, Vec<String>>,
}

impl Parsed {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Spec {
            spec: self.spec.clone(),
            reason: reason.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.first()).map(String::as_str)
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| self.err(format!("`{key}` must be a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    fn req_usize(&self, key: &str) -> Result<usize> {
        self.usize(key)?
            .ok_or_else(|| self.err(format!("missing required key `{key}`")))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.err(format!("`{key}` must be a finite number, got `{v}`")))
            })
            .transpose()
    }

    fn req_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| self.err(format!("missing required key `{key}`")))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(self.err(format!(
                    "unknown key `{key}` for `{}` (allowed: {})",
                    self.name,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let values = self
            .entries
            .get(key)
            .ok_or_else(|| self.err(format!("missing required key `{key}`")))?;
        if let [single] = values.as_slice() {
            if let Some(path) = single.strip_prefix('@') {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| self.err(format!("cannot read `{path}`: {e}")))?;
                return text
                    .lines()
                    .map(|l| l.split('#').next().unwrap_or(""))
                    .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| self.err(format!("`{t}` in `{path}` is not a number")))
                    })
                    .collect();
            }
        }
        values
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| self.err(format!("`{v}` is not a number")))
            })
            .collect()
    }
}

fn parse(spec: &str) -> Result<Parsed> {
    let spec = spec.trim();
    let err = |reason: &str| Error::Spec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (name, body) = match spec.find('{') {
        Some(open) => {
            let body = spec[open + 1..]
                .strip_suffix('}')
                .ok_or_else(|| err("missing closing `}`"))?;
            (&spec[..open], body)
        }
        None => (spec, ""),
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(err("missing family name"));
    }
    let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut last: Option<String> = None;
    for token in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((k, v)) = token.split_once('=') {
            let k = k.trim().to_string();
            if entries.contains_key(&k) {
                return Err(err(&format!("duplicate key `{k}`")));
            }
            entries.insert(k.clone(), vec![v.trim().to_string()]);
            last = Some(k);
        } else if let Some(k) = &last {
            entries.get_mut(k).expect("key inserted").push(token.to_string());
        } else {
            return Err(err(&format!("value `{token}` has no key")));
        }
    }
    Ok(Parsed {
        spec: spec.to_string(),
        name: name.to_ascii_lowercase(),
        entries,
    })
}

fn frozen(p: &Parsed, family: ModelFamily, params: Option<Params>) -> Result<ModelFamily> {
    family.validate().map_err(|e| p.err(e.to_string()))?;
    match params {
        None => Ok(family),
        Some(params) => Ok(ModelFamily::FullySpecified(
            family
                .probabilities(&params)
                .map_err(|e| p.err(e.to_string()))?,
        )),
    }
}

fn fixed(p: &Parsed, probs: Result<ProbabilityVector>) -> Result<ModelFamily> {
    probs
        .map(ModelFamily::FullySpecified)
        .map_err(|e| p.err(e.to_string()))
}

/// Parse a model family (possibly a fixed distribution).
pub fn parse_family(spec: &str) -> Result<ModelFamily> {
    let p = parse(spec)?;
    let one = |key: &str| -> Result<Option<Params>> { Ok(p.f64(key)?.map(|t| Params::Reals(vec![t]))) };
    match p.name.as_str() {
        "fully-specified" => {
            p.check_keys(&["probs"])?;
            let probs = p.list("probs")?;
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(p.err(format!("probabilities sum to {total}, not 1")));
            }
            fixed(&p, ProbabilityVector::from_weights(probs))
        }
        "synth" => {
            p.check_keys(&["m"])?;
            fixed(&p, named::synth(p.req_usize("m")?))
        }
        "synth-alt" => {
            p.check_keys(&["m"])?;
            fixed(&p, named::synth_alt(p.req_usize("m")?))
        }
        "zipf" => {
            p.check_keys(&["m", "s"])?;
            fixed(&p, named::zipf(p.req_usize("m")?, p.f64("s")?.unwrap_or(1.0)))
        }
        "geometric" => {
            p.check_keys(&["m", "t"])?;
            fixed(&p, named::geometric(p.req_usize("m")?, p.req_f64("t")?))
        }
        "poisson" => {
            p.check_keys(&["m", "mean"])?;
            fixed(&p, named::poisson(p.req_usize("m")?, p.req_f64("mean")?))
        }
        "shifted-poisson" => {
            p.check_keys(&["m", "mean", "t"])?;
            fixed(
                &p,
                named::shifted_poisson(
                    p.req_usize("m")?,
                    p.f64("mean")?.unwrap_or(5.0),
                    p.req_f64("t")?,
                ),
            )
        }
        "poisson-bump" => {
            p.check_keys(&["m"])?;
            fixed(&p, named::poisson_bump(p.req_usize("m")?))
        }
        "castle-alt" => {
            p.check_keys(&["m"])?;
            fixed(&p, named::castle_alt(p.req_usize("m")?))
        }
        "split-alt" => {
            p.check_keys(&["m"])?;
            fixed(&p, named::split_alt(p.req_usize("m")?))
        }
        "two-alt" => {
            p.check_keys(&["m"])?;
            fixed(&p, named::two_alt(p.req_usize("m")?))
        }
        "zipf-perm" => {
            p.check_keys(&["m"])?;
            frozen(&p, ModelFamily::ZipfPermutation { m: p.req_usize("m")? }, None)
        }
        "zipf-exp" => {
            p.check_keys(&["m", "theta"])?;
            frozen(&p, ModelFamily::ZipfExponent { m: p.usize("m")?.unwrap_or(100) }, one("theta")?)
        }
        "geom-rebinned" => {
            p.check_keys(&["m", "theta"])?;
            frozen(
                &p,
                ModelFamily::RebinnedGeometric { m: p.usize("m")?.unwrap_or(100) },
                one("theta")?,
            )
        }
        "poisson-trunc" => {
            p.check_keys(&["m", "mean", "theta"])?;
            let mean = match p.raw("mean") {
                None | Some("mle") => PoissonMean::TruncatedMle,
                Some("sample") => PoissonMean::SampleMean,
                Some(other) => return Err(p.err(format!("`mean` must be `mle` or `sample`, got `{other}`"))),
            };
            frozen(&p, ModelFamily::TruncatedPoisson { m: p.req_usize("m")?, mean }, one("theta")?)
        }
        "hardy-weinberg" => {
            p.check_keys(&["k"])?;
            frozen(&p, ModelFamily::HardyWeinberg { k: p.req_usize("k")? }, None)
        }
        "symmetry" => {
            p.check_keys(&["r"])?;
            frozen(&p, ModelFamily::Symmetry { r: p.req_usize("r")? }, None)
        }
        "powerlaw-top3" => {
            p.check_keys(&["m"])?;
            frozen(&p, ModelFamily::TruncatedPowerLawTop3 { m: p.req_usize("m")? }, None)
        }
        "weighted-geom" => {
            p.check_keys(&["m", "offset"])?;
            frozen(
                &p,
                ModelFamily::WeightedGeometric {
                    m: p.usize("m")?.unwrap_or(217),
                    offset: p.f64("offset")?.unwrap_or(23.0),
                },
                None,
            )
        }
        "castle" => {
            p.check_keys(&["m", "theta"])?;
            frozen(&p, ModelFamily::Castle { m: p.req_usize("m")? }, one("theta")?)
        }
        "split-uniform" => {
            p.check_keys(&["m", "theta"])?;
            let theta = p.usize("theta")?.map(|t| Params::Int(t as u64));
            frozen(&p, ModelFamily::SplitUniform { m: p.req_usize("m")? }, theta)
        }
        "two-flat" => {
            p.check_keys(&["m", "theta1", "theta2"])?;
            let params = match (p.f64("theta1")?, p.f64("theta2")?) {
                (Some(a), Some(b)) => Some(Params::Reals(vec![a, b])),
                (None, None) => None,
                _ => return Err(p.err("give both `theta1` and `theta2` or neither")),
            };
            frozen(&p, ModelFamily::TwoFlat { m: p.req_usize("m")? }, params)
        }
        other => Err(p.err(format!("unknown family `{other}`"))),
    }
}

/// Parse a spec that must resolve to a fixed distribution.
pub fn parse_distribution(spec: &str) -> Result<ProbabilityVector> {
    match parse_family(spec)? {
        ModelFamily::FullySpecified(p) => Ok(p),
        other => Err(Error::Spec {
            spec: spec.to_string(),
            reason: format!("`{}` has free parameters; fix them to get a distribution", other.name()),
        }),
    }
}
