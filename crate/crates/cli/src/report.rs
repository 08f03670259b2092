use std::fmt::Write as _;
use std::time::Instant;

use gof_core::datasets::Shape;
use gof_core::models::parse_family;
use gof_core::pvalue::{p_value, TestConfig, TestResult};
use gof_core::{Params, Seed};
use serde::Serialize;

use crate::{emit, parse_kinds, resolve_dataset, usage, CliResult, Outcome, TestArgs};

pub const REPORT_VERSION: u32 = 1;

const SUBSAMPLE_TAG: u64 = 0x7375_6273;

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub reference: String,
    pub name: String,
    /// Checksum of the dataset as loaded, before any transform.
    pub checksum: String,
    pub shape: Shape,
    pub transforms: Vec<String>,
    pub bins: usize,
    pub draws: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub spec: String,
    pub family: String,
    pub params: Params,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub kind: String,
    /// Number, or the string "inf".
    pub statistic: serde_json::Value,
    pub p_value: f64,
    pub p_value_smoothed: f64,
    pub std_error: f64,
    pub exceed_count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub version: u32,
    pub command: Vec<String>,
    pub seed: u64,
    pub sims: u64,
    pub dataset: DatasetInfo,
    pub model: ModelInfo,
    pub retries: u64,
    pub results: Vec<KindReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

fn stat_value(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!("inf")
    }
}

impl TestReport {
    fn new(command: Vec<String>, dataset: DatasetInfo, spec: &str, r: &TestResult) -> Self {
        Self {
            version: REPORT_VERSION,
            command,
            seed: r.seed.0,
            sims: r.num_sims,
            dataset,
            model: ModelInfo {
                spec: spec.to_string(),
                family: r.family.to_string(),
                params: r.params.clone(),
            },
            retries: r.retries,
            results: r
                .results
                .iter()
                .map(|k| KindReport {
                    kind: k.kind.name().to_string(),
                    statistic: stat_value(k.observed),
                    p_value: k.p_value,
                    p_value_smoothed: k.p_value_smoothed,
                    std_error: k.std_error,
                    exceed_count: k.exceed_count,
                })
                .collect(),
            wall_time_s: None,
        }
    }

    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .results
            .iter()
            .map(|k| format!("{} p={:.4} (se {:.4})", k.kind, k.p_value, k.std_error))
            .collect();
        format!(
            "{} ~ {} [n={}, sims={}, seed={}]: {}",
            self.dataset.name,
            self.model.family,
            self.dataset.draws,
            self.sims,
            self.seed,
            parts.join(", ")
        )
    }

    fn text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "data    {} ({} draws in {} bins)", self.dataset.name, self.dataset.draws, self.dataset.bins).unwrap();
        writeln!(s, "model   {}", self.model.family).unwrap();
        writeln!(s, "sims    {} (seed {})", self.sims, self.seed).unwrap();
        writeln!(s, "{:<14} {:>16} {:>10} {:>10} {:>10}", "statistic", "value", "p", "p+1", "se").unwrap();
        for k in &self.results {
            let v = match &k.statistic {
                serde_json::Value::Number(n) => format!("{:.6}", n.as_f64().unwrap_or(f64::NAN)),
                other => other.as_str().unwrap_or("?").to_string(),
            };
            writeln!(
                s,
                "{:<14} {:>16} {:>10.6} {:>10.6} {:>10.6}",
                k.kind, v, k.p_value, k.p_value_smoothed, k.std_error
            )
            .unwrap();
        }
        s
    }
}

pub(crate) fn cmd_test(args: &TestArgs, echo: Vec<String>) -> CliResult<Outcome> {
    let started = Instant::now();
    let kinds = parse_kinds(&args.stats)?;
    let family = parse_family(&args.model)?;
    let loaded = resolve_dataset(&args.data, args.input_format.as_deref())?;
    let mut info = DatasetInfo {
        reference: args.data.clone(),
        name: loaded.name.clone(),
        checksum: loaded.checksum(),
        shape: loaded.shape,
        transforms: Vec::new(),
        bins: 0,
        draws: 0,
    };
    let mut ds = loaded;
    if let Some(k) = args.subsample {
        ds = ds.subsample(k, Seed(args.seed).child(SUBSAMPLE_TAG))?;
        info.transforms.push(format!("subsample {k}"));
    }
    let bins = family.bins();
    if ds.counts.len() != bins && ds.shape == Shape::Vector {
        if ds.counts.len() < bins {
            ds = ds.extend(bins)?;
            info.transforms.push(format!("extend {bins}"));
        } else if args.truncate {
            ds = ds.truncate(bins)?;
            info.transforms.push(format!("truncate {bins}"));
        } else {
            return Err(usage(format!(
                "the data has {} bins but {} has {bins}; pass --truncate to drop the extra bins",
                ds.counts.len(),
                family
            )));
        }
    }
    info.bins = ds.counts.len();
    info.draws = ds.total();
    let format = args.format.as_str();
    if !matches!(format, "json" | "text") {
        return Err(usage(format!("unknown report format `{format}` (json or text)")));
    }
    let config = TestConfig::new(family, &kinds, args.sims, Seed(args.seed))?
        .keep_samples(args.dump_sims.is_some());
    let result = p_value(&ds.counts, &config)?;
    let mut report = TestReport::new(echo, info, &args.model, &result);
    if args.timing {
        report.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    let mut out = Outcome::default();
    if let Some(path) = &args.dump_sims {
        let mut csv = result.results.iter().map(|k| k.kind.name()).collect::<Vec<_>>().join(",");
        csv.push('\n');
        let cols: Vec<&Vec<f64>> = result.results.iter().filter_map(|k| k.samples.as_ref()).collect();
        for i in 0..args.sims as usize {
            let row: Vec<String> = cols.iter().map(|c| format!("{}", c[i])).collect();
            csv += &row.join(",");
            csv.push('\n');
        }
        std::fs::write(path, csv)?;
    }
    let body = if format == "json" {
        let mut s = serde_json::to_string_pretty(&report).map_err(|e| usage(e.to_string()))?;
        s.push('\n');
        s
    } else {
        report.text()
    };
    emit(args.out.as_ref(), body, &mut out)?;
    out.stderr = format!("{}\n", report.summary());
    Ok(out)
}
