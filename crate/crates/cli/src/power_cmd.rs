use std::fmt::Write as _;

use gof_core::models::{parse_distribution, parse_family};
use gof_core::power::{PowerConfig, PowerHarness, SearchGrid};
use gof_core::Seed;
use serde::Serialize;

use crate::{emit, parse_kinds, parse_sweep, substitute, usage, CliResult, Outcome, PowerArgs};

#[derive(Debug, Clone, Serialize)]
struct Row {
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<String>,
    kind: String,
    n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejections: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    capped: Option<bool>,
}

pub(crate) fn cmd_power(args: &PowerArgs, echo: Vec<String>) -> CliResult<Outcome> {
    let kinds = parse_kinds(&args.stats)?;
    let format = args.format.as_str();
    if !matches!(format, "csv" | "json") {
        return Err(usage(format!("unknown sweep format `{format}` (csv or json)")));
    }
    let sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;
    let points: Vec<Option<(String, String)>> = match &sweep {
        Some(s) => s.values.iter().map(|v| Some((s.var.clone(), v.clone()))).collect(),
        None => vec![None],
    };
    let grid = SearchGrid {
        start: args.start,
        granularity: args.granularity,
        cap: args.cap,
    };
    let mut rows = Vec::new();
    let mut out = Outcome::default();
    for point in &points {
        let (model, actual) = match point {
            Some((var, v)) => (substitute(&args.model, var, v), substitute(&args.actual, var, v)),
            None => (args.model.clone(), args.actual.clone()),
        };
        let family = parse_family(&model)?;
        let actual = parse_distribution(&actual)?;
        let config = PowerConfig {
            alpha: args.alpha,
            beta: args.beta,
            sims_null: args.sims_null.unwrap_or(args.sims),
            sims_alt: args.sims_alt.unwrap_or(args.sims),
            calibration_draws: args.calibration,
            ..PowerConfig::new(family, actual, kinds[0], Seed(args.seed))
        };
        let mut harness = PowerHarness::new(&config, &kinds)?;
        let label = point.as_ref().map(|(_, v)| v.clone());
        if let Some(n) = args.n {
            for (kind, cell) in kinds.iter().zip(harness.rates(n)?) {
                rows.push(Row {
                    sweep: label.clone(),
                    kind: kind.name().into(),
                    n: Some(n),
                    rate: Some(cell.rate),
                    rejections: Some(cell.rejections),
                    capped: None,
                });
            }
            continue;
        }
        for &kind in &kinds {
            let r = harness.min_n(kind, args.beta, grid)?;
            if r.capped {
                writeln!(
                    out.stderr,
                    "{}: {kind} did not distinguish the distributions up to n = {}",
                    label.as_deref().map(|v| format!("{}={v}", points_var(&sweep))).unwrap_or_else(|| "power".into()),
                    args.cap
                )
                .unwrap();
            }
            if args.table {
                for cell in &r.table {
                    rows.push(Row {
                        sweep: label.clone(),
                        kind: kind.name().into(),
                        n: Some(cell.n),
                        rate: Some(cell.rate),
                        rejections: Some(cell.rejections),
                        capped: None,
                    });
                }
            } else {
                rows.push(Row {
                    sweep: label.clone(),
                    kind: kind.name().into(),
                    n: r.min_n,
                    rate: None,
                    rejections: None,
                    capped: Some(r.capped),
                });
            }
        }
    }
    let body = if format == "json" {
        #[derive(Serialize)]
        struct Doc<'a> {
            command: &'a [String],
            seed: u64,
            sims_null: u64,
            sims_alt: u64,
            alpha: f64,
            beta: f64,
            sweep_var: Option<String>,
            rows: &'a [Row],
        }
        let doc = Doc {
            command: &echo,
            seed: args.seed,
            sims_null: args.sims_null.unwrap_or(args.sims),
            sims_alt: args.sims_alt.unwrap_or(args.sims),
            alpha: args.alpha,
            beta: args.beta,
            sweep_var: sweep.as_ref().map(|s| s.var.clone()),
            rows: &rows,
        };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| usage(e.to_string()))?;
        s.push('\n');
        s
    } else {
        csv(&echo, sweep.as_ref().map(|s| s.var.as_str()), &rows, args.n.is_some() || args.table)
    };
    emit(args.out.as_ref(), body, &mut out)?;
    Ok(out)
}

fn points_var(sweep: &Option<crate::Sweep>) -> String {
    sweep.as_ref().map(|s| s.var.clone()).unwrap_or_default()
}

fn csv(echo: &[String], var: Option<&str>, rows: &[Row], rates: bool) -> String {
    let mut s = format!("# gof {}\n", echo.join(" "));
    if let Some(v) = var {
        write!(s, "{v},").unwrap();
    }
    s += if rates { "kind,n,rate,rejections\n" } else { "kind,n,capped\n" };
    for r in rows {
        if let Some(v) = &r.sweep {
            write!(s, "{v},").unwrap();
        }
        let n = r.n.map(|n| n.to_string()).unwrap_or_default();
        if rates {
            writeln!(s, "{},{n},{},{}", r.kind, r.rate.unwrap_or(f64::NAN), r.rejections.unwrap_or(0)).unwrap();
        } else {
            writeln!(s, "{},{n},{}", r.kind, r.capped.unwrap_or(false)).unwrap();
        }
    }
    s
}
