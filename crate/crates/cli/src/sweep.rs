use crate::{usage, CliResult};

/// A sweep variable and its values, kept as text so substitution into specs
/// is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: String,
    pub values: Vec<String>,
}

fn fmt_value(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('e') {
        format!("{v:.12}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `var=v1,v2,…`, `var=a..b*f` (geometric) or `var=a..b+s` (arithmetic);
/// ranges include `b` when it is hit within rounding.
pub fn parse_sweep(s: &str) -> CliResult<Sweep> {
    let (var, rhs) = s
        .split_once('=')
        .ok_or_else(|| usage(format!("sweep `{s}` must look like `m=16,32,64`")))?;
    let var = var.trim();
    if var.is_empty() || !var.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(usage(format!("bad sweep variable `{var}`")));
    }
    let rhs = rhs.trim();
    let values = if let Some((a, rest)) = rhs.split_once("..") {
        let (b, op, step) = if let Some((b, f)) = rest.split_once('*') {
            (b, '*', f)
        } else if let Some((b, st)) = rest.split_once('+') {
            (b, '+', st)
        } else {
            return Err(usage(format!("range `{rhs}` needs a `*factor` or `+step`")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("`{t}` in sweep `{s}` is not a number")))
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        let ok = match op {
            '*' => a > 0.0 && step > 1.0,
            _ => step > 0.0,
        };
        if !ok || b < a {
            return Err(usage(format!("range `{rhs}` does not progress")));
        }
        let mut vals = Vec::new();
        let mut i = 0i32;
        loop {
            let v = if op == '*' { a * step.powi(i) } else { a + step * i as f64 };
            if v > b * (1.0 + 1e-12) {
                break;
            }
            vals.push(fmt_value(v));
            i += 1;
            if vals.len() > 10_000 {
                return Err(usage(format!("range `{rhs}` has too many values")));
            }
        }
        vals
    } else {
        rhs.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
    };
    if values.is_empty() {
        return Err(usage(format!("sweep `{s}` has no values")));
    }
    Ok(Sweep {
        var: var.to_string(),
        values,
    })
}

/// Replaces `$var` and `${var}` in `spec`.
pub fn substitute(spec: &str, var: &str, value: &str) -> String {
    let braced = format!("${{{var}}}");
    let spec = spec.replace(&braced, value);
    let plain = format!("${var}");
    let mut out = String::with_capacity(spec.len());
    let mut rest = spec.as_str();
    while let Some(i) = rest.find(&plain) {
        let after = &rest[i + plain.len()..];
        let boundary = after
            .chars()
            .next()
            .is_none_or(|c| !(c.is_ascii_alphanumeric() || c == '_'));
        out += &rest[..i];
        out += if boundary { value } else { &plain };
        rest = after;
    }
    out + rest
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_sweep("m=16,64").unwrap().values, ["16", "64"]);
        assert_eq!(parse_sweep("m=16..512*2").unwrap().values, ["16", "32", "64", "128", "256", "512"]);
        assert_eq!(parse_sweep("t=0.5..1.5+0.25").unwrap().values, ["0.5", "0.75", "1", "1.25", "1.5"]);
        assert!(parse_sweep("m").is_err());
        assert!(parse_sweep("m=4..2*2").is_err());
    }

    #[test]
    fn substitution_respects_names() {
        assert_eq!(substitute("synth{m=$m}", "m", "16"), "synth{m=16}");
        assert_eq!(substitute("zipf{m=$m,s=$mm}", "m", "8"), "zipf{m=8,s=$mm}");
        assert_eq!(substitute("x{a=${t}0}", "t", "1"), "x{a=10}");
    }
}
