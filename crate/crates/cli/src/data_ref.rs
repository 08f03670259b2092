use gof_core::datasets::{self, Dataset, Format};

use crate::{parse_format, usage, CliResult};

/// Where a dataset comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataRef {
    Builtin(String),
    Inline(String),
    File(String),
}

impl DataRef {
    pub fn parse(s: &str) -> Self {
        if let Some(name) = s.strip_prefix("builtin:") {
            DataRef::Builtin(name.into())
        } else if let Some(list) = s.strip_prefix("list:") {
            DataRef::Inline(list.into())
        } else if let Some(path) = s.strip_prefix("file:") {
            DataRef::File(path.into())
        } else if datasets::BUILTIN_NAMES.contains(&s) && !std::path::Path::new(s).exists() {
            DataRef::Builtin(s.into())
        } else {
            DataRef::File(s.into())
        }
    }
}

fn guess_format(path: &str) -> Format {
    if path.ends_with(".csv") {
        Format::CsvIndexed
    } else {
        Format::List
    }
}

pub fn resolve_dataset(reference: &str, input_format: Option<&str>) -> CliResult<Dataset> {
    let format = input_format.map(parse_format).transpose()?;
    let mut ds = match DataRef::parse(reference) {
        DataRef::Builtin(name) => datasets::load_builtin(&name)?,
        DataRef::Inline(list) => datasets::parse_counts(&list, format.unwrap_or(Format::List), None)?,
        DataRef::File(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read data file `{path}`: {e}")))?;
            let mut ds = datasets::parse_counts(&text, format.unwrap_or_else(|| guess_format(&path)), None)?;
            ds.name = path;
            ds
        }
    };
    if ds.name.is_empty() {
        ds.name = reference.into();
    }
    Ok(ds)
}
