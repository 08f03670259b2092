//! Bundled count tables and count-file parsing.
//!
//! Tables are stored flattened. A lower-triangular table of `k` rows holds
//! `k(k+1)/2` cells, row-major (`(1,1); (2,1), (2,2); …`), which is the bin
//! order of the Hardy-Weinberg family. A square `r × r` table holds `r²` cells,
//! row-major, which is the bin order of the symmetry family.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::{derive_stream, Seed};
use crate::stats::CountVector;

/// Layout of a dataset's cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Vector,
    Triangle { k: usize },
    Square { r: usize },
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Vector => f.write_str("vector"),
            Shape::Triangle { k } => write!(f, "triangle k={k}"),
            Shape::Square { r } => write!(f, "square r={r}"),
        }
    }
}

/// Text formats understood by [`parse_counts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Counts separated by commas and/or whitespace.
    List,
    /// `bin_index,count` lines with 1-based indices; absent bins are zero.
    CsvIndexed,
    /// One row per line, `r` rows of `r` entries.
    SquareTable,
    /// One row per line, row `i` holding `i` entries.
    Triangle,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::List => "list",
            Format::CsvIndexed => "csv-indexed",
            Format::SquareTable => "square-table",
            Format::Triangle => "triangle",
        }
    }

    /// The format that preserves a shape.
    pub fn native(shape: Shape) -> Self {
        match shape {
            Shape::Vector => Format::List,
            Shape::Triangle { .. } => Format::Triangle,
            Shape::Square { .. } => Format::SquareTable,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "list" => Ok(Format::List),
            "csv-indexed" | "csv" | "indexed" => Ok(Format::CsvIndexed),
            "square-table" | "square" => Ok(Format::SquareTable),
            "triangle" | "lower-triangle" => Ok(Format::Triangle),
            _ => Err(Error::InvalidInput(format!(
                "unknown format `{s}` (expected list, csv-indexed, square-table or triangle)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub name: String,
    pub shape: Shape,
    pub counts: CountVector,
    pub note: String,
}

impl Dataset {
    pub fn new(name: impl Into<String>, shape: Shape, counts: CountVector) -> Result<Self> {
        let need = match shape {
            Shape::Vector => counts.len(),
            Shape::Triangle { k } => k * (k + 1) / 2,
            Shape::Square { r } => r * r,
        };
        if need != counts.len() || counts.is_empty() {
            return Err(Error::Shape(format!(
                "{shape} needs {need} cells, got {}",
                counts.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            shape,
            counts,
            note: String::new(),
        })
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = note.into();
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.total()
    }

    /// Text in the shape's own format; the checksum is taken over this.
    pub fn canonical(&self) -> String {
        serialize(self, Format::native(self.shape)).expect("native format always fits")
    }

    /// SHA-256 of [`Dataset::canonical`], hex encoded.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Keeps bins `1..=m` of a vector dataset, dropping the draws beyond.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        self.require_vector("truncate")?;
        Ok(Self {
            counts: self.counts.truncate(m)?,
            ..self.clone()
        })
    }

    /// Appends zero-count bins up to `m`.
    pub fn extend(&self, m: usize) -> Result<Self> {
        self.require_vector("extend")?;
        Ok(Self {
            counts: self.counts.extend(m)?,
            ..self.clone()
        })
    }

    /// A uniformly random subset of `k` of the `n` draws, without replacement.
    pub fn subsample(&self, k: u64, seed: Seed) -> Result<Self> {
        let n = self.total();
        if k > n {
            return Err(Error::InvalidInput(format!(
                "cannot subsample {k} draws from {n}"
            )));
        }
        let mut rng = derive_stream(seed, 0);
        let n = usize::try_from(n).map_err(|_| Error::InvalidInput(format!("{n} draws is too many to subsample")))?;
        let mut ends = Vec::with_capacity(self.counts.len());
        let mut acc = 0usize;
        for &c in self.counts.counts() {
            acc += c as usize;
            ends.push(acc);
        }
        // Draw k distinct positions among the n draws and bin each by the
        // cumulative counts.
        let mut out = vec![0u64; self.counts.len()];
        for pos in rand::seq::index::sample(&mut rng, n, k as usize) {
            out[ends.partition_point(|&e| e <= pos)] += 1;
        }
        Ok(Self {
            counts: CountVector::new(out)?,
            ..self.clone()
        })
    }

    fn require_vector(&self, op: &str) -> Result<()> {
        if self.shape != Shape::Vector {
            return Err(Error::Shape(format!("{op} applies to count vectors, not a {}", self.shape)));
        }
        Ok(())
    }
}

pub const BUILTIN_NAMES: [&str; 9] = [
    "alpha_decay",
    "yeast",
    "rhesus",
    "genotypes",
    "health",
    "health_mod",
    "health_mods",
    "synth_20",
    "synth_96",
];

const HEALTH: [[u64; 5]; 5] = [
    [10, 21, 22, 5, 0],
    [24, 53, 43, 15, 3],
    [21, 43, 34, 11, 0],
    [3, 11, 8, 4, 1],
    [1, 1, 1, 0, 0],
];

fn square(name: &str, rows: [[u64; 5]; 5], note: &str) -> Result<Dataset> {
    let cells = rows.iter().flatten().copied().collect();
    Ok(Dataset::new(name, Shape::Square { r: 5 }, CountVector::new(cells)?)?.with_note(note))
}

fn triangle(name: &str, rows: &[&[u64]], note: &str) -> Result<Dataset> {
    let cells = rows.iter().flat_map(|r| r.iter().copied()).collect();
    Ok(Dataset::new(name, Shape::Triangle { k: rows.len() }, CountVector::new(cells)?)?.with_note(note))
}

fn vector(name: &str, counts: Vec<u64>, note: &str) -> Result<Dataset> {
    Ok(Dataset::new(name, Shape::Vector, CountVector::new(counts)?)?.with_note(note))
}

pub fn load_builtin(name: &str) -> Result<Dataset> {
    match name {
        "alpha_decay" => vector(
            name,
            vec![57, 203, 383, 525, 532, 408, 273, 139, 45, 27, 10, 4, 0, 1, 1],
            "alpha particles emitted by a polonium film in 2608 intervals of 7.5 s; bin j holds j-1 particles",
        ),
        "yeast" => vector(
            name,
            vec![0, 20, 43, 53, 86, 70, 54, 37, 18, 10, 5, 2, 2],
            "yeast cells in 400 haemacytometer squares; bin j holds j-1 cells",
        ),
        "rhesus" => triangle(
            name,
            &[
                &[1236],
                &[120, 3],
                &[18, 0, 0],
                &[982, 55, 7, 249],
                &[32, 1, 0, 12, 0],
                &[2582, 132, 20, 1162, 29, 1312],
                &[6, 0, 0, 4, 0, 4, 0],
                &[2, 0, 0, 0, 0, 0, 0, 0],
                &[115, 5, 2, 53, 1, 149, 0, 0, 4],
            ],
            "pairs of Rhesus haplotypes among 8297 people, lower triangle over 9 haplotypes",
        ),
        "genotypes" => triangle(
            name,
            &[&[0], &[3, 1], &[5, 18, 1], &[3, 7, 5, 2]],
            "genotype frequencies among 45 people, lower triangle over 4 alleles",
        ),
        "health" => square(name, HEALTH, "self-reported physical health for 335 matched pairs"),
        "health_mod" => {
            let mut t = HEALTH;
            t[1][2] = 56;
            t[2][1] = 30;
            square(name, t, "health table with cells (2,3) and (3,2) moved apart")
        }
        "health_mods" => {
            let mut t = HEALTH;
            t[2][3] = 19;
            t[3][2] = 0;
            square(name, t, "health table with cells (3,4) and (4,3) moved apart")
        }
        "synth_20" => vector(name, vec![15, 5], "15 and 5 draws in the first two bins; zero-extend to m"),
        "synth_96" => {
            let mut c = vec![36, 12];
            c.extend(std::iter::repeat_n(1, 48));
            vector(name, c, "36, 12, then 48 singletons; zero-extend to m")
        }
        _ => Err(Error::UnknownDataset {
            name: name.into(),
            valid: BUILTIN_NAMES.join(", "),
        }),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn parse_count(tok: &str, line: usize) -> Result<u64> {
    tok.parse::<u64>().map_err(|_| Error::Parse {
        line,
        reason: format!("`{tok}` is not a non-negative integer count"),
    })
}

/// Rows of counts, skipping blank and comment-only lines.
fn rows(text: &str) -> Result<Vec<Vec<u64>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let row: Vec<u64> = tokens(strip_comment(raw))
            .map(|t| parse_count(t, i + 1))
            .collect::<Result<_>>()?;
        if !row.is_empty() {
            out.push(row);
        }
    }
    Ok(out)
}

/// Parses counts from text. `m` declares the bin count for the indexed
/// format (otherwise a `# m=…` comment or the largest index is used).
pub fn parse_counts(text: &str, format: Format, m: Option<usize>) -> Result<Dataset> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    match format {
        Format::List => {
            let c: Vec<u64> = rows(text)?.concat();
            if c.is_empty() {
                return Err(Error::Parse { line: 0, reason: "no counts found".into() });
            }
            Dataset::new("", Shape::Vector, CountVector::new(c)?)
        }
        Format::CsvIndexed => parse_indexed(text, m),
        Format::SquareTable => {
            let r = rows(text)?;
            let size = r.len();
            if size == 0 {
                return Err(Error::Parse { line: 0, reason: "no rows found".into() });
            }
            if let Some((i, row)) = r.iter().enumerate().find(|(_, row)| row.len() != size) {
                return Err(Error::Shape(format!(
                    "row {} has {} entries; a {size}-row square table needs {size}",
                    i + 1,
                    row.len()
                )));
            }
            Dataset::new("", Shape::Square { r: size }, CountVector::new(r.concat())?)
        }
        Format::Triangle => {
            let r = rows(text)?;
            if r.is_empty() {
                return Err(Error::Parse { line: 0, reason: "no rows found".into() });
            }
            if let Some((i, row)) = r.iter().enumerate().find(|(i, row)| row.len() != i + 1) {
                return Err(Error::Shape(format!(
                    "row {} has {} entries; a lower-triangular table needs {}",
                    i + 1,
                    row.len(),
                    i + 1
                )));
            }
            Dataset::new("", Shape::Triangle { k: r.len() }, CountVector::new(r.concat())?)
        }
    }
}

fn parse_indexed(text: &str, m: Option<usize>) -> Result<Dataset> {
    let mut declared = m;
    let mut entries: Vec<(usize, u64, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(c) = raw.trim().strip_prefix('#') {
            if declared.is_none() {
                if let Some(v) = c.trim().strip_prefix("m=").or_else(|| c.trim().strip_prefix("m =")) {
                    declared = Some(v.trim().parse().map_err(|_| Error::Parse {
                        line,
                        reason: format!("bad bin-count declaration `{}`", c.trim()),
                    })?);
                }
            }
            continue;
        }
        let t: Vec<&str> = tokens(strip_comment(raw)).collect();
        match t.as_slice() {
            [] => continue,
            [a, b] if entries.is_empty() && a.parse::<i64>().is_err() && b.parse::<i64>().is_err() => continue,
            [idx, count] => {
                let idx: usize = idx.parse().ok().filter(|&v| v >= 1).ok_or_else(|| Error::Parse {
                    line,
                    reason: format!("`{idx}` is not a 1-based bin index"),
                })?;
                entries.push((idx, parse_count(count, line)?, line));
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    reason: "expected `bin_index,count`".into(),
                })
            }
        }
    }
    let largest = entries.iter().map(|e| e.0).max().unwrap_or(0);
    let m = declared.unwrap_or(largest);
    if m == 0 {
        return Err(Error::Parse { line: 0, reason: "no bins found".into() });
    }
    let mut c = vec![0u64; m];
    let mut seen = vec![false; m];
    for (idx, count, line) in entries {
        if idx > m {
            return Err(Error::Parse {
                line,
                reason: format!("bin {idx} exceeds the declared {m} bins"),
            });
        }
        if std::mem::replace(&mut seen[idx - 1], true) {
            return Err(Error::Parse {
                line,
                reason: format!("bin {idx} listed twice"),
            });
        }
        c[idx - 1] = count;
    }
    Dataset::new("", Shape::Vector, CountVector::new(c)?)
}

fn join(row: &[u64]) -> String {
    let mut s = String::new();
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

/// Writes a dataset in `format`. Vector formats accept any shape (the
/// flattened cells); table formats need the matching shape.
pub fn serialize(ds: &Dataset, format: Format) -> Result<String> {
    let c = ds.counts.counts();
    match (format, ds.shape) {
        (Format::List, _) => Ok(format!("{}\n", join(c))),
        (Format::CsvIndexed, _) => {
            let mut s = format!("# m={}\n", c.len());
            for (i, &v) in c.iter().enumerate().filter(|(_, &v)| v > 0) {
                writeln!(s, "{},{v}", i + 1).unwrap();
            }
            Ok(s)
        }
        (Format::SquareTable, Shape::Square { r }) => {
            Ok(c.chunks(r).map(|row| join(row) + "\n").collect())
        }
        (Format::Triangle, Shape::Triangle { k }) => {
            let mut s = String::new();
            let mut at = 0;
            for i in 1..=k {
                s += &join(&c[at..at + i]);
                s.push('\n');
                at += i;
            }
            Ok(s)
        }
        (f, shape) => Err(Error::Shape(format!("cannot write a {shape} as {f}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_with_comments_and_mixed_separators() {
        let ds = parse_counts("# header\n15, 5\t0\n0 # trailing\n", Format::List, None).unwrap();
        assert_eq!(ds.counts.counts(), &[15, 5, 0, 0]);
    }

    #[test]
    fn bad_entries_name_the_line() {
        assert_eq!(
            parse_counts("1,2\n3,-4\n", Format::List, None),
            Err(Error::Parse { line: 2, reason: "`-4` is not a non-negative integer count".into() })
        );
        assert!(matches!(parse_counts("1.5", Format::List, None), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn indexed_zero_fill() {
        let ds = parse_counts("bin,count\n2,7\n5,1\n", Format::CsvIndexed, Some(6)).unwrap();
        assert_eq!(ds.counts.counts(), &[0, 7, 0, 0, 1, 0]);
        let ds = parse_counts("# m=4\n1,3\n", Format::CsvIndexed, None).unwrap();
        assert_eq!(ds.counts.counts(), &[3, 0, 0, 0]);
        assert!(parse_counts("1,3\n1,4\n", Format::CsvIndexed, None).is_err());
        assert!(parse_counts("7,3\n", Format::CsvIndexed, Some(4)).is_err());
    }

    #[test]
    fn ragged_tables() {
        assert!(matches!(parse_counts("1,2\n3\n", Format::SquareTable, None), Err(Error::Shape(_))));
        assert!(matches!(parse_counts("1\n2,3,4\n", Format::Triangle, None), Err(Error::Shape(_))));
    }

    #[test]
    fn unknown_builtin_lists_names() {
        match load_builtin("nope") {
            Err(Error::UnknownDataset { valid, .. }) => assert!(valid.contains("health_mods")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn health_variants_keep_total() {
        for name in ["health", "health_mod", "health_mods"] {
            assert_eq!(load_builtin(name).unwrap().total(), 335);
        }
    }

    #[test]
    fn subsample_is_seeded_and_exact() {
        let ds = load_builtin("alpha_decay").unwrap();
        let a = ds.subsample(1000, Seed(4)).unwrap();
        let b = ds.subsample(1000, Seed(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 1000);
        for (x, y) in a.counts.counts().iter().zip(ds.counts.counts()) {
            assert!(x <= y);
        }
        assert_eq!(ds.subsample(2608, Seed(1)).unwrap().counts, ds.counts);
    }

    #[test]
    fn transforms_need_vectors() {
        let ds = load_builtin("health").unwrap();
        assert!(ds.truncate(3).is_err());
        let y = load_builtin("yeast").unwrap().extend(20).unwrap();
        assert_eq!(y.counts.len(), 20);
        assert_eq!(y.total(), 400);
        let a = load_builtin("alpha_decay").unwrap().truncate(12).unwrap();
        assert_eq!(a.total(), 2606);
    }
}
