//! Sparse `label index:value` files.
//!
//! ```text
//! # dim 20
//! +1 1:0.5 3:-1.25
//! -1 2:1 # trailing comments are ignored
//! ```
//!
//! * one example per line; blank lines are skipped;
//! * the label is `+1`, `1` or `-1`;
//! * indices are 1-based and strictly increasing within a line;
//! * `#` starts a comment that runs to the end of the line;
//! * an optional `# dim N` comment before the first example declares the
//!   dimensionality. Readers that do not know it see an ordinary comment.
//!
//! Writers emit `+1`/`-1` labels and the shortest exact form of every value,
//! so reading a written file yields the same examples bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use margin_forge_core::{FeatureVector, Label};

use crate::error::{Error, Result};
use crate::real::{format_real, parse_real};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    pub label: Label,
    pub entries: Vec<(usize, f64)>,
}

impl SparseExample {
    pub fn from_vector(x: &FeatureVector, label: Label) -> SparseExample {
        SparseExample {
            label,
            entries: x.coords().to_vec(),
        }
    }

    pub fn max_index(&self) -> usize {
        self.entries.last().map_or(0, |(i, _)| *i)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseDataset {
    /// Declared dimensionality, when the file carries one.
    pub dim: Option<usize>,
    pub examples: Vec<SparseExample>,
}

impl SparseDataset {
    pub fn from_labeled(data: &[(FeatureVector, Label)]) -> SparseDataset {
        SparseDataset {
            dim: data.first().map(|(x, _)| x.dim()),
            examples: data
                .iter()
                .map(|(x, y)| SparseExample::from_vector(x, *y))
                .collect(),
        }
    }

    /// Declared dimensionality, or the largest index present.
    pub fn effective_dim(&self) -> usize {
        self.dim.unwrap_or_else(|| {
            self.examples
                .iter()
                .map(SparseExample::max_index)
                .max()
                .unwrap_or(0)
        })
    }

    pub fn to_labeled(&self) -> Result<Vec<(FeatureVector, Label)>> {
        self.to_labeled_with_dim(self.effective_dim())
    }

    pub fn to_labeled_with_dim(&self, dim: usize) -> Result<Vec<(FeatureVector, Label)>> {
        self.examples
            .iter()
            .map(|e| Ok((FeatureVector::new(dim, e.entries.clone())?, e.label)))
            .collect()
    }
}

fn parse_label(token: &str, line: usize) -> Result<Label> {
    match token {
        "+1" | "1" => Ok(Label::Positive),
        "-1" => Ok(Label::Negative),
        other => Err(Error::parse(
            line,
            format!("label must be +1, 1 or -1, got `{other}`"),
        )),
    }
}

/// Parses `index:value` tokens, enforcing strictly increasing indices.
pub(crate) fn parse_entries<'a, I>(tokens: I, line: usize) -> Result<Vec<(usize, f64)>>
where
    I: Iterator<Item = &'a str>,
{
    let mut entries = Vec::new();
    let mut last = 0;
    for token in tokens {
        let (index, value) = token
            .split_once(':')
            .ok_or_else(|| Error::parse(line, format!("expected index:value, got `{token}`")))?;
        let index: usize = index
            .parse()
            .map_err(|_| Error::parse(line, format!("bad feature index `{index}`")))?;
        if index == 0 {
            return Err(Error::parse(line, "feature indices start at 1"));
        }
        if index <= last {
            return Err(Error::parse(
                line,
                format!("feature index {index} does not increase after {last}"),
            ));
        }
        let value = parse_real(value)
            .ok_or_else(|| Error::parse(line, format!("bad feature value `{value}`")))?;
        entries.push((index, value));
        last = index;
    }
    Ok(entries)
}

fn parse_dim_comment(comment: &str) -> Option<&str> {
    let mut words = comment.split_whitespace();
    match (words.next(), words.next(), words.next()) {
        (Some("dim"), Some(n), None) => Some(n),
        _ => None,
    }
}

pub fn parse_sparse<R: BufRead>(reader: R) -> Result<SparseDataset> {
    let mut dataset = SparseDataset::default();
    for (k, line) in reader.lines().enumerate() {
        let number = k + 1;
        let line = line.map_err(|e| Error::parse(number, e.to_string()))?;
        let (content, comment) = match line.split_once('#') {
            Some((c, rest)) => (c, Some(rest)),
            None => (line.as_str(), None),
        };
        let content = content.trim();
        if content.is_empty() {
            if let (true, Some(n)) = (
                dataset.examples.is_empty(),
                comment.and_then(parse_dim_comment),
            ) {
                let dim = n
                    .parse()
                    .map_err(|_| Error::parse(number, format!("bad dimension `{n}`")))?;
                dataset.dim = Some(dim);
            }
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = parse_label(tokens.next().unwrap_or_default(), number)?;
        let entries = parse_entries(tokens, number)?;
        let example = SparseExample { label, entries };
        if let Some(dim) = dataset.dim {
            if example.max_index() > dim {
                return Err(Error::parse(
                    number,
                    format!(
                        "feature index {} exceeds declared dimension {dim}",
                        example.max_index()
                    ),
                ));
            }
        }
        dataset.examples.push(example);
    }
    Ok(dataset)
}

pub fn read_sparse(path: impl AsRef<Path>) -> Result<SparseDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_sparse(BufReader::new(file))
}

pub(crate) fn format_entries(line: &mut String, entries: &[(usize, f64)]) {
    for (index, value) in entries {
        line.push(' ');
        line.push_str(&index.to_string());
        line.push(':');
        line.push_str(&format_real(*value));
    }
}

pub fn format_sparse<W: Write>(mut out: W, dataset: &SparseDataset) -> std::io::Result<()> {
    if let Some(dim) = dataset.dim {
        writeln!(out, "# dim {dim}")?;
    }
    let mut line = String::new();
    for example in &dataset.examples {
        line.clear();
        line.push_str(&example.label.to_string());
        format_entries(&mut line, &example.entries);
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn write_sparse(path: impl AsRef<Path>, dataset: &SparseDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    format_sparse(BufWriter::new(file), dataset).map_err(|e| Error::io(path, e))
}
