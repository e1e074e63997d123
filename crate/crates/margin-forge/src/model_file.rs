//! Versioned plain-text model files.
//!
//! ```text
//! margin-forge-model v1
//! kernel rbf gamma=0.5
//! c_bound 1
//! dim 3
//! bias -0.25
//! support_vectors 2
//! 0.5 1:1 3:2
//! -0.5 2:1
//! ```
//!
//! The kernel line is one of `kernel linear`, `kernel rbf gamma=G` or
//! `kernel polynomial degree=D gamma=G coef0=R`. Each support-vector row is
//! its coefficient `alpha_i y_i` followed by sparse `index:value` entries.
//! Reals use the exact shortest form, so a saved model reloads with
//! bit-identical decision values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use margin_forge_core::{FeatureVector, Kernel, Model};

use crate::error::{Error, Result};
use crate::real::{format_real, parse_real};
use crate::sparse::{format_entries, parse_entries};

pub const MAGIC: &str = "margin-forge-model";
pub const FORMAT_VERSION: u32 = 1;

fn kernel_line(kernel: &Kernel) -> String {
    match *kernel {
        Kernel::Linear => "kernel linear".to_string(),
        Kernel::Rbf { gamma } => format!("kernel rbf gamma={}", format_real(gamma)),
        Kernel::Polynomial {
            degree,
            gamma,
            coef0,
        } => format!(
            "kernel polynomial degree={degree} gamma={} coef0={}",
            format_real(gamma),
            format_real(coef0)
        ),
    }
}

pub fn write_model<W: Write>(mut out: W, model: &Model) -> std::io::Result<()> {
    writeln!(out, "{MAGIC} v{FORMAT_VERSION}")?;
    writeln!(out, "{}", kernel_line(model.kernel()))?;
    writeln!(out, "c_bound {}", format_real(model.c_bound()))?;
    writeln!(out, "dim {}", model.dim())?;
    writeln!(out, "bias {}", format_real(model.bias()))?;
    writeln!(out, "support_vectors {}", model.support_vectors().len())?;
    let mut line = String::new();
    for (sv, coef) in model.support_vectors().iter().zip(model.sv_coefficients()) {
        line.clear();
        line.push_str(&format_real(*coef));
        format_entries(&mut line, sv.coords());
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(BufWriter::new(file), model).map_err(|e| Error::io(path, e))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self, what: &str) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(Ok(line)) => Ok(line),
            Some(Err(e)) => Err(Error::parse(self.number, e.to_string())),
            None => Err(Error::parse(
                self.number,
                format!("file ends before {what}"),
            )),
        }
    }

    /// Reads `key value` and returns the value.
    fn field(&mut self, key: &str) -> Result<String> {
        let line = self.next_line(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim().to_string()),
            _ => Err(Error::parse(
                self.number,
                format!("expected `{key} <value>`"),
            )),
        }
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let value = self.field(key)?;
        parse_real(&value).ok_or_else(|| Error::parse(self.number, format!("bad {key} `{value}`")))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let value = self.field(key)?;
        value
            .parse()
            .map_err(|_| Error::parse(self.number, format!("bad {key} `{value}`")))
    }
}

fn parse_kernel(spec: &str, line: usize) -> Result<Kernel> {
    let mut words = spec.split_whitespace();
    let kind = words.next().unwrap_or_default();
    let mut param = |name: &str| -> Result<f64> {
        let word = words
            .next()
            .ok_or_else(|| Error::parse(line, format!("kernel is missing `{name}`")))?;
        match word.split_once('=') {
            Some((k, v)) if k == name => {
                parse_real(v).ok_or_else(|| Error::parse(line, format!("bad {name} `{v}`")))
            }
            _ => Err(Error::parse(
                line,
                format!("expected `{name}=...`, got `{word}`"),
            )),
        }
    };
    let kernel = match kind {
        "linear" => Kernel::Linear,
        "rbf" => Kernel::Rbf {
            gamma: param("gamma")?,
        },
        "polynomial" => {
            let degree = param("degree")?;
            if degree.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&degree) {
                return Err(Error::parse(line, format!("bad degree `{degree}`")));
            }
            Kernel::Polynomial {
                degree: degree as u32,
                gamma: param("gamma")?,
                coef0: param("coef0")?,
            }
        }
        other => return Err(Error::parse(line, format!("unknown kernel `{other}`"))),
    };
    kernel
        .validate()
        .map_err(|e| Error::parse(line, e.to_string()))?;
    Ok(kernel)
}

pub fn read_model<R: BufRead>(reader: R) -> Result<Model> {
    let mut lines = Lines {
        inner: reader.lines(),
        number: 0,
    };
    let header = lines.next_line("the header")?;
    match header.trim().split_once(' ') {
        Some((MAGIC, version)) if version == format!("v{FORMAT_VERSION}") => {}
        Some((MAGIC, version)) => return Err(Error::Version(version.to_string())),
        _ => return Err(Error::parse(1, format!("not a {MAGIC} file"))),
    }
    let kernel = {
        let spec = lines.field("kernel")?;
        parse_kernel(&spec, lines.number)?
    };
    let c_bound = lines.real("c_bound")?;
    let dim = lines.count("dim")?;
    let bias = lines.real("bias")?;
    let n_sv = lines.count("support_vectors")?;
    let mut support_vectors = Vec::with_capacity(n_sv);
    let mut coefficients = Vec::with_capacity(n_sv);
    for _ in 0..n_sv {
        let line = lines.next_line("all support vectors are listed")?;
        let number = lines.number;
        let mut tokens = line.split_whitespace();
        let coef = tokens
            .next()
            .and_then(parse_real)
            .ok_or_else(|| Error::parse(number, "support vector row needs a coefficient"))?;
        let entries = parse_entries(tokens, number)?;
        let sv =
            FeatureVector::new(dim, entries).map_err(|e| Error::parse(number, e.to_string()))?;
        support_vectors.push(sv);
        coefficients.push(coef);
    }
    Model::new(kernel, bias, c_bound, dim, support_vectors, coefficients)
        .map_err(|e| Error::parse(lines.number, e.to_string()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file))
}
