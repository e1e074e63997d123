//! Record encoding: turns tables of raw text tokens into feature vectors.
//!
//! Each field of a [`Schema`] owns a contiguous block of coordinates:
//!
//! * categorical, one-hot: one coordinate per alphabet entry, `A -> (1,0,0,0)`
//!   for the alphabet `A,C,G,T` (plus one trailing slot with
//!   [`MissingPolicy::ExtraCategory`]);
//! * categorical, scalar: a single coordinate holding
//!   [`scalar_code`]`(m, i) = i / (m + 1)`, which gives `0.2, 0.4, 0.6, 0.8`
//!   for a four-letter alphabet;
//! * numeric: the parsed value, standardized with the fitted
//!   [`EncoderState`] unless disabled;
//! * binary: `1` when the token equals the field's true token, else `0`.
//!
//! Alphabet order is taken from the schema as written and never inferred.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vector::{FeatureVector, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoricalMode {
    OneHot,
    Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Categorical {
        alphabet: Vec<String>,
        mode: CategoricalMode,
    },
    Numeric {
        standardize: bool,
    },
    Binary {
        true_token: String,
    },
}

/// What to emit when a field is absent or empty in a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    /// Fail with [`Error::MissingValue`].
    Reject,
    /// Numeric only: substitute the fitted mean.
    MeanImpute,
    /// One-hot only: emit an all-zero block.
    AllZero,
    /// Categorical only: map missing and unknown tokens to an extra category.
    ExtraCategory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub name: String,
    pub kind: FieldKind,
    pub missing_policy: MissingPolicy,
}

impl FieldSpec {
    /// Categorical field with the default policy (all-zero for one-hot,
    /// reject for scalar).
    pub fn categorical<S: AsRef<str>>(
        name: &str,
        alphabet: &[S],
        mode: CategoricalMode,
    ) -> FieldSpec {
        FieldSpec {
            name: name.to_string(),
            kind: FieldKind::Categorical {
                alphabet: alphabet.iter().map(|s| s.as_ref().to_string()).collect(),
                mode,
            },
            missing_policy: match mode {
                CategoricalMode::OneHot => MissingPolicy::AllZero,
                CategoricalMode::Scalar => MissingPolicy::Reject,
            },
        }
    }

    /// Standardized numeric field with mean imputation.
    pub fn numeric(name: &str) -> FieldSpec {
        FieldSpec {
            name: name.to_string(),
            kind: FieldKind::Numeric { standardize: true },
            missing_policy: MissingPolicy::MeanImpute,
        }
    }

    pub fn raw_numeric(name: &str) -> FieldSpec {
        FieldSpec {
            kind: FieldKind::Numeric { standardize: false },
            ..FieldSpec::numeric(name)
        }
    }

    pub fn binary(name: &str, true_token: &str) -> FieldSpec {
        FieldSpec {
            name: name.to_string(),
            kind: FieldKind::Binary {
                true_token: true_token.to_string(),
            },
            missing_policy: MissingPolicy::Reject,
        }
    }

    pub fn with_policy(mut self, policy: MissingPolicy) -> FieldSpec {
        self.missing_policy = policy;
        self
    }

    /// Number of coordinates this field contributes.
    pub fn width(&self) -> usize {
        match &self.kind {
            FieldKind::Categorical {
                alphabet,
                mode: CategoricalMode::OneHot,
            } => alphabet.len() + usize::from(self.missing_policy == MissingPolicy::ExtraCategory),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Schema("field name must not be empty".into()));
        }
        let policy_ok = matches!(
            (&self.kind, self.missing_policy),
            (_, MissingPolicy::Reject)
                | (FieldKind::Numeric { .. }, MissingPolicy::MeanImpute)
                | (
                    FieldKind::Categorical {
                        mode: CategoricalMode::OneHot,
                        ..
                    },
                    MissingPolicy::AllZero,
                )
                | (FieldKind::Categorical { .. }, MissingPolicy::ExtraCategory)
        );
        if !policy_ok {
            return Err(Error::Schema(format!(
                "missing policy {:?} is not allowed for field `{}`",
                self.missing_policy, self.name
            )));
        }
        if let FieldKind::Categorical { alphabet, .. } = &self.kind {
            if alphabet.is_empty() {
                return Err(Error::Schema(format!(
                    "field `{}` has an empty alphabet",
                    self.name
                )));
            }
            let unique: BTreeSet<&String> = alphabet.iter().collect();
            if unique.len() != alphabet.len() {
                return Err(Error::Schema(format!(
                    "field `{}` has duplicate alphabet entries",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Ordered field list plus the derived total width.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    fields: Vec<FieldSpec>,
    label_field: Option<String>,
    offsets: Vec<usize>,
    total_dim: usize,
}

impl Schema {
    pub fn new(fields: Vec<FieldSpec>, label_field: Option<String>) -> Result<Schema> {
        let mut names = BTreeSet::new();
        let mut offsets = Vec::with_capacity(fields.len());
        let mut total_dim = 0;
        for field in &fields {
            field.validate()?;
            if !names.insert(field.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate field name `{}`",
                    field.name
                )));
            }
            offsets.push(total_dim);
            total_dim += field.width();
        }
        if let Some(label) = &label_field {
            if names.contains(label.as_str()) {
                return Err(Error::Schema(format!(
                    "label field `{label}` is also a feature field"
                )));
            }
        }
        Ok(Schema {
            fields,
            label_field,
            offsets,
            total_dim,
        })
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn label_field(&self) -> Option<&str> {
        self.label_field.as_deref()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Zero-based offset of the field's first coordinate.
    pub fn offset(&self, field: usize) -> usize {
        self.offsets[field]
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    /// Recovers the token of a one-hot field from its block. Returns `None`
    /// for an all-zero block or a non one-hot field; the extra category
    /// decodes as `None` as well.
    pub fn decode_one_hot<'s>(&'s self, field: usize, x: &FeatureVector) -> Option<&'s str> {
        let spec = &self.fields[field];
        let FieldKind::Categorical {
            alphabet,
            mode: CategoricalMode::OneHot,
        } = &spec.kind
        else {
            return None;
        };
        let start = self.offsets[field];
        let mut best: Option<(usize, f64)> = None;
        for k in 0..spec.width() {
            let v = x.get(start + k + 1);
            if v > best.map_or(0.0, |(_, b)| b) {
                best = Some((k, v));
            }
        }
        best.and_then(|(k, _)| alphabet.get(k)).map(String::as_str)
    }
}

/// One raw row: field name to text token. Absent keys and blank tokens
/// both count as missing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    values: BTreeMap<String, String>,
}

impl Record {
    pub fn new() -> Record {
        Record::default()
    }

    pub fn insert(&mut self, name: &str, token: &str) {
        self.values.insert(name.to_string(), token.to_string());
    }

    pub fn with(mut self, name: &str, token: &str) -> Record {
        self.insert(name, token);
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    /// Trimmed token, or `None` when missing.
    pub fn get(&self, name: &str) -> Option<&str> {
        self.values
            .get(name)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
    }
}

impl<K: AsRef<str>, V: AsRef<str>> FromIterator<(K, V)> for Record {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Record {
            values: iter
                .into_iter()
                .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericStats {
    pub mean: f64,
    /// Population standard deviation; zero marks a constant column.
    pub std: f64,
}

/// Statistics fitted on a training table, aligned with the schema fields.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    stats: Vec<Option<NumericStats>>,
}

impl EncoderState {
    pub fn from_stats(stats: Vec<Option<NumericStats>>) -> EncoderState {
        EncoderState { stats }
    }

    pub fn stats(&self, field: usize) -> Option<NumericStats> {
        self.stats.get(field).copied().flatten()
    }
}

/// Ordinal code `i / (m + 1)` of the `i`-th (1-based) entry of an alphabet of
/// size `m`.
pub fn scalar_code(alphabet_size: usize, index: usize) -> Result<f64> {
    if index == 0 || index > alphabet_size {
        return Err(Error::Schema(format!(
            "category index {index} outside 1..={alphabet_size}"
        )));
    }
    Ok(index as f64 / (alphabet_size as f64 + 1.0))
}

fn parse_numeric(field: &str, token: &str) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Encoding(format!(
            "field `{field}`: `{token}` is not a finite number"
        ))),
    }
}

/// Fits per-field mean and population standard deviation on the parseable
/// values of every numeric field.
pub fn fit_encoder(schema: &Schema, data: &[Record]) -> Result<EncoderState> {
    if data.is_empty() {
        return Err(Error::Encoding(
            "cannot fit an encoder on zero records".into(),
        ));
    }
    let mut stats = Vec::with_capacity(schema.fields().len());
    for field in schema.fields() {
        if !matches!(field.kind, FieldKind::Numeric { .. }) {
            stats.push(None);
            continue;
        }
        let mut values = Vec::with_capacity(data.len());
        for record in data {
            match record.get(&field.name) {
                Some(token) => values.push(parse_numeric(&field.name, token)?),
                None if field.missing_policy == MissingPolicy::Reject => {
                    return Err(Error::MissingValue(field.name.clone()));
                }
                None => {}
            }
        }
        if values.is_empty() {
            return Err(Error::Encoding(format!(
                "field `{}` has no values to fit",
                field.name
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        stats.push(Some(NumericStats {
            mean,
            std: libm::sqrt(var),
        }));
    }
    Ok(EncoderState { stats })
}

/// Encodes one record into a vector of dimension `schema.total_dim()`.
/// Zero coordinates are omitted from the sparse representation.
pub fn encode_record(
    schema: &Schema,
    state: &EncoderState,
    record: &Record,
) -> Result<FeatureVector> {
    let mut coords = Vec::new();
    for (f, field) in schema.fields().iter().enumerate() {
        let base = schema.offset(f) + 1;
        let token = record.get(&field.name);
        match &field.kind {
            FieldKind::Categorical { alphabet, mode } => {
                let m = alphabet.len();
                let position = match token {
                    Some(t) => match alphabet.iter().position(|a| a == t) {
                        Some(k) => Some(k + 1),
                        None if field.missing_policy == MissingPolicy::ExtraCategory => None,
                        None => {
                            return Err(Error::Encoding(format!(
                                "field `{}`: unknown category `{t}`",
                                field.name
                            )))
                        }
                    },
                    None => match field.missing_policy {
                        MissingPolicy::Reject => {
                            return Err(Error::MissingValue(field.name.clone()))
                        }
                        _ => None,
                    },
                };
                let extra = field.missing_policy == MissingPolicy::ExtraCategory;
                match (mode, position) {
                    (CategoricalMode::OneHot, Some(k)) => coords.push((base + k - 1, 1.0)),
                    (CategoricalMode::OneHot, None) if extra => coords.push((base + m, 1.0)),
                    (CategoricalMode::OneHot, None) => {}
                    (CategoricalMode::Scalar, Some(k)) => coords.push((base, scalar_code(m, k)?)),
                    // The extra category of a scalar field encodes as 0.
                    (CategoricalMode::Scalar, None) => {}
                }
            }
            FieldKind::Numeric { standardize } => {
                let fitted = state.stats(f);
                let raw = match token {
                    Some(t) => parse_numeric(&field.name, t)?,
                    None => match field.missing_policy {
                        MissingPolicy::MeanImpute => {
                            fitted.ok_or_else(|| not_fitted(&field.name))?.mean
                        }
                        _ => return Err(Error::MissingValue(field.name.clone())),
                    },
                };
                let value = if *standardize {
                    let s = fitted.ok_or_else(|| not_fitted(&field.name))?;
                    if s.std > 0.0 {
                        (raw - s.mean) / s.std
                    } else {
                        0.0
                    }
                } else {
                    raw
                };
                if value != 0.0 {
                    coords.push((base, value));
                }
            }
            FieldKind::Binary { true_token } => match token {
                Some(t) if t == true_token => coords.push((base, 1.0)),
                Some(_) => {}
                None => return Err(Error::MissingValue(field.name.clone())),
            },
        }
    }
    FeatureVector::new(schema.total_dim(), coords)
}

fn not_fitted(field: &str) -> Error {
    Error::Schema(format!(
        "encoder state has no statistics for field `{field}`"
    ))
}

/// Disjunctive labeling: `+1` when any of the named history fields holds a
/// true token, `-1` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRule {
    fields: Vec<String>,
    true_tokens: Vec<String>,
}

impl LabelRule {
    /// Rule over `fields`, accepting `yes`, `y`, `true` and `1`
    /// (case-insensitive) as true.
    pub fn any_of<S: AsRef<str>>(fields: &[S]) -> Result<LabelRule> {
        LabelRule::with_true_tokens(fields, &["yes", "y", "true", "1"])
    }

    pub fn with_true_tokens<S: AsRef<str>, T: AsRef<str>>(
        fields: &[S],
        true_tokens: &[T],
    ) -> Result<LabelRule> {
        if fields.is_empty() {
            return Err(Error::Schema("label rule needs at least one field".into()));
        }
        Ok(LabelRule {
            fields: fields.iter().map(|s| s.as_ref().to_string()).collect(),
            true_tokens: true_tokens
                .iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
        })
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    fn is_true(&self, token: &str) -> bool {
        let token = token.to_lowercase();
        self.true_tokens.contains(&token)
    }
}

pub fn label_record(record: &Record, rule: &LabelRule) -> Result<Label> {
    let mut positive = false;
    for name in &rule.fields {
        if !record.contains(name) {
            return Err(Error::Schema(format!("label field `{name}` is absent")));
        }
        positive |= record.get(name).is_some_and(|t| rule.is_true(t));
    }
    Ok(if positive {
        Label::Positive
    } else {
        Label::Negative
    })
}

/// Reads a label column holding `+1`, `1` or `-1`.
pub fn label_from_field(record: &Record, field: &str) -> Result<Label> {
    let token = record
        .get(field)
        .ok_or_else(|| Error::MissingValue(field.to_string()))?;
    match token {
        "+1" | "1" => Ok(Label::Positive),
        "-1" => Ok(Label::Negative),
        other => Err(Error::Encoding(format!(
            "label field `{field}`: `{other}` is not +1 or -1"
        ))),
    }
}
