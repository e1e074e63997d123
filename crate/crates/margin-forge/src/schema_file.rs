//! Line-oriented schema files.
//!
//! ```text
//! # cardio cohort
//! @label outcome
//! age      numeric standardize mean-impute
//! bmi      numeric raw reject
//! rs1801   categorical A,C,G,T onehot all-zero
//! rs2234   categorical A,C,G,T scalar extra-category
//! smoker   binary yes
//! ```
//!
//! One field per line, in vector order: `name kind [args] [options]`.
//!
//! | kind          | args              | options (any order)                               |
//! |---------------|-------------------|---------------------------------------------------|
//! | `numeric`     |                   | `standardize` \| `raw`, `reject` \| `mean-impute` |
//! | `categorical` | comma alphabet    | `onehot` \| `scalar`, `reject` \| `all-zero` \| `extra-category` |
//! | `binary`      | true token        | `reject`                                          |
//!
//! Omitted options take the defaults of the matching [`FieldSpec`]
//! constructor. `@label name` names a `+1`/`-1` label column. `#` starts a
//! comment.

use std::path::Path;

use margin_forge_core::encoding::{CategoricalMode, FieldSpec, MissingPolicy, Schema};

use crate::error::{Error, Result};

fn policy(word: &str) -> Option<MissingPolicy> {
    Some(match word {
        "reject" => MissingPolicy::Reject,
        "mean-impute" => MissingPolicy::MeanImpute,
        "all-zero" => MissingPolicy::AllZero,
        "extra-category" => MissingPolicy::ExtraCategory,
        _ => return None,
    })
}

fn parse_field(words: &[&str], line: usize) -> Result<FieldSpec> {
    let (name, kind, rest) = match words {
        [name, kind, rest @ ..] => (*name, *kind, rest),
        _ => return Err(Error::parse(line, "expected `name kind ...`")),
    };
    let mut chosen_policy = None;
    let mut set_policy = |word: &str| -> Result<bool> {
        match policy(word) {
            Some(p) if chosen_policy.is_none() => {
                chosen_policy = Some(p);
                Ok(true)
            }
            Some(_) => Err(Error::parse(line, "more than one missing-value policy")),
            None => Ok(false),
        }
    };
    let spec = match kind {
        "numeric" => {
            let mut standardize = None;
            for word in rest {
                let flag = match *word {
                    "standardize" => Some(true),
                    "raw" => Some(false),
                    _ => None,
                };
                match (flag, standardize) {
                    (Some(_), Some(_)) => {
                        return Err(Error::parse(line, "standardize/raw given twice"))
                    }
                    (Some(f), None) => standardize = Some(f),
                    (None, _) if set_policy(word)? => {}
                    (None, _) => return Err(unknown(word, line)),
                }
            }
            if standardize == Some(false) {
                FieldSpec::raw_numeric(name)
            } else {
                FieldSpec::numeric(name)
            }
        }
        "categorical" => {
            let Some((alphabet, options)) = rest.split_first() else {
                return Err(Error::parse(
                    line,
                    format!("field `{name}` needs an alphabet"),
                ));
            };
            let alphabet: Vec<&str> = alphabet.split(',').map(str::trim).collect();
            if alphabet.iter().any(|a| a.is_empty()) {
                return Err(Error::parse(line, "alphabet has an empty entry"));
            }
            let mut mode = None;
            for word in options {
                let m = match *word {
                    "onehot" => Some(CategoricalMode::OneHot),
                    "scalar" => Some(CategoricalMode::Scalar),
                    _ => None,
                };
                match (m, mode) {
                    (Some(_), Some(_)) => {
                        return Err(Error::parse(line, "onehot/scalar given twice"))
                    }
                    (Some(m), None) => mode = Some(m),
                    (None, _) if set_policy(word)? => {}
                    (None, _) => return Err(unknown(word, line)),
                }
            }
            FieldSpec::categorical(name, &alphabet, mode.unwrap_or(CategoricalMode::OneHot))
        }
        "binary" => {
            let Some((token, options)) = rest.split_first() else {
                return Err(Error::parse(
                    line,
                    format!("field `{name}` needs a true token"),
                ));
            };
            for word in options {
                if !set_policy(word)? {
                    return Err(unknown(word, line));
                }
            }
            FieldSpec::binary(name, token)
        }
        other => return Err(Error::parse(line, format!("unknown field kind `{other}`"))),
    };
    let spec = match chosen_policy {
        Some(p) => spec.with_policy(p),
        None => spec,
    };
    spec.validate()
        .map_err(|e| Error::parse(line, e.to_string()))?;
    Ok(spec)
}

fn unknown(word: &str, line: usize) -> Error {
    Error::parse(line, format!("unknown option `{word}`"))
}

pub fn parse_schema(text: &str) -> Result<Schema> {
    let mut fields = Vec::new();
    let mut label = None;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        if words[0] == "@label" {
            match (&words[1..], &label) {
                ([name], None) => label = Some(name.to_string()),
                ([_], Some(_)) => return Err(Error::parse(line, "label declared twice")),
                _ => return Err(Error::parse(line, "expected `@label <name>`")),
            }
            continue;
        }
        let spec = parse_field(&words, line)?;
        if fields.iter().any(|f: &FieldSpec| f.name == spec.name) {
            return Err(Error::parse(
                line,
                format!("duplicate field `{}`", spec.name),
            ));
        }
        fields.push(spec);
    }
    if fields.is_empty() {
        return Err(Error::parse(last_line.max(1), "schema declares no fields"));
    }
    Schema::new(fields, label).map_err(|e| Error::Schema(e.to_string()))
}

pub fn read_schema(path: impl AsRef<Path>) -> Result<Schema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schema(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use margin_forge_core::encoding::FieldKind;

    #[test]
    fn full_grammar() {
        let schema = parse_schema(
            "# header\n@label outcome\nage numeric\nbmi numeric raw reject\n\
             snp categorical A,C,G,T\nsnp2 categorical A,C,G,T scalar extra-category # note\n\
             smoker binary yes\n",
        )
        .unwrap();
        assert_eq!(schema.label_field(), Some("outcome"));
        let fields = schema.fields();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], FieldSpec::numeric("age"));
        assert_eq!(
            fields[1],
            FieldSpec::raw_numeric("bmi").with_policy(MissingPolicy::Reject)
        );
        assert_eq!(
            fields[2],
            FieldSpec::categorical("snp", &["A", "C", "G", "T"], CategoricalMode::OneHot)
        );
        assert_eq!(fields[3].missing_policy, MissingPolicy::ExtraCategory);
        assert!(matches!(
            fields[3].kind,
            FieldKind::Categorical {
                mode: CategoricalMode::Scalar,
                ..
            }
        ));
        assert_eq!(fields[4], FieldSpec::binary("smoker", "yes"));
        assert_eq!(schema.total_dim(), 1 + 1 + 4 + 1 + 1);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("a numeric\nb numerik\n", 2),
            ("a numeric raw raw\n", 1),
            ("\n\na categorical\n", 3),
            ("a categorical A,,C\n", 1),
            ("a numeric all-zero\n", 1),
            ("a binary\n", 1),
            ("a numeric\n@label\n", 2),
            ("a numeric\na numeric\n", 2),
            ("a categorical A,C onehot reject all-zero\n", 1),
            ("# nothing\n", 1),
        ];
        for (text, line) in cases {
            match parse_schema(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn label_clash_is_a_schema_error() {
        assert!(matches!(
            parse_schema("@label a\na numeric\n"),
            Err(Error::Schema(_))
        ));
    }
}
