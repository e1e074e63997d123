#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use margin_forge::sparse::{SparseDataset, SparseExample};
use margin_forge_core::eval::{generate_cohort, SyntheticCohortSpec};
use margin_forge_core::{FeatureVector, Kernel, Label, Model};
use proptest::prelude::*;

pub const BIN: &str = env!("CARGO_BIN_EXE_margin-forge");

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("MARGIN_FORGE_LOG")
        .output()
        .expect("spawn margin-forge")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Runs and panics with stderr on failure.
pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", stderr(&out));
    stdout(&out)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub const COHORT_SCHEMA: &str = "\
# desk-scale cardio table
age     numeric
rs1801  categorical A,C,G,T onehot
rs2234  categorical A,C,G,T scalar extra-category
smoker  binary yes
";

/// 1000 patients, `positives` of whom have at least one of
/// heart_attack/stroke/heart_failure set to `yes`.
pub fn cohort_csv(positives: usize) -> String {
    let n = 1000;
    let mut text = String::from("id,age,rs1801,rs2234,smoker,heart_attack,stroke,heart_failure\n");
    for k in 0..n {
        // Exactly `positives` rows where the running quota increases.
        let positive = (k + 1) * positives / n > k * positives / n;
        let age = if k % 17 == 0 {
            String::new()
        } else {
            (30 + k % 50).to_string()
        };
        let snp = ["A", "C", "G", "T"][k % 4];
        let snp2 = ["A", "C", "G", "T", ""][k % 5];
        let smoker = if k % 3 == 0 { "yes" } else { "no" };
        let mut history = ["no", "", "NO"];
        if positive {
            history[k % 3] = ["yes", "Y", "TRUE"][k % 3];
        }
        text.push_str(&format!(
            "{k},{age},{snp},{snp2},{smoker},{},{},{}\n",
            history[0], history[1], history[2]
        ));
    }
    text
}

/// A labeled cohort plus a model that classifies its clean labels
/// perfectly, with labels flipped so that exactly `postoneg` `+1` labels and
/// `negtopos` `-1` labels disagree with the model.
pub struct Fixture {
    pub model: Model,
    pub data: Vec<(FeatureVector, Label)>,
}

pub fn flipped_fixture(
    n_pos: usize,
    n_neg: usize,
    c_bound: f64,
    postoneg: usize,
    negtopos: usize,
) -> Fixture {
    let dim = 20;
    // Labeled counts after flipping: pos = clean_pos - negtopos + postoneg.
    let clean_pos = n_pos + negtopos - postoneg;
    let clean_neg = n_neg + postoneg - negtopos;
    let spec = SyntheticCohortSpec::with_random_plane(4 * (n_pos + n_neg), dim, 0.0, 11);
    let pool = generate_cohort(&spec).unwrap();
    let (mut took_pos, mut took_neg) = (0, 0);
    let mut data = Vec::new();
    for (x, y) in pool {
        let take = match y {
            Label::Positive if took_pos < clean_pos => {
                took_pos += 1;
                // The first `negtopos` clean positives get the wrong label.
                if took_pos <= negtopos {
                    Some(Label::Negative)
                } else {
                    Some(y)
                }
            }
            Label::Negative if took_neg < clean_neg => {
                took_neg += 1;
                if took_neg <= postoneg {
                    Some(Label::Positive)
                } else {
                    Some(y)
                }
            }
            _ => None,
        };
        if let Some(label) = take {
            data.push((x, label));
        }
    }
    assert_eq!(
        (took_pos, took_neg),
        (clean_pos, clean_neg),
        "pool too small"
    );
    let w = FeatureVector::from_dense(&spec.planted_weights).unwrap();
    // One unit-coefficient "support vector" equal to w gives f(x) = w.x + b.
    let model = Model::new(
        Kernel::Linear,
        spec.planted_bias,
        c_bound,
        dim,
        vec![w],
        vec![1.0_f64.min(c_bound)],
    )
    .unwrap();
    Fixture { model, data }
}

pub fn temp_path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

pub fn finite_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

pub fn sparse_example(max_dim: usize) -> impl Strategy<Value = SparseExample> {
    (
        any::<bool>(),
        prop::collection::btree_map(1..=max_dim, finite_value(), 0..8),
    )
        .prop_map(|(positive, entries)| SparseExample {
            label: if positive {
                Label::Positive
            } else {
                Label::Negative
            },
            entries: entries.into_iter().collect(),
        })
}

pub fn sparse_dataset() -> impl Strategy<Value = SparseDataset> {
    (
        prop::collection::vec(sparse_example(50), 0..20),
        prop::option::of(50usize..60),
    )
        .prop_map(|(examples, dim)| SparseDataset { dim, examples })
}
