//! Confusion-style reports, stratified splits and synthetic cohorts.
//!
//! Random streams come from xoshiro256** seeded through the SplitMix64
//! expansion of a `u64` seed. A uniform double in `[0, 1)` is
//! `(next_u64 >> 11) * 2^-53`. Both are fixed so that a seed yields the same
//! cohort on every platform.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::vector::{FeatureVector, Label};

/// Column headers of a report, in order.
pub const REPORT_COLUMNS: [&str; 8] = [
    "Test",
    "No of Patients",
    "+1 labeled",
    "-1 labeled",
    "C(bound)",
    "Misclassified",
    "postoneg",
    "negtopos",
];

/// Error counts of one classifier on one labeled table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionReport {
    pub n_total: usize,
    pub n_pos_labeled: usize,
    pub n_neg_labeled: usize,
    pub c_bound: f64,
    pub misclassified: usize,
    /// `+1`-labeled points predicted `-1`.
    pub postoneg: usize,
    /// `-1`-labeled points predicted `+1`.
    pub negtopos: usize,
}

impl ConfusionReport {
    pub fn from_counts(
        n_pos_labeled: usize,
        n_neg_labeled: usize,
        c_bound: f64,
        postoneg: usize,
        negtopos: usize,
    ) -> Result<ConfusionReport> {
        let report = ConfusionReport {
            n_total: n_pos_labeled + n_neg_labeled,
            n_pos_labeled,
            n_neg_labeled,
            c_bound,
            misclassified: postoneg + negtopos,
            postoneg,
            negtopos,
        };
        report.check()?;
        Ok(report)
    }

    pub fn check(&self) -> Result<()> {
        if self.misclassified != self.postoneg + self.negtopos
            || self.postoneg > self.n_pos_labeled
            || self.negtopos > self.n_neg_labeled
            || self.n_pos_labeled + self.n_neg_labeled != self.n_total
        {
            return Err(Error::InvalidData(format!(
                "inconsistent report counts: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn error_rate(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.misclassified as f64 / self.n_total as f64
        }
    }
}

/// Counts prediction errors of `model` on `data`.
pub fn evaluate(
    model: &Model,
    data: &[(FeatureVector, Label)],
    c_bound: f64,
) -> Result<ConfusionReport> {
    let (mut pos, mut neg, mut postoneg, mut negtopos) = (0, 0, 0, 0);
    for (x, y) in data {
        let predicted = model.predict(x)?;
        match (y, predicted) {
            (Label::Positive, p) => {
                pos += 1;
                postoneg += usize::from(p == Label::Negative);
            }
            (Label::Negative, p) => {
                neg += 1;
                negtopos += usize::from(p == Label::Positive);
            }
        }
    }
    ConfusionReport::from_counts(pos, neg, c_bound, postoneg, negtopos)
}

fn report_cells(report: &ConfusionReport, row: usize) -> [String; 8] {
    [
        format!("{row}"),
        format!("{}", report.n_total),
        format!("{}", report.n_pos_labeled),
        format!("{}", report.n_neg_labeled),
        format!("{}", report.c_bound),
        format!("{}", report.misclassified),
        format!("{}", report.postoneg),
        format!("{}", report.negtopos),
    ]
}

/// Fixed-width table with one numbered row per report.
///
/// Each column is as wide as its header (or its widest cell), cells are
/// right-aligned and separated by ` | `.
pub fn render_report(reports: &[ConfusionReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidData("cannot render an empty report".into()));
    }
    let rows: Vec<[String; 8]> = reports
        .iter()
        .enumerate()
        .map(|(k, r)| report_cells(r, k + 1))
        .collect();
    let mut widths = REPORT_COLUMNS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let header: Vec<String> = REPORT_COLUMNS
        .iter()
        .zip(&widths)
        .map(|(h, w)| format!("{h:<w$}"))
        .collect();
    out.push_str(header.join(" | ").trim_end());
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(&cells.join(" | "));
        out.push('\n');
    }
    Ok(out)
}

/// Same columns as [`render_report`], comma separated.
pub fn render_report_csv(reports: &[ConfusionReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidData("cannot render an empty report".into()));
    }
    let mut out = String::new();
    out.push_str(&REPORT_COLUMNS.join(","));
    out.push('\n');
    for (k, r) in reports.iter().enumerate() {
        let _ = writeln!(out, "{}", report_cells(r, k + 1).join(","));
    }
    Ok(out)
}

fn uniform01(rng: &mut Xoshiro256StarStar) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform_symmetric(rng: &mut Xoshiro256StarStar) -> f64 {
    2.0 * uniform01(rng) - 1.0
}

/// Fisher-Yates with the crate's generator.
fn shuffle(items: &mut [usize], rng: &mut Xoshiro256StarStar) {
    for k in (1..items.len()).rev() {
        let r = (rng.next_u64() % (k as u64 + 1)) as usize;
        items.swap(k, r);
    }
}

/// Labeled items in input order.
pub type Labeled<T> = Vec<(T, Label)>;

/// Splits `data` into `(train, test)` with about `fraction` of the points in
/// the training part.
///
/// The split is stratified by label: the training size `round(fraction * n)`
/// is shared between the classes by largest remainder, and any class with at
/// least two members keeps one member on each side. Within each part the
/// original order is preserved.
pub fn split<T: Clone>(
    data: &[(T, Label)],
    fraction: f64,
    seed: u64,
) -> Result<(Labeled<T>, Labeled<T>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidData(format!(
            "need at least 2 samples to split, got {n}"
        )));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (k, (_, y)) in data.iter().enumerate() {
        classes[usize::from(*y == Label::Negative)].push(k);
    }

    let target = libm::round(fraction * n as f64).clamp(1.0, (n - 1) as f64) as usize;
    let exact: [f64; 2] = classes.each_ref().map(|c| fraction * c.len() as f64);
    let mut quota: [usize; 2] = exact.map(|q| libm::floor(q) as usize);
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - quota[a] as f64;
        let rb = exact[b] - quota[b] as f64;
        rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut remaining = target.saturating_sub(quota[0] + quota[1]);
    for &c in &order {
        if remaining > 0 && quota[c] < classes[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    // Classes with two or more members keep one on each side.
    let bounds: [(usize, usize); 2] = classes.each_ref().map(|c| match c.len() {
        size if size >= 2 => (1, size - 1),
        size => (0, size),
    });
    for c in 0..2 {
        quota[c] = quota[c].clamp(bounds[c].0, bounds[c].1);
    }
    for &c in order.iter().rev() {
        while quota[0] + quota[1] > target && quota[c] > bounds[c].0 {
            quota[c] -= 1;
        }
    }
    for &c in &order {
        while quota[0] + quota[1] < target && quota[c] < bounds[c].1 {
            quota[c] += 1;
        }
    }

    let mut in_train = alloc::vec![false; n];
    for c in 0..2 {
        let mut members = classes[c].clone();
        shuffle(&mut members, &mut rng);
        for &k in &members[..quota[c]] {
            in_train[k] = true;
        }
    }
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target);
    for (item, &t) in data.iter().zip(&in_train) {
        if t {
            train.push(item.clone());
        } else {
            test.push(item.clone());
        }
    }
    Ok((train, test))
}

/// Description of a labeled cohort drawn around a planted hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohortSpec {
    pub n: usize,
    pub dim: usize,
    pub planted_weights: Vec<f64>,
    pub planted_bias: f64,
    /// Probability of flipping each label, in `[0, 0.5)`.
    pub label_noise_rate: f64,
    pub seed: u64,
}

impl SyntheticCohortSpec {
    /// Cohort whose planted weights are drawn uniformly from `[-1, 1]^dim`
    /// with a generator seeded by `seed`, and zero bias.
    pub fn with_random_plane(
        n: usize,
        dim: usize,
        label_noise_rate: f64,
        seed: u64,
    ) -> SyntheticCohortSpec {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let planted_weights = (0..dim).map(|_| uniform_symmetric(&mut rng)).collect();
        SyntheticCohortSpec {
            n,
            dim,
            planted_weights,
            planted_bias: 0.0,
            label_noise_rate,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 {
            return Err(Error::InvalidConfig(
                "cohort needs n >= 1 and dim >= 1".into(),
            ));
        }
        if self.planted_weights.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: self.planted_weights.len(),
            });
        }
        if self.planted_weights.iter().any(|w| !w.is_finite()) || !self.planted_bias.is_finite() {
            return Err(Error::InvalidConfig(
                "planted hyperplane must be finite".into(),
            ));
        }
        if self.planted_weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidConfig("planted weights are all zero".into()));
        }
        if !(0.0..0.5).contains(&self.label_noise_rate) {
            return Err(Error::InvalidConfig(format!(
                "label noise rate must be in [0, 0.5), got {}",
                self.label_noise_rate
            )));
        }
        Ok(())
    }

    fn planted_value(&self, x: &[f64]) -> f64 {
        self.planted_weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.planted_bias
    }

    /// Label the planted hyperplane assigns to `x`, before noise.
    pub fn clean_label(&self, x: &FeatureVector) -> Label {
        Label::from_sign(self.planted_value(&x.to_dense()))
    }
}

/// Draws `spec.n` points uniformly from `[-1, 1]^dim`, labels them by the
/// sign of the planted hyperplane and flips each label independently with
/// probability `label_noise_rate`. Points lying exactly on the plane are
/// redrawn.
pub fn generate_cohort(spec: &SyntheticCohortSpec) -> Result<Vec<(FeatureVector, Label)>> {
    spec.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n);
    let mut x = alloc::vec![0.0; spec.dim];
    while out.len() < spec.n {
        for v in x.iter_mut() {
            *v = uniform_symmetric(&mut rng);
        }
        let margin = spec.planted_value(&x);
        let flip = uniform01(&mut rng) < spec.label_noise_rate;
        if margin == 0.0 {
            continue;
        }
        let clean = Label::from_sign(margin);
        let label = if flip { clean.flipped() } else { clean };
        out.push((FeatureVector::from_dense(&x)?, label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;

    #[test]
    fn table_identity() {
        let r = ConfusionReport::from_counts(212, 788, 1.0, 32, 24).unwrap();
        assert_eq!(r.misclassified, 56);
        assert_eq!(r.n_total, 1000);
        let r = ConfusionReport::from_counts(212, 788, 2.0, 23, 18).unwrap();
        assert_eq!(r.misclassified, 41);
        assert!(ConfusionReport::from_counts(2, 5, 1.0, 3, 0).is_err());
    }

    #[test]
    fn perfect_model_has_no_errors() {
        let model = Model::new(
            Kernel::Linear,
            0.0,
            1.0,
            1,
            vec![FeatureVector::from_dense(&[1.0]).unwrap()],
            vec![1.0],
        )
        .unwrap();
        let data: Vec<_> = [-2.0, -1.0, 1.0, 3.0]
            .iter()
            .map(|&x| {
                (
                    FeatureVector::from_dense(&[x]).unwrap(),
                    Label::from_sign(x),
                )
            })
            .collect();
        let r = evaluate(&model, &data, 1.0).unwrap();
        assert_eq!((r.misclassified, r.postoneg, r.negtopos), (0, 0, 0));
        assert_eq!((r.n_pos_labeled, r.n_neg_labeled), (2, 2));
    }

    #[test]
    fn render_single_row() {
        let r = ConfusionReport::from_counts(3, 4, 1.0, 0, 0).unwrap();
        let text = render_report(&[r]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "Test | No of Patients | +1 labeled | -1 labeled | C(bound) | Misclassified | postoneg | negtopos"
        );
        assert_eq!(lines.len(), 3);
        let cells: Vec<&str> = lines[2].split('|').map(str::trim).collect();
        assert_eq!(cells, ["1", "7", "3", "4", "1", "0", "0", "0"]);
        assert!(render_report(&[]).is_err());
        assert!(render_report_csv(&[]).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let data: Vec<(usize, Label)> = (0..10)
            .map(|k| {
                (
                    k,
                    if k % 2 == 0 {
                        Label::Positive
                    } else {
                        Label::Negative
                    },
                )
            })
            .collect();
        let (train, test) = split(&data, 0.8, 3).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        assert_eq!(split(&data, 0.8, 3).unwrap(), (train.clone(), test.clone()));
        assert!(train.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(test.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn split_balanced_halves() {
        let data = vec![
            (0, Label::Positive),
            (1, Label::Negative),
            (2, Label::Positive),
            (3, Label::Negative),
        ];
        for seed in 0..20 {
            let (train, test) = split(&data, 0.5, seed).unwrap();
            for part in [&train, &test] {
                assert_eq!(part.len(), 2);
                assert!(part.iter().any(|(_, y)| *y == Label::Positive));
                assert!(part.iter().any(|(_, y)| *y == Label::Negative));
            }
        }
    }

    #[test]
    fn split_rejects_bad_input() {
        let one = vec![(0, Label::Positive)];
        assert!(split(&one, 0.5, 0).is_err());
        let two = vec![(0, Label::Positive), (1, Label::Negative)];
        assert!(split(&two, 1.0, 0).is_err());
        assert!(split(&two, 0.0, 0).is_err());
    }

    #[test]
    fn noise_free_cohort_is_separable() {
        let spec = SyntheticCohortSpec::with_random_plane(300, 5, 0.0, 11);
        let cohort = generate_cohort(&spec).unwrap();
        assert_eq!(cohort.len(), 300);
        for (x, y) in &cohort {
            assert!(y.as_f64() * spec.planted_value(&x.to_dense()) > 0.0);
        }
        assert_eq!(generate_cohort(&spec).unwrap(), cohort);
    }

    #[test]
    fn cohort_validation() {
        let mut spec = SyntheticCohortSpec::with_random_plane(10, 3, 0.6, 1);
        assert!(generate_cohort(&spec).is_err());
        spec.label_noise_rate = 0.1;
        spec.planted_weights = vec![0.0; 3];
        assert!(generate_cohort(&spec).is_err());
        spec.planted_weights = vec![1.0; 2];
        assert!(generate_cohort(&spec).is_err());
    }
}
