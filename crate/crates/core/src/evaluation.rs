//! Multiclass and multi-label metrics plus k-fold cross-validation.
//!
//! Abstentions (absent predictions) count toward the gold class's false
//! negatives and reduce coverage, but never create a false positive;
//! accuracy is taken over predicted items only, mirroring systems that
//! report accuracy and coverage separately.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};

/// Per-class tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub true_pos: u32,
    pub false_pos: u32,
    pub false_neg: u32,
}

/// Confusion tallies over a prediction run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts<L: Ord> {
    pub per_class: BTreeMap<L, ClassCounts>,
    pub n_total: usize,
    /// Items that received a (non-abstained) prediction.
    pub n_predicted: usize,
}

/// Tallies predictions against golds. `None` predictions are abstentions.
pub fn confusion_counts<L: Ord + Clone>(
    preds: &[Option<L>],
    golds: &[L],
) -> Result<ConfusionCounts<L>> {
    if preds.len() != golds.len() {
        return Err(Error::Parameter(format!(
            "{} predictions vs {} golds",
            preds.len(),
            golds.len()
        )));
    }
    let mut per_class: BTreeMap<L, ClassCounts> = BTreeMap::new();
    let mut n_predicted = 0;
    for (pred, gold) in preds.iter().zip(golds) {
        match pred {
            Some(p) => {
                n_predicted += 1;
                if p == gold {
                    per_class.entry(p.clone()).or_default().true_pos += 1;
                } else {
                    per_class.entry(p.clone()).or_default().false_pos += 1;
                    per_class.entry(gold.clone()).or_default().false_neg += 1;
                }
            }
            None => {
                per_class.entry(gold.clone()).or_default().false_neg += 1;
            }
        }
    }
    Ok(ConfusionCounts {
        per_class,
        n_total: preds.len(),
        n_predicted,
    })
}

/// Per-class precision/recall/F1 alongside the raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub counts: ClassCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Macro-averaged metrics. Macro means are unweighted over classes
/// present in gold; macro-F1 is the mean of per-class F1 values.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<L: Ord> {
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Fraction correct among predicted items.
    pub accuracy: f64,
    /// n_predicted / n_total.
    pub coverage: f64,
    pub per_class: BTreeMap<L, ClassMetrics>,
    pub hamming_loss: Option<f64>,
    pub zero_one_loss: Option<f64>,
}

fn ratio(num: u32, den: u32) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Derives the report from confusion tallies.
pub fn macro_metrics<L: Ord + Clone>(counts: &ConfusionCounts<L>) -> Result<EvalReport<L>> {
    if counts.n_total == 0 || counts.per_class.is_empty() {
        return Err(Error::DegenerateInput("no items to evaluate".into()));
    }
    let mut per_class = BTreeMap::new();
    let mut macro_p = 0.0;
    let mut macro_r = 0.0;
    let mut macro_f1 = 0.0;
    let mut n_gold_classes = 0usize;
    let mut total_tp = 0u32;
    for (label, &c) in &counts.per_class {
        let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
        let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        total_tp += c.true_pos;
        // Only classes that actually occur in gold enter the macro means.
        if c.true_pos + c.false_neg > 0 {
            n_gold_classes += 1;
            macro_p += precision;
            macro_r += recall;
            macro_f1 += f1;
        }
        per_class.insert(
            label.clone(),
            ClassMetrics {
                counts: c,
                precision,
                recall,
                f1,
            },
        );
    }
    if n_gold_classes == 0 {
        return Err(Error::DegenerateInput("no gold classes present".into()));
    }
    let n = n_gold_classes as f64;
    Ok(EvalReport {
        macro_precision: macro_p / n,
        macro_recall: macro_r / n,
        macro_f1: macro_f1 / n,
        accuracy: if counts.n_predicted == 0 {
            0.0
        } else {
            total_tp as f64 / counts.n_predicted as f64
        },
        coverage: counts.n_predicted as f64 / counts.n_total as f64,
        per_class,
        hamming_loss: None,
        zero_one_loss: None,
    })
}

impl<L: Ord + Display> EvalReport<L> {
    /// Flat metric map for aggregation and the key/value report file.
    pub fn metric_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("macro_precision".into(), self.macro_precision);
        m.insert("macro_recall".into(), self.macro_recall);
        m.insert("macro_f1".into(), self.macro_f1);
        m.insert("accuracy".into(), self.accuracy);
        m.insert("coverage".into(), self.coverage);
        if let Some(h) = self.hamming_loss {
            m.insert("hamming_loss".into(), h);
        }
        if let Some(z) = self.zero_one_loss {
            m.insert("zero_one_loss".into(), z);
        }
        m
    }

    /// Machine-readable key/value lines: `<key> <value>`, one per line,
    /// keys sorted; per-class rows as `class_<label>_<metric>`.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metric_map() {
            out.push_str(&format!("{k} {v}\n"));
        }
        for (label, cm) in &self.per_class {
            out.push_str(&format!("class_{label}_precision {}\n", cm.precision));
            out.push_str(&format!("class_{label}_recall {}\n", cm.recall));
            out.push_str(&format!("class_{label}_f1 {}\n", cm.f1));
        }
        out
    }

    /// Aligned-column text for standard output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<18} {:>10} {:>10} {:>10}\n",
            "class", "precision", "recall", "f1"
        ));
        for (label, cm) in &self.per_class {
            out.push_str(&format!(
                "{:<18} {:>10.4} {:>10.4} {:>10.4}\n",
                label.to_string(),
                cm.precision,
                cm.recall,
                cm.f1
            ));
        }
        out.push_str(&format!(
            "{:<18} {:>10.4} {:>10.4} {:>10.4}\n",
            "macro", self.macro_precision, self.macro_recall, self.macro_f1
        ));
        out.push_str(&format!(
            "accuracy {:.4}  coverage {:.4}\n",
            self.accuracy, self.coverage
        ));
        if let (Some(h), Some(z)) = (self.hamming_loss, self.zero_one_loss) {
            out.push_str(&format!("hamming_loss {h:.4}  zero_one_loss {z:.4}\n"));
        }
        out
    }
}

/// Hamming loss (mean symmetric-difference fraction over the label
/// universe) and zero-one loss (fraction of items with any mismatch).
pub fn multilabel_losses(
    pred_sets: &[BTreeSet<String>],
    gold_sets: &[BTreeSet<String>],
    universe: &BTreeSet<String>,
) -> Result<(f64, f64)> {
    if universe.is_empty() {
        return Err(Error::Parameter("empty label universe".into()));
    }
    if pred_sets.len() != gold_sets.len() {
        return Err(Error::Parameter(format!(
            "{} prediction sets vs {} gold sets",
            pred_sets.len(),
            gold_sets.len()
        )));
    }
    for sets in [pred_sets, gold_sets] {
        for s in sets {
            if !s.is_subset(universe) {
                return Err(Error::Parameter(
                    "label set contains labels outside the universe".into(),
                ));
            }
        }
    }
    if pred_sets.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut hamming = 0.0;
    let mut wrong = 0usize;
    for (p, g) in pred_sets.iter().zip(gold_sets) {
        let sym = p.symmetric_difference(g).count();
        hamming += sym as f64 / universe.len() as f64;
        if p != g {
            wrong += 1;
        }
    }
    let n = pred_sets.len() as f64;
    Ok((hamming / n, wrong as f64 / n))
}

/// Seeded shuffle then contiguous partition into `k` disjoint, exhaustive
/// folds whose sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Parameter(format!(
            "fold count must satisfy 2 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let base = n / k;
    let rem = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < rem);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Mean, standard deviation and the raw per-fold values of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub per_fold: Vec<f64>,
}

impl MetricSummary {
    fn from_values(values: Vec<f64>) -> MetricSummary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MetricSummary {
            mean,
            std: var.sqrt(),
            per_fold: values,
        }
    }
}

/// Aggregated cross-validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub metrics: BTreeMap<String, MetricSummary>,
    pub notes: Vec<String>,
    /// False when a fold aborted; metrics then cover the completed folds.
    pub valid: bool,
}

impl CvReport {
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("valid {}\n", self.valid));
        for (key, s) in &self.metrics {
            out.push_str(&format!("{key}_mean {}\n", s.mean));
            out.push_str(&format!("{key}_std {}\n", s.std));
            for (i, v) in s.per_fold.iter().enumerate() {
                out.push_str(&format!("{key}_fold_{i} {v}\n"));
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note {note}\n"));
        }
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<18} {:>10} {:>10}\n", "metric", "mean", "std"));
        for (key, s) in &self.metrics {
            out.push_str(&format!("{:<18} {:>10.4} {:>10.4}\n", key, s.mean, s.std));
        }
        if !self.valid {
            out.push_str("WARNING: partial report, a fold aborted\n");
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

/// Runs k-fold cross-validation over a labeled corpus. `run_fold` trains
/// on the training split and returns a metric map for the held-out split;
/// fold failures abort and flag the partial report invalid.
pub fn cross_validate<F>(
    data: &DocumentSet,
    k: usize,
    seed: u64,
    mut run_fold: F,
) -> Result<CvReport>
where
    F: FnMut(&DocumentSet, &DocumentSet) -> Result<BTreeMap<String, f64>>,
{
    let n = data.len();
    let folds = kfold_split(n, k, seed)?;
    let mut notes = Vec::new();
    for (group, ids) in data.label_index() {
        if ids.len() < k {
            notes.push(format!(
                "class {group} has {} instances, fewer than {k} folds",
                ids.len()
            ));
        }
    }
    let docs = data.docs();
    let mut per_fold_metrics: Vec<BTreeMap<String, f64>> = Vec::new();
    let mut valid = true;
    for (fold_id, fold) in folds.iter().enumerate() {
        let in_fold: BTreeSet<usize> = fold.iter().copied().collect();
        let train: Vec<_> = (0..n)
            .filter(|i| !in_fold.contains(i))
            .map(|i| docs[i].clone())
            .collect();
        let test: Vec<_> = fold.iter().map(|&i| docs[i].clone()).collect();
        let train_set = DocumentSet::new(train)?;
        let test_set = DocumentSet::new(test)?;
        match run_fold(&train_set, &test_set) {
            Ok(metrics) => per_fold_metrics.push(metrics),
            Err(e) => {
                notes.push(format!("fold {fold_id} aborted: {e}"));
                valid = false;
                break;
            }
        }
    }
    let mut keys: BTreeSet<String> = BTreeSet::new();
    for m in &per_fold_metrics {
        keys.extend(m.keys().cloned());
    }
    let mut metrics = BTreeMap::new();
    for key in keys {
        let values: Vec<f64> = per_fold_metrics
            .iter()
            .filter_map(|m| m.get(&key).copied())
            .collect();
        if !values.is_empty() {
            metrics.insert(key, MetricSummary::from_values(values));
        }
    }
    Ok(CvReport {
        metrics,
        notes,
        valid,
    })
}
