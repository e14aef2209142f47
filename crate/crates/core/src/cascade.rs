//! Two-stage orchestration: balance the training set, train the coarse
//! SOC classifier over full text, cluster each major group's titles into
//! a vertical k-NN classifier, and route documents coarse → fine.
//!
//! Group aliases (e.g. healthcare = {29, 31}) are merged before both
//! coarse training and vertical construction, so the coarse classifier
//! routes directly to the merged vertical. A document routed to a group
//! without a vertical — or matching nothing inside one — abstains rather
//! than erroring; coverage accounting happens in `evaluation`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::corpus::{Document, DocumentSet};
use crate::error::{Error, Result};
use crate::evaluation::{
    confusion_counts, cross_validate, multilabel_losses, CvReport, EvalReport,
};
use crate::linear_svm::{
    predict, train_crammer_singer, train_ova, LabeledInstance, LinearModel, SvmParams,
};
use crate::proximity_knn::{build_index, classify_knn, ProximityIndex};
use crate::scalar::Scalar;
use crate::textprep::TextPipeline;
use crate::title_cluster::{cluster_corpus, ClusterSet};
use crate::vectorspace::{SparseVector, TfIdfModel};

/// One fine-level classifier: the induced clusters and their index.
#[derive(Debug, Clone)]
pub struct Vertical<T> {
    pub clusters: ClusterSet<T>,
    pub index: ProximityIndex<T>,
}

/// The trained two-stage model.
#[derive(Debug, Clone)]
pub struct CascadeModel<T> {
    /// Coarse classifier; class id `i` means `group_keys[i]`.
    pub coarse: LinearModel<T>,
    /// Feature space of the coarse classifier (full-text tf-idf).
    pub features: TfIdfModel<T>,
    pub pipeline: TextPipeline,
    /// Sorted group keys: two-digit majors ("15") or alias names.
    pub group_keys: Vec<String>,
    pub verticals: BTreeMap<String, Vertical<T>>,
    pub aliases: BTreeMap<String, Vec<u8>>,
    /// Config snapshot the model was trained with.
    pub config: Config,
    /// Build-time diagnostics (skipped verticals etc.); not persisted.
    pub build_notes: Vec<String>,
}

/// Maps a SOC major group to its group key, honoring aliases.
pub fn resolve_group(aliases: &BTreeMap<String, Vec<u8>>, major: u8) -> String {
    for (name, majors) in aliases {
        if majors.contains(&major) {
            return name.clone();
        }
    }
    major.to_string()
}

impl<T: Scalar> CascadeModel<T> {
    pub fn resolve_group(&self, major: u8) -> String {
        resolve_group(&self.aliases, major)
    }

    /// Feature vector of a document in the coarse space.
    pub fn featurize(&self, doc: &Document) -> Result<SparseVector<T>> {
        featurize(&self.features, &self.pipeline, self.config.bias, doc)
    }
}

fn featurize<T: Scalar>(
    features: &TfIdfModel<T>,
    pipeline: &TextPipeline,
    bias: bool,
    doc: &Document,
) -> Result<SparseVector<T>> {
    let seq = pipeline.terms(&doc.id, &doc.full_text())?;
    let v = features.tfidf_vector(&seq);
    if !bias {
        return Ok(v);
    }
    let mut pairs: Vec<(usize, T)> = v.iter().collect();
    pairs.push((features.vocabulary().len(), T::one()));
    SparseVector::from_pairs(pairs)
}

/// Documents of each class in excess of `base_count` are down-sampled
/// uniformly at random (seeded, without replacement); smaller classes are
/// kept whole. Classes are the alias-resolved gold major groups;
/// unlabeled documents are dropped. Output preserves input order.
pub fn balance_undersample(
    data: &DocumentSet,
    base_count: usize,
    seed: u64,
    aliases: &BTreeMap<String, Vec<u8>>,
) -> Result<DocumentSet> {
    if base_count < 1 {
        return Err(Error::Parameter(format!(
            "base_count must be >= 1, got {base_count}"
        )));
    }
    let mut groups: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for doc in data.iter() {
        if let Some(code) = &doc.gold_soc {
            groups
                .entry(resolve_group(aliases, code.major_group()))
                .or_default()
                .push(doc.id.as_str());
        }
    }
    if groups.is_empty() {
        return Err(Error::DegenerateInput("no labeled documents".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: HashSet<&str> = HashSet::new();
    for ids in groups.values() {
        if ids.len() > base_count {
            let chosen = rand::seq::index::sample(&mut rng, ids.len(), base_count);
            for i in chosen.iter() {
                keep.insert(ids[i]);
            }
        } else {
            keep.extend(ids.iter().copied());
        }
    }
    data.filtered(&keep)
}

fn labeled_group_keys(data: &DocumentSet, aliases: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut keys: BTreeSet<String> = BTreeSet::new();
    for major in data.label_index().keys() {
        keys.insert(resolve_group(aliases, *major));
    }
    keys.into_iter().collect()
}

/// Trains the full cascade: balance, coarse SVM over full text, then one
/// vertical (title clustering + index) per group with at least
/// `min_group_size` balanced documents. Groups whose clustering comes out
/// degenerate are skipped with a note and route to abstention.
pub fn train_cascade<T: Scalar>(data: &DocumentSet, config: &Config) -> Result<CascadeModel<T>> {
    config.validate().map_err(|e| match e {
        Error::Config(m) => Error::Parameter(m),
        other => other,
    })?;
    let pipeline = config.pipeline()?;
    let groups = labeled_group_keys(data, &config.aliases);
    if groups.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "cascade training needs at least 2 major groups, got {}",
            groups.len()
        )));
    }

    let balanced = balance_undersample(data, config.base_count, config.seed, &config.aliases)?;
    let group_keys = labeled_group_keys(&balanced, &config.aliases);
    let class_of: BTreeMap<&str, i32> = group_keys
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i as i32))
        .collect();

    // Coarse features over title + description + requirements.
    let mut seqs = Vec::with_capacity(balanced.len());
    for doc in balanced.iter() {
        seqs.push(pipeline.terms(&doc.id, &doc.full_text())?);
    }
    let features: TfIdfModel<T> = TfIdfModel::fit(&seqs, config.min_df)?;
    let n_features = features.vocabulary().len() + usize::from(config.bias);
    let mut instances = Vec::with_capacity(balanced.len());
    for doc in balanced.iter() {
        let x = featurize(&features, &pipeline, config.bias, doc)?;
        let code = doc.gold_soc.as_ref().expect("balanced docs are labeled");
        let key = resolve_group(&config.aliases, code.major_group());
        instances.push(LabeledInstance::new(x, class_of[key.as_str()]));
    }
    let svm_params = SvmParams {
        c: config.c,
        tol: config.tol,
        max_epochs: config.max_iters,
        seed: config.seed,
        classes: None,
    };
    let coarse = match config.strategy {
        crate::config::Strategy::Ova => train_ova(&instances, n_features, &svm_params)?,
        crate::config::Strategy::CrammerSinger => {
            train_crammer_singer(&instances, n_features, &svm_params)?
        }
    };

    // Vertical classifiers per group.
    let mut verticals = BTreeMap::new();
    let mut build_notes = Vec::new();
    if !coarse.converged {
        build_notes.push("coarse SVM hit the epoch cap before tolerance".to_string());
    }
    for (slot, key) in group_keys.iter().enumerate() {
        let ids: HashSet<&str> = balanced
            .iter()
            .filter(|d| {
                d.gold_soc
                    .as_ref()
                    .map(|c| resolve_group(&config.aliases, c.major_group()) == *key)
                    .unwrap_or(false)
            })
            .map(|d| d.id.as_str())
            .collect();
        if ids.len() < config.min_group_size {
            build_notes.push(format!(
                "group {key}: {} documents below min_group_size {}, no vertical",
                ids.len(),
                config.min_group_size
            ));
            continue;
        }
        let group_docs = balanced.filtered(&ids)?;
        let mut params = config.cluster_params();
        params.seed = config.seed.wrapping_add(slot as u64);
        match cluster_corpus::<T>(&group_docs, &pipeline, &params) {
            Ok(clusters) => {
                if clusters.n_clusters() == 1 {
                    // With a single meta-document every idf is zero, so
                    // queries come out empty and the vertical abstains.
                    build_notes.push(format!(
                        "group {key}: only one cluster, its index cannot score queries"
                    ));
                }
                let index = build_index(&clusters, &group_docs, &pipeline)?;
                verticals.insert(key.clone(), Vertical { clusters, index });
            }
            Err(Error::DegenerateInput(msg)) => {
                build_notes.push(format!(
                    "group {key}: clustering degenerate ({msg}), no vertical"
                ));
            }
            Err(other) => return Err(other),
        }
    }

    Ok(CascadeModel {
        coarse,
        features,
        pipeline,
        group_keys,
        verticals,
        aliases: config.aliases.clone(),
        config: config.clone(),
        build_notes,
    })
}

/// One routed prediction. `abstained` holds exactly when the fine list is
/// empty (missing vertical or no match inside it).
#[derive(Debug, Clone, PartialEq)]
pub struct CascadePrediction<T> {
    pub coarse_group: String,
    /// Score per group key, aligned with the model's `group_keys`.
    pub coarse_scores: Vec<(String, T)>,
    pub fine_titles: Vec<(String, T)>,
    pub abstained: bool,
}

/// Coarse predict, resolve the group, then rank within its vertical.
pub fn classify<T: Scalar>(
    model: &CascadeModel<T>,
    doc: &Document,
    k: usize,
) -> Result<CascadePrediction<T>> {
    if k < 1 {
        return Err(Error::Parameter(format!("k must be >= 1, got {k}")));
    }
    let x = model.featurize(doc)?;
    let (class_id, scores) = predict(&model.coarse, &x)?;
    let coarse_group = model.group_keys[class_id as usize].clone();
    let coarse_scores = model.group_keys.iter().cloned().zip(scores).collect();
    let fine_titles = match model.verticals.get(&coarse_group) {
        Some(vertical) => classify_knn(
            &vertical.index,
            doc,
            k,
            model.config.min_tf,
            &model.pipeline,
        )?,
        None => Vec::new(),
    };
    let abstained = fine_titles.is_empty();
    Ok(CascadePrediction {
        coarse_group,
        coarse_scores,
        fine_titles,
        abstained,
    })
}

/// Evaluation of a cascade over labeled documents.
#[derive(Debug, Clone)]
pub struct CascadeEval {
    /// Coarse-level report; abstained documents count as unpredicted, so
    /// `coverage` is the non-abstention rate.
    pub report: EvalReport<String>,
    /// Fraction of gold-titled documents whose top fine label is a gold
    /// title; absent when no document carries gold titles.
    pub fine_top1_rate: Option<f64>,
}

impl CascadeEval {
    pub fn metric_map(&self) -> BTreeMap<String, f64> {
        let mut m = self.report.metric_map();
        if let Some(rate) = self.fine_top1_rate {
            m.insert("fine_top1_rate".into(), rate);
        }
        m
    }
}

/// Classifies every labeled document and scores coarse routing, fine
/// top-1 agreement with gold titles, and multi-label losses over the
/// union universe of predicted and gold title sets.
pub fn evaluate_cascade<T: Scalar>(
    model: &CascadeModel<T>,
    data: &DocumentSet,
    k: usize,
) -> Result<CascadeEval> {
    let mut preds: Vec<Option<String>> = Vec::new();
    let mut golds: Vec<String> = Vec::new();
    let mut pred_sets: Vec<BTreeSet<String>> = Vec::new();
    let mut gold_sets: Vec<BTreeSet<String>> = Vec::new();
    let mut top1_hits = 0usize;
    let mut top1_total = 0usize;
    for doc in data.iter() {
        let Some(code) = &doc.gold_soc else { continue };
        let prediction = classify(model, doc, k)?;
        golds.push(model.resolve_group(code.major_group()));
        preds.push(if prediction.abstained {
            None
        } else {
            Some(prediction.coarse_group.clone())
        });
        if let Some(gold_titles) = &doc.gold_titles {
            top1_total += 1;
            let gold: BTreeSet<String> = gold_titles.iter().cloned().collect();
            if let Some((top, _)) = prediction.fine_titles.first() {
                if gold.contains(top) {
                    top1_hits += 1;
                }
            }
            pred_sets.push(
                prediction
                    .fine_titles
                    .iter()
                    .map(|(l, _)| l.clone())
                    .collect(),
            );
            gold_sets.push(gold);
        }
    }
    if golds.is_empty() {
        return Err(Error::DegenerateInput(
            "no labeled documents to evaluate".into(),
        ));
    }
    let counts = confusion_counts(&preds, &golds)?;
    let mut report = crate::evaluation::macro_metrics(&counts)?;
    if !pred_sets.is_empty() {
        let mut universe: BTreeSet<String> = BTreeSet::new();
        for s in pred_sets.iter().chain(gold_sets.iter()) {
            universe.extend(s.iter().cloned());
        }
        if !universe.is_empty() {
            let (hamming, zero_one) = multilabel_losses(&pred_sets, &gold_sets, &universe)?;
            report.hamming_loss = Some(hamming);
            report.zero_one_loss = Some(zero_one);
        }
    }
    Ok(CascadeEval {
        report,
        fine_top1_rate: if top1_total > 0 {
            Some(top1_hits as f64 / top1_total as f64)
        } else {
            None
        },
    })
}

/// Trains a cascade per fold and aggregates the evaluation metrics.
pub fn cross_validate_cascade<T: Scalar>(
    data: &DocumentSet,
    config: &Config,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    cross_validate(data, folds, seed, |train, test| {
        let model = train_cascade::<T>(train, config)?;
        let eval = evaluate_cascade(&model, test, config.k)?;
        Ok(eval.metric_map())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SocCode;
    use crate::proximity_knn::classify_knn;

    fn doc(id: &str, title: &str, desc: &str, soc: Option<&str>) -> Document {
        Document {
            id: id.to_string(),
            title: title.to_string(),
            description: desc.to_string(),
            requirements: String::new(),
            gold_soc: soc.map(|s| SocCode::parse(s).unwrap()),
            gold_titles: None,
        }
    }

    /// Two well-separated groups: SOC 15 software titles and SOC 29
    /// nursing titles, each title repeated enough to clear the frequency
    /// threshold.
    fn two_group_corpus() -> DocumentSet {
        let mut docs = Vec::new();
        let software = [
            ("java developer", "builds java services and apis"),
            ("data engineer", "maintains spark pipelines and warehouses"),
        ];
        let nursing = [
            ("registered nurse", "provides bedside patient care"),
            (
                "nurse assistant",
                "supports clinical staff with patient care",
            ),
        ];
        let mut n = 0;
        for (title, desc) in software {
            for _ in 0..5 {
                docs.push(doc(&format!("s{n}"), title, desc, Some("15-1132.00")));
                n += 1;
            }
        }
        for (title, desc) in nursing {
            for _ in 0..5 {
                docs.push(doc(&format!("h{n}"), title, desc, Some("29-1141.00")));
                n += 1;
            }
        }
        DocumentSet::new(docs).unwrap()
    }

    fn test_config() -> Config {
        Config {
            assignment_threshold: 0.3,
            min_group_size: 5,
            ..Config::default()
        }
    }

    #[test]
    fn resolve_group_uses_aliases() {
        let aliases = BTreeMap::from([("healthcare".to_string(), vec![29, 31])]);
        assert_eq!(resolve_group(&aliases, 29), "healthcare");
        assert_eq!(resolve_group(&aliases, 31), "healthcare");
        assert_eq!(resolve_group(&aliases, 15), "15");
    }

    fn counts_by_group(
        data: &DocumentSet,
        aliases: &BTreeMap<String, Vec<u8>>,
    ) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for d in data.iter() {
            if let Some(c) = &d.gold_soc {
                *m.entry(resolve_group(aliases, c.major_group()))
                    .or_insert(0) += 1;
            }
        }
        m
    }

    #[test]
    fn undersample_caps_large_classes_only() {
        let mut docs = Vec::new();
        for i in 0..5 {
            docs.push(doc(&format!("a{i}"), "x y", "", Some("15-1132.00")));
        }
        for i in 0..2 {
            docs.push(doc(&format!("b{i}"), "x y", "", Some("29-1141.00")));
        }
        let data = DocumentSet::new(docs).unwrap();
        let aliases = BTreeMap::new();
        let out = balance_undersample(&data, 3, 7, &aliases).unwrap();
        let counts = counts_by_group(&out, &aliases);
        assert_eq!(counts["15"], 3);
        assert_eq!(counts["29"], 2);

        // at the cap: unchanged
        let ids: HashSet<&str> = data.iter().map(|d| d.id.as_str()).collect();
        let capped = balance_undersample(&data, 5, 7, &aliases).unwrap();
        let kept: HashSet<&str> = capped.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, kept);
    }

    #[test]
    fn undersample_is_deterministic() {
        let data = two_group_corpus();
        let aliases = BTreeMap::new();
        let a = balance_undersample(&data, 7, 99, &aliases).unwrap();
        let b = balance_undersample(&data, 7, 99, &aliases).unwrap();
        let ids_a: Vec<&str> = a.iter().map(|d| d.id.as_str()).collect();
        let ids_b: Vec<&str> = b.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids_a, ids_b);
    }

    #[test]
    fn undersample_rejects_unlabeled_corpus() {
        let data = DocumentSet::new(vec![doc("u", "plain title", "", None)]).unwrap();
        assert!(matches!(
            balance_undersample(&data, 3, 1, &BTreeMap::new()),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn train_two_group_cascade() {
        let data = two_group_corpus();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        assert_eq!(model.group_keys, vec!["15", "healthcare"]);
        assert_eq!(model.coarse.classes.len(), 2);
        assert_eq!(model.verticals.len(), 2);

        // Coarse routing is perfect on this separable corpus and the fine
        // list leads with the matching title cluster.
        let software = doc(
            "q1",
            "java developer",
            "builds java services and apis",
            None,
        );
        let p = classify(&model, &software, 3).unwrap();
        assert_eq!(p.coarse_group, "15");
        assert!(!p.abstained);
        assert!(p.fine_titles[0].0.contains("java") || p.fine_titles[0].0.contains("developer"));

        let nurse = doc(
            "q2",
            "registered nurse",
            "provides bedside patient care",
            None,
        );
        let p = classify(&model, &nurse, 3).unwrap();
        assert_eq!(p.coarse_group, "healthcare");
        assert!(!p.abstained);
        // The top label is a term of the query title ("nurse" itself is
        // shared by both titles, so its idf is zero and a rarer term of
        // the same cluster labels it).
        let title_terms = ["registered", "nurse", "registered nurse"];
        assert!(
            title_terms.contains(&p.fine_titles[0].0.as_str()),
            "top label {:?}",
            p.fine_titles[0].0
        );
    }

    #[test]
    fn alias_merges_verticals() {
        // 29 and 31 both present: alias folds them into one healthcare
        // vertical trained on the union.
        let mut docs = Vec::new();
        for i in 0..5 {
            docs.push(doc(
                &format!("a{i}"),
                "registered nurse",
                "patient care",
                Some("29-1141.00"),
            ));
        }
        for i in 0..5 {
            docs.push(doc(
                &format!("b{i}"),
                "nurse assistant",
                "patient support",
                Some("31-1014.00"),
            ));
        }
        for i in 0..5 {
            docs.push(doc(
                &format!("c{i}"),
                "java developer",
                "java services",
                Some("15-1132.00"),
            ));
        }
        let data = DocumentSet::new(docs).unwrap();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        assert_eq!(model.group_keys, vec!["15", "healthcare"]);
        let vertical = &model.verticals["healthcare"];
        let covered = vertical.clusters.covered_ids();
        assert_eq!(covered.len(), 10); // union of 29 and 31 documents
    }

    #[test]
    fn small_group_gets_no_vertical_and_abstains() {
        let mut docs = Vec::new();
        for i in 0..6 {
            docs.push(doc(
                &format!("a{i}"),
                "java developer",
                "java work",
                Some("15-1132.00"),
            ));
        }
        // group 49: below min_group_size 5
        docs.push(doc("t0", "truck driver", "long haul", Some("53-3032.00")));
        let data = DocumentSet::new(docs).unwrap();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        assert!(model.verticals.contains_key("15"));
        assert!(!model.verticals.contains_key("53"));
        assert!(model.build_notes.iter().any(|n| n.contains("53")));

        let trucker = doc("q", "truck driver", "long haul", None);
        let p = classify(&model, &trucker, 3).unwrap();
        if p.coarse_group == "53" {
            assert!(p.abstained);
            assert!(p.fine_titles.is_empty());
        }
    }

    #[test]
    fn train_rejects_single_group() {
        let mut docs = Vec::new();
        for i in 0..8 {
            docs.push(doc(
                &format!("a{i}"),
                "java developer",
                "",
                Some("15-1132.00"),
            ));
        }
        let data = DocumentSet::new(docs).unwrap();
        assert!(matches!(
            train_cascade::<f64>(&data, &test_config()),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn classify_is_pure() {
        let data = two_group_corpus();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        let q = doc("q", "data engineer", "maintains spark pipelines", None);
        let a = classify(&model, &q, 4).unwrap();
        let b = classify(&model, &q, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn routing_matches_direct_vertical_call() {
        let data = two_group_corpus();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        let q = doc(
            "q",
            "registered nurse",
            "provides bedside patient care",
            None,
        );
        let p = classify(&model, &q, 5).unwrap();
        let vertical = &model.verticals[&p.coarse_group];
        let direct =
            classify_knn(&vertical.index, &q, 5, model.config.min_tf, &model.pipeline).unwrap();
        assert_eq!(p.fine_titles, direct);
    }

    #[test]
    fn vertical_isolation() {
        let data = two_group_corpus();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        let q = doc("q", "java developer", "builds java services", None);
        let p = classify(&model, &q, 5).unwrap();
        let routed = &model.verticals[&p.coarse_group];
        let routed_labels: BTreeSet<&str> = routed
            .clusters
            .clusters
            .iter()
            .map(|c| c.label.phrase.as_str())
            .collect();
        for (label, _) in &p.fine_titles {
            assert!(routed_labels.contains(label.as_str()));
        }
    }

    #[test]
    fn evaluate_scores_coarse_and_coverage() {
        let data = two_group_corpus();
        let model: CascadeModel<f64> = train_cascade(&data, &test_config()).unwrap();
        let eval = evaluate_cascade(&model, &data, 3).unwrap();
        assert!(
            eval.report.macro_f1 > 0.99,
            "macro_f1 {}",
            eval.report.macro_f1
        );
        assert!(eval.report.coverage > 0.99);
        assert!(eval.fine_top1_rate.is_none()); // no gold titles in corpus
    }

    /// Separable 3-class corpus, 60 documents, 10 folds: class
    /// vocabularies are disjoint so near-perfect macro-F1 is forced.
    /// Two title clusters per class keep the vertical indices away from
    /// the single-meta-document degeneracy (every idf zero).
    #[test]
    fn cross_validate_small_separable_corpus() {
        let mut docs = Vec::new();
        let classes = [
            (
                "15-1132.00",
                ["java developer", "data engineer"],
                "java services",
            ),
            (
                "29-1141.00",
                ["registered nurse", "nurse assistant"],
                "patient care",
            ),
            (
                "41-2031.00",
                ["retail salesperson", "store cashier"],
                "store floor sales",
            ),
        ];
        let mut n = 0;
        for (soc, titles, desc) in classes {
            for title in titles {
                for _ in 0..10 {
                    docs.push(doc(&format!("d{n}"), title, desc, Some(soc)));
                    n += 1;
                }
            }
        }
        let data = DocumentSet::new(docs).unwrap();
        let report = cross_validate_cascade::<f64>(&data, &Config::default(), 10, 42).unwrap();
        assert!(report.valid, "{:?}", report.notes);
        assert!(
            report.metrics["macro_f1"].mean >= 0.95,
            "macro_f1 {}",
            report.metrics["macro_f1"].mean
        );
        // Determinism: same seed gives identical fold metrics.
        let again = cross_validate_cascade::<f64>(&data, &Config::default(), 10, 42).unwrap();
        assert_eq!(report.metrics, again.metrics);
    }

    /// Two folds over four documents, two per class; both folds train.
    #[test]
    fn cross_validate_two_folds_smoke() {
        let docs = vec![
            doc("a0", "java developer", "code", Some("15-1132.00")),
            doc("b0", "registered nurse", "care", Some("29-1141.00")),
            doc("a1", "java developer", "code", Some("15-1132.00")),
            doc("b1", "registered nurse", "care", Some("29-1141.00")),
        ];
        let data = DocumentSet::new(docs).unwrap();
        // seed chosen so each fold keeps both classes
        let config = Config {
            seed: 3,
            ..Config::default()
        };
        let report = cross_validate_cascade::<f64>(&data, &config, 2, config.seed).unwrap();
        assert!(report.valid, "{:?}", report.notes);
        assert_eq!(report.metrics["accuracy"].per_fold.len(), 2);
    }

    /// A class with fewer instances than folds triggers a report note.
    #[test]
    fn cross_validate_notes_undersized_class() {
        let mut docs = vec![doc("t0", "truck driver", "haul", Some("53-3032.00"))];
        for i in 0..6 {
            docs.push(doc(
                &format!("a{i}"),
                "java developer",
                "code",
                Some("15-1132.00"),
            ));
            docs.push(doc(
                &format!("b{i}"),
                "registered nurse",
                "care",
                Some("29-1141.00"),
            ));
        }
        let data = DocumentSet::new(docs).unwrap();
        let report = cross_validate_cascade::<f64>(&data, &Config::default(), 3, 1).unwrap();
        assert!(
            report
                .notes
                .iter()
                .any(|n| n.contains("53") && n.contains("fewer than 3 folds")),
            "{:?}",
            report.notes
        );
    }
}
