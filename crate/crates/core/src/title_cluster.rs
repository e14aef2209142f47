//! Label-first title clustering: a truncated SVD of the tf-idf
//! term-document matrix induces cluster label phrases from the
//! left-singular vectors, then documents join every cluster whose label
//! they resemble above a cosine threshold. Documents matching no label
//! land in the "other" bucket; a document may belong to several clusters.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textprep::TextPipeline;
use crate::vectorspace::{
    term_document_matrix, SparseVector, TermDocMatrix, TfIdfModel, Vocabulary,
};

/// Leading left-singular vectors and singular values of a term-document
/// matrix.
///
/// `left_vectors[i]` is the dense column `u_i` of length |V|; columns are
/// pairwise orthonormal and singular values nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdResult<T> {
    pub left_vectors: Vec<Vec<T>>,
    pub singular_values: Vec<T>,
    pub rank_k: usize,
}

/// Controls for the power-iteration SVD.
#[derive(Debug, Clone)]
pub struct SvdOptions<T> {
    /// Stop once the iterate moves less than this between steps.
    pub tol: T,
    pub max_iters: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for SvdOptions<T> {
    fn default() -> Self {
        SvdOptions {
            tol: T::from_f64_lossy(1e-9),
            max_iters: 1000,
            seed: 42,
        }
    }
}

// An iterate that stalls above `tol` is still accepted at max_iters when
// its eigen-residual ‖AAᵀu − λu‖/λ_max is below this bound; near-equal
// singular values make the iterate wander inside the tied subspace long
// after the triplet itself is accurate.
const RESIDUAL_ACCEPT: f64 = 1e-6;

fn dense_norm<T: Scalar>(v: &[T]) -> T {
    let mut s = T::zero();
    for &x in v {
        s += x * x;
    }
    s.sqrt()
}

fn dense_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Removes the projections of `v` onto each (unit) vector in `basis`.
fn orthogonalize<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) {
    for u in basis {
        let proj = dense_dot(v, u);
        for (x, &ui) in v.iter_mut().zip(u) {
            *x -= proj * ui;
        }
    }
}

/// Truncated SVD by power iteration with deflation on the Gram operator
/// `A Aᵀ`. Extracts leading triplets until the retained spectral energy
/// `Σ σ_i²` reaches `quality_q` of the total `‖A‖_F²`; `rank_k` is the
/// smallest such count.
pub fn truncated_svd<T: Scalar>(
    matrix: &TermDocMatrix<T>,
    quality_q: f64,
    opts: &SvdOptions<T>,
) -> Result<SvdResult<T>> {
    if !(quality_q > 0.0 && quality_q <= 1.0) {
        return Err(Error::Parameter(format!(
            "quality_q must be in (0, 1], got {quality_q}"
        )));
    }
    if matrix.is_zero() {
        return Err(Error::DegenerateInput(
            "term-document matrix is zero".into(),
        ));
    }
    let m = matrix.n_rows();
    let total_energy = matrix.frobenius_sq();
    let max_rank = m.min(matrix.n_cols());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut left: Vec<Vec<T>> = Vec::new();
    let mut sigma: Vec<T> = Vec::new();
    let mut energy = T::zero();
    let q = T::from_f64_lossy(quality_q);
    // Tiny slack so quality_q = 1.0 is reachable despite rounding in the
    // energy accumulation.
    let q_slack = T::from_f64_lossy(1e-9);
    let energy_floor = total_energy * T::from_f64_lossy(1e-12);

    while left.len() < max_rank {
        let mut x: Vec<T> = (0..m)
            .map(|_| T::from_f64_lossy(rng.gen::<f64>() - 0.5))
            .collect();
        orthogonalize(&mut x, &left);
        let n = dense_norm(&x);
        if n == T::zero() {
            break;
        }
        for v in &mut x {
            *v = *v / n;
        }

        let mut converged = false;
        let mut last_delta = T::zero();
        for _ in 0..opts.max_iters {
            let mut y = matrix.apply(&matrix.transpose_apply(&x));
            orthogonalize(&mut y, &left);
            let ny = dense_norm(&y);
            if ny <= energy_floor {
                // Remaining spectrum is numerically zero.
                y.clear();
                x = y;
                converged = true;
                break;
            }
            for v in &mut y {
                *v = *v / ny;
            }
            if dense_dot(&y, &x) < T::zero() {
                for v in &mut y {
                    *v = -*v;
                }
            }
            let mut delta = T::zero();
            for (&yi, &xi) in y.iter().zip(&x) {
                let d = yi - xi;
                delta += d * d;
            }
            last_delta = delta.sqrt();
            x = y;
            if last_delta < opts.tol {
                converged = true;
                break;
            }
        }
        if x.is_empty() {
            break; // spectrum exhausted
        }
        let coeffs = matrix.transpose_apply(&x);
        let lambda = {
            let mut s = T::zero();
            for &c in &coeffs {
                s += c * c;
            }
            s
        };
        if !converged {
            // ‖AAᵀx − λx‖ relative to the largest eigenvalue seen.
            let gx = matrix.apply(&coeffs);
            let mut res_sq = T::zero();
            for (&g, &xi) in gx.iter().zip(&x) {
                let r = g - lambda * xi;
                res_sq += r * r;
            }
            let scale = sigma.first().map(|s| *s * *s).unwrap_or(lambda).max(lambda);
            let residual = res_sq.sqrt() / scale.max(T::min_positive_value());
            if residual > T::from_f64_lossy(RESIDUAL_ACCEPT) {
                return Err(Error::Convergence(format!(
                    "power iteration stalled after {} iterations: iterate change {last_delta}, eigen-residual {residual}",
                    opts.max_iters
                )));
            }
        }
        let s = lambda.sqrt();
        if s * s <= energy_floor {
            break;
        }
        energy += lambda;
        left.push(x);
        sigma.push(s);
        if energy / total_energy >= q - q_slack {
            break;
        }
    }

    if left.is_empty() {
        return Err(Error::DegenerateInput(
            "no nonzero singular triplets found".into(),
        ));
    }

    // Deflation can surface near-tied triplets slightly out of order.
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    let singular_values: Vec<T> = order.iter().map(|&i| sigma[i]).collect();
    let left_vectors: Vec<Vec<T>> = order.into_iter().map(|i| left[i].clone()).collect();
    let rank_k = left_vectors.len();
    Ok(SvdResult {
        left_vectors,
        singular_values,
        rank_k,
    })
}

/// A cluster label: a vocabulary phrase with its unit vector and the
/// singular component it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabel<T> {
    pub phrase: String,
    pub label_vector: SparseVector<T>,
    pub source_component: usize,
}

/// For each leading left-singular vector, picks the vocabulary term with
/// the largest absolute component as the label phrase (ties broken
/// lexicographically); duplicate phrases keep the earlier component.
pub fn induce_labels<T: Scalar>(
    svd: &SvdResult<T>,
    vocab: &Vocabulary,
    max_labels: usize,
) -> Result<Vec<ClusterLabel<T>>> {
    if vocab.is_empty() {
        return Err(Error::DegenerateInput("empty vocabulary".into()));
    }
    let n_components = svd.rank_k.min(max_labels);
    let mut labels: Vec<ClusterLabel<T>> = Vec::new();
    let mut seen: HashSet<usize> = HashSet::new();
    for (comp, u) in svd.left_vectors.iter().take(n_components).enumerate() {
        let mut best: Option<(T, usize)> = None;
        for (j, &value) in u.iter().enumerate() {
            let a = value.abs();
            best = match best {
                None => Some((a, j)),
                Some((ba, bj)) => {
                    if a > ba || (a == ba && vocab.term(j) < vocab.term(bj)) {
                        Some((a, j))
                    } else {
                        Some((ba, bj))
                    }
                }
            };
        }
        let (_, term_index) = best.expect("nonempty vocabulary");
        if seen.insert(term_index) {
            labels.push(ClusterLabel {
                phrase: vocab.term(term_index).to_string(),
                label_vector: SparseVector::basis(term_index),
                source_component: comp,
            });
        }
    }
    Ok(labels)
}

/// A document's membership in one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMember<T> {
    pub doc_id: String,
    pub similarity: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<T> {
    pub label: ClusterLabel<T>,
    pub members: Vec<ClusterMember<T>>,
}

/// The induced clusters plus the ids that joined none of them. Clusters
/// and the other bucket jointly cover every input id; membership is
/// multi-label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterSet<T> {
    pub clusters: Vec<Cluster<T>>,
    pub other_bucket: Vec<String>,
}

impl<T> ClusterSet<T> {
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Ids covered by clusters or the other bucket (deduplicated, sorted).
    pub fn covered_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .clusters
            .iter()
            .flat_map(|c| c.members.iter().map(|m| m.doc_id.as_str()))
            .chain(self.other_bucket.iter().map(String::as_str))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Assigns each document to every label with cosine similarity at or
/// above `threshold`; documents joining none go to the other bucket.
pub fn assign_documents<T: Scalar>(
    ids: &[String],
    vectors: &[SparseVector<T>],
    labels: &[ClusterLabel<T>],
    threshold: f64,
) -> Result<ClusterSet<T>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Parameter(format!(
            "assignment threshold must be in (0, 1], got {threshold}"
        )));
    }
    assert_eq!(ids.len(), vectors.len(), "ids and vectors must align");
    let thr = T::from_f64_lossy(threshold);
    let mut clusters: Vec<Cluster<T>> = labels
        .iter()
        .map(|label| Cluster {
            label: label.clone(),
            members: Vec::new(),
        })
        .collect();
    let mut other_bucket = Vec::new();
    for (id, vector) in ids.iter().zip(vectors) {
        let mut assigned = false;
        for cluster in clusters.iter_mut() {
            let sim = crate::vectorspace::cosine(vector, &cluster.label.label_vector);
            if sim >= thr {
                cluster.members.push(ClusterMember {
                    doc_id: id.clone(),
                    similarity: sim,
                });
                assigned = true;
            }
        }
        if !assigned {
            other_bucket.push(id.clone());
        }
    }
    Ok(ClusterSet {
        clusters,
        other_bucket,
    })
}

/// Knobs for the end-to-end clustering pipeline.
#[derive(Debug, Clone)]
pub struct ClusterParams {
    /// Titles occurring fewer than this many times are dropped up front.
    pub min_title_freq: u32,
    /// Fraction of spectral energy the SVD must retain.
    pub quality_q: f64,
    /// Cosine threshold for cluster membership.
    pub threshold: f64,
    pub max_labels: usize,
    pub min_df: u32,
    pub seed: u64,
    pub svd_tol: f64,
    pub svd_max_iters: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            min_title_freq: 4,
            quality_q: 0.9,
            threshold: 0.2,
            max_labels: 256,
            min_df: 2,
            seed: 42,
            svd_tol: 1e-9,
            svd_max_iters: 1000,
        }
    }
}

/// Title-frequency filter → terms → vocabulary → matrix → SVD → labels →
/// assignment. Deterministic given the parameters and seed.
///
/// When every surviving term occurs in every document the tf-idf matrix
/// is identically zero (idf is zero everywhere); the pipeline then falls
/// back to tf-only weights so rank-degenerate corpora still cluster.
pub fn cluster_corpus<T: Scalar>(
    docs: &DocumentSet,
    pipeline: &TextPipeline,
    params: &ClusterParams,
) -> Result<ClusterSet<T>> {
    if docs.is_empty() {
        return Err(Error::DegenerateInput("empty corpus".into()));
    }
    // Count normalized titles, then keep documents whose title clears the
    // frequency threshold.
    let mut title_counts: BTreeMap<String, u32> = BTreeMap::new();
    let normalized: Vec<String> = docs.iter().map(|d| pipeline.normalize(&d.title)).collect();
    for t in &normalized {
        if !t.is_empty() {
            *title_counts.entry(t.clone()).or_insert(0) += 1;
        }
    }
    let mut ids: Vec<String> = Vec::new();
    let mut seqs: Vec<crate::textprep::TermSequence> = Vec::new();
    for (doc, title) in docs.iter().zip(&normalized) {
        if title.is_empty() || title_counts[title] < params.min_title_freq {
            continue;
        }
        let seq = pipeline.terms(&doc.id, title)?;
        ids.push(doc.id.clone());
        seqs.push(seq);
    }
    if ids.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "no title occurs at least {} times",
            params.min_title_freq
        )));
    }

    let model: TfIdfModel<T> = TfIdfModel::fit(&seqs, params.min_df)?;
    if model.vocabulary().is_empty() {
        return Err(Error::DegenerateInput(format!(
            "no term reaches min_df {}",
            params.min_df
        )));
    }
    let mut matrix = term_document_matrix(&seqs, &model);
    let model = if matrix.is_zero() {
        let tf_model = TfIdfModel::with_uniform_idf(model.vocabulary().clone());
        matrix = term_document_matrix(&seqs, &tf_model);
        tf_model
    } else {
        model
    };
    if matrix.is_zero() {
        return Err(Error::DegenerateInput(
            "no document has in-vocabulary terms".into(),
        ));
    }

    let svd_opts = SvdOptions {
        tol: T::from_f64_lossy(params.svd_tol),
        max_iters: params.svd_max_iters,
        seed: params.seed,
    };
    let svd = truncated_svd(&matrix, params.quality_q, &svd_opts)?;
    let labels = induce_labels(&svd, model.vocabulary(), params.max_labels)?;
    assign_documents(&ids, matrix.columns(), &labels, params.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::textprep::TermSequence;
    use crate::vectorspace::build_vocabulary;

    fn seq(terms: &[&str]) -> TermSequence {
        TermSequence::new("t", terms.iter().map(|s| s.to_string()).collect())
    }

    fn matrix_from(docs: &[TermSequence]) -> TermDocMatrix<f64> {
        let vocab = build_vocabulary(docs, 1).unwrap();
        let model: TfIdfModel<f64> = TfIdfModel::with_uniform_idf(vocab);
        term_document_matrix(docs, &model)
    }

    #[test]
    fn svd_identity_spectrum() {
        // Two documents on disjoint single terms → identity-like matrix.
        let m = matrix_from(&[seq(&["a"]), seq(&["b"])]);
        let svd = truncated_svd(&m, 1.0, &SvdOptions::default()).unwrap();
        assert_eq!(svd.rank_k, 2);
        for s in &svd.singular_values {
            assert!((s - 1.0).abs() < 1e-9, "σ = {s}");
        }
    }

    #[test]
    fn svd_rank_one_spectrum() {
        // [[2,0],[0,0]]: spectrum {2, 0}, so 90% of the energy needs k=1.
        let m = TermDocMatrix::from_columns(
            2,
            vec![
                SparseVector::from_pairs([(0usize, 2.0f64)]).unwrap(),
                SparseVector::empty(),
            ],
        )
        .unwrap();
        let svd = truncated_svd(&m, 0.9, &SvdOptions::default()).unwrap();
        assert_eq!(svd.rank_k, 1);
        assert!((svd.singular_values[0] - 2.0).abs() < 1e-9);
        assert!((svd.left_vectors[0][0].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn svd_rejects_zero_matrix_and_bad_q() {
        let docs = [seq(&["a"]), seq(&["a"])];
        let model: TfIdfModel<f64> = TfIdfModel::fit(&docs, 1).unwrap();
        let zero = term_document_matrix(&docs, &model);
        assert!(matches!(
            truncated_svd(&zero, 0.9, &SvdOptions::default()),
            Err(Error::DegenerateInput(_))
        ));
        let m = matrix_from(&[seq(&["a"])]);
        assert!(matches!(
            truncated_svd(&m, 0.0, &SvdOptions::default()),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            truncated_svd(&m, 1.5, &SvdOptions::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn svd_left_vectors_orthonormal() {
        let m = matrix_from(&[
            seq(&["a", "b"]),
            seq(&["b", "c"]),
            seq(&["c", "d"]),
            seq(&["a", "d"]),
        ]);
        let svd = truncated_svd(&m, 1.0, &SvdOptions::default()).unwrap();
        for i in 0..svd.rank_k {
            for j in 0..svd.rank_k {
                let d = dense_dot(&svd.left_vectors[i], &svd.left_vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-6, "u{i}·u{j} = {d}");
            }
        }
        for w in svd.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    fn axis_svd(vocab_terms: &[&str]) -> (SvdResult<f64>, Vocabulary) {
        let docs: Vec<TermSequence> = vocab_terms.iter().map(|t| seq(&[t])).collect();
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let k = vocab.len();
        let mut left = Vec::new();
        for i in 0..k {
            let mut u = vec![0.0; k];
            u[i] = 1.0;
            left.push(u);
        }
        (
            SvdResult {
                left_vectors: left,
                singular_values: vec![1.0; k],
                rank_k: k,
            },
            vocab,
        )
    }

    #[test]
    fn labels_axis_aligned_components() {
        let (svd, vocab) = axis_svd(&["java", "nurse"]);
        let labels = induce_labels(&svd, &vocab, 10).unwrap();
        let phrases: Vec<&str> = labels.iter().map(|l| l.phrase.as_str()).collect();
        assert_eq!(phrases, vec!["java", "nurse"]);
        for l in &labels {
            assert!((l.label_vector.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_deduplicate_phrases() {
        let (mut svd, vocab) = axis_svd(&["java", "nurse"]);
        // Both components peak at index 1 ("nurse").
        svd.left_vectors[0] = vec![0.1, 0.9];
        svd.left_vectors[1] = vec![0.2, 0.8];
        let labels = induce_labels(&svd, &vocab, 10).unwrap();
        assert_eq!(labels.len(), 1);
        assert_eq!(labels[0].phrase, "nurse");
        assert_eq!(labels[0].source_component, 0);
    }

    #[test]
    fn labels_can_be_bigrams() {
        // Vocabulary of the doc "java developer": two unigrams + bigram.
        let docs = [seq(&["java", "developer", "java developer"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let bigram_idx = vocab.index_of("java developer").unwrap();
        let mut u = vec![0.1; vocab.len()];
        u[bigram_idx] = -0.9; // peak by absolute value
        let svd = SvdResult {
            left_vectors: vec![u],
            singular_values: vec![1.0],
            rank_k: 1,
        };
        let labels = induce_labels(&svd, &vocab, 10).unwrap();
        assert_eq!(labels[0].phrase, "java developer");
    }

    #[test]
    fn labels_reject_empty_vocabulary() {
        let vocab = build_vocabulary(&[], 1).unwrap();
        let svd = SvdResult::<f64> {
            left_vectors: vec![],
            singular_values: vec![],
            rank_k: 0,
        };
        assert!(matches!(
            induce_labels(&svd, &vocab, 4),
            Err(Error::DegenerateInput(_))
        ));
    }

    fn label_on(idx: usize, comp: usize) -> ClusterLabel<f64> {
        ClusterLabel {
            phrase: format!("t{idx}"),
            label_vector: SparseVector::basis(idx),
            source_component: comp,
        }
    }

    #[test]
    #[allow(clippy::approx_constant)] // 0.70710678 is the frozen hand-derived 1/√2 oracle
    fn assignment_identity_orthogonal_multilabel() {
        let labels = vec![label_on(0, 0), label_on(1, 1)];
        let ids: Vec<String> = ["d0", "d1", "d2"].iter().map(|s| s.to_string()).collect();
        let vectors = vec![
            SparseVector::basis(0),                                // equals label 0
            SparseVector::from_pairs([(2usize, 1.0f64)]).unwrap(), // orthogonal to both
            SparseVector::from_pairs([(0usize, 2.0f64), (1, 2.0)]).unwrap(), // 0.707 to both
        ];
        let set = assign_documents(&ids, &vectors, &labels, 0.7).unwrap();
        assert_eq!(set.clusters[0].members[0].doc_id, "d0");
        assert!((set.clusters[0].members[0].similarity - 1.0).abs() < 1e-12);
        assert_eq!(set.other_bucket, vec!["d1".to_string()]);
        // d2 joins both clusters at cosine 1/√2 ≥ 0.7.
        assert!(set.clusters.iter().all(|c| c
            .members
            .iter()
            .any(|m| m.doc_id == "d2" && (m.similarity - 0.70710678).abs() < 1e-6)));
    }

    #[test]
    fn assignment_no_labels_sends_all_to_other() {
        let ids = vec!["a".to_string()];
        let vectors = vec![SparseVector::<f64>::basis(0)];
        let set = assign_documents(&ids, &vectors, &[], 0.5).unwrap();
        assert!(set.clusters.is_empty());
        assert_eq!(set.other_bucket, ids);
    }

    #[test]
    fn assignment_threshold_anti_monotone() {
        let labels = vec![label_on(0, 0), label_on(1, 1)];
        let ids: Vec<String> = (0..6).map(|i| format!("d{i}")).collect();
        let vectors: Vec<SparseVector<f64>> = (0..6)
            .map(|i| {
                SparseVector::from_pairs([(0usize, 1.0 + i as f64), (1, 6.0 - i as f64)]).unwrap()
            })
            .collect();
        let loose = assign_documents(&ids, &vectors, &labels, 0.3).unwrap();
        let tight = assign_documents(&ids, &vectors, &labels, 0.8).unwrap();
        for (l, t) in loose.clusters.iter().zip(&tight.clusters) {
            assert!(t.members.len() <= l.members.len());
            for m in &t.members {
                assert!(m.similarity >= 0.8);
            }
        }
    }

    fn doc(id: &str, title: &str) -> Document {
        Document {
            id: id.to_string(),
            title: title.to_string(),
            description: String::new(),
            requirements: String::new(),
            gold_soc: None,
            gold_titles: None,
        }
    }

    fn corpus(titles: &[(&str, usize)]) -> DocumentSet {
        let mut docs = Vec::new();
        for (title, n) in titles {
            for i in 0..*n {
                docs.push(doc(&format!("{}-{i}", title.replace(' ', "_")), title));
            }
        }
        DocumentSet::new(docs).unwrap()
    }

    fn pipeline() -> TextPipeline {
        TextPipeline::default()
    }

    #[test]
    fn cluster_two_separated_title_groups() {
        let docs = corpus(&[("Registered Nurse", 5), ("Java Developer", 5)]);
        let params = ClusterParams {
            min_title_freq: 4,
            quality_q: 0.9,
            threshold: 0.3,
            ..ClusterParams::default()
        };
        let set: ClusterSet<f64> = cluster_corpus(&docs, &pipeline(), &params).unwrap();
        assert_eq!(set.n_clusters(), 2);
        assert!(set.other_bucket.is_empty());
        // Each cluster's members must be exactly one title group.
        for cluster in &set.clusters {
            let prefixes: HashSet<&str> = cluster
                .members
                .iter()
                .map(|m| m.doc_id.rsplit_once('-').unwrap().0)
                .collect();
            assert_eq!(
                prefixes.len(),
                1,
                "mixed cluster {:?}",
                cluster.label.phrase
            );
            assert_eq!(cluster.members.len(), 5);
        }
    }

    #[test]
    fn cluster_single_repeated_title_is_one_cluster() {
        let docs = corpus(&[("Registered Nurse", 6)]);
        let set: ClusterSet<f64> =
            cluster_corpus(&docs, &pipeline(), &ClusterParams::default()).unwrap();
        assert_eq!(set.n_clusters(), 1);
        assert_eq!(set.clusters[0].members.len(), 6);
        assert!(set.other_bucket.is_empty());
    }

    #[test]
    fn cluster_title_frequency_filter_drops_rare_titles() {
        let docs = corpus(&[("Registered Nurse", 5), ("Crane Operator", 3)]);
        let set: ClusterSet<f64> =
            cluster_corpus(&docs, &pipeline(), &ClusterParams::default()).unwrap();
        let covered = set.covered_ids();
        assert!(covered.iter().all(|id| id.starts_with("Registered_Nurse")));
        assert_eq!(covered.len(), 5);
    }

    #[test]
    fn cluster_errors_when_all_titles_filtered() {
        let docs = corpus(&[("Registered Nurse", 2)]);
        assert!(matches!(
            cluster_corpus::<f64>(&docs, &pipeline(), &ClusterParams::default()),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn cluster_corpus_is_deterministic() {
        let docs = corpus(&[("Registered Nurse", 5), ("Java Developer", 5)]);
        let params = ClusterParams {
            threshold: 0.3,
            ..ClusterParams::default()
        };
        let a: ClusterSet<f64> = cluster_corpus(&docs, &pipeline(), &params).unwrap();
        let b: ClusterSet<f64> = cluster_corpus(&docs, &pipeline(), &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cluster_coverage_of_surviving_docs() {
        let docs = corpus(&[("Registered Nurse", 5), ("Java Developer", 4)]);
        let params = ClusterParams {
            threshold: 0.9999, // strict: most docs fall to other bucket
            ..ClusterParams::default()
        };
        let set: ClusterSet<f64> = cluster_corpus(&docs, &pipeline(), &params).unwrap();
        assert_eq!(set.covered_ids().len(), 9);
    }
}
