//! Instance-based multi-label classification over cluster meta-documents.
//!
//! Each cluster becomes one meta-document aggregating the title terms of
//! its members. An inverted index scores a more-like-this query against
//! every meta-document by cosine similarity over tf×idf weights, where
//! idf is computed over meta-documents and frozen at build time.

use std::collections::BTreeMap;

use crate::corpus::{Document, DocumentSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textprep::TextPipeline;
use crate::title_cluster::ClusterSet;

/// The aggregated term profile of one cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaDocument {
    pub label: String,
    pub term_counts: BTreeMap<String, u32>,
}

/// Inverted index over meta-documents.
#[derive(Debug, Clone)]
pub struct ProximityIndex<T> {
    meta_docs: Vec<MetaDocument>,
    /// term → (meta-doc id, term frequency), meta ids ascending.
    postings: BTreeMap<String, Vec<(usize, u32)>>,
    doc_frequency: BTreeMap<String, u32>,
    idf: BTreeMap<String, T>,
    /// ‖tf×idf vector‖ per meta-document.
    norms: Vec<T>,
}

impl<T: Scalar> ProximityIndex<T> {
    /// Rebuilds postings, document frequencies, the idf table and norms
    /// from meta-documents.
    pub fn from_meta_docs(meta_docs: Vec<MetaDocument>) -> Result<ProximityIndex<T>> {
        if meta_docs.is_empty() {
            return Err(Error::DegenerateInput("no meta-documents".into()));
        }
        let mut postings: BTreeMap<String, Vec<(usize, u32)>> = BTreeMap::new();
        for (mid, meta) in meta_docs.iter().enumerate() {
            for (term, &count) in &meta.term_counts {
                postings.entry(term.clone()).or_default().push((mid, count));
            }
        }
        let n = meta_docs.len();
        let mut doc_frequency = BTreeMap::new();
        let mut idf = BTreeMap::new();
        for (term, plist) in &postings {
            let df = plist.len() as u32;
            doc_frequency.insert(term.clone(), df);
            idf.insert(
                term.clone(),
                (T::from_count(n) / T::from_count(df as usize)).log2(),
            );
        }
        let mut norms = vec![T::zero(); n];
        for (mid, meta) in meta_docs.iter().enumerate() {
            let mut sq = T::zero();
            for (term, &count) in &meta.term_counts {
                let w = T::from_count(count as usize) * idf[term];
                sq += w * w;
            }
            norms[mid] = sq.sqrt();
        }
        Ok(ProximityIndex {
            meta_docs,
            postings,
            doc_frequency,
            idf,
            norms,
        })
    }

    pub fn n_meta_docs(&self) -> usize {
        self.meta_docs.len()
    }

    pub fn meta_docs(&self) -> &[MetaDocument] {
        &self.meta_docs
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<(usize, u32)>> {
        &self.postings
    }

    pub fn document_frequency(&self, term: &str) -> u32 {
        self.doc_frequency.get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> Option<T> {
        self.idf.get(term).copied()
    }

    /// tf×idf weight of `term` in meta-document `mid`.
    pub fn meta_weight(&self, mid: usize, term: &str) -> T {
        let count = self.meta_docs[mid]
            .term_counts
            .get(term)
            .copied()
            .unwrap_or(0);
        if count == 0 {
            return T::zero();
        }
        T::from_count(count as usize) * self.idf.get(term).copied().unwrap_or(T::zero())
    }

    pub fn meta_norm(&self, mid: usize) -> T {
        self.norms[mid]
    }
}

/// A weighted classification query. Terms are unique, sorted, and carry
/// strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Query<T> {
    terms: Vec<(String, T)>,
}

impl<T: Scalar> Query<T> {
    pub fn terms(&self) -> &[(String, T)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm(&self) -> T {
        let mut sq = T::zero();
        for (_, w) in &self.terms {
            sq += *w * *w;
        }
        sq.sqrt()
    }
}

/// Builds one meta-document per cluster by aggregating the title terms
/// (unigrams plus bigrams) of its member documents.
pub fn build_index<T: Scalar>(
    clusters: &ClusterSet<T>,
    docs: &DocumentSet,
    pipeline: &TextPipeline,
) -> Result<ProximityIndex<T>> {
    if clusters.clusters.is_empty() {
        return Err(Error::DegenerateInput("empty cluster set".into()));
    }
    let mut meta_docs = Vec::with_capacity(clusters.n_clusters());
    for cluster in &clusters.clusters {
        let mut term_counts: BTreeMap<String, u32> = BTreeMap::new();
        for member in &cluster.members {
            let doc = docs.get(&member.doc_id).ok_or_else(|| {
                Error::Validation(format!(
                    "cluster {:?} references unknown document {:?}",
                    cluster.label.phrase, member.doc_id
                ))
            })?;
            let seq = pipeline.terms(&doc.id, &doc.title)?;
            for term in seq.terms {
                *term_counts.entry(term).or_insert(0) += 1;
            }
        }
        meta_docs.push(MetaDocument {
            label: cluster.label.phrase.clone(),
            term_counts,
        });
    }
    ProximityIndex::from_meta_docs(meta_docs)
}

/// Builds a more-like-this query from a document's title: terms with
/// in-document frequency at least `min_tf` that exist in the index,
/// weighted `tf × idf`. Zero-idf terms (present in every meta-document)
/// carry no signal and are dropped; the query may come out empty.
pub fn build_query<T: Scalar>(
    doc: &Document,
    index: &ProximityIndex<T>,
    min_tf: u32,
    pipeline: &TextPipeline,
) -> Result<Query<T>> {
    if min_tf < 1 {
        return Err(Error::Parameter(format!(
            "min_tf must be >= 1, got {min_tf}"
        )));
    }
    let seq = pipeline.terms(&doc.id, &doc.title)?;
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for term in seq.terms {
        *counts.entry(term).or_insert(0) += 1;
    }
    let mut terms = Vec::new();
    for (term, count) in counts {
        if count < min_tf {
            continue;
        }
        if let Some(idf) = index.idf(&term) {
            let w = T::from_count(count as usize) * idf;
            if w > T::zero() {
                terms.push((term, w));
            }
        }
    }
    Ok(Query { terms })
}

/// Ranks meta-documents by cosine similarity to the query, descending,
/// ties broken by lexicographically smaller label; returns at most `k`
/// entries and drops zero scores, so a document orthogonal to every
/// meta-document yields the empty (no-match) result.
pub fn rank_query<T: Scalar>(
    index: &ProximityIndex<T>,
    query: &Query<T>,
    k: usize,
) -> Result<Vec<(String, T)>> {
    if k < 1 {
        return Err(Error::Parameter(format!("k must be >= 1, got {k}")));
    }
    if query.is_empty() {
        return Ok(Vec::new());
    }
    let qnorm = query.norm();
    let mut dots = vec![T::zero(); index.n_meta_docs()];
    for (term, weight) in query.terms() {
        if let Some(plist) = index.postings.get(term) {
            let idf = index.idf[term];
            for &(mid, tf) in plist {
                dots[mid] += *weight * (T::from_count(tf as usize) * idf);
            }
        }
    }
    let mut scored: Vec<(String, T)> = Vec::new();
    for (mid, dot) in dots.into_iter().enumerate() {
        let norm = index.norms[mid];
        if dot > T::zero() && norm > T::zero() {
            scored.push((index.meta_docs[mid].label.clone(), dot / (qnorm * norm)));
        }
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(k);
    Ok(scored)
}

/// Builds the query for `doc` and returns the top-k labels with scores.
pub fn classify_knn<T: Scalar>(
    index: &ProximityIndex<T>,
    doc: &Document,
    k: usize,
    min_tf: u32,
    pipeline: &TextPipeline,
) -> Result<Vec<(String, T)>> {
    if k < 1 {
        return Err(Error::Parameter(format!("k must be >= 1, got {k}")));
    }
    let query = build_query(doc, index, min_tf, pipeline)?;
    rank_query(index, &query, k)
}
