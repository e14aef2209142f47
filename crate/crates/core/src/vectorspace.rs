//! Vocabulary construction, tf-idf weighting, sparse vectors and cosine
//! similarity — the numerical substrate shared by clustering, k-NN and
//! the SVM feature builder.
//!
//! Weighting: `tf(t, d) = count(t, d) / max_count(d)` and
//! `idf(t) = log2(n_docs / df(t))`, so a term present in every document
//! carries zero weight everywhere.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textprep::TermSequence;

/// A sparse vector: (index, weight) pairs with strictly increasing
/// indices and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> Default for SparseVector<T> {
    fn default() -> Self {
        SparseVector::empty()
    }
}

impl<T: Scalar> SparseVector<T> {
    pub fn empty() -> Self {
        SparseVector {
            entries: Vec::new(),
        }
    }

    /// Builds from pairs: sorts by index, drops zero weights, rejects
    /// duplicate indices and non-finite weights.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let mut entries: Vec<(usize, T)> =
            pairs.into_iter().filter(|(_, w)| *w != T::zero()).collect();
        for (i, w) in &entries {
            if !w.is_finite() {
                return Err(Error::Parameter(format!(
                    "non-finite weight {w} at index {i}"
                )));
            }
        }
        entries.sort_by_key(|(i, _)| *i);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Parameter(format!(
                    "duplicate index {} in sparse vector",
                    pair[0].0
                )));
            }
        }
        Ok(SparseVector { entries })
    }

    /// A unit basis vector `e_index`.
    pub fn basis(index: usize) -> Self {
        SparseVector {
            entries: vec![(index, T::one())],
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, index: usize) -> T {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => T::zero(),
        }
    }

    /// Largest index present, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn dot(&self, other: &SparseVector<T>) -> T {
        let mut sum = T::zero();
        let (mut a, mut b) = (self.entries.iter(), other.entries.iter());
        let (mut x, mut y) = (a.next(), b.next());
        while let (Some(&(i, u)), Some(&(j, v))) = (x, y) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => x = a.next(),
                std::cmp::Ordering::Greater => y = b.next(),
                std::cmp::Ordering::Equal => {
                    sum += u * v;
                    x = a.next();
                    y = b.next();
                }
            }
        }
        sum
    }

    /// Dot product against a dense weight vector. Out-of-range indices are
    /// a contract violation checked by callers.
    pub fn dense_dot(&self, dense: &[T]) -> T {
        let mut sum = T::zero();
        for &(i, w) in &self.entries {
            sum += dense[i] * w;
        }
        sum
    }

    pub fn norm_sq(&self) -> T {
        let mut sum = T::zero();
        for &(_, w) in &self.entries {
            sum += w * w;
        }
        sum
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, alpha: T) -> SparseVector<T> {
        if alpha == T::zero() {
            return SparseVector::empty();
        }
        SparseVector {
            entries: self.entries.iter().map(|&(i, w)| (i, w * alpha)).collect(),
        }
    }

    /// Scales to unit Euclidean norm; the zero vector stays zero.
    pub fn normalized(&self) -> SparseVector<T> {
        let n = self.norm();
        if n == T::zero() {
            return self.clone();
        }
        self.scaled(T::one() / n)
    }
}

/// Cosine similarity in `[0, 1]` for nonnegative vectors; `0` when either
/// vector is empty.
pub fn cosine<T: Scalar>(a: &SparseVector<T>, b: &SparseVector<T>) -> T {
    let na = a.norm();
    let nb = b.norm();
    if na == T::zero() || nb == T::zero() {
        return T::zero();
    }
    a.dot(b) / (na * nb)
}

/// Term ↔ index bijection with per-term document frequencies.
///
/// Indices are assigned in lexicographic term order, so models built from
/// the same corpus are identical run to run.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequency: Vec<u32>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self, index: usize) -> u32 {
        self.document_frequency[index]
    }

    /// Rebuilds a vocabulary from persisted (term, df) rows. Terms must be
    /// unique; order is re-canonicalized lexicographically.
    pub fn from_rows(rows: Vec<(String, u32)>, n_docs: usize) -> Result<Vocabulary> {
        let mut rows = rows;
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms = Vec::with_capacity(rows.len());
        let mut document_frequency = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        for (term, df) in rows {
            if index.insert(term.clone(), terms.len()).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate vocabulary term {term:?}"
                )));
            }
            if df == 0 || df as usize > n_docs {
                return Err(Error::Validation(format!(
                    "document frequency {df} for {term:?} outside [1, {n_docs}]"
                )));
            }
            terms.push(term);
            document_frequency.push(df);
        }
        Ok(Vocabulary {
            terms,
            index,
            document_frequency,
            n_docs,
        })
    }
}

/// Builds the vocabulary of terms appearing in at least `min_df` distinct
/// documents. An empty corpus yields an empty vocabulary.
pub fn build_vocabulary(docs: &[TermSequence], min_df: u32) -> Result<Vocabulary> {
    if min_df < 1 {
        return Err(Error::Parameter(format!(
            "min_df must be >= 1, got {min_df}"
        )));
    }
    let mut df: HashMap<&str, u32> = HashMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.terms.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut terms: Vec<&str> = df
        .iter()
        .filter(|(_, &c)| c >= min_df)
        .map(|(&t, _)| t)
        .collect();
    terms.sort_unstable();
    let document_frequency = terms.iter().map(|t| df[t]).collect();
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.to_string(), i))
        .collect();
    Ok(Vocabulary {
        terms: terms.into_iter().map(str::to_string).collect(),
        index,
        document_frequency,
        n_docs: docs.len(),
    })
}

/// A fitted vocabulary plus the idf table derived from it.
#[derive(Debug, Clone)]
pub struct TfIdfModel<T> {
    vocab: Vocabulary,
    idf: Vec<T>,
}

impl<T: Scalar> TfIdfModel<T> {
    /// Fits vocabulary and idf over a corpus.
    pub fn fit(docs: &[TermSequence], min_df: u32) -> Result<TfIdfModel<T>> {
        let vocab = build_vocabulary(docs, min_df)?;
        Ok(Self::from_vocabulary(vocab))
    }

    /// Derives `idf = log2(n_docs / df)` from an existing vocabulary.
    pub fn from_vocabulary(vocab: Vocabulary) -> TfIdfModel<T> {
        let n = T::from_count(vocab.n_docs());
        let idf = (0..vocab.len())
            .map(|i| (n / T::from_count(vocab.document_frequency(i) as usize)).log2())
            .collect();
        TfIdfModel { vocab, idf }
    }

    /// A model whose idf is one everywhere, used as the tf-only fallback
    /// when every term occurs in every document.
    pub fn with_uniform_idf(vocab: Vocabulary) -> TfIdfModel<T> {
        let idf = vec![T::one(); vocab.len()];
        TfIdfModel { vocab, idf }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self, index: usize) -> T {
        self.idf[index]
    }

    /// Weighs a document: `(count / max_count) * idf` over in-vocabulary
    /// terms. Out-of-vocabulary terms are ignored; a document with no
    /// in-vocabulary terms yields the empty vector.
    pub fn tfidf_vector(&self, doc: &TermSequence) -> SparseVector<T> {
        let counts = doc.counts();
        let max_count = counts.values().copied().max().unwrap_or(0);
        if max_count == 0 {
            return SparseVector::empty();
        }
        let max = T::from_count(max_count as usize);
        let mut entries: Vec<(usize, T)> = Vec::new();
        for (term, &count) in &counts {
            if let Some(i) = self.vocab.index_of(term) {
                let w = T::from_count(count as usize) / max * self.idf[i];
                if w != T::zero() {
                    entries.push((i, w));
                }
            }
        }
        entries.sort_by_key(|(i, _)| *i);
        SparseVector { entries }
    }
}

/// A sparse |V| × n term-document matrix stored by column, every column
/// unit-normalized (zero columns left zero).
#[derive(Debug, Clone)]
pub struct TermDocMatrix<T> {
    n_rows: usize,
    columns: Vec<SparseVector<T>>,
}

impl<T: Scalar> TermDocMatrix<T> {
    /// Builds a matrix from raw columns without normalization.
    pub fn from_columns(n_rows: usize, columns: Vec<SparseVector<T>>) -> Result<TermDocMatrix<T>> {
        for (j, c) in columns.iter().enumerate() {
            if let Some(max) = c.max_index() {
                if max >= n_rows {
                    return Err(Error::Parameter(format!(
                        "column {j} has index {max} outside {n_rows} rows"
                    )));
                }
            }
        }
        Ok(TermDocMatrix { n_rows, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseVector<T> {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector<T>] {
        &self.columns
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    /// Squared Frobenius norm, which equals the total spectral energy.
    pub fn frobenius_sq(&self) -> T {
        let mut sum = T::zero();
        for c in &self.columns {
            sum += c.norm_sq();
        }
        sum
    }

    /// `Aᵀx` for dense `x` of length `n_rows`.
    pub fn transpose_apply(&self, x: &[T]) -> Vec<T> {
        self.columns.iter().map(|c| c.dense_dot(x)).collect()
    }

    /// `A t` for coefficients `t` of length `n_cols`.
    pub fn apply(&self, t: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_rows];
        for (j, c) in self.columns.iter().enumerate() {
            let tj = t[j];
            if tj == T::zero() {
                continue;
            }
            for (i, w) in c.iter() {
                out[i] += w * tj;
            }
        }
        out
    }
}

/// Vectorizes a corpus into the tf-idf term-document matrix; column `j`
/// is the unit-normalized vector of `docs[j]`.
pub fn term_document_matrix<T: Scalar>(
    docs: &[TermSequence],
    model: &TfIdfModel<T>,
) -> TermDocMatrix<T> {
    let columns = docs
        .iter()
        .map(|d| model.tfidf_vector(d).normalized())
        .collect();
    TermDocMatrix {
        n_rows: model.vocabulary().len(),
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::TermSequence;
    use proptest::prelude::*;

    fn seq(terms: &[&str]) -> TermSequence {
        TermSequence::new("t", terms.iter().map(|s| s.to_string()).collect())
    }

    fn sv(pairs: &[(usize, f64)]) -> SparseVector<f64> {
        SparseVector::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn vocabulary_min_df_filters() {
        let vocab = build_vocabulary(&[seq(&["a", "b"]), seq(&["a"])], 2).unwrap();
        assert_eq!(vocab.terms(), &["a".to_string()]);
        assert_eq!(vocab.document_frequency(0), 2);
        assert_eq!(vocab.n_docs(), 2);
    }

    #[test]
    fn vocabulary_min_df_one_keeps_singletons() {
        let vocab = build_vocabulary(&[seq(&["a"])], 1).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.document_frequency(0), 1);
    }

    #[test]
    fn vocabulary_empty_corpus_is_empty() {
        let vocab = build_vocabulary(&[], 3).unwrap();
        assert!(vocab.is_empty());
        assert_eq!(vocab.n_docs(), 0);
    }

    #[test]
    fn vocabulary_indices_are_lexicographic() {
        let vocab = build_vocabulary(&[seq(&["zeta", "alpha", "mid"])], 1).unwrap();
        assert_eq!(vocab.terms(), &["alpha", "mid", "zeta"]);
        assert_eq!(vocab.index_of("alpha"), Some(0));
    }

    #[test]
    fn tfidf_max_count_normalization() {
        // single doc corpus: idf = log2(1/1) = 0, so force idf via fit on
        // a two-doc corpus where "a" is exclusive to one doc.
        let docs = [seq(&["a", "a"]), seq(&["b"])];
        let model: TfIdfModel<f64> = TfIdfModel::fit(&docs, 1).unwrap();
        // idf(a) = idf(b) = log2(2/1) = 1; doc has a twice → tf 2/2 = 1.
        let v = model.tfidf_vector(&seq(&["a", "a"]));
        assert_eq!(v.get(model.vocabulary().index_of("a").unwrap()), 1.0);
    }

    #[test]
    fn tfidf_drops_zero_idf_and_ignores_oov() {
        // 2 docs: "a" in both (idf 0), "b" in one (idf 1).
        let docs = [seq(&["a", "b"]), seq(&["a"])];
        let model: TfIdfModel<f64> = TfIdfModel::fit(&docs, 1).unwrap();
        let ia = model.vocabulary().index_of("a").unwrap();
        let ib = model.vocabulary().index_of("b").unwrap();
        assert_eq!(model.idf(ia), 0.0);
        assert_eq!(model.idf(ib), 1.0);

        let v = model.tfidf_vector(&seq(&["a", "b"]));
        assert_eq!(v.get(ia), 0.0);
        assert_eq!(v.get(ib), 1.0);
        assert_eq!(v.nnz(), 1);

        assert!(model.tfidf_vector(&seq(&["zz", "qq"])).is_empty());
        assert!(model.tfidf_vector(&seq(&[])).is_empty());
    }

    #[test]
    #[allow(clippy::approx_constant)] // 0.70711 is the frozen hand-derived 1/√2 oracle
    fn cosine_identity_orthogonal_and_hand_value() {
        let v = sv(&[(0, 1.0), (1, 1.0)]);
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);

        let a = sv(&[(0, 2.0)]);
        let b = sv(&[(1, 3.0)]);
        assert_eq!(cosine(&a, &b), 0.0);

        let c = sv(&[(0, 1.0)]);
        assert!((cosine(&v, &c) - 0.70711).abs() < 1e-5);

        assert_eq!(cosine(&v, &SparseVector::empty()), 0.0);
    }

    #[test]
    fn matrix_columns_are_unit_or_zero() {
        let docs = [seq(&["a"])];
        let model: TfIdfModel<f64> =
            TfIdfModel::with_uniform_idf(build_vocabulary(&docs, 1).unwrap());
        let m = term_document_matrix(&docs, &model);
        assert_eq!(m.n_rows(), 1);
        assert_eq!(m.n_cols(), 1);
        assert_eq!(m.column(0).get(0), 1.0);
    }

    #[test]
    fn matrix_of_identical_docs_is_zero() {
        let docs = [seq(&["a"]), seq(&["a"])];
        let model: TfIdfModel<f64> = TfIdfModel::fit(&docs, 1).unwrap();
        let m = term_document_matrix(&docs, &model);
        assert!(m.is_zero());
    }

    #[test]
    fn matrix_column_from_tfidf_example() {
        let docs = [seq(&["a", "b"]), seq(&["a"])];
        let model: TfIdfModel<f64> = TfIdfModel::fit(&docs, 1).unwrap();
        let m = term_document_matrix(&docs, &model);
        let col = m.column(0);
        assert_eq!(col.get(0), 0.0);
        assert_eq!(col.get(1), 1.0);
    }

    #[test]
    fn from_pairs_rejects_duplicates_and_drops_zeros() {
        assert!(SparseVector::<f64>::from_pairs([(1, 1.0), (1, 2.0)]).is_err());
        let v = sv(&[(3, 0.0), (1, 2.0)]);
        assert_eq!(v.nnz(), 1);
        assert_eq!(v.max_index(), Some(1));
    }

    fn sparse_strategy() -> impl Strategy<Value = SparseVector<f64>> {
        proptest::collection::btree_map(0usize..12, 0.01f64..10.0, 0..8)
            .prop_map(|m| SparseVector::from_pairs(m).unwrap())
    }

    proptest! {
        #[test]
        fn cosine_symmetry_and_self(a in sparse_strategy(), b in sparse_strategy()) {
            prop_assert_eq!(cosine(&a, &b), cosine(&b, &a));
            if !a.is_empty() {
                prop_assert!((cosine(&a, &a) - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn cosine_scale_invariance(a in sparse_strategy(), b in sparse_strategy(), alpha in 0.01f64..100.0) {
            let scaled = a.scaled(alpha);
            let lhs = cosine(&scaled, &b);
            let rhs = cosine(&a, &b);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn tfidf_weights_nonnegative(texts in proptest::collection::vec(
            proptest::collection::vec("[a-d]", 1..6), 1..6))
        {
            let docs: Vec<TermSequence> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| TermSequence::new(format!("d{i}"), t.clone()))
                .collect();
            let model: TfIdfModel<f64> = TfIdfModel::fit(&docs, 1).unwrap();
            for d in &docs {
                for (_, w) in model.tfidf_vector(d).iter() {
                    prop_assert!(w >= 0.0);
                }
            }
            let m = term_document_matrix(&docs, &model);
            for c in m.columns() {
                let n = c.norm();
                prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9);
            }
        }
    }
}
