use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::corpus::Corpus;
use super::preprocess::tokenize;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const ENGLISH_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// The bundled English stopword list (318 words, one per line in `stopwords_en.txt`).
pub fn english_stopwords() -> Vec<String> {
    ENGLISH_STOPWORDS.lines().map(str::trim).filter(|w| !w.is_empty()).map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub max_features: usize,
    pub stopwords: Vec<String>,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig { min_df: 2, max_df_ratio: 0.95, max_features: 5000, stopwords: english_stopwords() }
    }
}

impl VocabConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.max_df_ratio) {
            return Err(Error::InvalidArgument(format!("max_df_ratio must lie in [0, 1], got {}", self.max_df_ratio)));
        }
        if self.max_features == 0 {
            return Err(Error::InvalidArgument("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sorted unique terms with their document frequencies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequency: Vec<usize>,
    num_documents: usize,
}

impl Vocabulary {
    /// Terms are sorted and deduplicated; document frequencies are unknown (zero).
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut terms: Vec<String> = terms.into_iter().map(Into::into).collect();
        terms.sort();
        terms.dedup();
        let df = vec![0; terms.len()];
        Vocabulary::from_parts(terms, df, 0)
    }

    fn from_parts(terms: Vec<String>, document_frequency: Vec<usize>, num_documents: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, index, document_frequency, num_documents }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self) -> &[usize] {
        &self.document_frequency
    }

    /// Size of the corpus the vocabulary was built from.
    pub fn num_documents(&self) -> usize {
        self.num_documents
    }

    /// One term per line, in index order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            s.push_str(t);
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Reads a file written by [`Vocabulary::write`]; the order must already be sorted.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let terms: Vec<String> = text.lines().filter(|l| !l.is_empty()).map(String::from).collect();
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(format!("{}: terms must be unique and sorted", path.display())));
        }
        let df = vec![0; terms.len()];
        Ok(Vocabulary::from_parts(terms, df, 0))
    }
}

/// Per-document `(term, count)` pairs, sorted by term.
pub(crate) fn term_counts(corpus: &Corpus) -> Vec<BTreeMap<String, usize>> {
    corpus
        .documents()
        .par_iter()
        .map(|d| {
            let mut counts = BTreeMap::new();
            for tok in tokenize(&d.text) {
                *counts.entry(tok).or_insert(0) += 1;
            }
            counts
        })
        .collect()
}

fn smoothed_idf(num_documents: usize, df: usize) -> f64 {
    ((1.0 + num_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Filters terms by document frequency and stopwords, then keeps the
/// `max_features` terms with the largest summed l2-normalized TF-IDF weight
/// (ties broken lexicographically). An empty result is returned with a warning.
pub fn build_vocabulary(corpus: &Corpus, cfg: &VocabConfig) -> Result<Vocabulary> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let d = corpus.len();
    let counts = term_counts(corpus);
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &counts {
        for term in doc.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let stop: HashSet<&str> = cfg.stopwords.iter().map(String::as_str).collect();
    let max_df = (cfg.max_df_ratio * d as f64).floor() as usize;
    let candidates: BTreeMap<&str, usize> =
        df.into_iter().filter(|&(t, n)| n >= cfg.min_df && n <= max_df && !stop.contains(t)).collect();

    let selected: Vec<&str> = if candidates.len() <= cfg.max_features {
        candidates.keys().copied().collect()
    } else {
        let position: HashMap<&str, usize> = candidates.keys().enumerate().map(|(i, &t)| (t, i)).collect();
        let idf: Vec<f64> = candidates.values().map(|&n| smoothed_idf(d, n)).collect();
        let mut mass = vec![0.0; candidates.len()];
        for doc in &counts {
            let row: Vec<(usize, f64)> =
                doc.iter().filter_map(|(t, &c)| position.get(t.as_str()).map(|&p| (p, c as f64 * idf[p]))).collect();
            let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (p, w) in row {
                    mass[p] += w / norm;
                }
            }
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        // Candidate positions are already lexicographic, so a stable sort breaks ties correctly.
        order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]));
        let names: Vec<&str> = candidates.keys().copied().collect();
        let mut kept: Vec<&str> = order[..cfg.max_features].iter().map(|&p| names[p]).collect();
        kept.sort_unstable();
        kept
    };

    if selected.is_empty() {
        log::warn!("vocabulary is empty after document-frequency and stopword filtering of {d} documents");
    }
    let dfs = selected.iter().map(|t| candidates[t]).collect();
    Ok(Vocabulary::from_parts(selected.into_iter().map(String::from).collect(), dfs, d))
}

/// Documents x terms weights with every nonzero row scaled to unit l2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfMatrix {
    pub weights: Matrix,
    pub normalized: bool,
}

/// `tf · (ln((1 + D) / (1 + df)) + 1)` with raw counts `tf`, document
/// frequencies taken over `corpus`, and l2-normalized rows.
pub fn tfidf_weights(corpus: &Corpus, vocab: &Vocabulary) -> Result<TfIdfMatrix> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = term_counts(corpus);
    let mut df = vec![0usize; vocab.len()];
    for doc in &counts {
        for t in doc.keys() {
            if let Some(p) = vocab.index_of(t) {
                df[p] += 1;
            }
        }
    }
    let idf: Vec<f64> = df.iter().map(|&n| smoothed_idf(corpus.len(), n)).collect();
    let mut weights = Matrix::zeros(corpus.len(), vocab.len());
    for (i, doc) in counts.iter().enumerate() {
        let mut sq = 0.0;
        for (t, &c) in doc {
            if let Some(p) = vocab.index_of(t) {
                let w = c as f64 * idf[p];
                weights.set(i, p, w);
                sq += w * w;
            }
        }
        if sq > 0.0 {
            let norm = sq.sqrt();
            let n = vocab.len();
            for w in &mut weights.as_mut_slice()[i * n..(i + 1) * n] {
                *w /= norm;
            }
        }
    }
    Ok(TfIdfMatrix { weights, normalized: true })
}
