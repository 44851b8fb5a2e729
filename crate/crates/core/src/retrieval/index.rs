use std::collections::{BTreeMap, HashSet};

use super::{tokenize, Post, RetrievalError};

pub const DEFAULT_TOP_K: usize = 5;

/// A scored search result.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    /// Position of the post in [`CorpusIndex::posts`].
    pub doc: usize,
    pub score: f64,
}

/// Inverted TF-IDF index over posts. Weights are `tf * ln(1 + N / df)`;
/// documents are scored by cosine similarity.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    posts: Vec<Post>,
    /// term -> (doc, term frequency), docs ascending.
    postings: BTreeMap<String, Vec<(usize, u32)>>,
    norms: Vec<f64>,
}

pub(crate) fn idf(doc_count: usize, df: usize) -> f64 {
    (1.0 + doc_count as f64 / df as f64).ln()
}

pub(crate) fn term_counts(tokens: Vec<String>) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

impl CorpusIndex {
    pub fn build(posts: Vec<Post>) -> Result<Self, RetrievalError> {
        let mut ids = HashSet::new();
        for p in &posts {
            if !ids.insert(p.id.as_str()) {
                return Err(RetrievalError::DuplicateId(p.id.clone()));
            }
        }
        let mut postings: BTreeMap<String, Vec<(usize, u32)>> = BTreeMap::new();
        for (doc, post) in posts.iter().enumerate() {
            for (term, tf) in term_counts(tokenize(&post.indexed_text())) {
                postings.entry(term).or_default().push((doc, tf));
            }
        }
        let n = posts.len();
        let mut sq = vec![0.0f64; n];
        for list in postings.values() {
            let w_idf = idf(n, list.len());
            for &(doc, tf) in list {
                let w = tf as f64 * w_idf;
                sq[doc] += w * w;
            }
        }
        let norms = sq.into_iter().map(f64::sqrt).collect();
        Ok(CorpusIndex { posts, postings, norms })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn post(&self, doc: usize) -> &Post {
        &self.posts[doc]
    }

    pub fn doc_count(&self) -> usize {
        self.posts.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_freq(&self, term: &str, doc: usize) -> u32 {
        self.postings
            .get(term)
            .and_then(|l| l.iter().find(|(d, _)| *d == doc))
            .map_or(0, |&(_, tf)| tf)
    }

    /// Top `k` posts by cosine score, best first; ties by ascending post id.
    /// Posts sharing no term with the query are never returned.
    pub fn query(&self, text: &str, k: usize) -> Result<Vec<Hit>, RetrievalError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        let n = self.posts.len();
        let mut dots = vec![0.0f64; n];
        let mut q_sq = 0.0;
        for (term, qtf) in term_counts(tokens) {
            let Some(list) = self.postings.get(&term) else { continue };
            let w_idf = idf(n, list.len());
            let wq = qtf as f64 * w_idf;
            q_sq += wq * wq;
            for &(doc, tf) in list {
                dots[doc] += wq * tf as f64 * w_idf;
            }
        }
        if q_sq == 0.0 {
            return Ok(Vec::new());
        }
        let q_norm = q_sq.sqrt();
        let mut hits: Vec<Hit> = dots
            .into_iter()
            .enumerate()
            .filter(|&(_, dot)| dot > 0.0)
            .map(|(doc, dot)| Hit {
                doc,
                score: dot / (q_norm * self.norms[doc]),
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| self.posts[a.doc].id.cmp(&self.posts[b.doc].id))
        });
        hits.truncate(k);
        Ok(hits)
    }
}
