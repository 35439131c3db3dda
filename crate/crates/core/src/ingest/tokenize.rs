use std::collections::{BTreeMap, HashSet};

use crate::linalg::SparseMatrix;

/// Filters for [`tokenize_corpus`].
#[derive(Debug, Clone, Default)]
pub struct TokenizeOptions {
    pub stoplist: HashSet<String>,
    /// Terms with fewer total occurrences are removed.
    pub min_global_tf: usize,
    /// Terms appearing in more documents are removed.
    pub max_df: Option<usize>,
}

/// Vocabulary (sorted) and the raw count matrix, one column per input text.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocabulary: Vec<String>,
    pub tf: SparseMatrix,
    /// Documents left without any term after filtering.
    pub empty_docs: Vec<usize>,
}

/// Lowercases, splits on anything that is not alphanumeric, drops stop words
/// and applies the frequency filters. No stemming.
pub fn tokenize_corpus<S: AsRef<str>>(texts: &[S], options: &TokenizeOptions) -> Corpus {
    let docs: Vec<BTreeMap<String, usize>> = texts
        .iter()
        .map(|t| {
            let mut counts = BTreeMap::new();
            for tok in t.as_ref().split(|c: char| !c.is_alphanumeric()) {
                if tok.is_empty() {
                    continue;
                }
                let tok = tok.to_lowercase();
                if !options.stoplist.contains(&tok) {
                    *counts.entry(tok).or_insert(0) += 1;
                }
            }
            counts
        })
        .collect();

    let mut totals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for doc in &docs {
        for (term, &c) in doc {
            let e = totals.entry(term.as_str()).or_default();
            e.0 += c;
            e.1 += 1;
        }
    }
    let vocabulary: Vec<String> = totals
        .iter()
        .filter(|(_, &(tf, df))| tf >= options.min_global_tf && options.max_df.is_none_or(|m| df <= m))
        .map(|(t, _)| t.to_string())
        .collect();
    let index: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut triplets = Vec::new();
    let mut empty_docs = Vec::new();
    for (j, doc) in docs.iter().enumerate() {
        let before = triplets.len();
        for (term, &c) in doc {
            if let Some(&i) = index.get(term.as_str()) {
                triplets.push((i, j, c as f64));
            }
        }
        if triplets.len() == before {
            empty_docs.push(j);
        }
    }
    let tf = SparseMatrix::from_triplets(vocabulary.len(), texts.len(), &triplets)
        .expect("indices come from the vocabulary");
    Corpus {
        vocabulary,
        tf,
        empty_docs,
    }
}
