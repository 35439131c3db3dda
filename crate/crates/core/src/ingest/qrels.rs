use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Relevance judgments: query id to the set of relevant document indices.
///
/// Query ids are kept as they appear in the file. Document ids in the file
/// are 1-based column numbers and are stored 0-based.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    relevant: BTreeMap<usize, BTreeSet<usize>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: usize, doc: usize) {
        self.relevant.entry(query).or_default().insert(doc);
    }

    pub fn relevant(&self, query: usize) -> Option<&BTreeSet<usize>> {
        self.relevant.get(&query)
    }

    pub fn queries(&self) -> impl Iterator<Item = usize> + '_ {
        self.relevant.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevant.is_empty()
    }

    /// Checks that every document index is below `ndocs`.
    pub fn validate(&self, ndocs: usize) -> Result<()> {
        for (q, docs) in &self.relevant {
            if let Some(&d) = docs.iter().next_back().filter(|&&d| d >= ndocs) {
                return Err(Error::InvalidArgument(format!(
                    "query {q}: document {} beyond collection of {ndocs}",
                    d + 1
                )));
            }
        }
        Ok(())
    }

    /// Relevant documents of `query` among the first `ndocs`.
    pub fn relevant_within(&self, query: usize, ndocs: usize) -> BTreeSet<usize> {
        self.relevant
            .get(&query)
            .map(|s| s.range(..ndocs).copied().collect())
            .unwrap_or_default()
    }
}

pub fn read_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    parse_qrels(BufReader::new(File::open(path)?))
}

/// Parses `query iteration doc relevance` lines; only positive relevance counts.
pub fn parse_qrels(reader: impl BufRead) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: idx + 1, msg };
        if parts.len() != 4 {
            return Err(bad(format!("expected 4 columns, found {}", parts.len())));
        }
        let query: usize = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad query id {:?}", parts[0])))?;
        let doc: usize = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad document id {:?}", parts[2])))?;
        let rel: i64 = parts[3]
            .parse()
            .map_err(|_| bad(format!("bad relevance {:?}", parts[3])))?;
        if doc == 0 {
            return Err(bad("document ids are 1-based".into()));
        }
        if rel > 0 {
            qrels.insert(query, doc - 1);
        }
    }
    Ok(qrels)
}
