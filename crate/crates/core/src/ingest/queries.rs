use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::matrix_market::parse_matrix_market;
use crate::error::{dim_err, Error, Result};
use crate::linalg::SparseMatrix;

/// Reads queries as an `nterms × nq` count matrix, one column per query.
///
/// Accepts either a Matrix Market file or plain text with one query per line,
/// each line a list of 1-based term indices; an index may carry a count as
/// `index:count`, and repeated indices add up.
pub fn read_queries(path: impl AsRef<Path>, nterms: usize) -> Result<SparseMatrix> {
    parse_queries(BufReader::new(File::open(path)?), nterms)
}

pub fn parse_queries(mut reader: impl BufRead, nterms: usize) -> Result<SparseMatrix> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.trim_start().starts_with("%%") {
        let q = parse_matrix_market(text.as_bytes())?;
        if q.nrows() != nterms {
            return Err(dim_err(format!(
                "query matrix has {} rows, collection has {nterms} terms",
                q.nrows()
            )));
        }
        return Ok(q);
    }

    let mut triplets = Vec::new();
    let mut col = 0;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: idx + 1, msg };
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in trimmed.split_whitespace() {
            let (term, count) = match tok.split_once(':') {
                Some((t, c)) => (t, c.parse::<f64>().map_err(|_| bad(format!("bad count in {tok:?}")))?),
                None => (tok, 1.0),
            };
            let term: usize = term.parse().map_err(|_| bad(format!("bad term index {tok:?}")))?;
            if term == 0 || term > nterms {
                return Err(bad(format!("term {term} outside 1..={nterms}")));
            }
            match entries.iter_mut().find(|(t, _)| *t == term - 1) {
                Some(e) => e.1 += count,
                None => entries.push((term - 1, count)),
            }
        }
        triplets.extend(entries.into_iter().map(|(i, v)| (i, col, v)));
        col += 1;
    }
    SparseMatrix::from_triplets(nterms, col, &triplets)
}
