//! File readers and writers, SMART weighting and a small tokenizer that turns
//! raw text into a term-document count matrix.

mod matrix_market;
mod qrels;
mod queries;
mod tokenize;
mod weighting;

pub use matrix_market::{parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to};
pub use qrels::{parse_qrels, read_qrels, Qrels};
pub use queries::{parse_queries, read_queries};
pub use tokenize::{tokenize_corpus, Corpus, TokenizeOptions};
pub use weighting::{apply_weighting, DocumentFrequencies, Side, SmartTriple, WeightingScheme};
