use std::fmt;
use std::str::FromStr;

use crate::error::{dim_err, Error, Result};
use crate::linalg::SparseMatrix;

/// Which half of a scheme applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Document,
    Query,
}

/// Three SMART letters: local term frequency, global factor, normalization.
///
/// Supported letters: `l` (1 + log tf), `b` (binary) or `x` (raw tf);
/// `p` (probabilistic idf `log((n - df)/df)`, floored at 0) or `x` (none);
/// `n` or `x` (no normalization).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmartTriple {
    pub local: char,
    pub global: char,
    pub norm: char,
}

impl FromStr for SmartTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.chars().collect();
        if letters.len() != 3 {
            return Err(Error::InvalidArgument(format!("weighting triple {s:?} must have 3 letters")));
        }
        let (local, global, norm) = (letters[0], letters[1], letters[2]);
        if !matches!(local, 'l' | 'b' | 'x') {
            return Err(Error::InvalidArgument(format!("unsupported term frequency letter {local:?}")));
        }
        if !matches!(global, 'x' | 'p') {
            return Err(Error::InvalidArgument(format!("unsupported global weight letter {global:?}")));
        }
        if !matches!(norm, 'n' | 'x') {
            return Err(Error::InvalidArgument(format!("unsupported normalization letter {norm:?}")));
        }
        Ok(Self { local, global, norm })
    }
}

impl fmt::Display for SmartTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.local, self.global, self.norm)
    }
}

/// Document and query weighting, written `ddd.qqq` (default `lxn.bpx`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightingScheme {
    pub document: SmartTriple,
    pub query: SmartTriple,
    /// Base of every logarithm in the scheme; `e` by default.
    pub log_base: f64,
}

impl Default for WeightingScheme {
    fn default() -> Self {
        "lxn.bpx".parse().expect("default scheme is valid")
    }
}

impl WeightingScheme {
    pub fn with_log_base(mut self, base: f64) -> Result<Self> {
        if !(base > 0.0 && base != 1.0 && base.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid log base {base}")));
        }
        self.log_base = base;
        Ok(self)
    }

    pub fn triple(&self, side: Side) -> SmartTriple {
        match side {
            Side::Document => self.document,
            Side::Query => self.query,
        }
    }

    fn log(&self, x: f64) -> f64 {
        x.ln() / self.log_base.ln()
    }
}

impl FromStr for WeightingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (d, q) = s
            .split_once('.')
            .ok_or_else(|| Error::InvalidArgument(format!("weighting scheme {s:?} must look like ddd.qqq")))?;
        Ok(Self {
            document: d.parse()?,
            query: q.parse()?,
            log_base: std::f64::consts::E,
        })
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.document, self.query)
    }
}

/// Collection statistics for the global factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentFrequencies {
    pub ndocs: usize,
    pub df: Vec<usize>,
}

impl DocumentFrequencies {
    /// Counts, for every row of a term-document matrix, the columns where it
    /// is nonzero.
    pub fn from_matrix(tf: &SparseMatrix) -> Self {
        Self {
            ndocs: tf.ncols(),
            df: tf.row_counts(),
        }
    }
}

/// Applies the letters of `side` entrywise. Never adds nonzeros; the `p`
/// factor may turn entries into zeros, which are dropped.
pub fn apply_weighting(
    tf: &SparseMatrix,
    scheme: &WeightingScheme,
    side: Side,
    stats: &DocumentFrequencies,
) -> Result<SparseMatrix> {
    if stats.df.len() != tf.nrows() {
        return Err(dim_err(format!(
            "{} document frequencies for {} terms",
            stats.df.len(),
            tf.nrows()
        )));
    }
    if tf.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("term counts must be nonnegative".into()));
    }
    let triple = scheme.triple(side);
    let n = stats.ndocs as f64;
    let idf: Vec<f64> = match triple.global {
        'p' => stats
            .df
            .iter()
            .map(|&df| {
                if df == 0 {
                    0.0
                } else {
                    scheme.log((n - df as f64) / df as f64).max(0.0)
                }
            })
            .collect(),
        _ => vec![1.0; tf.nrows()],
    };
    Ok(tf.map_values(|i, _, v| {
        let local = match triple.local {
            'l' => 1.0 + scheme.log(v),
            'b' => 1.0,
            _ => v,
        };
        local * idf[i]
    }))
}
