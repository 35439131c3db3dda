use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

/// Parses a `coordinate` file with `real` or `integer` field and `general`
/// symmetry. Indices in the file are 1-based.
pub fn parse_matrix_market(reader: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, format!("bad header {header:?}")));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format {}", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field {}", fields[3])));
    }
    if fields[4] != "general" {
        return Err(parse_err(1, format!("unsupported symmetry {}", fields[4])));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err(lineno, "expected `rows cols nnz`"));
                }
                let n: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse().map_err(|_| parse_err(lineno, format!("bad integer {p:?}"))))
                    .collect::<Result<_>>()?;
                size = Some((n[0], n[1], n[2]));
                triplets.reserve(n[2]);
            }
            Some((m, n, _)) => {
                if parts.len() != 3 {
                    return Err(parse_err(lineno, "expected `row col value`"));
                }
                let i: usize = parts[0]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad row index {:?}", parts[0])))?;
                let j: usize = parts[1]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad column index {:?}", parts[1])))?;
                let v: f64 = parts[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad value {:?}", parts[2])))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(parse_err(lineno, format!("entry ({i}, {j}) outside {m}x{n}")));
                }
                if !v.is_finite() {
                    return Err(parse_err(lineno, "non-finite value"));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (m, n, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(
            0,
            format!("header announces {nnz} entries, found {}", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(m, n, &triplets)
}

pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(a, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes values with 17 significant digits so that reading them back is exact.
pub fn write_matrix_market_to(a: &SparseMatrix, w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SparseMatrix> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn single_entry() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 3.0\n").unwrap();
        assert_eq!(a.shape(), (2, 2));
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.to_dense()[(0, 0)], 3.0);
    }

    #[test]
    fn empty_matrix_and_comments() {
        let a = parse("%%MatrixMarket matrix coordinate integer general\n% note\n\n3 4 0\n").unwrap();
        assert_eq!(a.shape(), (3, 4));
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("").is_err());
        assert!(parse("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate complex general\n1 1 0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real symmetric\n1 1 0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").is_err());
        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn round_trip() {
        let a = SparseMatrix::from_triplets(
            3,
            2,
            &[(0, 0, 0.1), (2, 0, 1.0 / 3.0), (1, 1, -7.25e-300), (2, 1, 12345.678901234567)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        let b = parse_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }
}
