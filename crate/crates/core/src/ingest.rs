//! Sparse document-term matrices in CLUTO format and class label files.
//!
//! A CLUTO matrix file starts with a `rows cols nnz` header followed by one
//! line per row holding whitespace-separated `column value` pairs, with
//! 1-based column indices. Rows are loaded with 0-based indices.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::partition::Partition;
use crate::sphere::SparseUnitVector;

/// Raw sparse rows as read from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Per row, `(column, value)` pairs in file order.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Share of the `n_rows × n_cols` cells that are not stored.
    pub fn zero_fraction(&self) -> f64 {
        let cells = self.n_rows as f64 * self.n_cols as f64;
        if cells == 0.0 {
            return 0.0;
        }
        1.0 - self.nnz() as f64 / cells
    }
}

pub fn read_cluto_matrix(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_cluto(BufReader::new(File::open(path)?))
}

/// Parses CLUTO text; errors carry the 1-based line number.
pub fn parse_cluto<R: Read>(reader: R) -> Result<SparseMatrix> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (header_line, header) = loop {
        match lines.next() {
            None => return Err(parse_err(1, "missing `rows cols nnz` header".into())),
            Some((i, l)) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break (i + 1, l);
                }
            }
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(header_line, format!("header must have 3 integers, found {} fields", fields.len())));
    }
    let mut dims = [0usize; 3];
    for (slot, f) in dims.iter_mut().zip(&fields) {
        *slot = f
            .parse()
            .map_err(|_| parse_err(header_line, format!("header field '{f}' is not a non-negative integer")))?;
    }
    let [n_rows, n_cols, nnz] = dims;

    let mut rows = Vec::with_capacity(n_rows);
    let mut last_line = header_line;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if rows.len() == n_rows {
            if line.trim().is_empty() {
                continue;
            }
            return Err(parse_err(line_no, format!("more than the declared {n_rows} rows")));
        }
        last_line = line_no;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !tokens.len().is_multiple_of(2) {
            return Err(parse_err(line_no, format!("unpaired trailing token '{}'", tokens[tokens.len() - 1])));
        }
        let mut row = Vec::with_capacity(tokens.len() / 2);
        for pair in tokens.chunks(2) {
            let col: usize = pair[0]
                .parse()
                .map_err(|_| parse_err(line_no, format!("column '{}' is not a positive integer", pair[0])))?;
            if col == 0 || col > n_cols {
                return Err(parse_err(line_no, format!("column {col} outside 1..={n_cols}")));
            }
            let value: f64 = pair[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("value '{}' is not a number", pair[1])))?;
            if !value.is_finite() {
                return Err(parse_err(line_no, format!("value '{}' is not finite", pair[1])));
            }
            row.push((col - 1, value));
        }
        rows.push(row);
    }
    if rows.len() != n_rows {
        return Err(parse_err(last_line, format!("expected {n_rows} rows, found {}", rows.len())));
    }
    let m = SparseMatrix { n_rows, n_cols, rows };
    if m.nnz() != nnz {
        return Err(parse_err(header_line, format!("header declares {nnz} nonzeros, found {}", m.nnz())));
    }
    Ok(m)
}

pub fn write_cluto(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cluto_to(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_cluto_to<W: Write>(m: &SparseMatrix, w: &mut W) -> Result<()> {
    writeln!(w, "{} {} {}", m.n_rows, m.n_cols, m.nnz())?;
    for row in &m.rows {
        let line: Vec<String> = row.iter().map(|&(c, v)| format!("{} {}", c + 1, v)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// L2-normalises every row onto the sphere. Entries stored as exact zeros are
/// dropped; a row without nonzero entries is an error naming its 0-based index.
pub fn normalize_rows(m: &SparseMatrix) -> Result<Vec<SparseUnitVector>> {
    m.rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut entries: Vec<(usize, f64)> = row.iter().copied().filter(|&(_, v)| v != 0.0).collect();
            entries.sort_by_key(|&(c, _)| c);
            if entries.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(invalid(format!("row {i} lists a column twice")));
            }
            if entries.is_empty() {
                return Err(Error::ZeroVector { index: Some(i) });
            }
            SparseUnitVector::normalize(m.n_cols, entries).map_err(|e| match e {
                Error::ZeroVector { .. } => Error::ZeroVector { index: Some(i) },
                other => other,
            })
        })
        .collect()
}

/// Class labels with their integer coding (first-appearance order).
#[derive(Clone, Debug, PartialEq)]
pub struct LabelFile {
    pub labels: Vec<String>,
    pub partition: Partition,
}

impl LabelFile {
    /// Class names indexed by cluster id.
    pub fn class_names(&self) -> Vec<&str> {
        let mut names = vec![""; self.partition.k()];
        for (l, &id) in self.labels.iter().zip(self.partition.labels()) {
            names[id] = l;
        }
        names
    }

    /// `(class, count, proportion)` in first-appearance order.
    pub fn class_frequencies(&self) -> Vec<(String, usize, f64)> {
        let n = self.labels.len() as f64;
        self.class_names()
            .into_iter()
            .zip(self.partition.cluster_sizes())
            .map(|(c, m)| (c.to_string(), m, m as f64 / n))
            .collect()
    }

    pub fn write_frequency_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let wrap = |e: csv::Error| invalid(format!("csv output: {e}"));
        out.write_record(["class", "count", "proportion"]).map_err(wrap)?;
        for (c, m, p) in self.class_frequencies() {
            out.write_record([c, m.to_string(), p.to_string()]).map_err(wrap)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads one class per line; blank lines are skipped and the count must be `n`.
pub fn read_labels(path: impl AsRef<Path>, n: usize) -> Result<LabelFile> {
    parse_labels(BufReader::new(File::open(path)?), n)
}

pub fn parse_labels<R: Read>(reader: R, n: usize) -> Result<LabelFile> {
    let mut labels = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() {
            labels.push(t.to_string());
        }
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: labels.len(), right: n });
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let coded: Vec<usize> = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.as_str()).or_insert(next)
        })
        .collect();
    let k = ids.len();
    let partition = Partition::new(coded, k)?;
    Ok(LabelFile { labels, partition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SpherePoint;

    const FIXTURE: &str = "2 3 3\n1 1.0 3 2.0\n2 5.0\n";

    #[test]
    fn parses_fixture() {
        let m = parse_cluto(FIXTURE.as_bytes()).unwrap();
        assert_eq!((m.n_rows, m.n_cols, m.nnz()), (2, 3, 3));
        assert_eq!(m.rows[0], vec![(0, 1.0), (2, 2.0)]);
        assert_eq!(m.rows[1], vec![(1, 5.0)]);
        assert!((m.zero_fraction() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_row_is_kept_and_rejected_downstream() {
        let m = parse_cluto("3 2 2\n1 1\n\n2 3\n".as_bytes()).unwrap();
        assert!(m.rows[1].is_empty());
        assert!(matches!(normalize_rows(&m), Err(Error::ZeroVector { index: Some(1) })));
    }

    fn line_of(text: &str) -> usize {
        match parse_cluto(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_input_reports_line() {
        assert_eq!(line_of("2 3 4\n1 1.0 3 2.0\n2 5.0\n"), 1);
        assert_eq!(line_of("2 3\n"), 1);
        assert_eq!(line_of("x 3 3\n"), 1);
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("2 3 3\n1 1.0 4 2.0\n2 5.0\n"), 2);
        assert_eq!(line_of("2 3 3\n1 1.0 0 2.0\n2 5.0\n"), 2);
        assert_eq!(line_of("2 3 3\n1 1.0 3 2.0\n2 5.0 3\n"), 3);
        assert_eq!(line_of("2 3 3\n1 1.0 3 abc\n2 5.0\n"), 2);
        assert_eq!(line_of("1 3 1\n1 1.0\n2 5.0\n"), 3);
        assert_eq!(line_of("3 3 3\n1 1.0 3 2.0\n2 5.0\n"), 3);
    }

    #[test]
    fn normalization() {
        let m = SparseMatrix { n_rows: 2, n_cols: 4, rows: vec![vec![(0, 3.0), (1, 4.0)], vec![(3, 1.0)]] };
        let rows = normalize_rows(&m).unwrap();
        assert_eq!(rows[0].values(), &[0.6, 0.8]);
        assert_eq!(rows[0].indices(), &[0, 1]);
        assert_eq!(rows[1].values(), &[1.0]);
        let dup = SparseMatrix { n_rows: 1, n_cols: 4, rows: vec![vec![(1, 1.0), (1, 2.0)]] };
        assert!(normalize_rows(&dup).is_err());
    }

    #[test]
    fn cosine_of_raw_rows_equals_dot_of_normalized() {
        let m = parse_cluto("3 5 7\n1 2 4 1 5 3\n2 1 4 2\n1 1 3 4\n".as_bytes()).unwrap();
        let rows = normalize_rows(&m).unwrap();
        let dense = |r: &Vec<(usize, f64)>| {
            let mut v = vec![0.0; 5];
            r.iter().for_each(|&(c, x)| v[c] = x);
            v
        };
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (dense(&m.rows[i]), dense(&m.rows[j]));
                let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((rows[i].dot_unchecked(&rows[j]) - dot / (na * nb)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mat");
        let m = parse_cluto("3 6 5\n1 0.125 6 3\n\n2 1e-3 3 7.5 4 2\n".as_bytes()).unwrap();
        write_cluto(&m, &path).unwrap();
        assert_eq!(read_cluto_matrix(&path).unwrap(), m);
    }

    #[test]
    fn labels() {
        let f = parse_labels("a\na\nb\nb\n".as_bytes(), 4).unwrap();
        assert_eq!(f.partition.labels(), &[0, 0, 1, 1]);
        let g = parse_labels("money\ntrade\n\nmoney\ninterest\n".as_bytes(), 4).unwrap();
        assert_eq!(g.partition.labels(), &[0, 1, 0, 2]);
        assert_eq!(
            g.class_frequencies(),
            vec![("money".into(), 2, 0.5), ("trade".into(), 1, 0.25), ("interest".into(), 1, 0.25)]
        );
        let mut csv = Vec::new();
        g.write_frequency_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "class,count,proportion\nmoney,2,0.5\ntrade,1,0.25\ninterest,1,0.25\n");
        assert!(matches!(parse_labels("a\nb\n".as_bytes(), 3), Err(Error::LengthMismatch { .. })));
    }
}
