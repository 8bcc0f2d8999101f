//! Dense per-product input features.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::KeyMap;
use crate::linalg::Matrix;

/// Row access to input features, implemented by the stored matrix and by
/// cold-start overlays that append extra rows.
pub trait FeatureRows: Sync {
    fn dim(&self) -> usize;
    fn num_rows(&self) -> usize;
    fn row(&self, i: usize) -> &[f64];
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Matrix,
}

impl FeatureMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        if !values.is_finite() {
            return Err(Error::NonFinite("feature matrix contains NaN or infinity".into()));
        }
        Ok(Self { values })
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.values
    }
}

impl FeatureRows for FeatureMatrix {
    fn dim(&self) -> usize {
        self.values.cols()
    }

    fn num_rows(&self) -> usize {
        self.values.rows()
    }

    fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

/// Parses a feature file: a `<num_nodes>\t<d_in>` header, then
/// `<key>\t<f1>,<f2>,...` per product. Row order defines dense ids.
pub fn read_features<R: BufRead>(reader: R, path: &str) -> Result<(KeyMap, FeatureMatrix)> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty() || s.starts_with('#')));

    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(Error::parse(path, 1, "missing header line")),
    };
    let hdr: Vec<&str> = header.trim_end().split('\t').collect();
    if hdr.len() != 2 {
        return Err(Error::parse(path, hline, "header must be <num_nodes>\\t<d_in>"));
    }
    let parse_count = |s: &str, what: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::parse(path, hline, format!("bad {what} {s:?}")))
    };
    let n = parse_count(hdr[0], "node count")?;
    let d = parse_count(hdr[1], "feature dimension")?;
    if d == 0 {
        return Err(Error::parse(path, hline, "feature dimension must be positive"));
    }

    let mut keys = KeyMap::new();
    let mut data = Vec::with_capacity(n * d);
    for (line_no, line) in lines {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        let (key, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line_no, "expected <key>\\t<values>"))?;
        if key.is_empty() {
            return Err(Error::parse(path, line_no, "empty product key"));
        }
        keys.insert_new(key)
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let before = data.len();
        for tok in values.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad float {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, line_no, "non-finite feature value"));
            }
            data.push(v);
        }
        if data.len() - before != d {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {d} values, found {}", data.len() - before),
            ));
        }
    }
    if keys.len() != n {
        return Err(Error::parse(
            path,
            hline,
            format!("header declares {n} products but file has {}", keys.len()),
        ));
    }
    let m = Matrix::from_vec(n, d, data)?;
    Ok((keys, FeatureMatrix::new(m)?))
}

pub fn write_features<W: Write>(mut w: W, keys: &KeyMap, features: &FeatureMatrix) -> Result<()> {
    let m = features.as_matrix();
    writeln!(w, "{}\t{}", m.rows(), m.cols())?;
    for (i, key) in keys.keys().iter().enumerate() {
        write!(w, "{key}\t")?;
        write_floats(&mut w, m.row(i))?;
        writeln!(w)?;
    }
    Ok(())
}

/// Comma-separated shortest round-trip representation.
pub(crate) fn write_floats<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for (j, v) in values.iter().enumerate() {
        if j > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v:?}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_write_roundtrip() {
        let text = "2\t3\na\t1.0,2.5,-3\nb\t0,0,0.125\n";
        let (keys, f) = read_features(text.as_bytes(), "f").unwrap();
        assert_eq!(keys.id("b"), Some(1));
        assert_eq!(f.row(0), &[1.0, 2.5, -3.0]);
        let mut out = Vec::new();
        write_features(&mut out, &keys, &f).unwrap();
        let (keys2, f2) = read_features(out.as_slice(), "f").unwrap();
        assert_eq!(keys, keys2);
        assert_eq!(f, f2);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_features("2\t2\na\t1,2\n".as_bytes(), "f").is_err());
        assert!(read_features("1\t2\na\t1,2,3\n".as_bytes(), "f").is_err());
        assert!(read_features("1\t2\na\t1,nan\n".as_bytes(), "f").is_err());
        assert!(read_features("2\t1\na\t1\na\t2\n".as_bytes(), "f").is_err());
        match read_features("1\t2\na\t1,x\n".as_bytes(), "f") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
