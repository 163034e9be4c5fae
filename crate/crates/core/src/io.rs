//! Dataset CSV files and shared number formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::{CleanDataset, NoisyDataset};
use crate::{Error, Result};

/// Decimal form with 17 significant digits; parses back to the same bits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(prefix: &str, d: usize) -> String {
    let mut h = prefix.to_string();
    for j in 0..d {
        let _ = write!(h, ",dim{j}");
    }
    h
}

pub fn clean_to_csv(ds: &CleanDataset) -> String {
    let mut out = header("n", ds.dim());
    out.push('\n');
    for (n, p) in ds.points().iter().enumerate() {
        let _ = write!(out, "{n}");
        for v in p {
            let _ = write!(out, ",{}", fmt_real(*v));
        }
        out.push('\n');
    }
    out
}

pub fn noisy_to_csv(ds: &NoisyDataset) -> String {
    let mut out = header("n,m", ds.clean().dim());
    out.push('\n');
    for (n, row) in ds.samples().iter().enumerate() {
        for (m, y) in row.iter().enumerate() {
            let _ = write!(out, "{n},{m}");
            for v in y {
                let _ = write!(out, ",{}", fmt_real(*v));
            }
            out.push('\n');
        }
    }
    out
}

fn parse_rows(text: &str, index_cols: usize) -> Result<Vec<(Vec<usize>, Vec<f64>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(Error::EmptyDataset)?;
    let cols = head.split(',').count();
    if cols <= index_cols {
        return Err(Error::Format("header has no dimension columns".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols {
            return Err(Error::Format(format!("line {}: expected {cols} fields", i + 1)));
        }
        let idx = fields[..index_cols]
            .iter()
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
        let vals = fields[index_cols..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
        rows.push((idx, vals));
    }
    Ok(rows)
}

pub fn clean_from_csv(text: &str) -> Result<CleanDataset> {
    let rows = parse_rows(text, 1)?;
    let mut pts = vec![None; rows.len()];
    for (idx, v) in rows {
        let slot = pts
            .get_mut(idx[0])
            .ok_or_else(|| Error::Format(format!("point index {} out of range", idx[0])))?;
        *slot = Some(v);
    }
    let pts = pts
        .into_iter()
        .enumerate()
        .map(|(n, p)| p.ok_or_else(|| Error::Format(format!("missing point {n}"))))
        .collect::<Result<Vec<_>>>()?;
    CleanDataset::new(pts)
}

/// Reads noisy samples for an already known clean set.
pub fn noisy_from_csv(clean: CleanDataset, text: &str, sigma: f64) -> Result<NoisyDataset> {
    let rows = parse_rows(text, 2)?;
    let mut samples: Vec<Vec<Option<Vec<f64>>>> = vec![Vec::new(); clean.len()];
    for (idx, v) in rows {
        let row = samples
            .get_mut(idx[0])
            .ok_or_else(|| Error::Format(format!("point index {} out of range", idx[0])))?;
        if row.len() <= idx[1] {
            row.resize(idx[1] + 1, None);
        }
        row[idx[1]] = Some(v);
    }
    let samples = samples
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|y| y.ok_or_else(|| Error::Format("missing noisy sample".into())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    NoisyDataset::new(clean, samples, sigma)
}

/// One `key = value` entry of a flat config file.
#[derive(Debug, Clone, PartialEq)]
pub struct KvEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parses flat `key = value` text. `#` starts a comment; blank lines are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<KvEntry>> {
    let mut out: Vec<KvEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(Error::ConfigParse { line: i + 1, message: "empty key".into() });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(Error::ConfigParse {
                line: i + 1,
                message: format!("duplicate key `{key}` (first on line {})", prev.line),
            });
        }
        out.push(KvEntry { line: i + 1, key, value: v.trim().to_string() });
    }
    Ok(out)
}

impl KvEntry {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.value.parse::<T>().map_err(|e| Error::ConfigParse {
            line: self.line,
            message: format!("`{}`: {e}", self.key),
        })
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::ConfigParse { line: self.line, message: format!("`{}`: {}", self.key, message.into()) }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn clean_and_noisy_round_trip() {
        let clean = CleanDataset::new(vec![vec![0.1, -2.0], vec![1.0 / 3.0, 7.5]]).unwrap();
        let text = clean_to_csv(&clean);
        assert!(text.starts_with("n,dim0,dim1\n"));
        let back = clean_from_csv(&text).unwrap();
        assert_eq!(back, clean);

        let samples = vec![
            vec![vec![0.2, -2.1], vec![0.0, -1.9]],
            vec![vec![0.3, 7.4], vec![0.35, 7.7]],
        ];
        let noisy = NoisyDataset::new(clean.clone(), samples, 0.1).unwrap();
        let text = noisy_to_csv(&noisy);
        assert!(text.starts_with("n,m,dim0,dim1\n"));
        assert_eq!(noisy_from_csv(clean, &text, 0.1).unwrap(), noisy);
    }

    #[test]
    fn kv_parsing() {
        let e = parse_kv("# header\na = 1\n\nb= two # note\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!((e[1].line, e[1].key.as_str(), e[1].value.as_str()), (4, "b", "two"));
        assert_eq!(e[0].parse::<u32>().unwrap(), 1);
        assert!(matches!(e[1].parse::<f64>(), Err(Error::ConfigParse { line: 4, .. })));
        assert!(matches!(parse_kv("a = 1\nnope\n"), Err(Error::ConfigParse { line: 2, .. })));
        assert!(matches!(parse_kv("a = 1\na = 2\n"), Err(Error::ConfigParse { line: 2, .. })));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(matches!(clean_from_csv("n,dim0\n0,abc\n"), Err(Error::Format(_))));
        assert!(matches!(clean_from_csv("n,dim0\n0,1,2\n"), Err(Error::Format(_))));
    }
}
