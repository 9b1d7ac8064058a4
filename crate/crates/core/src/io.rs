//! Plain-text channel files, rate-point CSV and `key=value` run metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::types::{ChannelPair, RegionPoint};

pub const CSV_HEADER: &str = "r0,r1,r2,order,alpha0,alpha1,alpha2";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: {token:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite entry {token:?}")));
    }
    Ok(v)
}

/// Parses the channel format: a header `n1 n2 nt`, then `n1` rows of `h1`
/// and `n2` rows of `h2`, `nt` entries each. Blank lines are skipped.
pub fn parse_channels(text: &str) -> Result<ChannelPair> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty channel file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(hline, format!("bad dimension {t:?}")))
        })
        .collect::<Result<_>>()?;
    let [n1, n2, nt] = dims[..] else {
        return Err(parse_err(hline, format!("header needs 3 dimensions \"n1 n2 nt\", got {}", dims.len())));
    };
    if n1 == 0 || n2 == 0 || nt == 0 {
        return Err(parse_err(hline, "dimensions must be positive"));
    }

    let mut read_matrix = |rows: usize, name: &str| -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * nt);
        for r in 0..rows {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(text.lines().count() + 1, format!("missing row {} of {name}", r + 1)))?;
            let row: Vec<f64> = l.split_whitespace().map(|t| parse_number(t, ln)).collect::<Result<_>>()?;
            if row.len() != nt {
                return Err(parse_err(
                    ln,
                    format!("row {} of {name} has {} entries, expected {nt}", r + 1, row.len()),
                ));
            }
            data.extend(row);
        }
        Ok(Matrix::from_row_slice(rows, nt, &data))
    };
    let h1 = read_matrix(n1, "h1")?;
    let h2 = read_matrix(n2, "h2")?;
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "unexpected trailing content"));
    }
    ChannelPair::new(h1, h2)
}

pub fn load_channels(path: impl AsRef<Path>) -> Result<ChannelPair> {
    parse_channels(&fs::read_to_string(path)?)
}

/// Inverse of [`parse_channels`], 17 significant digits per entry.
pub fn format_channels(ch: &ChannelPair) -> String {
    let mut out = format!("{} {} {}\n", ch.n1(), ch.n2(), ch.nt());
    for h in [ch.h1(), ch.h2()] {
        for row in h.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_channels(path: impl AsRef<Path>, ch: &ChannelPair) -> Result<()> {
    Ok(fs::write(path, format_channels(ch))?)
}

/// CSV with [`CSV_HEADER`]; rates clamped at zero, alphas empty without a split.
pub fn format_points(points: &[RegionPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for pt in points {
        let r = pt.rates.clamped();
        let _ = write!(out, "{:.16e},{:.16e},{:.16e},{}", r.r0, r.r1, r.r2, r.order);
        match pt.split {
            Some(s) => {
                let _ = writeln!(out, ",{:.16e},{:.16e},{:.16e}", s.alpha0(), s.alpha1(), s.alpha2());
            }
            None => out.push_str(",,,\n"),
        }
    }
    out
}

pub fn write_points(path: impl AsRef<Path>, points: &[RegionPoint]) -> Result<()> {
    Ok(fs::write(path, format_points(points))?)
}

/// Ordered `key=value` pairs, one per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMeta {
    pub entries: Vec<(String, String)>,
}

impl RunMeta {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(i + 1, "expected key=value"))?;
            meta.push(k, v);
        }
        Ok(meta)
    }
}
