//! Two-column `t,y` series files.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Rows at the given indices, in that order.
    pub fn select(&self, idx: &[usize]) -> Series {
        Series {
            t: idx.iter().map(|&i| self.t[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

pub fn parse_series(text: &str, allow_duplicates: bool) -> CliResult<Series> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("line 1: {e}")))?
        .clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "y" {
        return Err(CliError::Parse(format!("line 1: expected header `t,y`, found `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Series::default();
    let mut seen = HashSet::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> CliResult<f64> {
            let v: f64 = rec[i]
                .parse()
                .map_err(|_| CliError::Parse(format!("line {line}: `{}` is not a number in column {name}", &rec[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Parse(format!("line {line}: column {name} is not finite")))
            }
        };
        let t = field(0, "t")?;
        let y = field(1, "y")?;
        if !allow_duplicates && !seen.insert(t.to_bits()) {
            return Err(CliError::Parse(format!("line {line}: duplicate t = {t}")));
        }
        out.t.push(t);
        out.y.push(y);
    }
    Ok(out)
}

pub fn read_series(path: &Path, allow_duplicates: bool) -> CliResult<Series> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_series(&text, allow_duplicates).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn series_to_csv(s: &Series) -> String {
    let mut out = String::from("t,y\n");
    for (t, y) in s.t.iter().zip(&s.y) {
        out.push_str(&format!("{t},{y}\n"));
    }
    out
}

/// Reads a list of input locations: either a one-column file with header `t`
/// or a series file whose `y` column is ignored.
pub fn read_inputs(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::Parse(format!("line 1: {e}")))?.clone();
    if header.is_empty() || &header[0] != "t" {
        return Err(CliError::Parse(format!("{}: line 1: first column must be `t`", path.display())));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: f64 = rec[0]
            .parse()
            .map_err(|_| CliError::Parse(format!("{}: line {line}: `{}` is not a number", path.display(), &rec[0])))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!("{}: line {line}: t is not finite", path.display())));
        }
        out.push(v);
    }
    Ok(out)
}

/// `start:end:count` evenly spaced points including both ends.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Parse(format!("grid `{spec}` must look like start:end:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::write(&tmp, contents).map_err(|e| CliError::Parse(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_lines() {
        let s = parse_series("t,y\n0,1.5\n1,2\n", false).unwrap();
        assert_eq!(s.y, vec![1.5, 2.0]);
        let e = parse_series("t,y\n0,1\n1,abc\n", false).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(parse_series("t,y\n0,1\n0,2\n", false).is_err());
        assert!(parse_series("t,y\n0,1\n0,2\n", true).is_ok());
        assert!(parse_series("a,b\n0,1\n", false).is_err());
        assert!(parse_series("t,y\n0,inf\n", false).is_err());
    }

    #[test]
    fn grid_spec() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0:1").is_err());
    }
}
