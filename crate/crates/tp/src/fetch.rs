//! Benchmark datasets: bundled copies, an on-disk cache and downloads.

use crate::data::{parse_series, series_to_csv, Series};
use crate::error::{CliError, CliResult};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

const SUNSPOTS_CSV: &str = include_str!("../data/sunspots.csv");
const TB3MS_CSV: &str = include_str!("../data/tb3ms.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    Sunspots,
    Heart,
    Tb3ms,
}

impl Dataset {
    pub fn parse(name: &str) -> CliResult<Self> {
        match name {
            "sunspots" => Ok(Dataset::Sunspots),
            "heart" => Ok(Dataset::Heart),
            "tb3ms" => Ok(Dataset::Tb3ms),
            other => Err(CliError::Validation(format!("unknown dataset `{other}` (sunspots, heart, tb3ms)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Sunspots => "sunspots",
            Dataset::Heart => "heart",
            Dataset::Tb3ms => "tb3ms",
        }
    }

    pub fn source_url(self) -> &'static str {
        match self {
            Dataset::Sunspots => {
                "https://raw.githubusercontent.com/statsmodels/statsmodels/main/statsmodels/datasets/sunspots/sunspots.csv"
            }
            Dataset::Heart => "http://ecg.mit.edu/time-series/hr.11839",
            Dataset::Tb3ms => "https://fred.stlouisfed.org/graph/fredgraph.csv?id=TB3MS",
        }
    }

    pub fn expected_rows(self) -> usize {
        match self {
            Dataset::Sunspots => 309,
            Dataset::Heart => 450,
            Dataset::Tb3ms => 203,
        }
    }

    fn bundled(self) -> Option<&'static str> {
        match self {
            Dataset::Sunspots => Some(SUNSPOTS_CSV),
            Dataset::Tb3ms => Some(TB3MS_CSV),
            Dataset::Heart => None,
        }
    }
}

/// `$TP_CACHE_DIR`, else `$HOME/.cache/tp`, else `./.tp-cache`.
pub fn cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("TP_CACHE_DIR") {
        return PathBuf::from(d);
    }
    match std::env::var_os("HOME") {
        Some(h) => PathBuf::from(h).join(".cache").join("tp"),
        None => PathBuf::from(".tp-cache"),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A dataset in canonical form together with where it came from.
#[derive(Debug, Clone)]
pub struct Fetched {
    pub series: Series,
    pub origin: String,
    pub sha256: String,
}

/// Loads `dataset` from the cache, the bundled copy or the network, in that
/// order; `refresh` skips the first two.
pub fn fetch(dataset: Dataset, refresh: bool) -> CliResult<Fetched> {
    let cached = cache_dir().join(format!("{}.csv", dataset.name()));
    if !refresh {
        if let Ok(text) = std::fs::read_to_string(&cached) {
            return finish(dataset, &text, format!("cache {}", cached.display()));
        }
        if let Some(text) = dataset.bundled() {
            return finish(dataset, text, "bundled copy".into());
        }
    }
    match download(dataset) {
        Ok(series) => {
            let text = series_to_csv(&series);
            if std::fs::create_dir_all(cache_dir()).is_ok() {
                let _ = crate::data::write_atomic(&cached, text.as_bytes());
            }
            finish(dataset, &text, dataset.source_url().into())
        }
        Err(e) => match dataset.bundled() {
            Some(text) => finish(dataset, text, format!("bundled copy (download failed: {e})")),
            None => Err(CliError::Download(format!(
                "{e}; fetch {} by hand and save it in canonical t,y form as {}",
                dataset.source_url(),
                cached.display()
            ))),
        },
    }
}

fn finish(dataset: Dataset, text: &str, origin: String) -> CliResult<Fetched> {
    let series = parse_series(text, false)?;
    if series.len() != dataset.expected_rows() {
        return Err(CliError::Validation(format!(
            "{} has {} rows, expected {}",
            dataset.name(),
            series.len(),
            dataset.expected_rows()
        )));
    }
    let canonical = series_to_csv(&series);
    Ok(Fetched { sha256: sha256_hex(canonical.as_bytes()), series, origin })
}

fn get(url: &str) -> CliResult<String> {
    ureq::get(url)
        .timeout(std::time::Duration::from_secs(30))
        .call()
        .map_err(|e| CliError::Download(format!("{url}: {e}")))?
        .into_string()
        .map_err(|e| CliError::Download(format!("{url}: {e}")))
}

fn download(dataset: Dataset) -> CliResult<Series> {
    let text = get(dataset.source_url())?;
    match dataset {
        Dataset::Sunspots => parse_sunspots(&text),
        Dataset::Heart => parse_heart(&text),
        Dataset::Tb3ms => parse_tb3ms(&text),
    }
}

fn bad(what: &str) -> CliError {
    CliError::Download(format!("unexpected {what} format"))
}

/// `YEAR,SUNACTIVITY` rows for 1700 to 2008.
pub fn parse_sunspots(text: &str) -> CliResult<Series> {
    let mut s = Series::default();
    for line in text.lines().skip(1) {
        let mut it = line.split(',');
        let (Some(a), Some(b)) = (it.next(), it.next()) else { continue };
        let t: f64 = a.trim().trim_matches('"').parse().map_err(|_| bad("sunspots"))?;
        let y: f64 = b.trim().trim_matches('"').parse().map_err(|_| bad("sunspots"))?;
        if (1700.0..=2008.0).contains(&t) {
            s.t.push(t);
            s.y.push(y);
        }
    }
    Ok(s)
}

/// 1800 heart-rate values at 0.5 s spacing, kept every fourth (2 s spacing).
pub fn parse_heart(text: &str) -> CliResult<Series> {
    let v: Vec<f64> = text
        .split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|_| bad("heart-rate")))
        .collect::<CliResult<_>>()?;
    if v.len() < 1800 {
        return Err(bad("heart-rate"));
    }
    let mut s = Series::default();
    for (k, i) in (0..1800).step_by(4).enumerate() {
        s.t.push(2.0 * k as f64);
        s.y.push(v[i]);
    }
    Ok(s)
}

/// Monthly `observation_date,TB3MS` rows averaged by quarter, 1959Q1 to 2009Q3.
pub fn parse_tb3ms(text: &str) -> CliResult<Series> {
    let mut quarters: std::collections::BTreeMap<(i32, u32), (f64, u32)> = Default::default();
    for line in text.lines().skip(1) {
        let mut it = line.split(',');
        let (Some(d), Some(v)) = (it.next(), it.next()) else { continue };
        let parts: Vec<&str> = d.trim().split('-').collect();
        if parts.len() < 2 {
            return Err(bad("tb3ms"));
        }
        let year: i32 = parts[0].parse().map_err(|_| bad("tb3ms"))?;
        let month: u32 = parts[1].parse().map_err(|_| bad("tb3ms"))?;
        let Ok(value) = v.trim().parse::<f64>() else { continue };
        let q = (month - 1) / 3;
        let e = quarters.entry((year, q)).or_insert((0.0, 0));
        e.0 += value;
        e.1 += 1;
    }
    let mut s = Series::default();
    for ((year, q), (sum, n)) in quarters {
        if (year, q) < (1959, 0) || (year, q) > (2009, 2) || n < 3 {
            continue;
        }
        s.t.push(year as f64 + q as f64 / 4.0);
        s.y.push(((sum / n as f64) * 100.0).round() / 100.0);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_counts() {
        let s = finish(Dataset::Sunspots, SUNSPOTS_CSV, String::new()).unwrap();
        assert_eq!(s.series.len(), 309);
        let e = finish(Dataset::Tb3ms, TB3MS_CSV, String::new()).unwrap();
        assert_eq!(e.series.len(), 203);
    }

    #[test]
    fn heart_subsample() {
        let text: String = (0..1800).map(|i| format!("{}\n", 60.0 + (i % 7) as f64)).collect();
        let s = parse_heart(&text).unwrap();
        assert_eq!(s.len(), 450);
        assert_eq!(s.t[1], 2.0);
        assert_eq!(s.y[1], 60.0 + 4.0);
    }

    #[test]
    fn tb3ms_quarterly_average() {
        let text = "observation_date,TB3MS\n1959-01-01,2.0\n1959-02-01,3.0\n1959-03-01,4.0\n1959-04-01,1.0\n";
        let s = parse_tb3ms(text).unwrap();
        assert_eq!(s.t, vec![1959.0]);
        assert_eq!(s.y, vec![3.0]);
    }
}
