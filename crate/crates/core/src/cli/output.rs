//! Text formats: fixed-column CSV and pretty JSON, written in a fixed order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

/// Shortest round-trip decimal. Plain notation for moderate magnitudes,
/// exponent notation otherwise so tiny values stay short.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Rows of `report.csv`: `mode_index,time,value,tag`.
#[derive(Debug, Default)]
pub struct Report {
    body: String,
}

impl Report {
    pub fn new() -> Self {
        Self { body: "mode_index,time,value,tag\n".into() }
    }

    /// Append `rows[k][j]` for every mode `k` (1-based in the file) and node `t_j`.
    pub fn series(&mut self, tag: &str, t: &[f64], rows: &[Vec<f64>]) {
        for (k, r) in rows.iter().enumerate() {
            for (tj, v) in t.iter().zip(r) {
                let _ = writeln!(self.body, "{},{},{},{}", k + 1, fmt_f64(*tj), fmt_f64(*v), tag);
            }
        }
    }

    pub fn into_string(self) -> String {
        self.body
    }
}

/// `mode_index,value`.
pub fn coefficients_csv(values: &[f64]) -> String {
    let mut s = String::from("mode_index,value\n");
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", k + 1, fmt_f64(*v));
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    fs::write(dir.join(name), contents)
}

/// Data records of a CSV with the given header, with their line numbers.
fn records(path: &Path, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| e.to_string())?;
    let got = rdr.headers().map_err(|e| e.to_string())?;
    if got.iter().ne(header.iter().copied()) {
        return Err(format!("line 1: expected header `{}`, found `{}`", header.join(","), got.iter().collect::<Vec<_>>().join(",")));
    }
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| e.to_string())?;
            let line = r.position().map_or(0, |p| p.line() as usize);
            Ok((line, r.iter().map(str::to_string).collect()))
        })
        .collect()
}

fn parse_index(line: usize, s: &str, n: usize) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if (1..=n).contains(&k) => Ok(k),
        _ => Err(format!("line {line}: mode_index `{s}` outside 1..={n}")),
    }
}

fn parse_value(line: usize, s: &str) -> Result<f64, String> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("line {line}: bad number `{s}`"))
}

/// A `mode_index,value` file covering every mode `1..=n` exactly once.
pub fn read_coefficients(path: &Path, n: usize) -> Result<Vec<f64>, String> {
    let mut out = vec![None; n];
    for (line, c) in records(path, &["mode_index", "value"])? {
        let k = parse_index(line, &c[0], n)?;
        if out[k - 1].replace(parse_value(line, &c[1])?).is_some() {
            return Err(format!("line {line}: mode {k} given twice"));
        }
    }
    out.iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| format!("mode {} missing", k + 1)))
        .collect()
}

/// A `mode_index,time,value` file sampling every mode on exactly `nodes`.
pub fn read_samples(path: &Path, n: usize, nodes: &[f64]) -> Result<Vec<Vec<f64>>, String> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(nodes.len()); n];
    for (line, c) in records(path, &["mode_index", "time", "value"])? {
        let k = parse_index(line, &c[0], n)?;
        let t = parse_value(line, &c[1])?;
        let row = &mut out[k - 1];
        let Some(&expected) = nodes.get(row.len()) else {
            return Err(format!("line {line}: more samples for mode {k} than grid nodes"));
        };
        if (t - expected).abs() > 1e-12 * nodes[nodes.len() - 1] {
            return Err(format!("line {line}: time {t} does not match grid node {expected}"));
        }
        row.push(parse_value(line, &c[2])?);
    }
    for (k, r) in out.iter().enumerate() {
        if r.len() != nodes.len() {
            return Err(format!("mode {} has {} samples, grid has {} nodes", k + 1, r.len(), nodes.len()));
        }
    }
    Ok(out)
}

/// The `tag` rows of a `report.csv`, as `rows[k][j]` with their times.
pub fn read_report_series(path: &Path, n: usize, tag: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>), String> {
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut times = Vec::new();
    for (line, c) in records(path, &["mode_index", "time", "value", "tag"])? {
        if c[3] != tag {
            continue;
        }
        let k = parse_index(line, &c[0], n)?;
        if k == 1 {
            times.push(parse_value(line, &c[1])?);
        }
        rows[k - 1].push(parse_value(line, &c[2])?);
    }
    if times.is_empty() || rows.iter().any(|r| r.len() != times.len()) {
        return Err(format!("no complete `{tag}` series"));
    }
    Ok((times, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -0.25, 1e-300, 6.02e23, 0.1 + 0.2, f64::MIN_POSITIVE, 12345.678] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-20), "1e-20");
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn coefficient_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        fs::write(&p, coefficients_csv(&[1.5, -2.0, 1e-30])).unwrap();
        assert_eq!(read_coefficients(&p, 3).unwrap(), vec![1.5, -2.0, 1e-30]);
        assert!(read_coefficients(&p, 4).unwrap_err().contains("mode 4 missing"));
        assert!(read_coefficients(&p, 2).unwrap_err().contains("line 4"));
    }

    #[test]
    fn report_series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("report.csv");
        let t = [0.0, 0.5, 1.0];
        let u = vec![vec![1.0, 0.5, 0.25], vec![2.0, 1.0, 0.5]];
        let mut r = Report::new();
        r.series("u", &t, &u);
        r.series("Mu", &t, &u);
        fs::write(&p, r.into_string()).unwrap();
        let (times, rows) = read_report_series(&p, 2, "u").unwrap();
        assert_eq!(times, t);
        assert_eq!(rows, u);
    }
}
