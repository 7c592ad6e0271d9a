//! Graph bundle: a directory with `meta.json`, `features.csv`, `labels.csv`
//! and `edges.csv`. Reals are written with 17 significant digits so that a
//! save/load/save cycle is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    format_version: u32,
    num_nodes: usize,
    num_categories: usize,
    feature_dim: usize,
}

/// Writes `bytes` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn read_features(dir: &Path, n: usize, d: usize) -> Result<Array2<f64>> {
    let text = read(&dir.join("features.csv"))?;
    let mut features = Array2::zeros((n, d));
    let mut rows = 0;
    for (line, row) in data_lines(&text) {
        if rows >= n {
            return Err(parse_err("features.csv", line, format!("more than {n} rows")));
        }
        let mut cols = 0;
        for field in row.split(',') {
            if cols >= d {
                return Err(parse_err(
                    "features.csv",
                    line,
                    format!("more than {d} columns"),
                ));
            }
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err("features.csv", line, format!("bad real {field:?}")))?;
            features[[rows, cols]] = v;
            cols += 1;
        }
        if cols != d {
            return Err(parse_err(
                "features.csv",
                line,
                format!("expected {d} columns, found {cols}"),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(
            "features.csv",
            rows,
            format!("expected {n} rows, found {rows}"),
        ));
    }
    Ok(features)
}

pub(crate) fn read_labels(dir: &Path, n: usize, num_categories: usize) -> Result<Vec<usize>> {
    let text = read(&dir.join("labels.csv"))?;
    let mut labels = Vec::with_capacity(n);
    for (line, row) in data_lines(&text) {
        let y: usize = row
            .parse()
            .map_err(|_| parse_err("labels.csv", line, format!("bad label {row:?}")))?;
        if y >= num_categories {
            return Err(parse_err(
                "labels.csv",
                line,
                format!("label {y} outside [0, {num_categories})"),
            ));
        }
        labels.push(y);
    }
    if labels.len() != n {
        return Err(parse_err(
            "labels.csv",
            labels.len(),
            format!("expected {n} labels, found {}", labels.len()),
        ));
    }
    Ok(labels)
}

fn read_edges(dir: &Path, n: usize) -> Result<Vec<(usize, usize)>> {
    let text = read(&dir.join("edges.csv"))?;
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, row) in data_lines(&text) {
        let mut parts = row.split(',');
        let mut next = |what: &str| -> Result<usize> {
            let f = parts
                .next()
                .ok_or_else(|| parse_err("edges.csv", line, format!("missing {what}")))?;
            f.trim()
                .parse()
                .map_err(|_| parse_err("edges.csv", line, format!("bad node id {f:?}")))
        };
        let u = next("u")?;
        let v = next("v")?;
        if parts.next().is_some() {
            return Err(parse_err("edges.csv", line, "expected exactly two columns"));
        }
        if u == v {
            return Err(parse_err("edges.csv", line, format!("self-loop at line {line}")));
        }
        if u >= n || v >= n {
            return Err(parse_err(
                "edges.csv",
                line,
                format!("node id outside [0, {n})"),
            ));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(parse_err(
                "edges.csv",
                line,
                format!("duplicate edge ({}, {})", key.0, key.1),
            ));
        }
        edges.push(key);
    }
    Ok(edges)
}

fn read_meta(dir: &Path) -> Result<Meta> {
    let path = dir.join("meta.json");
    let meta: Meta =
        serde_json::from_str(&read(&path)?).map_err(|source| Error::Json { path, source })?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::InvalidGraph(format!(
            "unsupported bundle format_version {}",
            meta.format_version
        )));
    }
    Ok(meta)
}

pub fn load_graph(dir: impl AsRef<Path>) -> Result<Graph> {
    let dir = dir.as_ref();
    let meta = read_meta(dir)?;
    let features = read_features(dir, meta.num_nodes, meta.feature_dim)?;
    let labels = read_labels(dir, meta.num_nodes, meta.num_categories)?;
    let edges = read_edges(dir, meta.num_nodes)?;
    Graph::new(features, labels, meta.num_categories, edges)
}

/// Like [`load_graph`] but only reads features and labels (edges may be absent).
pub(crate) fn load_feature_pool(dir: &Path) -> Result<(Array2<f64>, Vec<usize>, usize)> {
    let meta = read_meta(dir)?;
    let features = read_features(dir, meta.num_nodes, meta.feature_dim)?;
    let labels = read_labels(dir, meta.num_nodes, meta.num_categories)?;
    Ok((features, labels, meta.num_categories))
}

pub fn save_graph(g: &Graph, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = Meta {
        format_version: FORMAT_VERSION,
        num_nodes: g.num_nodes(),
        num_categories: g.num_categories(),
        feature_dim: g.feature_dim(),
    };
    let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_json.push('\n');
    write_atomic(&dir.join("meta.json"), meta_json.as_bytes())?;

    let mut buf = String::new();
    for row in g.features().rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            write!(buf, "{v:.16e}").unwrap();
        }
        buf.push('\n');
    }
    write_atomic(&dir.join("features.csv"), buf.as_bytes())?;

    buf.clear();
    for y in g.labels() {
        writeln!(buf, "{y}").unwrap();
    }
    write_atomic(&dir.join("labels.csv"), buf.as_bytes())?;

    buf.clear();
    for (u, v) in g.edges() {
        writeln!(buf, "{u},{v}").unwrap();
    }
    write_atomic(&dir.join("edges.csv"), buf.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_bundle(dir: &Path, edges: &str) {
        fs::write(
            dir.join("meta.json"),
            r#"{"format_version":1,"num_nodes":3,"num_categories":2,"feature_dim":2}"#,
        )
        .unwrap();
        fs::write(dir.join("features.csv"), "1,0\n0,1\n0.5,0.5\n").unwrap();
        fs::write(dir.join("labels.csv"), "0\n0\n1\n").unwrap();
        fs::write(dir.join("edges.csv"), edges).unwrap();
    }

    #[test]
    fn loads_small_bundle() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), "0,1\n1,2\n");
        let g = load_graph(dir.path()).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.labels(), &[0, 0, 1]);
    }

    #[test]
    fn self_loop_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), "0,1\n2,2\n");
        let err = load_graph(dir.path()).unwrap_err().to_string();
        assert!(err.contains("self-loop at line 2"), "{err}");
    }

    #[test]
    fn malformed_rows_are_located() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(dir.path(), "0,1\n1,x\n");
        let err = load_graph(dir.path()).unwrap_err().to_string();
        assert!(err.starts_with("edges.csv:2"), "{err}");

        fs::write(dir.path().join("edges.csv"), "0,1\n").unwrap();
        fs::write(dir.path().join("labels.csv"), "0\n5\n1\n").unwrap();
        let err = load_graph(dir.path()).unwrap_err().to_string();
        assert!(err.starts_with("labels.csv:2"), "{err}");

        fs::write(dir.path().join("labels.csv"), "0\n1\n1\n").unwrap();
        fs::write(dir.path().join("features.csv"), "1,0\n0\n0.5,0.5\n").unwrap();
        let err = load_graph(dir.path()).unwrap_err().to_string();
        assert!(err.starts_with("features.csv:2"), "{err}");

        let missing = dir.path().join("nope");
        assert!(matches!(load_graph(&missing), Err(Error::Io { .. })));
    }
}
