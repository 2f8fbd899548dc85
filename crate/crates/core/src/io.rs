//! Plain-text file formats: CSV matrices, edge lists, one-column signals and
//! versioned result tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so writing
//! and re-reading a file reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Version tag written as the first line of every result table.
pub const SCHEMA_LINE: &str = "# schema=v1";

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {field:?}"),
    })
}

pub fn parse_matrix_csv(text: &str) -> Result<Mat<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in data_lines(text) {
        let row = l
            .split(',')
            .map(|f| parse_field(f, line))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no matrix rows".into(),
        });
    }
    Ok(Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]))
}

pub fn read_matrix_csv(path: &Path) -> Result<Mat<f64>> {
    parse_matrix_csv(&fs::read_to_string(path)?)
}

pub fn format_matrix_csv(m: &Mat<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", m[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &Mat<f64>) -> Result<()> {
    fs::write(path, format_matrix_csv(m))?;
    Ok(())
}

/// Edge list with one `i,j,w` line per unordered pair (0-based, `i <= j`),
/// preceded by a `# n=<nodes>` header so isolated trailing nodes survive.
pub fn format_edge_list(g: &Graph) -> String {
    let s = g.shift();
    let mut out = format!("# n={}\n", g.n());
    for i in 0..g.n() {
        for j in i..g.n() {
            if s[(i, j)] != 0.0 {
                writeln!(out, "{i},{j},{}", s[(i, j)]).unwrap();
            }
        }
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    for l in text.lines() {
        if let Some(v) = l.trim().strip_prefix("# n=") {
            declared = Some(v.trim().parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad node count {v:?}"),
            })?);
        }
    }
    let mut edges = Vec::new();
    let mut max_index = 0usize;
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: "edge lines are i,j,w".into(),
            });
        }
        let index = |f: &str| {
            f.trim().parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("bad node index {f:?}"),
            })
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let w = parse_field(fields[2], line)?;
        max_index = max_index.max(i).max(j);
        edges.push((i, j, w));
    }
    let n = declared.unwrap_or(if edges.is_empty() { 0 } else { max_index + 1 });
    if n == 0 || max_index >= n {
        return Err(Error::validation(format!(
            "edge list references node {max_index} but has {n} nodes"
        )));
    }
    let mut s = Mat::<f64>::zeros(n, n);
    for (i, j, w) in edges {
        s[(i, j)] = w;
        s[(j, i)] = w;
    }
    Graph::new(s)
}

/// Reads a graph from either an adjacency CSV or an edge list (`.txt`/`.edges`).
pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("txt") | Some("edges") => parse_edge_list(&text),
        _ => Graph::new(parse_matrix_csv(&text)?),
    }
}

/// One-column signal, optionally tagged with `# resolution=N`.
pub fn format_signal_csv(values: &[f64], resolution: Option<usize>) -> String {
    let mut out = String::new();
    if let Some(r) = resolution {
        writeln!(out, "# resolution={r}").unwrap();
    }
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn parse_signal_csv(text: &str) -> Result<(Vec<f64>, Option<usize>)> {
    let mut resolution = None;
    for (i, l) in text.lines().enumerate() {
        if let Some(v) = l.trim().strip_prefix("# resolution=") {
            resolution = Some(v.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad resolution {v:?}"),
            })?);
        }
    }
    let values = data_lines(text)
        .map(|(line, l)| parse_field(l, line))
        .collect::<Result<Vec<_>>>()?;
    if let Some(r) = resolution {
        Error::check_dim(r, values.len())?;
    }
    Ok((values, resolution))
}

pub fn read_signal_csv(path: &Path) -> Result<(Vec<f64>, Option<usize>)> {
    parse_signal_csv(&fs::read_to_string(path)?)
}

/// A result table: schema line, optional `# key=value` metadata, a header row
/// and data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCHEMA_LINE);
        out.push('\n');
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_csv_round_trip_is_exact() {
        let m = Mat::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64 / 7.0);
        let back = parse_matrix_csv(&format_matrix_csv(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_matrix_is_rejected_with_line() {
        let err = parse_matrix_csv("1,2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_matrix_csv("# only a comment\n").is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_rows(&[
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.5, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let text = format_edge_list(&g);
        assert_eq!(text, "# n=4\n0,1,0.5\n1,2,1\n");
        assert_eq!(parse_edge_list(&text).unwrap(), g);
        assert!(parse_edge_list("0,1\n").is_err());
    }

    #[test]
    fn signal_resolution_header() {
        let text = format_signal_csv(&[0.25, -1.0], Some(2));
        let (v, r) = parse_signal_csv(&text).unwrap();
        assert_eq!(v, vec![0.25, -1.0]);
        assert_eq!(r, Some(2));
        assert!(parse_signal_csv("# resolution=3\n1\n2\n").is_err());
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["n", "metric"]).with_meta("experiment", "demo");
        t.push(vec!["5".into(), "0.5".into()]);
        assert_eq!(t.to_csv(), "# schema=v1\n# experiment=demo\nn,metric\n5,0.5\n");
    }
}
