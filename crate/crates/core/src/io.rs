//! Plain-text readers and writers: edge lists, dense matrices, ego views.
//!
//! Matrix files start with a `rows cols` header followed by row-major,
//! whitespace-separated values. Blank lines and `#` comments are skipped
//! everywhere.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, EgoView, Matrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Node labels start at 1 instead of 0.
    pub one_based: bool,
    /// Fixes the node count; otherwise it is the largest label plus one.
    pub n_nodes: Option<usize>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Whitespace tokens tagged with their 1-based line number.
struct Tokens<'a> {
    path: PathBuf,
    items: std::vec::IntoIter<(usize, &'a str)>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(path: &Path, text: &'a str) -> Self {
        let items: Vec<_> = content_lines(text)
            .flat_map(|(n, line)| line.split_whitespace().map(move |t| (n, t)))
            .collect();
        Self {
            path: path.to_path_buf(),
            items: items.into_iter(),
            last_line: 0,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn next_raw(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.items.next() {
            Some((line, tok)) => {
                self.last_line = line;
                Ok((line, tok))
            }
            None => Err(self.err(self.last_line, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let (line, tok) = self.next_raw(what)?;
        tok.parse()
            .map_err(|_| self.err(line, format!("expected {what}, found '{tok}'")))
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let (line, tok) = self.next_raw(word)?;
        if tok == word {
            Ok(())
        } else {
            Err(self.err(line, format!("expected '{word}', found '{tok}'")))
        }
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let rows: usize = self.next("row count")?;
        let cols: usize = self.next("column count")?;
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let (line, tok) = self.next_raw("matrix entry")?;
                let x: f64 = tok
                    .parse()
                    .map_err(|_| self.err(line, format!("expected number, found '{tok}'")))?;
                if !x.is_finite() {
                    return Err(self.err(line, format!("non-finite entry '{tok}'")));
                }
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    fn finish(&mut self) -> Result<()> {
        match self.items.next() {
            None => Ok(()),
            Some((line, tok)) => Err(self.err(line, format!("trailing content '{tok}'"))),
        }
    }
}

pub fn parse_edge_list(path: &Path, text: &str, options: EdgeListOptions) -> Result<AdjacencyMatrix> {
    let err = |line, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut edges = Vec::new();
    let mut max_label = None::<usize>;
    for (line, content) in content_lines(text) {
        // Extra columns (weights, timestamps) are ignored.
        let mut fields = content.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty());
        let mut endpoint = || -> Result<usize> {
            let tok = fields
                .next()
                .ok_or_else(|| err(line, "expected two node labels".into()))?;
            let raw: usize = tok
                .parse()
                .map_err(|_| err(line, format!("invalid node label '{tok}'")))?;
            if options.one_based {
                raw.checked_sub(1)
                    .ok_or_else(|| err(line, "label 0 in a one-based edge list".into()))
            } else {
                Ok(raw)
            }
        };
        let (u, v) = (endpoint()?, endpoint()?);
        if let Some(n) = options.n_nodes {
            if u.max(v) >= n {
                return Err(err(line, format!("node {} exceeds the node count {n}", u.max(v))));
            }
        }
        max_label = max_label.max(Some(u.max(v)));
        edges.push((u, v));
    }
    let n = options
        .n_nodes
        .or(max_label.map(|m| m + 1))
        .ok_or_else(|| err(0, "edge list has no edges and no node count".into()))?;
    AdjacencyMatrix::from_edges(n, edges)
}

/// Reads an undirected, unweighted graph. Self-loops are dropped and repeated
/// edges collapse to one.
pub fn load_edge_list(path: impl AsRef<Path>, options: EdgeListOptions) -> Result<AdjacencyMatrix> {
    let path = path.as_ref();
    parse_edge_list(path, &read_text(path)?, options)
}

pub fn format_edge_list(adjacency: &AdjacencyMatrix) -> String {
    let mut out = String::new();
    for (i, j) in adjacency.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}

pub fn save_edge_list(path: impl AsRef<Path>, adjacency: &AdjacencyMatrix) -> Result<()> {
    write_text(path.as_ref(), &format_edge_list(adjacency))
}

fn push_matrix(out: &mut String, m: &Matrix) {
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Shortest round-trip decimal form of every entry.
pub fn format_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    push_matrix(&mut out, m);
    out
}

pub fn parse_matrix(path: &Path, text: &str) -> Result<Matrix> {
    let mut tokens = Tokens::new(path, text);
    let m = tokens.matrix()?;
    tokens.finish()?;
    Ok(m)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    parse_matrix(path, &read_text(path)?)
}

pub fn save_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    write_text(path.as_ref(), &format_matrix(m))
}

/// ```text
/// n_total 6
/// observed 0 2 5
/// a11 3 3
/// ...
/// a12 3 3
/// ...
/// ```
pub fn format_ego_view(view: &EgoView) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_total {}", view.n_total());
    let labels: Vec<String> = view.observed().iter().map(|i| i.to_string()).collect();
    let _ = writeln!(out, "observed {}", labels.join(" "));
    out.push_str("a11 ");
    push_matrix(&mut out, view.a11());
    out.push_str("a12 ");
    push_matrix(&mut out, view.a12());
    out
}

pub fn parse_ego_view(path: &Path, text: &str) -> Result<EgoView> {
    let mut tokens = Tokens::new(path, text);
    tokens.keyword("n_total")?;
    let n_total: usize = tokens.next("node count")?;
    tokens.keyword("observed")?;
    let mut observed = Vec::new();
    loop {
        let (line, tok) = tokens.next_raw("node index or 'a11'")?;
        if tok == "a11" {
            break;
        }
        observed.push(
            tok.parse()
                .map_err(|_| tokens.err(line, format!("invalid node index '{tok}'")))?,
        );
    }
    let a11 = tokens.matrix()?;
    tokens.keyword("a12")?;
    let a12 = tokens.matrix()?;
    tokens.finish()?;
    EgoView::new(observed, a11, a12, n_total)
}

pub fn load_ego_view(path: impl AsRef<Path>) -> Result<EgoView> {
    let path = path.as_ref();
    parse_ego_view(path, &read_text(path)?)
}

pub fn save_ego_view(path: impl AsRef<Path>, view: &EgoView) -> Result<()> {
    write_text(path.as_ref(), &format_ego_view(view))
}
