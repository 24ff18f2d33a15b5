//! Edge-list and opinion files, and analysis of empirical networks.
//!
//! Edge list: one `a b` pair of non-negative integer ids per line, `#`
//! starts a comment line. Edges are undirected; a directed source listing
//! both `a b` and `b a` is collapsed to one edge and counted as a duplicate.
//! Ids are compacted to `0..n` in ascending order of the original id. A
//! `# nodes N` comment written by [`write_edge_list`] keeps isolated nodes
//! when every id in the file is already below `N`.
//!
//! Opinion file: one `id opinion` pair per line with the same comment rule,
//! `.` as decimal separator.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{density_map, scored_pairs, DensityMap, MetricsReport};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListReport {
    pub graph: Graph,
    /// Original id of every compact node.
    pub ids: Vec<u64>,
    /// Edge lines read, before any deduplication.
    pub raw_edges: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn declared_nodes(text: &str) -> Option<usize> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|c| {
            c.trim()
                .strip_prefix("nodes ")?
                .split_whitespace()
                .next()?
                .parse()
                .ok()
        })
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeListReport> {
    let path = path.as_ref();
    parse_edge_list(&read(path)?, path)
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<EdgeListReport> {
    let mut raw = Vec::new();
    for (line, content) in data_lines(text) {
        let mut fields = content.split_whitespace();
        let mut id = |what: &str| -> Result<u64> {
            let field = fields
                .next()
                .ok_or_else(|| parse_error(path, line, format!("missing {what} node id")))?;
            field
                .parse::<u64>()
                .map_err(|_| parse_error(path, line, format!("invalid node id '{field}'")))
        };
        let (a, b) = (id("first")?, id("second")?);
        if fields.next().is_some() {
            return Err(parse_error(path, line, "expected exactly two node ids"));
        }
        raw.push((a, b));
    }

    let max_id = raw.iter().map(|&(a, b)| a.max(b)).max();
    let ids: Vec<u64> = match (declared_nodes(text), max_id) {
        (Some(n), Some(m)) if m < n as u64 => (0..n as u64).collect(),
        (Some(n), None) => (0..n as u64).collect(),
        _ => {
            let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        }
    };
    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut graph = Graph::empty(ids.len());
    let (mut duplicates, mut self_loops) = (0, 0);
    for &(a, b) in &raw {
        if a == b {
            self_loops += 1;
        } else if !graph.add_edge(index[&a], index[&b]) {
            duplicates += 1;
        }
    }
    Ok(EdgeListReport {
        graph,
        ids,
        raw_edges: raw.len(),
        duplicates,
        self_loops,
    })
}

/// Opinions ordered by compact node index, given the original ids from
/// [`load_edge_list`].
pub fn load_opinions(path: impl AsRef<Path>, ids: &[u64]) -> Result<Vec<f64>> {
    let path = path.as_ref();
    parse_opinions(&read(path)?, path, ids)
}

pub fn parse_opinions(text: &str, path: &Path, ids: &[u64]) -> Result<Vec<f64>> {
    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut opinions = vec![None; ids.len()];
    for (line, content) in data_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [id, value] = fields[..] else {
            return Err(parse_error(path, line, "expected '<node id> <opinion>'"));
        };
        let id: u64 = id
            .parse()
            .map_err(|_| parse_error(path, line, format!("invalid node id '{id}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| parse_error(path, line, format!("invalid opinion '{value}'")))?;
        let &i = index.get(&id).ok_or_else(|| {
            Error::Validation(format!("{}:{line}: unknown node id {id}", path.display()))
        })?;
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::Validation(format!(
                "{}:{line}: opinion {value} of node {id} outside [-1, 1]",
                path.display()
            )));
        }
        if opinions[i].replace(value).is_some() {
            return Err(Error::Validation(format!(
                "{}:{line}: node {id} listed twice",
                path.display()
            )));
        }
    }
    opinions
        .into_iter()
        .zip(ids)
        .map(|(v, id)| {
            v.ok_or_else(|| {
                Error::Validation(format!("{}: missing opinion for node {id}", path.display()))
            })
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn format_edge_list(graph: &Graph) -> String {
    let mut out = format!(
        "# nodes {} edges {}\n",
        graph.node_count(),
        graph.edge_count()
    );
    for (a, b) in graph.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &format_edge_list(graph))
}

/// Opinions keyed by node index. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn format_opinions(opinions: &[f64]) -> String {
    let mut out = String::with_capacity(opinions.len() * 24);
    for (i, b) in opinions.iter().enumerate() {
        out.push_str(&format!("{i} {b}\n"));
    }
    out
}

pub fn write_opinions(opinions: &[f64], path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &format_opinions(opinions))
}

/// A real network with measured opinions.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDataset {
    pub graph: Graph,
    pub opinions: Vec<f64>,
    pub label: String,
}

impl EmpiricalDataset {
    pub fn load(
        edges: impl AsRef<Path>,
        opinions: impl AsRef<Path>,
        label: impl Into<String>,
    ) -> Result<(Self, EdgeListReport)> {
        let report = load_edge_list(edges)?;
        let opinions = load_opinions(opinions, &report.ids)?;
        Ok((
            EmpiricalDataset {
                graph: report.graph.clone(),
                opinions,
                label: label.into(),
            },
            report,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalAnalysis {
    pub report: MetricsReport,
    pub density: DensityMap,
}

pub fn analyze_empirical(dataset: &EmpiricalDataset, bins: usize) -> Result<EmpiricalAnalysis> {
    if dataset.opinions.len() != dataset.graph.node_count() {
        return Err(Error::Validation(format!(
            "{}: {} opinions for {} nodes",
            dataset.label,
            dataset.opinions.len(),
            dataset.graph.node_count()
        )));
    }
    let (b, b_nn) = scored_pairs(&dataset.graph, &dataset.opinions);
    Ok(EmpiricalAnalysis {
        report: MetricsReport::compute(&dataset.graph, &dataset.opinions),
        density: density_map(&b, &b_nn, bins)?,
    })
}

/// Writes the density map text grid to `path`.
pub fn write_density_map(map: &DensityMap, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &map.to_text())
}

pub(crate) fn ensure_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}
