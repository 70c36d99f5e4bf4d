//! Edge-list and citation-network readers.
//!
//! Edge lists are UTF-8, one edge per line, two whitespace-separated node
//! tokens; lines starting with `#` and blank lines are skipped. Citation data
//! follows the LINQS layout: a `.content` file of `id features... label` rows
//! and a `.cites` file of `cited citing` rows.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, TpmError};
use crate::graph::{CleanStats, Graph, LabeledDataset, NodeIdMap};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EdgeListReport {
    pub clean: CleanStats,
    /// With directed input, `A B` plus `B A` is expected and counted here
    /// rather than in `clean.duplicates`.
    pub reciprocal_pairs: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: NodeIdMap,
    pub report: EdgeListReport,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: LabeledDataset,
    pub ids: NodeIdMap,
    /// Class names in dense-index order.
    pub class_names: Vec<String>,
    pub report: CleanStats,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| TpmError::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads a whitespace-separated edge list. The result is always undirected;
/// `directed_input` only changes how reversed pairs are reported.
pub fn load_edge_list(path: impl AsRef<Path>, directed_input: bool) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut ids = NodeIdMap::new();
    let mut edges = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => {
                let u = ids.intern(a);
                let v = ids.intern(b);
                edges.push((u, v));
            }
            _ => {
                return Err(TpmError::Parse {
                    path: path.to_owned(),
                    line: line_no,
                    reason: format!("expected two node tokens, got {line:?}"),
                })
            }
        }
    }
    if ids.is_empty() {
        return Err(TpmError::EmptyGraph);
    }

    let mut report = EdgeListReport::default();
    if directed_input {
        let ordered: HashSet<(usize, usize)> =
            edges.iter().copied().filter(|(u, v)| u != v).collect();
        report.reciprocal_pairs = ordered
            .iter()
            .filter(|&&(u, v)| u < v && ordered.contains(&(v, u)))
            .count();
    }
    let (graph, mut clean) = Graph::from_edges(ids.len(), edges);
    clean.duplicates -= report.reciprocal_pairs;
    report.clean = clean;
    Ok(LoadedGraph { graph, ids, report })
}

/// Writes `graph` as an edge list using the external names in `ids`.
pub fn write_edge_list(path: impl AsRef<Path>, graph: &Graph, ids: &NodeIdMap) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(
        out,
        "# {} nodes, {} edges",
        graph.node_count(),
        graph.edge_count()
    )
    .expect("write to vec");
    for (u, v) in graph.edges() {
        writeln!(out, "{}\t{}", ids.name(u), ids.name(v)).expect("write to vec");
    }
    fs::write(path, out).map_err(|e| TpmError::io(path, e))
}

struct ContentRows {
    ids: NodeIdMap,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

fn intern_class(
    classes: &mut HashMap<String, usize>,
    names: &mut Vec<String>,
    label: &str,
) -> usize {
    *classes.entry(label.to_owned()).or_insert_with(|| {
        names.push(label.to_owned());
        names.len() - 1
    })
}

fn parse_content(path: &Path) -> Result<ContentRows> {
    let text = read(path)?;
    let mut rows = ContentRows {
        ids: NodeIdMap::new(),
        labels: Vec::new(),
        class_names: Vec::new(),
    };
    let mut classes = HashMap::new();
    for (line_no, line) in data_lines(&text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |reason: String| TpmError::Parse {
            path: path.to_owned(),
            line: line_no,
            reason,
        };
        if tokens.len() < 2 {
            return Err(parse_err(format!("paper {:?} has no label", tokens[0])));
        }
        if rows.ids.get(tokens[0]).is_some() {
            return Err(parse_err(format!("paper {:?} listed twice", tokens[0])));
        }
        rows.ids.intern(tokens[0]);
        let label = tokens[tokens.len() - 1];
        rows.labels
            .push(intern_class(&mut classes, &mut rows.class_names, label));
    }
    Ok(rows)
}

fn assemble(rows: ContentRows, pairs: Vec<(String, String)>) -> Result<LoadedDataset> {
    if rows.class_names.is_empty() {
        return Err(TpmError::Dataset("content file lists no classes".into()));
    }
    let mut unknown = 0;
    let mut edges = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        match (rows.ids.get(a), rows.ids.get(b)) {
            (Some(u), Some(v)) => edges.push((u, v)),
            _ => unknown += 1,
        }
    }
    let (graph, mut report) = Graph::from_edges(rows.ids.len(), edges);
    report.raw_edges += unknown;
    report.unknown_endpoints = unknown;
    let class_count = rows.class_names.len();
    let dataset = LabeledDataset::new(graph, rows.labels, class_count)?;
    Ok(LoadedDataset {
        dataset,
        ids: rows.ids,
        class_names: rows.class_names,
        report,
    })
}

/// Reads a LINQS citation dataset. Class labels get dense indices in
/// first-seen order; citations naming unknown papers are dropped and counted.
pub fn load_citation_dataset(
    content_path: impl AsRef<Path>,
    cites_path: impl AsRef<Path>,
) -> Result<LoadedDataset> {
    let rows = parse_content(content_path.as_ref())?;
    let cites_path = cites_path.as_ref();
    let text = read(cites_path)?;
    let mut pairs = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => pairs.push((a.to_owned(), b.to_owned())),
            _ => {
                return Err(TpmError::Parse {
                    path: cites_path.to_owned(),
                    line: line_no,
                    reason: format!("expected `cited citing`, got {line:?}"),
                })
            }
        }
    }
    assemble(rows, pairs)
}

/// Reads the tab-separated Pubmed-Diabetes release
/// (`Pubmed-Diabetes.NODE.paper.tab`, `Pubmed-Diabetes.DIRECTED.cites.tab`).
pub fn load_pubmed_diabetes(
    node_path: impl AsRef<Path>,
    cites_path: impl AsRef<Path>,
) -> Result<LoadedDataset> {
    let node_path = node_path.as_ref();
    let text = read(node_path)?;
    let mut rows = ContentRows {
        ids: NodeIdMap::new(),
        labels: Vec::new(),
        class_names: Vec::new(),
    };
    let mut classes = HashMap::new();
    // two header lines: table name and feature declarations
    for (line_no, line) in data_lines(&text).skip(2) {
        let mut tokens = line.split('\t');
        let id = tokens.next().unwrap_or_default().trim();
        let label = tokens
            .find_map(|t| t.trim().strip_prefix("label="))
            .ok_or_else(|| TpmError::Parse {
                path: node_path.to_owned(),
                line: line_no,
                reason: format!("paper {id:?} has no label"),
            })?;
        rows.ids.intern(id);
        rows.labels
            .push(intern_class(&mut classes, &mut rows.class_names, label));
    }

    let cites_path = cites_path.as_ref();
    let text = read(cites_path)?;
    let mut pairs = Vec::new();
    for (line_no, line) in data_lines(&text).skip(2) {
        let papers: Vec<&str> = line
            .split_whitespace()
            .filter_map(|t| t.strip_prefix("paper:"))
            .collect();
        if papers.len() != 2 {
            return Err(TpmError::Parse {
                path: cites_path.to_owned(),
                line: line_no,
                reason: format!("expected two `paper:` fields, got {line:?}"),
            });
        }
        pairs.push((papers[0].to_owned(), papers[1].to_owned()));
    }
    assemble(rows, pairs)
}
