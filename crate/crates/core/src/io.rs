//! File formats: graph, cost, and relevance TSVs.
//!
//! Graph files carry a `#alpha=<float>` metadata line, a `src\tdst\tprob`
//! header, and one edge per row. Node identifiers are arbitrary strings
//! mapped to dense indices; saving also writes a `<path>.nodes` sidecar
//! (`index\tname` rows) which, when present next to a file being loaded,
//! fixes the mapping exactly (isolated nodes included). Unknown `#key=value`
//! lines are ignored so outputs can embed provenance such as a config hash.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{CostVector, GraphError, RecGraph};
use crate::relevance::{RelevanceError, RelevanceIndex};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }

    fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        IoError::Parse { path: path.to_path_buf(), line, msg: msg.into() }
    }

    fn invalid(path: &Path, msg: impl ToString) -> Self {
        IoError::Invalid { path: path.to_path_buf(), msg: msg.to_string() }
    }
}

/// Bidirectional mapping between string node ids and dense indices.
#[derive(Debug, Clone, Default)]
pub struct NodeTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeTable {
    pub fn from_names(names: Vec<String>) -> Self {
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        NodeTable { names, index }
    }

    /// "0", "1", ... for graphs without external identifiers.
    pub fn sequential(n: usize) -> Self {
        Self::from_names((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }
}

const GRAPH_HEADER: &str = "src\tdst\tprob";

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".nodes");
    PathBuf::from(os)
}

fn read_lines(path: &Path) -> Result<Vec<String>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn load_sidecar(path: &Path) -> Result<Option<NodeTable>, IoError> {
    let side = sidecar_path(path);
    if !side.exists() {
        return Ok(None);
    }
    let mut names = Vec::new();
    for (lineno, line) in read_lines(&side)?.iter().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let idx: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::parse(&side, lineno + 1, "expected index\\tname"))?;
        let name = parts
            .next()
            .ok_or_else(|| IoError::parse(&side, lineno + 1, "expected index\\tname"))?;
        if idx != names.len() {
            return Err(IoError::parse(
                &side,
                lineno + 1,
                format!("indices must be contiguous from 0, got {idx}"),
            ));
        }
        names.push(name.to_string());
    }
    Ok(Some(NodeTable::from_names(names)))
}

/// Loads a graph TSV, using the `<path>.nodes` sidecar for the id mapping
/// when present and first-appearance order otherwise.
pub fn load_graph(path: impl AsRef<Path>) -> Result<(RecGraph, NodeTable), IoError> {
    let path = path.as_ref();
    let sidecar = load_sidecar(path)?;
    let fixed = sidecar.is_some();
    let mut table = sidecar.unwrap_or_default();

    let mut alpha: Option<f64> = None;
    let mut header_seen = false;
    let mut rows: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (lineno, raw) in read_lines(path)?.iter().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some(value) = meta.strip_prefix("alpha=") {
                let a: f64 = value.trim().parse().map_err(|_| {
                    IoError::parse(path, lineno + 1, format!("bad alpha value {value:?}"))
                })?;
                alpha = Some(a);
            }
            continue;
        }
        if !header_seen {
            if line != GRAPH_HEADER {
                return Err(IoError::parse(
                    path,
                    lineno + 1,
                    format!("expected header {GRAPH_HEADER:?}, got {line:?}"),
                ));
            }
            header_seen = true;
            continue;
        }
        let mut parts = line.split('\t');
        let (src, dst, prob) = match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(d), Some(p)) => (s, d, p),
            _ => return Err(IoError::parse(path, lineno + 1, "expected src\\tdst\\tprob")),
        };
        let p: f64 = prob
            .parse()
            .map_err(|_| IoError::parse(path, lineno + 1, format!("bad probability {prob:?}")))?;
        let (i, j) = if fixed {
            let i = table
                .id(src)
                .ok_or_else(|| IoError::parse(path, lineno + 1, format!("unknown node {src:?}")))?;
            let j = table
                .id(dst)
                .ok_or_else(|| IoError::parse(path, lineno + 1, format!("unknown node {dst:?}")))?;
            (i, j)
        } else {
            (table.intern(src), table.intern(dst))
        };
        rows.push((i, j, p, lineno + 1));
    }

    if !header_seen {
        return Err(IoError::invalid(path, "missing src\\tdst\\tprob header"));
    }
    let alpha = alpha.ok_or_else(|| IoError::invalid(path, "missing #alpha= metadata line"))?;

    let n = table.len();
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, p, _line) in &rows {
        out[i].push((j, p));
    }
    let g = RecGraph::new(alpha, out).map_err(|e| graph_error_with_line(path, &rows, e))?;
    Ok((g, table))
}

fn graph_error_with_line(path: &Path, rows: &[(usize, usize, f64, usize)], e: GraphError) -> IoError {
    // Point at the row that created the offending edge where possible.
    let line = match &e {
        GraphError::DuplicateEdge(i, j) | GraphError::BadProbability { i, j, .. } => rows
            .iter()
            .filter(|r| r.0 == *i && r.1 == *j)
            .map(|r| r.3)
            .next_back(),
        GraphError::SelfLoop(i) => rows.iter().find(|r| r.0 == *i && r.1 == *i).map(|r| r.3),
        GraphError::RowSum { i, .. } => rows.iter().find(|r| r.0 == *i).map(|r| r.3),
        _ => None,
    };
    match line {
        Some(line) => IoError::parse(path, line, e.to_string()),
        None => IoError::invalid(path, e),
    }
}

/// Writes the graph TSV plus its `<path>.nodes` sidecar. Extra `meta`
/// key/value pairs become `#key=value` lines.
pub fn save_graph(
    path: impl AsRef<Path>,
    g: &RecGraph,
    table: &NodeTable,
    meta: &[(&str, &str)],
) -> Result<(), IoError> {
    let path = path.as_ref();
    assert_eq!(table.len(), g.n(), "node table must cover the graph");
    let mut text = String::new();
    let _ = writeln!(text, "#alpha={}", g.alpha());
    for (k, v) in meta {
        let _ = writeln!(text, "#{k}={v}");
    }
    text.push_str(GRAPH_HEADER);
    text.push('\n');
    for (i, _, j, p) in g.edges() {
        let _ = writeln!(text, "{}\t{}\t{}", table.name(i), table.name(j), p);
    }
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))?;

    let side = sidecar_path(path);
    let mut nodes = String::new();
    for (k, v) in meta {
        let _ = writeln!(nodes, "#{k}={v}");
    }
    for i in 0..table.len() {
        let _ = writeln!(nodes, "{}\t{}", i, table.name(i));
    }
    std::fs::write(&side, nodes).map_err(|e| IoError::io(&side, e))?;
    Ok(())
}

/// Loads a `node\tcost` TSV; nodes absent from the file get cost 0.
pub fn load_costs(path: impl AsRef<Path>, table: &NodeTable) -> Result<CostVector, IoError> {
    let path = path.as_ref();
    let mut values = vec![0.0f64; table.len()];
    let mut seen = vec![false; table.len()];
    for (lineno, raw) in read_lines(path)?.iter().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (node, cost) = match (parts.next(), parts.next()) {
            (Some(n), Some(c)) => (n, c),
            _ => return Err(IoError::parse(path, lineno + 1, "expected node\\tcost")),
        };
        let i = table
            .id(node)
            .ok_or_else(|| IoError::parse(path, lineno + 1, format!("unknown node {node:?}")))?;
        if seen[i] {
            return Err(IoError::parse(path, lineno + 1, format!("duplicate cost for {node:?}")));
        }
        seen[i] = true;
        let c: f64 = cost
            .parse()
            .map_err(|_| IoError::parse(path, lineno + 1, format!("bad cost {cost:?}")))?;
        if !(0.0..=1.0).contains(&c) {
            return Err(IoError::parse(path, lineno + 1, format!("cost {c} outside [0, 1]")));
        }
        values[i] = c;
    }
    CostVector::new(values).map_err(|e| IoError::invalid(path, e))
}

pub fn save_costs(
    path: impl AsRef<Path>,
    costs: &CostVector,
    table: &NodeTable,
    meta: &[(&str, &str)],
) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut text = String::new();
    for (k, v) in meta {
        let _ = writeln!(text, "#{k}={v}");
    }
    for (i, &c) in costs.values().iter().enumerate() {
        let _ = writeln!(text, "{}\t{}", table.name(i), c);
    }
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

/// Loads a `src\trank\tdst\tscore` TSV; ranks must be contiguous from 1 per
/// source and scores non-increasing down each list.
pub fn load_relevance(path: impl AsRef<Path>, table: &NodeTable) -> Result<RelevanceIndex, IoError> {
    let path = path.as_ref();
    let mut per_src: HashMap<usize, Vec<(usize, usize, f64)>> = HashMap::new();
    for (lineno, raw) in read_lines(path)?.iter().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (src, rank, dst, score) = match (parts.next(), parts.next(), parts.next(), parts.next())
        {
            (Some(s), Some(r), Some(d), Some(v)) => (s, r, d, v),
            _ => return Err(IoError::parse(path, lineno + 1, "expected src\\trank\\tdst\\tscore")),
        };
        let i = table
            .id(src)
            .ok_or_else(|| IoError::parse(path, lineno + 1, format!("unknown node {src:?}")))?;
        let j = table
            .id(dst)
            .ok_or_else(|| IoError::parse(path, lineno + 1, format!("unknown node {dst:?}")))?;
        let r: usize = rank
            .parse()
            .map_err(|_| IoError::parse(path, lineno + 1, format!("bad rank {rank:?}")))?;
        let v: f64 = score
            .parse()
            .map_err(|_| IoError::parse(path, lineno + 1, format!("bad score {score:?}")))?;
        per_src.entry(i).or_default().push((r, j, v));
    }
    let mut lists = Vec::new();
    let mut sources: Vec<usize> = per_src.keys().copied().collect();
    sources.sort_unstable();
    for src in sources {
        let mut entries = per_src.remove(&src).unwrap();
        entries.sort_by_key(|&(r, _, _)| r);
        for (pos, &(r, _, _)) in entries.iter().enumerate() {
            if r != pos + 1 {
                return Err(IoError::invalid(
                    path,
                    RelevanceError::BadRank { src, rank: r, pos: pos + 1 },
                ));
            }
        }
        lists.push((src, entries.into_iter().map(|(_, j, v)| (j, v)).collect()));
    }
    RelevanceIndex::new(table.len(), lists).map_err(|e| IoError::invalid(path, e))
}

pub fn save_relevance(
    path: impl AsRef<Path>,
    index: &RelevanceIndex,
    table: &NodeTable,
    meta: &[(&str, &str)],
) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut text = String::new();
    for (k, v) in meta {
        let _ = writeln!(text, "#{k}={v}");
    }
    for i in 0..index.n() {
        for (pos, &(j, score)) in index.candidates(i).iter().enumerate() {
            let _ = writeln!(text, "{}\t{}\t{}\t{}", table.name(i), pos + 1, table.name(j), score);
        }
    }
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}
