//! Ingestion of user-supplied edge lists, label files, and feature files.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use super::LabeledGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub graph: LabeledGraph,
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
    pub unlabeled_nodes: usize,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-comment lines split on commas and whitespace.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        let toks = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        Some((i + 1, toks))
    })
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        reason: reason.into(),
    }
}

fn int(path: &Path, line: usize, tok: &str) -> Result<i64> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("`{tok}` is not an integer")))
}

/// Loads an undirected labeled graph.
///
/// Edges are symmetrized and deduplicated; self-loops are dropped and counted.
/// Label values may be any integers; they are mapped to classes in ascending
/// order. Nodes without a label are an error unless `allow_unlabeled` is set.
pub fn load_graph(
    edges: &Path,
    labels: &Path,
    features: Option<&Path>,
    allow_unlabeled: bool,
) -> Result<LoadReport> {
    let edge_text = read(edges)?;
    let mut raw_edges = Vec::new();
    let mut ids = BTreeSet::new();
    for (line, toks) in records(&edge_text) {
        if toks.len() != 2 {
            return Err(parse_err(edges, line, format!("expected 2 node ids, found {}", toks.len())));
        }
        let (u, v) = (int(edges, line, toks[0])?, int(edges, line, toks[1])?);
        ids.insert(u);
        ids.insert(v);
        raw_edges.push((u, v));
    }
    if ids.is_empty() {
        return Err(Error::Graph(format!("{}: empty graph", edges.display())));
    }
    let node_ids: Vec<i64> = ids.into_iter().collect();
    let index: HashMap<i64, usize> = node_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut self_loops = 0;
    let mut pairs = BTreeSet::new();
    let mut duplicates = 0;
    for (u, v) in raw_edges {
        if u == v {
            self_loops += 1;
            continue;
        }
        let (a, b) = (index[&u].min(index[&v]), index[&u].max(index[&v]));
        if !pairs.insert((a, b)) {
            duplicates += 1;
        }
    }

    let label_text = read(labels)?;
    let mut raw_labels: BTreeMap<usize, i64> = BTreeMap::new();
    for (line, toks) in records(&label_text) {
        if toks.len() != 2 {
            return Err(parse_err(labels, line, "expected `node_id,label`"));
        }
        let id = int(labels, line, toks[0])?;
        let value = int(labels, line, toks[1])?;
        let Some(&i) = index.get(&id) else {
            return Err(parse_err(labels, line, format!("dangling node id {id} (not in the edge list)")));
        };
        if let Some(prev) = raw_labels.insert(i, value) {
            if prev != value {
                return Err(parse_err(labels, line, format!("node {id} labeled both {prev} and {value}")));
            }
        }
    }
    let class_names: Vec<i64> = raw_labels.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let class_of: HashMap<i64, usize> = class_names.iter().enumerate().map(|(c, v)| (*v, c)).collect();
    let node_labels: Vec<Option<usize>> = (0..node_ids.len())
        .map(|i| raw_labels.get(&i).map(|v| class_of[v]))
        .collect();
    let unlabeled = node_labels.iter().filter(|l| l.is_none()).count();
    if unlabeled > 0 && !allow_unlabeled {
        let first = node_labels.iter().position(|l| l.is_none()).unwrap();
        return Err(Error::Graph(format!(
            "{}: {unlabeled} node(s) have no label (first: node {}); pass --allow-unlabeled to exclude them",
            labels.display(),
            node_ids[first]
        )));
    }

    let mut adjacency = vec![Vec::new(); node_ids.len()];
    for &(a, b) in &pairs {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    let mut graph = LabeledGraph::new(node_ids.clone(), adjacency, node_labels, class_names)?;

    if let Some(fpath) = features {
        let text = read(fpath)?;
        let mut rows: Vec<Option<DVector<f64>>> = vec![None; node_ids.len()];
        let mut width = None;
        for (line, toks) in records(&text) {
            let id = int(fpath, line, toks[0])?;
            let Some(&i) = index.get(&id) else {
                return Err(parse_err(fpath, line, format!("dangling node id {id}")));
            };
            let vals = toks[1..]
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(fpath, line, format!("`{t}` is not a number"))))
                .collect::<Result<Vec<f64>>>()?;
            if *width.get_or_insert(vals.len()) != vals.len() || vals.is_empty() {
                return Err(parse_err(fpath, line, "inconsistent feature width"));
            }
            rows[i] = Some(DVector::from_vec(vals));
        }
        let feats = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::Graph(format!("{}: node {} has no features", fpath.display(), node_ids[i]))))
            .collect::<Result<Vec<_>>>()?;
        graph = graph.with_features(feats)?;
    }

    Ok(LoadReport {
        graph,
        self_loops_dropped: self_loops,
        duplicate_edges_dropped: duplicates,
        unlabeled_nodes: unlabeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn dedups_symmetric_edges_and_drops_self_loops() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "1 2\n2,1\n1 1\n");
        let l = write(dir.path(), "l.csv", "1,0\n2,1\n");
        let r = load_graph(&e, &l, None, false).unwrap();
        assert_eq!(r.graph.num_edges(), 1);
        assert_eq!(r.self_loops_dropped, 1);
        assert_eq!(r.duplicate_edges_dropped, 1);
    }

    #[test]
    fn missing_label_is_an_error_in_strict_mode() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "1 2\n2 3\n");
        let l = write(dir.path(), "l.csv", "1,1\n2,1\n");
        let err = load_graph(&e, &l, None, false).unwrap_err();
        assert!(err.to_string().contains("l.csv"), "{err}");
        let r = load_graph(&e, &l, None, true).unwrap();
        assert_eq!(r.unlabeled_nodes, 1);
        assert_eq!(r.graph.label(2), None);
    }

    #[test]
    fn rejects_dangling_labels_and_bad_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "1 2\n");
        let l = write(dir.path(), "l.csv", "1,1\n2,1\n9,2\n");
        assert!(matches!(load_graph(&e, &l, None, false), Err(Error::Parse { line: 3, .. })));
        let bad = write(dir.path(), "bad.txt", "1 x\n");
        assert!(matches!(load_graph(&bad, &l, None, false), Err(Error::Parse { line: 1, .. })));
        let empty = write(dir.path(), "empty.txt", "# nothing\n");
        assert!(load_graph(&empty, &l, None, false).is_err());
    }

    #[test]
    fn five_node_fixture() {
        // 10 - 20 - 30
        //  |    |
        // 40 - 50
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "# fixture\n10 20\n20 30\n10 40\n20 50\n40 50\n");
        let l = write(dir.path(), "l.csv", "10,1\n20,1\n30,2\n40,2\n50,2\n");
        let f = write(dir.path(), "f.csv", "10,1.0\n20,2\n30,3\n40,4\n50,5.5\n");
        let g = load_graph(&e, &l, Some(&f), false).unwrap().graph;
        let expect: [&[usize]; 5] = [&[1, 3], &[0, 2, 4], &[1], &[0, 4], &[1, 3]];
        for (i, nbrs) in expect.iter().enumerate() {
            assert_eq!(g.neighbors(i), *nbrs);
        }
        assert_eq!(g.class_names(), &[1, 2]);
        assert_eq!(g.label(2), Some(1));
        assert_eq!(g.features().unwrap()[4][0], 5.5);
    }
}
