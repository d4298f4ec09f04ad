use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numfmt::fmt_f64;

/// Undirected labeled graph with optional node features.
///
/// Classes are stored zero-based; `class_names[c]` is the label value written
/// to (and read from) label files for class `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    node_ids: Vec<i64>,
    adjacency: Vec<Vec<usize>>,
    labels: Vec<Option<usize>>,
    class_names: Vec<i64>,
    features: Option<Vec<DVector<f64>>>,
}

impl LabeledGraph {
    /// Builds a graph from an edge list over nodes `0..n`. Self-loops and
    /// repeated edges are dropped; use [`LabeledGraph::new`] to reject them.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        labels: Vec<Option<usize>>,
        num_classes: usize,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u != v {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let names = (1..=num_classes as i64).collect();
        Self::new((0..n as i64).collect(), adjacency, labels, names)
    }

    pub fn new(
        node_ids: Vec<i64>,
        adjacency: Vec<Vec<usize>>,
        labels: Vec<Option<usize>>,
        class_names: Vec<i64>,
    ) -> Result<Self> {
        let n = adjacency.len();
        if node_ids.len() != n {
            return Err(Error::dim("node id count", n, node_ids.len()));
        }
        if labels.len() != n {
            return Err(Error::dim("label count", n, labels.len()));
        }
        for (i, nbrs) in adjacency.iter().enumerate() {
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Graph(format!("neighbor list of node {i} is not sorted and deduplicated")));
            }
            for &j in nbrs {
                if j == i {
                    return Err(Error::Graph(format!("self-loop at node {i}")));
                }
                if j >= n || adjacency[j].binary_search(&i).is_err() {
                    return Err(Error::Graph(format!("edge ({i}, {j}) has no reverse edge")));
                }
            }
        }
        if let Some(bad) = labels.iter().flatten().find(|c| **c >= class_names.len()) {
            return Err(Error::Graph(format!(
                "label class {bad} outside 0..{}",
                class_names.len()
            )));
        }
        Ok(LabeledGraph {
            node_ids,
            adjacency,
            labels,
            class_names,
            features: None,
        })
    }

    pub fn with_features(mut self, features: Vec<DVector<f64>>) -> Result<Self> {
        if features.len() != self.num_nodes() {
            return Err(Error::dim("feature row count", self.num_nodes(), features.len()));
        }
        if let Some(f) = features.first() {
            if let Some(bad) = features.iter().find(|x| x.len() != f.len()) {
                return Err(Error::dim("feature length", f.len(), bad.len()));
            }
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn node_id(&self, i: usize) -> i64 {
        self.node_ids[i]
    }

    pub fn class_names(&self) -> &[i64] {
        &self.class_names
    }

    pub fn features(&self) -> Option<&[DVector<f64>]> {
        self.features.as_deref()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Breadth-first layers around `i`: `layers[k]` holds the nodes at
    /// shortest-path distance exactly `k` (`layers[0] = [i]`), each sorted.
    pub fn khop_layers(&self, i: usize, max_k: usize) -> Result<Vec<Vec<usize>>> {
        let n = self.num_nodes();
        if i >= n {
            return Err(Error::Graph(format!("node index {i} out of range for {n} nodes")));
        }
        let mut dist = vec![usize::MAX; n];
        let mut layers = vec![vec![i]];
        dist[i] = 0;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du == max_k {
                continue;
            }
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = du + 1;
                    if layers.len() <= du + 1 {
                        layers.push(Vec::new());
                    }
                    layers[du + 1].push(v);
                    queue.push_back(v);
                }
            }
        }
        layers.resize(max_k + 1, Vec::new());
        for l in &mut layers {
            l.sort_unstable();
        }
        Ok(layers)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut out = String::from("# node_id node_id\n");
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", self.node_ids[u], self.node_ids[v]);
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// `node_id,label` for labeled nodes with at least one edge; an edge list
    /// cannot name isolated nodes, so listing them would leave dangling ids.
    pub fn write_labels(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            if self.adjacency[i].is_empty() {
                continue;
            }
            if let Some(c) = l {
                let _ = writeln!(out, "{},{}", self.node_ids[i], self.class_names[*c]);
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// `node_id,f1,…,fF` with 17 significant digits; isolated nodes are skipped
    /// as in [`LabeledGraph::write_labels`].
    pub fn write_features(&self, path: &Path) -> Result<()> {
        let feats = self
            .features
            .as_ref()
            .ok_or_else(|| Error::Graph("graph has no features to export".into()))?;
        let mut out = String::new();
        for (i, x) in feats.iter().enumerate() {
            if self.adjacency[i].is_empty() {
                continue;
            }
            let _ = write!(out, "{}", self.node_ids[i]);
            for v in x.iter() {
                let _ = write!(out, ",{}", fmt_f64(*v));
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Nodes at shortest-path distance exactly `k` from `i`.
pub fn khop_neighbors(graph: &LabeledGraph, i: usize, k: usize) -> Result<Vec<usize>> {
    Ok(graph.khop_layers(i, k)?.swap_remove(k))
}
