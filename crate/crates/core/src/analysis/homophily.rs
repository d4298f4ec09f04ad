//! Node-level homophily `κ_i` and its per-degree averages `p_h(d)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::synthgraph::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeRow {
    pub degree: usize,
    pub count: usize,
    pub mean_kappa: f64,
    /// Population standard deviation over the nodes of this degree.
    pub std_kappa: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomophilyReport {
    /// `κ_i`; `None` for nodes without a label or without labeled neighbors.
    pub per_node: Vec<Option<f64>>,
    pub per_degree: Vec<DegreeRow>,
    /// Mean of `κ_i` over all nodes that have one.
    pub global: f64,
    pub nodes_used: usize,
}

/// `κ_i` is the share of a node's labeled neighbors carrying its label; the
/// node is binned by its full degree. Unlabeled nodes are skipped.
pub fn homophily_stats(graph: &LabeledGraph) -> Result<HomophilyReport> {
    if graph.num_edges() == 0 {
        return Err(Error::Graph("homophily is undefined on a graph without edges".into()));
    }
    let per_node: Vec<Option<f64>> = (0..graph.num_nodes())
        .map(|i| {
            let y = graph.label(i)?;
            let (same, labeled) = graph
                .neighbors(i)
                .iter()
                .filter_map(|&j| graph.label(j))
                .fold((0usize, 0usize), |(s, n), yj| (s + usize::from(yj == y), n + 1));
            (labeled > 0).then(|| same as f64 / labeled as f64)
        })
        .collect();

    let mut bins: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (i, k) in per_node.iter().enumerate() {
        if let Some(k) = k {
            bins.entry(graph.degree(i)).or_default().push(*k);
        }
    }
    let per_degree: Vec<DegreeRow> = bins
        .into_iter()
        .map(|(degree, ks)| {
            let n = ks.len() as f64;
            let mean = ks.iter().sum::<f64>() / n;
            let var = ks.iter().map(|k| (k - mean) * (k - mean)).sum::<f64>() / n;
            DegreeRow {
                degree,
                count: ks.len(),
                mean_kappa: mean,
                std_kappa: var.sqrt(),
            }
        })
        .collect();
    let nodes_used: usize = per_degree.iter().map(|r| r.count).sum();
    if nodes_used == 0 {
        return Err(Error::Graph("no labeled node has a labeled neighbor".into()));
    }
    let global = per_degree.iter().map(|r| r.mean_kappa * r.count as f64).sum::<f64>() / nodes_used as f64;
    Ok(HomophilyReport {
        per_node,
        per_degree,
        global,
        nodes_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_with_mixed_leaves() {
        // Center 0 (class 1) with leaves of classes 1, 1, 2.
        let g = LabeledGraph::from_edges(4, vec![(0, 1), (0, 2), (0, 3)], vec![Some(0), Some(0), Some(0), Some(1)], 2)
            .unwrap();
        let r = homophily_stats(&g).unwrap();
        assert!((r.per_node[0].unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.per_node[3], Some(0.0));
        assert_eq!(r.per_degree[0].degree, 1);
        assert_eq!(r.per_degree[0].count, 3);
        assert!((r.per_degree[0].mean_kappa - 2.0 / 3.0).abs() < 1e-15);
        let want_global = (2.0 / 3.0 + 2.0) / 4.0;
        assert!((r.global - want_global).abs() < 1e-15);
    }

    #[test]
    fn bipartite_graph_is_fully_heterophilic() {
        let g = LabeledGraph::from_edges(4, vec![(0, 2), (0, 3), (1, 2), (1, 3)], vec![Some(0), Some(0), Some(1), Some(1)], 2)
            .unwrap();
        let r = homophily_stats(&g).unwrap();
        assert!(r.per_node.iter().all(|k| *k == Some(0.0)));
        assert_eq!(r.global, 0.0);
    }

    #[test]
    fn isolated_and_unlabeled_nodes_are_skipped() {
        let g = LabeledGraph::from_edges(4, vec![(0, 1), (1, 2)], vec![Some(0), Some(0), None, Some(1)], 2).unwrap();
        let r = homophily_stats(&g).unwrap();
        assert_eq!(r.per_node[2], None);
        assert_eq!(r.per_node[3], None);
        assert_eq!(r.per_node[1], Some(1.0));
        assert_eq!(r.nodes_used, 2);
        let empty = LabeledGraph::from_edges(3, vec![], vec![Some(0); 3], 1).unwrap();
        assert!(homophily_stats(&empty).is_err());
    }
}
