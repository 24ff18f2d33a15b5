//! Undirected simple graphs and the network generators.
//!
//! Adjacency lists are kept sorted so that neighbor iteration is in
//! ascending id order (the dynamics consumes random numbers in that order)
//! and membership tests are a binary search. Typical degrees are small, so
//! insertion and removal are a short memmove.

mod generators;

use std::collections::{BTreeMap, VecDeque};

pub use generators::{
    generate_er, generate_lattice2d, generate_lfr, generate_powerlaw_config, generate_rrg,
    generate_sbm, GeneratorKind, GeneratorSpec, LfrParams, DEFAULT_RESTARTS,
};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge iterator, silently skipping self-loops and
    /// duplicates. Panics if an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Neighbors of `node` in ascending id order.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.node_count() as f64
        }
    }

    /// Inserts the undirected edge `a-b`. Returns `false` (and leaves the
    /// graph untouched) for self-loops and edges that already exist.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        let n = self.node_count();
        assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
        if a == b {
            return false;
        }
        match self.adjacency[a].binary_search(&b) {
            Ok(_) => false,
            Err(pos) => {
                self.adjacency[a].insert(pos, b);
                let pos_b = self.adjacency[b]
                    .binary_search(&a)
                    .expect_err("adjacency out of sync");
                self.adjacency[b].insert(pos_b, a);
                self.edge_count += 1;
                true
            }
        }
    }

    /// Removes the undirected edge `a-b`, returning whether it existed.
    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        match self.adjacency[a].binary_search(&b) {
            Ok(pos) => {
                self.adjacency[a].remove(pos);
                let pos_b = self.adjacency[b]
                    .binary_search(&a)
                    .expect("adjacency out of sync");
                self.adjacency[b].remove(pos_b);
                self.edge_count -= 1;
                true
            }
            Err(_) => false,
        }
    }

    /// Moves the `mover` end of edge `mover-dropped` onto `target`.
    ///
    /// Edge count and the mover's degree are unchanged. Panics if
    /// `mover-dropped` is not an edge, or if `target` is `mover` or already
    /// one of its neighbors.
    pub fn rewire_edge(&mut self, mover: usize, dropped: usize, target: usize) {
        assert!(
            target != mover && !self.has_edge(mover, target),
            "rewire target {target} must be a non-neighbor of {mover}"
        );
        assert!(
            self.remove_edge(mover, dropped),
            "rewire requires existing edge ({mover}, {dropped})"
        );
        self.add_edge(mover, target);
    }

    /// All edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, nbrs)| {
            let start = nbrs.partition_point(|&b| b <= a);
            nbrs[start..].iter().map(move |&b| (a, b))
        })
    }

    /// Histogram degree → number of nodes with that degree.
    pub fn degree_distribution(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for nbrs in &self.adjacency {
            *hist.entry(nbrs.len()).or_insert(0) += 1;
        }
        hist
    }

    /// Connected components, each sorted ascending, ordered by their
    /// smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut members = Vec::new();
            while let Some(v) = queue.pop_front() {
                members.push(v);
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Induced subgraph on the largest connected component, nodes relabeled
    /// `0..len` preserving their original order. Ties go to the component
    /// holding the smallest node id.
    pub fn largest_connected_component(&self) -> Graph {
        self.largest_component_with_map().0
    }

    /// Same as [`Graph::largest_connected_component`], also returning the
    /// original id of every new node.
    pub fn largest_component_with_map(&self) -> (Graph, Vec<usize>) {
        let components = self.connected_components();
        // max_by_key keeps the last maximum; iterate in reverse so the
        // component with the smallest first member wins ties.
        let Some(members) = components.into_iter().rev().max_by_key(|c| c.len()) else {
            return (Graph::empty(0), Vec::new());
        };
        (self.induced_subgraph(&members), members)
    }

    /// Subgraph induced by `nodes` (ascending, distinct), relabeled by
    /// position.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let adjacency = nodes
            .iter()
            .map(|&old| {
                self.adjacency[old]
                    .iter()
                    .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            adjacency,
            edge_count,
        }
    }

    /// Checks the simple-graph invariants: sorted, no self-loops, no
    /// duplicates, symmetric adjacency and exact edge bookkeeping.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.node_count();
        let mut half_edges = 0;
        for (a, nbrs) in self.adjacency.iter().enumerate() {
            half_edges += nbrs.len();
            if !nbrs.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("node {a}: adjacency unsorted or duplicated"));
            }
            for &b in nbrs {
                if b >= n {
                    return Err(format!("node {a}: neighbor {b} out of range"));
                }
                if b == a {
                    return Err(format!("node {a}: self-loop"));
                }
                if self.adjacency[b].binary_search(&a).is_err() {
                    return Err(format!("edge ({a}, {b}) not symmetric"));
                }
            }
        }
        if half_edges != 2 * self.edge_count {
            return Err(format!(
                "edge_count {} but adjacency holds {} half-edges",
                self.edge_count, half_edges
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_plus(n: usize) -> Graph {
        Graph::from_edges(n, [(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn add_rejects_loops_and_duplicates() {
        let mut g = Graph::empty(3);
        assert!(g.add_edge(0, 1));
        assert!(!g.add_edge(1, 0));
        assert!(!g.add_edge(2, 2));
        assert_eq!(g.edge_count(), 1);
        g.validate().unwrap();
    }

    #[test]
    fn rewire_triangle_onto_fourth_node() {
        let mut g = triangle_plus(4);
        g.rewire_edge(0, 1, 3);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 2), (0, 3), (1, 2)]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 1);
        assert_eq!(g.degree(3), 1);
        g.validate().unwrap();
    }

    #[test]
    #[should_panic(expected = "existing edge")]
    fn rewire_missing_edge_panics() {
        let mut g = Graph::from_edges(4, [(0, 1)]);
        g.rewire_edge(0, 2, 3);
    }

    #[test]
    #[should_panic(expected = "non-neighbor")]
    fn rewire_onto_neighbor_panics() {
        let mut g = triangle_plus(4);
        g.rewire_edge(0, 1, 2);
    }

    #[test]
    fn degree_distribution_of_empty_graph() {
        let g = Graph::empty(5);
        assert_eq!(g.degree_distribution(), BTreeMap::from([(0, 5)]));
    }

    #[test]
    fn lcc_of_two_triangles_and_isolate() {
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let (lcc, map) = g.largest_component_with_map();
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(lcc.node_count(), 3);
        assert_eq!(lcc.edge_count(), 3);
    }

    #[test]
    fn lcc_relabels_in_order() {
        let g = Graph::from_edges(6, [(0, 5), (2, 5), (3, 4)]);
        let (lcc, map) = g.largest_component_with_map();
        assert_eq!(map, vec![0, 2, 5]);
        assert_eq!(lcc.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.largest_connected_component(), g);
    }

    #[test]
    fn lcc_of_empty_graph() {
        assert_eq!(
            Graph::empty(0).largest_connected_component().node_count(),
            0
        );
    }
}
