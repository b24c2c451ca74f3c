use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

/// Directed graph over parameter and objective names.
///
/// Edges run from an input to the objective of the function consuming it.
/// Neighbour iteration is always in sorted order so that every query is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DependencyGraph {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
    #[serde(skip)]
    successors: BTreeMap<String, BTreeSet<String>>,
}

impl DependencyGraph {
    pub fn new<N, E>(nodes: N, edges: E) -> Self
    where
        N: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let mut graph = Self {
            nodes: nodes.into_iter().collect(),
            ..Self::default()
        };
        for (from, to) in edges {
            graph.nodes.insert(from.clone());
            graph.nodes.insert(to.clone());
            graph
                .successors
                .entry(from.clone())
                .or_default()
                .insert(to.clone());
            graph.edges.insert((from, to));
        }
        graph
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.successors
            .get(from)
            .is_some_and(|s| s.contains(to))
    }

    pub fn successors<'a>(&'a self, node: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.successors
            .get(node)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    /// True when every consecutive pair in `path` is an edge.
    pub fn is_path(&self, path: &[String]) -> bool {
        path.iter().all(|n| self.contains(n))
            && path.windows(2).all(|w| self.has_edge(&w[0], &w[1]))
    }

    /// Shortest path by BFS; among equally short paths the lexicographically
    /// smallest one (by node names) is returned.
    pub fn shortest_path(&self, from: &str, to: &str) -> Option<Vec<String>> {
        if !self.contains(from) || !self.contains(to) {
            return None;
        }
        let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
        let mut seen: BTreeSet<&str> = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            if node == to {
                let mut path = vec![to.to_string()];
                let mut cur = to;
                while let Some(&p) = parent.get(cur) {
                    path.push(p.to_string());
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for next in self.successors(node) {
                if seen.insert(next) {
                    parent.insert(next, node);
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// All nodes reachable from `from` (excluding `from` itself unless it lies
    /// on a cycle).
    pub fn reachable(&self, from: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&str> = self.successors(from).collect();
        while let Some(node) = stack.pop() {
            if out.insert(node.to_string()) {
                stack.extend(self.successors(node));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(edges: &[(&str, &str)]) -> DependencyGraph {
        DependencyGraph::new(
            std::iter::empty(),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())),
        )
    }

    #[test]
    fn shortest_path_prefers_fewest_hops() {
        let graph = g(&[("p1", "o1"), ("p1", "o2"), ("o1", "o2"), ("p2", "o1")]);
        assert_eq!(graph.shortest_path("p1", "o2").unwrap(), ["p1", "o2"]);
        assert_eq!(graph.shortest_path("p2", "o2").unwrap(), ["p2", "o1", "o2"]);
        assert!(graph.shortest_path("o2", "p1").is_none());
    }

    #[test]
    fn path_check_rejects_missing_edges() {
        let graph = g(&[("a", "b"), ("b", "c")]);
        let ok: Vec<String> = ["a", "b", "c"].map(String::from).into();
        let bad: Vec<String> = ["a", "c"].map(String::from).into();
        assert!(graph.is_path(&ok));
        assert!(!graph.is_path(&bad));
    }

    #[test]
    fn reachable_follows_chains() {
        let graph = g(&[("a", "b"), ("b", "c"), ("d", "c")]);
        let r: Vec<_> = graph.reachable("a").into_iter().collect();
        assert_eq!(r, ["b", "c"]);
    }
}
