use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// An undirected edge stored with its smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(usize, usize);

impl Edge {
    /// Normalizes the endpoint order. Self-loops are rejected by [`Graph::new`].
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn i(&self) -> usize {
        self.0
    }

    pub fn j(&self) -> usize {
        self.1
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.0 == vertex || self.1 == vertex
    }

    /// Relabels both endpoints through `map`.
    pub fn map(&self, map: impl Fn(usize) -> usize) -> Edge {
        Edge::new(map(self.0), map(self.1))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

impl From<(usize, usize)> for Edge {
    fn from((a, b): (usize, usize)) -> Self {
        Edge::new(a, b)
    }
}

/// A simple undirected graph on vertices `0..vertex_count`.
///
/// Edges are kept sorted lexicographically; that order is the row order of the
/// rigidity matrix and the component order of stress vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new<E: Into<Edge>>(
        vertex_count: usize,
        edges: impl IntoIterator<Item = E>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in edges {
            let e = e.into();
            if e.i() == e.j() {
                return Err(Error::SelfLoop(e.i()));
            }
            if e.j() >= vertex_count {
                return Err(Error::EdgeOutOfRange {
                    edge: e,
                    vertex_count,
                });
            }
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e));
            }
        }
        Ok(Self {
            vertex_count,
            edges: set.into_iter().collect(),
        })
    }

    pub fn complete(vertex_count: usize) -> Self {
        let edges = (0..vertex_count)
            .tuple_combinations()
            .map(|(a, b)| Edge(a, b))
            .collect();
        Self {
            vertex_count,
            edges,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&Edge::new(a, b)).ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edge_index(a, b).is_some()
    }

    pub fn is_complete(&self) -> bool {
        let v = self.vertex_count;
        self.edges.len() == v * v.saturating_sub(1) / 2
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.edges.iter().filter(|e| e.contains(vertex)).count()
    }

    /// Same vertex set, union of edges.
    pub fn union(&self, other: &Graph) -> Result<Graph> {
        if self.vertex_count != other.vertex_count {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count,
                found: other.vertex_count,
            });
        }
        let edges: BTreeSet<Edge> = self.edges.iter().chain(&other.edges).copied().collect();
        Ok(Graph {
            vertex_count: self.vertex_count,
            edges: edges.into_iter().collect(),
        })
    }

    pub fn with_edges_added(&self, extra: &[Edge]) -> Result<Graph> {
        Graph::new(self.vertex_count, self.edges.iter().chain(extra).copied())
    }

    /// Drops the listed edges; edges not present are ignored.
    pub fn without_edges(&self, removed: &[Edge]) -> Graph {
        Graph {
            vertex_count: self.vertex_count,
            edges: self
                .edges
                .iter()
                .filter(|e| !removed.contains(e))
                .copied()
                .collect(),
        }
    }
}
