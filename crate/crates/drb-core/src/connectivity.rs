//! Device connectivity graphs: edge lists, shortest paths, and greedy edge
//! coloring for the L2 CNOT layers of the G4-style gate sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected connectivity graph over `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connectivity {
    n: usize,
    /// Undirected edges stored with the smaller endpoint first, sorted.
    edges: Vec<(usize, usize)>,
}

impl Connectivity {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid("self-loop edge"));
            }
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a},{b}) out of range for n={n}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Connectivity { n, edges: norm })
    }

    /// Complete graph.
    pub fn all_to_all(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Connectivity { n, edges }
    }

    /// Open chain 0–1–…–(n−1).
    pub fn linear(n: usize) -> Self {
        let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Connectivity { n, edges }
    }

    /// Closed ring.
    pub fn ring(n: usize) -> Self {
        let mut edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if n > 2 {
            edges.push((0, n - 1));
        }
        edges.sort_unstable();
        Connectivity { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).is_ok()
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// BFS shortest path between two qubits (inclusive of endpoints).
    pub fn shortest_path(&self, from: usize, to: usize) -> Result<Vec<usize>> {
        if from >= self.n || to >= self.n {
            return Err(Error::invalid("path endpoint out of range"));
        }
        if from == to {
            return Ok(vec![from]);
        }
        let mut prev = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::from([from]);
        prev[from] = from;
        while let Some(q) = queue.pop_front() {
            for nb in self.neighbors(q) {
                if prev[nb] == usize::MAX {
                    prev[nb] = q;
                    if nb == to {
                        let mut path = vec![to];
                        let mut cur = to;
                        while cur != from {
                            cur = prev[cur];
                            path.push(cur);
                        }
                        path.reverse();
                        return Ok(path);
                    }
                    queue.push_back(nb);
                }
            }
        }
        Err(Error::Compilation(format!(
            "qubits {from} and {to} are disconnected"
        )))
    }

    /// Greedy proper edge coloring with a fixed edge order. Returns one edge
    /// list per color; every edge appears in exactly one color class and the
    /// edges within a class are vertex-disjoint.
    pub fn edge_coloring(&self) -> Vec<Vec<(usize, usize)>> {
        let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut class_used: Vec<u64> = Vec::new();
        for &(a, b) in &self.edges {
            let bits = (1u64 << a) | (1u64 << b);
            match class_used.iter().position(|&used| used & bits == 0) {
                Some(i) => {
                    classes[i].push((a, b));
                    class_used[i] |= bits;
                }
                None => {
                    classes.push(vec![(a, b)]);
                    class_used.push(bits);
                }
            }
        }
        classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders() {
        let c = Connectivity::all_to_all(4);
        assert_eq!(c.edges().len(), 6);
        let l = Connectivity::linear(4);
        assert_eq!(l.edges(), &[(0, 1), (1, 2), (2, 3)]);
        let r = Connectivity::ring(4);
        assert_eq!(r.edges().len(), 4);
        assert!(r.has_edge(3, 0));
        assert!(Connectivity::new(2, [(0, 0)]).is_err());
        assert!(Connectivity::new(2, [(0, 5)]).is_err());
    }

    #[test]
    fn shortest_paths() {
        let l = Connectivity::linear(5);
        assert_eq!(l.shortest_path(0, 3).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(l.shortest_path(2, 2).unwrap(), vec![2]);
        let disconnected = Connectivity::new(4, [(0, 1)]).unwrap();
        assert!(disconnected.shortest_path(0, 3).is_err());
    }

    #[test]
    fn coloring_is_proper_and_complete() {
        for conn in [
            Connectivity::ring(6),
            Connectivity::linear(7),
            Connectivity::all_to_all(5),
        ] {
            let classes = conn.edge_coloring();
            let mut total = 0;
            for class in &classes {
                let mut used = 0u64;
                for &(a, b) in class {
                    assert_eq!(used & ((1 << a) | (1 << b)), 0, "overlap in class");
                    used |= (1 << a) | (1 << b);
                    total += 1;
                }
            }
            assert_eq!(total, conn.edges().len());
        }
        // Even ring is 2-regular: greedy uses at most 3 colors.
        assert!(Connectivity::ring(6).edge_coloring().len() <= 3);
    }
}
