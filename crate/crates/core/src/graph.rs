use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Simple undirected graph on nodes `0..n`.
///
/// Stored as sorted neighbor lists, so the matrix is symmetric with a zero
/// diagonal by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Adjacency {
    neighbors: Vec<Vec<usize>>,
    edges: usize,
}

impl Adjacency {
    /// Empty graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Self {
            neighbors: vec![Vec::new(); n],
            edges: 0,
        }
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Self {
            neighbors,
            edges: n * n.saturating_sub(1) / 2,
        }
    }

    /// Builds a graph from unordered pairs. Self-loops, out-of-range nodes and
    /// repeated pairs are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            if !g.add_edge(u, v) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(g)
    }

    /// Builds a graph from a dense 0/1 matrix, checking symmetry and the diagonal.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut g = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 if i == j => {
                        return Err(Error::InvalidGraph(format!("nonzero diagonal at {i}")))
                    }
                    1 => {
                        if rows[j][i] != 1 {
                            return Err(Error::InvalidGraph(format!(
                                "asymmetric entry ({i}, {j})"
                            )));
                        }
                        if i < j {
                            g.add_edge(i, j);
                        }
                    }
                    other => {
                        return Err(Error::InvalidGraph(format!(
                            "entry ({i}, {j}) = {other} is not binary"
                        )))
                    }
                }
            }
        }
        Ok(g)
    }

    /// Complement graph (no self-loops).
    pub fn complement(&self) -> Self {
        let n = self.node_count();
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if !self.has_edge(i, j) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Number of unordered node pairs, `n choose 2`.
    pub fn pair_count(&self) -> usize {
        let n = self.node_count();
        n * n.saturating_sub(1) / 2
    }

    /// Edge density `|E| / (n choose 2)`; zero for graphs with fewer than two nodes.
    pub fn density(&self) -> f64 {
        match self.pair_count() {
            0 => 0.0,
            pairs => self.edges as f64 / pairs as f64,
        }
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Matrix entry `A_ij` as 0 or 1.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        self.has_edge(i, j) as u8
    }

    /// Inserts `{i, j}`; returns false if it was already present.
    ///
    /// # Panics
    /// On a self-loop or an out-of-range node.
    pub fn add_edge(&mut self, i: usize, j: usize) -> bool {
        assert!(i != j, "self-loop at node {i}");
        match self.neighbors[i].binary_search(&j) {
            Ok(_) => false,
            Err(pos) => {
                self.neighbors[i].insert(pos, j);
                let pos = self.neighbors[j].binary_search(&i).unwrap_err();
                self.neighbors[j].insert(pos, i);
                self.edges += 1;
                true
            }
        }
    }

    /// Removes `{i, j}`; returns false if it was absent.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        match self.neighbors[i].binary_search(&j) {
            Err(_) => false,
            Ok(pos) => {
                self.neighbors[i].remove(pos);
                let pos = self.neighbors[j].binary_search(&i).unwrap();
                self.neighbors[j].remove(pos);
                self.edges -= 1;
                true
            }
        }
    }

    /// Toggles `{i, j}` and returns whether the edge is present afterwards.
    pub fn toggle(&mut self, i: usize, j: usize) -> bool {
        if self.remove_edge(i, j) {
            false
        } else {
            self.add_edge(i, j)
        }
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(u, nbrs)| {
            let start = nbrs.partition_point(|&v| v <= u);
            nbrs[start..].iter().map(move |&v| (u, v))
        })
    }

    /// Dense row-major 0/1 matrix.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.node_count();
        let mut rows = vec![vec![0u8; n]; n];
        for (u, v) in self.edges() {
            rows[u][v] = 1;
            rows[v][u] = 1;
        }
        rows
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut g = Self::empty(self.node_count());
        for (u, v) in self.edges() {
            g.add_edge(perm[u], perm[v]);
        }
        g
    }

    /// Whether every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }
}

/// Index of the unordered pair `{i, j}` (i < j) in row-major upper-triangle order.
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toggle_and_counts() {
        let mut g = Adjacency::empty(4);
        assert!(g.toggle(0, 2));
        assert!(g.toggle(3, 1));
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(2, 0));
        assert!(!g.toggle(0, 2));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 3)]);
        assert_eq!(g.entry(3, 1), 1);
        assert_eq!(g.entry(1, 1), 0);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Adjacency::from_edges(3, [(0, 0)]).is_err());
        assert!(Adjacency::from_edges(3, [(0, 3)]).is_err());
        assert!(Adjacency::from_edges(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn dense_roundtrip_and_validation() {
        let g = Adjacency::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(Adjacency::from_dense(&g.to_dense()).unwrap(), g);
        let asym = vec![vec![0, 1], vec![0, 0]];
        assert!(Adjacency::from_dense(&asym).is_err());
        let diag = vec![vec![1, 0], vec![0, 0]];
        assert!(Adjacency::from_dense(&diag).is_err());
    }

    #[test]
    fn pair_indexing_is_dense() {
        let n = 7;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(pair_index(n, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn complement_of_complete_is_empty() {
        let k5 = Adjacency::complete(5);
        assert_eq!(k5.edge_count(), 10);
        assert_eq!(k5.complement().edge_count(), 0);
        assert_eq!(k5.density(), 1.0);
    }
}
