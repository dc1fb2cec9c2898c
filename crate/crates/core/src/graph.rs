//! Undirected, unweighted communication graphs.
//!
//! A [`Graph`] stores one sorted, duplicate-free neighbor list per vertex.
//! Construction canonicalizes edge input, so the same edge set always yields
//! the same value regardless of order or repetition. Connectivity is not
//! enforced here; simulations check it when they are configured.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph on `n` vertices from an edge list. Repeated edges (in
    /// either orientation) collapse to one.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) has an endpoint outside [0, {n})")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { neighbors })
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("a cycle needs n >= 3, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    /// The Petersen graph: outer 5-cycle, inner pentagram, and five spokes.
    pub fn petersen() -> Self {
        let mut edges = Vec::with_capacity(15);
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, i + 5));
        }
        Self::from_edges(10, &edges).expect("petersen edges are valid")
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Parses the edge-list text format: the first non-comment line holds the
    /// vertex count, each following line one whitespace-separated pair `i j`.
    /// `#` starts a comment anywhere on a line.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::invalid(format!("edge list line {}: {what}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if fields.len() != 1 {
                        return Err(bad("expected the vertex count"));
                    }
                    n = Some(fields[0].parse::<usize>().map_err(|_| bad("bad vertex count"))?);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(bad("expected two vertex indices"));
                    }
                    let a = fields[0].parse::<usize>().map_err(|_| bad("bad vertex index"))?;
                    let b = fields[1].parse::<usize>().map_err(|_| bad("bad vertex index"))?;
                    edges.push((a, b));
                }
            }
        }
        let n = n.ok_or_else(|| Error::invalid("edge list is empty"))?;
        Self::from_edges(n, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    /// Breadth-first traversal from vertex 0.
    pub fn is_connected(&self) -> bool {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == n
    }

    /// Integer Laplacian `D - A`, row-major.
    pub fn laplacian_entries(&self) -> Vec<i64> {
        let n = self.n_vertices();
        let mut l = vec![0i64; n * n];
        for (v, list) in self.neighbors.iter().enumerate() {
            l[v * n + v] = list.len() as i64;
            for &u in list {
                l[v * n + u] = -1;
            }
        }
        l
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n_vertices();
        DMatrix::from_row_iterator(n, n, self.laplacian_entries().into_iter().map(|v| v as f64))
    }

    /// Laplacian spectrum in ascending order.
    pub fn laplacian_spectrum(&self) -> Vec<f64> {
        let mut eig = SymmetricEigen::new(self.laplacian()).eigenvalues.as_slice().to_vec();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Second-smallest Laplacian eigenvalue; zero for a single vertex.
    pub fn algebraic_connectivity(&self) -> f64 {
        self.laplacian_spectrum().get(1).copied().unwrap_or(0.0)
    }

    /// Writes the consensus sum `Σ_{ℓ∈Ω_n} (x_ℓ − x_n)` for every agent into
    /// `out`. `states` and `out` hold `n_vertices` blocks of `dim` values.
    pub fn consensus_sum(&self, states: &[f64], dim: usize, out: &mut [f64]) {
        debug_assert_eq!(states.len(), self.n_vertices() * dim);
        debug_assert_eq!(out.len(), states.len());
        for (v, list) in self.neighbors.iter().enumerate() {
            let own = &states[v * dim..(v + 1) * dim];
            let acc = &mut out[v * dim..(v + 1) * dim];
            acc.fill(0.0);
            for &u in list {
                let other = &states[u * dim..(u + 1) * dim];
                for j in 0..dim {
                    acc[j] += other[j] - own[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_four() {
        let g = Graph::cycle(4).unwrap();
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.edge_count(), 4);
        assert!((0..4).all(|v| g.degree(v) == 2));
        assert!(g.is_connected());
    }

    #[test]
    fn triangle_is_smallest_cycle() {
        let g = Graph::cycle(3).unwrap();
        assert!(g.is_connected());
        assert!((0..3).all(|v| g.degree(v) == 2));
        assert!(Graph::cycle(2).is_err());
        assert!(Graph::cycle(0).is_err());
    }

    #[test]
    fn cycle_spectrum_matches_closed_form() {
        // Circulant eigenvalues 2 - 2cos(2πj/n).
        for n in 3..9 {
            let g = Graph::cycle(n).unwrap();
            let mut expected: Vec<f64> =
                (0..n).map(|j| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
            expected.sort_by(f64::total_cmp);
            for (a, b) in g.laplacian_spectrum().iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
        let spec = Graph::cycle(4).unwrap().laplacian_spectrum();
        for (a, b) in spec.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn petersen_structure() {
        let g = Graph::petersen();
        assert_eq!(g.n_vertices(), 10);
        assert_eq!(g.edge_count(), 15);
        assert!((0..10).all(|v| g.degree(v) == 3));
        assert!(g.is_connected());
        // Known spectrum {0, 2^5, 5^4}.
        let spec = g.laplacian_spectrum();
        assert!(spec[0].abs() < 1e-9);
        assert!(spec[1..6].iter().all(|&l| (l - 2.0).abs() < 1e-9));
        assert!(spec[6..].iter().all(|&l| (l - 5.0).abs() < 1e-9));
        assert!((g.algebraic_connectivity() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn from_edges_cases() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.laplacian_entries(), vec![1, -1, -1, 1]);

        assert!(!Graph::from_edges(3, &[(0, 1)]).unwrap().is_connected());

        let dup = Graph::from_edges(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(dup, Graph::cycle(4).unwrap());

        assert!(matches!(Graph::from_edges(3, &[(0, 3)]), Err(Error::InvalidArgument(_))));
        assert!(matches!(Graph::from_edges(3, &[(1, 1)]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let g = Graph::petersen();
        let l = g.laplacian_entries();
        for row in l.chunks(10) {
            assert_eq!(row.iter().sum::<i64>(), 0);
        }
        let spec = Graph::cycle(4).unwrap().laplacian_spectrum();
        assert!(spec[0].abs() < 1e-12);
    }

    #[test]
    fn edge_list_text() {
        let text = "# four-cycle\n4\n0 1\n1 2 # inline\n\n2 3\n3 0\n";
        assert_eq!(Graph::parse_edge_list(text).unwrap(), Graph::cycle(4).unwrap());
        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("3\n0 1 2\n").is_err());
        assert!(Graph::parse_edge_list("3\n0 5\n").is_err());
    }

    #[test]
    fn consensus_sum_is_negative_laplacian_product() {
        let g = Graph::petersen();
        let x: Vec<f64> = (0..10).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut out = vec![0.0; 10];
        g.consensus_sum(&x, 1, &mut out);
        let lx = g.laplacian() * nalgebra::DVector::from_vec(x);
        for (a, b) in out.iter().zip(lx.iter()) {
            assert!((a + b).abs() < 1e-14);
        }
    }
}
