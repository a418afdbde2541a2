//! Finite undirected graphs, the d-dimensional torus and metric helpers.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Vertex identifier, dense in `0..n`.
pub type Vertex = usize;

/// How a graph was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// `Z_L^d` with nearest-neighbour edges.
    Torus { side: usize, dim: usize },
    General,
}

/// Immutable simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<Vertex>>,
    kind: GraphKind,
}

impl Graph {
    /// The torus `Λ(L, d)` with `L^d` vertices.
    ///
    /// Vertex ids are the little-endian mixed-radix encoding of the
    /// coordinates: coordinate 0 varies fastest.
    pub fn torus(side: usize, dim: usize) -> Result<Self> {
        if side < 3 {
            return Err(Error::invalid(format!("torus side must be >= 3, got {side}")));
        }
        if dim < 1 {
            return Err(Error::invalid("torus dimension must be >= 1"));
        }
        let n = side
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::invalid("torus too large"))?;
        let mut adjacency = Vec::with_capacity(n);
        let mut stride = 1;
        let strides: Vec<usize> = (0..dim)
            .map(|_| {
                let s = stride;
                stride *= side;
                s
            })
            .collect();
        for v in 0..n {
            let mut nbrs = Vec::with_capacity(2 * dim);
            for &s in &strides {
                let coord = (v / s) % side;
                let up = if coord + 1 == side { v + s - side * s } else { v + s };
                let down = if coord == 0 { v + (side - 1) * s } else { v - s };
                nbrs.push(up);
                nbrs.push(down);
            }
            nbrs.sort_unstable();
            adjacency.push(nbrs);
        }
        let g = Graph {
            adjacency,
            kind: GraphKind::Torus { side, dim },
        };
        debug_assert!(g.is_symmetric());
        Ok(g)
    }

    /// The cycle `C_n`, i.e. `Λ(n, 1)`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::torus(n, 1)
    }

    /// Star with `leaves` leaves; the center is vertex 0.
    pub fn star(leaves: usize) -> Result<Self> {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Self::from_edges(leaves + 1, &edges)
    }

    /// Builds a general graph. Self-loops, duplicate edges and out-of-range
    /// endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Graph {
            adjacency,
            kind: GraphKind::General,
        })
    }

    /// Reads whitespace-separated `u v` pairs (0-indexed). Lines starting
    /// with `#` are skipped. The vertex count is one more than the largest id.
    pub fn from_edge_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_edge_list(&text)
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut ids = Vec::new();
        for tok in text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
        {
            let id: Vertex = tok
                .parse()
                .map_err(|_| Error::invalid(format!("bad vertex id {tok:?} in edge list")))?;
            ids.push(id);
        }
        if ids.len() % 2 != 0 {
            return Err(Error::invalid("edge list has an odd number of vertex ids"));
        }
        let n = ids.iter().max().map_or(0, |m| m + 1);
        let edges: Vec<_> = ids.chunks(2).map(|c| (c[0], c[1])).collect();
        Self::from_edges(n, &edges)
    }

    /// Parses a CLI graph spec: `torus:L=4,d=3`, `cycle:n=6`, `star:k=3`
    /// or `edges:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("graph spec {spec:?} has no ':'")))?;
        let param = |name: &str| -> Result<usize> {
            rest.split(',')
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| k.trim() == name)
                .ok_or_else(|| Error::invalid(format!("graph spec {spec:?} is missing {name}")))?
                .1
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("graph spec {spec:?}: bad value for {name}")))
        };
        match head.trim() {
            "torus" => Self::torus(param("L")?, param("d")?),
            "cycle" => Self::cycle(param("n")?),
            "star" => Self::star(param("k")?),
            "edges" => Self::from_edge_file(rest),
            other => Err(Error::invalid(format!("unknown graph kind {other:?}"))),
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn is_symmetric(&self) -> bool {
        self.adjacency
            .iter()
            .enumerate()
            .all(|(u, nbrs)| nbrs.iter().all(|&v| v != u && self.has_edge(v, u)))
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::invalid(format!("vertex {v} out of range for n={}", self.n())))
        }
    }

    /// Torus coordinates of `v`, coordinate 0 first.
    pub fn coordinates(&self, v: Vertex) -> Option<Vec<usize>> {
        match self.kind {
            GraphKind::Torus { side, dim } => {
                let mut rest = v;
                Some(
                    (0..dim)
                        .map(|_| {
                            let c = rest % side;
                            rest /= side;
                            c
                        })
                        .collect(),
                )
            }
            GraphKind::General => None,
        }
    }

    /// Inverse of [`Graph::coordinates`].
    pub fn vertex_at(&self, coords: &[usize]) -> Option<Vertex> {
        match self.kind {
            GraphKind::Torus { side, dim } if coords.len() == dim => {
                Some(coords.iter().rev().fold(0, |acc, &c| acc * side + c % side))
            }
            _ => None,
        }
    }

    /// Shortest-path distance, `None` if `v` is unreachable from `u`.
    pub fn distance(&self, u: Vertex, v: Vertex) -> Result<Option<usize>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.distance_unchecked(u, v))
    }

    /// Distance without bounds checks. On a torus this is the closed-form
    /// sum of cyclic coordinate differences.
    pub(crate) fn distance_unchecked(&self, u: Vertex, v: Vertex) -> Option<usize> {
        match self.kind {
            GraphKind::Torus { side, dim } => {
                let (mut a, mut b, mut total) = (u, v, 0);
                for _ in 0..dim {
                    let diff = (a % side).abs_diff(b % side);
                    total += diff.min(side - diff);
                    a /= side;
                    b /= side;
                }
                Some(total)
            }
            GraphKind::General => self.bfs_distance(u, v),
        }
    }

    /// Breadth-first distance, valid for every graph kind.
    pub fn bfs_distance(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.bfs_from(u)[v]
    }

    /// Distances from `source` to every vertex.
    pub fn bfs_from(&self, source: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(w) = queue.pop_front() {
            let d = dist[w].unwrap() + 1;
            for &x in self.neighbors(w) {
                if dist[x].is_none() {
                    dist[x] = Some(d);
                    queue.push_back(x);
                }
            }
        }
        dist
    }

    /// All vertices within distance `radius` of `v`, sorted.
    pub fn ball(&self, v: Vertex, radius: usize) -> Result<Vec<Vertex>> {
        self.check_vertex(v)?;
        let dist = self.bfs_from(v);
        Ok((0..self.n())
            .filter(|&w| dist[w].is_some_and(|d| d <= radius))
            .collect())
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency.first()?.len();
        self.adjacency.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn is_triangle_free(&self) -> bool {
        self.edges().into_iter().all(|(u, v)| {
            // sorted-list intersection
            let (a, b) = (self.neighbors(u), self.neighbors(v));
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => return false,
                }
            }
            true
        })
    }

    /// `(common degree if regular, triangle free)`.
    pub fn check_regular_triangle_free(&self) -> (Option<usize>, bool) {
        (self.regular_degree(), self.is_triangle_free())
    }

    pub fn diameter(&self) -> Option<usize> {
        (0..self.n())
            .map(|v| {
                self.bfs_from(v)
                    .into_iter()
                    .try_fold(0, |m, d| d.map(|d| m.max(d)))
            })
            .try_fold(0, |m, d| d.map(|d| m.max(d)))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GraphKind::Torus { side, dim } => write!(f, "torus:L={side},d={dim}"),
            GraphKind::General => write!(f, "general:n={},m={}", self.n(), self.edge_count()),
        }
    }
}
