//! Finite, simple, connected, undirected graphs.
//!
//! Vertices are 0-based indices `0..n` inside the library. Text formats and
//! the command line use 1-based labels, so library vertex `k` is label `k + 1`.
//! Every generator documents its labeling so that formulas referring to
//! "vertex 1" or "vertex ld+2" map onto fixed indices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// A finite, undirected, unweighted, connected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Edges as `(i, j)` with `i < j`, sorted lexicographically.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph on `n` vertices from 0-based edges.
    ///
    /// Rejects self-loops, duplicate edges (in either orientation) and
    /// disconnected input. A single vertex with no edges is accepted.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        let g = Graph { n, edges, adjacency };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from 1-based labelled pairs.
    ///
    /// Labels need not be contiguous: the distinct labels are sorted and
    /// renumbered to `0..n`, so an input already using `1..n` keeps its order.
    /// Self-loop and duplicate-edge errors carry the input labels.
    pub fn from_edge_list(pairs: &[(i64, i64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut labels = BTreeSet::new();
        for &(a, b) in pairs {
            for v in [a, b] {
                if v < 1 {
                    return Err(Error::InvalidLabel(v));
                }
                labels.insert(v);
            }
        }
        let index: BTreeMap<i64, usize> = labels.iter().enumerate().map(|(k, &l)| (l, k)).collect();
        let label: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
        // report offending edges by their input labels
        Graph::new(labels.len(), pairs.iter().map(|(a, b)| (index[a], index[b]))).map_err(|e| match e {
            Error::SelfLoop(v) => Error::SelfLoop(label[v]),
            Error::DuplicateEdge(a, b) => Error::DuplicateEdge(label[a], label[b]),
            other => other,
        })
    }

    /// Builds one of the named graph families.
    pub fn generate(family: GraphFamily) -> Result<Self> {
        family.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(Option::is_some)
    }

    /// Breadth-first graph distances from `source`.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// `(Lf)(s) = Σ_{l ~ s} (f(s) - f(l))`.
    pub fn laplacian_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: f.len() });
        }
        Ok((0..self.n).map(|s| self.adjacency[s].iter().map(|&l| f[s] - f[l]).sum()).collect())
    }

    /// Dense Laplacian `diag(d) - A`.
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let mut lap = DMatrix::zeros(self.n, self.n);
        for &(a, b) in &self.edges {
            lap[(a, a)] += 1.0;
            lap[(b, b)] += 1.0;
            lap[(a, b)] -= 1.0;
            lap[(b, a)] -= 1.0;
        }
        lap
    }

    /// Serializes to the edge-list text format (1-based labels).
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={} m={}\n", self.n, self.m());
        for &(a, b) in &self.edges {
            out.push_str(&format!("{} {}\n", a + 1, b + 1));
        }
        out
    }

    /// Parses the edge-list text format: one `i j` pair per line, 1-based,
    /// `#` starts a comment, blank lines are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two vertex labels, got {:?}", lineno + 1, line)));
            }
            let parse =
                |s: &str| s.parse::<i64>().map_err(|_| Error::Parse(format!("line {}: bad label {:?}", lineno + 1, s)));
            pairs.push((parse(fields[0])?, parse(fields[1])?));
        }
        Graph::from_edge_list(&pairs)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Graph::parse_edge_list(&text)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    /// Resolves a graph spec: a generator string such as `star:11` or
    /// `paths:3x3`, otherwise a path to an edge-list file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.parse::<GraphFamily>() {
            Ok(family) => family.build(),
            Err(_) if Path::new(spec).exists() => Graph::read_edge_list(spec),
            Err(e) => Err(e),
        }
    }
}

/// Named graph families and their fixed labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    /// Center 0 joined to `leaves` leaves `1..=leaves`.
    Star {
        leaves: usize,
    },
    /// `0 - 1 - ... - (n-1)`.
    Path {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    /// `2^depth - 1` vertices in generation-major order: root 0, children of
    /// `i` are `2i + 1` and `2i + 2`.
    PerfectBinaryTree {
        depth: usize,
    },
    /// Endpoints 0 and `length * count + 1` joined by `count` disjoint paths,
    /// each with `length` internal vertices. Path `p` uses internal vertices
    /// `1 + p * length ..= (p + 1) * length` in order from vertex 0.
    ParallelPaths {
        length: usize,
        count: usize,
    },
    /// `side^dim` vertices with wraparound; vertex index is the base-`side`
    /// encoding of its coordinates. For `side = 2` the doubled edges collapse.
    Torus {
        side: usize,
        dim: usize,
    },
}

impl GraphFamily {
    pub fn build(self) -> Result<Graph> {
        let invalid = |msg: &str| Err(Error::InvalidParameter(format!("{self}: {msg}")));
        match self {
            GraphFamily::Star { leaves } => {
                if leaves < 1 {
                    return invalid("need at least one leaf");
                }
                Graph::new(leaves + 1, (1..=leaves).map(|l| (0, l)))
            }
            GraphFamily::Path { n } => {
                if n < 2 {
                    return invalid("need at least two vertices");
                }
                Graph::new(n, (0..n - 1).map(|i| (i, i + 1)))
            }
            GraphFamily::Cycle { n } => {
                if n < 3 {
                    return invalid("need at least three vertices");
                }
                Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
            }
            GraphFamily::Complete { n } => {
                if n < 2 {
                    return invalid("need at least two vertices");
                }
                Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
            }
            GraphFamily::PerfectBinaryTree { depth } => {
                if !(1..=24).contains(&depth) {
                    return invalid("depth must be in 1..=24");
                }
                let n = (1usize << depth) - 1;
                Graph::new(n, (1..n).map(|c| ((c - 1) / 2, c)))
            }
            GraphFamily::ParallelPaths { length, count } => {
                if length < 1 || count < 1 {
                    return invalid("length and count must be at least 1");
                }
                let sink = length * count + 1;
                let mut edges = Vec::with_capacity(count * (length + 1));
                for p in 0..count {
                    let first = 1 + p * length;
                    edges.push((0, first));
                    for t in 0..length - 1 {
                        edges.push((first + t, first + t + 1));
                    }
                    edges.push((first + length - 1, sink));
                }
                Graph::new(sink + 1, edges)
            }
            GraphFamily::Torus { side, dim } => {
                if side < 2 || dim < 1 {
                    return invalid("side must be at least 2 and dim at least 1");
                }
                let n = side
                    .checked_pow(dim as u32)
                    .filter(|&n| n <= 1 << 24)
                    .ok_or_else(|| Error::InvalidParameter(format!("{self}: too many vertices")))?;
                let mut edges = BTreeSet::new();
                for v in 0..n {
                    let mut stride = 1;
                    for _ in 0..dim {
                        let coord = (v / stride) % side;
                        let w = v - coord * stride + ((coord + 1) % side) * stride;
                        edges.insert((v.min(w), v.max(w)));
                        stride *= side;
                    }
                }
                Graph::new(n, edges)
            }
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphFamily::Star { leaves } => write!(f, "star:{leaves}"),
            GraphFamily::Path { n } => write!(f, "path:{n}"),
            GraphFamily::Cycle { n } => write!(f, "cycle:{n}"),
            GraphFamily::Complete { n } => write!(f, "complete:{n}"),
            GraphFamily::PerfectBinaryTree { depth } => write!(f, "tree:{depth}"),
            GraphFamily::ParallelPaths { length, count } => write!(f, "paths:{length}x{count}"),
            GraphFamily::Torus { side, dim } => write!(f, "torus:{side}x{dim}d"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    /// Accepts `star:N0`, `path:N`, `cycle:N`, `complete:N`, `tree:K`,
    /// `paths:LxD` and `torus:LxDd` (the trailing `d` is optional).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognized graph spec {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let pair = |t: &str| -> Result<(usize, usize)> {
            let t = t.trim().trim_end_matches('d');
            let (a, b) = t.split_once('x').ok_or_else(bad)?;
            Ok((num(a)?, num(b)?))
        };
        Ok(match kind.trim() {
            "star" => GraphFamily::Star { leaves: num(arg)? },
            "path" => GraphFamily::Path { n: num(arg)? },
            "cycle" => GraphFamily::Cycle { n: num(arg)? },
            "complete" => GraphFamily::Complete { n: num(arg)? },
            "tree" => GraphFamily::PerfectBinaryTree { depth: num(arg)? },
            "paths" => {
                let (length, count) = pair(arg)?;
                GraphFamily::ParallelPaths { length, count }
            }
            "torus" => {
                let (side, dim) = pair(arg)?;
                GraphFamily::Torus { side, dim }
            }
            _ => return Err(bad()),
        })
    }
}

/// Random connected graph on `n` vertices: a uniform random recursive tree
/// plus each remaining pair independently with probability `extra_edge_prob`.
pub fn random_connected<R: Rng + ?Sized>(n: usize, extra_edge_prob: f64, rng: &mut R) -> Graph {
    assert!(n >= 2, "random_connected needs at least two vertices");
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let parent = rng.random_range(0..v);
        edges.insert((parent, v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(extra_edge_prob) {
                edges.insert((a, b));
            }
        }
    }
    Graph::new(n, edges).expect("spanning tree keeps the graph connected")
}
