//! Weighted undirected graphs, their Laplacians, generators and the
//! edge-list file format.
//!
//! Node indices are 0-based in the Rust API and 1-based in files.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Retry budget for [`gen_community`].
pub const DEFAULT_COMMUNITY_RETRIES: usize = 100;

/// Undirected weighted edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// A weighted undirected graph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph from `(i, j, w)` triples with 0-based indices.
    ///
    /// Endpoint order does not matter; each unordered pair may appear once.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        let mut seen = HashSet::new();
        let mut stored = Vec::new();
        for (a, b, w) in edges {
            let e = check_edge(n, a, b, w).map_err(Error::InvalidGraph)?;
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.i, e.j
                )));
            }
            stored.push(e);
        }
        Ok(Graph { n, edges: stored })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weighted degree of every node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.i] += e.w;
            d[e.j] += e.w;
        }
        d
    }

    fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        count_components(self) == 1
    }

    pub fn summary(&self) -> GraphSummary {
        let degrees = self.degrees();
        let components = count_components(self);
        let min = degrees.iter().copied().fold(f64::INFINITY, f64::min);
        let max = degrees.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = degrees.iter().sum::<f64>() / self.n as f64;
        GraphSummary {
            n: self.n,
            m: self.edges.len(),
            components,
            disconnected: components > 1,
            min_degree: min,
            max_degree: max,
            mean_degree: mean,
        }
    }
}

fn check_edge(n: usize, a: usize, b: usize, w: f64) -> std::result::Result<Edge, String> {
    if a == b {
        return Err(format!("self-loop at node {a}"));
    }
    if a >= n || b >= n {
        return Err(format!("edge ({a}, {b}) out of range for {n} nodes"));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(format!("edge ({a}, {b}) has nonpositive weight {w}"));
    }
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    Ok(Edge { i, j, w })
}

/// Size and connectivity figures written alongside exported graphs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub components: usize,
    /// Set when the graph has more than one component; spectral routines
    /// refuse such graphs unless explicitly overridden.
    pub disconnected: bool,
    pub min_degree: f64,
    pub max_degree: f64,
    pub mean_degree: f64,
}

/// Dense symmetric matrix. The upper triangle is mirrored into the lower one
/// on construction so `m[(i, j)] == m[(j, i)]` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let scale = m.amax().max(1.0);
        let mut m = m;
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                m[(j, i)] = m[(i, j)];
            }
        }
        Ok(SymmetricMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Combinatorial Laplacian `L = D - W`.
pub fn build_laplacian(g: &Graph) -> SymmetricMatrix {
    let mut l = DMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        l[(e.i, e.j)] -= e.w;
        l[(e.j, e.i)] -= e.w;
        l[(e.i, e.i)] += e.w;
        l[(e.j, e.j)] += e.w;
    }
    SymmetricMatrix(l)
}

/// Unweighted n-cycle.
pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::invalid(format!("cycle needs at least 3 nodes, got {n}")));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

/// Community label of every node for block sizes `sizes`.
pub fn block_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect()
}

/// Stochastic block model with unit weights, redrawn until connected.
pub fn gen_community(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    gen_community_with_retries(sizes, p_in, p_out, seed, DEFAULT_COMMUNITY_RETRIES)
}

pub fn gen_community_with_retries(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
    retries: usize,
) -> Result<Graph> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::invalid("community sizes must be positive"));
    }
    if !sizes.iter().any(|&s| s >= 2) {
        return Err(Error::invalid("at least one community needs two or more nodes"));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_in <= p_out {
        return Err(Error::invalid(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    if retries == 0 {
        return Err(Error::invalid("retry budget must be positive"));
    }
    let labels = block_labels(sizes);
    let n = labels.len();
    let mut rng = rng_from_seed(seed);
    for _ in 0..retries {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if labels[i] == labels[j] { p_in } else { p_out };
                let u: f64 = rng.random();
                if u < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let g = Graph::new(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: retries,
        reason: "no connected draw".into(),
    })
}

/// Number of connected components (breadth-first traversal).
pub fn count_components(g: &Graph) -> usize {
    let adj = g.neighbors();
    let mut seen = vec![false; g.n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..g.n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    components
}

/// Parses the edge-list format: a header line `n m`, then `m` lines
/// `i j w` with 1-based indices. Lines starting with `#` are ignored.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Graph> {
    let perr = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| perr(1, "missing header line \"n m\"".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(perr(hline, format!("expected \"n m\", found {header:?}")));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| perr(hline, format!("invalid node count {:?}", fields[0])))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| perr(hline, format!("invalid edge count {:?}", fields[1])))?;
    if n == 0 {
        return Err(perr(hline, "node count must be positive".into()));
    }

    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(m);
    let mut last_line = hline;
    for (lno, line) in lines {
        last_line = lno;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(perr(lno, format!("expected \"i j w\", found {line:?}")));
        }
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| perr(lno, format!("invalid node index {s:?}")))?;
            if v == 0 || v > n {
                return Err(perr(lno, format!("node index {v} out of range 1..={n}")));
            }
            Ok(v - 1)
        };
        let a = idx(f[0])?;
        let b = idx(f[1])?;
        let w: f64 = f[2]
            .parse()
            .map_err(|_| perr(lno, format!("invalid weight {:?}", f[2])))?;
        let e = check_edge(n, a, b, w).map_err(|msg| perr(lno, msg))?;
        if !seen.insert((e.i, e.j)) {
            return Err(perr(
                lno,
                format!("duplicate edge ({}, {})", e.i + 1, e.j + 1),
            ));
        }
        edges.push(e);
    }
    if edges.len() != m {
        return Err(perr(
            last_line,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    let g = Graph { n, edges };
    let components = count_components(&g);
    if components > 1 {
        log::warn!(
            "{}: graph has {components} connected components",
            origin.display()
        );
    }
    Ok(g)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n, g.edges.len());
    for e in &g.edges {
        // `{}` on f64 prints the shortest representation that round-trips.
        let _ = writeln!(out, "{} {} {}", e.i + 1, e.j + 1, e.w);
    }
    out
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_edge_list(g)).map_err(|e| Error::io(path, e))
}
