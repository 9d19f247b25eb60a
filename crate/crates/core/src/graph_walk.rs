//! Walks governed by `f^K` on regular graphs, the electric-network view of
//! weighted walks, and closed-form bounds for annealing on graphs.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::diagnostics::{ExactChain, DENSE_CAP};
use crate::math::logistic;
use crate::seed::{rng_from_seed, ChainRng};
use crate::{Error, Result};

/// Undirected network with positive conductances; loops allowed.
///
/// The walk moves from `x` along an incident edge with probability proportional
/// to its weight. A loop at `x` is one incident edge, so it contributes its
/// weight once to `w(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedNetwork {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidParameter("network has no vertices".into()));
        }
        for &(u, v, w) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge {u}-{v} refers to a vertex outside 0..{vertices}"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("edge {u}-{v} has weight {w}")));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// `w(x)`, the total weight of edges at `x`.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices];
        for &(u, v, c) in &self.edges {
            w[u] += c;
            if u != v {
                w[v] += c;
            }
        }
        w
    }

    /// `m = (1/2) sum_x w(x)`, so that commute times equal `2 m R`.
    pub fn total_conductance(&self) -> f64 {
        0.5 * self.vertex_weights().iter().sum::<f64>()
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(u, v, _) in &self.edges {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.vertices
    }

    fn laplacian(&self) -> Result<DMatrix<f64>> {
        if self.vertices > DENSE_CAP {
            return Err(Error::StateSpaceTooLarge {
                states: self.vertices,
                cap: DENSE_CAP,
            });
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut l = DMatrix::zeros(self.vertices, self.vertices);
        for &(u, v, c) in &self.edges {
            if u == v {
                continue;
            }
            l[(u, u)] += c;
            l[(v, v)] += c;
            l[(u, v)] -= c;
            l[(v, u)] -= c;
        }
        Ok(l)
    }

    /// Potential with `phi(u) = 1`, `phi(v) = 0`, harmonic elsewhere.
    pub fn potential(&self, u: usize, v: usize) -> Result<Vec<f64>> {
        self.check_pair(u, v)?;
        if u == v {
            return Err(Error::InvalidParameter("potential needs two distinct poles".into()));
        }
        let l = self.laplacian()?;
        let free: Vec<usize> = (0..self.vertices).filter(|&x| x != u && x != v).collect();
        let mut phi = vec![0.0; self.vertices];
        phi[u] = 1.0;
        if free.is_empty() {
            return Ok(phi);
        }
        let k = free.len();
        let mut a = DMatrix::zeros(k, k);
        let mut b = DVector::zeros(k);
        for (r, &x) in free.iter().enumerate() {
            for (c, &y) in free.iter().enumerate() {
                a[(r, c)] = l[(x, y)];
            }
            b[r] = -l[(x, u)];
        }
        let sol = a
            .cholesky()
            .ok_or_else(|| Error::Singular("grounded Laplacian".into()))?
            .solve(&b);
        for (r, &x) in free.iter().enumerate() {
            phi[x] = sol[r];
        }
        Ok(phi)
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.vertices || v >= self.vertices {
            return Err(Error::InvalidParameter(format!(
                "vertex outside 0..{}",
                self.vertices
            )));
        }
        Ok(())
    }

    /// Effective resistance between `u` and `v` (zero when `u == v`).
    pub fn effective_resistance(&self, u: usize, v: usize) -> Result<f64> {
        self.check_pair(u, v)?;
        let l = self.laplacian()?;
        if u == v {
            return Ok(0.0);
        }
        // ground v and inject unit current at u
        let keep: Vec<usize> = (0..self.vertices).filter(|&x| x != v).collect();
        let k = keep.len();
        let mut a = DMatrix::zeros(k, k);
        for (r, &x) in keep.iter().enumerate() {
            for (c, &y) in keep.iter().enumerate() {
                a[(r, c)] = l[(x, y)];
            }
        }
        let mut b = DVector::zeros(k);
        let ui = keep.iter().position(|&x| x == u).expect("u differs from v");
        b[ui] = 1.0;
        let sol = a
            .cholesky()
            .ok_or_else(|| Error::Singular("grounded Laplacian".into()))?
            .solve(&b);
        Ok(sol[ui])
    }

    /// All pairwise effective resistances from one pseudo-inverse.
    pub fn resistance_matrix(&self) -> Result<DMatrix<f64>> {
        let l = self.laplacian()?;
        let n = self.vertices;
        let shift = DMatrix::from_element(n, n, 1.0 / n as f64);
        let g = (l + &shift)
            .try_inverse()
            .ok_or_else(|| Error::Singular("Laplacian".into()))?
            - shift;
        Ok(DMatrix::from_fn(n, n, |i, j| g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]))
    }

    /// `C(u,v) = 2 m R(u,v)`.
    pub fn commute_time(&self, u: usize, v: usize) -> Result<f64> {
        Ok(2.0 * self.total_conductance() * self.effective_resistance(u, v)?)
    }

    /// Probability that the walk started at `z` hits `u` before `v`.
    pub fn escape_probability(&self, z: usize, u: usize, v: usize) -> Result<f64> {
        self.check_pair(z, z)?;
        Ok(self.potential(u, v)?[z])
    }

    /// The weighted walk as an exact chain, with `pi ∝ w(x)`.
    pub fn walk_chain(&self) -> Result<ExactChain> {
        let w = self.vertex_weights();
        if w.contains(&0.0) {
            return Err(Error::Disconnected);
        }
        let mut rows = vec![Vec::new(); self.vertices];
        for &(u, v, c) in &self.edges {
            rows[u].push((v, c / w[u]));
            if u != v {
                rows[v].push((u, c / w[v]));
            }
        }
        let total: f64 = w.iter().sum();
        ExactChain::with_stationary(rows, w.iter().map(|x| x / total).collect())
    }
}

/// A connected graph made regular by padding every vertex with loops up to the
/// maximum degree.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularGraph {
    neighbors: Vec<Vec<usize>>,
    degree: usize,
}

impl RegularGraph {
    /// Builds from undirected edges; loops and repeated edges in the input are ignored.
    pub fn from_edges(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidParameter("graph has no vertices".into()));
        }
        let mut neighbors = vec![Vec::new(); vertices];
        for &(u, v) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge {u}-{v} refers to a vertex outside 0..{vertices}"
                )));
            }
            if u != v && !neighbors[u].contains(&v) {
                neighbors[u].push(v);
                neighbors[v].push(u);
            }
        }
        neighbors.iter_mut().for_each(|n| n.sort_unstable());
        let degree = neighbors.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let graph = Self { neighbors, degree };
        if !graph.unit_network().is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(graph)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::from_edges(n, &edges)
    }

    pub fn vertices(&self) -> usize {
        self.neighbors.len()
    }

    /// Degree after loop padding.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Loops added at `v`.
    pub fn loops(&self, v: usize) -> usize {
        self.degree - self.neighbors[v].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, ns) in self.neighbors.iter().enumerate() {
            out.extend(ns.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }

    /// The graph with unit resistors on every edge.
    pub fn unit_network(&self) -> WeightedNetwork {
        WeightedNetwork {
            vertices: self.vertices(),
            edges: self.edges().into_iter().map(|(u, v)| (u, v, 1.0)).collect(),
        }
    }

    /// `max_{u,v} R(u,v)` with unit resistors.
    pub fn max_unit_resistance(&self) -> Result<f64> {
        let r = self.unit_network().resistance_matrix()?;
        Ok(r.iter().copied().fold(0.0, f64::max))
    }

    /// Graph diameter (an upper bound on every unit resistance).
    pub fn diameter(&self) -> usize {
        let n = self.vertices();
        let mut best = 0;
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.neighbors[x] {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            best = best.max(dist.into_iter().max().unwrap_or(0));
        }
        best
    }
}

/// `log f` per vertex, shifted so that `min log f = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDensity {
    log_f: Vec<f64>,
    argmax: usize,
    maxima: usize,
}

impl VertexDensity {
    pub fn new(log_f: Vec<f64>) -> Result<Self> {
        if log_f.is_empty() {
            return Err(Error::InvalidParameter("density has no vertices".into()));
        }
        if log_f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("log density must be finite".into()));
        }
        let min = log_f.iter().copied().fold(f64::INFINITY, f64::min);
        let log_f: Vec<f64> = log_f.iter().map(|v| v - min).collect();
        let max = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax = log_f.iter().position(|&v| v == max).expect("non-empty");
        let maxima = log_f.iter().filter(|&&v| v == max).count();
        Ok(Self {
            log_f,
            argmax,
            maxima,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.log_f
    }

    pub fn len(&self) -> usize {
        self.log_f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_f.is_empty()
    }

    /// First vertex attaining the maximum.
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    pub fn unique_max(&self) -> bool {
        self.maxima == 1
    }

    pub fn maxima(&self) -> usize {
        self.maxima
    }

    /// `f_1 = max log f`.
    pub fn f1(&self) -> f64 {
        self.log_f[self.argmax]
    }

    /// `f_2 = max_{v != v_1} log f(v)`; equals `f_1` when the maximum is shared.
    pub fn f2(&self) -> f64 {
        self.log_f
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.argmax)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `pi^K(v)` for all vertices.
    pub fn powered_law(&self, exponent: f64) -> Vec<f64> {
        let w: Vec<f64> = self.log_f.iter().map(|v| exponent * v).collect();
        crate::math::normalize_log_weights(&w)
    }

    /// Parses `v logf` lines; every vertex `0..vertices` must appear once.
    pub fn parse(text: &str, vertices: usize) -> Result<Self> {
        let mut values = vec![None; vertices];
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            let mut it = line.split_whitespace();
            let (Some(v), Some(lf), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err("expected `vertex logf`".into()));
            };
            let v: usize = v.parse().map_err(|_| parse_err(format!("bad vertex `{v}`")))?;
            let lf: f64 = lf.parse().map_err(|_| parse_err(format!("bad value `{lf}`")))?;
            if !lf.is_finite() {
                return Err(parse_err(format!("non-finite value `{lf}`")));
            }
            let slot = values
                .get_mut(v)
                .ok_or_else(|| parse_err(format!("vertex {v} outside 0..{vertices}")))?;
            if slot.replace(lf).is_some() {
                return Err(parse_err(format!("vertex {v} given twice")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(v, x)| {
                x.ok_or(Error::Parse {
                    line: 0,
                    msg: format!("vertex {v} has no value"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn from_file(path: impl AsRef<Path>, vertices: usize) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, vertices)
    }
}

/// Graph text: a `vertices N` header, then `u v weight` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `vertices` header".into(),
        })?;
        let vertices = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["vertices", n] => n.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad vertex count `{n}`"),
            })?,
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: "header must be `vertices N`".into(),
                })
            }
        };
        let mut edges = Vec::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            let err = |msg: String| Error::Parse { line, msg };
            let [u, v, w] = fields[..] else {
                return Err(err("expected `u v weight`".into()));
            };
            let u: usize = u.parse().map_err(|_| err(format!("bad vertex `{u}`")))?;
            let v: usize = v.parse().map_err(|_| err(format!("bad vertex `{v}`")))?;
            let w: f64 = w.parse().map_err(|_| err(format!("bad weight `{w}`")))?;
            if u >= vertices || v >= vertices {
                return Err(err(format!("vertex outside 0..{vertices}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(err(format!("weight must be positive, got {w}")));
            }
            edges.push((u, v, w));
        }
        Ok(Self { vertices, edges })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn network(&self) -> Result<WeightedNetwork> {
        WeightedNetwork::new(self.vertices, self.edges.clone())
    }

    /// Adjacency only; weights are dropped and loops padded.
    pub fn regular_graph(&self) -> Result<RegularGraph> {
        let edges: Vec<_> = self.edges.iter().map(|&(u, v, _)| (u, v)).collect();
        RegularGraph::from_edges(self.vertices, &edges)
    }
}

/// The network on `V ∪ E`: each edge `uv` gets a midpoint `e` joined to `u` with
/// weight `g(u)` and to `v` with weight `g(v)`; each vertex gets a loop that tops
/// its weight up to `2 d g(u)`.
#[derive(Debug, Clone)]
pub struct StarNetwork {
    network: WeightedNetwork,
    vertices: usize,
}

impl StarNetwork {
    pub fn new(graph: &RegularGraph, density: &VertexDensity, exponent: f64) -> Result<Self> {
        if density.len() != graph.vertices() {
            return Err(Error::SupportMismatch(graph.vertices(), density.len()));
        }
        let n = graph.vertices();
        let d = graph.degree() as f64;
        let g: Vec<f64> = density.values().iter().map(|v| (exponent * v).exp()).collect();
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Overflow(format!("f^K at exponent {exponent}")));
        }
        let mut edges = Vec::new();
        for (i, (u, v)) in graph.edges().into_iter().enumerate() {
            let mid = n + i;
            edges.push((u, mid, g[u]));
            edges.push((v, mid, g[v]));
        }
        for u in 0..n {
            let loop_weight = (2.0 * d - graph.neighbors(u).len() as f64) * g[u];
            edges.push((u, u, loop_weight));
        }
        let total = n + graph.edges().len();
        Ok(Self {
            network: WeightedNetwork::new(total, edges)?,
            vertices: n,
        })
    }

    pub fn network(&self) -> &WeightedNetwork {
        &self.network
    }

    /// Number of original vertices; midpoints follow them.
    pub fn original_vertices(&self) -> usize {
        self.vertices
    }

    /// Walk on `G*` watched only on `V`: one step of `P_VV + P_VE P_EV`.
    pub fn trace_kernel(&self) -> Result<ExactChain> {
        let chain = self.network.walk_chain()?;
        let n = self.vertices;
        let mut rows = Vec::with_capacity(n);
        for u in 0..n {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &(x, p) in &chain.rows()[u] {
                if x < n {
                    row.push((x, p));
                } else {
                    for &(y, q) in &chain.rows()[x] {
                        row.push((y, p * q));
                    }
                }
            }
            rows.push(row);
        }
        let pi_v: f64 = chain.pi()[..n].iter().sum();
        ExactChain::with_stationary(rows, chain.pi()[..n].iter().map(|p| p / pi_v).collect())
    }
}

/// A walk on a regular graph governed by `f^K`.
#[derive(Debug, Clone)]
pub struct GraphChain {
    graph: Arc<RegularGraph>,
    log_f: Arc<Vec<f64>>,
    exponent: f64,
    state: usize,
    rng: ChainRng,
    steps: u64,
}

impl GraphChain {
    pub fn new(
        graph: Arc<RegularGraph>,
        density: &VertexDensity,
        exponent: f64,
        start: usize,
        seed: u64,
    ) -> Result<Self> {
        if density.len() != graph.vertices() {
            return Err(Error::SupportMismatch(graph.vertices(), density.len()));
        }
        if start >= graph.vertices() {
            return Err(Error::InvalidParameter(format!("start vertex {start} out of range")));
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::InvalidParameter(format!("bad exponent {exponent}")));
        }
        Ok(Self {
            graph,
            log_f: Arc::new(density.values().to_vec()),
            exponent,
            state: start,
            rng: rng_from_seed(seed),
            steps: 0,
        })
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Picks one of `d` slots; slots past the real neighbours are loops.
    pub fn step(&mut self) -> usize {
        let u_slot: f64 = self.rng.gen();
        let u_acc: f64 = self.rng.gen();
        let d = self.graph.degree();
        let slot = ((u_slot * d as f64) as usize).min(d - 1);
        let ns = self.graph.neighbors(self.state);
        if slot < ns.len() {
            let v = ns[slot];
            let p = 0.5 * logistic(self.exponent * (self.log_f[v] - self.log_f[self.state]));
            if u_acc < p {
                self.state = v;
            }
        }
        self.steps += 1;
        self.state
    }

    pub fn run(&mut self, steps: u64) -> usize {
        for _ in 0..steps {
            self.step();
        }
        self.state
    }
}

/// Exact kernel of the walk governed by `f^K` on a regular graph.
pub fn graph_kernel(graph: &RegularGraph, density: &VertexDensity, exponent: f64) -> Result<ExactChain> {
    if density.len() != graph.vertices() {
        return Err(Error::SupportMismatch(graph.vertices(), density.len()));
    }
    let lf = density.values();
    let d = graph.degree() as f64;
    let rows = (0..graph.vertices())
        .map(|u| {
            let mut moved = 0.0;
            let mut row: Vec<(usize, f64)> = graph
                .neighbors(u)
                .iter()
                .map(|&v| {
                    let p = 0.5 * logistic(exponent * (lf[v] - lf[u])) / d;
                    moved += p;
                    (v, p)
                })
                .collect();
            row.push((u, 1.0 - moved));
            row
        })
        .collect();
    let w: Vec<f64> = lf.iter().map(|v| exponent * v).collect();
    ExactChain::from_rows_with_log_weights(rows, &w)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    Ok(())
}

fn gap(density: &VertexDensity) -> Result<f64> {
    if !density.unique_max() {
        return Err(Error::NonUniqueMaximum(density.maxima()));
    }
    Ok(density.f1() - density.f2())
}

/// `K = log(|V| / eps) / (f_1 - f_2)`; guarantees `pi^K(v_1) > 1 - eps`.
pub fn k_sufficient(density: &VertexDensity, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok((density.len() as f64 / eps).ln() / gap(density)?)
}

/// `K = log(1/eps) / (f_1 - f_2)`: makes `f(v_1)^K` exceed `f(v_2)^K` by a factor `1/eps`.
pub fn k_dominance(density: &VertexDensity, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok((1.0 / eps).ln() / gap(density)?)
}

/// Smallest `K` with `pi^K(v_1) >= 1 - eps`, by bisection.
pub fn k_exact(density: &VertexDensity, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    gap(density)?;
    let v1 = density.argmax();
    let mass = |k: f64| density.powered_law(k)[v1];
    if mass(0.0) >= 1.0 - eps {
        return Ok(0.0);
    }
    let mut hi = k_sufficient(density, eps)?;
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) >= 1.0 - eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `2 d R_0 |V| exp(f K)` with `f = f_2` when the target is the maximiser and
/// `f = f_1` otherwise.
pub fn hitting_time_bound(
    graph: &RegularGraph,
    density: &VertexDensity,
    exponent: f64,
    target: usize,
    r0: f64,
) -> Result<f64> {
    if density.len() != graph.vertices() {
        return Err(Error::SupportMismatch(graph.vertices(), density.len()));
    }
    let f = if target == density.argmax() && density.unique_max() {
        density.f2()
    } else {
        density.f1()
    };
    let bound =
        2.0 * graph.degree() as f64 * r0 * graph.vertices() as f64 * (f * exponent).exp();
    if !bound.is_finite() {
        return Err(Error::Overflow("hitting-time bound".into()));
    }
    Ok(bound)
}

/// `T = hitting_bound / eps`.
pub fn schedule_from_hitting_bound(hitting_bound: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1], got {eps}")));
    }
    Ok(hitting_bound / eps)
}

/// Exponent, hitting bound and run length for a fixed-`K` run on a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedKSchedule {
    pub exponent: f64,
    pub hitting_bound: f64,
    pub steps: f64,
}

/// Uses `k_sufficient` unless an exponent is supplied.
pub fn fixed_k_schedule(
    graph: &RegularGraph,
    density: &VertexDensity,
    eps: f64,
    exponent: Option<f64>,
    r0: f64,
) -> Result<FixedKSchedule> {
    let exponent = match exponent {
        Some(k) => k,
        None => k_sufficient(density, eps)?,
    };
    let hitting_bound = hitting_time_bound(graph, density, exponent, density.argmax(), r0)?;
    Ok(FixedKSchedule {
        exponent,
        hitting_bound,
        steps: schedule_from_hitting_bound(hitting_bound, eps)?,
    })
}

/// `2 d R_G (|V|/eps)^{f_1/(f_1-f_2)}`; with a shared maximum the exponent is
/// `(2 f_1 - f_2)/(f_1 - f_2)` where `f_2` is the best value below the maximum.
pub fn run_length_bound(
    degree: usize,
    r_g: f64,
    vertices: usize,
    f1: f64,
    f2: f64,
    eps: f64,
    unique_max: bool,
) -> Result<f64> {
    check_eps(eps)?;
    let gap = f1 - f2;
    if !(gap > 0.0) {
        return Ok(f64::INFINITY);
    }
    let power = if unique_max { f1 / gap } else { (2.0 * f1 - f2) / gap };
    Ok(2.0 * degree as f64 * r_g * (vertices as f64 / eps).powf(power))
}

/// [`run_length_bound`] for a graph and density.
pub fn run_length_bound_for(
    graph: &RegularGraph,
    density: &VertexDensity,
    eps: f64,
    r_g: f64,
) -> Result<f64> {
    let (f1, unique) = (density.f1(), density.unique_max());
    let f2 = if unique {
        density.f2()
    } else {
        density
            .values()
            .iter()
            .copied()
            .filter(|&v| v < f1)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if f2 == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    run_length_bound(graph.degree(), r_g, graph.vertices(), f1, f2, eps, unique)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::hitting_time_exact;
    use proptest::prelude::*;
    use rand::Rng;

    fn example1() -> (RegularGraph, VertexDensity) {
        let g = RegularGraph::path(3).unwrap();
        let f = VertexDensity::new(vec![2f64.ln(), 0.0, 3f64.ln()]).unwrap();
        (g, f)
    }

    #[test]
    fn series_and_parallel() {
        let series = WeightedNetwork::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!((series.effective_resistance(0, 2).unwrap() - 2.0).abs() < 1e-12);
        let parallel = WeightedNetwork::new(2, vec![(0, 1, 1.0), (0, 1, 1.0)]).unwrap();
        assert!((parallel.effective_resistance(0, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!((series.commute_time(0, 2).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(series.commute_time(1, 1).unwrap(), 0.0);
    }

    #[test]
    fn disconnected_is_error() {
        let net = WeightedNetwork::new(3, vec![(0, 1, 1.0)]).unwrap();
        assert!(matches!(net.effective_resistance(0, 2), Err(Error::Disconnected)));
        assert!(matches!(RegularGraph::from_edges(3, &[(0, 1)]), Err(Error::Disconnected)));
    }

    #[test]
    fn escape_on_path() {
        let net = RegularGraph::path(5).unwrap().unit_network();
        assert!((net.escape_probability(2, 0, 4).unwrap() - 0.5).abs() < 1e-12);
        assert!((net.escape_probability(1, 0, 4).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(net.escape_probability(0, 0, 4).unwrap(), 1.0);
        assert!(net.escape_probability(1, 2, 2).is_err());
    }

    #[test]
    fn loops_count_in_commute_time() {
        let net = WeightedNetwork::new(2, vec![(0, 1, 1.0), (0, 0, 2.0)]).unwrap();
        let h = |t| hitting_time_exact(&net.walk_chain().unwrap(), t).unwrap();
        let c = h(1)[0] + h(0)[1];
        assert!((c - net.commute_time(0, 1).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn example1_k_values() {
        let (_, f) = example1();
        assert!((k_dominance(&f, 0.05).unwrap() - 0.05f64.ln() / (2.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((k_sufficient(&f, 0.05).unwrap() - 60f64.ln() / 1.5f64.ln()).abs() < 1e-12);
        let k = k_exact(&f, 0.05).unwrap();
        assert!((f.powered_law(k)[2] - 0.95).abs() < 1e-9);
        let near_one = k_sufficient(&f, 1.0 - 1e-12).unwrap();
        assert!((near_one - 3f64.ln() / 1.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn non_unique_max_rejected() {
        let f = VertexDensity::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(k_sufficient(&f, 0.1), Err(Error::NonUniqueMaximum(2))));
    }

    #[test]
    fn example1_bounds_as_stated() {
        let (g, f) = example1();
        assert_eq!(g.degree(), 2);
        let r0 = g.max_unit_resistance().unwrap();
        assert!((r0 - 2.0).abs() < 1e-12);
        let b0 = hitting_time_bound(&g, &f, 0.0, 2, r0).unwrap();
        assert!((b0 - 24.0).abs() < 1e-12);
        let t = schedule_from_hitting_bound(671.0, 0.05).unwrap();
        assert!((t - 13_420.0).abs() < 1e-9);
        assert_eq!(schedule_from_hitting_bound(671.0, 1.0).unwrap(), 671.0);
        let t4 = run_length_bound_for(&g, &f, 0.05, r0).unwrap();
        let expected = 8.0 * 60f64.powf(3f64.ln() / (3f64.ln() - 2f64.ln()));
        assert!((t4 / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn run_length_gap_vanishes() {
        assert!(run_length_bound(2, 2.0, 3, 1.0, 1.0, 0.1, true).unwrap().is_infinite());
        let a = run_length_bound(2, 2.0, 3, 1.0, 0.9, 0.1, true).unwrap();
        let b = run_length_bound(2, 2.0, 3, 1.0, 0.99, 0.1, true).unwrap();
        assert!(b > a);
    }

    #[test]
    fn star_trace_is_governed_kernel() {
        let g = RegularGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let f = VertexDensity::new(vec![0.3, 1.0, 0.0, 0.7, 1.4]).unwrap();
        for k in [0.0, 1.0, 3.5] {
            let star = StarNetwork::new(&g, &f, k).unwrap();
            let trace = star.trace_kernel().unwrap();
            let direct = graph_kernel(&g, &f, k).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    assert!((trace.entry(i, j) - direct.entry(i, j)).abs() < 1e-12);
                }
                assert!((trace.pi()[i] - direct.pi()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn star_conductance_bound() {
        let (g, f) = example1();
        let star = StarNetwork::new(&g, &f, 2.0).unwrap();
        let max_g = (2.0 * f.f1()).exp();
        assert!(star.network().total_conductance() <= 2.0 * 2.0 * 3.0 * max_g + 1e-9);
        assert_eq!(star.network().vertices(), 5);
    }

    #[test]
    fn graph_chain_uniform_cycle() {
        let g = Arc::new(RegularGraph::cycle(6).unwrap());
        let f = VertexDensity::new(vec![0.0; 6]).unwrap();
        let mut c = GraphChain::new(g, &f, 1.0, 0, 5).unwrap();
        let mut counts = [0u32; 6];
        let steps = 1_000_000;
        for _ in 0..steps {
            counts[c.step()] += 1;
        }
        for k in counts {
            assert!((k as f64 / steps as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }

    #[test]
    fn graph_kernel_balance_and_bound_validity() {
        let (g, f) = example1();
        let r0 = g.max_unit_resistance().unwrap();
        for k in [0.0, 2.0, 7.388, 8.0] {
            let chain = graph_kernel(&g, &f, k).unwrap();
            assert!(chain.detailed_balance_violation() < 1e-12);
            let h = hitting_time_exact(&chain, 2).unwrap();
            let worst = h.iter().copied().fold(0.0, f64::max);
            assert!(worst <= hitting_time_bound(&g, &f, k, 2, r0).unwrap());
        }
    }

    #[test]
    fn parsers() {
        let gf = GraphFile::parse("vertices 3\n0 1 1.0\n1 2 2.5 # heavy\n").unwrap();
        assert_eq!(gf.edges, vec![(0, 1, 1.0), (1, 2, 2.5)]);
        assert!(GraphFile::parse("vertices 2\n0 2 1\n").is_err());
        assert!(GraphFile::parse("nodes 2\n").is_err());
        assert!(GraphFile::parse("vertices 2\n0 1 -1\n").is_err());
        let f = VertexDensity::parse("0 0.5\n2 1.5\n1 0.0\n", 3).unwrap();
        assert_eq!(f.values(), &[0.5, 0.0, 1.5]);
        assert!(VertexDensity::parse("0 1\n", 2).is_err());
        assert!(VertexDensity::parse("0 1\n0 2\n1 0\n", 2).is_err());
        assert!(VertexDensity::parse("0 NaN\n1 0\n", 2).is_err());
    }

    fn random_network(seed: u64, n: usize) -> WeightedNetwork {
        let mut rng = rng_from_seed(seed);
        let mut edges: Vec<(usize, usize, f64)> =
            (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.1..5.0))).collect();
        for _ in 0..n {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            edges.push((u, v, rng.gen_range(0.1..5.0)));
        }
        WeightedNetwork::new(n, edges).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn rayleigh_monotonicity(seed in 0u64..1000, n in 3usize..10, bump in 0.1f64..3.0) {
            let net = random_network(seed, n);
            let before = net.resistance_matrix().unwrap();
            let mut edges = net.edges().to_vec();
            let e = (seed as usize) % edges.len();
            edges[e].2 += bump;
            let after = WeightedNetwork::new(n, edges).unwrap().resistance_matrix().unwrap();
            for (a, b) in after.iter().zip(before.iter()) {
                prop_assert!(*a <= *b + 1e-10);
            }
        }

        #[test]
        fn potentials_are_harmonic(seed in 0u64..1000, n in 3usize..10) {
            let net = random_network(seed, n);
            let phi = net.potential(0, n - 1).unwrap();
            let mut num = vec![0.0; n];
            let mut den = vec![0.0; n];
            for &(u, v, c) in net.edges() {
                if u == v { continue; }
                num[u] += c * phi[v];
                den[u] += c;
                num[v] += c * phi[u];
                den[v] += c;
            }
            for x in 1..n - 1 {
                prop_assert!((phi[x] - num[x] / den[x]).abs() < 1e-10);
            }
        }

        #[test]
        fn sufficient_k_concentrates(values in proptest::collection::vec(0.0f64..3.0, 2..8), eps in 0.01f64..0.5) {
            let f = VertexDensity::new(values).unwrap();
            prop_assume!(f.unique_max() && f.f1() - f.f2() > 1e-3);
            let k = k_sufficient(&f, eps).unwrap();
            prop_assert!(f.powered_law(k)[f.argmax()] > 1.0 - eps);
        }
    }
}
