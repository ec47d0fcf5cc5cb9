//! Dense finite metric spaces and the graph inputs they come from.
//!
//! A [`MetricSpace`] stores the full `n x n` distance matrix row-major in
//! `f64`. Generated families are integral, which keeps every comparison made
//! by the embedding constructions exact; reductions that sum distances stay
//! inside the 2^53 exact-integer range at the scales this crate targets.

use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A finite metric space on points `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    d: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// An undirected weighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    unweighted: bool,
}

/// Everything [`validate`](MetricSpace::validate) can complain about.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    /// `d[i][j] != d[j][i]`.
    Asymmetry { i: usize, j: usize },
    /// `d[i][i] != 0`.
    NonzeroDiagonal { i: usize },
    /// `d[i][j] <= 0` for distinct `i`, `j`.
    NonPositive { i: usize, j: usize },
    /// `d[i][k] > d[i][j] + d[j][k]` beyond tolerance.
    Triangle { i: usize, j: usize, k: usize },
}

/// Validation outcome; empty `violations` means the matrix is a metric.
#[derive(Debug, Clone, Default)]
pub struct MetricReport {
    pub violations: Vec<MetricViolation>,
}

impl MetricReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Result of [`MetricSpace::diameter_anchor`]: a diameter pair ordered so
/// that the quarter-diameter ball around `anchor` holds at most half the
/// points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterAnchor {
    pub anchor: usize,
    pub far: usize,
    pub diameter: f64,
}

impl MetricSpace {
    /// Wraps a row-major distance matrix. Only shape and finiteness are
    /// enforced here so that [`validate`](Self::validate) can diagnose
    /// defective matrices; constructions assume a validated metric.
    pub fn new(n: usize, d: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("metric space needs n >= 1".into()));
        }
        if d.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "distance matrix has {} entries, expected {}",
                d.len(),
                n * n
            )));
        }
        if let Some(bad) = d.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "distance entry {} is not finite",
                bad
            )));
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{} labels for {} points",
                    l.len(),
                    n
                )));
            }
        }
        Ok(MetricSpace { n, d, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        self.d[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.d
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Largest pairwise distance (0 for a single point).
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Smallest strictly positive pairwise distance, if any.
    pub fn min_positive(&self) -> Option<f64> {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                if d > 0.0 && d < best {
                    best = d;
                }
            }
        }
        best.is_finite().then_some(best)
    }

    /// Diameter divided by the smallest positive distance. Bound formulas
    /// throughout the crate use this as the scale parameter. A space without
    /// positive distances has aspect ratio 1.
    pub fn aspect_ratio(&self) -> f64 {
        match self.min_positive() {
            Some(m) => self.diameter() / m,
            None => 1.0,
        }
    }

    /// True when every distance is an integer (exactly representable, so all
    /// shell and bound comparisons downstream are exact).
    pub fn is_integral(&self) -> bool {
        self.d
            .iter()
            .all(|x| x.fract() == 0.0 && x.abs() < 2f64.powi(53))
    }

    /// Full diagnostic: symmetry, zero diagonal, positivity, and the
    /// triangle inequality (checked to relative tolerance). O(n^3).
    pub fn validate(&self) -> MetricReport {
        let mut violations = Vec::new();
        for i in 0..self.n {
            if self.dist(i, i) != 0.0 {
                violations.push(MetricViolation::NonzeroDiagonal { i });
            }
            for j in (i + 1)..self.n {
                if self.dist(i, j) != self.dist(j, i) {
                    violations.push(MetricViolation::Asymmetry { i, j });
                }
                if self.dist(i, j) <= 0.0 {
                    violations.push(MetricViolation::NonPositive { i, j });
                }
            }
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let dij = self.dist(i, j);
                for k in 0..self.n {
                    if k == i || k == j {
                        continue;
                    }
                    if !crate::le_tol(self.dist(i, k), dij + self.dist(j, k)) {
                        violations.push(MetricViolation::Triangle { i, j, k });
                    }
                }
            }
        }
        MetricReport { violations }
    }

    /// Picks a diameter pair `(x, xbar)` with `|{y : d(x,y) < diam/4}| <=
    /// n/2`. At least one endpoint of any diameter pair qualifies because
    /// the two quarter-diameter balls are disjoint; if both qualify the
    /// smaller index wins, and among equal-distance pairs the
    /// lexicographically first is used.
    pub fn diameter_anchor(&self) -> Result<DiameterAnchor> {
        if self.n < 2 {
            return Err(Error::InvalidInput(
                "diameter anchor needs at least 2 points".into(),
            ));
        }
        let (mut bi, mut bj, mut diam) = (0, 1, self.dist(0, 1));
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.dist(i, j) > diam {
                    diam = self.dist(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        let ball = |x: usize| {
            (0..self.n)
                .filter(|&y| 4.0 * self.dist(x, y) < diam)
                .count()
        };
        let (ci, cj) = (2 * ball(bi) <= self.n, 2 * ball(bj) <= self.n);
        let (anchor, far) = match (ci, cj) {
            (true, _) => (bi, bj),
            (false, true) => (bj, bi),
            (false, false) => {
                return Err(Error::Internal(
                    "no diameter endpoint has a small quarter ball".into(),
                ))
            }
        };
        Ok(DiameterAnchor {
            anchor,
            far,
            diameter: diam,
        })
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints, and
    /// non-positive or non-finite weights. Parallel edges are allowed; the
    /// shortest-path closure simply keeps the lighter one. With `unweighted`
    /// set, every weight must be exactly 1.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, unweighted: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("graph needs n >= 1".into()));
        }
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "edge ({u},{v}) has invalid weight {w}"
                )));
            }
            if unweighted && w != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "unweighted graph has edge ({u},{v}) of weight {w}"
                )));
            }
        }
        Ok(Graph {
            n,
            edges,
            unweighted,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    /// Neighbor lists sorted ascending (and deduplicated), so every walk
    /// enumeration downstream is canonical.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, _) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut cnt = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    cnt += 1;
                    stack.push(v);
                }
            }
        }
        cnt == self.n
    }

    /// Maximum degree.
    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// One shortest path `u .. v` by Dijkstra; ties resolved toward smaller
    /// predecessor ids so the route is deterministic.
    pub fn shortest_path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        if u >= self.n || v >= self.n {
            return Err(Error::Lookup(format!("vertex out of range: {u} or {v}")));
        }
        let mut wadj = vec![Vec::new(); self.n];
        for &(a, b, w) in &self.edges {
            wadj[a].push((b, w));
            wadj[b].push((a, w));
        }
        for l in &mut wadj {
            l.sort_by_key(|a| a.0);
        }
        let mut dist = vec![f64::INFINITY; self.n];
        let mut prev = vec![usize::MAX; self.n];
        let mut done = vec![false; self.n];
        dist[u] = 0.0;
        for _ in 0..self.n {
            let mut cur = usize::MAX;
            let mut best = f64::INFINITY;
            for x in 0..self.n {
                if !done[x] && dist[x] < best {
                    best = dist[x];
                    cur = x;
                }
            }
            if cur == usize::MAX {
                break;
            }
            done[cur] = true;
            for &(y, w) in &wadj[cur] {
                let cand = dist[cur] + w;
                if cand < dist[y] || (cand == dist[y] && cur < prev[y]) {
                    dist[y] = cand;
                    prev[y] = cur;
                }
            }
        }
        if !dist[v].is_finite() {
            return Err(Error::InvalidInput(format!("no path from {u} to {v}")));
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }
}

/// Shortest-path closure of a connected graph into a [`MetricSpace`].
/// Floyd-Warshall, O(n^3); fine at this crate's scales.
pub fn from_graph(g: &Graph) -> Result<MetricSpace> {
    let n = g.n;
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for &(u, v, w) in &g.edges {
        if w < d[u * n + v] {
            d[u * n + v] = w;
            d[v * n + u] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k * n + j];
                if cand < d[i * n + j] {
                    d[i * n + j] = cand;
                }
            }
        }
    }
    if let Some(bad) = d.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "graph is disconnected: no path between {} and {}",
            bad / n,
            bad % n
        )));
    }
    MetricSpace::new(n, d, None)
}

/// Input families used by the test suites and the CLI generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    /// Path graph on `n` vertices, unit edges.
    Path { n: usize },
    /// Cycle on `n >= 3` vertices, unit edges.
    Cycle { n: usize },
    /// Hypercube of dimension `h >= 1` (`2^h` vertices), unit edges.
    Hypercube { h: u32 },
    /// Random simple connected `deg`-regular graph via the pairing model.
    RandomRegular { n: usize, deg: usize },
    /// Complete graph with uniform integer weights in `1..=10`, then
    /// shortest-path closure. Integer weights keep the closure integral, so
    /// every downstream comparison is exact, and validity needs no
    /// rejection sampling.
    RandomMetric { n: usize },
}

/// Generator output: graph families stay graphs (so star embeddings can see
/// adjacency); `random_metric` is born a metric.
#[derive(Debug, Clone)]
pub enum Generated {
    Graph(Graph),
    Metric(MetricSpace),
}

impl Generated {
    /// The induced metric either way.
    pub fn metric(&self) -> Result<MetricSpace> {
        match self {
            Generated::Graph(g) => from_graph(g),
            Generated::Metric(m) => Ok(m.clone()),
        }
    }
}

/// Deterministic per (spec, seed); the seed only matters for the random
/// families.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Generated> {
    match *spec {
        GenSpec::Path { n } => {
            if n < 1 {
                return Err(Error::InvalidParameter("path needs n >= 1".into()));
            }
            let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect();
            Ok(Generated::Graph(Graph::new(n, edges, true)?))
        }
        GenSpec::Cycle { n } => {
            if n < 3 {
                return Err(Error::InvalidParameter("cycle needs n >= 3".into()));
            }
            let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
            edges.push((n - 1, 0, 1.0));
            Ok(Generated::Graph(Graph::new(n, edges, true)?))
        }
        GenSpec::Hypercube { h } => {
            if !(1..=20).contains(&h) {
                return Err(Error::InvalidParameter(
                    "hypercube needs 1 <= h <= 20".into(),
                ));
            }
            let n = 1usize << h;
            let mut edges = Vec::with_capacity(n * h as usize / 2);
            for v in 0..n {
                for b in 0..h {
                    let u = v ^ (1 << b);
                    if v < u {
                        edges.push((v, u, 1.0));
                    }
                }
            }
            Ok(Generated::Graph(Graph::new(n, edges, true)?))
        }
        GenSpec::RandomRegular { n, deg } => Ok(Generated::Graph(random_regular(n, deg, seed)?)),
        GenSpec::RandomMetric { n } => Ok(Generated::Metric(random_metric(n, seed)?)),
    }
}

fn random_regular(n: usize, deg: usize, seed: u64) -> Result<Graph> {
    if n == 0 || deg == 0 || deg >= n || !(n * deg).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "no simple {deg}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, deg)).collect();
    // Pairing model with rejection: at these degrees the simple+connected
    // probability is bounded away from zero, so a few hundred attempts is
    // already extremely conservative.
    for _ in 0..1000 {
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(n * deg / 2);
        let mut ok = true;
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                ok = false;
                break;
            }
            edges.push((u, v, 1.0));
        }
        if !ok {
            continue;
        }
        let g = Graph::new(n, edges, true)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::InvalidInput(format!(
        "failed to sample a connected {deg}-regular graph on {n} vertices"
    )))
}

fn random_metric(n: usize, seed: u64) -> Result<MetricSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("random metric needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, rng.gen_range(1..=10) as f64));
        }
    }
    if n == 1 {
        return MetricSpace::new(1, vec![0.0], None);
    }
    from_graph(&Graph::new(n, edges, false)?)
}
