//! Star-of-walks multi-embedding for unweighted connected graphs.
//!
//! The target tree is a root joined by edges of weight `delta/2` (`delta` =
//! graph diameter) to the head of one unit-edge path per enumerated walk of
//! exactly `s` graph edges. Any source walk then realizes by stitching
//! together `ceil(l/s)` of these ready-made paths, paying one root crossing
//! per stitch: length at most `(2 + delta/s) * l` for walks of `l >= s`
//! edges, a constant once `s` is proportional to the diameter. The price is
//! target size: one path per walk, at most `n * d^s` of them for maximum
//! degree `d`.
//!
//! Points of the target are the path nodes (the root is structural and is
//! not a point). Distances: same path, count of unit edges between the two
//! positions; different paths, `depth_a + depth_b + delta`.

use crate::embed_ultra::{EmbedParams, MultiEmbedding, Target};
use crate::metric::{from_graph, Graph};
use crate::realize::{PointPath, RepPath};
use crate::{Error, Result};

/// Enumeration stops once the would-be node count passes this unless the
/// caller raises it.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

/// The star target: walks stored as source-vertex sequences, concatenated
/// into a flat point index space.
#[derive(Debug, Clone)]
pub struct StarTree {
    delta: f64,
    s: usize,
    paths: Vec<Vec<u32>>,
    /// `offsets[i]` is the point index of path i's head; a final entry holds
    /// the total point count.
    offsets: Vec<usize>,
}

impl StarTree {
    /// Assembles a star from its wire form. Paths must be nonempty vertex
    /// sequences of at most `s + 1` nodes; walk validity against a graph is
    /// the builder's concern, not a structural one.
    pub fn new(delta: f64, s: usize, paths: Vec<Vec<u32>>) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidInput(format!("bad star delta {delta}")));
        }
        if paths.is_empty() {
            return Err(Error::InvalidInput("star needs at least one path".into()));
        }
        if paths.iter().any(|p| p.is_empty() || p.len() > s + 1) {
            return Err(Error::InvalidInput(format!(
                "every star path needs 1..={} nodes",
                s + 1
            )));
        }
        let mut offsets = Vec::with_capacity(paths.len() + 1);
        let mut acc = 0;
        for p in &paths {
            offsets.push(acc);
            acc += p.len();
        }
        offsets.push(acc);
        Ok(StarTree {
            delta,
            s,
            paths,
            offsets,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn paths(&self) -> &[Vec<u32>] {
        &self.paths
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn point_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Point nodes plus the root.
    pub fn node_count(&self) -> usize {
        self.point_count() + 1
    }

    /// (path, position) of a point index.
    /// Maps a global point index to its `(path, position)` coordinates.
    pub fn locate(&self, idx: usize) -> Result<(usize, usize)> {
        if idx >= self.point_count() {
            return Err(Error::Lookup(format!(
                "star point {idx} out of range 0..{}",
                self.point_count()
            )));
        }
        let path = self.offsets.partition_point(|&o| o <= idx) - 1;
        Ok((path, idx - self.offsets[path]))
    }

    pub fn point_source(&self, idx: usize) -> usize {
        let (p, pos) = self.locate(idx).expect("index in range");
        self.paths[p][pos] as usize
    }

    pub fn distance(&self, a: usize, b: usize) -> Result<f64> {
        let (pa, ia) = self.locate(a)?;
        let (pb, ib) = self.locate(b)?;
        if pa == pb {
            Ok((ia as f64 - ib as f64).abs())
        } else {
            Ok(ia as f64 + ib as f64 + self.delta)
        }
    }

    /// Point index of `(path, position)`.
    pub fn point_at(&self, path: usize, pos: usize) -> usize {
        debug_assert!(pos < self.paths[path].len());
        self.offsets[path] + pos
    }

    /// First path (paths are sorted lexicographically) starting with
    /// `prefix`, if any.
    pub fn find_path_with_prefix(&self, prefix: &[u32]) -> Option<usize> {
        let at = self.paths.partition_point(|p| p.as_slice() < prefix);
        (at < self.paths.len() && self.paths[at].starts_with(prefix)).then_some(at)
    }
}

/// Counts walks of exactly `j` edges from each vertex for `j = 0..=s`.
/// Returns the per-vertex counts at `j = s`; any overflow past `u128` means
/// the budget is blown regardless.
fn walk_counts(adj: &[Vec<usize>], s: usize) -> Option<Vec<u128>> {
    let mut cur = vec![1u128; adj.len()];
    for _ in 0..s {
        let mut next = vec![0u128; adj.len()];
        for (v, nb) in adj.iter().enumerate() {
            for &u in nb {
                next[v] = next[v].checked_add(cur[u])?;
            }
        }
        cur = next;
    }
    Some(cur)
}

/// Builds the star-of-walks embedding of a connected unweighted graph:
/// every walk of exactly `s` edges becomes one unit-edge path under the
/// root (for a single-vertex graph, the one trivial walk). Enumeration is
/// refused if the target would exceed `node_budget` nodes.
pub fn build_path_star(g: &Graph, s: usize, node_budget: usize) -> Result<MultiEmbedding> {
    if s < 1 {
        return Err(Error::InvalidParameter("star needs s >= 1".into()));
    }
    if !g.is_unweighted() {
        return Err(Error::InvalidInput(
            "star construction needs an unweighted graph".into(),
        ));
    }
    let metric = from_graph(g)?; // errors if disconnected
    let n = g.n();
    let adj = g.adjacency();

    let paths: Vec<Vec<u32>> = if n == 1 {
        vec![vec![0]]
    } else {
        let counts =
            walk_counts(&adj, s).ok_or_else(|| Error::Budget("walk count overflows".into()))?;
        let total: u128 = counts.iter().sum();
        let nodes = total
            .checked_mul(s as u128 + 1)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| Error::Budget("walk count overflows".into()))?;
        if nodes > node_budget as u128 {
            return Err(Error::Budget(format!(
                "star would have {nodes} nodes, budget is {node_budget}"
            )));
        }
        let mut paths = Vec::with_capacity(total as usize);
        let mut walk = Vec::with_capacity(s + 1);
        // Iterative lexicographic DFS: starts ascend, neighbors ascend.
        for start in 0..n {
            walk.push(start as u32);
            let mut cursor = vec![0usize; 1];
            loop {
                let depth = walk.len() - 1;
                if depth == s {
                    paths.push(walk.clone());
                    walk.pop();
                    cursor.pop();
                    if walk.is_empty() {
                        break;
                    }
                    continue;
                }
                let v = *walk.last().unwrap() as usize;
                if cursor[depth] < adj[v].len() {
                    let u = adj[v][cursor[depth]];
                    cursor[depth] += 1;
                    walk.push(u as u32);
                    cursor.push(0);
                } else {
                    walk.pop();
                    cursor.pop();
                    if walk.is_empty() {
                        break;
                    }
                }
            }
        }
        paths
    };

    let delta = metric.diameter();
    let star = StarTree::new(delta, s, paths)?;
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for idx in 0..star.point_count() {
        fibers[star.point_source(idx)].push(idx);
    }
    MultiEmbedding::new(
        metric,
        Target::Star(star),
        fibers,
        EmbedParams::Star { s, delta },
    )
}

/// Realizes a source walk in a star target. The walk is cut into chunks of
/// `s` edges; each full chunk matches an enumerated path verbatim, the last
/// chunk is a prefix of one, and consecutive chunks connect by a single
/// tree hop through the root.
pub fn realize_in_star(me: &MultiEmbedding, p: &PointPath) -> Result<RepPath> {
    let star = me
        .target
        .as_star()
        .ok_or_else(|| Error::InvalidInput("realize_in_star expects a star target".into()))?;
    let n = me.source.n();
    if let Some(&bad) = p.seq.iter().find(|&&u| u >= n) {
        return Err(Error::InvalidInput(format!(
            "path point {bad} outside 0..{n}"
        )));
    }
    for w in p.seq.windows(2) {
        if me.source.dist(w[0], w[1]) != 1.0 {
            return Err(Error::InvalidInput(format!(
                "{} -> {} is not a graph edge; star realization needs a walk",
                w[0], w[1]
            )));
        }
    }
    let s = star.s();
    let l = p.seq.len() - 1;
    let chunks = l.div_ceil(s).max(1);
    let mut leaves = Vec::with_capacity(p.seq.len());
    for c in 0..chunks {
        let from = c * s;
        let to = ((c + 1) * s).min(l);
        // Positions from..to map onto one path; the chunk's end point is
        // either the walk's last point (kept) or the next chunk's head
        // (dropped here, represented there).
        let upto = if c + 1 < chunks { to - 1 } else { to };
        let prefix: Vec<u32> = p.seq[from..=to].iter().map(|&u| u as u32).collect();
        let path = star
            .find_path_with_prefix(&prefix)
            .ok_or_else(|| Error::Internal(format!("no star path starts with chunk {c}")))?;
        for pos in 0..=(upto - from) {
            leaves.push(star.point_at(path, pos));
        }
    }
    let mut length = 0.0;
    for w in leaves.windows(2) {
        length += star.distance(w[0], w[1])?;
    }
    Ok(RepPath { leaves, length })
}
