//! Group Steiner tree instances and solvers.
//!
//! An instance asks for a cheapest tree touching at least one vertex of every
//! group. [`reduce_gst`] carries an instance across a multi-embedding by
//! replacing each group with the union of its members' fibers;
//! [`project_solution`] maps a target solution back to the source and can
//! only get cheaper. Exact solvers exist for both tree-shaped targets
//! ([`solve_tree_exact`]) and small general metrics ([`exact_oracle`]), plus
//! a greedy approximation for star targets ([`greedy_star_solver`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::embed_tree::StarTree;
use crate::embed_ultra::{MultiEmbedding, Target};
use crate::error::{Error, Result};
use crate::metric::{from_graph, Graph, MetricSpace};
use crate::ultrametric::UltraTree;

/// Default cap on the number of groups the tree-exact solver accepts; its
/// tables grow as `3^k`.
pub const GROUP_BUDGET: usize = 14;

/// Default cap on the product of group sizes enumerated by [`exact_oracle`].
pub const ORACLE_BUDGET: u64 = 100_000;

/// The oracle is exponential in the vertex count; refuse anything larger.
const ORACLE_N_CAP: usize = 20;

/// Most distinct terminals a single oracle subproblem may carry.
const TERMINAL_CAP: usize = 16;

/// Cap on `node_count * 2^k` table entries in the hierarchy solver.
const TABLE_CAP: usize = 50_000_000;

/// Cap on `paths * path_len * 3^k` work in the star solver.
const STAR_WORK_CAP: usize = 200_000_000;

/// Ground space of an instance: a plain metric, or a connected graph whose
/// shortest-path closure supplies the distances. Graph-backed instances get
/// their projected solutions expanded back into actual graph edges.
#[derive(Debug, Clone)]
pub enum GstSpace {
    Metric(MetricSpace),
    Graph(Graph),
}

/// A group Steiner instance: a space and `k >= 1` nonempty vertex groups.
#[derive(Debug, Clone)]
pub struct GstInstance {
    space: GstSpace,
    metric: MetricSpace,
    groups: Vec<Vec<usize>>,
}

impl GstInstance {
    /// Validates the groups and eagerly materializes the metric (for graphs,
    /// the shortest-path closure). Groups are stored sorted and deduplicated.
    pub fn new(space: GstSpace, groups: Vec<Vec<usize>>) -> Result<Self> {
        let metric = match &space {
            GstSpace::Metric(m) => m.clone(),
            GstSpace::Graph(g) => from_graph(g)?,
        };
        if groups.is_empty() {
            return Err(Error::InvalidInput(
                "an instance needs at least one group".into(),
            ));
        }
        let n = metric.n();
        let mut cleaned = Vec::with_capacity(groups.len());
        for (i, g) in groups.into_iter().enumerate() {
            let mut g = g;
            g.sort_unstable();
            g.dedup();
            if g.is_empty() {
                return Err(Error::InvalidInput(format!("group {i} is empty")));
            }
            if *g.last().unwrap() >= n {
                return Err(Error::InvalidInput(format!(
                    "group {i} names vertex {} outside 0..{n}",
                    g.last().unwrap()
                )));
            }
            cleaned.push(g);
        }
        Ok(Self {
            space,
            metric,
            groups: cleaned,
        })
    }

    pub fn space(&self) -> &GstSpace {
        &self.space
    }

    /// The instance's distances (the closure, for graph-backed instances).
    pub fn metric(&self) -> &MetricSpace {
        &self.metric
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }
}

/// A tree in some space: its vertex list (sorted), edge list, and total edge
/// cost. A single vertex with no edges is the degenerate tree of cost zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerSolution {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Groups of an instance rewritten over the target points of an embedding.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ReducedGst {
    pub groups: Vec<Vec<usize>>,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Checks that `sol` is a tree over its stated vertices, that its recorded
/// cost matches `dist`, and that every group is touched.
pub fn verify_solution(
    sol: &SteinerSolution,
    groups: &[Vec<usize>],
    dist: impl Fn(usize, usize) -> Result<f64>,
) -> Result<()> {
    if sol.vertices.is_empty() {
        return Err(Error::InvalidInput("solution has no vertices".into()));
    }
    if sol.vertices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "solution vertices not sorted and unique".into(),
        ));
    }
    if sol.edges.len() + 1 != sol.vertices.len() {
        return Err(Error::InvalidInput(format!(
            "{} edges cannot form a tree on {} vertices",
            sol.edges.len(),
            sol.vertices.len()
        )));
    }
    let rank = |v: usize| -> Result<usize> {
        sol.vertices
            .binary_search(&v)
            .map_err(|_| Error::InvalidInput(format!("edge endpoint {v} not a solution vertex")))
    };
    let mut dsu = Dsu::new(sol.vertices.len());
    let mut cost = 0.0;
    for &(u, v) in &sol.edges {
        let (ru, rv) = (rank(u)?, rank(v)?);
        if !dsu.union(ru, rv) {
            return Err(Error::InvalidInput(format!(
                "edge ({u}, {v}) closes a cycle"
            )));
        }
        cost += dist(u, v)?;
    }
    if !(crate::le_tol(cost, sol.cost) && crate::ge_tol(cost, sol.cost)) {
        return Err(Error::Mismatch(format!(
            "recorded cost {} but edges sum to {cost}",
            sol.cost
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if !g.iter().any(|x| sol.vertices.binary_search(x).is_ok()) {
            return Err(Error::InvalidInput(format!("group {i} is not covered")));
        }
    }
    Ok(())
}

/// Rewrites each group as the union of its members' fibers. The instance must
/// live on the embedding's source space; sizes or distances that disagree are
/// refused.
pub fn reduce_gst(me: &MultiEmbedding, inst: &GstInstance) -> Result<ReducedGst> {
    let m = inst.metric();
    if m.n() != me.source.n() || m.matrix() != me.source.matrix() {
        return Err(Error::Mismatch(
            "instance space differs from the embedding's source".into(),
        ));
    }
    let mut groups = Vec::with_capacity(inst.k());
    for g in inst.groups() {
        let mut out = Vec::new();
        for &x in g {
            out.extend_from_slice(me.fiber(x)?);
        }
        out.sort_unstable();
        groups.push(out);
    }
    Ok(ReducedGst { groups })
}

fn validate_groups(groups: &[Vec<usize>], points: usize, budget: usize) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::InvalidInput("no groups to cover".into()));
    }
    if groups.len() > budget {
        return Err(Error::Budget(format!(
            "{} groups exceed the solver budget {budget}",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::InvalidInput(format!("group {i} is empty")));
        }
        if g.iter().any(|&x| x >= points) {
            return Err(Error::InvalidInput(format!(
                "group {i} names a point outside 0..{points}"
            )));
        }
    }
    Ok(())
}

/// Exact optimum over a tree-shaped target's points. Hierarchical targets
/// get a subset DP over the merge structure; star targets an enumeration of
/// the junction path and its interval. `budget` caps the group count
/// ([`GROUP_BUDGET`] by default).
pub fn solve_tree_exact(
    target: &Target,
    groups: &[Vec<usize>],
    budget: usize,
) -> Result<SteinerSolution> {
    validate_groups(groups, target.point_count(), budget)?;
    match target {
        Target::Ultra(tree) => solve_ultra_exact(tree, groups),
        Target::Star(star) => solve_star_exact(star, groups),
    }
}

/// Builds a minimum spanning tree over `points` under `dist` (Prim, smallest
/// index wins ties). Returns normalized sorted edges and the total weight.
fn mst_over_points(
    points: &[usize],
    dist: &impl Fn(usize, usize) -> Result<f64>,
) -> Result<(Vec<(usize, usize)>, f64)> {
    let c = points.len();
    if c <= 1 {
        return Ok((Vec::new(), 0.0));
    }
    let mut intree = vec![false; c];
    intree[0] = true;
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); c];
    for (j, b) in best.iter_mut().enumerate().skip(1) {
        *b = (dist(points[0], points[j])?, 0);
    }
    let mut edges = Vec::with_capacity(c - 1);
    let mut cost = 0.0;
    for _ in 1..c {
        let mut pick = usize::MAX;
        for j in 0..c {
            if !intree[j] && (pick == usize::MAX || best[j].0 < best[pick].0) {
                pick = j;
            }
        }
        intree[pick] = true;
        cost += best[pick].0;
        let (a, b) = (points[best[pick].1], points[pick]);
        edges.push((a.min(b), a.max(b)));
        for j in 0..c {
            if !intree[j] {
                let d = dist(points[pick], points[j])?;
                if d < best[j].0 {
                    best[j] = (d, pick);
                }
            }
        }
    }
    edges.sort_unstable();
    Ok((edges, cost))
}

/// One merge step of the hierarchy DP: folds a child's table into the
/// accumulated table, joining clusters at this node's label. Kept as a single
/// function so the reconstruction pass re-evaluates bit-identical sums.
fn merge_row(acc: &[f64], child: &[f64], label: f64) -> Vec<f64> {
    let full = acc.len() - 1;
    let mut next = vec![f64::INFINITY; full + 1];
    for (m, slot) in next.iter_mut().enumerate() {
        let mut best = acc[m].min(child[m]);
        let mut sub = m;
        while sub > 0 {
            let rest = m & !sub;
            if rest != 0 {
                let cand = acc[sub] + child[rest] + label;
                if cand < best {
                    best = cand;
                }
            }
            sub = (sub - 1) & m;
        }
        *slot = best;
    }
    next
}

/// Subset DP on the hierarchy: `dp[v][m]` is the cheapest leaf cluster under
/// `v` covering at least the groups in `m`, where merging clusters from
/// distinct children of `v` pays `label(v)` per extra cluster (exactly the
/// spanning cost at that merge height). Reconstruction re-derives each
/// node's intermediate tables, so only one table per node is stored.
fn solve_ultra_exact(tree: &UltraTree, groups: &[Vec<usize>]) -> Result<SteinerSolution> {
    let k = groups.len();
    let size = 1usize << k;
    let full = size - 1;
    if tree.node_count().saturating_mul(size) > TABLE_CAP {
        return Err(Error::Budget(format!(
            "{} nodes x 2^{k} masks exceeds the table cap",
            tree.node_count()
        )));
    }
    let mut leaf_mask = vec![0usize; tree.node_count()];
    for (gi, g) in groups.iter().enumerate() {
        for &leaf in g {
            leaf_mask[tree.leaf_node(leaf)] |= 1 << gi;
        }
    }

    // Children carry smaller ids than parents, so one forward pass fills all
    // tables bottom-up.
    let mut dp: Vec<Vec<f64>> = Vec::with_capacity(tree.node_count());
    for (id, &mask) in leaf_mask.iter().enumerate() {
        let row = if tree.is_leaf(id) {
            (0..size)
                .map(|m| if m & !mask == 0 { 0.0 } else { f64::INFINITY })
                .collect()
        } else {
            let node = tree.node(id);
            let mut acc = dp[node.children[0]].clone();
            for &c in &node.children[1..] {
                acc = merge_row(&acc, &dp[c], node.label);
            }
            acc
        };
        dp.push(row);
    }

    let opt = dp[tree.root()][full];
    if !opt.is_finite() {
        return Err(Error::Internal(
            "connected tree left a group unreachable".into(),
        ));
    }

    let mut chosen = Vec::new();
    collect_cluster(tree, &dp, &leaf_mask, tree.root(), full, &mut chosen)?;
    chosen.sort_unstable();
    let dist = |a: usize, b: usize| tree.tree_distance(a, b);
    let (edges, cost) = mst_over_points(&chosen, &dist)?;
    if !(crate::le_tol(cost, opt) && crate::ge_tol(cost, opt)) {
        return Err(Error::Internal(format!(
            "reconstructed spanning cost {cost} disagrees with optimum {opt}"
        )));
    }
    Ok(SteinerSolution {
        vertices: chosen,
        edges,
        cost,
    })
}

/// Walks one optimal choice chain back down the hierarchy, appending the
/// chosen leaf indices. Re-runs [`merge_row`] per visited node and matches
/// candidates by exact equality against the stored optimum.
fn collect_cluster(
    tree: &UltraTree,
    dp: &[Vec<f64>],
    leaf_mask: &[usize],
    id: usize,
    mask: usize,
    out: &mut Vec<usize>,
) -> Result<()> {
    if mask == 0 {
        return Err(Error::Internal("empty cover requested".into()));
    }
    if tree.is_leaf(id) {
        if mask & !leaf_mask[id] != 0 {
            return Err(Error::Internal(
                "leaf cannot cover the requested groups".into(),
            ));
        }
        out.push(tree.leaf_index(id).expect("node is a leaf"));
        return Ok(());
    }
    let node = tree.node(id);
    let mut accs: Vec<Vec<f64>> = Vec::with_capacity(node.children.len());
    accs.push(dp[node.children[0]].clone());
    for &c in &node.children[1..] {
        let next = merge_row(accs.last().unwrap(), &dp[c], node.label);
        accs.push(next);
    }
    let mut step = node.children.len() - 1;
    let mut mask = mask;
    loop {
        if step == 0 {
            return collect_cluster(tree, dp, leaf_mask, node.children[0], mask, out);
        }
        let cur = accs[step][mask];
        if accs[step - 1][mask] == cur {
            step -= 1;
            continue;
        }
        let child = node.children[step];
        if dp[child][mask] == cur {
            return collect_cluster(tree, dp, leaf_mask, child, mask, out);
        }
        let mut sub = mask;
        let mut advanced = false;
        while sub > 0 {
            let rest = mask & !sub;
            if rest != 0 && accs[step - 1][sub] + dp[child][rest] + node.label == cur {
                collect_cluster(tree, dp, leaf_mask, child, rest, out)?;
                mask = sub;
                step -= 1;
                advanced = true;
                break;
            }
            sub = (sub - 1) & mask;
        }
        if !advanced {
            return Err(Error::Internal(
                "optimum not reproducible from tables".into(),
            ));
        }
    }
}

/// Exact optimum on a star target. Any tree in a star metric normalizes to
/// one junction path carrying an interval `[a, b]`, with every other used
/// path contributing one interval hung off position `a` through the hub; the
/// solver enumerates the junction and `a`, covers the remaining groups by a
/// partition DP over per-path interval costs, then sweeps `b`.
fn solve_star_exact(star: &StarTree, groups: &[Vec<usize>]) -> Result<SteinerSolution> {
    let k = groups.len();
    let size = 1usize << k;
    let full = size - 1;
    let np = star.path_count();
    let delta = star.delta();
    let max_len = star.paths().iter().map(Vec::len).max().unwrap();
    let work = np
        .saturating_mul(max_len)
        .saturating_mul(3usize.saturating_pow(k as u32));
    if work > STAR_WORK_CAP {
        return Err(Error::Budget(format!(
            "{np} paths x {max_len} positions x 3^{k} partitions exceeds the work cap"
        )));
    }

    // minpos[q][g]: first position of group g on path q (MAX when absent).
    // bits_at[q][pos]: groups with a member at that exact position.
    let mut minpos = vec![vec![usize::MAX; k]; np];
    let mut bits_at: Vec<Vec<usize>> = star.paths().iter().map(|p| vec![0; p.len()]).collect();
    for (gi, g) in groups.iter().enumerate() {
        for &pt in g {
            let (q, pos) = star.locate(pt)?;
            minpos[q][gi] = minpos[q][gi].min(pos);
            bits_at[q][pos] |= 1 << gi;
        }
    }

    // Cheapest interval endpoint per group subset: f_q[s] = max over g in s
    // of minpos[q][g]. Keep the two best paths per subset so the junction
    // path can always be excluded.
    let mut best1 = vec![(usize::MAX, usize::MAX); size];
    let mut best2 = vec![(usize::MAX, usize::MAX); size];
    let mut fq = vec![0usize; size];
    for (q, mp) in minpos.iter().enumerate() {
        for m in 1..size {
            let low = m & m.wrapping_neg();
            let g = low.trailing_zeros() as usize;
            fq[m] = fq[m ^ low].max(mp[g]);
        }
        for m in 1..size {
            if fq[m] < best1[m].0 {
                best2[m] = best1[m];
                best1[m] = (fq[m], q);
            } else if fq[m] < best2[m].0 {
                best2[m] = (fq[m], q);
            }
        }
    }
    let link_for = |s: usize, hub: usize| -> (usize, usize) {
        if best1[s].1 != hub {
            best1[s]
        } else {
            best2[s]
        }
    };

    let fill_dp = |hub: usize, a: usize, dp: &mut Vec<f64>| {
        dp[0] = 0.0;
        for m in 1..size {
            let mut best = f64::INFINITY;
            let mut sub = m;
            while sub > 0 {
                let (link, _) = link_for(sub, hub);
                if link != usize::MAX {
                    let cand = dp[m & !sub] + (delta + a as f64 + link as f64);
                    if cand < best {
                        best = cand;
                    }
                }
                sub = (sub - 1) & m;
            }
            dp[m] = best;
        }
    };

    let mut winner: Option<(f64, usize, usize, usize)> = None;
    let mut dp = vec![f64::INFINITY; size];
    for (h, bits_h) in bits_at.iter().enumerate() {
        for a in 0..bits_h.len() {
            fill_dp(h, a, &mut dp);
            let mut covered = 0usize;
            for (b, &bits) in bits_h.iter().enumerate().skip(a) {
                covered |= bits;
                let rem = full & !covered;
                let total = (b - a) as f64 + dp[rem];
                if total.is_finite() && winner.is_none_or(|(w, ..)| total < w) {
                    winner = Some((total, h, a, b));
                }
            }
        }
    }
    let (opt, h, a, b) =
        winner.ok_or_else(|| Error::Internal("no covering configuration found".into()))?;

    // Re-run the winning junction's DP and peel off its partition, merging
    // chunks that land on the same path into one interval.
    fill_dp(h, a, &mut dp);
    let mut covered = 0usize;
    for &bits in &bits_at[h][a..=b] {
        covered |= bits;
    }
    let mut per_path: BTreeMap<usize, usize> = BTreeMap::new();
    let mut m = full & !covered;
    while m > 0 {
        let mut sub = m;
        let mut advanced = false;
        while sub > 0 {
            let (link, q) = link_for(sub, h);
            if link != usize::MAX && dp[m & !sub] + (delta + a as f64 + link as f64) == dp[m] {
                *per_path.entry(q).or_insert(0) |= sub;
                m &= !sub;
                advanced = true;
                break;
            }
            sub = (sub - 1) & m;
        }
        if !advanced {
            return Err(Error::Internal(
                "optimum not reproducible from tables".into(),
            ));
        }
    }

    let mut vertices: BTreeSet<usize> = BTreeSet::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let span = |q: usize,
                lo: usize,
                hi: usize,
                vs: &mut BTreeSet<usize>,
                es: &mut BTreeSet<(usize, usize)>| {
        for pos in lo..=hi {
            vs.insert(star.point_at(q, pos));
            if pos > lo {
                let (x, y) = (star.point_at(q, pos - 1), star.point_at(q, pos));
                es.insert((x.min(y), x.max(y)));
            }
        }
    };
    span(h, a, b, &mut vertices, &mut edges);
    for (&q, &s) in &per_path {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for (g, &first) in minpos[q].iter().enumerate() {
            if s & (1 << g) != 0 {
                lo = lo.min(first);
                hi = hi.max(first);
            }
        }
        span(q, lo, hi, &mut vertices, &mut edges);
        let (x, y) = (star.point_at(q, lo), star.point_at(h, a));
        edges.insert((x.min(y), x.max(y)));
    }

    let mut cost = 0.0;
    for &(u, v) in &edges {
        cost += star.distance(u, v)?;
    }
    if !crate::le_tol(cost, opt) {
        return Err(Error::Internal(format!(
            "assembled cost {cost} exceeds computed optimum {opt}"
        )));
    }
    Ok(SteinerSolution {
        vertices: vertices.into_iter().collect(),
        edges: edges.into_iter().collect(),
        cost,
    })
}

/// Greedy set-cover over paths: repeatedly take the path hitting the most
/// uncovered groups (smallest index on ties).
fn greedy_hitting_set(path_masks: &[usize], full: usize) -> Option<Vec<usize>> {
    let mut uncovered = full;
    let mut picked = Vec::new();
    while uncovered != 0 {
        let mut best = 0;
        let mut arg = usize::MAX;
        for (q, &mask) in path_masks.iter().enumerate() {
            let gain = (mask & uncovered).count_ones();
            if gain as usize > best {
                best = gain as usize;
                arg = q;
            }
        }
        if arg == usize::MAX {
            return None;
        }
        picked.push(arg);
        uncovered &= !path_masks[arg];
    }
    picked.sort_unstable();
    Some(picked)
}

/// Approximate star solver: the better of (a) the smallest single-path
/// window covering every group and (b) a greedy path cover traversed end to
/// end with the selected paths' heads chained through the hub.
pub fn greedy_star_solver(star: &StarTree, groups: &[Vec<usize>]) -> Result<SteinerSolution> {
    validate_groups(groups, star.point_count(), usize::BITS as usize - 1)?;
    let k = groups.len();
    let full = (1usize << k) - 1;
    let np = star.path_count();
    let delta = star.delta();

    let mut events: Vec<Vec<(usize, usize)>> = vec![Vec::new(); np];
    let mut path_masks = vec![0usize; np];
    for (gi, g) in groups.iter().enumerate() {
        for &pt in g {
            let (q, pos) = star.locate(pt)?;
            events[q].push((pos, gi));
            path_masks[q] |= 1 << gi;
        }
    }

    // Phase one: smallest covering window on any single path.
    let mut window: Option<(f64, usize, usize, usize)> = None;
    for q in 0..np {
        if path_masks[q] != full {
            continue;
        }
        let evs = &mut events[q];
        evs.sort_unstable();
        let mut counts = vec![0usize; k];
        let mut have = 0;
        let mut l = 0;
        for r in 0..evs.len() {
            counts[evs[r].1] += 1;
            if counts[evs[r].1] == 1 {
                have += 1;
            }
            while have == k {
                let cost = (evs[r].0 - evs[l].0) as f64;
                if window.is_none_or(|(w, ..)| cost < w) {
                    window = Some((cost, q, evs[l].0, evs[r].0));
                }
                counts[evs[l].1] -= 1;
                if counts[evs[l].1] == 0 {
                    have -= 1;
                }
                l += 1;
            }
        }
    }

    // Phase two: greedy path cover.
    let picked = greedy_hitting_set(&path_masks, full)
        .ok_or_else(|| Error::Internal("validated groups left a group unhittable".into()))?;
    let cover_cost: f64 = picked
        .iter()
        .map(|&q| (star.paths()[q].len() - 1) as f64)
        .sum::<f64>()
        + (picked.len() - 1) as f64 * delta;

    let mut vertices = BTreeSet::new();
    let mut edges = BTreeSet::new();
    if window.is_some_and(|(w, ..)| crate::le_tol(w, cover_cost)) || picked.is_empty() {
        let (_, q, lo, hi) = window.unwrap();
        for pos in lo..=hi {
            vertices.insert(star.point_at(q, pos));
            if pos > lo {
                let (x, y) = (star.point_at(q, pos - 1), star.point_at(q, pos));
                edges.insert((x.min(y), x.max(y)));
            }
        }
    } else {
        for &q in &picked {
            for pos in 0..star.paths()[q].len() {
                vertices.insert(star.point_at(q, pos));
                if pos > 0 {
                    let (x, y) = (star.point_at(q, pos - 1), star.point_at(q, pos));
                    edges.insert((x.min(y), x.max(y)));
                }
            }
        }
        for w in picked.windows(2) {
            let (x, y) = (star.point_at(w[0], 0), star.point_at(w[1], 0));
            edges.insert((x.min(y), x.max(y)));
        }
    }
    let mut cost = 0.0;
    for &(u, v) in &edges {
        cost += star.distance(u, v)?;
    }
    Ok(SteinerSolution {
        vertices: vertices.into_iter().collect(),
        edges: edges.into_iter().collect(),
        cost,
    })
}

/// How an optimal subtree for `(terminal subset, root vertex)` was formed.
#[derive(Clone, Copy)]
enum TreeChoice {
    /// Direct edge from the root vertex to the named terminal.
    Base(usize),
    /// Two subtrees for the recorded submask and its complement, both rooted
    /// here.
    Merge(usize),
}

/// Brute-force optimum over a general metric: enumerates one representative
/// per group and solves each resulting terminal set by the classic subset
/// DP, memoizing by terminal set. Exponential; guarded by `budget` on the
/// product of group sizes and a hard vertex cap.
pub fn exact_oracle(inst: &GstInstance, budget: u64) -> Result<SteinerSolution> {
    let m = inst.metric();
    if m.n() > ORACLE_N_CAP {
        return Err(Error::Budget(format!(
            "{} vertices exceed the oracle cap {ORACLE_N_CAP}",
            m.n()
        )));
    }
    let within = inst
        .groups()
        .iter()
        .try_fold(1u64, |acc, g| acc.checked_mul(g.len() as u64))
        .is_some_and(|p| p <= budget);
    if !within {
        return Err(Error::Budget(format!(
            "representative tuples exceed the budget {budget}"
        )));
    }

    let mut memo: HashMap<Vec<usize>, SteinerSolution> = HashMap::new();
    let mut best: Option<SteinerSolution> = None;
    let mut idx = vec![0usize; inst.k()];
    loop {
        let terminals: BTreeSet<usize> =
            idx.iter().zip(inst.groups()).map(|(&i, g)| g[i]).collect();
        let key: Vec<usize> = terminals.into_iter().collect();
        let sol = match memo.get(&key) {
            Some(s) => s.clone(),
            None => {
                let s = steiner_subset_dp(m, &key)?;
                memo.insert(key, s.clone());
                s
            }
        };
        let better = match &best {
            None => true,
            Some(b) => sol.cost < b.cost || (sol.cost == b.cost && sol.vertices < b.vertices),
        };
        if better {
            best = Some(sol);
        }

        let mut pos = inst.k();
        while pos > 0 {
            idx[pos - 1] += 1;
            if idx[pos - 1] < inst.groups()[pos - 1].len() {
                break;
            }
            idx[pos - 1] = 0;
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
    }
    best.ok_or_else(|| Error::Internal("no representative tuple produced a tree".into()))
}

/// Optimal Steiner tree for a fixed terminal set over a metric (subset DP on
/// the closure, where one relaxation step per subset suffices because the
/// distances already satisfy the triangle inequality).
fn steiner_subset_dp(m: &MetricSpace, terminals: &[usize]) -> Result<SteinerSolution> {
    let tk = terminals.len();
    if tk == 0 {
        return Err(Error::InvalidInput("no terminals".into()));
    }
    if tk == 1 {
        return Ok(SteinerSolution {
            vertices: vec![terminals[0]],
            edges: Vec::new(),
            cost: 0.0,
        });
    }
    if tk > TERMINAL_CAP {
        return Err(Error::Budget(format!(
            "{tk} distinct terminals exceed the cap {TERMINAL_CAP}"
        )));
    }
    let n = m.n();
    let size = 1usize << tk;
    let mut dp = vec![vec![f64::INFINITY; n]; size];
    let mut tch = vec![vec![TreeChoice::Base(usize::MAX); n]; size];
    // via[s][v]: vertex the subtree was pulled from by one closure edge, or
    // v itself.
    let mut via = vec![vec![usize::MAX; n]; size];
    for (i, &t) in terminals.iter().enumerate() {
        let s = 1usize << i;
        for v in 0..n {
            dp[s][v] = m.dist(t, v);
            tch[s][v] = TreeChoice::Base(t);
            via[s][v] = v;
        }
    }
    let mut tmp = vec![0.0f64; n];
    let mut tmpc = vec![TreeChoice::Base(usize::MAX); n];
    for s in 1..size {
        if s.count_ones() < 2 {
            continue;
        }
        for v in 0..n {
            tmp[v] = f64::INFINITY;
            let mut a = (s - 1) & s;
            while a > 0 {
                let b = s & !a;
                if a < b {
                    let cand = dp[a][v] + dp[b][v];
                    if cand < tmp[v] {
                        tmp[v] = cand;
                        tmpc[v] = TreeChoice::Merge(a);
                    }
                }
                a = (a - 1) & s;
            }
        }
        for v in 0..n {
            let mut bestv = tmp[v];
            let mut bestu = v;
            for (u, &tu) in tmp.iter().enumerate() {
                let cand = tu + m.dist(u, v);
                if cand < bestv {
                    bestv = cand;
                    bestu = u;
                }
            }
            dp[s][v] = bestv;
            via[s][v] = bestu;
        }
        // The merge choice belongs to the vertex the subtree was pulled
        // from, so it is recorded per vertex, not per pull target.
        tch[s].copy_from_slice(&tmpc);
    }

    let full = size - 1;
    let mut root = 0;
    for v in 1..n {
        if dp[full][v] < dp[full][root] {
            root = v;
        }
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut stack = vec![(full, root)];
    while let Some((s, v)) = stack.pop() {
        let u = via[s][v];
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
        match tch[s][u] {
            TreeChoice::Base(t) => {
                if t != u {
                    edges.insert((t.min(u), t.max(u)));
                }
            }
            TreeChoice::Merge(a) => {
                stack.push((a, u));
                stack.push((s & !a, u));
            }
        }
    }
    let mut vertices: BTreeSet<usize> = terminals.iter().copied().collect();
    let mut cost = 0.0;
    for &(u, v) in &edges {
        vertices.insert(u);
        vertices.insert(v);
        cost += m.dist(u, v);
    }
    let opt = dp[full][root];
    if !(crate::le_tol(cost, opt) && crate::ge_tol(cost, opt)) {
        return Err(Error::Internal(format!(
            "reconstructed cost {cost} disagrees with optimum {opt}"
        )));
    }
    Ok(SteinerSolution {
        vertices: vertices.into_iter().collect(),
        edges: edges.into_iter().collect(),
        cost,
    })
}

/// Maps a feasible target solution back through the embedding: image
/// vertices and edges under the fiber map, then a spanning tree of that
/// image. Graph-backed instances additionally expand each image edge into a
/// shortest path and re-span the union, so the output uses real graph edges.
/// The result is always feasible for the source instance and never costlier
/// than its input.
pub fn project_solution(
    me: &MultiEmbedding,
    inst: &GstInstance,
    sol: &SteinerSolution,
) -> Result<SteinerSolution> {
    let red = reduce_gst(me, inst)?;
    verify_solution(sol, &red.groups, |a, b| me.target.distance(a, b))?;

    let m = inst.metric();
    let img_vertices: BTreeSet<usize> = sol
        .vertices
        .iter()
        .map(|&v| me.target.point_source(v))
        .collect();
    let mut img_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(u, v) in &sol.edges {
        let (a, b) = (me.target.point_source(u), me.target.point_source(v));
        if a != b {
            img_edges.insert((a.min(b), a.max(b)));
        }
    }
    let vertices: Vec<usize> = img_vertices.iter().copied().collect();
    let (edges, cost) = spanning_subset(&vertices, &img_edges, |u, v| Ok(m.dist(u, v)))?;

    let projected = match inst.space() {
        GstSpace::Metric(_) => SteinerSolution {
            vertices,
            edges,
            cost,
        },
        GstSpace::Graph(g) => {
            let mut weight: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for &(u, v, w) in g.edges() {
                weight.insert((u.min(v), u.max(v)), w);
            }
            let mut union: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut all: BTreeSet<usize> = img_vertices.clone();
            for &(u, v) in &edges {
                let path = g.shortest_path(u, v)?;
                for w in path.windows(2) {
                    union.insert((w[0].min(w[1]), w[0].max(w[1])));
                    all.insert(w[0]);
                    all.insert(w[1]);
                }
            }
            let all: Vec<usize> = all.into_iter().collect();
            let (gedges, gcost) = spanning_subset(&all, &union, |u, v| {
                weight
                    .get(&(u.min(v), u.max(v)))
                    .copied()
                    .ok_or_else(|| Error::Internal(format!("({u}, {v}) is not a graph edge")))
            })?;
            if !crate::le_tol(gcost, cost) {
                return Err(Error::Internal(
                    "graph expansion made the projection costlier".into(),
                ));
            }
            SteinerSolution {
                vertices: all,
                edges: gedges,
                cost: gcost,
            }
        }
    };
    if !crate::le_tol(projected.cost, sol.cost) {
        return Err(Error::Internal(
            "projection made the solution costlier".into(),
        ));
    }
    verify_solution(&projected, inst.groups(), |u, v| match inst.space() {
        GstSpace::Metric(_) => Ok(m.dist(u, v)),
        GstSpace::Graph(g) => g
            .edges()
            .iter()
            .find(|&&(a, b, _)| (a.min(b), a.max(b)) == (u.min(v), u.max(v)))
            .map(|&(_, _, w)| w)
            .ok_or_else(|| Error::Internal(format!("({u}, {v}) is not a graph edge"))),
    })?;
    Ok(projected)
}

/// Minimum spanning tree of an explicit edge set over `vertices` (Kruskal,
/// ordered by weight then endpoints). The edge set must connect the
/// vertices.
fn spanning_subset(
    vertices: &[usize],
    edge_set: &BTreeSet<(usize, usize)>,
    weight: impl Fn(usize, usize) -> Result<f64>,
) -> Result<(Vec<(usize, usize)>, f64)> {
    if vertices.len() <= 1 {
        return Ok((Vec::new(), 0.0));
    }
    let rank = |v: usize| -> Result<usize> {
        vertices
            .binary_search(&v)
            .map_err(|_| Error::Internal(format!("edge endpoint {v} missing from vertex set")))
    };
    let mut weighted = Vec::with_capacity(edge_set.len());
    for &(u, v) in edge_set {
        weighted.push((weight(u, v)?, u, v));
    }
    weighted.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let mut dsu = Dsu::new(vertices.len());
    let mut edges = Vec::with_capacity(vertices.len() - 1);
    let mut cost = 0.0;
    for (w, u, v) in weighted {
        if dsu.union(rank(u)?, rank(v)?) {
            edges.push((u, v));
            cost += w;
        }
    }
    if edges.len() + 1 != vertices.len() {
        return Err(Error::Internal(
            "image edges do not connect the image".into(),
        ));
    }
    edges.sort_unstable();
    Ok((edges, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_ultra::build_ultrametric_embedding;
    use crate::metric::{generate, GenSpec, Generated};
    use crate::ultrametric::UltraTreeBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path_metric(n: usize) -> MetricSpace {
        generate(&GenSpec::Path { n }, 0).unwrap().metric().unwrap()
    }

    #[test]
    fn reduce_follows_fibers_and_rejects_mismatch() {
        let m = path_metric(4);
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let inst = GstInstance::new(GstSpace::Metric(m.clone()), vec![vec![0], vec![3]]).unwrap();
        let red = reduce_gst(&me, &inst).unwrap();
        assert_eq!(red.groups[0], me.fiber(0).unwrap());
        assert_eq!(red.groups[1], me.fiber(3).unwrap());

        let other = GstInstance::new(GstSpace::Metric(path_metric(5)), vec![vec![0]]).unwrap();
        assert!(matches!(reduce_gst(&me, &other), Err(Error::Mismatch(_))));
    }

    #[test]
    fn single_group_costs_nothing() {
        let m = path_metric(6);
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let inst = GstInstance::new(GstSpace::Metric(m), vec![vec![2, 3]]).unwrap();
        let red = reduce_gst(&me, &inst).unwrap();
        let sol = solve_tree_exact(&me.target, &red.groups, GROUP_BUDGET).unwrap();
        assert_eq!(sol.cost, 0.0);
        assert_eq!(sol.vertices.len(), 1);
        assert!(sol.edges.is_empty());
        let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
        assert_eq!(oracle.cost, 0.0);
    }

    #[test]
    fn unit_path_star_spans_endpoint_groups() {
        let star = StarTree::new(2.0, 2, vec![vec![0, 1, 2]]).unwrap();
        let target = Target::Star(star);
        let sol = solve_tree_exact(&target, &[vec![0], vec![2]], GROUP_BUDGET).unwrap();
        assert_eq!(sol.cost, 2.0);
        assert_eq!(sol.vertices, vec![0, 1, 2]);
        assert_eq!(sol.edges, vec![(0, 1), (1, 2)]);
    }

    /// Random binary hierarchies with shrinking labels, solved both by the
    /// tree DP and by the generic subset DP over the materialized metric.
    #[test]
    fn hierarchy_dp_matches_generic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..12 {
            let n = rng.gen_range(4..=10);
            let mut builder = UltraTreeBuilder::new();
            let mut roots: Vec<(usize, f64)> = (0..n).map(|p| (builder.leaf(p), 0.0)).collect();
            let mut level = 1.0;
            while roots.len() > 1 {
                let i = rng.gen_range(0..roots.len() - 1);
                let (a, la) = roots.remove(i);
                let (b, lb) = roots.remove(i.min(roots.len() - 1));
                let label = la.max(lb).max(level) + rng.gen_range(0..3) as f64;
                roots.insert(0, (builder.internal(label, vec![a, b]), label));
                level += 1.0;
            }
            let tree = builder.finish(roots[0].0, n, 2.0).unwrap();
            let target = Target::Ultra(tree);
            let metric = target.to_metric(20).unwrap();

            let k = rng.gen_range(2..=4);
            let groups: Vec<Vec<usize>> = (0..k)
                .map(|_| {
                    let len = rng.gen_range(1..=3);
                    (0..len).map(|_| rng.gen_range(0..n)).collect()
                })
                .collect();
            let sol = solve_tree_exact(&target, &groups, GROUP_BUDGET).unwrap();
            verify_solution(&sol, &groups, |a, b| target.distance(a, b)).unwrap();
            let inst = GstInstance::new(GstSpace::Metric(metric), groups.clone()).unwrap();
            let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
            assert!(
                crate::le_tol(sol.cost, oracle.cost) && crate::ge_tol(sol.cost, oracle.cost),
                "trial {trial}: tree DP {} vs oracle {}",
                sol.cost,
                oracle.cost
            );
        }
    }

    #[test]
    fn star_exact_matches_generic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..12 {
            let np = rng.gen_range(2..=4);
            let len = rng.gen_range(2..=4);
            let delta = rng.gen_range(1..=4) as f64;
            let paths: Vec<Vec<u32>> = (0..np)
                .map(|q| (0..len).map(|i| (q * len + i) as u32).collect())
                .collect();
            let star = StarTree::new(delta, len - 1, paths).unwrap();
            let points = star.point_count();
            let target = Target::Star(star);
            let metric = target.to_metric(20).unwrap();

            let k = rng.gen_range(2..=4);
            let groups: Vec<Vec<usize>> = (0..k)
                .map(|_| {
                    let glen = rng.gen_range(1..=2);
                    (0..glen).map(|_| rng.gen_range(0..points)).collect()
                })
                .collect();
            let sol = solve_tree_exact(&target, &groups, GROUP_BUDGET).unwrap();
            verify_solution(&sol, &groups, |a, b| target.distance(a, b)).unwrap();
            let inst = GstInstance::new(GstSpace::Metric(metric), groups.clone()).unwrap();
            let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
            assert!(
                crate::le_tol(sol.cost, oracle.cost) && crate::ge_tol(sol.cost, oracle.cost),
                "trial {trial}: star DP {} vs oracle {}",
                sol.cost,
                oracle.cost
            );
        }
    }

    #[test]
    fn greedy_prefers_the_double_covering_path() {
        // Three paths; group 0 lives on paths 0 and 1, group 1 on paths 1
        // and 2: one pick suffices and it must be path 1.
        let masks = vec![0b01, 0b11, 0b10];
        assert_eq!(greedy_hitting_set(&masks, 0b11), Some(vec![1]));
        assert_eq!(greedy_hitting_set(&[0b01, 0b01], 0b11), None);
    }

    #[test]
    fn greedy_star_solver_covers_and_stays_modest() {
        let paths: Vec<Vec<u32>> = vec![vec![0, 1, 2, 3], vec![0, 4, 5, 6], vec![0, 7, 8, 9]];
        let star = StarTree::new(3.0, 3, paths).unwrap();
        // Group 0 sits deep on path 0, group 1 deep on path 2.
        let groups = vec![vec![3], vec![11]];
        let sol = greedy_star_solver(&star, &groups).unwrap();
        verify_solution(&sol, &groups, |a, b| star.distance(a, b)).unwrap();
        // Two full paths end to end plus one hub hop.
        assert_eq!(sol.cost, 3.0 + 3.0 + 3.0);

        // Both groups on one path: the window beats any full traversal.
        let near = vec![vec![1], vec![2]];
        let sol = greedy_star_solver(&star, &near).unwrap();
        assert_eq!(sol.cost, 1.0);
    }

    #[test]
    fn end_to_end_projection_recovers_the_path() {
        let m = path_metric(8);
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let inst = GstInstance::new(GstSpace::Metric(m.clone()), vec![vec![0], vec![7]]).unwrap();
        let red = reduce_gst(&me, &inst).unwrap();
        let target_sol = solve_tree_exact(&me.target, &red.groups, GROUP_BUDGET).unwrap();
        let projected = project_solution(&me, &inst, &target_sol).unwrap();
        verify_solution(&projected, inst.groups(), |u, v| Ok(m.dist(u, v))).unwrap();
        assert!(crate::le_tol(projected.cost, target_sol.cost));
        let oracle = exact_oracle(&inst, ORACLE_BUDGET).unwrap();
        assert_eq!(oracle.cost, 7.0);
        assert!(crate::ge_tol(projected.cost, oracle.cost));
    }

    #[test]
    fn graph_backed_projection_uses_graph_edges() {
        let g = match generate(&GenSpec::Cycle { n: 8 }, 0).unwrap() {
            Generated::Graph(g) => g,
            Generated::Metric(_) => panic!("expected a graph"),
        };
        let m = from_graph(&g).unwrap();
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let inst =
            GstInstance::new(GstSpace::Graph(g.clone()), vec![vec![0], vec![3], vec![5]]).unwrap();
        let red = reduce_gst(&me, &inst).unwrap();
        let target_sol = solve_tree_exact(&me.target, &red.groups, GROUP_BUDGET).unwrap();
        let projected = project_solution(&me, &inst, &target_sol).unwrap();
        assert!(crate::le_tol(projected.cost, target_sol.cost));
        let graph_edges: BTreeSet<(usize, usize)> = g
            .edges()
            .iter()
            .map(|&(u, v, _)| (u.min(v), u.max(v)))
            .collect();
        for e in &projected.edges {
            assert!(graph_edges.contains(e), "{e:?} is not a cycle edge");
        }
    }

    #[test]
    fn oracle_budgets_are_enforced() {
        let m = path_metric(6);
        let big: Vec<Vec<usize>> = (0..8).map(|_| (0..6).collect()).collect();
        let inst = GstInstance::new(GstSpace::Metric(m), big).unwrap();
        assert!(matches!(exact_oracle(&inst, 1000), Err(Error::Budget(_))));

        let wide = path_metric(21);
        let inst = GstInstance::new(GstSpace::Metric(wide), vec![vec![0]]).unwrap();
        assert!(matches!(
            exact_oracle(&inst, ORACLE_BUDGET),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn verify_rejects_broken_solutions() {
        let m = path_metric(4);
        let dist = |u: usize, v: usize| Ok(m.dist(u, v));
        let groups = vec![vec![0], vec![3]];
        let cycle = SteinerSolution {
            vertices: vec![0, 1, 2],
            edges: vec![(0, 1), (1, 2), (0, 2)],
            cost: 4.0,
        };
        assert!(verify_solution(&cycle, &groups, dist).is_err());
        let wrong_cost = SteinerSolution {
            vertices: vec![0, 1],
            edges: vec![(0, 1)],
            cost: 2.0,
        };
        assert!(verify_solution(&wrong_cost, &groups, dist).is_err());
        let uncovered = SteinerSolution {
            vertices: vec![0, 1],
            edges: vec![(0, 1)],
            cost: 1.0,
        };
        assert!(verify_solution(&uncovered, &groups, dist).is_err());
        let ok = SteinerSolution {
            vertices: vec![0, 1, 2, 3],
            edges: vec![(0, 1), (1, 2), (2, 3)],
            cost: 3.0,
        };
        assert!(verify_solution(&ok, &groups, dist).is_ok());
    }
}
