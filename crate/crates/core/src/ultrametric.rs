//! Rooted labeled trees inducing ultrametric (and k-HST) leaf distances.
//!
//! A tree carries a nonnegative label `delta(u)` per node, zero exactly at
//! the leaves and non-increasing along every root-to-leaf path. The distance
//! between two leaves is the label of their lowest common ancestor. When
//! every child label is additionally at most `delta(parent) / k` the tree is
//! a k-hierarchically well-separated tree; `k = 1` is a plain ultrametric.
//!
//! Leaf-to-leaf queries run in O(1) after an Euler tour + sparse table index
//! is built lazily on first use; construction-phase code never pays for it.

use crate::{Error, Result};
use std::sync::OnceLock;

/// One node of an [`UltraTree`]. Nodes are stored in an arena; ids are
/// assigned in construction order, which serialization preserves.
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub label: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Source point carried by a leaf; `None` on internal nodes.
    pub point: Option<usize>,
}

/// Rooted labeled tree with leaf distance `delta(lca)`.
#[derive(Debug)]
pub struct UltraTree {
    nodes: Vec<TreeNode>,
    root: usize,
    /// Leaf node ids in construction order; a leaf's position here is its
    /// *leaf index*, the id every consumer of the embedding uses.
    leaves: Vec<usize>,
    leaf_rank: Vec<u32>,
    source_n: usize,
    k: f64,
    lca: OnceLock<LcaIndex>,
}

impl Clone for UltraTree {
    fn clone(&self) -> Self {
        UltraTree {
            nodes: self.nodes.clone(),
            root: self.root,
            leaves: self.leaves.clone(),
            leaf_rank: self.leaf_rank.clone(),
            source_n: self.source_n,
            k: self.k,
            lca: OnceLock::new(),
        }
    }
}

/// Violations reported by [`UltraTree::validate_hst`].
#[derive(Debug, Clone, PartialEq)]
pub enum HstViolation {
    /// A leaf has a nonzero label.
    LeafLabelNonzero { node: usize },
    /// An internal node has label <= 0 (so "label 0 iff leaf" fails).
    InternalLabelNonpositive { node: usize },
    /// `label(child) > label(parent) / k` beyond tolerance.
    ChildLabelTooLarge { parent: usize, child: usize },
}

#[derive(Debug, Clone, Default)]
pub struct HstReport {
    pub violations: Vec<HstViolation>,
}

impl HstReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Arena builder. Children must be created before their parent, so any tree
/// built through this interface is acyclic by construction.
#[derive(Debug, Default)]
pub struct UltraTreeBuilder {
    nodes: Vec<TreeNode>,
}

impl UltraTreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a leaf mapped to `point`; returns its node id.
    pub fn leaf(&mut self, point: usize) -> usize {
        self.nodes.push(TreeNode {
            label: 0.0,
            parent: None,
            children: Vec::new(),
            point: Some(point),
        });
        self.nodes.len() - 1
    }

    /// Adds an internal node over existing children; returns its node id.
    pub fn internal(&mut self, label: f64, children: Vec<usize>) -> usize {
        let id = self.nodes.len();
        debug_assert!(!children.is_empty() && children.iter().all(|&c| c < id));
        self.nodes.push(TreeNode {
            label,
            parent: None,
            children,
            point: None,
        });
        id
    }

    /// Finishes the tree. Checks that `root` reaches every node exactly once
    /// and that points fit `source_n`; metric validity stays the job of
    /// [`UltraTree::validate_hst`].
    pub fn finish(mut self, root: usize, source_n: usize, k: f64) -> Result<UltraTree> {
        let n = self.nodes.len();
        if root >= n {
            return Err(Error::InvalidInput("root id out of range".into()));
        }
        let mut claimed = vec![false; n];
        claimed[root] = true;
        for id in 0..n {
            for ci in 0..self.nodes[id].children.len() {
                let c = self.nodes[id].children[ci];
                if claimed[c] && self.nodes[c].parent.is_some() || c == root {
                    return Err(Error::InvalidInput(format!("node {c} has two parents")));
                }
                claimed[c] = true;
                self.nodes[c].parent = Some(id);
            }
        }
        if let Some(orphan) = claimed.iter().position(|c| !c) {
            return Err(Error::InvalidInput(format!(
                "node {orphan} unreachable from root"
            )));
        }
        let mut leaves = Vec::new();
        let mut leaf_rank = vec![u32::MAX; n];
        for (id, node) in self.nodes.iter().enumerate() {
            if node.children.is_empty() {
                match node.point {
                    Some(p) if p < source_n => {
                        leaf_rank[id] = leaves.len() as u32;
                        leaves.push(id);
                    }
                    Some(p) => {
                        return Err(Error::InvalidInput(format!(
                            "leaf {id} maps to point {p} outside 0..{source_n}"
                        )))
                    }
                    None => return Err(Error::InvalidInput(format!("leaf {id} has no point",))),
                }
            } else if node.point.is_some() {
                return Err(Error::InvalidInput(format!(
                    "internal node {id} carries a point"
                )));
            }
        }
        Ok(UltraTree {
            nodes: self.nodes,
            root,
            leaves,
            leaf_rank,
            source_n,
            k,
            lca: OnceLock::new(),
        })
    }
}

impl UltraTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Node id of the `idx`-th leaf.
    pub fn leaf_node(&self, idx: usize) -> usize {
        self.leaves[idx]
    }

    /// Leaf index of a node id, if it is a leaf.
    pub fn leaf_index(&self, node: usize) -> Option<usize> {
        (self.leaf_rank[node] != u32::MAX).then(|| self.leaf_rank[node] as usize)
    }

    /// Source point of the `idx`-th leaf.
    pub fn leaf_point(&self, idx: usize) -> usize {
        self.nodes[self.leaves[idx]].point.expect("leaf has point")
    }

    /// Distance between two leaves given by leaf index: the label of their
    /// lowest common ancestor. O(1) after the lazy index is built.
    pub fn tree_distance(&self, a: usize, b: usize) -> Result<f64> {
        if a >= self.leaves.len() || b >= self.leaves.len() {
            return Err(Error::Lookup(format!(
                "leaf index out of range: {a} or {b} (have {})",
                self.leaves.len()
            )));
        }
        if a == b {
            return Ok(0.0);
        }
        let l = self.lca_nodes(self.leaves[a], self.leaves[b]);
        Ok(self.nodes[l].label)
    }

    /// Lowest common ancestor of two node ids.
    pub fn lca_nodes(&self, a: usize, b: usize) -> usize {
        let idx = self.lca.get_or_init(|| LcaIndex::build(self));
        idx.query(a, b)
    }

    /// Leaf indices below `node`, ascending.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(u) = stack.pop() {
            if self.is_leaf(u) {
                out.push(self.leaf_rank[u] as usize);
            } else {
                stack.extend(self.nodes[u].children.iter().copied());
            }
        }
        out.sort_unstable();
        out
    }

    /// Checks the k-HST conditions: labels zero exactly on leaves, and each
    /// child label at most `label(parent) / k` (to relative tolerance).
    pub fn validate_hst(&self, k: f64) -> HstReport {
        let mut violations = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if node.children.is_empty() {
                if node.label != 0.0 {
                    violations.push(HstViolation::LeafLabelNonzero { node: id });
                }
            } else if node.label <= 0.0 {
                violations.push(HstViolation::InternalLabelNonpositive { node: id });
            }
            for &c in &node.children {
                if !crate::le_tol(self.nodes[c].label * k, node.label) {
                    violations.push(HstViolation::ChildLabelTooLarge {
                        parent: id,
                        child: c,
                    });
                }
            }
        }
        HstReport { violations }
    }

    /// Rounds every internal label up to the nearest power of `k` and
    /// contracts parent/child chains that end up with equal labels. Leaf
    /// distances satisfy `old <= new <= k * old`. Requires a valid
    /// ultrametric; `k = 1` returns a copy unchanged.
    pub fn to_khst(&self, k: f64) -> Result<UltraTree> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be >= 1, got {k}")));
        }
        let rep = self.validate_hst(1.0);
        if !rep.is_clean() {
            return Err(Error::InvalidInput(format!(
                "not a valid ultrametric: {:?}",
                rep.violations[0]
            )));
        }
        if k == 1.0 {
            return Ok(self.clone());
        }
        let rounded: Vec<f64> = self
            .nodes
            .iter()
            .map(|nd| {
                if nd.children.is_empty() {
                    0.0
                } else {
                    pow_ceil(nd.label, k)
                }
            })
            .collect();

        // Rebuild bottom-up. An internal node whose rounded label equals its
        // parent's dissolves into the parent (distances are preserved because
        // the merged nodes sit at equal rounded label); dissolving nodes are
        // never materialized, only traversed through when the surviving
        // ancestor collects its children.
        let dissolves = |id: usize| {
            !self.nodes[id].children.is_empty()
                && self.nodes[id]
                    .parent
                    .is_some_and(|p| rounded[id] == rounded[p])
        };
        let mut b = UltraTreeBuilder::new();
        let mut mapped = vec![usize::MAX; self.nodes.len()];
        for id in 0..self.nodes.len() {
            let node = &self.nodes[id];
            if node.children.is_empty() {
                mapped[id] = b.leaf(node.point.unwrap());
            } else if !dissolves(id) {
                let mut kids = Vec::new();
                let mut stack: Vec<usize> = node.children.iter().rev().copied().collect();
                while let Some(c) = stack.pop() {
                    if dissolves(c) {
                        stack.extend(self.nodes[c].children.iter().rev().copied());
                    } else {
                        kids.push(mapped[c]);
                    }
                }
                mapped[id] = b.internal(rounded[id], kids);
            }
        }
        b.finish(mapped[self.root], self.source_n, k)
    }
}

/// Smallest power of `k` that is >= `x`, with a tolerance so values already
/// a power of `k` (up to float noise) are kept rather than bumped a level.
fn pow_ceil(x: f64, k: f64) -> f64 {
    debug_assert!(x > 0.0 && k > 1.0);
    let e = x.ln() / k.ln();
    let r = e.round();
    let exp = if (e - r).abs() < 1e-9 { r } else { e.ceil() };
    k.powf(exp)
}

/// Euler tour + sparse table RMQ over depths: O(n log n) build, O(1) query.
#[derive(Debug)]
struct LcaIndex {
    euler: Vec<u32>,
    first: Vec<u32>,
    depth: Vec<u32>,
    /// `table[j][i]`: position (into `euler`) of the minimum-depth node in
    /// the window of length `2^j` starting at `i`.
    table: Vec<Vec<u32>>,
}

impl LcaIndex {
    fn build(t: &UltraTree) -> Self {
        let n = t.nodes.len();
        let mut euler = Vec::with_capacity(2 * n);
        let mut first = vec![u32::MAX; n];
        let mut depth = vec![0u32; n];
        let mut stack: Vec<(usize, usize)> = vec![(t.root, 0)];
        first[t.root] = 0;
        euler.push(t.root as u32);
        while let Some(&(u, ci)) = stack.last() {
            if ci < t.nodes[u].children.len() {
                stack.last_mut().unwrap().1 += 1;
                let c = t.nodes[u].children[ci];
                depth[c] = depth[u] + 1;
                if first[c] == u32::MAX {
                    first[c] = euler.len() as u32;
                }
                euler.push(c as u32);
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    euler.push(p as u32);
                }
            }
        }
        let m = euler.len();
        let levels = usize::BITS as usize - m.leading_zeros() as usize;
        let mut table = Vec::with_capacity(levels);
        table.push((0..m as u32).collect::<Vec<_>>());
        let mut j = 1;
        while (1 << j) <= m {
            let half = 1 << (j - 1);
            let prev = &table[j - 1];
            let mut row = Vec::with_capacity(m - (1 << j) + 1);
            for i in 0..=(m - (1 << j)) {
                let a = prev[i];
                let b = prev[i + half];
                row.push(
                    if depth[euler[a as usize] as usize] <= depth[euler[b as usize] as usize] {
                        a
                    } else {
                        b
                    },
                );
            }
            table.push(row);
            j += 1;
        }
        LcaIndex {
            euler,
            first,
            depth,
            table,
        }
    }

    fn query(&self, a: usize, b: usize) -> usize {
        let (mut lo, mut hi) = (self.first[a], self.first[b]);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let len = (hi - lo + 1) as usize;
        let j = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let x = self.table[j][lo as usize];
        let y = self.table[j][hi as usize + 1 - (1 << j)];
        let px = self.euler[x as usize] as usize;
        let py = self.euler[y as usize] as usize;
        if self.depth[px] <= self.depth[py] {
            px
        } else {
            py
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Caterpillar over P_4: root(3) -> [leaf 0, n(2) -> [leaf 1, n(1) -> [leaf 2, leaf 3]]].
    fn caterpillar4() -> UltraTree {
        let mut b = UltraTreeBuilder::new();
        let l0 = b.leaf(0);
        let l1 = b.leaf(1);
        let l2 = b.leaf(2);
        let l3 = b.leaf(3);
        let n1 = b.internal(1.0, vec![l2, l3]);
        let n2 = b.internal(2.0, vec![l1, n1]);
        let root = b.internal(3.0, vec![l0, n2]);
        b.finish(root, 4, 1.0).unwrap()
    }

    /// Random ultrametric by recursive splitting with shrinking labels.
    fn random_ultrametric(n: usize, seed: u64) -> UltraTree {
        fn split(
            b: &mut UltraTreeBuilder,
            pts: &[usize],
            label: f64,
            rng: &mut ChaCha8Rng,
        ) -> usize {
            if pts.len() == 1 {
                return b.leaf(pts[0]);
            }
            let cut = rng.gen_range(1..pts.len());
            let sub = label * rng.gen_range(0.2..=0.9);
            let l = split(b, &pts[..cut], sub, rng);
            let r = split(b, &pts[cut..], label * rng.gen_range(0.2..=0.9), rng);
            b.internal(label, vec![l, r])
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<usize> = (0..n).collect();
        let mut b = UltraTreeBuilder::new();
        let root = split(&mut b, &pts, 100.0, &mut rng);
        b.finish(root, n, 1.0).unwrap()
    }

    fn leaf_idx_of_point(t: &UltraTree, p: usize) -> usize {
        (0..t.leaf_count()).find(|&i| t.leaf_point(i) == p).unwrap()
    }

    #[test]
    fn caterpillar_distances() {
        let t = caterpillar4();
        let li: Vec<usize> = (0..4).map(|p| leaf_idx_of_point(&t, p)).collect();
        assert_eq!(t.tree_distance(li[0], li[2]).unwrap(), 3.0);
        assert_eq!(t.tree_distance(li[1], li[3]).unwrap(), 2.0);
        assert_eq!(t.tree_distance(li[2], li[3]).unwrap(), 1.0);
        assert_eq!(t.tree_distance(li[2], li[2]).unwrap(), 0.0);
        assert!(t.validate_hst(1.0).is_clean());
    }

    #[test]
    fn distance_rejects_unknown_leaf() {
        let t = caterpillar4();
        assert!(matches!(t.tree_distance(0, 99), Err(Error::Lookup(_))));
    }

    #[test]
    fn ultrametric_strong_triangle_exhaustive() {
        let t = random_ultrametric(24, 7);
        let n = t.leaf_count();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let xy = t.tree_distance(x, y).unwrap();
                    let yz = t.tree_distance(y, z).unwrap();
                    let xz = t.tree_distance(x, z).unwrap();
                    assert!(
                        xz <= xy.max(yz) + 1e-12,
                        "strong triangle failed at ({x},{y},{z})"
                    );
                }
            }
        }
    }

    #[test]
    fn validate_detects_label_inversion() {
        let mut b = UltraTreeBuilder::new();
        let l0 = b.leaf(0);
        let l1 = b.leaf(1);
        let inner = b.internal(5.0, vec![l0, l1]);
        let l2 = b.leaf(2);
        let root = b.internal(3.0, vec![inner, l2]);
        let t = b.finish(root, 3, 1.0).unwrap();
        let rep = t.validate_hst(1.0);
        assert!(rep.violations.contains(&HstViolation::ChildLabelTooLarge {
            parent: root,
            child: inner
        }));
    }

    #[test]
    fn builder_rejects_orphans_and_double_parents() {
        let mut b = UltraTreeBuilder::new();
        let l0 = b.leaf(0);
        let _stray = b.leaf(1);
        assert!(b.finish(l0, 2, 1.0).is_err());

        let mut b = UltraTreeBuilder::new();
        let l0 = b.leaf(0);
        let l1 = b.leaf(1);
        let a = b.internal(1.0, vec![l0, l1]);
        let root = b.internal(2.0, vec![a, l1]);
        assert!(b.finish(root, 2, 1.0).is_err());
    }

    #[test]
    fn khst_rounds_up_and_contracts() {
        let mut b = UltraTreeBuilder::new();
        let l0 = b.leaf(0);
        let l1 = b.leaf(1);
        let l2 = b.leaf(2);
        let l3 = b.leaf(3);
        let n1 = b.internal(1.0, vec![l0, l1]);
        let n3 = b.internal(3.0, vec![n1, l2]);
        let root = b.internal(4.0, vec![n3, l3]);
        let t = b.finish(root, 4, 1.0).unwrap();

        let h = t.to_khst(4.0).unwrap();
        assert!(h.validate_hst(4.0).is_clean());
        // labels 3 and 4 both round to 4 and merge into one node.
        let internal: Vec<f64> = (0..h.node_count())
            .filter(|&i| !h.is_leaf(i))
            .map(|i| h.node(i).label)
            .collect();
        assert_eq!(internal, vec![1.0, 4.0]);
        for a in 0..4 {
            for b2 in (a + 1)..4 {
                let (ia, ib) = (leaf_idx_of_point(&t, a), leaf_idx_of_point(&t, b2));
                let (ja, jb) = (leaf_idx_of_point(&h, a), leaf_idx_of_point(&h, b2));
                let old = t.tree_distance(ia, ib).unwrap();
                let new = h.tree_distance(ja, jb).unwrap();
                assert!(old <= new + 1e-12 && new <= 4.0 * old + 1e-12);
            }
        }
    }

    #[test]
    fn khst_keeps_exact_powers() {
        assert_eq!(pow_ceil(4.0, 2.0), 4.0);
        assert_eq!(pow_ceil(4.1, 2.0), 8.0);
        assert_eq!(pow_ceil(0.3, 2.0), 0.5);
        assert_eq!(pow_ceil(1.0, 3.0), 1.0);
    }

    #[test]
    fn khst_random_trees_property() {
        for seed in 0..20 {
            let t = random_ultrametric(16, seed);
            for &k in &[1.5, 2.0, 4.0] {
                let h = t.to_khst(k).unwrap();
                assert!(h.validate_hst(k).is_clean(), "k={k} seed={seed}");
                assert_eq!(h.leaf_count(), t.leaf_count());
                for a in 0..16 {
                    for b in (a + 1)..16 {
                        let old = t
                            .tree_distance(leaf_idx_of_point(&t, a), leaf_idx_of_point(&t, b))
                            .unwrap();
                        let new = h
                            .tree_distance(leaf_idx_of_point(&h, a), leaf_idx_of_point(&h, b))
                            .unwrap();
                        assert!(crate::ge_tol(new, old) && crate::le_tol(new, k * old));
                    }
                }
            }
        }
    }
}
