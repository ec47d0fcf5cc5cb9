//! Randomized single-tree embeddings and their union under a fresh root.
//!
//! A single sampled tree is an ordinary (non-duplicating) hierarchical
//! partition: every source point appears at exactly one leaf, so a path has
//! exactly one representative and its cost is forced. Taking several
//! independent samples and joining them under one root yields a genuine
//! multi-embedding whose fibers are the per-tree leaf copies; an optimal
//! representative path may then hop between trees and can only improve on
//! the best single tree.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed_ultra::{EmbedParams, MultiEmbedding, Target};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::ultrametric::{UltraTree, UltraTreeBuilder};

/// Independent tree samples over one source, tagged with their seeds.
#[derive(Debug, Clone)]
pub struct EmbeddingSample {
    pub source: MetricSpace,
    pub trees: Vec<UltraTree>,
    pub seeds: Vec<u64>,
}

fn subset_diameter(m: &MetricSpace, pts: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            d = d.max(m.dist(a, b));
        }
    }
    d
}

/// Recursive ball partition: each point joins the first permutation entry
/// within `radius`; radii halve per level and levels that fail to split are
/// skipped. Labels are exact subset diameters, which by itself makes the
/// tree a valid non-contractive ultrametric whatever the random choices did.
fn split(
    m: &MetricSpace,
    perm: &[usize],
    pts: &[usize],
    radius: f64,
    b: &mut UltraTreeBuilder,
) -> Result<usize> {
    if pts.len() == 1 {
        return Ok(b.leaf(pts[0]));
    }
    let diam = subset_diameter(m, pts);
    if diam <= 0.0 {
        return Err(Error::InvalidInput(
            "distinct points at distance zero cannot be separated".into(),
        ));
    }
    let mut taken = vec![false; pts.len()];
    let mut remaining = pts.len();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &c in perm {
        let mut cluster = Vec::new();
        for (i, &p) in pts.iter().enumerate() {
            if !taken[i] && m.dist(p, c) <= radius {
                taken[i] = true;
                cluster.push(p);
            }
        }
        if !cluster.is_empty() {
            remaining -= cluster.len();
            clusters.push(cluster);
        }
        if remaining == 0 {
            break;
        }
    }
    if clusters.len() == 1 {
        return split(m, perm, pts, radius / 2.0, b);
    }
    let children = clusters
        .iter()
        .map(|c| split(m, perm, c, radius / 2.0, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(b.internal(diam, children))
}

/// Draws one random partition tree: a uniform permutation fixes
/// cluster-center priority, a scale in `[1, 2)` fixes the radius ladder.
/// Deterministic per `(metric, seed)`.
pub fn sample_tree_embedding(m: &MetricSpace, seed: u64) -> Result<UltraTree> {
    let n = m.n();
    let mut b = UltraTreeBuilder::new();
    if n == 1 {
        let leaf = b.leaf(0);
        return b.finish(leaf, 1, 2.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let scale: f64 = rng.gen_range(1.0..2.0);
    let all: Vec<usize> = (0..n).collect();
    let root = split(m, &perm, &all, scale * m.diameter(), &mut b)?;
    b.finish(root, n, 2.0)
}

/// One sample per seed.
pub fn sample_ensemble(m: &MetricSpace, seeds: &[u64]) -> Result<EmbeddingSample> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one seed is required".into(),
        ));
    }
    let trees = seeds
        .iter()
        .map(|&s| sample_tree_embedding(m, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddingSample {
        source: m.clone(),
        trees,
        seeds: seeds.to_vec(),
    })
}

/// Joins the sampled trees under a fresh root labeled with the largest of
/// the source diameter and every child label, so cross-tree leaf pairs never
/// contract. Fibers become the per-tree copies of each point.
pub fn union_under_root(sample: &EmbeddingSample) -> Result<MultiEmbedding> {
    let m = &sample.source;
    let n = m.n();
    if sample.trees.is_empty() {
        return Err(Error::InvalidInput("union needs at least one tree".into()));
    }
    let mut b = UltraTreeBuilder::new();
    let mut roots = Vec::with_capacity(sample.trees.len());
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut max_label = m.diameter();
    let mut next_leaf = 0usize;
    for (ti, tree) in sample.trees.iter().enumerate() {
        if tree.leaf_count() != n {
            return Err(Error::Mismatch(format!(
                "tree {ti} has {} leaves for {n} source points",
                tree.leaf_count()
            )));
        }
        let mut seen = vec![false; n];
        let mut map = vec![usize::MAX; tree.node_count()];
        for id in 0..tree.node_count() {
            let node = tree.node(id);
            if tree.is_leaf(id) {
                let p = node.point.expect("leaf carries a point");
                if p >= n || seen[p] {
                    return Err(Error::Mismatch(format!(
                        "tree {ti} does not cover each source point exactly once"
                    )));
                }
                seen[p] = true;
                map[id] = b.leaf(p);
                fibers[p].push(next_leaf);
                next_leaf += 1;
            } else {
                max_label = max_label.max(node.label);
                let children = node.children.iter().map(|&c| map[c]).collect();
                map[id] = b.internal(node.label, children);
            }
        }
        roots.push(map[tree.root()]);
    }
    let label = if max_label > 0.0 { max_label } else { 1.0 };
    let root = b.internal(label, roots);
    let tree = b.finish(root, n, 2.0)?;
    MultiEmbedding::new(
        m.clone(),
        Target::Ultra(tree),
        fibers,
        EmbedParams::Union {
            seeds: sample.seeds.clone(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_ultra::noncontraction_violations;
    use crate::metric::{generate, GenSpec};
    use crate::realize::{optimal_rep_path, PointPath};

    fn pair_metric() -> MetricSpace {
        MetricSpace::new(2, vec![0.0, 5.0, 5.0, 0.0], None).unwrap()
    }

    #[test]
    fn one_point_samples_to_one_leaf() {
        let m = MetricSpace::new(1, vec![0.0], None).unwrap();
        let t = sample_tree_embedding(&m, 7).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.node_count(), 1);
    }

    #[test]
    fn pair_root_carries_the_distance() {
        let t = sample_tree_embedding(&pair_metric(), 3).unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.node(t.root()).label, 5.0);
        assert_eq!(t.tree_distance(0, 1).unwrap(), 5.0);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let m = generate(&GenSpec::RandomMetric { n: 14 }, 2)
            .unwrap()
            .metric()
            .unwrap();
        let a = sample_tree_embedding(&m, 9).unwrap();
        let b = sample_tree_embedding(&m, 9).unwrap();
        assert_eq!(a.node_count(), b.node_count());
        for id in 0..a.node_count() {
            assert_eq!(a.node(id).label, b.node(id).label);
            assert_eq!(a.node(id).point, b.node(id).point);
            assert_eq!(a.node(id).children, b.node(id).children);
        }
        let c = sample_tree_embedding(&m, 10).unwrap();
        let differs = (0..a.node_count().min(c.node_count()))
            .any(|id| a.node(id).point != c.node(id).point)
            || a.node_count() != c.node_count();
        assert!(differs, "different seeds produced identical trees");
    }

    #[test]
    fn samples_never_contract() {
        let m = generate(&GenSpec::RandomMetric { n: 24 }, 5)
            .unwrap()
            .metric()
            .unwrap();
        for seed in 0..6 {
            let t = sample_tree_embedding(&m, seed).unwrap();
            assert!(t.validate_hst(1.0).is_clean());
            let leaf_of: Vec<usize> = {
                let mut v = vec![usize::MAX; m.n()];
                for i in 0..t.leaf_count() {
                    v[t.leaf_point(i)] = i;
                }
                v
            };
            for x in 0..m.n() {
                for y in (x + 1)..m.n() {
                    let dn = t.tree_distance(leaf_of[x], leaf_of[y]).unwrap();
                    assert!(
                        crate::ge_tol(dn, m.dist(x, y)),
                        "seed {seed}: pair ({x}, {y}) contracted"
                    );
                }
            }
        }
    }

    #[test]
    fn union_of_two_pair_trees() {
        let m = pair_metric();
        let sample = sample_ensemble(&m, &[0, 1]).unwrap();
        let me = union_under_root(&sample).unwrap();
        let tree = me.target.as_ultra().unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(me.fibers[0].len(), 2);
        assert_eq!(me.fibers[1].len(), 2);
        assert_eq!(tree.node(tree.root()).label, 5.0);
        // Copies of the same point across trees sit at the root.
        let (a, b) = (me.fibers[0][0], me.fibers[0][1]);
        assert_eq!(tree.tree_distance(a, b).unwrap(), 5.0);
    }

    #[test]
    fn union_counts_and_noncontraction() {
        let m = generate(&GenSpec::RandomMetric { n: 16 }, 11)
            .unwrap()
            .metric()
            .unwrap();
        let seeds: Vec<u64> = (0..8).collect();
        let sample = sample_ensemble(&m, &seeds).unwrap();
        let me = union_under_root(&sample).unwrap();
        assert_eq!(me.target.point_count(), 8 * 16);
        let (bad, checked) = noncontraction_violations(&me).unwrap();
        assert!(bad.is_empty());
        assert_eq!(checked, 128 * 127 / 2);
    }

    #[test]
    fn union_optimum_never_beats_the_best_single_tree() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let m = generate(&GenSpec::RandomMetric { n: 16 }, 21)
            .unwrap()
            .metric()
            .unwrap();
        let seeds: Vec<u64> = (0..6).collect();
        let sample = sample_ensemble(&m, &seeds).unwrap();
        let me = union_under_root(&sample).unwrap();

        let leaf_maps: Vec<Vec<usize>> = sample
            .trees
            .iter()
            .map(|t| {
                let mut v = vec![usize::MAX; m.n()];
                for i in 0..t.leaf_count() {
                    v[t.leaf_point(i)] = i;
                }
                v
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let seq: Vec<usize> = (0..8).map(|_| rng.gen_range(0..m.n())).collect();
            let p = PointPath::new(seq.clone(), m.n()).unwrap();
            let union_opt = optimal_rep_path(&me, &p).unwrap().length;
            let best_single = sample
                .trees
                .iter()
                .zip(&leaf_maps)
                .map(|(t, map)| {
                    seq.windows(2)
                        .map(|w| t.tree_distance(map[w[0]], map[w[1]]).unwrap())
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(
                crate::le_tol(union_opt, best_single),
                "union {union_opt} worse than best single tree {best_single}"
            );
        }
    }
}
