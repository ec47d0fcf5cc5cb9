//! Multi-embedding of a finite metric into an ultrametric of size `n^beta`.
//!
//! The construction recursively splits the current point set `V'` around a
//! diameter anchor `x`: concentric rings `A_i = {y : d(x,y) < i*D/(4t)}`
//! (with `A_0 = {x}` and `D` the exact diameter of `V'`) grow in `t` steps
//! up to the quarter-diameter ball, which by choice of anchor holds at most
//! half of `V'`. A shell index `i*` is selected so that ring growth is small
//! there; the left subtree embeds `A_{i*}`, the right subtree embeds
//! `V' \ A_{i*-1}`, and the shell `A_{i*} \ A_{i*-1}` is *duplicated* into
//! both. The root is labeled with the exact diameter, so leaf distances
//! never contract.
//!
//! Which growth condition is used (and the resulting size guarantee
//! `n^beta`) is fixed once at the top call by [`beta`]: the size branch
//! compares `e_{i-1} >= e_i^beta` with `beta = (log2 n')^(1/t)`, the
//! diameter branch additionally discounts by how much the local diameter
//! halves. Both branches always admit an index; failure to find one
//! indicates a bug, not bad input.
//!
//! Everything here is deterministic: ties in the anchor choice fall to the
//! smaller point id and node ids are assigned in construction order, so two
//! builds of the same input are structurally identical.

use crate::metric::MetricSpace;
use crate::ultrametric::{UltraTree, UltraTreeBuilder};
use crate::{Error, Result};
use std::sync::OnceLock;

/// Which branch of [`beta`] governs shell selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Size,
    Diameter,
}

/// Construction parameters recorded on a [`MultiEmbedding`].
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedParams {
    /// Built by [`build_ultrametric_embedding`].
    Ultra {
        t: u32,
        beta: f64,
        criterion: Criterion,
        /// Number of recursion nodes where the diameter condition was
        /// undefined (local diameter < 1) and the size condition was used
        /// instead.
        diameter_fallbacks: usize,
    },
    /// Built by [`crate::embed_tree::build_path_star`].
    Star { s: usize, delta: f64 },
    /// Built by [`crate::prob::union_under_root`].
    Union { seeds: Vec<u64> },
}

impl EmbedParams {
    /// The `t` recorded at construction, if this is a shell construction.
    pub fn t(&self) -> Option<u32> {
        match *self {
            EmbedParams::Ultra { t, .. } => Some(t),
            _ => None,
        }
    }
}

/// Target space of a multi-embedding. Its *points* are the target metric's
/// elements: leaves of an ultrametric tree, or path nodes of a star.
#[derive(Debug, Clone)]
pub enum Target {
    Ultra(UltraTree),
    Star(crate::embed_tree::StarTree),
}

impl Target {
    pub fn point_count(&self) -> usize {
        match self {
            Target::Ultra(t) => t.leaf_count(),
            Target::Star(s) => s.point_count(),
        }
    }

    /// The surjection `f`: source point owning target point `idx`.
    pub fn point_source(&self, idx: usize) -> usize {
        match self {
            Target::Ultra(t) => t.leaf_point(idx),
            Target::Star(s) => s.point_source(idx),
        }
    }

    /// Target metric distance between two target points.
    pub fn distance(&self, a: usize, b: usize) -> Result<f64> {
        match self {
            Target::Ultra(t) => t.tree_distance(a, b),
            Target::Star(s) => s.distance(a, b),
        }
    }

    pub fn as_ultra(&self) -> Option<&UltraTree> {
        match self {
            Target::Ultra(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_star(&self) -> Option<&crate::embed_tree::StarTree> {
        match self {
            Target::Star(s) => Some(s),
            _ => None,
        }
    }

    /// Materializes the target's point-to-point distances as a [`MetricSpace`]
    /// so that solvers written against plain metrics can run on it. Refused
    /// above `cap` points: the matrix is quadratic.
    pub fn to_metric(&self, cap: usize) -> Result<MetricSpace> {
        let n = self.point_count();
        if n > cap {
            return Err(Error::Budget(format!(
                "target has {n} points, above the materialization cap {cap}"
            )));
        }
        let mut d = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let v = self.distance(a, b)?;
                d[a * n + b] = v;
                d[b * n + a] = v;
            }
        }
        MetricSpace::new(n, d, None)
    }
}

/// A multi-embedding: a target space, the fiber of target points owned by
/// each source point, and the parameters it was built with. The surjection
/// is total (every target point belongs to exactly one fiber) and every
/// fiber is nonempty.
#[derive(Debug)]
pub struct MultiEmbedding {
    pub source: MetricSpace,
    pub target: Target,
    /// `fibers[p]` lists the target point indices representing `p`,
    /// ascending.
    pub fibers: Vec<Vec<usize>>,
    pub params: EmbedParams,
    supports: OnceLock<Vec<Vec<u32>>>,
}

impl Clone for MultiEmbedding {
    fn clone(&self) -> Self {
        MultiEmbedding {
            source: self.source.clone(),
            target: self.target.clone(),
            fibers: self.fibers.clone(),
            params: self.params.clone(),
            supports: OnceLock::new(),
        }
    }
}

impl MultiEmbedding {
    /// Assembles and cross-checks the pieces: fiber lists must partition the
    /// target points and agree with the target's own point-to-source map.
    pub fn new(
        source: MetricSpace,
        target: Target,
        fibers: Vec<Vec<usize>>,
        params: EmbedParams,
    ) -> Result<Self> {
        let n = source.n();
        if fibers.len() != n {
            return Err(Error::Mismatch(format!(
                "{} fibers for {} source points",
                fibers.len(),
                n
            )));
        }
        let total = target.point_count();
        let mut owner = vec![usize::MAX; total];
        for (p, fiber) in fibers.iter().enumerate() {
            if fiber.is_empty() {
                return Err(Error::Mismatch(format!("point {p} has an empty fiber")));
            }
            let mut prev = None;
            for &idx in fiber {
                if idx >= total {
                    return Err(Error::Mismatch(format!(
                        "fiber of {p} references target point {idx} of {total}"
                    )));
                }
                if prev.is_some_and(|q| q >= idx) {
                    return Err(Error::Mismatch(format!("fiber of {p} is not ascending")));
                }
                prev = Some(idx);
                if owner[idx] != usize::MAX {
                    return Err(Error::Mismatch(format!(
                        "target point {idx} claimed by both {} and {p}",
                        owner[idx]
                    )));
                }
                owner[idx] = p;
                if target.point_source(idx) != p {
                    return Err(Error::Mismatch(format!(
                        "target point {idx} maps to {} but sits in fiber of {p}",
                        target.point_source(idx)
                    )));
                }
            }
        }
        if let Some(unclaimed) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Mismatch(format!(
                "target point {unclaimed} belongs to no fiber"
            )));
        }
        Ok(MultiEmbedding {
            source,
            target,
            fibers,
            params,
            supports: OnceLock::new(),
        })
    }

    pub fn fiber(&self, p: usize) -> Result<&[usize]> {
        self.fibers
            .get(p)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Lookup(format!("no source point {p}")))
    }

    /// For ultrametric targets: sorted source points represented under each
    /// tree node, computed once on demand.
    pub(crate) fn supports(&self) -> &[Vec<u32>] {
        self.supports.get_or_init(|| {
            let tree = match &self.target {
                Target::Ultra(t) => t,
                Target::Star(_) => return Vec::new(),
            };
            let mut sup: Vec<Vec<u32>> = vec![Vec::new(); tree.node_count()];
            // Post-order accumulation; children have larger... no, children
            // have *smaller* ids (built bottom-up), so a simple forward pass
            // over ids resolves children before parents.
            for id in 0..tree.node_count() {
                let node = tree.node(id);
                if node.children.is_empty() {
                    sup[id] = vec![node.point.unwrap() as u32];
                } else {
                    let mut acc: Vec<u32> = Vec::new();
                    for &c in &node.children {
                        acc = merge_sorted(&acc, &sup[c]);
                    }
                    sup[id] = acc;
                }
            }
            sup
        })
    }

    /// Does source point `p` have a representative below tree node `node`?
    pub(crate) fn has_point_under(&self, node: usize, p: usize) -> bool {
        self.supports()[node].binary_search(&(p as u32)).is_ok()
    }
}

fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let x = match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                i += 1;
                a[i - 1]
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                b[j - 1]
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                a[i - 1]
            }
        };
        out.push(x);
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Size exponent: the tree has at most `n^beta` leaves. Returns the value
/// and which branch attained the minimum (ties go to the size branch).
///
/// `beta = min( (log2 n)^(1/t), (t * log2(4*delta))^(2/t) )`, for `n >= 1`,
/// `delta >= 1`, `t >= 1`.
pub fn beta(n: usize, delta: f64, t: u32) -> Result<(f64, Criterion)> {
    if n < 1 {
        return Err(Error::InvalidParameter("beta needs n >= 1".into()));
    }
    if delta.is_nan() || delta < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "beta needs delta >= 1, got {delta}"
        )));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("beta needs t >= 1".into()));
    }
    let size = (n as f64).log2().powf(1.0 / t as f64);
    let diam = (t as f64 * (4.0 * delta).log2()).powf(2.0 / t as f64);
    if size <= diam {
        Ok((size, Criterion::Size))
    } else {
        Ok((diam, Criterion::Diameter))
    }
}

/// Ring decomposition of a point subset around its diameter anchor.
#[derive(Debug, Clone)]
pub struct ShellDecomposition {
    /// Anchor point (global id).
    pub anchor: usize,
    /// Exact diameter of the subset.
    pub diameter: f64,
    /// `rings[i] = A_i`, global ids ascending; `rings[0] = {anchor}`,
    /// `rings[i] = {y : d(anchor, y) < i * diameter / (4t)}` for `i >= 1`.
    pub rings: Vec<Vec<usize>>,
    /// `fractions[i] = |A_i| / |subset|`.
    pub fractions: Vec<f64>,
}

/// Strict ring membership `d < i * delta / (4t)`, compared in product form
/// so integral inputs are decided exactly.
#[inline]
pub(crate) fn ring_member(dist: f64, i: u32, delta: f64, t: u32) -> bool {
    4.0 * t as f64 * dist < i as f64 * delta
}

/// Diameter pair restricted to `subset` (global ids, ascending), anchored by
/// the same rules as [`MetricSpace::diameter_anchor`].
pub(crate) fn anchor_of_subset(m: &MetricSpace, subset: &[usize]) -> Result<(usize, f64)> {
    if subset.len() < 2 {
        return Err(Error::InvalidInput("anchor needs at least 2 points".into()));
    }
    let (mut bi, mut bj, mut diam) = (subset[0], subset[1], m.dist(subset[0], subset[1]));
    for (ai, &i) in subset.iter().enumerate() {
        for &j in &subset[ai + 1..] {
            if m.dist(i, j) > diam {
                diam = m.dist(i, j);
                bi = i;
                bj = j;
            }
        }
    }
    let ball = |x: usize| {
        subset
            .iter()
            .filter(|&&y| 4.0 * m.dist(x, y) < diam)
            .count()
    };
    if 2 * ball(bi) <= subset.len() {
        Ok((bi, diam))
    } else if 2 * ball(bj) <= subset.len() {
        Ok((bj, diam))
    } else {
        Err(Error::Internal(
            "no diameter endpoint has a small quarter ball".into(),
        ))
    }
}

/// Builds the ring decomposition of `subset` (>= 2 points) for parameter `t`.
pub fn decompose(m: &MetricSpace, subset: &[usize], t: u32) -> Result<ShellDecomposition> {
    if t < 1 {
        return Err(Error::InvalidParameter("decompose needs t >= 1".into()));
    }
    let (anchor, diameter) = anchor_of_subset(m, subset)?;
    let nprime = subset.len() as f64;
    let mut rings = Vec::with_capacity(t as usize + 1);
    rings.push(vec![anchor]);
    for i in 1..=t {
        rings.push(
            subset
                .iter()
                .copied()
                .filter(|&y| ring_member(m.dist(anchor, y), i, diameter, t))
                .collect(),
        );
    }
    let last = &rings[t as usize];
    if 2 * last.len() > subset.len() {
        return Err(Error::Internal(
            "quarter ball around anchor exceeds half the subset".into(),
        ));
    }
    let fractions = rings.iter().map(|r| r.len() as f64 / nprime).collect();
    Ok(ShellDecomposition {
        anchor,
        diameter,
        rings,
        fractions,
    })
}

/// Picks the smallest shell index `i` in `1..=t` whose growth condition
/// holds. `n` and `delta` are the *current* subset's size and diameter; the
/// diameter branch requires `delta >= 1` (callers fall back to the size
/// branch below that).
///
/// Size branch: `e_{i-1} >= e_i ^ beta(n)` with `beta(n) = (log2 n)^(1/t)`.
/// Diameter branch: `e_{i-1} >= e_i ^ b(delta/2) * n^(b(delta/2) - b(delta))`
/// with `b(x) = (t * log2(4x))^(2/t)`.
///
/// Both conditions are satisfiable for every valid decomposition (the ring
/// fractions start at `1/n` and end at `<= 1/2`), so exhaustion is an
/// internal error. Comparisons allow the crate-wide relative tolerance.
pub fn select_shell(
    dec: &ShellDecomposition,
    n: usize,
    delta: f64,
    t: u32,
    criterion: Criterion,
) -> Result<usize> {
    let holds: Box<dyn Fn(f64, f64) -> bool> = match criterion {
        Criterion::Size => {
            let b = (n as f64).log2().powf(1.0 / t as f64);
            Box::new(move |prev: f64, cur: f64| crate::ge_tol(prev, cur.powf(b)))
        }
        Criterion::Diameter => {
            if delta.is_nan() || delta < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "diameter criterion needs delta >= 1, got {delta}"
                )));
            }
            let b_half = (t as f64 * (2.0 * delta).log2()).powf(2.0 / t as f64);
            let b_full = (t as f64 * (4.0 * delta).log2()).powf(2.0 / t as f64);
            let discount = (n as f64).powf(b_half - b_full);
            Box::new(move |prev: f64, cur: f64| crate::ge_tol(prev, cur.powf(b_half) * discount))
        }
    };
    for i in 1..=t as usize {
        if holds(dec.fractions[i - 1], dec.fractions[i]) {
            return Ok(i);
        }
    }
    Err(Error::Internal(format!(
        "no shell index satisfies the {criterion:?} condition (fractions {:?})",
        dec.fractions
    )))
}

/// Builds the shell-duplication multi-embedding of `m` into an ultrametric.
///
/// The criterion (and the `beta` recorded on the result) is chosen once from
/// the full space's size and aspect ratio, then applied at every recursion
/// level with that level's own size and diameter. Singletons become leaves;
/// two-point sets become a root labeled with their distance over two leaves.
pub fn build_ultrametric_embedding(m: &MetricSpace, t: u32) -> Result<MultiEmbedding> {
    if t < 1 {
        return Err(Error::InvalidParameter("embedding needs t >= 1".into()));
    }
    quick_metric_check(m)?;
    let n = m.n();
    let (beta_val, criterion) = beta(n, m.aspect_ratio().max(1.0), t)?;

    struct Ctx<'a> {
        m: &'a MetricSpace,
        t: u32,
        criterion: Criterion,
        builder: UltraTreeBuilder,
        fibers: Vec<Vec<usize>>,
        leaf_count: usize,
        fallbacks: usize,
    }

    fn rec(ctx: &mut Ctx, subset: Vec<usize>) -> Result<usize> {
        match subset.len() {
            0 => Err(Error::Internal("empty recursion subset".into())),
            1 => {
                let id = ctx.builder.leaf(subset[0]);
                ctx.fibers[subset[0]].push(ctx.leaf_count);
                ctx.leaf_count += 1;
                Ok(id)
            }
            2 => {
                let (a, b) = (subset[0], subset[1]);
                let la = ctx.builder.leaf(a);
                ctx.fibers[a].push(ctx.leaf_count);
                ctx.leaf_count += 1;
                let lb = ctx.builder.leaf(b);
                ctx.fibers[b].push(ctx.leaf_count);
                ctx.leaf_count += 1;
                Ok(ctx.builder.internal(ctx.m.dist(a, b), vec![la, lb]))
            }
            nsub => {
                let dec = decompose(ctx.m, &subset, ctx.t)?;
                let criterion = match ctx.criterion {
                    Criterion::Diameter if dec.diameter < 1.0 => {
                        ctx.fallbacks += 1;
                        Criterion::Size
                    }
                    c => c,
                };
                let i_star = select_shell(&dec, nsub, dec.diameter, ctx.t, criterion)?;
                let left = dec.rings[i_star].clone();
                let inner: &[usize] = &dec.rings[i_star - 1];
                let right: Vec<usize> = subset
                    .iter()
                    .copied()
                    .filter(|y| inner.binary_search(y).is_err())
                    .collect();
                let label = dec.diameter;
                let lnode = rec(ctx, left)?;
                let rnode = rec(ctx, right)?;
                Ok(ctx.builder.internal(label, vec![lnode, rnode]))
            }
        }
    }

    let mut ctx = Ctx {
        m,
        t,
        criterion,
        builder: UltraTreeBuilder::new(),
        fibers: vec![Vec::new(); n],
        leaf_count: 0,
        fallbacks: 0,
    };
    let root = rec(&mut ctx, (0..n).collect())?;
    let tree = ctx.builder.finish(root, n, 1.0)?;
    MultiEmbedding::new(
        m.clone(),
        Target::Ultra(tree),
        ctx.fibers,
        EmbedParams::Ultra {
            t,
            beta: beta_val,
            criterion,
            diameter_fallbacks: ctx.fallbacks,
        },
    )
}

/// O(n^2) sanity on the parts of metric validity the construction leans on.
/// The full triangle check stays in [`MetricSpace::validate`].
fn quick_metric_check(m: &MetricSpace) -> Result<()> {
    for i in 0..m.n() {
        if m.dist(i, i) != 0.0 {
            return Err(Error::InvalidInput(format!("d({i},{i}) != 0")));
        }
        for j in (i + 1)..m.n() {
            if m.dist(i, j) != m.dist(j, i) {
                return Err(Error::InvalidInput(format!("d({i},{j}) asymmetric")));
            }
            if m.dist(i, j) <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "d({i},{j}) = {} not positive",
                    m.dist(i, j)
                )));
            }
        }
    }
    Ok(())
}

/// One defect found by [`audit_embedding`]. Indices are leaf indices for
/// pair checks and tree node ids for structural checks.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum AuditViolation {
    /// Target distance below source distance for a leaf pair.
    Contraction { a: usize, b: usize },
    /// Internal node without exactly two children.
    NotBinary { node: usize },
    /// Ultrametric label structure broken (monotonicity / zero-iff-leaf).
    LabelStructure { node: usize },
    /// Internal label differs from the exact diameter of its support.
    LabelNotDiameter { node: usize },
    /// A point's fiber is empty or inconsistent with the tree.
    FiberBroken { point: usize },
    /// Children supports do not match the recomputed ring split.
    SupportMismatch { node: usize },
    /// Points exclusive to the two children sit closer than `label/(4t)`.
    SeparationTooClose { node: usize, x: usize, y: usize },
    /// Left child holds more than half the node's support.
    LeftSupportTooLarge { node: usize },
    /// Left child label exceeds half the node's label.
    LeftDiameterTooLarge { node: usize },
    /// Leaf count exceeds `n^beta`.
    SizeBound { leaves: usize, bound: f64 },
}

/// Audit outcome; `violations` empty means every promised property holds.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AuditReport {
    pub violations: Vec<AuditViolation>,
    pub leaf_count: usize,
    pub size_bound: f64,
    /// Leaf pairs whose non-contraction was checked (exhaustive up to 2000
    /// leaves, deterministically sampled beyond).
    pub checked_pairs: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive-or-sampled cutoff for pairwise checks.
const EXHAUSTIVE_LEAVES: usize = 2000;
const SAMPLED_PAIRS: usize = 200_000;

/// Checks that no target pair lands closer than its source pair, for any
/// target kind. Exhaustive up to [`EXHAUSTIVE_LEAVES`] points, sampled
/// (fixed-seed LCG, reproducible) beyond. Returns the offending target pairs
/// and the number of pairs checked.
pub fn noncontraction_violations(me: &MultiEmbedding) -> Result<(Vec<(usize, usize)>, usize)> {
    let points = me.target.point_count();
    let mut bad = Vec::new();
    let mut checked = 0usize;
    let check = |a: usize, b: usize, bad: &mut Vec<(usize, usize)>| -> Result<()> {
        let dn = me.target.distance(a, b)?;
        let dm = me
            .source
            .dist(me.target.point_source(a), me.target.point_source(b));
        if !crate::ge_tol(dn, dm) {
            bad.push((a, b));
        }
        Ok(())
    };
    if points <= EXHAUSTIVE_LEAVES {
        for a in 0..points {
            for b in (a + 1)..points {
                check(a, b, &mut bad)?;
                checked += 1;
            }
        }
    } else {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..SAMPLED_PAIRS {
            let a = next() % points;
            let b = next() % points;
            if a != b {
                check(a, b, &mut bad)?;
                checked += 1;
            }
        }
    }
    Ok((bad, checked))
}

/// Re-derives every promise of [`build_ultrametric_embedding`] from the
/// finished embedding alone (no construction trace needed: the split rule is
/// deterministic, so the auditor recomputes each node's expected ring split
/// from the node's support set and compares).
pub fn audit_embedding(me: &MultiEmbedding) -> Result<AuditReport> {
    let tree = me.target.as_ultra().ok_or_else(|| {
        Error::InvalidInput("audit_embedding expects an ultrametric target".into())
    })?;
    let (t, beta_val, criterion) = match me.params {
        EmbedParams::Ultra {
            t, beta, criterion, ..
        } => (t, beta, criterion),
        _ => {
            return Err(Error::InvalidInput(
                "audit_embedding expects shell-construction parameters".into(),
            ))
        }
    };
    let m = &me.source;
    let mut violations = Vec::new();

    // Fibers vs. tree agreement.
    for p in 0..m.n() {
        let fiber = &me.fibers[p];
        if fiber.is_empty() || fiber.iter().any(|&l| tree.leaf_point(l) != p) {
            violations.push(AuditViolation::FiberBroken { point: p });
        }
    }

    // Label structure (ultrametric validity) and arity.
    for v in tree.validate_hst(1.0).violations {
        let node = match v {
            crate::ultrametric::HstViolation::LeafLabelNonzero { node } => node,
            crate::ultrametric::HstViolation::InternalLabelNonpositive { node } => node,
            crate::ultrametric::HstViolation::ChildLabelTooLarge { child, .. } => child,
        };
        violations.push(AuditViolation::LabelStructure { node });
    }
    for id in 0..tree.node_count() {
        if !tree.is_leaf(id) && tree.node(id).children.len() != 2 {
            violations.push(AuditViolation::NotBinary { node: id });
        }
    }

    // Non-contraction over leaf pairs.
    let leaves = tree.leaf_count();
    let mut checked_pairs = 0;
    let check_pair = |a: usize, b: usize, violations: &mut Vec<AuditViolation>| {
        let dn = tree.tree_distance(a, b).expect("leaf indices in range");
        let dm = m.dist(tree.leaf_point(a), tree.leaf_point(b));
        if !crate::ge_tol(dn, dm) {
            violations.push(AuditViolation::Contraction { a, b });
        }
    };
    if leaves <= EXHAUSTIVE_LEAVES {
        for a in 0..leaves {
            for b in (a + 1)..leaves {
                check_pair(a, b, &mut violations);
                checked_pairs += 1;
            }
        }
    } else {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..SAMPLED_PAIRS {
            let a = next() % leaves;
            let b = next() % leaves;
            if a != b {
                check_pair(a, b, &mut violations);
                checked_pairs += 1;
            }
        }
    }

    // Structural recursion properties, node by node.
    let sup = me.supports();
    for id in 0..tree.node_count() {
        if tree.is_leaf(id) {
            continue;
        }
        let node = tree.node(id);
        let support: Vec<usize> = sup[id].iter().map(|&x| x as usize).collect();
        let label = node.label;

        match anchor_of_subset(m, &support) {
            Ok((_anchor, diam)) => {
                if !(crate::le_tol(label, diam) && crate::ge_tol(label, diam)) {
                    violations.push(AuditViolation::LabelNotDiameter { node: id });
                }
                if node.children.len() == 2 && support.len() > 2 {
                    let criterion = match criterion {
                        Criterion::Diameter if diam < 1.0 => Criterion::Size,
                        c => c,
                    };
                    let expect = decompose(m, &support, t).and_then(|dec| {
                        let i = select_shell(&dec, support.len(), diam, t, criterion)?;
                        Ok((dec, i))
                    });
                    match expect {
                        Ok((dec, i_star)) => {
                            let want_left = &dec.rings[i_star];
                            let inner = &dec.rings[i_star - 1];
                            let want_right: Vec<usize> = support
                                .iter()
                                .copied()
                                .filter(|y| inner.binary_search(y).is_err())
                                .collect();
                            let got_left: Vec<usize> =
                                sup[node.children[0]].iter().map(|&x| x as usize).collect();
                            let got_right: Vec<usize> =
                                sup[node.children[1]].iter().map(|&x| x as usize).collect();
                            if got_left != *want_left || got_right != want_right {
                                violations.push(AuditViolation::SupportMismatch { node: id });
                            }
                        }
                        Err(_) => violations.push(AuditViolation::SupportMismatch { node: id }),
                    }
                }
            }
            Err(_) => violations.push(AuditViolation::LabelNotDiameter { node: id }),
        }

        if node.children.len() == 2 {
            let (lc, rc) = (node.children[0], node.children[1]);
            // Separation: exclusive points of the two sides are at least
            // label/(4t) apart (product form keeps integral inputs exact).
            let lsup = &sup[lc];
            let rsup = &sup[rc];
            for &x in lsup.iter().filter(|x| rsup.binary_search(x).is_err()) {
                for &y in rsup.iter().filter(|y| lsup.binary_search(y).is_err()) {
                    if !crate::ge_tol(4.0 * t as f64 * m.dist(x as usize, y as usize), label) {
                        violations.push(AuditViolation::SeparationTooClose {
                            node: id,
                            x: x as usize,
                            y: y as usize,
                        });
                    }
                }
            }
            if 2 * lsup.len() > support.len() {
                violations.push(AuditViolation::LeftSupportTooLarge { node: id });
            }
            if !crate::le_tol(2.0 * tree.node(lc).label, label) {
                violations.push(AuditViolation::LeftDiameterTooLarge { node: id });
            }
        }
    }

    let size_bound = (m.n() as f64).powf(beta_val);
    if !crate::le_tol(leaves as f64, size_bound) {
        violations.push(AuditViolation::SizeBound {
            leaves,
            bound: size_bound,
        });
    }

    Ok(AuditReport {
        violations,
        leaf_count: leaves,
        size_bound,
        checked_pairs,
    })
}
