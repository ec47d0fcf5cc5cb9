/*!
Multi-embeddings of finite metric spaces into ultrametrics and trees.

A classical embedding maps each source point to one target point and pays
for it: any tree target forces distortion that grows with the source size.
A *multi-embedding* instead maps a larger target space *onto* the source
(every target point knows which source point it represents, every source
point owns at least one representative) and asks only that distances never
contract. Choosing representatives per use lets a modest-size tree answer
path and sequencing questions about the source far better than any
single-copy tree embedding can.

The crate provides:

- [`metric`]: dense finite metrics, weighted graphs and their shortest-path
  closures, validity checking, and deterministic instance generators.
- [`ultrametric`]: rooted labeled trees whose leaf distances are given by
  the label of the lowest common ancestor, plus k-HST rounding.
- [`embed_ultra`]: the shell-duplication construction embedding any n-point
  metric into an ultrametric with at most `n^beta` leaves, and an auditor
  that re-derives every promised property from the finished tree.
- [`realize`]: turning source paths into target paths whose length exceeds
  the original by at most a logarithmic factor, optimal representative
  paths by dynamic programming, and distortion experiments.
- [`embed_tree`]: the star-of-walks construction for unweighted graphs,
  trading target size for constant path stretch.
- [`gst`]: group Steiner tree instances, how a multi-embedding transports
  them to its target, exact and greedy tree solvers, a small exact oracle,
  and projection of target solutions back to the source.
- [`mts`]: metrical task systems, offline optimum and work-function online
  play, and the transport of task sequences through a multi-embedding.
- [`prob`]: randomized single-tree embeddings and their union, which turns
  an ensemble of trees into one multi-embedding.
- [`io`]: JSON and TSV wire formats for everything above.

Distances are `f64`; comparisons that a promise hinges on go through
[`le_tol`]/[`ge_tol`] with the crate-wide relative tolerance [`REL_TOL`].
All randomized code takes explicit seeds and is reproducible bit for bit.
*/

pub mod embed_tree;
pub mod embed_ultra;
mod error;
pub mod gst;
pub mod io;
pub mod metric;
pub mod mts;
pub mod prob;
pub mod realize;
pub mod ultrametric;

pub use embed_tree::StarTree;
pub use embed_ultra::{Criterion, EmbedParams, MultiEmbedding, Target};
pub use error::{Error, Result};
pub use metric::{Graph, MetricSpace};
pub use ultrametric::UltraTree;

/// Relative tolerance for floating-point comparisons that carry semantic
/// weight (validity checks, audits, bound assertions).
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to [`REL_TOL`] relative to the larger magnitude (and to 1,
/// so comparisons near zero are absolute).
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(a.abs()).max(1.0)
}

/// `a >= b` up to [`REL_TOL`]; mirror of [`le_tol`].
pub fn ge_tol(a: f64, b: f64) -> bool {
    le_tol(b, a)
}
