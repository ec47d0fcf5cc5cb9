//! Wire formats: JSON for metrics, trees, embeddings, instances, solutions
//! and reports, TSV for graphs, CSV for per-trial tables.
//!
//! Every writer here is deterministic (fixed field order, shortest
//! round-trip float formatting), so identical inputs produce byte-identical
//! files. Readers accept either inline objects or a string holding a file
//! path for the `space`/`metric_ref` fields; paths resolve against the
//! process working directory, and a `.tsv` suffix selects the graph reader.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::embed_tree::StarTree;
use crate::embed_ultra::{Criterion, EmbedParams, MultiEmbedding, Target};
use crate::error::{Error, Result};
use crate::gst::{GstInstance, GstSpace, SteinerSolution};
use crate::metric::{from_graph, Graph, MetricSpace};
use crate::mts::{MtsInstance, INF_CAP};
use crate::realize::DistortionStats;
use crate::ultrametric::{UltraTree, UltraTreeBuilder};

/// Parses JSON without the default nesting limit; hierarchy files can be as
/// deep as the source is large.
fn from_str_deep<T: DeserializeOwned>(s: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(s);
    de.disable_recursion_limit();
    let v = T::deserialize(&mut de)?;
    de.end()?;
    Ok(v)
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    n: usize,
    d: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

pub fn metric_to_json(m: &MetricSpace) -> Result<String> {
    let wire = MetricJson {
        n: m.n(),
        d: m.matrix().to_vec(),
        labels: m.labels().map(<[String]>::to_vec),
    };
    Ok(serde_json::to_string(&wire)?)
}

pub fn metric_from_json(s: &str) -> Result<MetricSpace> {
    let wire: MetricJson = from_str_deep(s)?;
    MetricSpace::new(wire.n, wire.d, wire.labels)
}

/// `# n=<count>` header, then one `u<TAB>v<TAB>w` line per edge.
pub fn graph_to_tsv(g: &Graph) -> String {
    let mut out = format!("# n={}\n", g.n());
    for &(u, v, w) in g.edges() {
        out.push_str(&format!("{u}\t{v}\t{w}\n"));
    }
    out
}

pub fn graph_from_tsv(s: &str) -> Result<Graph> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let n: usize = header
        .strip_prefix("# n=")
        .ok_or_else(|| Error::Parse("graph file must start with '# n=<count>'".into()))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad vertex count: {e}")))?;
    let mut edges = Vec::new();
    for (ln, line) in lines.enumerate() {
        let mut cols = line.split('\t');
        let mut field = |name: &str| {
            cols.next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing {name}", ln + 2)))
        };
        let u: usize = field("u")?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        let v: usize = field("v")?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        let w: f64 = field("w")?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        edges.push((u, v, w));
    }
    let unweighted = edges.iter().all(|&(_, _, w)| w == 1.0);
    Graph::new(n, edges, unweighted)
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    label: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    children: Option<Vec<NodeJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    k: f64,
    source_n: usize,
    root: NodeJson,
}

fn node_to_json(tree: &UltraTree, id: usize) -> NodeJson {
    let node = tree.node(id);
    if tree.is_leaf(id) {
        NodeJson {
            label: 0.0,
            children: None,
            point: node.point,
        }
    } else {
        NodeJson {
            label: node.label,
            children: Some(
                node.children
                    .iter()
                    .map(|&c| node_to_json(tree, c))
                    .collect(),
            ),
            point: None,
        }
    }
}

fn node_from_json(b: &mut UltraTreeBuilder, node: &NodeJson) -> Result<usize> {
    match (&node.children, node.point) {
        (Some(children), None) if !children.is_empty() => {
            let ids = children
                .iter()
                .map(|c| node_from_json(b, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(b.internal(node.label, ids))
        }
        (None, Some(p)) => Ok(b.leaf(p)),
        _ => Err(Error::Parse(
            "tree node must carry either children or a point".into(),
        )),
    }
}

fn tree_wire(tree: &UltraTree) -> TreeJson {
    TreeJson {
        k: tree.k(),
        source_n: tree.source_n(),
        root: node_to_json(tree, tree.root()),
    }
}

fn tree_unwire(wire: &TreeJson) -> Result<UltraTree> {
    let mut b = UltraTreeBuilder::new();
    let root = node_from_json(&mut b, &wire.root)?;
    b.finish(root, wire.source_n, wire.k)
}

pub fn tree_to_json(tree: &UltraTree) -> Result<String> {
    Ok(serde_json::to_string(&tree_wire(tree))?)
}

pub fn tree_from_json(s: &str) -> Result<UltraTree> {
    tree_unwire(&from_str_deep(s)?)
}

#[derive(Serialize, Deserialize)]
struct StarJson {
    delta: f64,
    s: usize,
    paths: Vec<Vec<u32>>,
}

pub fn star_to_json(star: &StarTree) -> Result<String> {
    let wire = StarJson {
        delta: star.delta(),
        s: star.s(),
        paths: star.paths().to_vec(),
    };
    Ok(serde_json::to_string(&wire)?)
}

pub fn star_from_json(s: &str) -> Result<StarTree> {
    let wire: StarJson = from_str_deep(s)?;
    StarTree::new(wire.delta, wire.s, wire.paths)
}

/// Either an inline metric object or a path to one (a `.tsv` path names a
/// graph whose closure is taken).
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpaceRef {
    Inline(MetricJson),
    Path(String),
}

fn resolve_space(space: &SpaceRef) -> Result<MetricSpace> {
    match space {
        SpaceRef::Inline(wire) => MetricSpace::new(wire.n, wire.d.clone(), wire.labels.clone()),
        SpaceRef::Path(path) if path.ends_with(".tsv") => {
            from_graph(&graph_from_tsv(&std::fs::read_to_string(path)?)?)
        }
        SpaceRef::Path(path) => metric_from_json(&std::fs::read_to_string(path)?),
    }
}

fn inline_metric(m: &MetricSpace) -> SpaceRef {
    SpaceRef::Inline(MetricJson {
        n: m.n(),
        d: m.matrix().to_vec(),
        labels: m.labels().map(<[String]>::to_vec),
    })
}

#[derive(Serialize, Deserialize)]
struct EmbeddingJson {
    metric_ref: SpaceRef,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    criterion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter_fallbacks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<TreeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    star: Option<StarJson>,
    fibers: Vec<Vec<usize>>,
}

/// Serializes an embedding with its source metric inlined, so the file is
/// self-contained. The parameter fields identify the construction: `t` for
/// the shell construction, `star` for walk stars, `seeds` for unions.
pub fn embedding_to_json(me: &MultiEmbedding) -> Result<String> {
    let mut wire = EmbeddingJson {
        metric_ref: inline_metric(&me.source),
        t: None,
        beta: None,
        criterion: None,
        diameter_fallbacks: None,
        seeds: None,
        tree: None,
        star: None,
        fibers: me.fibers.clone(),
    };
    match (&me.params, &me.target) {
        (
            EmbedParams::Ultra {
                t,
                beta,
                criterion,
                diameter_fallbacks,
            },
            Target::Ultra(tree),
        ) => {
            wire.t = Some(*t);
            wire.beta = Some(*beta);
            wire.criterion = Some(
                match criterion {
                    Criterion::Size => "size",
                    Criterion::Diameter => "diameter",
                }
                .to_string(),
            );
            wire.diameter_fallbacks = Some(*diameter_fallbacks);
            wire.tree = Some(tree_wire(tree));
        }
        (EmbedParams::Star { .. }, Target::Star(star)) => {
            wire.star = Some(StarJson {
                delta: star.delta(),
                s: star.s(),
                paths: star.paths().to_vec(),
            });
        }
        (EmbedParams::Union { seeds }, Target::Ultra(tree)) => {
            wire.seeds = Some(seeds.clone());
            wire.tree = Some(tree_wire(tree));
        }
        _ => {
            return Err(Error::InvalidInput(
                "parameters do not match the target kind".into(),
            ))
        }
    }
    Ok(serde_json::to_string(&wire)?)
}

pub fn embedding_from_json(s: &str) -> Result<MultiEmbedding> {
    let wire: EmbeddingJson = from_str_deep(s)?;
    let source = resolve_space(&wire.metric_ref)?;
    let (target, params) = if let Some(star) = &wire.star {
        let star = StarTree::new(star.delta, star.s, star.paths.clone())?;
        let params = EmbedParams::Star {
            s: star.s(),
            delta: star.delta(),
        };
        (Target::Star(star), params)
    } else if let Some(tree) = &wire.tree {
        let tree = tree_unwire(tree)?;
        if let Some(seeds) = &wire.seeds {
            (
                Target::Ultra(tree),
                EmbedParams::Union {
                    seeds: seeds.clone(),
                },
            )
        } else {
            let t = wire
                .t
                .ok_or_else(|| Error::Parse("embedding lacks its construction parameter".into()))?;
            let criterion = match wire.criterion.as_deref() {
                Some("size") => Criterion::Size,
                Some("diameter") => Criterion::Diameter,
                other => return Err(Error::Parse(format!("unknown split criterion {other:?}"))),
            };
            let params = EmbedParams::Ultra {
                t,
                beta: wire
                    .beta
                    .ok_or_else(|| Error::Parse("embedding lacks its size exponent".into()))?,
                criterion,
                diameter_fallbacks: wire.diameter_fallbacks.unwrap_or(0),
            };
            (Target::Ultra(tree), params)
        }
    } else {
        return Err(Error::Parse(
            "embedding carries neither tree nor star".into(),
        ));
    };
    MultiEmbedding::new(source, target, wire.fibers, params)
}

#[derive(Serialize, Deserialize)]
struct GstJson {
    space: SpaceRef,
    groups: Vec<Vec<usize>>,
}

/// Graph-backed instances must name their graph file (inline graphs have no
/// JSON form); metric-backed instances are written inline.
pub fn gst_to_json(inst: &GstInstance, graph_path: Option<&str>) -> Result<String> {
    let space = match (inst.space(), graph_path) {
        (GstSpace::Metric(m), _) => inline_metric(m),
        (GstSpace::Graph(_), Some(p)) => SpaceRef::Path(p.to_string()),
        (GstSpace::Graph(_), None) => {
            return Err(Error::InvalidInput(
                "graph-backed instance needs a graph file path".into(),
            ))
        }
    };
    let wire = GstJson {
        space,
        groups: inst.groups().to_vec(),
    };
    Ok(serde_json::to_string(&wire)?)
}

pub fn gst_from_json(s: &str) -> Result<GstInstance> {
    let wire: GstJson = from_str_deep(s)?;
    let space = match &wire.space {
        SpaceRef::Path(path) if path.ends_with(".tsv") => {
            GstSpace::Graph(graph_from_tsv(&std::fs::read_to_string(path)?)?)
        }
        other => GstSpace::Metric(resolve_space(other)?),
    };
    GstInstance::new(space, wire.groups)
}

pub fn solution_to_json(sol: &SteinerSolution) -> Result<String> {
    Ok(serde_json::to_string(sol)?)
}

pub fn solution_from_json(s: &str) -> Result<SteinerSolution> {
    from_str_deep(s)
}

/// Task costs are finite numbers, or the literal `"inf"` for forbidden
/// states (read as the saturation cap, written back as `"inf"`).
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CostJson {
    Num(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
struct MtsJson {
    space: SpaceRef,
    start: usize,
    tasks: Vec<Vec<CostJson>>,
}

pub fn mts_to_json(inst: &MtsInstance) -> Result<String> {
    let tasks = inst
        .tasks()
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| {
                    if c >= INF_CAP {
                        CostJson::Word("inf".to_string())
                    } else {
                        CostJson::Num(c)
                    }
                })
                .collect()
        })
        .collect();
    let wire = MtsJson {
        space: inline_metric(inst.space()),
        start: inst.start(),
        tasks,
    };
    Ok(serde_json::to_string(&wire)?)
}

pub fn mts_from_json(s: &str) -> Result<MtsInstance> {
    let wire: MtsJson = from_str_deep(s)?;
    let space = resolve_space(&wire.space)?;
    let mut tasks = Vec::with_capacity(wire.tasks.len());
    for row in &wire.tasks {
        let mut out = Vec::with_capacity(row.len());
        for c in row {
            out.push(match c {
                CostJson::Num(v) => *v,
                CostJson::Word(w) if w == "inf" => INF_CAP,
                CostJson::Word(w) => {
                    return Err(Error::Parse(format!("unknown cost literal {w:?}")))
                }
            });
        }
        tasks.push(out);
    }
    MtsInstance::new(space, wire.start, tasks)
}

#[derive(Serialize)]
struct StatsJson {
    trials: usize,
    bound: f64,
    max_ratio_realized: f64,
    max_ratio_optimal: f64,
    mean_ratio: f64,
    violations: usize,
}

/// Aggregate view of a distortion run (the per-trial table goes to CSV).
pub fn stats_to_json(st: &DistortionStats) -> Result<String> {
    let wire = StatsJson {
        trials: st.trials.len(),
        bound: st.bound,
        max_ratio_realized: st.max_ratio_realized,
        max_ratio_optimal: st.max_ratio_optimal,
        mean_ratio: st.mean_ratio,
        violations: st.violations,
    };
    Ok(serde_json::to_string(&wire)?)
}

pub fn trials_to_csv(st: &DistortionStats) -> String {
    let mut out = String::from("trial,path_len,realized,optimal\n");
    for t in &st.trials {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.trial, t.source_length, t.realized_length, t.optimal_length
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_tree::build_path_star;
    use crate::embed_ultra::{audit_embedding, build_ultrametric_embedding};
    use crate::metric::{generate, GenSpec, Generated};
    use crate::prob::{sample_ensemble, union_under_root};
    use crate::realize::distortion_stats;

    fn path_metric(n: usize) -> MetricSpace {
        generate(&GenSpec::Path { n }, 0).unwrap().metric().unwrap()
    }

    #[test]
    fn metric_round_trip_keeps_labels() {
        let m = MetricSpace::new(
            2,
            vec![0.0, 2.5, 2.5, 0.0],
            Some(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        let s = metric_to_json(&m).unwrap();
        let back = metric_from_json(&s).unwrap();
        assert_eq!(back.matrix(), m.matrix());
        assert_eq!(back.labels(), m.labels());
    }

    #[test]
    fn graph_tsv_round_trip() {
        let g = match generate(&GenSpec::Cycle { n: 5 }, 0).unwrap() {
            Generated::Graph(g) => g,
            _ => panic!("expected graph"),
        };
        let s = graph_to_tsv(&g);
        assert!(s.starts_with("# n=5\n"));
        let back = graph_from_tsv(&s).unwrap();
        assert_eq!(back.n(), 5);
        assert_eq!(back.edges(), g.edges());
        assert!(back.is_unweighted());
        assert!(graph_from_tsv("0\t1\t1\n").is_err());
    }

    #[test]
    fn deep_tree_round_trip() {
        let m = path_metric(64);
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let tree = me.target.as_ultra().unwrap();
        let s = tree_to_json(tree).unwrap();
        let back = tree_from_json(&s).unwrap();
        assert_eq!(back.leaf_count(), tree.leaf_count());
        assert_eq!(back.source_n(), tree.source_n());
        for (a, b) in [(0usize, 1usize), (3, 17), (5, back.leaf_count() - 1)] {
            assert_eq!(
                back.tree_distance(a, b).unwrap(),
                tree.tree_distance(a, b).unwrap()
            );
        }
    }

    #[test]
    fn ultra_embedding_round_trip_stays_auditable() {
        let m = path_metric(16);
        let me = build_ultrametric_embedding(&m, 2).unwrap();
        let s = embedding_to_json(&me).unwrap();
        let back = embedding_from_json(&s).unwrap();
        assert_eq!(back.fibers, me.fibers);
        assert_eq!(back.params, me.params);
        assert!(audit_embedding(&back).unwrap().is_clean());
    }

    #[test]
    fn star_embedding_round_trip() {
        let g = match generate(&GenSpec::Hypercube { h: 3 }, 0).unwrap() {
            Generated::Graph(g) => g,
            _ => panic!("expected graph"),
        };
        let me = build_path_star(&g, 1, 10_000_000).unwrap();
        let s = embedding_to_json(&me).unwrap();
        let back = embedding_from_json(&s).unwrap();
        assert_eq!(back.fibers, me.fibers);
        let star = back.target.as_star().unwrap();
        assert_eq!(star.paths(), me.target.as_star().unwrap().paths());
        assert_eq!(star.delta(), 3.0);
    }

    #[test]
    fn union_embedding_round_trip_keeps_seeds() {
        let m = path_metric(6);
        let sample = sample_ensemble(&m, &[4, 9]).unwrap();
        let me = union_under_root(&sample).unwrap();
        let back = embedding_from_json(&embedding_to_json(&me).unwrap()).unwrap();
        assert_eq!(back.params, EmbedParams::Union { seeds: vec![4, 9] });
        assert_eq!(back.fibers, me.fibers);
    }

    #[test]
    fn gst_and_solution_round_trip() {
        let inst =
            GstInstance::new(GstSpace::Metric(path_metric(5)), vec![vec![0, 1], vec![4]]).unwrap();
        let back = gst_from_json(&gst_to_json(&inst, None).unwrap()).unwrap();
        assert_eq!(back.groups(), inst.groups());
        assert_eq!(back.metric().matrix(), inst.metric().matrix());

        let sol = SteinerSolution {
            vertices: vec![0, 1, 4],
            edges: vec![(0, 1), (1, 4)],
            cost: 4.0,
        };
        let s = solution_to_json(&sol).unwrap();
        assert_eq!(solution_from_json(&s).unwrap(), sol);
        assert!(s.contains("\"edges\":[[0,1],[1,4]]"));
    }

    #[test]
    fn mts_round_trip_with_forbidden_literal() {
        let m = path_metric(3);
        let inst = MtsInstance::new(
            m,
            0,
            vec![vec![1.0, f64::INFINITY, 0.5], vec![0.0, 0.0, 0.0]],
        )
        .unwrap();
        let s = mts_to_json(&inst).unwrap();
        assert!(s.contains("\"inf\""));
        let back = mts_from_json(&s).unwrap();
        assert_eq!(back.tasks()[0][1], INF_CAP);
        assert_eq!(back.tasks()[0][2], 0.5);
        assert_eq!(back.start(), 0);
        assert!(mts_from_json(&s.replace("inf", "huge")).is_err());
    }

    #[test]
    fn stats_and_csv_shapes() {
        let m = path_metric(8);
        let me = build_ultrametric_embedding(&m, 1).unwrap();
        let st = distortion_stats(&me, 5, 4, 3).unwrap();
        let json = stats_to_json(&st).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["trials"], 4);
        assert!(v["bound"].as_f64().unwrap() > 0.0);
        let csv = trials_to_csv(&st);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("trial,path_len,realized,optimal"));
        assert_eq!(lines.count(), 4);
    }
}
