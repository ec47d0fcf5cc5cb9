//! Metrical task systems: the offline optimum, the work-function online
//! rule, and the reduction of an instance across a multi-embedding.
//!
//! Costs live in `[0, INF_CAP]`. Values at or above [`FORBIDDEN`] mark states
//! a task forbids; arithmetic saturates at [`INF_CAP`] so forbidden mass
//! never overflows or contaminates comparisons.

use serde::Serialize;

use crate::embed_ultra::MultiEmbedding;
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::realize::realization_bound;

/// Saturation ceiling for all cost arithmetic.
pub const INF_CAP: f64 = 1e12;

/// Costs at or above this threshold mean "state forbidden here".
pub const FORBIDDEN: f64 = 1e11;

/// Most target points a reduced instance may have (the reduction
/// materializes the target metric).
const REDUCTION_CAP: usize = 4096;

fn sat_add(a: f64, b: f64) -> f64 {
    (a + b).min(INF_CAP)
}

/// Whether a total cost denotes a feasible run.
pub fn is_feasible_cost(c: f64) -> bool {
    c < FORBIDDEN
}

/// A task system: a state metric, a start state, and `m >= 1` task vectors
/// of per-state service costs.
#[derive(Debug, Clone)]
pub struct MtsInstance {
    space: MetricSpace,
    start: usize,
    tasks: Vec<Vec<f64>>,
}

impl MtsInstance {
    /// Validates shapes and clamps service costs into `[0, INF_CAP]`
    /// (infinities become the cap).
    pub fn new(space: MetricSpace, start: usize, tasks: Vec<Vec<f64>>) -> Result<Self> {
        if start >= space.n() {
            return Err(Error::InvalidInput(format!(
                "start state {start} outside 0..{}",
                space.n()
            )));
        }
        if tasks.is_empty() {
            return Err(Error::InvalidInput(
                "a task system needs at least one task".into(),
            ));
        }
        let mut clamped = Vec::with_capacity(tasks.len());
        for (i, row) in tasks.into_iter().enumerate() {
            if row.len() != space.n() {
                return Err(Error::InvalidInput(format!(
                    "task {i} has {} entries for {} states",
                    row.len(),
                    space.n()
                )));
            }
            let mut out = Vec::with_capacity(row.len());
            for (u, c) in row.into_iter().enumerate() {
                if c.is_nan() || c < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "task {i} has an invalid cost at state {u}"
                    )));
                }
                out.push(c.min(INF_CAP));
            }
            clamped.push(out);
        }
        Ok(Self {
            space,
            start,
            tasks: clamped,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn tasks(&self) -> &[Vec<f64>] {
        &self.tasks
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn m(&self) -> usize {
        self.tasks.len()
    }
}

/// A run: the state occupied after each task, and the total movement plus
/// service cost. A cost at or above [`FORBIDDEN`] means no feasible run
/// exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub states: Vec<usize>,
    pub cost: f64,
}

/// Work-function table after each task, with argmin backpointers: row `i`
/// holds, per state `u`, the cheapest cost of serving tasks `1..=i` and
/// ending at `u`.
fn work_table(inst: &MtsInstance) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let n = inst.n();
    let mut w: Vec<f64> = (0..n)
        .map(|v| if v == inst.start { 0.0 } else { INF_CAP })
        .collect();
    let mut rows = Vec::with_capacity(inst.m());
    let mut pars = Vec::with_capacity(inst.m());
    for task in &inst.tasks {
        let mut next = vec![INF_CAP; n];
        let mut par = vec![0usize; n];
        for u in 0..n {
            let mut best = INF_CAP;
            let mut arg = 0;
            for (v, &wv) in w.iter().enumerate() {
                let cand = sat_add(wv, inst.space.dist(v, u));
                if cand < best {
                    best = cand;
                    arg = v;
                }
            }
            next[u] = sat_add(best, task[u]);
            par[u] = arg;
        }
        rows.push(next.clone());
        pars.push(par);
        w = next;
    }
    (rows, pars)
}

/// Offline optimum by dynamic programming over (task, end state); ties take
/// the smaller state index.
pub fn offline_opt(inst: &MtsInstance) -> Result<Schedule> {
    let (rows, pars) = work_table(inst);
    let last = rows.last().expect("at least one task");
    let mut end = 0;
    for (u, &c) in last.iter().enumerate() {
        if c < last[end] {
            end = u;
        }
    }
    let cost = last[end];
    let mut states = vec![0usize; inst.m()];
    let mut cur = end;
    for i in (0..inst.m()).rev() {
        states[i] = cur;
        cur = pars[i][cur];
    }
    Ok(Schedule { states, cost })
}

/// Online work-function rule: after each task, move to the state minimizing
/// work-function value plus distance from the current state (ties take the
/// smaller index), paying the move and then the service there.
pub fn wfa_online(inst: &MtsInstance) -> Result<Schedule> {
    let n = inst.n();
    let mut w: Vec<f64> = (0..n)
        .map(|v| if v == inst.start { 0.0 } else { INF_CAP })
        .collect();
    let mut cur = inst.start;
    let mut cost = 0.0;
    let mut states = Vec::with_capacity(inst.m());
    for task in &inst.tasks {
        let mut next = vec![INF_CAP; n];
        for (u, slot) in next.iter_mut().enumerate() {
            let mut best = INF_CAP;
            for (v, &wv) in w.iter().enumerate() {
                let cand = sat_add(wv, inst.space.dist(v, u));
                if cand < best {
                    best = cand;
                }
            }
            *slot = sat_add(best, task[u]);
        }
        let mut pick = 0;
        for u in 1..n {
            if sat_add(next[u], inst.space.dist(u, cur))
                < sat_add(next[pick], inst.space.dist(pick, cur))
            {
                pick = u;
            }
        }
        cost = sat_add(cost, sat_add(inst.space.dist(cur, pick), task[pick]));
        cur = pick;
        states.push(pick);
        w = next;
    }
    Ok(Schedule { states, cost })
}

/// Carries a task system across a multi-embedding: one state per target
/// point, each inheriting the service costs of its source point, starting at
/// the smallest-indexed target point of the source start's fiber.
pub fn reduce_tasks(me: &MultiEmbedding, inst: &MtsInstance) -> Result<MtsInstance> {
    if inst.space().n() != me.source.n() || inst.space().matrix() != me.source.matrix() {
        return Err(Error::Mismatch(
            "instance space differs from the embedding's source".into(),
        ));
    }
    let target = me.target.to_metric(REDUCTION_CAP)?;
    let sources: Vec<usize> = (0..target.n()).map(|p| me.target.point_source(p)).collect();
    let tasks: Vec<Vec<f64>> = inst
        .tasks()
        .iter()
        .map(|row| sources.iter().map(|&x| row[x]).collect())
        .collect();
    let start = me.fiber(inst.start())?[0];
    MtsInstance::new(target, start, tasks)
}

/// Side-by-side run of a task system and its reduction. `pulled_back` prices
/// the online target run's footprint in the source space; it can only drop.
#[derive(Debug, Clone, Serialize)]
pub struct MtsReport {
    pub source_opt: f64,
    pub target_opt: f64,
    pub target_online: f64,
    pub pulled_back: f64,
    pub alpha_bound: f64,
    /// `target_opt <= alpha_bound * source_opt`
    pub opt_ok: bool,
    pub opt_margin: f64,
    /// `pulled_back <= target_online`
    pub pullback_ok: bool,
    pub pullback_margin: f64,
}

/// Runs the offline optimum on both sides and the online rule on the target,
/// then reprices the online run back in the source space and checks both
/// transfer inequalities.
pub fn run_experiment(me: &MultiEmbedding, inst: &MtsInstance) -> Result<MtsReport> {
    let source_opt = offline_opt(inst)?.cost;
    let reduced = reduce_tasks(me, inst)?;
    let target_opt = offline_opt(&reduced)?.cost;
    let online = wfa_online(&reduced)?;

    let mut pulled_back = 0.0;
    let mut prev = inst.start();
    for (i, &s) in online.states.iter().enumerate() {
        let here = me.target.point_source(s);
        pulled_back = sat_add(
            pulled_back,
            sat_add(inst.space().dist(prev, here), inst.tasks()[i][here]),
        );
        prev = here;
    }

    let alpha_bound = realization_bound(me)?;
    let opt_margin = alpha_bound * source_opt - target_opt;
    let pullback_margin = online.cost - pulled_back;
    Ok(MtsReport {
        source_opt,
        target_opt,
        target_online: online.cost,
        pulled_back,
        alpha_bound,
        opt_ok: crate::le_tol(target_opt, alpha_bound * source_opt),
        opt_margin,
        pullback_ok: crate::le_tol(pulled_back, online.cost),
        pullback_margin,
    })
}
