//! Slow-but-simple reference implementations.
//!
//! Everything here exists to cross-check the fast pipeline:
//!
//! * [`exact_gbc_score`] recomputes group betweenness by literally
//!   enumerating every shortest path with exact rational arithmetic —
//!   Floyd–Warshall distances, depth-first path walks, no tolerance ties,
//!   no shared code with the production scorer.
//! * [`gbc_exhaustive`] tries every x-subset of a small subgraph and
//!   returns the true optimum, the yardstick for the greedy selector.
//! * [`brute_force_contingencies`] validates every x-subset of in-service
//!   branches with the full AC machinery, optionally skipping subsets that
//!   a DC screen shows cannot overload anything or split the network.
//!
//! The brute-force screen is deliberately conservative about what it
//! skips (loading below [`PRESCREEN_MARGIN`] of the rating, no islanding)
//! but it only reasons about thermal and topological effects; reserve and
//! voltage trouble without any of those symptoms will not be rediscovered
//! on the skipped side. The screened-out sets are returned so callers can
//! spot-check that trade.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::case::NetworkCase;
use crate::dc::solve_dc_with_outage;
use crate::gbc::PairExclusion;
use crate::graph::{GridGraph, SearchSubgraph};
use crate::report::ContingencyRecord;
use crate::validation::{default_reserve_requirement, validate_outage, ValidationMethod};

/// Loading fraction below which the DC screen may skip a subset.
pub const PRESCREEN_MARGIN: f64 = 0.9;

/// Hard cap on path-enumeration work before declaring the instance too big.
const STEP_CAP: u64 = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive evaluation: {0}")]
    InstanceTooLarge(String),
}

/// Exhaustive N-x enumeration outcome.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Violating sets only, worst first (unsolved > shed load > overflow
    /// count > voltage count), ties in subset order.
    pub records: Vec<ContingencyRecord>,
    /// Number of subsets enumerated: C(live branches, x).
    pub enumerated_count: usize,
    /// Subsets the DC screen skipped without AC validation.
    pub screened_out: Vec<Vec<usize>>,
}

// ---------------------------------------------------------------------
// Exact group betweenness by path enumeration
// ---------------------------------------------------------------------

struct LocalGraph {
    n: usize,
    /// (local from, local to, branch index) per local edge.
    edges: Vec<(usize, usize, usize)>,
    weights: Vec<BigRational>,
    /// adj[u] = [(v, local edge), ..]
    adj: Vec<Vec<(usize, usize)>>,
}

fn localize(g: &GridGraph, sub: &SearchSubgraph) -> LocalGraph {
    let local = sub.local_index();
    let n = sub.node_set.len();
    let mut edges = Vec::with_capacity(sub.edge_set.len());
    let mut weights = Vec::with_capacity(sub.edge_set.len());
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &k in &sub.edge_set {
        let (f, t) = g.endpoints[k];
        let (lf, lt) = (local[&f], local[&t]);
        let e = edges.len();
        edges.push((lf, lt, k));
        weights.push(
            BigRational::from_float(g.weight[k]).expect("edge weights are finite"),
        );
        adj[lf].push((lt, e));
        adj[lt].push((lf, e));
    }
    LocalGraph { n, edges, weights, adj }
}

/// All-pairs exact shortest distances; `None` where unreachable.
fn floyd_warshall(lg: &LocalGraph) -> Vec<Vec<Option<BigRational>>> {
    let n = lg.n;
    let mut dist: Vec<Vec<Option<BigRational>>> = vec![vec![None; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = Some(BigRational::zero());
    }
    for (e, &(u, v, _)) in lg.edges.iter().enumerate() {
        let w = &lg.weights[e];
        for (a, b) in [(u, v), (v, u)] {
            if dist[a][b].as_ref().map_or(true, |d| w < d) {
                dist[a][b] = Some(w.clone());
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = dist[i][k].clone() else { continue };
            for j in 0..n {
                let Some(dkj) = dist[k][j].as_ref() else { continue };
                let cand = &dik + dkj;
                if dist[i][j].as_ref().map_or(true, |d| &cand < d) {
                    dist[i][j] = Some(cand);
                }
            }
        }
    }
    dist
}

/// Walks every shortest path from `u` to `t` (suffix length `remaining`),
/// tallying total paths and paths that touched the group.
fn walk_paths(
    lg: &LocalGraph,
    dist: &[Vec<Option<BigRational>>],
    in_group: &[bool],
    u: usize,
    t: usize,
    remaining: &BigRational,
    hit: bool,
    counts: &mut (u64, u64),
    steps: &mut u64,
) -> Result<(), OracleError> {
    *steps += 1;
    if *steps > STEP_CAP {
        return Err(OracleError::InstanceTooLarge(format!(
            "path enumeration exceeded {STEP_CAP} steps"
        )));
    }
    if u == t {
        counts.0 += 1;
        if hit {
            counts.1 += 1;
        }
        return Ok(());
    }
    for &(v, e) in &lg.adj[u] {
        let w = &lg.weights[e];
        if let Some(dvt) = &dist[v][t] {
            if &(dvt + w) == remaining {
                let rest = remaining - w;
                walk_paths(lg, dist, in_group, v, t, &rest, hit || in_group[e], counts, steps)?;
            }
        }
    }
    Ok(())
}

/// Group betweenness of `group` inside `sub`, computed with exact
/// arithmetic by enumerating every shortest path of every ordered pair.
pub fn exact_gbc_score(
    g: &GridGraph,
    sub: &SearchSubgraph,
    group: &[usize],
    policy: PairExclusion,
) -> Result<BigRational, OracleError> {
    let lg = localize(g, sub);
    let dist = floyd_warshall(&lg);
    let in_group: Vec<bool> = lg.edges.iter().map(|&(_, _, k)| group.contains(&k)).collect();
    let mut terminal = vec![false; lg.n];
    for (e, &(u, v, _)) in lg.edges.iter().enumerate() {
        if in_group[e] {
            terminal[u] = true;
            terminal[v] = true;
        }
    }

    let mut total = BigRational::zero();
    let mut steps = 0u64;
    for s in 0..lg.n {
        for t in 0..lg.n {
            if s == t {
                continue;
            }
            if policy == PairExclusion::GroupTerminals && terminal[s] && terminal[t] {
                continue;
            }
            let Some(d) = dist[s][t].clone() else { continue };
            let mut counts = (0u64, 0u64);
            walk_paths(&lg, &dist, &in_group, s, t, &d, false, &mut counts, &mut steps)?;
            if counts.0 > 0 {
                total += BigRational::new(BigInt::from(counts.1), BigInt::from(counts.0));
            }
        }
    }
    Ok(total)
}

/// True optimum of the group-betweenness objective over all x-subsets of
/// the subgraph's edges. Instances are capped small on purpose; ties go to
/// the lexicographically smallest index set.
pub fn gbc_exhaustive(
    g: &GridGraph,
    sub: &SearchSubgraph,
    x: usize,
    policy: PairExclusion,
) -> Result<(Vec<usize>, BigRational), OracleError> {
    if x == 0 || x > 3 {
        return Err(OracleError::InstanceTooLarge(format!("x = {x} outside 1..=3")));
    }
    if sub.edge_set.len() > 12 {
        return Err(OracleError::InstanceTooLarge(format!(
            "{} edges exceed the 12-edge exhaustive bound",
            sub.edge_set.len()
        )));
    }
    if sub.edge_set.len() < x {
        return Err(OracleError::InstanceTooLarge(format!(
            "need x = {x} edges, subgraph has {}",
            sub.edge_set.len()
        )));
    }
    let mut best: Option<(Vec<usize>, BigRational)> = None;
    for group in sub.edge_set.iter().copied().combinations(x) {
        let score = exact_gbc_score(g, sub, &group, policy)?;
        // Strict improvement keeps the first (lexicographically smallest)
        // subset on ties.
        if best.as_ref().map_or(true, |(_, s)| &score > s) {
            best = Some((group, score));
        }
    }
    Ok(best.expect("at least one subset exists"))
}

// ---------------------------------------------------------------------
// Exhaustive contingency enumeration
// ---------------------------------------------------------------------

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut num = 1u128;
    for i in 0..k {
        num = num * (n - i) as u128 / (i + 1) as u128;
    }
    num as usize
}

/// Does removing `outage` split the live network?
fn splits_network(case: &NetworkCase, adj: &[Vec<(usize, usize)>], outage: &[usize]) -> bool {
    let n = case.buses.len();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(v, k) in &adj[u] {
            if !seen[v] && !outage.contains(&k) {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count != n
}

enum Outcome {
    Screened(Vec<usize>),
    Violating(Box<ContingencyRecord>),
    Clean,
}

/// Validates every x-subset of in-service branches. With `dc_prescreen`,
/// subsets that neither island the network nor push any DC flow above
/// [`PRESCREEN_MARGIN`] of its rating are skipped and reported in
/// `screened_out` instead of being AC-validated.
pub fn brute_force_contingencies(
    case: &NetworkCase,
    x: usize,
    dc_prescreen: bool,
    reserve_req: Option<f64>,
) -> BruteForceResult {
    assert!(x >= 1, "contingency order must be at least 1");
    let req = reserve_req.unwrap_or_else(|| default_reserve_requirement(case));

    let live: Vec<usize> =
        case.branches.iter().enumerate().filter(|(_, b)| b.status).map(|(k, _)| k).collect();
    let subsets: Vec<Vec<usize>> = live.iter().copied().combinations(x).collect();
    let enumerated_count = subsets.len();
    debug_assert_eq!(enumerated_count, binomial(live.len(), x));

    let index = case.bus_index();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); case.buses.len()];
    for &k in &live {
        let br = &case.branches[k];
        let (f, t) = (index[&br.from], index[&br.to]);
        adj[f].push((t, k));
        adj[t].push((f, k));
    }

    let outcomes: Vec<Outcome> = subsets
        .par_iter()
        .map(|set| {
            if dc_prescreen && !splits_network(case, &adj, set) {
                if let Some(flows) = solve_dc_with_outage(case, set) {
                    let hot = case.branches.iter().enumerate().any(|(k, br)| {
                        br.status
                            && !set.contains(&k)
                            && br.rate_a > 0.0
                            && flows[k].abs() > PRESCREEN_MARGIN * br.rate_a
                    });
                    if !hot {
                        return Outcome::Screened(set.clone());
                    }
                }
            }
            let report = validate_outage(case, set, ValidationMethod::Ac, Some(req));
            if report.is_violating() {
                let pairs =
                    set.iter().map(|&k| (case.branches[k].from, case.branches[k].to)).collect();
                Outcome::Violating(Box::new(ContingencyRecord::new(
                    set.clone(),
                    pairs,
                    report,
                    None,
                    None,
                )))
            } else {
                Outcome::Clean
            }
        })
        .collect();

    let mut records = Vec::new();
    let mut screened_out = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Screened(set) => screened_out.push(set),
            Outcome::Violating(rec) => records.push(*rec),
            Outcome::Clean => {}
        }
    }
    records.sort_by(severity_then_index);
    BruteForceResult { records, enumerated_count, screened_out }
}

/// Worst first: unsolved, then shed load, then overflow count, then
/// voltage count; subset order settles exact ties.
fn severity_then_index(a: &ContingencyRecord, b: &ContingencyRecord) -> std::cmp::Ordering {
    b.unsolved
        .cmp(&a.unsolved)
        .then_with(|| {
            b.islanded_load_mw
                .partial_cmp(&a.islanded_load_mw)
                .expect("shed load is never NaN")
        })
        .then_with(|| b.overflow.cmp(&a.overflow))
        .then_with(|| {
            (b.undervoltage + b.overvoltage).cmp(&(a.undervoltage + a.overvoltage))
        })
        .then_with(|| a.branch_indices.cmp(&b.branch_indices))
}
