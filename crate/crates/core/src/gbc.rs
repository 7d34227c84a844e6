//! Group betweenness centrality over search subgraphs.
//!
//! For an edge group `E` inside a subgraph, the score sums over ordered
//! node pairs the fraction of shortest paths that cross the group:
//!
//! ```text
//!   GBC(E) = sum over (s, t)  sigma(s, t | E) / sigma(s, t)
//! ```
//!
//! `sigma(s, t)` counts weighted shortest s-t paths and `sigma(s, t | E)`
//! those passing through at least one edge of `E`. Pairs with no path
//! contribute zero. Pairs whose endpoints *both* touch the group's edges
//! are excluded — the group's own terminals trivially ride its edges and
//! would inflate the score ([`PairExclusion::GroupTerminals`], the
//! default); [`PairExclusion::None`] keeps every pair, which is the
//! classical monotone-submodular objective.
//!
//! Two shortest paths are considered tied when their lengths agree to a
//! relative 1e-9; counting then follows the tolerance-tight DAG.
//!
//! [`select_group`] grows a group greedily from a forced seed edge, adding
//! whichever edge maximizes the score at each step (ties fall to the
//! lowest branch index). Per-source shortest-path DAGs depend only on the
//! subgraph, so they are built once and shared across all candidate
//! evaluations.

use crate::graph::{GridGraph, SearchSubgraph};

/// Relative tolerance for treating two path lengths as equal.
pub const TIE_REL_TOL: f64 = 1e-9;

/// Which ordered node pairs enter the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairExclusion {
    /// Skip pairs whose two endpoints are both incident to group edges.
    #[default]
    GroupTerminals,
    /// Count every ordered pair (classical group betweenness).
    None,
}

/// Result of greedy selection: the group in pick order and the score after
/// each addition (`scores[i]` corresponds to `group[..=i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GbcResult {
    pub group: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Local view: per-source shortest-path DAGs with path counts, reusable
/// across group evaluations on one subgraph.
pub struct PathCache {
    /// Local edge list: (local from, local to, branch index, weight).
    edges: Vec<(usize, usize, usize, f64)>,
    /// Per source: nodes in nondecreasing distance order (reachable only).
    order: Vec<Vec<usize>>,
    /// Per source, per node: tight incoming (predecessor node, local edge).
    tight_in: Vec<Vec<Vec<(usize, usize)>>>,
    /// Per source, per node: shortest-path counts.
    sigma: Vec<Vec<f64>>,
    n: usize,
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
}

impl PathCache {
    pub fn build(g: &GridGraph, sub: &SearchSubgraph) -> PathCache {
        let local = sub.local_index();
        let n = sub.node_set.len();
        let mut edges = Vec::with_capacity(sub.edge_set.len());
        let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
        for &k in &sub.edge_set {
            let (f, t) = g.endpoints[k];
            let (lf, lt) = (local[&f], local[&t]);
            let w = g.weight[k];
            let e = edges.len();
            edges.push((lf, lt, k, w));
            adj[lf].push((lt, e, w));
            adj[lt].push((lf, e, w));
        }

        let mut order = Vec::with_capacity(n);
        let mut tight_in = Vec::with_capacity(n);
        let mut sigma = Vec::with_capacity(n);
        for s in 0..n {
            let dist = dijkstra(&adj, n, s);
            // Reachable nodes sorted by distance; index tiebreak keeps the
            // sweep deterministic.
            let mut by_dist: Vec<usize> =
                (0..n).filter(|&v| dist[v].is_finite()).collect();
            by_dist.sort_by(|&a, &b| {
                dist[a].partial_cmp(&dist[b]).unwrap().then(a.cmp(&b))
            });

            let mut tight: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
            for (e, &(u, v, _, w)) in edges.iter().enumerate() {
                for (p, q) in [(u, v), (v, u)] {
                    if dist[p].is_finite() && dist[q].is_finite() && ties(dist[p] + w, dist[q]) {
                        tight[q].push((p, e));
                    }
                }
            }
            let mut sig = vec![0.0; n];
            sig[s] = 1.0;
            for &v in &by_dist {
                if v == s {
                    continue;
                }
                let mut total = 0.0;
                for &(u, _) in &tight[v] {
                    total += sig[u];
                }
                sig[v] = total;
            }
            order.push(by_dist);
            tight_in.push(tight);
            sigma.push(sig);
        }
        PathCache { edges, order, tight_in, sigma, n }
    }

    /// Scores a group of branch indices under the given pair policy.
    pub fn score(&self, group: &[usize], policy: PairExclusion) -> f64 {
        let in_group: Vec<bool> = self
            .edges
            .iter()
            .map(|&(_, _, branch, _)| group.contains(&branch))
            .collect();
        let mut terminal = vec![false; self.n];
        for (e, &(u, v, _, _)) in self.edges.iter().enumerate() {
            if in_group[e] {
                terminal[u] = true;
                terminal[v] = true;
            }
        }

        let mut total = 0.0;
        let mut sigma_e = vec![0.0; self.n];
        for s in 0..self.n {
            let skip_terminal_targets =
                policy == PairExclusion::GroupTerminals && terminal[s];
            // sigma_e[v]: shortest s-v paths crossing the group.
            for &v in &self.order[s] {
                sigma_e[v] = 0.0;
            }
            for &v in &self.order[s] {
                if v == s {
                    continue;
                }
                let mut through = 0.0;
                for &(u, e) in &self.tight_in[s][v] {
                    through += if in_group[e] {
                        self.sigma[s][u]
                    } else {
                        sigma_e[u]
                    };
                }
                sigma_e[v] = through;
                if v != s && self.sigma[s][v] > 0.0 {
                    if !(skip_terminal_targets && terminal[v]) {
                        total += sigma_e[v] / self.sigma[s][v];
                    }
                }
            }
        }
        total
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

fn dijkstra(adj: &[Vec<(usize, usize, f64)>], n: usize, s: usize) -> Vec<f64> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }

    let mut dist = vec![f64::INFINITY; n];
    dist[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Entry(0.0, s)));
    while let Some(Reverse(Entry(d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, _, w) in &adj[u] {
            let alt = d + w;
            if alt < dist[v] {
                dist[v] = alt;
                heap.push(Reverse(Entry(alt, v)));
            }
        }
    }
    dist
}

/// Group betweenness of `group` within `sub` under the default pair policy.
pub fn gbc_score(g: &GridGraph, sub: &SearchSubgraph, group: &[usize]) -> f64 {
    gbc_score_with(g, sub, group, PairExclusion::GroupTerminals)
}

/// Group betweenness under an explicit pair policy.
pub fn gbc_score_with(
    g: &GridGraph,
    sub: &SearchSubgraph,
    group: &[usize],
    policy: PairExclusion,
) -> f64 {
    PathCache::build(g, sub).score(group, policy)
}

/// Greedily grows a group of `x` branches inside `sub`, starting from the
/// subgraph's seed branch. Each step adds the candidate edge that
/// maximizes the group score, breaking ties toward the lower branch index.
/// If the subgraph holds fewer than `x` edges the group is simply shorter
/// (callers that require exactly `x` check [`SearchSubgraph::edge_set`]).
pub fn select_group(g: &GridGraph, sub: &SearchSubgraph, x: usize) -> GbcResult {
    select_group_with(g, sub, x, &[sub.seed], PairExclusion::GroupTerminals)
}

/// Greedy growth under an explicit starting set and pair policy. `forced`
/// edges (deduplicated, must lie in the subgraph) enter the group first in
/// the order given, each with its score recorded, then greedy picks fill
/// the group to `x` edges.
pub fn select_group_with(
    g: &GridGraph,
    sub: &SearchSubgraph,
    x: usize,
    forced: &[usize],
    policy: PairExclusion,
) -> GbcResult {
    let cache = PathCache::build(g, sub);
    let mut group = Vec::with_capacity(x);
    let mut scores = Vec::with_capacity(x);
    for &k in forced {
        if group.len() == x {
            break;
        }
        debug_assert!(sub.edge_set.contains(&k), "forced edge {k} outside the subgraph");
        if group.contains(&k) {
            continue;
        }
        group.push(k);
        scores.push(cache.score(&group, policy));
    }

    // edge_set is ascending, so scanning in order plus strict improvement
    // gives the documented lowest-index tiebreak.
    while group.len() < x {
        let mut best: Option<(usize, f64)> = None;
        for &k in &sub.edge_set {
            if group.contains(&k) {
                continue;
            }
            group.push(k);
            let s = cache.score(&group, policy);
            group.pop();
            if best.map_or(true, |(_, bs)| s > bs) {
                best = Some((k, s));
            }
        }
        match best {
            Some((k, s)) => {
                group.push(k);
                scores.push(s);
            }
            None => break,
        }
    }
    GbcResult { group, scores }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::graph::{build_grid_graph, GridGraph, SearchSubgraph};
    use crate::metrics::BranchMetrics;
    use crate::testgrids::PATH4;
    use approx::assert_abs_diff_eq;

    fn uniform_graph(text: &str) -> (crate::case::NetworkCase, GridGraph) {
        let case = parse_case(text).unwrap();
        let n = case.branches.len();
        let metrics = BranchMetrics {
            pf: vec![0.0; n],
            nlodf: vec![0.0; n],
            m: vec![0.0; n],
            live: case.branches.iter().map(|b| b.status).collect(),
        };
        let g = build_grid_graph(&case, &metrics);
        (case, g)
    }

    /// Star with center bus 1 and four leaves.
    const STAR4: &str = "\
function mpc = star4
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t3\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t4\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t5\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t40\t0\t60\t-60\t1\t100\t1\t120\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
\t1\t3\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
\t1\t4\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
\t1\t5\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;
];
";

    /// Worked example on the path a-b-c-d with the middle edge as group:
    /// ordered pairs (a,c), (a,d), (b,d) and reverses each ride b-c fully,
    /// (b,c)/(c,b) are excluded as group terminals, everything else
    /// avoids the edge. Score: 6.0.
    #[test]
    fn path_middle_edge_scores_six() {
        let (_, g) = uniform_graph(PATH4);
        let sub = SearchSubgraph::spanning(&g, 1);
        assert_abs_diff_eq!(gbc_score(&g, &sub, &[1]), 6.0, epsilon = 1e-12);
    }

    /// Taking every edge excludes every pair: score collapses to zero.
    #[test]
    fn full_group_scores_zero() {
        let (_, g) = uniform_graph(PATH4);
        let sub = SearchSubgraph::spanning(&g, 0);
        assert_abs_diff_eq!(gbc_score(&g, &sub, &[0, 1, 2]), 0.0, epsilon = 1e-12);
    }

    /// Without the terminal exclusion the middle edge also carries (b,c),
    /// (a,b)? no — (a,b) never crosses it. Pairs riding b-c: (a,c), (a,d),
    /// (b,c), (b,d) + reverses = 8.
    #[test]
    fn classical_policy_counts_terminal_pairs() {
        let (_, g) = uniform_graph(PATH4);
        let sub = SearchSubgraph::spanning(&g, 1);
        assert_abs_diff_eq!(
            gbc_score_with(&g, &sub, &[1], PairExclusion::None),
            8.0,
            epsilon = 1e-12
        );
    }

    /// Star spokes: one spoke carries the 3 leaf pairs of its leaf (x2
    /// directions); two spokes carry 4 leaf pairs (x2) after their mutual
    /// pair is excluded.
    #[test]
    fn star_group_scores_match_hand_count() {
        let (_, g) = uniform_graph(STAR4);
        let sub = SearchSubgraph::spanning(&g, 0);
        assert_abs_diff_eq!(gbc_score(&g, &sub, &[0]), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gbc_score(&g, &sub, &[0, 1]), 8.0, epsilon = 1e-12);
    }

    /// Two equal-weight parallel branches split path counts; grouping one
    /// captures half of each direction. Terminal exclusion would drop the
    /// only pair, so this pins the classical policy.
    #[test]
    fn parallel_edges_split_counts() {
        let text = PATH4.replace(
            "\t1\t2\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;",
            "\t1\t2\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;\n\t1\t2\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;",
        );
        let (_, g) = uniform_graph(&text);
        let sub = SearchSubgraph::spanning(&g, 0);
        // sigma(a, b) = 2; exactly one of the two parallel edges is in the
        // group, so every a<->b path family splits 50/50. Pairs a->{b,c,d}
        // all funnel through the parallel pair: 3 pairs x 2 directions x
        // one half each = 3.0.
        assert_abs_diff_eq!(
            gbc_score_with(&g, &sub, &[0], PairExclusion::None),
            3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn disconnected_pairs_contribute_zero() {
        let text = STAR4.replace(
            "\t1\t5\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1",
            "\t1\t5\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t0",
        );
        let text = text.replace("\t5\t1\t10", "\t5\t3\t0").replace(
            "mpc.gen = [\n",
            "mpc.gen = [\n\t5\t0\t0\t60\t-60\t1\t100\t1\t120\t0;\n",
        );
        let (_, g) = uniform_graph(&text);
        // Bus 5 is stranded; the spanning subgraph still lists it, but its
        // pairs have sigma = 0. Spoke 1-2 now only carries leaf 2's pairs
        // with leaves 3 and 4: 2 pairs x 2 directions.
        let sub = SearchSubgraph::spanning(&g, 0);
        let score = gbc_score(&g, &sub, &[0]);
        assert_abs_diff_eq!(score, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn score_bounded_by_ordered_pair_count() {
        let (_, g) = uniform_graph(STAR4);
        let sub = SearchSubgraph::spanning(&g, 0);
        let n = sub.node_set.len() as f64;
        for group in [vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 1, 2, 3]] {
            let s = gbc_score(&g, &sub, &group);
            assert!(s >= 0.0 && s <= n * (n - 1.0));
            let c = gbc_score_with(&g, &sub, &group, PairExclusion::None);
            assert!(c >= 0.0 && c <= n * (n - 1.0));
        }
    }

    /// Greedy on the path with seed ab. Candidate {ab, bc} leaves pairs
    /// (a,d) and (b,d) crossing (score 4.0); candidate {ab, cd} touches
    /// every node, so the terminal rule excludes everything (score 0).
    #[test]
    fn greedy_grows_from_seed() {
        let (_, g) = uniform_graph(PATH4);
        let sub = SearchSubgraph::spanning(&g, 0);
        let res = select_group(&g, &sub, 2);
        assert_eq!(res.group, vec![0, 1]);
        assert_abs_diff_eq!(res.scores[1], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gbc_score(&g, &sub, &[0, 2]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn greedy_breaks_ties_toward_lower_index() {
        let (_, g) = uniform_graph(STAR4);
        let sub = SearchSubgraph::spanning(&g, 0);
        let res = select_group(&g, &sub, 2);
        // Spokes 1, 2, 3 are symmetric partners for spoke 0.
        assert_eq!(res.group, vec![0, 1]);
    }

    #[test]
    fn greedy_handles_small_subgraphs() {
        let (_, g) = uniform_graph(PATH4);
        let sub = SearchSubgraph::spanning(&g, 0);
        let res = select_group(&g, &sub, 5);
        assert_eq!(res.group.len(), 3, "only three edges exist");
    }

    /// Deterministic across repeated runs (no hash-order dependence).
    #[test]
    fn selection_is_reproducible() {
        let (_, g) = uniform_graph(STAR4);
        let sub = SearchSubgraph::spanning(&g, 2);
        let a = select_group(&g, &sub, 3);
        let b = select_group(&g, &sub, 3);
        assert_eq!(a, b);
    }

    /// With nothing forced, the star's first pick is a spoke (all four
    /// tie, lowest index wins) and the second is another spoke.
    #[test]
    fn unforced_greedy_picks_star_spokes() {
        let (_, g) = uniform_graph(STAR4);
        let sub = SearchSubgraph::spanning(&g, 0);
        let res = select_group_with(&g, &sub, 2, &[], PairExclusion::GroupTerminals);
        assert_eq!(res.group, vec![0, 1]);
        // Each step must match direct evaluation of the chosen prefix.
        assert_abs_diff_eq!(res.scores[0], gbc_score(&g, &sub, &[0]), epsilon = 1e-12);
        assert_abs_diff_eq!(res.scores[1], gbc_score(&g, &sub, &[0, 1]), epsilon = 1e-12);
    }

    /// The seeded wrapper is exactly the forced-singleton special case.
    #[test]
    fn seeded_wrapper_matches_forced_singleton() {
        let (_, g) = uniform_graph(PATH4);
        let sub = SearchSubgraph::spanning(&g, 2);
        let a = select_group(&g, &sub, 3);
        let b = select_group_with(&g, &sub, 3, &[2], PairExclusion::GroupTerminals);
        assert_eq!(a, b);
    }

    /// Forced edges beyond `x` are dropped; duplicates collapse.
    #[test]
    fn forced_list_is_truncated_and_deduplicated() {
        let (_, g) = uniform_graph(STAR4);
        let sub = SearchSubgraph::spanning(&g, 0);
        let res = select_group_with(&g, &sub, 2, &[3, 3, 1, 0], PairExclusion::GroupTerminals);
        assert_eq!(res.group, vec![3, 1]);
        assert_eq!(res.scores.len(), 2);
    }
}
