//! End-to-end candidate generation.
//!
//! One pass of the screening pipeline:
//!
//! ```text
//!   DC solve ──► LODF ──► M metric ──► top-a% seeds
//!                                          │ per seed, in parallel
//!                                          ▼
//!                            (d, sl) search subgraph
//!                                          │
//!                                          ▼
//!                        greedy GBC group of x branches
//! ```
//!
//! Each surviving seed yields one candidate outage set; identical branch
//! sets from different seeds are deduplicated, keeping the highest-scoring
//! trace. Results are deterministic for a given case and configuration:
//! seeds are processed in rank order, parallel stages collect in that same
//! order, and every tie-break is index-based.

use rayon::prelude::*;
use serde::Serialize;

use crate::case::NetworkCase;
use crate::dc::{compute_lodf, solve_dc, SolveError};
use crate::gbc::select_group;
use crate::graph::{build_grid_graph, build_subgraph};
use crate::metrics::{compute_metrics, rank_branches, BranchMetrics};
use crate::report::StageTimings;

/// Pipeline parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningConfig {
    /// Contingency order: branches per candidate set.
    pub x: usize,
    /// Hop radius for recruiting high-metric branches into a subgraph.
    pub d: usize,
    /// Hop radius of the node expansion; must be >= `d`.
    pub sl: usize,
    /// Share of live branches used as seeds, in percent.
    pub a_percent: f64,
    /// Cap on emitted candidate sets.
    pub max_candidates: usize,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig { x: 1, d: 4, sl: 4, a_percent: 5.0, max_candidates: usize::MAX }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScreeningError {
    #[error("{0}")]
    Param(String),
    #[error("DC base solve failed: {0}")]
    Dc(#[from] SolveError),
}

impl ScreeningConfig {
    pub fn validate(&self) -> Result<(), ScreeningError> {
        if self.x < 1 {
            return Err(ScreeningError::Param("x must be ≥ 1".into()));
        }
        if self.sl < self.d {
            return Err(ScreeningError::Param("search-level must be ≥ distance".into()));
        }
        if !(self.a_percent > 0.0 && self.a_percent <= 100.0) {
            return Err(ScreeningError::Param("top-percent must be in (0, 100]".into()));
        }
        Ok(())
    }
}

/// One candidate outage set.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Branch indices in greedy pick order; `branches[0]` is the seed.
    pub branches: Vec<usize>,
    pub seed: usize,
    /// Group score after each pick; aligned with `branches`.
    pub gbc_trace: Vec<f64>,
}

impl CandidateSet {
    pub fn final_score(&self) -> f64 {
        self.gbc_trace.last().copied().unwrap_or(0.0)
    }

    /// Branch indices sorted ascending — the set identity used for dedup.
    pub fn sorted_branches(&self) -> Vec<usize> {
        let mut b = self.branches.clone();
        b.sort_unstable();
        b
    }
}

/// Everything a run produces besides validation.
#[derive(Debug, Clone)]
pub struct ScreeningOutput {
    pub candidates: Vec<CandidateSet>,
    pub metrics: BranchMetrics,
    /// Seed branches in rank order (top `a_percent` by |M|).
    pub seeds: Vec<usize>,
    /// Seeds dropped because their subgraph had fewer than `x` edges.
    pub skipped_seeds: Vec<usize>,
    /// `validation_ms` stays zero here; validation happens downstream.
    pub timings: StageTimings,
}

/// Runs metrics → seeds → subgraphs → group selection on one case.
pub fn run_screening(
    case: &NetworkCase,
    cfg: &ScreeningConfig,
) -> Result<ScreeningOutput, ScreeningError> {
    cfg.validate()?;
    let mut timings = StageTimings::default();

    let t = std::time::Instant::now();
    let dc = solve_dc(case)?;
    let sens = compute_lodf(case, &dc)?;
    let metrics = compute_metrics(case, &sens);
    let seeds = rank_branches(&metrics, cfg.a_percent);
    timings.metrics_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = std::time::Instant::now();
    let graph = build_grid_graph(case, &metrics);
    let subs: Vec<_> = seeds
        .par_iter()
        .map(|&seed| build_subgraph(&graph, seed, &seeds, cfg.d, cfg.sl))
        .collect();
    timings.subgraph_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = std::time::Instant::now();
    let picks: Vec<Option<CandidateSet>> = subs
        .par_iter()
        .map(|sub| {
            if sub.edge_set.len() < cfg.x {
                log::warn!(
                    "seed branch {} skipped: subgraph has {} edges, need x = {}",
                    sub.seed,
                    sub.edge_set.len(),
                    cfg.x
                );
                return None;
            }
            let res = select_group(&graph, sub, cfg.x);
            Some(CandidateSet { branches: res.group, seed: sub.seed, gbc_trace: res.scores })
        })
        .collect();
    timings.gbc_ms = t.elapsed().as_secs_f64() * 1e3;

    let mut skipped_seeds = Vec::new();
    let mut candidates: Vec<CandidateSet> = Vec::new();
    let mut by_set: std::collections::HashMap<Vec<usize>, usize> = std::collections::HashMap::new();
    for (pick, &seed) in picks.into_iter().zip(&seeds) {
        let Some(cand) = pick else {
            skipped_seeds.push(seed);
            continue;
        };
        match by_set.entry(cand.sorted_branches()) {
            std::collections::hash_map::Entry::Vacant(slot) => {
                slot.insert(candidates.len());
                candidates.push(cand);
            }
            std::collections::hash_map::Entry::Occupied(slot) => {
                // Same branch set reached from another seed: keep the
                // strongest trace, at the first-seen position.
                let held = &mut candidates[*slot.get()];
                if cand.final_score() > held.final_score() {
                    *held = cand;
                }
            }
        }
    }
    candidates.truncate(cfg.max_candidates);

    Ok(ScreeningOutput { candidates, metrics, seeds, skipped_seeds, timings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::testgrids::{PATH4, TRIANGLE};

    fn cfg(x: usize, d: usize, sl: usize) -> ScreeningConfig {
        ScreeningConfig { x, d, sl, a_percent: 100.0, max_candidates: usize::MAX }
    }

    #[test]
    fn config_validation_catches_bad_parameters() {
        let c = ScreeningConfig { x: 0, ..Default::default() };
        assert!(matches!(c.validate(), Err(ScreeningError::Param(_))));

        let c = ScreeningConfig { d: 3, sl: 2, ..Default::default() };
        let msg = c.validate().unwrap_err().to_string();
        assert_eq!(msg, "search-level must be ≥ distance");

        for bad in [0.0, -1.0, 100.5] {
            let c = ScreeningConfig { a_percent: bad, ..Default::default() };
            assert!(c.validate().is_err(), "a_percent = {bad}");
        }
        assert!(ScreeningConfig::default().validate().is_ok());
    }

    /// With x = 1 every candidate is just its seed: the output mirrors the
    /// metric ranking exactly.
    #[test]
    fn order_one_returns_the_seeds_themselves() {
        let case = parse_case(TRIANGLE).unwrap();
        let out = run_screening(&case, &cfg(1, 4, 4)).unwrap();
        assert_eq!(out.candidates.len(), out.seeds.len());
        for (cand, &seed) in out.candidates.iter().zip(&out.seeds) {
            assert_eq!(cand.branches, vec![seed]);
            assert_eq!(cand.gbc_trace.len(), 1);
        }
        assert!(out.skipped_seeds.is_empty());
    }

    /// All three triangle seeds grow to the same full set at x = 3; dedup
    /// collapses them into one candidate owned by the top seed.
    #[test]
    fn duplicate_branch_sets_collapse() {
        let case = parse_case(TRIANGLE).unwrap();
        let out = run_screening(&case, &cfg(3, 4, 4)).unwrap();
        assert_eq!(out.seeds.len(), 3);
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.candidates[0].seed, out.seeds[0]);
        assert_eq!(out.candidates[0].sorted_branches(), vec![0, 1, 2]);
    }

    /// At (d, sl) = (0, 0) an end seed of the path only reaches its
    /// bus-sharing neighbor (two edges total), so x = 3 starves there and
    /// the seed is skipped; the middle seed still sees the whole path.
    #[test]
    fn starved_subgraphs_are_skipped() {
        let case = parse_case(PATH4).unwrap();
        let out = run_screening(&case, &cfg(3, 0, 0)).unwrap();
        assert_eq!(out.skipped_seeds, vec![0, 2]);
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.candidates[0].seed, 1);
        assert_eq!(out.candidates[0].sorted_branches(), vec![0, 1, 2]);
    }

    /// Greedy growth nests: the x-set extends the (x−1)-set for any seed
    /// present in both runs.
    #[test]
    fn candidate_sets_nest_as_x_grows() {
        let case = parse_case(PATH4).unwrap();
        let runs: Vec<_> = (1..=3)
            .map(|x| run_screening(&case, &cfg(x, 4, 4)).unwrap())
            .collect();
        for pair in runs.windows(2) {
            for cand in &pair[1].candidates {
                if let Some(prev) =
                    pair[0].candidates.iter().find(|c| c.seed == cand.seed)
                {
                    assert_eq!(
                        &cand.branches[..prev.branches.len()],
                        &prev.branches[..],
                        "x-set must extend the (x-1)-set"
                    );
                }
            }
        }
    }

    #[test]
    fn output_is_deterministic() {
        let case = parse_case(PATH4).unwrap();
        let a = run_screening(&case, &cfg(2, 4, 4)).unwrap();
        let b = run_screening(&case, &cfg(2, 4, 4)).unwrap();
        assert_eq!(a.candidates, b.candidates);
        assert_eq!(a.seeds, b.seeds);
        assert_eq!(a.skipped_seeds, b.skipped_seeds);
    }

    #[test]
    fn candidate_cap_truncates_in_rank_order() {
        let case = parse_case(TRIANGLE).unwrap();
        let full = run_screening(&case, &cfg(1, 4, 4)).unwrap();
        let capped = run_screening(
            &case,
            &ScreeningConfig { max_candidates: 1, ..cfg(1, 4, 4) },
        )
        .unwrap();
        assert_eq!(capped.candidates.len(), 1);
        assert_eq!(capped.candidates[0], full.candidates[0]);
    }

    /// Candidate sets always sit inside their seed's subgraph and have
    /// exactly x branches.
    #[test]
    fn candidates_respect_subgraph_and_size() {
        let case = parse_case(PATH4).unwrap();
        let config = cfg(2, 1, 2);
        let out = run_screening(&case, &config).unwrap();
        let graph = build_grid_graph(&case, &out.metrics);
        for cand in &out.candidates {
            assert_eq!(cand.branches.len(), config.x);
            let sub = build_subgraph(&graph, cand.seed, &out.seeds, config.d, config.sl);
            for b in &cand.branches {
                assert!(sub.edge_set.contains(b));
            }
        }
    }
}
