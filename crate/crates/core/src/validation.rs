//! Outage application and violation classification.
//!
//! Removing a set of branches can split the network. [`apply_outage`]
//! partitions the survivors into electrical islands, promotes a slack in
//! islands that lost theirs (largest surviving unit wins), and writes off
//! islands with load but no generation as shed load. Each returned island
//! is a self-contained, validated case ready for a power-flow solve.
//!
//! [`classify`] then folds per-island AC solutions into one violation
//! report:
//!
//! * **overflow** — branch apparent power above its long-term rating,
//! * **undervoltage / overvoltage** — bus magnitude outside its band,
//! * **reserve_limit** — spinning reserve of the *main* island (the one
//!   that kept the original slack, or the largest-load island otherwise)
//!   below the requirement; islanding a plant erodes this margin,
//! * **unsolved** — any island's power flow failed to converge,
//! * **islanded_load_mw** — demand stranded without generation.
//!
//! The default reserve requirement is the capacity of the largest online
//! unit in the pre-outage case — the classic "survive the biggest loss"
//! heuristic — and is configurable for stricter policies.

use crate::ac::{solve_ac, AcSolution};
use crate::case::{BusKind, NetworkCase};
use crate::dc::solve_dc;
use serde::Serialize;

/// One post-outage island with maps back to the parent case.
#[derive(Debug, Clone)]
pub struct IslandCase {
    pub case: NetworkCase,
    /// Island bus position -> parent bus position.
    pub bus_map: Vec<usize>,
    /// Island branch position -> parent branch position.
    pub branch_map: Vec<usize>,
    /// Island gen position -> parent gen position.
    pub gen_map: Vec<usize>,
    /// Bus id that was promoted to slack, if the original was lost.
    pub promoted_slack: Option<i64>,
}

/// Result of removing a branch set from a case.
#[derive(Debug, Clone)]
pub struct AppliedOutage {
    /// Solvable islands (at least one online generator each).
    pub islands: Vec<IslandCase>,
    /// Index into `islands` of the island whose reserve matters.
    pub main_island: Option<usize>,
    /// Demand stranded in generator-less islands, MW.
    pub shed_load_mw: f64,
    /// Buses belonging to shed islands.
    pub shed_buses: Vec<i64>,
}

/// One flagged element, for human-readable output and drill-down.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationDetail {
    Overflow { branch: (i64, i64), loading_mva: f64, rate_a: f64 },
    Undervoltage { bus: i64, v_mag: f64, v_min: f64 },
    Overvoltage { bus: i64, v_mag: f64, v_max: f64 },
}

/// Violation summary for one outage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub overflow: usize,
    pub undervoltage: usize,
    pub overvoltage: usize,
    pub reserve_limit: bool,
    pub unsolved: bool,
    pub islanded_load_mw: f64,
    /// Spinning reserve left in the main island, MW (context for the flag).
    pub reserve_margin_mw: f64,
    pub reserve_req_mw: f64,
    pub details: Vec<ViolationDetail>,
}

impl ViolationReport {
    /// Anything worth reporting?
    pub fn is_violating(&self) -> bool {
        self.unsolved
            || self.reserve_limit
            || self.overflow > 0
            || self.undervoltage > 0
            || self.overvoltage > 0
            || self.islanded_load_mw > 1e-9
    }
}

/// How candidate outages are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMethod {
    /// Full AC power flow (voltages, losses, reactive limits).
    #[default]
    Ac,
    /// Linear DC flows only: fast, no voltage or convergence signal.
    Dc,
}

/// Capacity of the largest online unit — the default reserve requirement.
pub fn default_reserve_requirement(case: &NetworkCase) -> f64 {
    case.gens
        .iter()
        .filter(|g| g.status)
        .map(|g| g.p_max)
        .fold(0.0, f64::max)
}

/// Removes `outage` branches and splits the case into islands.
pub fn apply_outage(case: &NetworkCase, outage: &[usize]) -> AppliedOutage {
    let index = case.bus_index();
    let n = case.buses.len();
    let outaged = |k: usize| outage.contains(&k);

    // Components of the surviving live network.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, br) in case.branches.iter().enumerate() {
        if !br.status || outaged(k) {
            continue;
        }
        let (f, t) = (index[&br.from], index[&br.to]);
        adj[f].push(t);
        adj[t].push(f);
    }
    let mut comp = vec![usize::MAX; n];
    let mut n_comp = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = n_comp;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = n_comp;
                    stack.push(v);
                }
            }
        }
        n_comp += 1;
    }

    let slack_pos = case.buses.iter().position(|b| b.kind == BusKind::Slack);
    let mut islands = Vec::new();
    let mut main_island = None;
    let mut shed_load_mw = 0.0;
    let mut shed_buses = Vec::new();

    for c in 0..n_comp {
        let bus_map: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
        let member = |i: usize| comp[i] == c;

        let gen_map: Vec<usize> = case
            .gens
            .iter()
            .enumerate()
            .filter(|(_, g)| member(index[&g.bus]))
            .map(|(gi, _)| gi)
            .collect();
        let has_online_gen = gen_map.iter().any(|&gi| case.gens[gi].status);

        if !has_online_gen {
            for &i in &bus_map {
                shed_load_mw += case.buses[i].pd;
                shed_buses.push(case.buses[i].id);
            }
            continue;
        }

        let mut buses: Vec<_> = bus_map.iter().map(|&i| case.buses[i].clone()).collect();
        let branch_map: Vec<usize> = case
            .branches
            .iter()
            .enumerate()
            .filter(|&(k, br)| {
                !outaged(k) && member(index[&br.from]) && member(index[&br.to])
            })
            .map(|(k, _)| k)
            .collect();
        let branches: Vec<_> = branch_map.iter().map(|&k| case.branches[k].clone()).collect();
        let gens: Vec<_> = gen_map.iter().map(|&gi| case.gens[gi].clone()).collect();

        let keeps_slack = slack_pos.map_or(false, |s| member(s));
        let mut promoted_slack = None;
        if !keeps_slack {
            // Promote the bus of the largest online unit; ties fall to the
            // lower bus id for reproducibility.
            let winner = gen_map
                .iter()
                .filter(|&&gi| case.gens[gi].status)
                .max_by(|&&a, &&b| {
                    let (ga, gb) = (&case.gens[a], &case.gens[b]);
                    ga.p_max
                        .partial_cmp(&gb.p_max)
                        .unwrap()
                        .then(gb.bus.cmp(&ga.bus))
                })
                .copied()
                .expect("island has an online generator");
            let slack_id = case.gens[winner].bus;
            for bus in &mut buses {
                if bus.id == slack_id {
                    bus.kind = BusKind::Slack;
                } else if bus.kind == BusKind::Slack {
                    // Cannot happen (original slack absent), but keep the
                    // invariant airtight.
                    bus.kind = BusKind::Pv;
                }
            }
            promoted_slack = Some(slack_id);
        }

        let island = NetworkCase::new(
            format!("{}_island{}", case.name, islands.len()),
            case.base_mva,
            buses,
            gens,
            branches,
        )
        .expect("island construction preserves case invariants");

        if keeps_slack {
            main_island = Some(islands.len());
        }
        islands.push(IslandCase { case: island, bus_map, branch_map, gen_map, promoted_slack });
    }

    if main_island.is_none() && !islands.is_empty() {
        // Slack was shed with its island: fall back to the biggest load.
        let mut best = 0;
        let mut best_load = f64::NEG_INFINITY;
        for (i, isl) in islands.iter().enumerate() {
            let load: f64 = isl.case.buses.iter().map(|b| b.pd).sum();
            if load > best_load {
                best_load = load;
                best = i;
            }
        }
        main_island = Some(best);
    }

    AppliedOutage { islands, main_island, shed_load_mw, shed_buses }
}

/// Folds per-island AC solutions into a violation report. `sols` aligns
/// with `applied.islands`.
pub fn classify(applied: &AppliedOutage, sols: &[AcSolution], reserve_req: f64) -> ViolationReport {
    let mut report = ViolationReport {
        overflow: 0,
        undervoltage: 0,
        overvoltage: 0,
        reserve_limit: false,
        unsolved: false,
        islanded_load_mw: applied.shed_load_mw,
        reserve_margin_mw: f64::INFINITY,
        reserve_req_mw: reserve_req,
        details: Vec::new(),
    };
    for (isl, sol) in applied.islands.iter().zip(sols) {
        if !sol.converged {
            report.unsolved = true;
            continue;
        }
        for (k, br) in isl.case.branches.iter().enumerate() {
            if br.status && br.rate_a > 0.0 {
                let loading = sol.flow_from_mva[k].max(sol.flow_to_mva[k]);
                if loading > br.rate_a {
                    report.overflow += 1;
                    report.details.push(ViolationDetail::Overflow {
                        branch: (br.from, br.to),
                        loading_mva: loading,
                        rate_a: br.rate_a,
                    });
                }
            }
        }
        for (i, bus) in isl.case.buses.iter().enumerate() {
            if sol.v_mag[i] < bus.v_min {
                report.undervoltage += 1;
                report.details.push(ViolationDetail::Undervoltage {
                    bus: bus.id,
                    v_mag: sol.v_mag[i],
                    v_min: bus.v_min,
                });
            } else if sol.v_mag[i] > bus.v_max {
                report.overvoltage += 1;
                report.details.push(ViolationDetail::Overvoltage {
                    bus: bus.id,
                    v_mag: sol.v_mag[i],
                    v_max: bus.v_max,
                });
            }
        }
    }
    if let Some(mi) = applied.main_island {
        let isl = &applied.islands[mi];
        let sol = &sols[mi];
        if sol.converged {
            let mut margin = 0.0;
            for (g, gen) in isl.case.gens.iter().enumerate() {
                if gen.status {
                    margin += gen.p_max - sol.gen_p[g];
                }
            }
            report.reserve_margin_mw = margin;
            report.reserve_limit = margin < reserve_req;
        }
    }
    report
}

/// DC variant of [`classify`]: thermal loading from linear flows, no
/// voltage or convergence information.
fn classify_dc(applied: &AppliedOutage, reserve_req: f64) -> ViolationReport {
    let mut report = ViolationReport {
        overflow: 0,
        undervoltage: 0,
        overvoltage: 0,
        reserve_limit: false,
        unsolved: false,
        islanded_load_mw: applied.shed_load_mw,
        reserve_margin_mw: f64::INFINITY,
        reserve_req_mw: reserve_req,
        details: Vec::new(),
    };
    for (idx, isl) in applied.islands.iter().enumerate() {
        match solve_dc(&isl.case) {
            Ok(sol) => {
                for (k, br) in isl.case.branches.iter().enumerate() {
                    if br.status && br.rate_a > 0.0 && sol.flows[k].abs() > br.rate_a {
                        report.overflow += 1;
                        report.details.push(ViolationDetail::Overflow {
                            branch: (br.from, br.to),
                            loading_mva: sol.flows[k].abs(),
                            rate_a: br.rate_a,
                        });
                    }
                }
                if applied.main_island == Some(idx) {
                    // Lossless model: every unit keeps its schedule except
                    // the slack bus, which absorbs the island balance.
                    let slack_pos = isl
                        .case
                        .buses
                        .iter()
                        .position(|b| b.kind == BusKind::Slack)
                        .expect("island has a slack");
                    let slack_id = isl.case.buses[slack_pos].id;
                    let mut margin = 0.0;
                    let slack_units: Vec<usize> = isl
                        .case
                        .gens
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| g.status && g.bus == slack_id)
                        .map(|(g, _)| g)
                        .collect();
                    let slack_duty = sol.slack_injection_mw
                        + isl.case.buses[slack_pos].pd
                        + isl.case.buses[slack_pos].gs;
                    let cap: f64 =
                        slack_units.iter().map(|&g| isl.case.gens[g].p_max.max(0.0)).sum();
                    for (g, gen) in isl.case.gens.iter().enumerate() {
                        if !gen.status {
                            continue;
                        }
                        let p = if slack_units.contains(&g) {
                            if cap > 0.0 {
                                slack_duty * gen.p_max.max(0.0) / cap
                            } else {
                                slack_duty / slack_units.len() as f64
                            }
                        } else {
                            gen.pg
                        };
                        margin += gen.p_max - p;
                    }
                    report.reserve_margin_mw = margin;
                    report.reserve_limit = margin < reserve_req;
                }
            }
            Err(_) => report.unsolved = true,
        }
    }
    report
}

/// Applies an outage, solves every island, and classifies the result.
/// `reserve_req` defaults to [`default_reserve_requirement`] of the parent
/// case.
pub fn validate_outage(
    case: &NetworkCase,
    outage: &[usize],
    method: ValidationMethod,
    reserve_req: Option<f64>,
) -> ViolationReport {
    let req = reserve_req.unwrap_or_else(|| default_reserve_requirement(case));
    let applied = apply_outage(case, outage);
    match method {
        ValidationMethod::Ac => {
            let sols: Vec<AcSolution> =
                applied.islands.iter().map(|isl| solve_ac(&isl.case)).collect();
            classify(&applied, &sols, req)
        }
        ValidationMethod::Dc => classify_dc(&applied, req),
    }
}
