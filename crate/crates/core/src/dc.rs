//! Linearized (DC) power flow and outage sensitivities.
//!
//! The DC approximation drops losses and voltage magnitudes: branch flow is
//! `f = (theta_f - theta_t - shift) / (x * tap)` in per-unit, and nodal
//! balance becomes the linear system `B theta = P`. On top of the solved
//! base point this module builds two sensitivity families:
//!
//! * **ISF** (injection shift factors): change of each branch flow per unit
//!   of power injected at a bus and withdrawn at the slack. The slack
//!   column is identically zero by construction.
//! * **LODF** (line outage distribution factors): fraction of a tripped
//!   branch's pre-outage flow that lands on each surviving branch,
//!
//!   ```text
//!   LODF[l][k] = PTDF_l,(m,n) / (1 - PTDF_k,(m,n))      k = (m, n)
//!   ```
//!
//!   with `PTDF_l,(m,n) = ISF[l][m] - ISF[l][n]`. The diagonal is pinned to
//!   -1 (a branch loses its own flow). When `1 - PTDF_k,(m,n)` vanishes the
//!   branch is a bridge — its outage splits the island and no redistribution
//!   factor exists — so the column is filled with an infinite sentinel and
//!   flagged in [`DcSensitivities::bridge`].
//!
//! Matrices are dense; at the few-hundred-bus scale this toolkit targets, a
//! single LU factorization is cheaper than sparse bookkeeping. Everything
//! here is immutable after construction and safe to share across threads.

use std::collections::HashMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::case::NetworkCase;

/// Threshold on `|1 - PTDF_kk|` below which a branch outage is treated as
/// splitting the network.
pub const BRIDGE_TOL: f64 = 1e-6;

/// Sanity ceiling for non-bridge LODF magnitudes; real redistribution
/// factors are O(1) and anything huge signals a near-singular system.
pub const LODF_SANITY_BOUND: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    /// The in-service network is split; DC solves want one island.
    #[error("network has {islands} islands; expected a single connected island")]
    Disconnected { islands: usize },
    /// The susceptance system could not be factorized.
    #[error("singular susceptance matrix: {0}")]
    Singular(String),
}

/// Solved DC operating point.
#[derive(Debug, Clone)]
pub struct DcSolution {
    /// Bus voltage angles, radians, aligned with `case.buses`.
    pub theta: Vec<f64>,
    /// Branch real-power flows, MW, from -> to positive, aligned with
    /// `case.branches`. Out-of-service branches carry 0.
    pub flows: Vec<f64>,
    /// Net injection required at the slack bus, MW.
    pub slack_injection_mw: f64,
}

/// ISF / LODF bundle for one operating point.
#[derive(Debug, Clone)]
pub struct DcSensitivities {
    /// Injection shift factors, `branches x buses`; slack column is zero.
    pub isf: DMatrix<f64>,
    /// Line outage distribution factors, `branches x branches`. Column k
    /// answers "branch k trips": entry (l, k) scales k's pre-outage flow
    /// onto branch l. Bridge and out-of-service columns hold
    /// `f64::INFINITY` sentinels (except the -1 diagonal of live bridges).
    pub lodf: DMatrix<f64>,
    /// Pre-outage DC flows, MW, aligned with `case.branches`.
    pub base_flow: Vec<f64>,
    /// True where a branch's outage would split its island.
    pub bridge: Vec<bool>,
}

struct DcModel {
    index: HashMap<i64, usize>,
    slack: usize,
    /// Per-branch susceptance `1 / (x * tap)`; zero for out-of-service.
    b: Vec<f64>,
    /// Per-bus net injection, p.u.
    p: Vec<f64>,
    /// Per-branch equivalent injection from phase shifters, p.u.
    shift_pu: Vec<f64>,
}

fn build_model(case: &NetworkCase) -> DcModel {
    let index = case.bus_index();
    let slack = case
        .buses
        .iter()
        .position(|b| b.kind == crate::case::BusKind::Slack)
        .expect("validated case has a slack bus");
    let mut p = vec![0.0; case.buses.len()];
    for (i, bus) in case.buses.iter().enumerate() {
        // Shunt conductance draws its nominal power at the flat voltage.
        p[i] -= (bus.pd + bus.gs) / case.base_mva;
    }
    for gen in case.gens.iter().filter(|g| g.status) {
        p[index[&gen.bus]] += gen.pg / case.base_mva;
    }
    let mut b = vec![0.0; case.branches.len()];
    let mut shift_pu = vec![0.0; case.branches.len()];
    for (k, br) in case.branches.iter().enumerate() {
        if br.status {
            b[k] = 1.0 / (br.x * br.tap_ratio());
            shift_pu[k] = br.shift.to_radians();
        }
    }
    DcModel { index, slack, b, p, shift_pu }
}

/// Assembles the reduced susceptance matrix (slack row/column removed).
/// `red` maps bus position -> reduced position (slack -> usize::MAX).
fn reduced_b(case: &NetworkCase, model: &DcModel) -> (DMatrix<f64>, Vec<usize>) {
    let n = case.buses.len();
    let mut red = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if i != model.slack {
            red[i] = next;
            next += 1;
        }
    }
    let mut mat = DMatrix::zeros(next, next);
    for (k, br) in case.branches.iter().enumerate() {
        if !br.status {
            continue;
        }
        let (f, t) = (model.index[&br.from], model.index[&br.to]);
        let b = model.b[k];
        for (i, j, sign) in [(f, f, 1.0), (t, t, 1.0), (f, t, -1.0), (t, f, -1.0)] {
            if red[i] != usize::MAX && red[j] != usize::MAX {
                mat[(red[i], red[j])] += sign * b;
            }
        }
    }
    (mat, red)
}

/// Solves the DC power flow. The case must form a single island.
pub fn solve_dc(case: &NetworkCase) -> Result<DcSolution, SolveError> {
    let islands = case.islands();
    if islands.len() != 1 {
        return Err(SolveError::Disconnected { islands: islands.len() });
    }
    let model = build_model(case);
    let (b_red, red) = reduced_b(case, &model);

    // Right-hand side: injections, plus the constant term each phase
    // shifter moves across its branch.
    let n = case.buses.len();
    let mut rhs_full = model.p.clone();
    for (k, br) in case.branches.iter().enumerate() {
        if !br.status || model.shift_pu[k] == 0.0 {
            continue;
        }
        let (f, t) = (model.index[&br.from], model.index[&br.to]);
        rhs_full[f] += model.b[k] * model.shift_pu[k];
        rhs_full[t] -= model.b[k] * model.shift_pu[k];
    }
    let mut rhs = DMatrix::zeros(n - 1, 1);
    for i in 0..n {
        if red[i] != usize::MAX {
            rhs[(red[i], 0)] = rhs_full[i];
        }
    }

    let lu = b_red.clone().lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| SolveError::Singular("LU solve failed on reduced B".into()))?;

    let mut theta = vec![0.0; n];
    for i in 0..n {
        if red[i] != usize::MAX {
            theta[i] = sol[(red[i], 0)];
        }
    }

    let mut flows = vec![0.0; case.branches.len()];
    for (k, br) in case.branches.iter().enumerate() {
        if !br.status {
            continue;
        }
        let (f, t) = (model.index[&br.from], model.index[&br.to]);
        flows[k] = case.base_mva * model.b[k] * (theta[f] - theta[t] - model.shift_pu[k]);
    }

    // The slack picks up whatever the fixed injections miss.
    let mut slack_net = 0.0;
    for (k, br) in case.branches.iter().enumerate() {
        if !br.status {
            continue;
        }
        let (f, t) = (model.index[&br.from], model.index[&br.to]);
        if f == model.slack {
            slack_net += flows[k];
        }
        if t == model.slack {
            slack_net -= flows[k];
        }
    }
    Ok(DcSolution { theta, flows, slack_injection_mw: slack_net })
}

/// Computes ISF and LODF matrices for the case at the given DC base point.
pub fn compute_lodf(case: &NetworkCase, base: &DcSolution) -> Result<DcSensitivities, SolveError> {
    let model = build_model(case);
    let (b_red, red) = reduced_b(case, &model);
    let n = case.buses.len();
    let m = case.branches.len();

    let inv = b_red
        .clone()
        .try_inverse()
        .ok_or_else(|| SolveError::Singular("reduced B is not invertible".into()))?;

    // ISF[l][j] = b_l * (X[f_l, j] - X[t_l, j]) with X zero-padded at the
    // slack row/column.
    let x_at = |i: usize, j: usize| -> f64 {
        if red[i] == usize::MAX || red[j] == usize::MAX {
            0.0
        } else {
            inv[(red[i], red[j])]
        }
    };
    let mut isf = DMatrix::zeros(m, n);
    for (l, br) in case.branches.iter().enumerate() {
        if !br.status {
            continue;
        }
        let (f, t) = (model.index[&br.from], model.index[&br.to]);
        for j in 0..n {
            isf[(l, j)] = model.b[l] * (x_at(f, j) - x_at(t, j));
        }
    }

    let mut lodf = DMatrix::zeros(m, m);
    let mut bridge = vec![false; m];
    for (k, br_k) in case.branches.iter().enumerate() {
        if !br_k.status {
            // A dead branch cannot trip; keep the column inert.
            for l in 0..m {
                lodf[(l, k)] = f64::INFINITY;
            }
            continue;
        }
        let (mk, nk) = (model.index[&br_k.from], model.index[&br_k.to]);
        let denom = 1.0 - (isf[(k, mk)] - isf[(k, nk)]);
        if denom.abs() < BRIDGE_TOL {
            bridge[k] = true;
            for l in 0..m {
                lodf[(l, k)] = if l == k { -1.0 } else { f64::INFINITY };
            }
            continue;
        }
        for (l, br_l) in case.branches.iter().enumerate() {
            if l == k {
                lodf[(l, k)] = -1.0;
            } else if !br_l.status {
                lodf[(l, k)] = 0.0;
            } else {
                let ptdf = isf[(l, mk)] - isf[(l, nk)];
                lodf[(l, k)] = ptdf / denom;
                debug_assert!(
                    lodf[(l, k)].abs() <= LODF_SANITY_BOUND,
                    "LODF[{l}][{k}] = {} exceeds sanity bound",
                    lodf[(l, k)]
                );
            }
        }
    }

    Ok(DcSensitivities { isf, lodf, base_flow: base.flows.clone(), bridge })
}

/// Re-solves DC flows with a set of branches removed. Returns `None` when
/// the outage splits the island (no single-system flow pattern exists);
/// callers treat that as "cannot rule out trouble".
pub fn solve_dc_with_outage(case: &NetworkCase, outage: &[usize]) -> Option<Vec<f64>> {
    let mut patched = case.clone();
    for &k in outage {
        patched.branches[k].status = false;
    }
    if patched.islands().len() != 1 {
        return None;
    }
    solve_dc(&patched).ok().map(|s| s.flows)
}
