//! Full AC power flow: Newton-Raphson in polar form with generator
//! reactive limits.
//!
//! The solve never throws — infeasible or non-convergent cases come back
//! with `converged = false` so contingency sweeps can classify them as
//! unsolved and move on.
//!
//! # Approach
//!
//! Standard polar Newton-Raphson on the mismatch equations:
//!
//! ```text
//!   P_i(vm, va) = Pgen_i - Pload_i          (PV and PQ buses)
//!   Q_i(vm, va) = Qgen_i - Qload_i          (PQ buses)
//! ```
//!
//! Iterations stop when the largest mismatch drops below 1e-8 p.u.
//! (`MISMATCH_TOL`) or after `MAX_ITER` corrections. The solver first
//! tries the case's stored voltage profile as a warm start (solved cases
//! restart in zero iterations) and falls back to a flat start when the
//! warm attempt stalls.
//!
//! After each converged inner solve, PV buses whose generators would have
//! to exceed their reactive capability are switched to PQ with reactive
//! output pinned at the violated limit, and the solve repeats — at most
//! `MAX_QLIM_ROUNDS` times (no switching back; the simple scheme is robust
//! and bounded).
//!
//! Branches use the usual tap/phase-shift pi-model; bus shunts land on the
//! Ybus diagonal. All matrices are dense, which is comfortably fast at the
//! few-hundred-bus scale this crate targets.

use nalgebra::{Complex, DMatrix, DVector};

use crate::case::{BusKind, NetworkCase};

/// Convergence threshold on the largest |mismatch|, p.u.
pub const MISMATCH_TOL: f64 = 1e-8;
/// Newton iteration cap per attempt.
pub const MAX_ITER: usize = 20;
/// Cap on PV -> PQ switching rounds.
pub const MAX_QLIM_ROUNDS: usize = 10;

type C64 = Complex<f64>;

/// Solved (or abandoned) AC operating point.
#[derive(Debug, Clone)]
pub struct AcSolution {
    pub converged: bool,
    /// Newton corrections applied in the reported attempt (all Q-limit
    /// rounds included). A case already at the solution needs none.
    pub iterations: usize,
    /// PV -> PQ switching rounds performed.
    pub q_limit_rounds: usize,
    /// Largest |mismatch| at exit, p.u.
    pub max_mismatch: f64,
    /// Bus voltage magnitude (p.u.) and angle (radians).
    pub v_mag: Vec<f64>,
    pub v_ang: Vec<f64>,
    /// Net calculated injections per bus, MW / MVAr.
    pub p_inj: Vec<f64>,
    pub q_inj: Vec<f64>,
    /// Apparent power entering each branch at its two ends, MVA.
    pub flow_from_mva: Vec<f64>,
    pub flow_to_mva: Vec<f64>,
    /// Per-generator outputs, MW / MVAr (slack real power balanced, bus
    /// reactive power allocated across units by capability range).
    pub gen_p: Vec<f64>,
    pub gen_q: Vec<f64>,
}

struct AcModel {
    n: usize,
    ybus: DMatrix<C64>,
    /// Per-bus neighbor lists (including self) for sparse-ish Jacobian fill.
    neighbors: Vec<Vec<usize>>,
    slack: usize,
    /// Voltage setpoint per bus (slack and PV).
    v_set: Vec<f64>,
    /// Scheduled P injection, p.u., every bus.
    p_sched: Vec<f64>,
    /// Scheduled Q injection, p.u., meaningful at PQ buses.
    q_sched: Vec<f64>,
    /// True where the bus currently holds voltage (slack or active PV).
    is_pv: Vec<bool>,
    /// Reactive capability per bus over online units, p.u.
    q_min_bus: Vec<f64>,
    q_max_bus: Vec<f64>,
    /// Buses that started as PV (eligible for limit switching).
    originally_pv: Vec<bool>,
    branch_y: Vec<Option<BranchY>>,
}

struct BranchY {
    f: usize,
    t: usize,
    yff: C64,
    yft: C64,
    ytf: C64,
    ytt: C64,
}

fn build_model(case: &NetworkCase) -> AcModel {
    let index = case.bus_index();
    let n = case.buses.len();
    let mut ybus = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut branch_y = Vec::with_capacity(case.branches.len());

    for br in &case.branches {
        if !br.status {
            branch_y.push(None);
            continue;
        }
        let (f, t) = (index[&br.from], index[&br.to]);
        let y = C64::new(1.0, 0.0) / C64::new(br.r, br.x);
        let bc = C64::new(0.0, br.b / 2.0);
        let tau = C64::from_polar(br.tap_ratio(), br.shift.to_radians());
        let yff = (y + bc) / (tau * tau.conj());
        let yft = -y / tau.conj();
        let ytf = -y / tau;
        let ytt = y + bc;
        ybus[(f, f)] += yff;
        ybus[(f, t)] += yft;
        ybus[(t, f)] += ytf;
        ybus[(t, t)] += ytt;
        branch_y.push(Some(BranchY { f, t, yff, yft, ytf, ytt }));
    }
    for (i, bus) in case.buses.iter().enumerate() {
        ybus[(i, i)] += C64::new(bus.gs, bus.bs) / case.base_mva;
    }

    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if ybus[(i, j)] != C64::new(0.0, 0.0) {
                neighbors[i].push(j);
            }
        }
    }

    let slack = case
        .buses
        .iter()
        .position(|b| b.kind == BusKind::Slack)
        .expect("validated case has a slack bus");

    let mut p_sched = vec![0.0; n];
    let mut q_sched = vec![0.0; n];
    let mut q_min_bus = vec![0.0; n];
    let mut q_max_bus = vec![0.0; n];
    let mut v_set: Vec<f64> = case
        .buses
        .iter()
        .map(|b| if b.vm > 0.0 { b.vm } else { 1.0 })
        .collect();
    let mut has_gen = vec![false; n];

    for (i, bus) in case.buses.iter().enumerate() {
        p_sched[i] -= bus.pd / case.base_mva;
        q_sched[i] -= bus.qd / case.base_mva;
    }
    for gen in case.gens.iter().filter(|g| g.status) {
        let i = index[&gen.bus];
        p_sched[i] += gen.pg / case.base_mva;
        q_min_bus[i] += gen.q_min / case.base_mva;
        q_max_bus[i] += gen.q_max / case.base_mva;
        if !has_gen[i] {
            has_gen[i] = true;
            if gen.vg > 0.0 {
                v_set[i] = gen.vg;
            }
        }
        if case.buses[i].kind == BusKind::Pq {
            // Units parked at load buses inject their schedule verbatim.
            q_sched[i] += gen.qg / case.base_mva;
        }
    }

    let is_pv: Vec<bool> = case
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| match b.kind {
            BusKind::Slack => true,
            // A PV bus with no unit left cannot hold voltage.
            BusKind::Pv => has_gen[i],
            BusKind::Pq => false,
        })
        .collect();
    let originally_pv: Vec<bool> = case
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| b.kind == BusKind::Pv && has_gen[i])
        .collect();

    AcModel {
        n,
        ybus,
        neighbors,
        slack,
        v_set,
        p_sched,
        q_sched,
        is_pv,
        q_min_bus,
        q_max_bus,
        originally_pv,
        branch_y,
    }
}

/// Calculated complex injections, p.u.
fn injections(model: &AcModel, vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = model.n;
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let vi = C64::from_polar(vm[i], va[i]);
        let mut acc = C64::new(0.0, 0.0);
        for &j in &model.neighbors[i] {
            acc += model.ybus[(i, j)] * C64::from_polar(vm[j], va[j]);
        }
        let s = vi * acc.conj();
        p[i] = s.re;
        q[i] = s.im;
    }
    (p, q)
}

struct NewtonOutcome {
    converged: bool,
    iterations: usize,
    max_mismatch: f64,
}

/// One Newton-Raphson attempt mutating `vm`/`va` in place. `is_pv` selects
/// the current PQ set; `q_sched` the current reactive targets.
fn newton(
    model: &AcModel,
    is_pv: &[bool],
    q_sched: &[f64],
    vm: &mut [f64],
    va: &mut [f64],
) -> NewtonOutcome {
    let n = model.n;
    let pvpq: Vec<usize> = (0..n).filter(|&i| i != model.slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| i != model.slack && !is_pv[i]).collect();
    let n_theta = pvpq.len();
    let n_v = pq.len();
    let unknowns = n_theta + n_v;

    // Reverse maps into the unknown vector.
    let mut theta_pos = vec![usize::MAX; n];
    for (r, &i) in pvpq.iter().enumerate() {
        theta_pos[i] = r;
    }
    let mut v_pos = vec![usize::MAX; n];
    for (r, &i) in pq.iter().enumerate() {
        v_pos[i] = n_theta + r;
    }

    let mismatch = |vm: &[f64], va: &[f64]| -> (DVector<f64>, f64) {
        let (p, q) = injections(model, vm, va);
        let mut f = DVector::zeros(unknowns);
        let mut worst = 0.0f64;
        for (r, &i) in pvpq.iter().enumerate() {
            f[r] = model.p_sched[i] - p[i];
            worst = worst.max(f[r].abs());
        }
        for (r, &i) in pq.iter().enumerate() {
            f[n_theta + r] = q_sched[i] - q[i];
            worst = worst.max(f[n_theta + r].abs());
        }
        (f, worst)
    };

    let (mut f, mut worst) = mismatch(vm, va);
    if worst < MISMATCH_TOL {
        return NewtonOutcome { converged: true, iterations: 0, max_mismatch: worst };
    }

    for iter in 1..=MAX_ITER {
        if unknowns == 0 {
            break;
        }
        let (p, q) = injections(model, vm, va);
        let mut jac = DMatrix::zeros(unknowns, unknowns);
        for i in 0..n {
            let row_p = theta_pos[i];
            let row_q = v_pos[i];
            if row_p == usize::MAX && row_q == usize::MAX {
                continue;
            }
            for &j in &model.neighbors[i] {
                let y = model.ybus[(i, j)];
                let (g, b) = (y.re, y.im);
                if i == j {
                    if row_p != usize::MAX {
                        jac[(row_p, row_p)] = -q[i] - b * vm[i] * vm[i];
                        if row_q != usize::MAX {
                            jac[(row_p, row_q)] = p[i] / vm[i] + g * vm[i];
                        }
                    }
                    if row_q != usize::MAX {
                        jac[(row_q, theta_pos[i])] = p[i] - g * vm[i] * vm[i];
                        jac[(row_q, row_q)] = q[i] / vm[i] - b * vm[i];
                    }
                    continue;
                }
                let tij = va[i] - va[j];
                let (sin, cos) = tij.sin_cos();
                let col_t = theta_pos[j];
                let col_v = v_pos[j];
                if row_p != usize::MAX {
                    if col_t != usize::MAX {
                        jac[(row_p, col_t)] = vm[i] * vm[j] * (g * sin - b * cos);
                    }
                    if col_v != usize::MAX {
                        jac[(row_p, col_v)] = vm[i] * (g * cos + b * sin);
                    }
                }
                if row_q != usize::MAX {
                    if col_t != usize::MAX {
                        jac[(row_q, col_t)] = -vm[i] * vm[j] * (g * cos + b * sin);
                    }
                    if col_v != usize::MAX {
                        jac[(row_q, col_v)] = vm[i] * (g * sin - b * cos);
                    }
                }
            }
        }

        let delta = match jac.lu().solve(&f) {
            Some(d) => d,
            None => return NewtonOutcome { converged: false, iterations: iter, max_mismatch: worst },
        };
        for (r, &i) in pvpq.iter().enumerate() {
            va[i] += delta[r];
        }
        for (r, &i) in pq.iter().enumerate() {
            vm[i] += delta[n_theta + r];
        }
        if vm.iter().any(|v| !v.is_finite() || *v < 0.1 || *v > 3.0)
            || va.iter().any(|a| !a.is_finite())
        {
            return NewtonOutcome { converged: false, iterations: iter, max_mismatch: f64::INFINITY };
        }

        let (nf, nworst) = mismatch(vm, va);
        f = nf;
        worst = nworst;
        if worst < MISMATCH_TOL {
            return NewtonOutcome { converged: true, iterations: iter, max_mismatch: worst };
        }
    }
    NewtonOutcome { converged: false, iterations: MAX_ITER, max_mismatch: worst }
}

/// Runs the limit-aware solve from a given start. Returns the state and
/// bookkeeping; `None` start voltages mean flat.
fn attempt(
    model: &AcModel,
    start: Option<(&[f64], &[f64])>,
) -> (Vec<f64>, Vec<f64>, Vec<bool>, Vec<f64>, NewtonOutcome, usize) {
    let n = model.n;
    let mut vm: Vec<f64>;
    let mut va: Vec<f64>;
    match start {
        Some((m, a)) => {
            vm = m.to_vec();
            va = a.to_vec();
        }
        None => {
            vm = vec![1.0; n];
            va = vec![0.0; n];
        }
    }
    let mut is_pv = model.is_pv.clone();
    let mut q_sched = model.q_sched.clone();
    for i in 0..n {
        if is_pv[i] {
            vm[i] = model.v_set[i];
        }
    }

    let mut total_iters = 0;
    let mut rounds = 0;
    loop {
        let out = newton(model, &is_pv, &q_sched, &mut vm, &mut va);
        total_iters += out.iterations;
        if !out.converged {
            return (
                vm,
                va,
                is_pv,
                q_sched,
                NewtonOutcome { converged: false, iterations: total_iters, max_mismatch: out.max_mismatch },
                rounds,
            );
        }
        if rounds >= MAX_QLIM_ROUNDS {
            return (
                vm,
                va,
                is_pv,
                q_sched,
                NewtonOutcome { converged: true, iterations: total_iters, max_mismatch: out.max_mismatch },
                rounds,
            );
        }
        // Check reactive capability at buses still holding voltage.
        let (_, q) = injections(model, &vm, &va);
        let tol = 1e-6;
        let mut switched = false;
        for i in 0..n {
            if !(is_pv[i] && model.originally_pv[i]) {
                continue;
            }
            // Reactive power the units must produce: injection plus load.
            let q_gen = q[i] - model.q_sched[i];
            if q_gen > model.q_max_bus[i] + tol {
                is_pv[i] = false;
                q_sched[i] = model.q_sched[i] + model.q_max_bus[i];
                switched = true;
            } else if q_gen < model.q_min_bus[i] - tol {
                is_pv[i] = false;
                q_sched[i] = model.q_sched[i] + model.q_min_bus[i];
                switched = true;
            }
        }
        if !switched {
            return (
                vm,
                va,
                is_pv,
                q_sched,
                NewtonOutcome { converged: true, iterations: total_iters, max_mismatch: out.max_mismatch },
                rounds,
            );
        }
        rounds += 1;
    }
}

/// Solves the AC power flow for a single-island case.
pub fn solve_ac(case: &NetworkCase) -> AcSolution {
    let model = build_model(case);
    let n = model.n;

    let unsolved = |vm: Vec<f64>, va: Vec<f64>, iters: usize, rounds: usize, worst: f64| {
        let (p, q) = injections(&model, &vm, &va);
        AcSolution {
            converged: false,
            iterations: iters,
            q_limit_rounds: rounds,
            max_mismatch: worst,
            p_inj: p.iter().map(|v| v * case.base_mva).collect(),
            q_inj: q.iter().map(|v| v * case.base_mva).collect(),
            flow_from_mva: vec![0.0; case.branches.len()],
            flow_to_mva: vec![0.0; case.branches.len()],
            gen_p: vec![0.0; case.gens.len()],
            gen_q: vec![0.0; case.gens.len()],
            v_mag: vm,
            v_ang: va,
        }
    };

    if case.islands().len() != 1 {
        // Callers split outages into islands before solving; refusing here
        // keeps the mismatch equations well-posed.
        return unsolved(vec![1.0; n], vec![0.0; n], 0, 0, f64::INFINITY);
    }

    // Warm start from the stored profile, flat fallback.
    let warm_vm: Vec<f64> =
        case.buses.iter().map(|b| if b.vm > 0.0 { b.vm } else { 1.0 }).collect();
    let warm_va: Vec<f64> = case.buses.iter().map(|b| b.va.to_radians()).collect();
    let mut best = attempt(&model, Some((&warm_vm, &warm_va)));
    if !best.4.converged {
        let flat = attempt(&model, None);
        if flat.4.converged || flat.4.max_mismatch < best.4.max_mismatch {
            best = flat;
        }
    }
    let (vm, va, _is_pv, _q_sched, outcome, rounds) = best;
    if !outcome.converged {
        return unsolved(vm, va, outcome.iterations, rounds, outcome.max_mismatch);
    }

    let (p, q) = injections(&model, &vm, &va);
    let base = case.base_mva;

    let mut flow_from = vec![0.0; case.branches.len()];
    let mut flow_to = vec![0.0; case.branches.len()];
    for (k, by) in model.branch_y.iter().enumerate() {
        if let Some(by) = by {
            let vf = C64::from_polar(vm[by.f], va[by.f]);
            let vt = C64::from_polar(vm[by.t], va[by.t]);
            let sf = vf * (by.yff * vf + by.yft * vt).conj();
            let st = vt * (by.ytf * vf + by.ytt * vt).conj();
            flow_from[k] = sf.norm() * base;
            flow_to[k] = st.norm() * base;
        }
    }

    // Allocate bus-level results back to units.
    let index = case.bus_index();
    let mut gen_p = vec![0.0; case.gens.len()];
    let mut gen_q = vec![0.0; case.gens.len()];
    let mut online_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (gi, gen) in case.gens.iter().enumerate() {
        if gen.status {
            online_at[index[&gen.bus]].push(gi);
        }
    }
    // Shunts live inside Ybus, so a bus's generation duty is simply its
    // net injection plus its load.
    for i in 0..n {
        if online_at[i].is_empty() {
            continue;
        }
        let bus = &case.buses[i];
        // Real power: scheduled, except the slack bus which absorbs the
        // balance in proportion to unit size.
        if i == model.slack {
            let p_total = p[i] * base + bus.pd;
            let cap: f64 = online_at[i].iter().map(|&gi| case.gens[gi].p_max.max(0.0)).sum();
            for &gi in &online_at[i] {
                let share = if cap > 0.0 {
                    case.gens[gi].p_max.max(0.0) / cap
                } else {
                    1.0 / online_at[i].len() as f64
                };
                gen_p[gi] = p_total * share;
            }
        } else {
            for &gi in &online_at[i] {
                gen_p[gi] = case.gens[gi].pg;
            }
        }
        // Reactive power: fixed-injection units at plain load buses keep
        // their schedule; voltage-holding buses split the bus duty by
        // capability range.
        if bus.kind == BusKind::Pq && !model.originally_pv[i] {
            for &gi in &online_at[i] {
                gen_q[gi] = case.gens[gi].qg;
            }
            continue;
        }
        let q_gen_total = q[i] * base + bus.qd;
        let range: f64 = online_at[i]
            .iter()
            .map(|&gi| (case.gens[gi].q_max - case.gens[gi].q_min).max(0.0))
            .sum();
        for &gi in &online_at[i] {
            let g = &case.gens[gi];
            let share = if range > 0.0 {
                (g.q_max - g.q_min).max(0.0) / range
            } else {
                1.0 / online_at[i].len() as f64
            };
            gen_q[gi] = q_gen_total * share;
        }
    }

    AcSolution {
        converged: true,
        iterations: outcome.iterations,
        q_limit_rounds: rounds,
        max_mismatch: outcome.max_mismatch,
        v_mag: vm,
        v_ang: va,
        p_inj: p.iter().map(|v| v * base).collect(),
        q_inj: q.iter().map(|v| v * base).collect(),
        flow_from_mva: flow_from,
        flow_to_mva: flow_to,
        gen_p,
        gen_q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::testgrids::{TRIANGLE, TWO_BUS};
    use approx::assert_abs_diff_eq;

    /// Gauss-Seidel reference for the two-bus case: V2 iterates
    /// V2 <- V1 - z * conj(S_load / V2) until fixed. A different algorithm
    /// than the production Newton solve, so agreement is meaningful.
    fn two_bus_reference() -> (f64, f64) {
        let z = Complex::new(0.01, 0.1);
        let s_load = Complex::new(1.0, 0.2);
        let v1 = Complex::new(1.0, 0.0);
        let mut v2 = Complex::new(1.0, 0.0);
        for _ in 0..200 {
            v2 = v1 - z * (s_load / v2).conj();
        }
        (v2.norm(), v2.arg())
    }

    #[test]
    fn two_bus_matches_gauss_seidel() {
        let case = parse_case(TWO_BUS).unwrap();
        let sol = solve_ac(&case);
        assert!(sol.converged);
        assert!(sol.max_mismatch < MISMATCH_TOL);
        let (vref, aref) = two_bus_reference();
        assert!(vref < 1.0, "loaded bus sits below the source voltage");
        assert_abs_diff_eq!(sol.v_mag[1], vref, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.v_ang[1], aref, epsilon = 1e-8);
    }

    #[test]
    fn flat_unloaded_case_needs_no_corrections() {
        let text = TWO_BUS.replace("\t2\t1\t100\t20", "\t2\t1\t0\t0").replace(
            "\t1\t100\t0\t80\t-80",
            "\t1\t0\t0\t80\t-80",
        );
        let case = parse_case(&text).unwrap();
        let sol = solve_ac(&case);
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0, "flat voltage profile is already exact");
        assert_eq!(sol.q_limit_rounds, 0);
        for v in &sol.v_mag {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    /// Recompute injections from the returned voltages with bespoke code:
    /// converged means every non-slack bus balances to its schedule.
    #[test]
    fn converged_solution_satisfies_mismatch_independently() {
        let case = parse_case(TRIANGLE).unwrap();
        let sol = solve_ac(&case);
        assert!(sol.converged);
        let index = case.bus_index();
        let n = case.buses.len();
        let mut y = vec![vec![Complex::new(0.0, 0.0); n]; n];
        for br in case.branches.iter().filter(|b| b.status) {
            let (f, t) = (index[&br.from], index[&br.to]);
            let ys = Complex::new(1.0, 0.0) / Complex::new(br.r, br.x);
            let bc = Complex::new(0.0, br.b / 2.0);
            y[f][f] += ys + bc;
            y[t][t] += ys + bc;
            y[f][t] -= ys;
            y[t][f] -= ys;
        }
        for i in 0..n {
            let vi = Complex::from_polar(sol.v_mag[i], sol.v_ang[i]);
            let mut sum = Complex::new(0.0, 0.0);
            for j in 0..n {
                sum += y[i][j] * Complex::from_polar(sol.v_mag[j], sol.v_ang[j]);
            }
            let s = vi * sum.conj();
            let bus = &case.buses[i];
            if bus.kind == BusKind::Slack {
                continue;
            }
            let pg: f64 = case
                .gens
                .iter()
                .filter(|g| g.status && g.bus == bus.id)
                .map(|g| g.pg)
                .sum();
            assert_abs_diff_eq!(s.re * 100.0, pg - bus.pd, epsilon = 1e-6);
            if bus.kind == BusKind::Pq {
                assert_abs_diff_eq!(s.im * 100.0, -bus.qd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn infeasible_load_reports_unsolved() {
        // 60x the load the line can carry: no solution exists.
        let text = TWO_BUS.replace("\t2\t1\t100\t20", "\t2\t1\t6000\t1200");
        let case = parse_case(&text).unwrap();
        let sol = solve_ac(&case);
        assert!(!sol.converged);
        assert!(sol.max_mismatch > MISMATCH_TOL);
    }

    #[test]
    fn branch_loading_reflects_power_transfer() {
        let case = parse_case(TWO_BUS).unwrap();
        let sol = solve_ac(&case);
        assert!(sol.converged);
        // Receiving end delivers exactly the 100 + j20 load.
        assert_abs_diff_eq!(sol.flow_to_mva[0], (100.0f64.powi(2) + 20.0f64.powi(2)).sqrt(), epsilon = 1e-6);
        // Sending end adds the line losses on top.
        assert!(sol.flow_from_mva[0] > sol.flow_to_mva[0]);
        // Slack output covers load plus losses.
        assert!(sol.gen_p[0] > 100.0 && sol.gen_p[0] < 105.0);
    }

    /// Single-bus island (a generator cut off with no load): trivially
    /// solved, zero unknowns.
    #[test]
    fn single_bus_island_is_trivial() {
        let text = "\
function mpc = lonely
mpc.baseMVA = 100;
mpc.bus = [
\t7\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t7\t0\t0\t60\t-60\t1\t100\t1\t120\t0;
];
mpc.branch = [
];
";
        let case = parse_case(text).unwrap();
        let sol = solve_ac(&case);
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert_abs_diff_eq!(sol.gen_p[0], 0.0, epsilon = 1e-9);
    }

    /// A PV generator with a tight reactive ceiling gets switched to PQ
    /// and the bus voltage falls away from its setpoint.
    #[test]
    fn q_limit_switches_pv_to_pq() {
        let text = "\
function mpc = qlim
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t80\t40\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t3\t2\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t40\t0\t900\t-900\t1\t100\t1\t200\t0;
\t3\t40\t0\t5\t-5\t1.02\t100\t1\t200\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0\t300\t0\t0\t0\t0\t1\t-360\t360;
\t2\t3\t0.01\t0.1\t0\t300\t0\t0\t0\t0\t1\t-360\t360;
];
";
        let case = parse_case(text).unwrap();
        let sol = solve_ac(&case);
        assert!(sol.converged);
        assert!(sol.q_limit_rounds >= 1, "the 5 MVAr ceiling must bind");
        assert!(sol.v_mag[2] < 1.02, "switched bus can no longer hold 1.02");
        // Allocated unit output sits at the ceiling.
        assert_abs_diff_eq!(sol.gen_q[1], 5.0, epsilon = 1e-6);
    }

    /// Warm start from a solved profile re-converges immediately; the
    /// stored voltages of a fresh case are close enough that warm vs flat
    /// must agree on the answer.
    #[test]
    fn warm_and_flat_starts_agree() {
        let case = parse_case(TRIANGLE).unwrap();
        let first = solve_ac(&case);
        assert!(first.converged);
        let mut solved = case.clone();
        for (i, bus) in solved.buses.iter_mut().enumerate() {
            bus.vm = first.v_mag[i];
            bus.va = first.v_ang[i].to_degrees();
        }
        let second = solve_ac(&solved);
        assert!(second.converged);
        assert_eq!(second.iterations, 0, "stored solution warm-starts to zero work");
        for i in 0..case.buses.len() {
            assert_abs_diff_eq!(first.v_mag[i], second.v_mag[i], epsilon = 1e-7);
        }
    }
}
