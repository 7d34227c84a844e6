//! Per-branch outage impact metrics built on the LODF matrix.
//!
//! For a branch `i`, look at the column of redistribution factors its
//! outage produces on every other live branch `l`:
//!
//! ```text
//!   NLODF(i) = mean(|LODF[l][i]|) / std(|LODF[l][i]|)      l != i
//!   M(i)     = PF(i) * min(NLODF(i), 1)
//! ```
//!
//! `PF(i)` is the pre-outage MW flow. NLODF is the reciprocal coefficient
//! of variation of the impact profile: outages that spread flow broadly
//! and evenly score high, outages that dump everything on one neighbor
//! score low. Bridges (and degenerate zero-spread columns) get an infinite
//! sentinel, which the `min{.., 1}` pin turns into full flow weight — the
//! most conservative treatment for outages that split the network.
//!
//! The magnitude `|M|` orders branches for seeding the contingency search;
//! ties break toward the lower branch index so rankings are reproducible.

use nalgebra::DMatrix;

use crate::case::NetworkCase;
use crate::dc::DcSensitivities;

/// Impact metrics aligned with `case.branches`.
#[derive(Debug, Clone)]
pub struct BranchMetrics {
    /// Pre-outage DC flow, MW.
    pub pf: Vec<f64>,
    /// Normalized LODF dispersion; `f64::INFINITY` for bridges and
    /// zero-spread columns.
    pub nlodf: Vec<f64>,
    /// Impact metric `PF * min(NLODF, 1)`, MW.
    pub m: Vec<f64>,
    /// Which branches participate (in-service).
    pub live: Vec<bool>,
}

fn column_nlodf(lodf: &DMatrix<f64>, live: &[bool], col: usize) -> f64 {
    let mut vals = Vec::with_capacity(live.len());
    for (l, &alive) in live.iter().enumerate() {
        if l == col || !alive {
            continue;
        }
        vals.push(lodf[(l, col)].abs());
    }
    if vals.is_empty() {
        return f64::INFINITY;
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return f64::INFINITY;
    }
    mean / std
}

/// Computes PF / NLODF / M for every branch. Out-of-service branches get
/// zeroed metrics and are excluded from every statistic and ranking.
pub fn compute_metrics(case: &NetworkCase, sens: &DcSensitivities) -> BranchMetrics {
    let m_branches = case.branches.len();
    let live: Vec<bool> = case.branches.iter().map(|b| b.status).collect();
    let mut pf = vec![0.0; m_branches];
    let mut nlodf = vec![0.0; m_branches];
    let mut m = vec![0.0; m_branches];
    for i in 0..m_branches {
        if !live[i] {
            continue;
        }
        pf[i] = sens.base_flow[i];
        nlodf[i] = if sens.bridge[i] {
            f64::INFINITY
        } else {
            column_nlodf(&sens.lodf, &live, i)
        };
        m[i] = pf[i] * nlodf[i].min(1.0);
    }
    BranchMetrics { pf, nlodf, m, live }
}

/// Indices of the top `top_percent` of live branches by `|M|`, descending,
/// ties broken by ascending branch index. The count rounds up, so any
/// positive percentage yields at least one seed.
pub fn rank_branches(metrics: &BranchMetrics, top_percent: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..metrics.m.len()).filter(|&i| metrics.live[i]).collect();
    order.sort_by(|&a, &b| {
        metrics.m[b]
            .abs()
            .partial_cmp(&metrics.m[a].abs())
            .expect("|M| is never NaN")
            .then(a.cmp(&b))
    });
    if top_percent <= 0.0 {
        return Vec::new();
    }
    let share = (top_percent / 100.0).min(1.0);
    let count = (share * order.len() as f64).ceil() as usize;
    order.truncate(count);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::dc::{compute_lodf, solve_dc, DcSensitivities};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    /// Builds a sensitivities bundle directly so column statistics can be
    /// pinned against hand arithmetic.
    fn synthetic(lodf_cols: Vec<Vec<f64>>, flows: Vec<f64>, bridge: Vec<bool>) -> DcSensitivities {
        let m = flows.len();
        let mut lodf = DMatrix::zeros(m, m);
        for (k, col) in lodf_cols.iter().enumerate() {
            for (l, v) in col.iter().enumerate() {
                lodf[(l, k)] = *v;
            }
        }
        DcSensitivities { isf: DMatrix::zeros(m, 0), lodf, base_flow: flows, bridge }
    }

    fn case_with_branches(n: usize) -> NetworkCase {
        // Metrics only read branch status from the case; a star of n
        // branches keeps construction trivial.
        let mut text = String::from("function mpc = star\nmpc.baseMVA = 100;\nmpc.bus = [\n");
        text.push_str("\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;\n");
        for i in 0..n {
            text.push_str(&format!("\t{}\t1\t10\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;\n", i + 2));
        }
        text.push_str("];\nmpc.gen = [\n\t1\t10\t0\t60\t-60\t1\t100\t1\t120\t0;\n];\nmpc.branch = [\n");
        for i in 0..n {
            text.push_str(&format!("\t1\t{}\t0.01\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;\n", i + 2));
        }
        text.push_str("];\n");
        parse_case(&text).unwrap()
    }

    /// Worked example: |LODF| column {0.1, 0.2, 0.3, 0.4}
    ///   mean = 0.25, population std = sqrt(0.0125) = 0.1118...
    ///   NLODF = 2.2360679...; min(.., 1) pins the weight to 1.
    #[test]
    fn nlodf_matches_hand_arithmetic() {
        let case = case_with_branches(5);
        let sens = synthetic(
            vec![
                vec![0.0, 0.1, -0.2, 0.3, -0.4],
                vec![0.0; 5],
                vec![0.0; 5],
                vec![0.0; 5],
                vec![0.0; 5],
            ],
            vec![10.0, 0.0, 0.0, 0.0, 0.0],
            vec![false; 5],
        );
        let metrics = compute_metrics(&case, &sens);
        assert_abs_diff_eq!(metrics.nlodf[0], 2.23606797749979, epsilon = 1e-12);
        assert_abs_diff_eq!(metrics.m[0], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn bridge_and_zero_spread_pin_to_flow() {
        let case = case_with_branches(3);
        let sens = synthetic(
            vec![
                vec![0.0, 0.5, 0.5],   // zero spread: std = 0
                vec![0.0, 0.0, 0.0],   // bridge column (sentinel in practice)
                vec![0.0, 0.1, 0.9],
            ],
            vec![-40.0, 25.0, 10.0],
            vec![false, true, false],
        );
        let metrics = compute_metrics(&case, &sens);
        assert!(metrics.nlodf[0].is_infinite());
        assert_abs_diff_eq!(metrics.m[0], -40.0, epsilon = 1e-12);
        assert!(metrics.nlodf[1].is_infinite());
        assert_abs_diff_eq!(metrics.m[1], 25.0, epsilon = 1e-12);
        // Sign of M follows the flow; magnitude is what ranks.
        assert!(metrics.m[0] < 0.0);
        let ranked = rank_branches(&metrics, 100.0);
        assert_eq!(ranked[0], 0, "|-40| outranks 25");
    }

    #[test]
    fn ranking_breaks_ties_on_index() {
        let case = case_with_branches(4);
        let sens = synthetic(
            vec![vec![0.0; 4]; 4],
            vec![30.0, -30.0, 30.0, 10.0],
            vec![true, true, true, true],
        );
        let metrics = compute_metrics(&case, &sens);
        let ranked = rank_branches(&metrics, 100.0);
        assert_eq!(ranked, vec![0, 1, 2, 3]);
    }

    #[test]
    fn top_percent_rounds_up() {
        let case = case_with_branches(3);
        let sens = synthetic(
            vec![vec![0.0; 3]; 3],
            vec![30.0, 20.0, 10.0],
            vec![true, true, true],
        );
        let metrics = compute_metrics(&case, &sens);
        assert_eq!(rank_branches(&metrics, 5.0).len(), 1);
        assert_eq!(rank_branches(&metrics, 34.0).len(), 2);
        assert_eq!(rank_branches(&metrics, 100.0).len(), 3);
        assert!(rank_branches(&metrics, 0.0).is_empty());
    }

    #[test]
    fn out_of_service_branches_are_ignored() {
        let mut case = case_with_branches(3);
        case.branches[1].status = false;
        let sens = synthetic(
            vec![vec![0.0; 3]; 3],
            vec![30.0, 99.0, 10.0],
            vec![true, false, true],
        );
        let metrics = compute_metrics(&case, &sens);
        assert_eq!(metrics.m[1], 0.0);
        let ranked = rank_branches(&metrics, 100.0);
        assert_eq!(ranked, vec![0, 2]);
    }

    /// Scaling every injection scales M linearly and leaves both NLODF and
    /// the ranking untouched (NLODF is purely topological).
    #[test]
    fn metric_scales_with_loading() {
        let base = parse_case(crate::testgrids::TRIANGLE).unwrap();
        let mut scaled = base.clone();
        for bus in &mut scaled.buses {
            bus.pd *= 2.0;
            bus.qd *= 2.0;
        }
        for gen in &mut scaled.gens {
            gen.pg *= 2.0;
        }
        let m1 = {
            let s = solve_dc(&base).unwrap();
            compute_metrics(&base, &compute_lodf(&base, &s).unwrap())
        };
        let m2 = {
            let s = solve_dc(&scaled).unwrap();
            compute_metrics(&scaled, &compute_lodf(&scaled, &s).unwrap())
        };
        for k in 0..base.branches.len() {
            // The triangle redistributes each outage 100% onto both
            // survivors: zero spread, so NLODF saturates at infinity and
            // must do so under both loadings.
            if m1.nlodf[k].is_infinite() {
                assert!(m2.nlodf[k].is_infinite());
            } else {
                assert_abs_diff_eq!(m2.nlodf[k], m1.nlodf[k], epsilon = 1e-9);
            }
            assert_abs_diff_eq!(m2.m[k], 2.0 * m1.m[k], epsilon = 1e-9);
        }
        assert_eq!(rank_branches(&m1, 100.0), rank_branches(&m2, 100.0));
    }
}
