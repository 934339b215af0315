//! Accuracy metrics over repeated runs against exact counts.
//!
//! All four metrics follow the same conventions: population (1/n)
//! normalization, the `x + 1` denominator guarding zero-triangle graphs, and
//! per-run Pearson coefficients averaged across runs. Local metrics align on
//! the node set of the exact graph; a node missing from an estimate reads as
//! zero.

use alloc::vec::Vec;

use crate::aggregation::CountSnapshot;
use crate::math;
use crate::oracle::ExactCounts;

/// `(1/n) * sum |x - est_i| / (x + 1)`
pub fn mean_global_error(exact: u64, estimates: &[f64]) -> f64 {
    let x = exact as f64;
    let n = estimates.len() as f64;
    estimates.iter().map(|est| (x - est).abs() / (x + 1.0)).sum::<f64>() / n
}

/// `(1/n) * sum (x - est_i)^2`
pub fn global_variance(exact: u64, estimates: &[f64]) -> f64 {
    let x = exact as f64;
    let n = estimates.len() as f64;
    estimates.iter().map(|est| (x - est) * (x - est)).sum::<f64>() / n
}

/// Inner local error of one run: `(1/|V|) * sum_u |x_u - est_u| / (x_u + 1)`
/// over the exact graph's nodes.
pub fn local_error(exact: &ExactCounts, estimate: &CountSnapshot) -> f64 {
    if exact.locals.is_empty() {
        return 0.0;
    }
    let sum: f64 = exact
        .locals
        .iter()
        .map(|(&node, &x_u)| {
            let x_u = x_u as f64;
            (x_u - estimate.local(node)).abs() / (x_u + 1.0)
        })
        .sum();
    sum / exact.locals.len() as f64
}

/// Mean of [`local_error`] across runs.
pub fn mean_local_error(exact: &ExactCounts, runs: &[CountSnapshot]) -> f64 {
    runs.iter().map(|r| local_error(exact, r)).sum::<f64>() / runs.len() as f64
}

/// Population Pearson correlation. `None` when either vector is constant
/// (the coefficient is undefined there; reporting 0 or 1 would be wrong
/// either way).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return None;
    }
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    let rho = cov / (math::sqrt(var_x) * math::sqrt(var_y));
    Some(rho.clamp(-1.0, 1.0))
}

/// Pearson between exact locals and one run's estimated locals, aligned on
/// the exact graph's nodes.
pub fn pearson_locals(exact: &ExactCounts, estimate: &CountSnapshot) -> Option<f64> {
    let xs: Vec<f64> = exact.locals.values().map(|&x| x as f64).collect();
    let ys: Vec<f64> = exact.locals.keys().map(|&n| estimate.local(n)).collect();
    pearson(&xs, &ys)
}

/// Metrics for `n` repeated runs of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub runs: u32,
    pub mean_global_error: f64,
    pub global_variance: f64,
    pub mean_local_error: f64,
    /// Mean of the per-run coefficients that are defined; absent when no run
    /// defines one.
    pub mean_pearson: Option<f64>,
    /// Per-run global estimates, in run order.
    pub estimates: Vec<f64>,
}

/// Scores final snapshots of repeated runs against the exact counts.
pub fn evaluate_runs(exact: &ExactCounts, runs: &[CountSnapshot]) -> RunReport {
    assert!(!runs.is_empty(), "need at least one run");
    let estimates: Vec<f64> = runs.iter().map(|r| r.global).collect();
    let rhos: Vec<f64> = runs.iter().filter_map(|r| pearson_locals(exact, r)).collect();
    RunReport {
        runs: runs.len() as u32,
        mean_global_error: mean_global_error(exact.global, &estimates),
        global_variance: global_variance(exact.global, &estimates),
        mean_local_error: mean_local_error(exact, runs),
        mean_pearson: if rhos.is_empty() {
            None
        } else {
            Some(rhos.iter().sum::<f64>() / rhos.len() as f64)
        },
        estimates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn snapshot(locals: &[(u64, f64)]) -> CountSnapshot {
        CountSnapshot {
            position: 0,
            global: 0.0,
            locals: locals.iter().copied().collect(),
        }
    }

    fn exact(locals: &[(u64, u64)]) -> ExactCounts {
        let locals: BTreeMap<u64, u64> = locals.iter().copied().collect();
        let global = locals.values().sum::<u64>() / 3;
        ExactCounts { global, locals }
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn global_error_fixtures() {
        assert!(mean_global_error(10, &[10.0, 10.0]).abs() < TOL);
        assert!((mean_global_error(9, &[19.0]) - 1.0).abs() < TOL);
        assert!((mean_global_error(0, &[0.5]) - 0.5).abs() < TOL);
    }

    #[test]
    fn global_variance_fixtures() {
        assert!((global_variance(10, &[8.0, 12.0]) - 4.0).abs() < TOL);
        assert!(global_variance(10, &[10.0, 10.0, 10.0]).abs() < TOL);
        assert!((global_variance(0, &[3.0]) - 9.0).abs() < TOL);
    }

    #[test]
    fn local_error_fixtures() {
        // perfect estimates
        let ex = exact(&[(1, 3), (2, 3), (3, 3)]);
        let est = snapshot(&[(1, 3.0), (2, 3.0), (3, 3.0)]);
        assert!(mean_local_error(&ex, &[est]).abs() < TOL);

        // V={a,b}, x_a=3, x_b=0; estimates 1, 1
        let ex = exact(&[(10, 3), (11, 0)]);
        let est = snapshot(&[(10, 1.0), (11, 1.0)]);
        assert!((mean_local_error(&ex, &[est]) - 0.75).abs() < TOL);

        // all-zero estimates on K4 (x_u = 3 for all four nodes): 3/4 per node
        let ex = exact(&[(1, 3), (2, 3), (3, 3), (4, 3)]);
        let est = snapshot(&[]);
        assert!((mean_local_error(&ex, &[est]) - 0.75).abs() < TOL);
    }

    #[test]
    fn missing_estimates_read_as_zero() {
        let ex = exact(&[(1, 2), (2, 2), (3, 2)]);
        let est = snapshot(&[(1, 2.0)]); // nodes 2 and 3 absent
        let want = (0.0 + 2.0 / 3.0 + 2.0 / 3.0) / 3.0;
        assert!((mean_local_error(&ex, &[est]) - want).abs() < TOL);
    }

    #[test]
    fn pearson_fixtures() {
        let x = [1.0, 2.0, 3.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < TOL);

        // affine invariance: est = 2x + 5
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 5.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < TOL);

        let rev = [3.0, 2.0, 1.0];
        assert!((pearson(&x, &rev).unwrap() + 1.0).abs() < TOL);
    }

    #[test]
    fn pearson_undefined_for_constant_vectors() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), None);
        assert_eq!(pearson(&[], &[]), None);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let a = [4.0, 9.0, 2.0, 7.0];
        let b = [9.0, 7.0, 4.0, 2.0];
        assert!((mean_global_error(5, &a) - mean_global_error(5, &b)).abs() < TOL);
        assert!((global_variance(5, &a) - global_variance(5, &b)).abs() < TOL);
    }

    #[test]
    fn zero_error_iff_every_run_exact() {
        assert_eq!(mean_global_error(7, &[7.0, 7.0]), 0.0);
        assert!(mean_global_error(7, &[7.0, 7.1]) > 0.0);
        assert_eq!(global_variance(7, &[7.0, 7.0]), 0.0);
        assert!(global_variance(7, &[7.0, 6.9]) > 0.0);
    }

    #[test]
    fn evaluate_runs_aggregates() {
        let ex = exact(&[(1, 3), (2, 3), (3, 3), (4, 3)]);
        let mut perfect = snapshot(&[(1, 3.0), (2, 3.0), (3, 3.0), (4, 3.0)]);
        perfect.global = 4.0;
        let mut off = snapshot(&[(1, 2.0), (2, 3.0), (3, 4.0), (4, 3.0)]);
        off.global = 6.0;
        let report = evaluate_runs(&ex, &[perfect.clone(), off]);
        assert_eq!(report.runs, 2);
        assert!((report.mean_global_error - (0.0 + 2.0 / 5.0) / 2.0).abs() < TOL);
        assert!((report.global_variance - (0.0 + 4.0) / 2.0).abs() < TOL);
        assert_eq!(report.estimates, vec![4.0, 6.0]);
        // first run's rho undefined (constant exact vector)... K4 locals are
        // all 3, so exact is constant: every run's rho is undefined
        assert_eq!(report.mean_pearson, None);
    }

    #[test]
    fn evaluate_runs_mixed_pearson() {
        let ex = exact(&[(1, 6), (2, 3), (3, 3)]);
        let aligned = snapshot(&[(1, 6.0), (2, 3.0), (3, 3.0)]);
        let constant = snapshot(&[(1, 2.0), (2, 2.0), (3, 2.0)]);
        let report = evaluate_runs(&ex, &[aligned, constant]);
        // the constant run is skipped; the aligned run has rho = 1
        assert!((report.mean_pearson.unwrap() - 1.0).abs() < TOL);
    }
}
