//! Decay-curve analysis: weighted least-squares fits of Ŝ_d = A + B·p^d,
//! the derived error rate r = (4ⁿ−1)(1−p)/4ⁿ, and nonparametric bootstrap
//! uncertainty.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::engine::RunResult;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

/// One circuit's aggregated execution record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub id: usize,
    pub d: usize,
    pub target: u64,
    pub shots: u64,
    /// Success count; fractional values carry exact probabilities
    /// (shots = 1) from the dense engine.
    pub successes: f64,
}

impl CircuitRecord {
    pub fn success_rate(&self) -> f64 {
        self.successes / self.shots as f64
    }
}

/// A full RB dataset: per-circuit success records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbDataset {
    pub n: usize,
    pub records: Vec<CircuitRecord>,
}

impl RbDataset {
    pub fn from_run(n: usize, run: &RunResult) -> Self {
        let records = run
            .circuits
            .iter()
            .map(|c| CircuitRecord {
                id: c.id,
                d: c.d,
                target: c.target,
                shots: c.shots.max(1),
                successes: if c.shots == 0 {
                    c.success_probability
                } else {
                    c.successes as f64
                },
            })
            .collect();
        RbDataset { n, records }
    }

    /// Per-depth means Ŝ_d with circuit counts and shot counts.
    pub fn depth_summary(&self) -> BTreeMap<usize, DepthPoint> {
        let mut acc: BTreeMap<usize, (f64, usize, u64)> = BTreeMap::new();
        for r in &self.records {
            let e = acc.entry(r.d).or_insert((0.0, 0, 0));
            e.0 += r.success_rate();
            e.1 += 1;
            e.2 += r.shots;
        }
        acc.into_iter()
            .map(|(d, (sum, k, shots))| {
                let mean = sum / k as f64;
                let n_shots = (shots / k as u64).max(1);
                // Binomial variance of the depth mean, floored to keep the
                // weights finite at Ŝ ∈ {0, 1}.
                let nk = (n_shots * k as u64) as f64;
                let var = (mean * (1.0 - mean)).max(1.0 / (4.0 * nk)) / nk;
                (
                    d,
                    DepthPoint {
                        d,
                        mean,
                        sigma: var.sqrt(),
                        circuits: k,
                        shots_per_circuit: n_shots,
                    },
                )
            })
            .collect()
    }
}

/// Per-depth aggregate used by the fitter and the plot tables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    pub d: usize,
    pub mean: f64,
    pub sigma: f64,
    pub circuits: usize,
    pub shots_per_circuit: u64,
}

/// Result of fitting Ŝ_d = A + B·p^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    /// r = (4ⁿ−1)(1−p)/4ⁿ.
    pub r: f64,
    pub a_fixed: bool,
    /// Weighted root-mean-square residual.
    pub residual: f64,
    pub points: Vec<DepthPoint>,
}

/// The RB error rate from a decay constant.
pub fn r_from_p(n: usize, p: f64) -> f64 {
    let dim2 = 4f64.powi(n as i32);
    (dim2 - 1.0) * (1.0 - p) / dim2
}

/// Fit the exponential decay; `fix_a` pins A = 1/2ⁿ (randomized targets).
pub fn fit_decay(dataset: &RbDataset, fix_a: bool) -> Result<FitResult> {
    let points: Vec<DepthPoint> = dataset.depth_summary().into_values().collect();
    let needed = if fix_a { 2 } else { 3 };
    if points.len() < needed {
        return Err(Error::Fit(format!(
            "need at least {needed} distinct depths, got {}",
            points.len()
        )));
    }
    let spread = points
        .iter()
        .map(|p| p.mean)
        .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if spread.1 - spread.0 < 1e-12 {
        return Err(Error::Fit("degenerate data: all depth means equal".into()));
    }
    let a_pin = 0.5f64.powi(dataset.n as i32);
    let w: Vec<f64> = points.iter().map(|p| 1.0 / (p.sigma * p.sigma)).collect();

    // Log-linear initialization on (Ŝ_d − A_guess).
    let (mut b0, mut p0) = log_linear_init(&points, a_pin);
    let mut a0 = if fix_a {
        a_pin
    } else {
        // Start from the pinned asymptote; refined by the optimizer.
        a_pin
    };
    if !(0.0..=1.0).contains(&p0) || !p0.is_finite() {
        p0 = 0.9;
    }
    if !b0.is_finite() {
        b0 = (spread.1 - a_pin).max(0.1);
    }

    let cost = |a: f64, b: f64, p: f64| -> f64 {
        points
            .iter()
            .zip(&w)
            .map(|(pt, wi)| {
                let r = a + b * p.powi(pt.d as i32) - pt.mean;
                wi * r * r
            })
            .sum()
    };

    // Levenberg-style refinement with p clamped into [0, 1].
    let mut lambda = 1e-3;
    let mut current = cost(a0, b0, p0);
    let dim = if fix_a { 2 } else { 3 };
    for _ in 0..300 {
        let mut jtj = Array2::<f64>::zeros((dim, dim));
        let mut jtr = Array1::<f64>::zeros(dim);
        for (pt, wi) in points.iter().zip(&w) {
            let pd = p0.powi(pt.d as i32);
            let res = a0 + b0 * pd - pt.mean;
            let dp = if pt.d == 0 {
                0.0
            } else {
                b0 * pt.d as f64 * p0.powi(pt.d as i32 - 1)
            };
            let grad: Vec<f64> = if fix_a {
                vec![pd, dp]
            } else {
                vec![1.0, pd, dp]
            };
            for i in 0..dim {
                jtr[i] += wi * grad[i] * res;
                for j in 0..dim {
                    jtj[[i, j]] += wi * grad[i] * grad[j];
                }
            }
        }
        let mut damped = jtj.clone();
        for i in 0..dim {
            damped[[i, i]] += lambda * (1.0 + jtj[[i, i]]);
        }
        let Ok(inv) = linalg::inv(&damped) else {
            lambda *= 10.0;
            continue;
        };
        let step = inv.dot(&jtr);
        let (na, nb, np) = if fix_a {
            (a0, b0 - step[0], (p0 - step[1]).clamp(0.0, 1.0))
        } else {
            (a0 - step[0], b0 - step[1], (p0 - step[2]).clamp(0.0, 1.0))
        };
        let next = cost(na, nb, np);
        if next < current {
            let delta = current - next;
            a0 = na;
            b0 = nb;
            p0 = np;
            current = next;
            lambda = (lambda * 0.3).max(1e-12);
            if delta < 1e-16 * (1.0 + current) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    let residual = (current / points.len() as f64).sqrt();
    Ok(FitResult {
        a: a0,
        b: b0,
        p: p0,
        r: r_from_p(dataset.n, p0),
        a_fixed: fix_a,
        residual,
        points,
    })
}

fn log_linear_init(points: &[DepthPoint], a_guess: f64) -> (f64, f64) {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.mean - a_guess > 1e-12)
        .map(|p| (p.d as f64, (p.mean - a_guess).ln()))
        .collect();
    if usable.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|u| u.0).sum::<f64>() / k;
    let my = usable.iter().map(|u| u.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|u| (u.0 - mx) * (u.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|u| (u.0 - mx) * (u.1 - my)).sum();
    if sxx < 1e-12 {
        return (f64::NAN, f64::NAN);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    (intercept.exp(), slope.exp().clamp(0.0, 1.0))
}

/// Bootstrap summary for the fitted error rate r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub r_mean: f64,
    pub sigma: f64,
    /// Percentile 2σ interval (2.5% … 97.5%).
    pub lo: f64,
    pub hi: f64,
    pub resamples: usize,
}

/// Nonparametric bootstrap: resample circuits within each depth, refit.
pub fn bootstrap(
    dataset: &RbDataset,
    fix_a: bool,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let mut by_depth: BTreeMap<usize, Vec<&CircuitRecord>> = BTreeMap::new();
    for r in &dataset.records {
        by_depth.entry(r.d).or_default().push(r);
    }
    if by_depth.values().any(|v| v.len() < 2) {
        return Err(Error::Fit(
            "bootstrap needs at least two circuits per depth".into(),
        ));
    }
    let mut rs = Vec::with_capacity(resamples);
    for i in 0..resamples {
        let mut rng = rng::substream(seed, i as u64, 0, 3);
        let mut records = Vec::with_capacity(dataset.records.len());
        for group in by_depth.values() {
            for _ in 0..group.len() {
                records.push(group[rng.gen_range(0..group.len())].clone());
            }
        }
        let resampled = RbDataset {
            n: dataset.n,
            records,
        };
        rs.push(fit_decay(&resampled, fix_a)?.r);
    }
    rs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mean = rs.iter().sum::<f64>() / rs.len() as f64;
    let var = rs.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / rs.len() as f64;
    let pick = |q: f64| rs[((q * (rs.len() - 1) as f64).round() as usize).min(rs.len() - 1)];
    Ok(BootstrapResult {
        r_mean: mean,
        sigma: var.sqrt(),
        lo: pick(0.025),
        hi: pick(0.975),
        resamples,
    })
}

/// Relative error δ = (r̂ − ε)/ε of the estimate against the true rate.
pub fn relative_error(r_hat: f64, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::invalid("ε must be positive"));
    }
    Ok((r_hat - epsilon) / epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(n: usize, a: f64, b: f64, p: f64, depths: &[usize], k: usize) -> RbDataset {
        let mut records = Vec::new();
        for &d in depths {
            for i in 0..k {
                records.push(CircuitRecord {
                    id: records.len(),
                    d,
                    target: 0,
                    shots: 100,
                    successes: 100.0 * (a + b * p.powi(d as i32)),
                    // deterministic per-circuit copies
                });
                let _ = i;
            }
        }
        RbDataset { n, records }
    }

    #[test]
    fn exact_noiseless_inversion() {
        let ds = synthetic(1, 0.25, 0.75, 0.95, &[0, 1, 2, 4, 8, 16, 32], 3);
        let fit = fit_decay(&ds, false).unwrap();
        assert_abs_diff_eq!(fit.a, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.b, 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.p, 0.95, epsilon = 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn r_arithmetic() {
        assert_abs_diff_eq!(r_from_p(1, 0.97), 0.75 * 0.03, epsilon = 1e-15);
        let ds = synthetic(1, 0.25, 0.70, 0.97, &[0, 2, 4, 8, 16], 2);
        let fit = fit_decay(&ds, false).unwrap();
        assert_abs_diff_eq!(fit.r, 0.0225, epsilon = 1e-8);
    }

    #[test]
    fn exact_recovery_across_random_parameters() {
        let mut rng = rng::master(31);
        for _ in 0..100 {
            let n = 1 + rng.gen_range(0..2usize);
            let a = 0.5f64.powi(n as i32);
            let b = 0.3 + 0.6 * rng.gen::<f64>();
            let p = 0.5 + 0.499 * rng.gen::<f64>();
            let ds = synthetic(n, a, b, p, &[0, 1, 2, 4, 8, 16, 32, 64], 2);
            let fit = fit_decay(&ds, false).unwrap();
            assert!(
                fit.residual < 1e-9,
                "residual {} for (a={a}, b={b}, p={p})",
                fit.residual
            );
            assert_abs_diff_eq!(fit.p, p, epsilon = 1e-7);
        }
    }

    #[test]
    fn fixing_a_matches_on_pinned_data() {
        let ds = synthetic(2, 0.25, 0.7, 0.9, &[0, 1, 2, 4, 8, 16], 2);
        let free = fit_decay(&ds, false).unwrap();
        let pinned = fit_decay(&ds, true).unwrap();
        assert_abs_diff_eq!(pinned.a, 0.25, epsilon = 0.0);
        assert!(pinned.residual <= free.residual + 1e-9);
        assert_abs_diff_eq!(pinned.p, 0.9, epsilon = 1e-8);
    }

    #[test]
    fn shot_rescaling_leaves_r_unchanged() {
        let mut ds = synthetic(1, 0.25, 0.72, 0.93, &[0, 1, 2, 4, 8], 3);
        // Perturb slightly so the fit is nontrivial.
        for (i, rec) in ds.records.iter_mut().enumerate() {
            rec.successes = (rec.successes + (i % 3) as f64 - 1.0).clamp(0.0, 100.0);
        }
        let r1 = fit_decay(&ds, true).unwrap().r;
        let mut scaled = ds.clone();
        for rec in scaled.records.iter_mut() {
            rec.shots *= 10;
            rec.successes *= 10.0;
        }
        let r2 = fit_decay(&scaled, true).unwrap().r;
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-10);
    }

    #[test]
    fn bootstrap_zero_variance_and_reproducibility() {
        let ds = synthetic(1, 0.25, 0.75, 0.9, &[0, 1, 2, 4], 4);
        let b1 = bootstrap(&ds, true, 50, 77).unwrap();
        assert_abs_diff_eq!(b1.sigma, 0.0, epsilon = 1e-10);
        let b2 = bootstrap(&ds, true, 50, 77).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn error_paths() {
        let ds = synthetic(1, 0.25, 0.75, 0.9, &[0, 1], 2);
        assert!(fit_decay(&ds, false).is_err()); // too few depths free
        assert!(fit_decay(&ds, true).is_ok());
        let flat = synthetic(1, 0.5, 0.0, 0.9, &[0, 1, 2, 4], 2);
        assert!(fit_decay(&flat, false).is_err()); // degenerate
        let single = synthetic(1, 0.25, 0.75, 0.9, &[0, 1, 2, 4], 1);
        assert!(bootstrap(&single, true, 10, 1).is_err());
        assert!(relative_error(0.01, 0.0).is_err());
    }

    #[test]
    fn relative_error_values() {
        assert_abs_diff_eq!(relative_error(0.02, 0.02).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            relative_error(0.9 * 0.05, 0.05).unwrap(),
            -0.1,
            epsilon = 1e-12
        );
    }
}
