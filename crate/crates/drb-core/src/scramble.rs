//! Error-delocalization statistics: how fast a weight-1 Pauli error spreads
//! when conjugated through random G4-style layers (L₁ uniform one-qubit
//! Cliffords, then an edge-color CNOT layer), the low-weight survival
//! probabilities κ(w, k) and their worst case K(w, k), and the derived
//! delocalization depth k_delocal.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::clifford::group_table;
use crate::connectivity::Connectivity;
use crate::error::{Error, Result};
use crate::rng;

/// Normal quantile for the 95% Wilson score intervals.
const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Weights tracked by the K(w, k) tables.
pub const TRACKED_WEIGHTS: [usize; 3] = [1, 2, 3];

/// Options for the propagation Monte Carlo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScrambleOptions {
    /// Cycle deterministically through the CNOT color classes instead of
    /// drawing a uniform class each layer.
    pub correlated: bool,
    /// Largest layer count k in the report.
    pub k_max: usize,
    /// Monte Carlo trials per initial weight-1 Pauli.
    pub trials: usize,
    /// Threshold δ for the delocalization depth K(3, k) < δ.
    pub delta: f64,
}

impl Default for ScrambleOptions {
    fn default() -> Self {
        ScrambleOptions {
            correlated: false,
            k_max: 16,
            trials: 100_000,
            delta: 0.05,
        }
    }
}

/// A binomial proportion with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonEstimate {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> WilsonEstimate {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    WilsonEstimate {
        estimate: p,
        lo: (center - half).max(0.0),
        hi: (center + half).min(1.0),
    }
}

/// One row of the worst-case low-weight table: K(w, k) for w ∈ {1, 2, 3}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub k: usize,
    /// Indexed by `TRACKED_WEIGHTS` (w = 1, 2, 3).
    pub k_cap: [WilsonEstimate; 3],
}

/// Full scrambling report for one connectivity graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScramblingReport {
    pub n: usize,
    pub connectivity: String,
    pub correlated: bool,
    pub trials: usize,
    pub k_max: usize,
    /// E[W(P^{(k)})], averaged over all 3n weight-1 initial errors; index k.
    pub expected_weight: Vec<f64>,
    /// K(w, k) = max over initial errors of κ(w, k); one row per k.
    pub rows: Vec<KappaRow>,
    /// δ threshold the report was generated with.
    pub delta_delocal: f64,
    /// Smallest k with upper-CI K(3, k) < δ, if reached within k_max.
    pub k_delocal: Option<usize>,
}

/// Local Pauli code on one qubit: bit 0 = X component, bit 1 = Z component
/// (0 = I, 1 = X, 2 = Z, 3 = Y).
#[derive(Clone, Copy, Debug, PartialEq)]
struct PauliMask {
    x: u64,
    z: u64,
}

impl PauliMask {
    fn weight(self) -> u32 {
        (self.x | self.z).count_ones()
    }

    fn local(self, q: usize) -> usize {
        (((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)) as usize
    }

    fn set_local(&mut self, q: usize, code: usize) {
        self.x = (self.x & !(1 << q)) | (((code as u64) & 1) << q);
        self.z = (self.z & !(1 << q)) | ((((code as u64) >> 1) & 1) << q);
    }
}

/// Conjugation tables for the 24 one-qubit Cliffords: `lut[c][p]` is the
/// local-Pauli code of C p C† (signs dropped; only weights matter here).
fn one_qubit_luts() -> Vec<[usize; 4]> {
    let table = group_table();
    table
        .elements
        .iter()
        .map(|c| {
            let code = |p: &crate::pauli::Pauli| -> usize {
                ((p.x_bits() & 1) | ((p.z_bits() & 1) << 1)) as usize
            };
            let cx = code(c.x_image(0));
            let cz = code(c.z_image(0));
            [0, cx, cz, cx ^ cz]
        })
        .collect()
}

/// Conjugate through CNOT(control → target): X_c → X_c X_t, Z_t → Z_c Z_t.
fn cnot_step(p: &mut PauliMask, control: usize, target: usize) {
    let xc = (p.x >> control) & 1;
    let zt = (p.z >> target) & 1;
    p.x ^= xc << target;
    p.z ^= zt << control;
}

/// One L₁ layer: independently uniform one-qubit Clifford on each qubit.
/// Only the support matters (identity is fixed by conjugation).
fn l1_step<R: rand::Rng + ?Sized>(p: &mut PauliMask, luts: &[[usize; 4]], rng: &mut R) {
    let mut support = p.x | p.z;
    while support != 0 {
        let q = support.trailing_zeros() as usize;
        support &= support - 1;
        let c = rng.gen_range(0..luts.len());
        p.set_local(q, luts[c][p.local(q)]);
    }
}

/// Monte Carlo estimate of the weight-propagation statistics.
pub fn propagate_weight_stats(
    conn: &Connectivity,
    opts: &ScrambleOptions,
    seed: u64,
) -> Result<ScramblingReport> {
    let n = conn.n();
    if n < 2 || n > 64 {
        return Err(Error::invalid("scrambling analysis needs 2 ≤ n ≤ 64"));
    }
    if conn.edges().is_empty() {
        return Err(Error::invalid("connectivity has no edges to color"));
    }
    if opts.trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if !(0.0..=1.0).contains(&opts.delta) {
        return Err(Error::invalid("delta must lie in [0, 1]"));
    }
    let classes = conn.edge_coloring();
    let luts = one_qubit_luts();
    let kk = opts.k_max + 1;

    // Per initial error: low-weight counts [w index][k] and weight sums [k].
    let initials: Vec<PauliMask> = (0..n)
        .flat_map(|q| {
            [
                PauliMask { x: 1 << q, z: 0 },
                PauliMask { x: 0, z: 1 << q },
                PauliMask {
                    x: 1 << q,
                    z: 1 << q,
                },
            ]
        })
        .collect();
    let mut weight_sum = vec![0.0f64; kk];
    let mut best_counts = vec![[0u64; 3]; kk];
    let mut per_initial = vec![vec![[0u64; 3]; kk]; initials.len()];

    for (i, init) in initials.iter().enumerate() {
        let mut rng = rng::substream(seed, i as u64, 0, 4);
        for _ in 0..opts.trials {
            let mut p = *init;
            for k in 0..kk {
                if k > 0 {
                    l1_step(&mut p, &luts, &mut rng);
                    let class = if opts.correlated {
                        &classes[(k - 1) % classes.len()]
                    } else {
                        &classes[rng.gen_range(0..classes.len())]
                    };
                    for &(a, b) in class {
                        cnot_step(&mut p, a, b);
                    }
                }
                let w = p.weight() as usize;
                weight_sum[k] += w as f64;
                for (wi, &wt) in TRACKED_WEIGHTS.iter().enumerate() {
                    if w <= wt {
                        per_initial[i][k][wi] += 1;
                    }
                }
            }
        }
    }
    // Worst case over initial errors, per (w, k).
    for counts in &per_initial {
        for k in 0..kk {
            for wi in 0..3 {
                best_counts[k][wi] = best_counts[k][wi].max(counts[k][wi]);
            }
        }
    }
    let total = (initials.len() * opts.trials) as f64;
    let expected_weight: Vec<f64> = weight_sum.iter().map(|s| s / total).collect();
    let rows: Vec<KappaRow> = (0..kk)
        .map(|k| KappaRow {
            k,
            k_cap: [0, 1, 2].map(|wi| wilson(best_counts[k][wi], opts.trials as u64, WILSON_Z)),
        })
        .collect();
    let mut report = ScramblingReport {
        n,
        connectivity: format!("{} qubits, {} edges", n, conn.edges().len()),
        correlated: opts.correlated,
        trials: opts.trials,
        k_max: opts.k_max,
        expected_weight,
        rows,
        delta_delocal: opts.delta,
        k_delocal: None,
    };
    report.k_delocal = k_delocal(&report, opts.delta).ok();
    Ok(report)
}

/// Smallest k whose upper confidence bound on K(3, k) lies below δ.
pub fn k_delocal(report: &ScramblingReport, delta: f64) -> Result<usize> {
    if delta >= 1.0 {
        // κ is a probability, so any k (including 0) clears a unit threshold.
        return Ok(0);
    }
    report
        .rows
        .iter()
        .find(|row| row.k_cap[2].hi < delta)
        .map(|row| row.k)
        .ok_or_else(|| {
            Error::invalid(format!(
                "K(3, k) never drops below δ = {delta} within k ≤ {}",
                report.k_max
            ))
        })
}

/// Reliability condition: the per-draw error rate must satisfy
/// ε_Ω < 1 / k_delocal (vacuously true when k_delocal = 0).
pub fn reliable(epsilon_omega: f64, k_delocal: usize) -> bool {
    k_delocal == 0 || epsilon_omega < 1.0 / k_delocal as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cnot_micro_laws_exact() {
        // Weight-1 error on either leg of a CNOT: 4 of the 6 non-identity
        // one-qubit Paulis spread to weight 2.
        let mut spread = 0;
        for code in 1..4usize {
            for qubit in [0usize, 1] {
                let mut p = PauliMask { x: 0, z: 0 };
                p.set_local(qubit, code);
                cnot_step(&mut p, 0, 1);
                if p.weight() == 2 {
                    spread += 1;
                }
            }
        }
        assert_eq!(spread, 4);
        // Weight-2 error on the coupled pair: 4 of 9 recombine to weight 1.
        let mut recombine = 0;
        for a in 1..4usize {
            for b in 1..4usize {
                let mut p = PauliMask { x: 0, z: 0 };
                p.set_local(0, a);
                p.set_local(1, b);
                cnot_step(&mut p, 0, 1);
                if p.weight() == 1 {
                    recombine += 1;
                }
            }
        }
        assert_eq!(recombine, 4);
    }

    #[test]
    fn l1_layer_uniformizes_on_support() {
        let luts = one_qubit_luts();
        assert_eq!(luts.len(), 24);
        let mut rng = rng::master(11);
        // Weight-1 support: X must land uniformly on {X, Z, Y}.
        let trials = 9000;
        let mut counts1 = [0u64; 4];
        for _ in 0..trials {
            let mut p = PauliMask { x: 1, z: 0 };
            l1_step(&mut p, &luts, &mut rng);
            counts1[p.local(0)] += 1;
        }
        assert_eq!(counts1[0], 0);
        let expect = trials as f64 / 3.0;
        let chi2: f64 = counts1[1..]
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 16.27, "w=1 chi-squared {chi2}"); // 2 dof, p ≈ 3e-4

        // Weight-2 support: uniform over the 9 non-identity patterns.
        let trials = 18000;
        let mut counts2 = [[0u64; 4]; 4];
        for _ in 0..trials {
            let mut p = PauliMask { x: 0b11, z: 0 };
            l1_step(&mut p, &luts, &mut rng);
            counts2[p.local(0)][p.local(1)] += 1;
        }
        let expect = trials as f64 / 9.0;
        let mut chi2 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if a == 0 || b == 0 {
                    assert_eq!(counts2[a][b], 0);
                } else {
                    chi2 += (counts2[a][b] as f64 - expect).powi(2) / expect;
                }
            }
        }
        assert!(chi2 < 26.12, "w=2 chi-squared {chi2}"); // 8 dof, p ≈ 0.001
    }

    #[test]
    fn trivial_depth_and_fresh_partner_expectation() {
        let conn = Connectivity::all_to_all(2);
        let opts = ScrambleOptions {
            k_max: 1,
            trials: 20000,
            ..ScrambleOptions::default()
        };
        let rep = propagate_weight_stats(&conn, &opts, 3).unwrap();
        // k = 0: no propagation at all.
        assert_abs_diff_eq!(rep.expected_weight[0], 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(rep.rows[0].k_cap[2].estimate, 1.0, epsilon = 0.0);
        // One layer, partner starts clean: E[W] = 1·(1/3) + 2·(2/3) = 5/3.
        assert_abs_diff_eq!(rep.expected_weight[1], 5.0 / 3.0, epsilon = 0.012);
    }

    #[test]
    fn report_invariants_and_asymptote() {
        let conn = Connectivity::all_to_all(4);
        let opts = ScrambleOptions {
            k_max: 30,
            trials: 4000,
            ..ScrambleOptions::default()
        };
        let rep = propagate_weight_stats(&conn, &opts, 9).unwrap();
        for row in &rep.rows {
            for est in &row.k_cap {
                assert!(est.lo >= 0.0 && est.lo <= est.estimate);
                assert!(est.hi <= 1.0 && est.hi >= est.estimate);
            }
        }
        // K(3, k) non-increasing in k beyond the first layer, up to MC noise.
        let slack = 3.0 * (0.25 / opts.trials as f64).sqrt();
        for pair in rep.rows[1..].windows(2) {
            assert!(
                pair[1].k_cap[2].estimate <= pair[0].k_cap[2].estimate + slack,
                "K(3,·) increased from k={} to k={}",
                pair[0].k,
                pair[1].k
            );
        }
        // Deep-circuit limit: uniform over the 4ⁿ−1 non-identity Paulis,
        // E[W] = (3n/4)·4ⁿ/(4ⁿ−1) ≈ 3n/4.
        let limit = 3.0 * 4.0 / 4.0 * 256.0 / 255.0;
        assert_abs_diff_eq!(rep.expected_weight[30], limit, epsilon = 0.03);
    }

    #[test]
    fn all_to_all_outpaces_ring() {
        let opts = ScrambleOptions {
            k_max: 3,
            trials: 4000,
            ..ScrambleOptions::default()
        };
        let ata = propagate_weight_stats(&Connectivity::all_to_all(8), &opts, 17).unwrap();
        let ring = propagate_weight_stats(&Connectivity::ring(8), &opts, 17).unwrap();
        assert!(
            ata.expected_weight[3] > ring.expected_weight[3] + 0.1,
            "E[W] all-to-all {} vs ring {}",
            ata.expected_weight[3],
            ring.expected_weight[3]
        );
    }

    #[test]
    fn delocalization_depth() {
        let conn = Connectivity::all_to_all(6);
        let opts = ScrambleOptions {
            k_max: 12,
            trials: 3000,
            delta: 0.3,
            ..ScrambleOptions::default()
        };
        let rep = propagate_weight_stats(&conn, &opts, 21).unwrap();
        // δ = 1 is vacuous.
        assert_eq!(k_delocal(&rep, 1.0).unwrap(), 0);
        let k = rep.k_delocal.expect("threshold reached");
        assert!(k >= 1 && k <= 9, "k_delocal = {k}");
        // An unreachable threshold is an error: with n = 6 the stationary
        // low-weight mass stays far above 1e-9.
        assert!(k_delocal(&rep, 1e-9).is_err());
        // Reliability verdict arithmetic.
        assert!(reliable(0.5 / k as f64, k));
        assert!(!reliable(2.0 / k as f64, k));
        assert!(reliable(123.0, 0));
    }

    #[test]
    fn determinism_and_errors() {
        let conn = Connectivity::ring(4);
        let opts = ScrambleOptions {
            k_max: 4,
            trials: 500,
            ..ScrambleOptions::default()
        };
        let a = propagate_weight_stats(&conn, &opts, 5).unwrap();
        let b = propagate_weight_stats(&conn, &opts, 5).unwrap();
        assert_eq!(a, b);
        let edgeless = Connectivity::new(3, []).unwrap();
        assert!(propagate_weight_stats(&edgeless, &opts, 5).is_err());
        let zero = ScrambleOptions {
            trials: 0,
            ..opts
        };
        assert!(propagate_weight_stats(&conn, &zero, 5).is_err());
    }

    #[test]
    fn correlated_ring_delocalizes_no_slower() {
        let conn = Connectivity::ring(30);
        let base = ScrambleOptions {
            k_max: 8,
            trials: 2000,
            ..ScrambleOptions::default()
        };
        let plain = propagate_weight_stats(&conn, &base, 13).unwrap();
        let corr = propagate_weight_stats(
            &conn,
            &ScrambleOptions {
                correlated: true,
                ..base
            },
            13,
        )
        .unwrap();
        let slack = 3.0 * (2.0 * 0.25 / base.trials as f64).sqrt();
        for k in 4..=8 {
            assert!(
                corr.rows[k].k_cap[2].estimate <= plain.rows[k].k_cap[2].estimate + slack,
                "correlated K(3,{k}) = {} vs plain {}",
                corr.rows[k].k_cap[2].estimate,
                plain.rows[k].k_cap[2].estimate
            );
        }
    }
}
