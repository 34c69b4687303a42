//! Sampling distributions Ω over n-qubit circuit layers: the edge-grab
//! sampler and uniform samplers for the example gate-set families G2–G4.
//!
//! One Ω-draw is a [`CoreGate`]: an n-qubit gate realized as one or more
//! vocabulary layers (the composite families apply a randomizing one-qubit
//! layer L₁ and then a CNOT layer L₂).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateName, Layer};
use crate::connectivity::Connectivity;
use crate::error::{Error, Result};

/// Redraw cap for the edge-grab validity condition.
pub const EDGE_GRAB_RETRY_CAP: usize = 1000;

/// One sampled n-qubit gate (an element of 𝔾), as its vocabulary layers in
/// application order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreGate {
    pub layers: Vec<Layer>,
}

/// Pool of one-qubit gates used to fill non-coupled qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneQubitPool {
    /// The 24-element single-qubit Clifford group (default).
    Clifford24,
    /// {X90, Y90, I}.
    X90Y90I,
    /// {X90, Z(θ)} with uniform θ — the universal family of example set 1.
    X90ZTheta,
}

impl OneQubitPool {
    pub fn sample<R: Rng + ?Sized>(&self, q: usize, rng: &mut R) -> Gate {
        match self {
            OneQubitPool::Clifford24 => Gate::one(GateName::C1(rng.gen_range(0..24)), q),
            OneQubitPool::X90Y90I => {
                let name = [GateName::X90, GateName::Y90, GateName::I][rng.gen_range(0..3)];
                Gate::one(name, q)
            }
            OneQubitPool::X90ZTheta => {
                if rng.gen_bool(0.5) {
                    Gate::one(GateName::X90, q)
                } else {
                    Gate::zrot(q, rng.gen::<f64>() * 2.0 * std::f64::consts::PI)
                }
            }
        }
    }

    /// Whether every sampled gate is Clifford.
    pub fn is_clifford(&self) -> bool {
        !matches!(self, OneQubitPool::X90ZTheta)
    }
}

/// A sampling distribution Ω over core gates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingDistribution {
    /// Appendix-B edge grab with expected two-qubit gate density ξ̄.
    EdgeGrab { xi_bar: f64, pool: OneQubitPool },
    /// Example family G2: per-qubit uniform {I, H, S} (generators of the
    /// one-qubit Clifford group plus idle), then one CNOT on a uniform edge
    /// with uniform direction.
    G2,
    /// Example family G3: L₁ uniform one-qubit Cliffords, then one CNOT on a
    /// uniform edge with uniform direction.
    G3,
    /// Example family G4: L₁ uniform one-qubit Cliffords, then a full CNOT
    /// layer from a uniform (or, if `correlated`, cyclically alternating)
    /// edge-color class.
    G4 { correlated: bool },
}

impl SamplingDistribution {
    /// Draw one core gate. `index` is the position of this draw in its
    /// circuit's core (used only by correlated G4 sampling).
    pub fn sample<R: Rng + ?Sized>(
        &self,
        conn: &Connectivity,
        index: usize,
        rng: &mut R,
    ) -> Result<CoreGate> {
        match self {
            SamplingDistribution::EdgeGrab { xi_bar, pool } => {
                let layer = edge_grab_sample(conn, *xi_bar, *pool, rng)?;
                Ok(CoreGate {
                    layers: vec![layer],
                })
            }
            SamplingDistribution::G2 => {
                let n = conn.n();
                let l1 = Layer::new(
                    (0..n)
                        .map(|q| {
                            let name = [GateName::I, GateName::H, GateName::S][rng.gen_range(0..3)];
                            Gate::one(name, q)
                        })
                        .collect(),
                );
                Ok(CoreGate {
                    layers: vec![l1, single_cnot_layer(conn, rng)?],
                })
            }
            SamplingDistribution::G3 => {
                let l1 = uniform_c1_layer(conn.n(), rng);
                Ok(CoreGate {
                    layers: vec![l1, single_cnot_layer(conn, rng)?],
                })
            }
            SamplingDistribution::G4 { correlated } => {
                let l1 = uniform_c1_layer(conn.n(), rng);
                let classes = conn.edge_coloring();
                if classes.is_empty() {
                    return Err(Error::invalid("G4 requires at least one edge"));
                }
                let class = if *correlated {
                    &classes[index % classes.len()]
                } else {
                    &classes[rng.gen_range(0..classes.len())]
                };
                let l2 = Layer::new(class.iter().map(|&(a, b)| Gate::cnot(a, b)).collect());
                Ok(CoreGate {
                    layers: vec![l1, l2],
                })
            }
        }
    }

    /// Whether every drawn gate is Clifford (required by the protocol's
    /// stabilizer tracking).
    pub fn is_clifford(&self) -> bool {
        match self {
            SamplingDistribution::EdgeGrab { pool, .. } => pool.is_clifford(),
            _ => true,
        }
    }
}

fn uniform_c1_layer<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Layer {
    Layer::new(
        (0..n)
            .map(|q| Gate::one(GateName::C1(rng.gen_range(0..24)), q))
            .collect(),
    )
}

/// One CNOT on a uniformly chosen edge with uniform direction; all other
/// qubits idle.
fn single_cnot_layer<R: Rng + ?Sized>(conn: &Connectivity, rng: &mut R) -> Result<Layer> {
    if conn.edges().is_empty() {
        return Err(Error::invalid("gate family requires at least one edge"));
    }
    let &(a, b) = &conn.edges()[rng.gen_range(0..conn.edges().len())];
    let (c, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    Ok(Layer::new(vec![Gate::cnot(c, t)]))
}

/// The Appendix-B edge-grab sampler.
///
/// 1. Build a candidate set E_c of vertex-disjoint edges by repeatedly
///    drawing a uniform remaining edge and discarding all edges that share a
///    qubit with it.
/// 2. Validity requires the inclusion probability n·ξ̄/(2|E_c|) ≤ 1; redraw
///    the candidate set otherwise (capped).
/// 3. Include each candidate independently with that probability (uniform
///    CNOT direction); remaining qubits draw from the one-qubit pool.
pub fn edge_grab_sample<R: Rng + ?Sized>(
    conn: &Connectivity,
    xi_bar: f64,
    pool: OneQubitPool,
    rng: &mut R,
) -> Result<Layer> {
    let n = conn.n();
    if xi_bar < 0.0 {
        return Err(Error::invalid("ξ̄ must be nonnegative"));
    }
    if xi_bar > 0.0 && conn.edges().is_empty() {
        return Err(Error::Sampling("ξ̄ > 0 with no edges".into()));
    }
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut prob = 0.0;
    if xi_bar > 0.0 {
        let mut ok = false;
        for _ in 0..EDGE_GRAB_RETRY_CAP {
            chosen.clear();
            let mut remaining: Vec<(usize, usize)> = conn.edges().to_vec();
            let mut used = 0u64;
            while !remaining.is_empty() {
                let pick = remaining.swap_remove(rng.gen_range(0..remaining.len()));
                chosen.push(pick);
                used |= (1u64 << pick.0) | (1u64 << pick.1);
                remaining.retain(|&(a, b)| used & ((1 << a) | (1 << b)) == 0);
            }
            prob = n as f64 * xi_bar / (2.0 * chosen.len() as f64);
            if prob <= 1.0 {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Sampling(format!(
                "edge-grab validity n·ξ̄/(2|E_c|) ≤ 1 unsatisfiable for ξ̄ = {xi_bar} after {EDGE_GRAB_RETRY_CAP} redraws"
            )));
        }
    }
    let mut gates = Vec::new();
    let mut coupled = 0u64;
    for &(a, b) in &chosen {
        if rng.gen_bool(prob) {
            let (c, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            gates.push(Gate::cnot(c, t));
            coupled |= (1u64 << a) | (1u64 << b);
        }
    }
    for q in 0..n {
        if coupled & (1u64 << q) == 0 {
            gates.push(pool.sample(q, rng));
        }
    }
    let layer = Layer::new(gates);
    layer.validate(n)?;
    Ok(layer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn edge_grab_zero_density_is_all_single_qubit() {
        let conn = Connectivity::all_to_all(4);
        let mut r = rng::master(1);
        for _ in 0..50 {
            let layer = edge_grab_sample(&conn, 0.0, OneQubitPool::Clifford24, &mut r).unwrap();
            assert_eq!(layer.twoq_count(), 0);
            assert_eq!(layer.gates.len(), 4);
        }
    }

    #[test]
    fn edge_grab_density_matches_xi_bar() {
        // Mean two-qubit density (2 · #CNOT / n) over many samples → ξ̄.
        let mut r = rng::master(2);
        for (conn, xi) in [
            (Connectivity::all_to_all(6), 0.4),
            (Connectivity::linear(5), 0.3),
            (Connectivity::ring(6), 0.5),
        ] {
            let n = conn.n() as f64;
            let trials = 100_000;
            let mut total = 0usize;
            for _ in 0..trials {
                let layer = edge_grab_sample(&conn, xi, OneQubitPool::Clifford24, &mut r).unwrap();
                total += layer.twoq_count();
            }
            let mean_density = 2.0 * total as f64 / (n * trials as f64);
            // Bernoulli-sum σ bound: Var(density) ≤ ξ̄/trials per draw scale.
            let sigma = (xi / trials as f64).sqrt();
            assert!(
                (mean_density - xi).abs() < 4.0 * sigma + 1e-3,
                "density {mean_density} vs ξ̄ {xi}"
            );
        }
    }

    #[test]
    fn edge_grab_single_edge_full_density() {
        // n=2, one edge, ξ̄=1: inclusion probability 1, CNOT every layer.
        let conn = Connectivity::all_to_all(2);
        let mut r = rng::master(3);
        for _ in 0..100 {
            let layer = edge_grab_sample(&conn, 1.0, OneQubitPool::Clifford24, &mut r).unwrap();
            assert_eq!(layer.twoq_count(), 1);
        }
    }

    #[test]
    fn edge_grab_rejects_unachievable_density() {
        // Single edge on 4 qubits: |E_c| = 1 always, prob = 4ξ̄/2 > 1 for
        // ξ̄ > 0.5.
        let conn = Connectivity::new(4, [(0, 1)]).unwrap();
        let mut r = rng::master(4);
        assert!(edge_grab_sample(&conn, 0.9, OneQubitPool::Clifford24, &mut r).is_err());
        assert!(edge_grab_sample(&conn, 0.4, OneQubitPool::Clifford24, &mut r).is_ok());
    }

    #[test]
    fn edge_grab_layers_always_valid_and_deterministic() {
        let conn = Connectivity::ring(8);
        let mut a = rng::substream(9, 0, 0, 0);
        let mut b = rng::substream(9, 0, 0, 0);
        for _ in 0..200 {
            let la = edge_grab_sample(&conn, 0.6, OneQubitPool::X90Y90I, &mut a).unwrap();
            let lb = edge_grab_sample(&conn, 0.6, OneQubitPool::X90Y90I, &mut b).unwrap();
            assert_eq!(la, lb);
            la.validate(8).unwrap();
        }
    }

    #[test]
    fn g4_layers_have_l1_and_colored_l2() {
        let conn = Connectivity::ring(4);
        let dist = SamplingDistribution::G4 { correlated: false };
        let mut r = rng::master(5);
        for i in 0..50 {
            let g = dist.sample(&conn, i, &mut r).unwrap();
            assert_eq!(g.layers.len(), 2);
            assert_eq!(g.layers[0].gates.len(), 4);
            assert!(g.layers[0]
                .gates
                .iter()
                .all(|gate| matches!(gate.name, GateName::C1(_))));
            // Ring n=4 has two perfect-matching color classes of 2 CNOTs.
            assert_eq!(g.layers[1].twoq_count(), 2);
            g.layers[1].validate(4).unwrap();
        }
    }

    #[test]
    fn g4_correlated_alternates_classes() {
        let conn = Connectivity::ring(4);
        let dist = SamplingDistribution::G4 { correlated: true };
        let mut r = rng::master(6);
        let classes = conn.edge_coloring();
        for i in 0..10 {
            let g = dist.sample(&conn, i, &mut r).unwrap();
            let expect: Vec<(usize, usize)> = classes[i % classes.len()].clone();
            let got: Vec<(usize, usize)> = g.layers[1]
                .gates
                .iter()
                .map(|gate| (gate.qubits[0], gate.qubits[1]))
                .collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn one_qubit_marginal_uniform_over_24() {
        // Chi-squared-style bound: each of 24 gates within 4σ of uniform.
        let conn = Connectivity::all_to_all(2);
        let dist = SamplingDistribution::G3;
        let mut r = rng::master(7);
        let trials = 100_000;
        let mut counts = [0usize; 24];
        for i in 0..trials {
            let g = dist.sample(&conn, i, &mut r).unwrap();
            if let GateName::C1(k) = g.layers[0].gates[0].name {
                counts[k as usize] += 1;
            } else {
                panic!("expected C1 gate");
            }
        }
        let expect = trials as f64 / 24.0;
        let sigma = (trials as f64 * (1.0 / 24.0) * (23.0 / 24.0)).sqrt();
        for (k, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expect).abs() < 4.5 * sigma,
                "C1_{k} count {c} vs {expect}"
            );
        }
    }

    #[test]
    fn n2_single_edge_l2_is_the_only_cnot_layer() {
        let conn = Connectivity::all_to_all(2);
        let dist = SamplingDistribution::G4 { correlated: false };
        let mut r = rng::master(8);
        for i in 0..20 {
            let g = dist.sample(&conn, i, &mut r).unwrap();
            assert_eq!(g.layers[1].twoq_count(), 1);
            let q = &g.layers[1].gates[0].qubits;
            assert_eq!((q[0].min(q[1]), q[0].max(q[1])), (0, 1));
        }
    }
}
