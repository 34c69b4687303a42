//! Circuit execution under error models: stochastic-unraveling Monte Carlo
//! for Pauli models (fault Paulis propagated through the Clifford circuit)
//! and exact dense PTM evolution for small n as an oracle.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::Layer;
use crate::clifford::Clifford;
use crate::error::{Error, Result};
use crate::noise::{ErrorModel, SspamMode};
use crate::pauli::Pauli;
use crate::protocol::{RbCircuit, RbKind};
use crate::rng;
use crate::superop::{self, Ptm};

/// Per-shot fault bookkeeping for the S1/S2/S3 decomposition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultTally {
    /// Shots with no fault at all (class S1; always successful).
    pub no_fault: u64,
    /// Shots with faults whose net Pauli is the identity up to phase
    /// (class S2; always successful).
    pub net_identity: u64,
    /// Shots with a nontrivial net fault Pauli.
    pub net_other: u64,
    /// Successful shots within `net_other` (class S3 successes).
    pub other_success: u64,
}

/// One circuit's execution record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitOutcome {
    pub id: usize,
    pub d: usize,
    pub target: u64,
    /// Shots taken (0 for the exact engine).
    pub shots: u64,
    /// Successful shots (Monte Carlo) — equals `shots · success_probability`
    /// only in expectation.
    pub successes: u64,
    /// Estimated (Monte Carlo) or exact success probability.
    pub success_probability: f64,
    pub fault_tally: Option<FaultTally>,
}

/// Execution result for a circuit suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub circuits: Vec<CircuitOutcome>,
}

impl RunResult {
    /// Per-depth mean success probability Ŝ_d (mean over circuits).
    pub fn depth_means(&self) -> BTreeMap<usize, f64> {
        let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for c in &self.circuits {
            let e = sums.entry(c.d).or_insert((0.0, 0));
            e.0 += c.success_probability;
            e.1 += 1;
        }
        sums.into_iter()
            .map(|(d, (s, k))| (d, s / k as f64))
            .collect()
    }
}

/// One noisy unit: a block of layers suffering a single fault, with the
/// block's net Clifford precomputed for propagation.
struct Unit {
    layers: Vec<Layer>,
    clifford: Clifford,
    noisy: bool,
}

fn block_clifford(n: usize, layers: &[Layer]) -> Result<Clifford> {
    let mut net = Clifford::identity(n);
    for layer in layers {
        net = Clifford::from_layer(n, layer)?.compose(&net)?;
    }
    Ok(net)
}

/// Split a circuit into noisy units according to its kind and the model's
/// SSPAM mode: direct-RB core gates are one unit per Ω-draw; compiled
/// subcircuits (C_sp/C_mp, and every Clifford-RB composite) are one unit per
/// layer.
fn units_for(circuit: &RbCircuit, model: &ErrorModel) -> Result<Vec<Unit>> {
    let n = circuit.c_sp.n;
    let sspam_noisy = model.sspam_mode == SspamMode::Noisy;
    let mut units = Vec::new();
    let push_layers = |units: &mut Vec<Unit>, layers: &[Layer], noisy: bool| -> Result<()> {
        for layer in layers {
            units.push(Unit {
                layers: vec![layer.clone()],
                clifford: block_clifford(n, std::slice::from_ref(layer))?,
                noisy,
            });
        }
        Ok(())
    };
    match circuit.kind {
        RbKind::Direct => {
            push_layers(&mut units, &circuit.c_sp.layers, sspam_noisy)?;
            for g in &circuit.core {
                units.push(Unit {
                    layers: g.layers.clone(),
                    clifford: block_clifford(n, &g.layers)?,
                    noisy: true,
                });
            }
            push_layers(&mut units, &circuit.c_mp.layers, sspam_noisy)?;
        }
        RbKind::CliffordGroup => {
            for g in &circuit.core {
                push_layers(&mut units, &g.layers, true)?;
            }
            push_layers(&mut units, &circuit.c_mp.layers, true)?;
        }
    }
    Ok(units)
}

/// Monte Carlo execution of a suite under a stochastic Pauli model
/// (Eq.-unraveling style: one fault Pauli per noisy unit, propagated through
/// the Clifford circuit).
pub fn run_unraveled(
    circuits: &[RbCircuit],
    model: &ErrorModel,
    shots: u64,
    seed: u64,
    track_faults: bool,
) -> Result<RunResult> {
    if !model.is_stochastic() {
        return Err(Error::invalid(
            "run_unraveled requires a stochastic Pauli model",
        ));
    }
    if shots == 0 {
        return Err(Error::invalid("need at least one shot"));
    }
    let mut out = Vec::with_capacity(circuits.len());
    for circuit in circuits {
        let n = circuit.c_sp.n;
        if n != model.n {
            return Err(Error::dim("model qubit count mismatch"));
        }
        let units = units_for(circuit, model)?;
        let mut successes = 0u64;
        let mut tally = FaultTally::default();
        for shot in 0..shots {
            let mut rng = rng::substream(seed, circuit.id as u64, shot, 2);
            // Net fault Pauli acting after the executed prefix.
            let mut fault = Pauli::identity(n);
            let mut had_fault = false;
            for unit in &units {
                if !fault.is_identity_up_to_phase() {
                    fault = unit.clifford.conjugate(&fault)?;
                }
                if unit.noisy {
                    let f = model.sample_fault(&unit.layers, &mut rng)?;
                    if !f.is_identity_up_to_phase() {
                        had_fault = true;
                        fault = f.multiply(&fault)?;
                    }
                }
            }
            // The ideal final state is the basis state |target⟩; the faulted
            // outcome is target ⊕ x(fault), then intrinsic readout flips.
            let mut flips = 0u64;
            if model.readout_flip > 0.0 {
                for q in 0..n {
                    if rng.gen::<f64>() < model.readout_flip {
                        flips |= 1 << q;
                    }
                }
            }
            let success = fault.x_bits() ^ flips == 0;
            if success {
                successes += 1;
            }
            if track_faults {
                if !had_fault {
                    tally.no_fault += 1;
                } else if fault.is_identity_up_to_phase() {
                    tally.net_identity += 1;
                } else {
                    tally.net_other += 1;
                    if success {
                        tally.other_success += 1;
                    }
                }
            }
        }
        out.push(CircuitOutcome {
            id: circuit.id,
            d: circuit.d,
            target: circuit.target,
            shots,
            successes,
            success_probability: successes as f64 / shots as f64,
            fault_tally: track_faults.then_some(tally),
        });
    }
    Ok(RunResult {
        seed,
        circuits: out,
    })
}

/// Exact success probabilities via dense PTM evolution (n ≤ 3).
pub fn run_exact(circuits: &[RbCircuit], model: &ErrorModel) -> Result<RunResult> {
    let mut out = Vec::with_capacity(circuits.len());
    for circuit in circuits {
        let n = circuit.c_sp.n;
        if n != model.n {
            return Err(Error::dim("model qubit count mismatch"));
        }
        if n > 3 {
            return Err(Error::SizeCap("exact engine is limited to n ≤ 3".into()));
        }
        let units = units_for(circuit, model)?;
        let mut rho = superop::zero_state_vec(n)?;
        for unit in &units {
            for layer in &unit.layers {
                rho = Ptm::from_layer(n, layer)?.apply(&rho)?;
            }
            if unit.noisy {
                rho = model.error_ptm(&unit.layers)?.apply(&rho)?;
            }
        }
        if model.readout_flip > 0.0 {
            for q in 0..n {
                let flip =
                    crate::pauli::PauliDistribution::bit_flip(n, q, model.readout_flip)?;
                rho = Ptm::from_pauli_channel(&flip)?.apply(&rho)?;
            }
        }
        let p = superop::basis_effect_vec(n, circuit.target)?.dot(&rho);
        if !(-1e-9..=1.0 + 1e-9).contains(&p) {
            return Err(Error::Numerical(format!(
                "success probability {p} outside [0, 1]"
            )));
        }
        out.push(CircuitOutcome {
            id: circuit.id,
            d: circuit.d,
            target: circuit.target,
            shots: 0,
            successes: 0,
            success_probability: p.clamp(0.0, 1.0),
            fault_tally: None,
        });
    }
    Ok(RunResult {
        seed: 0,
        circuits: out,
    })
}

/// Per-depth S1/S2/S3 estimates from a fault-tracked run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// ŝ1 + (1−ŝ1)ŝ2 + (1−ŝ1)(1−ŝ2)ŝ3 — equals the observed success rate
    /// exactly.
    pub reconstructed: f64,
    pub observed: f64,
    pub shots: u64,
}

/// Aggregate the fault tallies of a tracked run into per-depth
/// (ŝ1, ŝ2, ŝ3) estimates (Eqs. defS1–defS3 structure).
pub fn decompose_success(result: &RunResult) -> Result<BTreeMap<usize, Decomposition>> {
    let mut agg: BTreeMap<usize, (FaultTally, u64, u64)> = BTreeMap::new();
    for c in &result.circuits {
        let tally = c
            .fault_tally
            .ok_or_else(|| Error::invalid("run was executed without fault bookkeeping"))?;
        let e = agg.entry(c.d).or_insert((FaultTally::default(), 0, 0));
        e.0.no_fault += tally.no_fault;
        e.0.net_identity += tally.net_identity;
        e.0.net_other += tally.net_other;
        e.0.other_success += tally.other_success;
        e.1 += c.shots;
        e.2 += c.successes;
    }
    let mut out = BTreeMap::new();
    for (d, (t, shots, successes)) in agg {
        let faulted = t.net_identity + t.net_other;
        let s1 = t.no_fault as f64 / shots as f64;
        let s2 = if faulted == 0 {
            0.0
        } else {
            t.net_identity as f64 / faulted as f64
        };
        let s3 = if t.net_other == 0 {
            0.0
        } else {
            t.other_success as f64 / t.net_other as f64
        };
        let reconstructed = s1 + (1.0 - s1) * s2 + (1.0 - s1) * (1.0 - s2) * s3;
        out.insert(
            d,
            Decomposition {
                s1,
                s2,
                s3,
                reconstructed,
                observed: successes as f64 / shots as f64,
                shots,
            },
        );
    }
    Ok(out)
}
