//! RB circuit generation: direct RB (stabilizer-compiled preparation, Ω-core,
//! measurement preparation) and Clifford-group RB for comparison.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::clifford::Clifford;
use crate::connectivity::Connectivity;
use crate::error::{Error, Result};
use crate::rng;
use crate::sampling::{CoreGate, SamplingDistribution};
use crate::stabilizer::{compile_measurement_prep, compile_state_prep, compile_unitary, StabilizerState};

/// The experiment specification shared by generation, execution, and
/// analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    pub n: usize,
    pub depths: Vec<usize>,
    /// Circuits per depth.
    pub k_d: usize,
    /// Shots per circuit.
    pub n_shots: usize,
    pub omega: SamplingDistribution,
    pub randomize_target: bool,
    pub rng_seed: u64,
}

impl ExperimentDesign {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 64 {
            return Err(Error::invalid("qubit count must be 1..=64"));
        }
        if self.depths.is_empty() {
            return Err(Error::invalid("need at least one benchmark depth"));
        }
        if self.k_d == 0 || self.n_shots == 0 {
            return Err(Error::invalid("K_d and N must be at least 1"));
        }
        Ok(())
    }
}

/// Which generator produced a circuit (they differ in how the engine
/// attaches noise to the core).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbKind {
    /// Core gates are single Ω-draws: one fault each.
    Direct,
    /// Core gates are compiled composite Cliffords: one fault per layer.
    CliffordGroup,
}

/// One benchmarking circuit: C_mp · G_d ⋯ G_1 · C_sp with its success target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbCircuit {
    pub id: usize,
    pub d: usize,
    pub kind: RbKind,
    pub c_sp: Circuit,
    pub core: Vec<CoreGate>,
    pub c_mp: Circuit,
    /// Success bit string s_{d,k} (qubit q ↦ bit q).
    pub target: u64,
    pub sp_twoq: usize,
    pub mp_twoq: usize,
}

impl RbCircuit {
    /// The emitted circuit: layers(C_sp) ++ core layers ++ layers(C_mp).
    pub fn full_circuit(&self) -> Circuit {
        let n = self.c_sp.n;
        let mut c = Circuit::new(n);
        c.extend(&self.c_sp);
        for g in &self.core {
            for layer in &g.layers {
                c.push(layer.clone());
            }
        }
        c.extend(&self.c_mp);
        c
    }

    /// Mandatory invariant: under perfect gates the circuit outputs the
    /// target with certainty.
    pub fn verify(&self) -> Result<()> {
        let mut state = StabilizerState::zero(self.c_sp.n);
        state.apply_circuit(&self.full_circuit())?;
        if state.outcome_probability(self.target) != 1.0 {
            return Err(Error::Compilation(format!(
                "circuit {} does not output its target deterministically",
                self.id
            )));
        }
        Ok(())
    }
}

fn target_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// §3.1 step 1: sample all direct-RB circuits for a design, in (d, k) order.
pub fn generate_direct_rb(
    design: &ExperimentDesign,
    conn: &Connectivity,
) -> Result<Vec<RbCircuit>> {
    design.validate()?;
    if conn.n() != design.n {
        return Err(Error::dim("connectivity qubit count mismatch"));
    }
    if !design.omega.is_clifford() {
        return Err(Error::NonClifford(
            "direct RB generation requires a Clifford sampling distribution".into(),
        ));
    }
    let n = design.n;
    let mut out = Vec::with_capacity(design.depths.len() * design.k_d);
    for (di, &d) in design.depths.iter().enumerate() {
        for k in 0..design.k_d {
            let mut rng = rng::substream(design.rng_seed, di as u64, k as u64, 0);
            // Step 1.1: choose the success target.
            let target = if design.randomize_target {
                rand::Rng::gen::<u64>(&mut rng) & target_mask(n)
            } else {
                0
            };
            // Step 1.2: uniform stabilizer state, conditionally compiled.
            let f_sp = Clifford::uniform_random(n, &mut rng);
            let mut state = StabilizerState::zero(n);
            state.apply_clifford(&f_sp)?;
            let sp = compile_state_prep(&state, conn)?;
            // Step 1.3: d independent Ω-draws.
            let mut core = Vec::with_capacity(d);
            for i in 0..d {
                let g = design.omega.sample(conn, i, &mut rng)?;
                for layer in &g.layers {
                    state.apply_layer(layer)?;
                }
                core.push(g);
            }
            // Step 1.4: measurement preparation onto the target string.
            let mp = compile_measurement_prep(&state, target, conn)?;
            let circuit = RbCircuit {
                id: out.len(),
                d,
                kind: RbKind::Direct,
                c_sp: sp.circuit,
                core,
                c_mp: mp.circuit,
                target,
                sp_twoq: sp.twoq_count,
                mp_twoq: mp.twoq_count,
            };
            circuit.verify()?;
            out.push(circuit);
        }
    }
    Ok(out)
}

/// Clifford-group RB: d+1 uniform Cliffords plus the compiled inversion
/// element, every composite compiled unconditionally.
pub fn generate_clifford_rb(
    design: &ExperimentDesign,
    conn: &Connectivity,
) -> Result<Vec<RbCircuit>> {
    design.validate()?;
    if conn.n() != design.n {
        return Err(Error::dim("connectivity qubit count mismatch"));
    }
    let n = design.n;
    let mut out = Vec::with_capacity(design.depths.len() * design.k_d);
    for (di, &d) in design.depths.iter().enumerate() {
        for k in 0..design.k_d {
            let mut rng = rng::substream(design.rng_seed, di as u64, k as u64, 1);
            let mut net = Clifford::identity(n);
            let mut core = Vec::with_capacity(d + 1);
            for _ in 0..=d {
                let c = Clifford::uniform_random(n, &mut rng);
                net = c.compose(&net)?;
                let compiled = compile_unitary(&c, conn)?;
                core.push(CoreGate {
                    layers: compiled.circuit.layers,
                });
            }
            let inversion = compile_unitary(&net.inverse(), conn)?;
            let circuit = RbCircuit {
                id: out.len(),
                d,
                kind: RbKind::CliffordGroup,
                c_sp: Circuit::new(n),
                core,
                c_mp: inversion.circuit,
                target: 0,
                sp_twoq: 0,
                mp_twoq: inversion.twoq_count,
            };
            circuit.verify()?;
            out.push(circuit);
        }
    }
    Ok(out)
}
