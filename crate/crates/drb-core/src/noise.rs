//! Error models attached to circuit layers: stochastic Pauli channels
//! (global / local / weighted-local depolarization and per-gate rate tables)
//! and the 12-generator single-qubit Markovian models.
//!
//! A model assigns one fault per *noisy unit* — a block of one or more
//! vocabulary layers treated as a single imperfect operation (one Ω-draw in
//! an RB core, or a single layer inside compiled subcircuits). Stochastic
//! models expose both a scalable per-qubit fault sampler (any n ≤ 64) and
//! exact dense PTM factors for the small-n oracle engine.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Layer;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{Pauli, PauliDistribution};
use crate::superop::{self, Ptm};

/// Whether the compiled state-preparation and measurement subcircuits are
/// simulated with the same per-layer noise as the core (noisy) or idealized
/// (perfect).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SspamMode {
    Perfect,
    Noisy,
}

/// Inhomogeneous per-qubit rate profile ω_i = α^i / Σ_j α^j scaled by a
/// total rate ε̃.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub alpha: f64,
    pub eps_tilde: f64,
}

impl WeightProfile {
    /// Normalized weights ω_0 … ω_{n−1} (sum exactly 1).
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        if self.alpha <= 0.0 {
            return Err(Error::invalid("weight profile needs α > 0"));
        }
        let raw: Vec<f64> = (0..n).map(|i| self.alpha.powi(i as i32)).collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.iter().map(|w| w / total).collect())
    }

    /// Per-qubit error probabilities ε̃·ω_i.
    pub fn per_qubit_eps(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.weights(n)?.iter().map(|w| w * self.eps_tilde).collect())
    }
}

/// The supported error-model families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorModelKind {
    /// Uniform n-qubit depolarization: identity kept with probability
    /// λ + (1−λ)/4ⁿ, every other Pauli applied with probability (1−λ)/4ⁿ.
    GlobalDepolarizing { lambda: f64 },
    /// Independent per-qubit depolarization: qubit q suffers a uniform
    /// X/Y/Z error with probability eps[q].
    LocalDepolarizing { eps: Vec<f64> },
    /// Per-qubit depolarization with the α-profile rates ε̃·ω_i.
    WeightedLocal { profile: WeightProfile },
    /// Per-gate Pauli error distributions keyed by gate label, each over the
    /// gate's own operands; a layer's fault is the product of its gates'
    /// independent faults. The `"*"` key is a fallback for unlisted labels.
    StochasticPauli {
        rates: BTreeMap<String, PauliDistribution>,
    },
    /// Single-qubit Markovian models: per-gate-label rate vectors over the
    /// 12 elementary error generators; the post-gate error map is
    /// exp(Σ v_i 𝒱_i). Not a Pauli channel — exact-engine only.
    MarkovianGenerators {
        rates: BTreeMap<String, [f64; 12]>,
    },
}

/// An immutable error model for an n-qubit experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub n: usize,
    pub kind: ErrorModelKind,
    pub sspam_mode: SspamMode,
    /// Intrinsic readout error: independent bit-flip probability per qubit.
    pub readout_flip: f64,
}

impl ErrorModel {
    pub fn new(n: usize, kind: ErrorModelKind) -> Result<Self> {
        let model = ErrorModel {
            n,
            kind,
            sspam_mode: SspamMode::Perfect,
            readout_flip: 0.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_sspam(mut self, mode: SspamMode) -> Self {
        self.sspam_mode = mode;
        self
    }

    pub fn with_readout_flip(mut self, p: f64) -> Self {
        self.readout_flip = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.readout_flip) {
            return Err(Error::invalid("readout flip probability outside [0, 1]"));
        }
        match &self.kind {
            ErrorModelKind::GlobalDepolarizing { lambda } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::invalid("depolarizing λ outside [0, 1]"));
                }
            }
            ErrorModelKind::LocalDepolarizing { eps } => {
                if eps.len() != self.n {
                    return Err(Error::dim("need one ε per qubit"));
                }
                if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
                    return Err(Error::invalid("per-qubit ε outside [0, 1]"));
                }
            }
            ErrorModelKind::WeightedLocal { profile } => {
                let eps = profile.per_qubit_eps(self.n)?;
                if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
                    return Err(Error::invalid("profile rate outside [0, 1]"));
                }
            }
            ErrorModelKind::StochasticPauli { rates } => {
                if rates.is_empty() {
                    return Err(Error::invalid("empty stochastic-Pauli rate table"));
                }
            }
            ErrorModelKind::MarkovianGenerators { rates } => {
                if self.n != 1 {
                    return Err(Error::invalid("Markovian generator models are single-qubit"));
                }
                for (label, v) in rates {
                    let ptm = error_ptm_from_rates(v)?;
                    if !ptm.is_cp(1e-10)? {
                        return Err(Error::invalid(format!(
                            "generator rates for {label} produce a non-CP channel"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether faults are Pauli-samplable (every kind except the Markovian
    /// generator models).
    pub fn is_stochastic(&self) -> bool {
        !matches!(self.kind, ErrorModelKind::MarkovianGenerators { .. })
    }

    /// Per-qubit fault probabilities for the kinds defined by independent
    /// local depolarization.
    fn local_eps(&self) -> Option<Vec<f64>> {
        match &self.kind {
            ErrorModelKind::LocalDepolarizing { eps } => Some(eps.clone()),
            ErrorModelKind::WeightedLocal { profile } => {
                Some(profile.per_qubit_eps(self.n).expect("validated"))
            }
            _ => None,
        }
    }

    /// Sample the fault Pauli for one noisy unit. Scalable: never
    /// enumerates the 4ⁿ Pauli group.
    pub fn sample_fault<R: Rng + ?Sized>(&self, layers: &[Layer], rng: &mut R) -> Result<Pauli> {
        let n = self.n;
        match &self.kind {
            ErrorModelKind::GlobalDepolarizing { lambda } => {
                if rng.gen::<f64>() < *lambda {
                    Ok(Pauli::identity(n))
                } else {
                    // Uniform over all 4ⁿ Paulis (identity included).
                    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                    let x = rng.gen::<u64>() & mask;
                    let z = rng.gen::<u64>() & mask;
                    Pauli::from_parts(n, x, z, ((x & z).count_ones() % 4) as u8)
                }
            }
            ErrorModelKind::LocalDepolarizing { .. } | ErrorModelKind::WeightedLocal { .. } => {
                let eps = self.local_eps().expect("local kind");
                let mut x = 0u64;
                let mut z = 0u64;
                for (q, &e) in eps.iter().enumerate() {
                    if rng.gen::<f64>() < e {
                        match rng.gen_range(0..3) {
                            0 => x |= 1 << q,
                            1 => {
                                x |= 1 << q;
                                z |= 1 << q;
                            }
                            _ => z |= 1 << q,
                        }
                    }
                }
                Pauli::from_parts(n, x, z, ((x & z).count_ones() % 4) as u8)
            }
            ErrorModelKind::StochasticPauli { rates } => {
                let mut fault = Pauli::identity(n);
                for layer in layers {
                    for gate in &layer.gates {
                        let dist = lookup(rates, &gate.name.label())?;
                        let small = dist.sample(rng);
                        fault = fault.multiply(&lift(n, &small, &gate.qubits)?)?;
                    }
                }
                Ok(fault)
            }
            ErrorModelKind::MarkovianGenerators { .. } => Err(Error::invalid(
                "Markovian generator models have no Pauli unraveling",
            )),
        }
    }

    /// Exact probability that one noisy unit suffers any fault at all.
    pub fn error_probability(&self, layers: &[Layer]) -> Result<f64> {
        match &self.kind {
            ErrorModelKind::GlobalDepolarizing { lambda } => {
                let dim = 4f64.powi(self.n as i32);
                Ok((1.0 - lambda) * (1.0 - 1.0 / dim))
            }
            ErrorModelKind::LocalDepolarizing { .. } | ErrorModelKind::WeightedLocal { .. } => {
                let eps = self.local_eps().expect("local kind");
                Ok(1.0 - eps.iter().map(|e| 1.0 - e).product::<f64>())
            }
            ErrorModelKind::StochasticPauli { rates } => {
                let mut no_fault = 1.0;
                for layer in layers {
                    for gate in &layer.gates {
                        let dist = lookup(rates, &gate.name.label())?;
                        no_fault *= 1.0 - dist.error_probability();
                    }
                }
                Ok(1.0 - no_fault)
            }
            ErrorModelKind::MarkovianGenerators { .. } => Err(Error::invalid(
                "Markovian generator models have no Pauli error probability",
            )),
        }
    }

    /// Exact fault distribution of one noisy unit (enumerable n only).
    pub fn fault_distribution(&self, layers: &[Layer]) -> Result<PauliDistribution> {
        let n = self.n;
        match &self.kind {
            ErrorModelKind::GlobalDepolarizing { lambda } => {
                PauliDistribution::global_depolarizing(n, *lambda)
            }
            ErrorModelKind::LocalDepolarizing { .. } | ErrorModelKind::WeightedLocal { .. } => {
                let eps = self.local_eps().expect("local kind");
                PauliDistribution::local_depolarizing_all(n, &eps)
            }
            ErrorModelKind::StochasticPauli { rates } => {
                let mut dist = PauliDistribution::identity(n);
                for layer in layers {
                    for gate in &layer.gates {
                        let small = lookup(rates, &gate.name.label())?;
                        let lifted = PauliDistribution::new(
                            n,
                            small
                                .support()
                                .iter()
                                .map(|(p, w)| Ok((lift(n, p, &gate.qubits)?, *w)))
                                .collect::<Result<Vec<_>>>()?,
                        )?;
                        dist = dist.product(&lifted)?;
                    }
                }
                Ok(dist)
            }
            ErrorModelKind::MarkovianGenerators { .. } => Err(Error::invalid(
                "Markovian generator models are not Pauli channels",
            )),
        }
    }

    /// Dense PTM of one noisy unit's error map (after the unit's ideal
    /// action). For Markovian models the unit must be a single one-qubit
    /// gate.
    pub fn error_ptm(&self, layers: &[Layer]) -> Result<Ptm> {
        match &self.kind {
            ErrorModelKind::MarkovianGenerators { rates } => {
                let mut gates = layers.iter().flat_map(|l| l.gates.iter());
                let gate = gates
                    .next()
                    .ok_or_else(|| Error::invalid("empty noisy unit"))?;
                if gates.next().is_some() {
                    return Err(Error::invalid(
                        "Markovian models attach errors to single gates",
                    ));
                }
                let v = lookup(rates, &gate.name.label())?;
                error_ptm_from_rates(v)
            }
            _ => Ptm::from_pauli_channel(&self.fault_distribution(layers)?),
        }
    }

    /// The error PTM for a single named gate (Markovian / per-gate tables).
    pub fn gate_error_ptm(&self, label: &str) -> Result<Ptm> {
        match &self.kind {
            ErrorModelKind::MarkovianGenerators { rates } => {
                error_ptm_from_rates(lookup(rates, label)?)
            }
            ErrorModelKind::StochasticPauli { rates } => {
                Ptm::from_pauli_channel(lookup(rates, label)?)
            }
            _ => {
                // Gate-independent: the unit-level distribution.
                Ptm::from_pauli_channel(&self.fault_distribution(&[])?)
            }
        }
    }
}

fn lookup<'a, T>(table: &'a BTreeMap<String, T>, label: &str) -> Result<&'a T> {
    table
        .get(label)
        .or_else(|| {
            // C1_k labels share one table entry when given as "C1".
            label.strip_prefix("C1_").and_then(|_| table.get("C1"))
        })
        .or_else(|| table.get("*"))
        .ok_or_else(|| Error::invalid(format!("no error rates for gate {label}")))
}

/// Embed a k-qubit Pauli onto the given qubit positions of an n-qubit
/// register (canonical Hermitian phase).
fn lift(n: usize, small: &Pauli, qubits: &[usize]) -> Result<Pauli> {
    if small.n() != qubits.len() {
        return Err(Error::dim("Pauli arity does not match gate operands"));
    }
    let mut x = 0u64;
    let mut z = 0u64;
    for (j, &q) in qubits.iter().enumerate() {
        if (small.x_bits() >> j) & 1 == 1 {
            x |= 1 << q;
        }
        if (small.z_bits() >> j) & 1 == 1 {
            z |= 1 << q;
        }
    }
    Pauli::from_parts(n, x, z, ((x & z).count_ones() % 4) as u8)
}

/// Labels of the 12 elementary single-qubit error generators, in rate-vector
/// order.
pub const GENERATOR_LABELS: [&str; 12] = [
    "H_X", "H_Y", "H_Z", "S_X", "S_Y", "S_Z", "C_XY", "C_XZ", "C_YZ", "A_XY", "A_XZ", "A_YZ",
];

/// PTMs (4×4, trace-annihilating) of the 12 elementary generators:
/// Hamiltonian H_P[ρ] = −i[P, ρ]; stochastic S_P[ρ] = PρP − ρ; correlation
/// C_{P,Q}[ρ] = PρQ + QρP − ½{{P,Q}, ρ}; anti-symmetric
/// A_{P,Q}[ρ] = i(QρP − PρQ) + (i/2){[Q,P], ρ}.
pub fn generator_ptms() -> Vec<Array2<f64>> {
    let paulis: Vec<Pauli> = ["X", "Y", "Z"]
        .iter()
        .map(|s| Pauli::parse(s).expect("valid"))
        .collect();
    let mats: Vec<Array2<Complex64>> = paulis.iter().map(superop::pauli_matrix).collect();
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];

    let mut out = Vec::with_capacity(12);
    // Hamiltonian generators.
    for p in &mats {
        out.push(superop_to_ptm(|rho| {
            let c = p.dot(rho) - rho.dot(p);
            c.mapv(|v| v * Complex64::new(0.0, -1.0))
        }));
    }
    // Stochastic generators.
    for p in &mats {
        out.push(superop_to_ptm(|rho| p.dot(rho).dot(p) - rho.clone()));
    }
    // Correlation generators.
    for &(a, b) in &pairs {
        let (p, q) = (&mats[a], &mats[b]);
        let anti = p.dot(q) + q.dot(p);
        out.push(superop_to_ptm(|rho| {
            p.dot(rho).dot(q) + q.dot(rho).dot(p)
                - (anti.dot(rho) + rho.dot(&anti)).mapv(|v| v * 0.5)
        }));
    }
    // Anti-symmetric generators.
    for &(a, b) in &pairs {
        let (p, q) = (&mats[a], &mats[b]);
        let comm = q.dot(p) - p.dot(q);
        out.push(superop_to_ptm(|rho| {
            (q.dot(rho).dot(p) - p.dot(rho).dot(q)).mapv(|v| v * Complex64::new(0.0, 1.0))
                + (comm.dot(rho) + rho.dot(&comm)).mapv(|v| v * Complex64::new(0.0, 0.5))
        }));
    }
    out
}

/// Convert a single-qubit superoperator (action on density matrices) to its
/// PTM via L_{ij} = ½ Tr(P_i L[P_j]).
fn superop_to_ptm(l: impl Fn(&Array2<Complex64>) -> Array2<Complex64>) -> Array2<f64> {
    let basis: Vec<Array2<Complex64>> = (0..4)
        .map(|j| superop::pauli_matrix(&superop::index_to_pauli(1, j)))
        .collect();
    let mut m = Array2::zeros((4, 4));
    for (j, pj) in basis.iter().enumerate() {
        let img = l(pj);
        for (i, pi) in basis.iter().enumerate() {
            let tr: Complex64 = pi.dot(&img).diag().sum();
            debug_assert!(tr.im.abs() < 1e-12, "generator PTM entries must be real");
            m[[i, j]] = tr.re / 2.0;
        }
    }
    m
}

/// exp(Σ v_i 𝒱_i) as a PTM; checks trace preservation.
pub fn error_ptm_from_rates(rates: &[f64; 12]) -> Result<Ptm> {
    let gens = generator_ptms();
    let mut total: Array2<f64> = Array2::zeros((4, 4));
    for (v, g) in rates.iter().zip(&gens) {
        total = total + g.mapv(|x| x * v);
    }
    let mat = linalg::expm(&total)?;
    let ptm = Ptm::new(1, mat)?;
    if !ptm.is_tp(1e-10) {
        return Err(Error::Numerical("generator exponential lost TP".into()));
    }
    Ok(ptm)
}

/// Draw one 12-rate vector: Hamiltonian rates uniform on [0, √ε], all
/// others uniform on [0, ε].
pub fn sample_markovian_rates<R: Rng + ?Sized>(epsilon: f64, rng: &mut R) -> [f64; 12] {
    let mut v = [0.0; 12];
    for (i, vi) in v.iter_mut().enumerate() {
        let cap = if i < 3 { epsilon.sqrt() } else { epsilon };
        *vi = rng.gen::<f64>() * cap;
    }
    v
}

/// Sample a single-qubit Markovian model with independent per-gate rate
/// vectors; non-CP draws are rejected and redrawn.
pub fn sample_markovian_model<R: Rng + ?Sized>(
    labels: &[&str],
    epsilon: f64,
    rng: &mut R,
) -> Result<ErrorModel> {
    if epsilon <= 0.0 {
        return Err(Error::invalid("ε must be positive"));
    }
    let mut rates = BTreeMap::new();
    for &label in labels {
        let mut accepted = None;
        for _ in 0..1000 {
            let v = sample_markovian_rates(epsilon, rng);
            if error_ptm_from_rates(&v)?.is_cp(1e-10)? {
                accepted = Some(v);
                break;
            }
        }
        let v = accepted
            .ok_or_else(|| Error::Sampling("no CP generator draw in 1000 attempts".into()))?;
        rates.insert(label.to_string(), v);
    }
    ErrorModel::new(1, ErrorModelKind::MarkovianGenerators { rates })
}

/// Ω-weighted mean entanglement infidelity over a finite gate set, looked up
/// by gate label. For stochastic Pauli models this equals the Ω-weighted
/// total error probability.
pub fn epsilon_omega(model: &ErrorModel, labels: &[&str], omega: &[f64]) -> Result<f64> {
    if labels.len() != omega.len() {
        return Err(Error::dim("one weight per gate"));
    }
    let identity = Ptm::identity(model.n)?;
    let mut total = 0.0;
    for (&label, &w) in labels.iter().zip(omega) {
        let e = model.gate_error_ptm(label)?;
        total += w * superop::entanglement_infidelity(&e, &identity)?;
    }
    Ok(total)
}

/// The Pauli twirl of a channel: its PTM with all off-diagonal entries
/// removed.
pub fn pauli_twirl(e: &Ptm) -> Result<Ptm> {
    let dim = e.dim();
    let mut m = Array2::zeros((dim, dim));
    for i in 0..dim {
        m[[i, i]] = e.mat[[i, i]];
    }
    Ptm::new(e.n(), m)
}
