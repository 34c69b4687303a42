//! Twirling superchannels and unitary-2-design verification.
//!
//! A gate ensemble (𝔾, Ω) induces the twirl 𝒯(ℰ) = Σ_G Ω(G) 𝒢 ℰ 𝒢⁻¹. In the
//! stacked representation (vec(𝒜ℬ𝒞) = (𝒞ᵀ ⊗ 𝒜) vec(ℬ)) this is the
//! 16ⁿ × 16ⁿ matrix Σ_G Ω(G) 𝒢⁻ᵀ ⊗ 𝒢, which for unitary-conjugation PTMs
//! (orthogonal matrices) equals Σ Ω(G) 𝒢 ⊗ 𝒢. The ensemble is a unitary
//! 2-design iff that matrix is the rank-2 orthogonal projector onto the
//! depolarizing subspace 𝕊_dep = span{𝒟₀, identity}.

use std::collections::HashSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::clifford::{Clifford, CliffordGroupTable};
use crate::error::{Error, Result};
use crate::linalg;
use crate::superop::Ptm;

/// Stratified node count for continuously parameterized Z(θ) families. The
/// twirl entries are trigonometric polynomials of degree ≤ 2 in θ, so the
/// midpoint rule over this many equal strata of [0, 2π) is exact (any node
/// count ≥ 5 would be); the margin documents the quadrature is not a limit.
pub const ZTHETA_NODES: usize = 1024;

/// Modulus tolerance used when classifying eigenvalues as unit-modulus.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-9;

/// Group-closure size cap for [`sequence_power_check`].
pub const CLOSURE_CAP: usize = 100_000;

/// One ideal gate: either a fixed Clifford or the uniform-θ Z-rotation
/// family on one qubit.
#[derive(Clone, Debug)]
pub enum GateOp {
    Clifford(Clifford),
    ZTheta { qubit: usize },
}

/// A named set of n-qubit gates.
#[derive(Clone, Debug)]
pub struct GateSet {
    n: usize,
    gates: Vec<(String, GateOp)>,
}

impl GateSet {
    pub fn new(n: usize, gates: Vec<(String, GateOp)>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::invalid("gate set must be non-empty"));
        }
        for (label, op) in &gates {
            match op {
                GateOp::Clifford(c) => {
                    if c.n() != n {
                        return Err(Error::dim(format!("gate {label} has wrong qubit count")));
                    }
                }
                GateOp::ZTheta { qubit } => {
                    if *qubit >= n {
                        return Err(Error::invalid(format!("gate {label} qubit out of range")));
                    }
                }
            }
        }
        Ok(GateSet { n, gates })
    }

    /// All Cliffords in the set; errors if any member is a continuous family.
    pub fn cliffords(&self) -> Result<Vec<&Clifford>> {
        self.gates
            .iter()
            .map(|(label, op)| match op {
                GateOp::Clifford(c) => Ok(c),
                GateOp::ZTheta { .. } => Err(Error::invalid(format!(
                    "gate {label} is a continuous family, not a Clifford"
                ))),
            })
            .collect()
    }

    /// The full 24-element single-qubit Clifford group as a gate set.
    pub fn single_qubit_cliffords() -> Self {
        let table = CliffordGroupTable::new();
        let gates = table
            .elements
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("C{i}"), GateOp::Clifford(c.clone())))
            .collect();
        GateSet { n: 1, gates }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[(String, GateOp)] {
        &self.gates
    }

    pub fn labels(&self) -> Vec<&str> {
        self.gates.iter().map(|(l, _)| l.as_str()).collect()
    }
}

fn check_weights(gs: &GateSet, omega: &[f64]) -> Result<()> {
    if omega.len() != gs.len() {
        return Err(Error::dim("weight count must match gate count"));
    }
    if omega.iter().any(|&w| w < 0.0) {
        return Err(Error::invalid("negative sampling weight"));
    }
    let total: f64 = omega.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

fn ztheta_ptm(n: usize, qubit: usize, theta: f64) -> Result<Ptm> {
    let axis = crate::pauli::Pauli::single(n, qubit, 'Z')?;
    Ptm::rotation(&axis, theta)
}

/// Ω-weighted twirl of a channel: Σ_G Ω(G) 𝒢 ℰ 𝒢⁻¹.
pub fn twirl(gs: &GateSet, omega: &[f64], e: &Ptm) -> Result<Ptm> {
    check_weights(gs, omega)?;
    if e.n() != gs.n() {
        return Err(Error::dim("channel qubit count mismatch"));
    }
    let dim = e.dim();
    let mut acc = Array2::<f64>::zeros((dim, dim));
    for ((_, op), &w) in gs.gates().iter().zip(omega) {
        if w == 0.0 {
            continue;
        }
        match op {
            GateOp::Clifford(c) => {
                let g = Ptm::from_clifford(c)?;
                // Orthogonal: inverse = transpose.
                acc = acc + &g.mat.dot(&e.mat).dot(&g.mat.t()) * w;
            }
            GateOp::ZTheta { qubit } => {
                let wnode = w / ZTHETA_NODES as f64;
                for node in 0..ZTHETA_NODES {
                    let theta =
                        2.0 * std::f64::consts::PI * (node as f64 + 0.5) / ZTHETA_NODES as f64;
                    let g = ztheta_ptm(gs.n(), *qubit, theta)?;
                    acc = acc + &g.mat.dot(&e.mat).dot(&g.mat.t()) * wnode;
                }
            }
        }
    }
    Ptm::new(gs.n(), acc)
}

/// Stacked twirl superchannel Σ_G Ω(G) 𝒢 ⊗ 𝒢 (16ⁿ × 16ⁿ).
pub fn twirl_matrix(gs: &GateSet, omega: &[f64]) -> Result<Array2<f64>> {
    check_weights(gs, omega)?;
    let dim = 1usize << (4 * gs.n());
    if gs.n() > 2 {
        return Err(Error::SizeCap("twirl superchannels supported for n ≤ 2".into()));
    }
    let mut acc = Array2::<f64>::zeros((dim, dim));
    for ((_, op), &w) in gs.gates().iter().zip(omega) {
        if w == 0.0 {
            continue;
        }
        match op {
            GateOp::Clifford(c) => {
                let g = Ptm::from_clifford(c)?;
                acc = acc + &linalg::kron(&g.mat, &g.mat) * w;
            }
            GateOp::ZTheta { qubit } => {
                let wnode = w / ZTHETA_NODES as f64;
                for node in 0..ZTHETA_NODES {
                    let theta =
                        2.0 * std::f64::consts::PI * (node as f64 + 0.5) / ZTHETA_NODES as f64;
                    let g = ztheta_ptm(gs.n(), *qubit, theta)?;
                    acc = acc + &linalg::kron(&g.mat, &g.mat) * wnode;
                }
            }
        }
    }
    Ok(acc)
}

/// The rank-2 projector onto the stacked depolarizing subspace
/// 𝕊_dep = span{𝒟₀, identity channel}.
fn depolarizing_projector(n: usize) -> Array2<f64> {
    let d = 1usize << (2 * n); // PTM dimension 4ⁿ
    let dim = d * d;
    let mut p = Array2::<f64>::zeros((dim, dim));
    // u1 = vec(𝒟₀) = e_0 (kron index (0,0)); u2 = vec(I − 𝒟₀)/√(4ⁿ−1).
    p[[0, 0]] = 1.0;
    let norm = ((d - 1) as f64).sqrt();
    for i in 1..d {
        for j in 1..d {
            p[[i * d + i, j * d + j]] += 1.0 / (norm * norm);
        }
    }
    p
}

/// Check closure under composition and test whether the uniform twirl over
/// `elements` is exactly the 𝕊_dep projector. Returns (verdict, residual).
pub fn is_unitary_2design(elements: &[Clifford]) -> Result<(bool, f64)> {
    if elements.is_empty() {
        return Err(Error::invalid("empty element list"));
    }
    let n = elements[0].n();
    let keys: HashSet<Vec<u8>> = elements.iter().map(Clifford::key).collect();
    if keys.len() != elements.len() {
        return Err(Error::invalid("duplicate group elements"));
    }
    for a in elements {
        for b in elements {
            let ab = a.compose(b)?;
            if !keys.contains(&ab.key()) {
                return Err(Error::invalid("element set is not closed under composition"));
            }
        }
    }
    let gates = elements
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("g{i}"), GateOp::Clifford(c.clone())))
        .collect();
    let gs = GateSet::new(n, gates)?;
    let omega = vec![1.0 / elements.len() as f64; elements.len()];
    let t = twirl_matrix(&gs, &omega)?;
    let residual = linalg::opnorm(&(&t - &depolarizing_projector(n)))?;
    Ok((residual < UNIT_EIGENVALUE_TOL, residual))
}

/// Spectral diagnostics of a twirl superchannel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignVerdict {
    pub verdict: bool,
    /// Eigenvalues (re, im) sorted by descending modulus, then real part.
    pub spectrum: Vec<(f64, f64)>,
    /// 1 − |γ̃₃|: the upper spectral gap below the two design eigenvalues.
    pub upper_gap: f64,
    /// Count of eigenvalues with modulus ≥ 1 − tolerance.
    pub unit_eigenvalues: usize,
}

/// Sequence-asymptotic unitary 2-design test: 𝒯_{𝔾,Ω}'s unit-modulus
/// eigenspace must be exactly the two-dimensional depolarizing subspace.
/// Requires Ω supported on all of 𝔾.
pub fn is_sequence_asymptotic_2design(gs: &GateSet, omega: &[f64]) -> Result<DesignVerdict> {
    check_weights(gs, omega)?;
    if omega.iter().any(|&w| w == 0.0) {
        return Err(Error::invalid(
            "sequence-asymptotic check requires Ω supported on every gate",
        ));
    }
    let t = twirl_matrix(gs, omega)?;
    let (vals, _) = linalg::eig(&t)?;
    let mut spectrum: Vec<(f64, f64)> = vals.iter().map(|v| (v.re, v.im)).collect();
    spectrum.sort_by(|a, b| {
        let ma = (a.0 * a.0 + a.1 * a.1).sqrt();
        let mb = (b.0 * b.0 + b.1 * b.1).sqrt();
        mb.total_cmp(&ma).then(b.0.total_cmp(&a.0))
    });
    let modulus = |v: &(f64, f64)| (v.0 * v.0 + v.1 * v.1).sqrt();
    let unit_count = spectrum
        .iter()
        .filter(|v| modulus(v) >= 1.0 - UNIT_EIGENVALUE_TOL)
        .count();
    // 𝒯 always fixes 𝒟₀ and the identity channel (TP + unital gates), so
    // exactly two unit eigenvalues ⇒ the unit eigenspace is 𝕊_dep.
    let verdict = unit_count == 2
        && spectrum[..2]
            .iter()
            .all(|v| (v.0 - 1.0).abs() < UNIT_EIGENVALUE_TOL && v.1.abs() < UNIT_EIGENVALUE_TOL);
    let upper_gap = if spectrum.len() > 2 {
        1.0 - modulus(&spectrum[2])
    } else {
        1.0
    };
    Ok(DesignVerdict {
        verdict,
        spectrum,
        upper_gap,
        unit_eigenvalues: unit_count,
    })
}

/// Group closure of a set of Cliffords, capped at [`CLOSURE_CAP`] elements.
pub fn group_closure(seed: &[Clifford]) -> Result<Vec<Clifford>> {
    if seed.is_empty() {
        return Err(Error::invalid("empty generator list"));
    }
    let mut elements: Vec<Clifford> = Vec::new();
    let mut keys: HashSet<Vec<u8>> = HashSet::new();
    let mut frontier: Vec<Clifford> = Vec::new();
    for c in seed {
        if keys.insert(c.key()) {
            elements.push(c.clone());
            frontier.push(c.clone());
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in seed {
                let prod = g.compose(f)?;
                if keys.insert(prod.key()) {
                    if elements.len() + 1 > CLOSURE_CAP {
                        return Err(Error::SizeCap(format!(
                            "group closure exceeds {CLOSURE_CAP} elements"
                        )));
                    }
                    elements.push(prod.clone());
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    Ok(elements)
}

/// All products of exactly `k` gates from the (Ω-supported) set.
fn length_k_products(gates: &[Clifford], k: usize) -> Result<Vec<Clifford>> {
    let mut current: Vec<Clifford> = vec![Clifford::identity(gates[0].n())];
    let mut keys: HashSet<Vec<u8>>;
    for _ in 0..k {
        keys = HashSet::new();
        let mut next = Vec::new();
        for c in &current {
            for g in gates {
                let prod = g.compose(c)?;
                if keys.insert(prod.key()) {
                    if next.len() + 1 > CLOSURE_CAP {
                        return Err(Error::SizeCap("length-k product set exceeds cap".into()));
                    }
                    next.push(prod);
                }
            }
        }
        current = next;
    }
    Ok(current)
}

/// Lemma-style check: is the group generated by length-k products of the
/// gate set a unitary 2-design?
pub fn sequence_power_check(gs: &GateSet, omega: &[f64], k: usize) -> Result<bool> {
    check_weights(gs, omega)?;
    if k == 0 {
        return Err(Error::invalid("k must be ≥ 1"));
    }
    let supported: Vec<Clifford> = gs
        .cliffords()?
        .iter()
        .zip(omega)
        .filter(|(_, &w)| w > 0.0)
        .map(|(c, _)| (*c).clone())
        .collect();
    if supported.is_empty() {
        return Err(Error::invalid("no gates with positive weight"));
    }
    let products = length_k_products(&supported, k)?;
    let closure = group_closure(&products)?;
    Ok(is_unitary_2design(&closure)?.0)
}
