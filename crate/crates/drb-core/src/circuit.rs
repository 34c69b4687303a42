//! Gate vocabulary, layers, and layered circuits.
//!
//! A [`Circuit`] is an ordered list of [`Layer`]s; a layer is a parallel set
//! of named gate applications on disjoint qubits. The vocabulary follows the
//! experiment configuration format: `I, X, Y, Z, H, S, X90, Y90, Z(theta),
//! CNOT(control, target), CPHASE(a, b)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named gates. `ZRot` carries the angle in radians and is the only
/// continuously parameterized (potentially non-Clifford) entry. `C1(k)` is
/// the k-th element (0 ≤ k < 24) of the single-qubit Clifford group in its
/// canonical ordering — the native alphabet of the L₁ randomizing layers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateName {
    I,
    X,
    Y,
    Z,
    H,
    S,
    X90,
    Y90,
    ZRot,
    C1(u8),
    Cnot,
    Cphase,
}

impl GateName {
    pub fn arity(&self) -> usize {
        match self {
            GateName::Cnot | GateName::Cphase => 2,
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            GateName::I => "I".into(),
            GateName::X => "X".into(),
            GateName::Y => "Y".into(),
            GateName::Z => "Z".into(),
            GateName::H => "H".into(),
            GateName::S => "S".into(),
            GateName::X90 => "X90".into(),
            GateName::Y90 => "Y90".into(),
            GateName::ZRot => "Z(theta)".into(),
            GateName::C1(k) => format!("C1_{k}"),
            GateName::Cnot => "CNOT".into(),
            GateName::Cphase => "CPHASE".into(),
        }
    }

    pub fn from_label(label: &str) -> Result<GateName> {
        if let Some(idx) = label.strip_prefix("C1_") {
            let k: u8 = idx
                .parse()
                .map_err(|_| Error::UnknownGate(label.into()))?;
            if k >= 24 {
                return Err(Error::UnknownGate(label.into()));
            }
            return Ok(GateName::C1(k));
        }
        Ok(match label {
            "I" => GateName::I,
            "X" => GateName::X,
            "Y" => GateName::Y,
            "Z" => GateName::Z,
            "H" => GateName::H,
            "S" => GateName::S,
            "X90" => GateName::X90,
            "Y90" => GateName::Y90,
            "Zrot" | "Z(theta)" | "ZROT" => GateName::ZRot,
            "CNOT" => GateName::Cnot,
            "CPHASE" | "CZ" => GateName::Cphase,
            other => return Err(Error::UnknownGate(other.into())),
        })
    }
}

/// One gate application: name, qubit operands, optional parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: GateName,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub param: Option<f64>,
}

impl Gate {
    pub fn one(name: GateName, q: usize) -> Gate {
        debug_assert_eq!(name.arity(), 1);
        Gate {
            name,
            qubits: vec![q],
            param: None,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate {
            name: GateName::Cnot,
            qubits: vec![control, target],
            param: None,
        }
    }

    pub fn cphase(a: usize, b: usize) -> Gate {
        Gate {
            name: GateName::Cphase,
            qubits: vec![a, b],
            param: None,
        }
    }

    pub fn zrot(q: usize, theta: f64) -> Gate {
        Gate {
            name: GateName::ZRot,
            qubits: vec![q],
            param: Some(theta),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.qubits.len() != self.name.arity() {
            return Err(Error::invalid(format!(
                "{} expects {} qubits, got {}",
                self.name.label(),
                self.name.arity(),
                self.qubits.len()
            )));
        }
        for &q in &self.qubits {
            if q >= n {
                return Err(Error::invalid(format!(
                    "qubit {q} out of range for n = {n}"
                )));
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::invalid("two-qubit gate with repeated operand"));
        }
        if matches!(self.name, GateName::ZRot) && self.param.is_none() {
            return Err(Error::invalid("Z(theta) requires an angle"));
        }
        if let GateName::C1(k) = self.name {
            if k >= 24 {
                return Err(Error::invalid(format!("C1 index {k} out of range")));
            }
        }
        Ok(())
    }
}

/// A parallel set of gates on disjoint qubits.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

impl Layer {
    pub fn new(gates: Vec<Gate>) -> Layer {
        Layer { gates }
    }

    pub fn empty() -> Layer {
        Layer { gates: Vec::new() }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut used = 0u64;
        for g in &self.gates {
            g.validate(n)?;
            for &q in &g.qubits {
                let bit = 1u64 << q;
                if used & bit != 0 {
                    return Err(Error::invalid(format!(
                        "layer touches qubit {q} more than once"
                    )));
                }
                used |= bit;
            }
        }
        Ok(())
    }

    pub fn twoq_count(&self) -> usize {
        self.gates.iter().filter(|g| g.name.arity() == 2).count()
    }

    pub fn oneq_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| g.name.arity() == 1 && !matches!(g.name, GateName::I))
            .count()
    }
}

/// An ordered sequence of layers on `n` qubits. Layer 0 is applied first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(n: usize) -> Circuit {
        Circuit {
            n,
            layers: Vec::new(),
        }
    }

    pub fn from_layers(n: usize, layers: Vec<Layer>) -> Circuit {
        Circuit { n, layers }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn push(&mut self, layer: Layer) {
        self.layers.push(layer);
    }

    /// Append a single gate as its own layer.
    pub fn push_gate(&mut self, gate: Gate) {
        self.layers.push(Layer::new(vec![gate]));
    }

    pub fn extend(&mut self, other: &Circuit) {
        debug_assert_eq!(self.n, other.n);
        self.layers.extend(other.layers.iter().cloned());
    }

    pub fn validate(&self) -> Result<()> {
        for layer in &self.layers {
            layer.validate(self.n)?;
        }
        Ok(())
    }

    pub fn twoq_count(&self) -> usize {
        self.layers.iter().map(Layer::twoq_count).sum()
    }

    pub fn oneq_count(&self) -> usize {
        self.layers.iter().map(Layer::oneq_count).sum()
    }
}
