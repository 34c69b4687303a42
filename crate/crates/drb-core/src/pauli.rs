//! n-qubit Pauli group algebra in the symplectic representation.
//!
//! A Pauli operator is stored as x/z bit masks plus a phase exponent:
//! `P = i^phase · Π_j X_j^{x_j} Z_j^{z_j}` (factors over distinct qubits
//! commute, so the per-qubit ordering X-then-Z is the only convention
//! needed). Qubit 0 is the least significant bit of each mask.
//!
//! With this convention the Hermitian Pauli `+Y_j` has `x_j = z_j = 1` and
//! `phase = 1` (because `Y = i·XZ`), and a Pauli is Hermitian iff
//! `phase ≡ popcount(x & z) (mod 2)`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum supported qubit count (bit masks are single 64-bit words).
pub const MAX_QUBITS: usize = 64;

/// An n-qubit Pauli operator with exact phase bookkeeping.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pauli {
    n: u32,
    x: u64,
    z: u64,
    /// Power of i, mod 4.
    phase: u8,
}

impl Pauli {
    /// The identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_QUBITS, "qubit count out of range");
        Pauli {
            n: n as u32,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    /// Build from raw symplectic data. Bits above `n` must be clear.
    pub fn from_parts(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(format!("qubit count {n} out of range 1..=64")));
        }
        let mask = mask(n);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::invalid("x/z bits set beyond qubit count"));
        }
        Ok(Pauli {
            n: n as u32,
            x,
            z,
            phase: phase % 4,
        })
    }

    /// Single-qubit Hermitian Pauli embedded on qubit `q` of an `n`-qubit
    /// register. `kind` is one of 'I', 'X', 'Y', 'Z'.
    pub fn single(n: usize, q: usize, kind: char) -> Result<Self> {
        if q >= n {
            return Err(Error::invalid(format!("qubit {q} out of range for n={n}")));
        }
        let bit = 1u64 << q;
        let (x, z, phase) = match kind {
            'I' => (0, 0, 0),
            'X' => (bit, 0, 0),
            'Y' => (bit, bit, 1),
            'Z' => (0, bit, 0),
            other => return Err(Error::Parse(format!("unknown Pauli letter {other:?}"))),
        };
        Pauli::from_parts(n, x, z, phase)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }
    pub fn x_bits(&self) -> u64 {
        self.x
    }
    pub fn z_bits(&self) -> u64 {
        self.z
    }
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// True if x and z masks are both zero (any phase).
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True if this is exactly the identity operator (+1 phase).
    pub fn is_identity(&self) -> bool {
        self.is_identity_up_to_phase() && self.phase == 0
    }

    /// Number of qubits on which the operator acts non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Hermitian iff the phase exponent matches the Y-factor count parity.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + (self.x & self.z).count_ones()) % 2 == 0
    }

    /// Sign (+1/−1) of a Hermitian Pauli relative to its canonical positive
    /// form (the one with phase exponent `popcount(x & z) mod 4`).
    pub fn sign(&self) -> Result<i8> {
        if !self.is_hermitian() {
            return Err(Error::invalid("sign() requires a Hermitian Pauli"));
        }
        let canonical = ((self.x & self.z).count_ones() % 4) as u8;
        Ok(if (self.phase + 4 - canonical) % 4 == 0 { 1 } else { -1 })
    }

    /// The same operator with its phase forced to the canonical positive
    /// Hermitian value (phase information dropped).
    pub fn phase_stripped(&self) -> Self {
        let mut p = *self;
        p.phase = ((p.x & p.z).count_ones() % 4) as u8;
        p
    }

    /// Group product `self · other` with exact phase.
    pub fn multiply(&self, other: &Pauli) -> Result<Pauli> {
        if self.n != other.n {
            return Err(Error::dim(format!(
                "Pauli product on {} vs {} qubits",
                self.n, other.n
            )));
        }
        // Moving other's X factors left past self's Z factors picks up
        // (−1)^{|self.z ∧ other.x|} = i^{2·…}.
        let swaps = (self.z & other.x).count_ones();
        Ok(Pauli {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: ((self.phase as u32 + other.phase as u32 + 2 * swaps) % 4) as u8,
        })
    }

    /// Symplectic-form parity with `other`: 0 if the operators commute, 1 if
    /// they anticommute.
    pub fn symplectic_form(&self, other: &Pauli) -> u8 {
        (((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2) as u8
    }

    /// Hermitian single-letter view of qubit `q`: 'I', 'X', 'Y' or 'Z'.
    pub fn letter(&self, q: usize) -> char {
        let x = (self.x >> q) & 1;
        let z = (self.z >> q) & 1;
        match (x, z) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            (0, 1) => 'Z',
            _ => unreachable!(),
        }
    }

    /// Parse the text form: optional phase tag ("+", "-", "+i", "-i")
    /// followed by one letter per qubit, qubit 0 leftmost.
    pub fn parse(s: &str) -> Result<Pauli> {
        let (tag, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0u8, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2u8, r)
        } else {
            (0u8, s)
        };
        if rest.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        if rest.len() > MAX_QUBITS {
            return Err(Error::Parse(format!("Pauli string longer than {MAX_QUBITS}")));
        }
        let n = rest.len();
        let mut p = Pauli::identity(n);
        for (q, ch) in rest.chars().enumerate() {
            let factor = Pauli::single(n, q, ch)?;
            p = p.multiply(&factor)?;
        }
        p.phase = (p.phase + tag) % 4;
        Ok(p)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Phase tag relative to the product of per-qubit Hermitian letters.
        let canonical = ((self.x & self.z).count_ones() % 4) as u8;
        let rel = (self.phase + 4 - canonical) % 4;
        let tag = match rel {
            0 => "+",
            1 => "+i",
            2 => "-",
            3 => "-i",
            _ => unreachable!(),
        };
        write!(f, "{tag}")?;
        for q in 0..self.n() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

/// A probability distribution over phase-stripped Paulis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliDistribution {
    n: usize,
    /// Sorted support for deterministic iteration/sampling.
    support: Vec<(Pauli, f64)>,
    /// Cumulative sums aligned with `support`.
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl PauliDistribution {
    /// Build from (Pauli, probability) pairs; phases are stripped, duplicate
    /// keys merged. Probabilities must be nonnegative and sum to 1 (1e-12).
    pub fn new(n: usize, entries: impl IntoIterator<Item = (Pauli, f64)>) -> Result<Self> {
        let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (p, prob) in entries {
            if p.n() != n {
                return Err(Error::dim("PauliDistribution entry with wrong qubit count"));
            }
            if prob < 0.0 {
                return Err(Error::invalid("negative probability"));
            }
            *map.entry((p.x_bits(), p.z_bits())).or_insert(0.0) += prob;
        }
        if map.is_empty() {
            return Err(Error::invalid("empty PauliDistribution support"));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "PauliDistribution probabilities sum to {total}, expected 1"
            )));
        }
        let support: Vec<(Pauli, f64)> = map
            .into_iter()
            .map(|((x, z), prob)| {
                let p = Pauli::from_parts(n, x, z, 0).expect("validated bits").phase_stripped();
                (p, prob)
            })
            .collect();
        Ok(Self::from_sorted(n, support))
    }

    fn from_sorted(n: usize, support: Vec<(Pauli, f64)>) -> Self {
        let mut acc = 0.0;
        let cumulative = support
            .iter()
            .map(|(_, p)| {
                acc += p;
                acc
            })
            .collect();
        PauliDistribution {
            n,
            support,
            cumulative,
        }
    }

    /// Rebuild the cumulative table (needed after deserialization).
    pub fn rebuild(&mut self) {
        let built = Self::from_sorted(self.n, std::mem::take(&mut self.support));
        *self = built;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(Pauli, f64)] {
        &self.support
    }

    /// Probability of any non-identity Pauli; for a stochastic Pauli error
    /// channel this equals its entanglement infidelity.
    pub fn error_probability(&self) -> f64 {
        self.support
            .iter()
            .filter(|(p, _)| !p.is_identity_up_to_phase())
            .map(|(_, prob)| prob)
            .sum()
    }

    /// Draw one Pauli.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        debug_assert_eq!(self.cumulative.len(), self.support.len());
        let u: f64 = rng.gen();
        let idx = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&u).expect("finite"))
        {
            Ok(i) | Err(i) => i.min(self.support.len() - 1),
        };
        self.support[idx].0
    }

    /// Point mass on the identity.
    pub fn identity(n: usize) -> Self {
        PauliDistribution::new(n, [(Pauli::identity(n), 1.0)]).expect("valid")
    }

    /// Single-qubit depolarizing distribution with total error probability
    /// `eps` on qubit `q` of an `n`-qubit register: X, Y, Z each eps/3.
    pub fn local_depolarizing(n: usize, q: usize, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::invalid("depolarizing rate outside [0, 1]"));
        }
        PauliDistribution::new(
            n,
            [
                (Pauli::identity(n), 1.0 - eps),
                (Pauli::single(n, q, 'X')?, eps / 3.0),
                (Pauli::single(n, q, 'Y')?, eps / 3.0),
                (Pauli::single(n, q, 'Z')?, eps / 3.0),
            ],
        )
    }

    /// Bit-flip (X) error on qubit `q` with probability `p` — the readout
    /// error channel.
    pub fn bit_flip(n: usize, q: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("bit-flip probability outside [0, 1]"));
        }
        PauliDistribution::new(
            n,
            [
                (Pauli::identity(n), 1.0 - p),
                (Pauli::single(n, q, 'X')?, p),
            ],
        )
    }

    /// Independent per-qubit depolarizing on every qubit (rate `eps[q]` on
    /// qubit q). Support has up to 4^n entries; capped at n ≤ 8.
    pub fn local_depolarizing_all(n: usize, eps: &[f64]) -> Result<Self> {
        if eps.len() != n {
            return Err(Error::dim("need one rate per qubit"));
        }
        if n > 8 {
            return Err(Error::SizeCap(
                "per-qubit product distribution enumerates 4^n Paulis; n capped at 8".into(),
            ));
        }
        let mut dist = PauliDistribution::local_depolarizing(n, 0, eps[0])?;
        for q in 1..n {
            dist = dist.product(&PauliDistribution::local_depolarizing(n, q, eps[q])?)?;
        }
        Ok(dist)
    }

    /// Uniform distribution over all 4^n Paulis with total non-identity
    /// probability `1 − λ` — the fault distribution of the global
    /// depolarizing channel 𝒟_λ.
    pub fn global_depolarizing(n: usize, lambda: f64) -> Result<Self> {
        if n > 8 {
            return Err(Error::SizeCap(
                "global depolarizing enumerates 4^n Paulis; n capped at 8".into(),
            ));
        }
        let count = 1usize << (2 * n);
        let base = (1.0 - lambda) / count as f64;
        let mask = mask(n);
        let mut entries = Vec::with_capacity(count);
        for code in 0..count as u64 {
            let x = code & mask;
            let z = (code >> n) & mask;
            let p = Pauli::from_parts(n, x, z, 0)?.phase_stripped();
            let prob = if p.is_identity_up_to_phase() {
                lambda + base
            } else {
                base
            };
            entries.push((p, prob));
        }
        PauliDistribution::new(n, entries)
    }

    /// Tensor two independent distributions on disjoint registers into one
    /// distribution on the combined register (supports must stay small).
    pub fn product(&self, other: &PauliDistribution) -> Result<PauliDistribution> {
        if self.n != other.n {
            return Err(Error::dim("product() expects same register size"));
        }
        let mut entries = Vec::with_capacity(self.support.len() * other.support.len());
        for (p, pp) in &self.support {
            for (q, qq) in &other.support {
                entries.push((p.multiply(q)?.phase_stripped(), pp * qq));
            }
        }
        PauliDistribution::new(self.n, entries)
    }
}

pub(crate) fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
