//! Stabilizer-state tableau simulation and the two Clifford compilers direct
//! RB needs: conditional state preparation (graph-state reduction) and
//! unconditional unitary compilation (symplectic Gaussian elimination), both
//! with SWAP-chain routing for restricted connectivity and two-qubit gate
//! counting.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateName, Layer};
use crate::clifford::Clifford;
use crate::connectivity::Connectivity;
use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// An n-qubit stabilizer state given by n signed commuting generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerState {
    n: usize,
    gens: Vec<Pauli>,
}

impl StabilizerState {
    /// The all-zeros computational basis state (stabilizers +Z_i).
    pub fn zero(n: usize) -> Self {
        let gens = (0..n).map(|q| Pauli::single(n, q, 'Z').expect("valid")).collect();
        StabilizerState { n, gens }
    }

    /// Build from explicit generators; validates Hermiticity, mutual
    /// commutation, and independence (which together exclude −I).
    pub fn from_generators(n: usize, gens: Vec<Pauli>) -> Result<Self> {
        if gens.len() != n {
            return Err(Error::dim(format!("need exactly {n} generators")));
        }
        for g in &gens {
            if g.n() != n {
                return Err(Error::dim("generator qubit count mismatch"));
            }
            if !g.is_hermitian() {
                return Err(Error::invalid("generator must be Hermitian (±1 sign)"));
            }
            if g.is_identity_up_to_phase() {
                return Err(Error::invalid("identity is not a valid generator"));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if gens[i].symplectic_form(&gens[j]) != 0 {
                    return Err(Error::invalid("generators must commute"));
                }
            }
        }
        // Independence over GF(2): rank of the (x|z) rows must be n.
        let mut rows: Vec<u128> = Vec::new();
        for g in &gens {
            let mut cur = (g.x_bits() as u128) | ((g.z_bits() as u128) << n);
            for &r in &rows {
                let lead = 127 - r.leading_zeros() as usize;
                if (cur >> lead) & 1 == 1 {
                    cur ^= r;
                }
            }
            if cur == 0 {
                return Err(Error::invalid("generators are dependent"));
            }
            rows.push(cur);
            rows.sort_by(|a, b| b.cmp(a));
        }
        Ok(StabilizerState { n, gens })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Pauli] {
        &self.gens
    }

    /// A Haar-uniform stabilizer state (uniform Clifford applied to |0…0⟩).
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let c = Clifford::uniform_random(n, rng);
        let mut s = StabilizerState::zero(n);
        s.apply_clifford(&c).expect("dims match");
        s
    }

    /// Conjugate every generator by a Clifford (apply the unitary).
    pub fn apply_clifford(&mut self, c: &Clifford) -> Result<()> {
        if c.n() != self.n {
            return Err(Error::dim("apply qubit count mismatch"));
        }
        for g in &mut self.gens {
            *g = c.conjugate(g)?;
        }
        Ok(())
    }

    /// Apply one layer of Clifford gates.
    pub fn apply_layer(&mut self, layer: &Layer) -> Result<()> {
        let c = Clifford::from_layer(self.n, layer)?;
        self.apply_clifford(&c)
    }

    /// Apply a whole circuit (layer 0 first).
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n != self.n {
            return Err(Error::dim("apply qubit count mismatch"));
        }
        for layer in &circuit.layers {
            self.apply_layer(layer)?;
        }
        Ok(())
    }

    /// Exact probability |⟨bits|ψ⟩|² of observing the computational basis
    /// string `bits` (qubit q ↦ bit q). Always 0 or 2^{-k}.
    pub fn outcome_probability(&self, bits: u64) -> f64 {
        let n = self.n;
        let mut gens = self.gens.clone();
        // Gaussian elimination on the X block.
        let mut pivot = 0usize;
        for q in 0..n {
            if let Some(r) = (pivot..n).find(|&r| (gens[r].x_bits() >> q) & 1 == 1) {
                gens.swap(pivot, r);
                for k in 0..n {
                    if k != pivot && (gens[k].x_bits() >> q) & 1 == 1 {
                        gens[k] = gens[k].multiply(&gens[pivot]).expect("same n");
                    }
                }
                pivot += 1;
            }
        }
        // Rows pivot.. are pure-Z constraints; the support is an affine
        // space of dimension `pivot`.
        for g in &gens[pivot..] {
            debug_assert_eq!(g.x_bits(), 0);
            // Operator is i^p Z^z with p ∈ {0, 2}; eigenvalue on |bits⟩ must
            // be +1.
            let parity = (g.phase() as u32 / 2 + (g.z_bits() & bits).count_ones()) % 2;
            if parity == 1 {
                return 0.0;
            }
        }
        0.5f64.powi(pivot as i32)
    }

    /// True iff `p` (or −p) is in the stabilizer group, i.e. the state is an
    /// eigenstate of the phase-stripped operator.
    pub fn is_eigenstate(&self, p: &Pauli) -> bool {
        self.group_sign(p).is_some()
    }

    /// If ±p is in the stabilizer group, returns the sign with which the
    /// phase-stripped p appears; otherwise None.
    pub fn group_sign(&self, p: &Pauli) -> Option<i8> {
        let n = self.n;
        // Solve for the generator combination reproducing p's bit pattern.
        let target = (p.x_bits() as u128) | ((p.z_bits() as u128) << n);
        let mut rows: Vec<(u128, usize)> = Vec::new();
        let mut combos: Vec<u64> = Vec::new(); // bitmask of generators used
        for (i, g) in self.gens.iter().enumerate() {
            let mut cur = (g.x_bits() as u128) | ((g.z_bits() as u128) << n);
            let mut combo = 1u64 << i;
            for (j, &(r, _)) in rows.iter().enumerate() {
                let lead = 127 - r.leading_zeros() as usize;
                if (cur >> lead) & 1 == 1 {
                    cur ^= r;
                    combo ^= combos[j];
                }
            }
            if cur != 0 {
                rows.push((cur, i));
                combos.push(combo);
                let perm: Vec<usize> = (0..rows.len()).collect();
                let mut order = perm;
                order.sort_by(|&a, &b| rows[b].0.cmp(&rows[a].0));
                let rows2: Vec<(u128, usize)> = order.iter().map(|&k| rows[k]).collect();
                let combos2: Vec<u64> = order.iter().map(|&k| combos[k]).collect();
                rows = rows2;
                combos = combos2;
            }
        }
        let mut cur = target;
        let mut combo = 0u64;
        for (j, &(r, _)) in rows.iter().enumerate() {
            let lead = 127 - r.leading_zeros() as usize;
            if (cur >> lead) & 1 == 1 {
                cur ^= r;
                combo ^= combos[j];
            }
        }
        if cur != 0 {
            return None;
        }
        // Multiply out the combination to get the exact sign.
        let mut prod = Pauli::identity(n);
        for i in 0..n {
            if (combo >> i) & 1 == 1 {
                prod = prod.multiply(&self.gens[i]).expect("same n");
            }
        }
        let canonical = p.phase_stripped();
        debug_assert_eq!(prod.x_bits(), canonical.x_bits());
        debug_assert_eq!(prod.z_bits(), canonical.z_bits());
        if prod.phase() == canonical.phase() {
            Some(1)
        } else {
            Some(-1)
        }
    }

    /// True iff both tableaus stabilize the same state.
    pub fn same_state(&self, other: &StabilizerState) -> bool {
        self.n == other.n
            && other
                .gens
                .iter()
                .all(|g| self.group_sign(g) == g.sign().ok())
    }
}

/// A compiled circuit with its gate-count accounting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub twoq_count: usize,
    pub oneq_count: usize,
}

impl CompiledCircuit {
    fn from_circuit(circuit: Circuit) -> Self {
        let twoq_count = circuit.twoq_count();
        let oneq_count = circuit.oneq_count();
        CompiledCircuit {
            circuit,
            twoq_count,
            oneq_count,
        }
    }
}

/// Abstract compiler ops. SWAP is expanded to 3 CNOTs on emission; S⁻¹ is
/// emitted as Z(3π/2) (the vocabulary has no dedicated S†).
#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Op {
    fn qubit_mask(self) -> u64 {
        match self {
            Op::H(q) | Op::S(q) | Op::Sdg(q) | Op::X(q) | Op::Z(q) => 1 << q,
            Op::Cnot(a, b) | Op::Cz(a, b) | Op::Swap(a, b) => (1 << a) | (1 << b),
        }
    }

    fn cancels(self, other: Op) -> bool {
        if other == self.inverse() {
            return true;
        }
        // CZ and SWAP are symmetric in their operands.
        match (self, other) {
            (Op::Cz(a, b), Op::Cz(c, d)) | (Op::Swap(a, b), Op::Swap(c, d)) => (a, b) == (d, c),
            _ => false,
        }
    }

    fn inverse(self) -> Op {
        match self {
            Op::S(q) => Op::Sdg(q),
            Op::Sdg(q) => Op::S(q),
            other => other,
        }
    }

    /// The exact Clifford implemented by this op.
    fn clifford(self, n: usize) -> Clifford {
        let gate = |g: Gate| Clifford::from_gate(n, &g).expect("vocabulary gate");
        match self {
            Op::H(q) => gate(Gate::one(GateName::H, q)),
            Op::S(q) => gate(Gate::one(GateName::S, q)),
            Op::Sdg(q) => gate(Gate::zrot(q, 3.0 * std::f64::consts::FRAC_PI_2)),
            Op::X(q) => gate(Gate::one(GateName::X, q)),
            Op::Z(q) => gate(Gate::one(GateName::Z, q)),
            Op::Cnot(a, b) => gate(Gate::cnot(a, b)),
            Op::Cz(a, b) => gate(Gate::cphase(a, b)),
            Op::Swap(a, b) => {
                let c1 = gate(Gate::cnot(a, b));
                let c2 = gate(Gate::cnot(b, a));
                c1.compose(&c2).and_then(|c| c.compose(&c1)).expect("same n")
            }
        }
    }

    /// Emit vocabulary gates realizing this op on the given connectivity,
    /// appending one gate per layer.
    fn emit(self, conn: &Connectivity, out: &mut Circuit) -> Result<()> {
        match self {
            Op::H(q) => out.push_gate(Gate::one(GateName::H, q)),
            Op::S(q) => out.push_gate(Gate::one(GateName::S, q)),
            Op::Sdg(q) => out.push_gate(Gate::zrot(q, 3.0 * std::f64::consts::FRAC_PI_2)),
            Op::X(q) => out.push_gate(Gate::one(GateName::X, q)),
            Op::Z(q) => out.push_gate(Gate::one(GateName::Z, q)),
            Op::Cnot(a, b) => emit_routed(conn, GateName::Cnot, a, b, out)?,
            Op::Cz(a, b) => emit_routed(conn, GateName::Cphase, a, b, out)?,
            Op::Swap(a, b) => {
                // SWAP via 3 routed CNOTs.
                emit_routed(conn, GateName::Cnot, a, b, out)?;
                emit_routed(conn, GateName::Cnot, b, a, out)?;
                emit_routed(conn, GateName::Cnot, a, b, out)?;
            }
        }
        Ok(())
    }
}

/// Route a two-qubit gate along a shortest path with a SWAP chain (SWAP = 3
/// CNOTs) when the endpoints are not adjacent.
fn emit_routed(
    conn: &Connectivity,
    name: GateName,
    a: usize,
    b: usize,
    out: &mut Circuit,
) -> Result<()> {
    let direct = |out: &mut Circuit, a: usize, b: usize| {
        out.push_gate(Gate {
            name,
            qubits: vec![a, b],
            param: None,
        });
    };
    if conn.has_edge(a, b) {
        direct(out, a, b);
        return Ok(());
    }
    let path = conn.shortest_path(a, b)?;
    let m = path.len() - 1; // path[0] = a, path[m] = b
    debug_assert!(m >= 2);
    let swap = |out: &mut Circuit, u: usize, v: usize| {
        out.push_gate(Gate::cnot(u, v));
        out.push_gate(Gate::cnot(v, u));
        out.push_gate(Gate::cnot(u, v));
    };
    // Bring b's state adjacent to a, act, undo.
    for idx in (2..=m).rev() {
        swap(out, path[idx - 1], path[idx]);
    }
    direct(out, a, path[1]);
    for idx in 2..=m {
        swap(out, path[idx - 1], path[idx]);
    }
    Ok(())
}

/// Reduce `state` to |0…0⟩ with abstract ops (applied in returned order).
/// Row operations (generator products) are free; only emitted ops cost gates.
/// Remove canceling op pairs (identical self-inverse ops or S/S⁻¹) that are
/// adjacent up to commuting past ops on disjoint qubits. Repeats to fixpoint.
fn peephole(ops: &mut Vec<Op>) {
    loop {
        let mut removed = false;
        'scan: for i in 0..ops.len() {
            let mask = ops[i].qubit_mask();
            for j in i + 1..ops.len() {
                if ops[i].cancels(ops[j]) {
                    ops.remove(j);
                    ops.remove(i);
                    removed = true;
                    break 'scan;
                }
                if ops[j].qubit_mask() & mask != 0 {
                    break;
                }
            }
        }
        if !removed {
            break;
        }
    }
}

fn reduce_to_zero(state: &StabilizerState) -> Result<Vec<Op>> {
    let n = state.n();
    let mut gens = state.generators().to_vec();
    let mut ops: Vec<Op> = Vec::new();

    let apply = |gens: &mut Vec<Pauli>, op: Op| {
        let c = op.clifford(n);
        for g in gens.iter_mut() {
            *g = c.conjugate(g).expect("same n");
        }
    };

    // Phase 1: make the X block invertible, inserting Hadamards where the
    // pure-Z rows have Z pivots.
    for _round in 0..=n {
        let rank = x_block_rank(&mut gens, n);
        if rank == n {
            break;
        }
        // Rows rank.. are pure-Z after elimination. Echelonize their Z
        // block by free row products so each row exposes a distinct pivot
        // column, then Hadamard those columns.
        let m = gens.len();
        let mut h_targets = Vec::new();
        let mut row = rank;
        for q in 0..n {
            if row == m {
                break;
            }
            if let Some(r) = (row..m).find(|&r| (gens[r].z_bits() >> q) & 1 == 1) {
                gens.swap(row, r);
                for k in rank..m {
                    if k != row && (gens[k].z_bits() >> q) & 1 == 1 {
                        gens[k] = gens[k].multiply(&gens[row]).expect("same n");
                    }
                }
                h_targets.push(q);
                row += 1;
            }
        }
        debug_assert_eq!(row, m, "pure-Z rows must be independent");
        for q in h_targets {
            ops.push(Op::H(q));
            apply(&mut gens, Op::H(q));
        }
    }
    // Phase 2: free row reduction to X = identity.
    gauss_jordan_x(&mut gens, n)?;
    // Phase 3: clear diagonal Y's with S (S maps Y → −X on that qubit).
    for i in 0..n {
        if (gens[i].z_bits() >> i) & 1 == 1 {
            ops.push(Op::S(i));
            apply(&mut gens, Op::S(i));
        }
    }
    // Phase 4: clear the (symmetric) off-diagonal Z adjacency with CZs.
    for i in 0..n {
        for j in i + 1..n {
            if (gens[i].z_bits() >> j) & 1 == 1 {
                debug_assert_eq!((gens[j].z_bits() >> i) & 1, 1, "adjacency must be symmetric");
                ops.push(Op::Cz(i, j));
                apply(&mut gens, Op::Cz(i, j));
            }
        }
    }
    // Phase 5: fix signs (generators are now ±X_i).
    for i in 0..n {
        debug_assert_eq!(gens[i].x_bits(), 1 << i);
        debug_assert_eq!(gens[i].z_bits(), 0);
        if gens[i].sign().expect("Hermitian") < 0 {
            ops.push(Op::Z(i));
            apply(&mut gens, Op::Z(i));
        }
    }
    // Phase 6: Hadamard everything: ±X_i → Z_i, state |0…0⟩.
    for q in 0..n {
        ops.push(Op::H(q));
        apply(&mut gens, Op::H(q));
    }
    for (i, g) in gens.iter().enumerate() {
        let want = Pauli::single(n, i, 'Z').expect("valid");
        if *g != want {
            return Err(Error::Compilation("state reduction did not reach |0…0⟩".into()));
        }
    }
    Ok(ops)
}

/// Column-echelon elimination of the X block by row products; returns the
/// X rank and leaves pure-Z rows at the bottom.
fn x_block_rank(gens: &mut [Pauli], n: usize) -> usize {
    let mut pivot = 0usize;
    for q in 0..n {
        if let Some(r) = (pivot..n).find(|&r| (gens[r].x_bits() >> q) & 1 == 1) {
            gens.swap(pivot, r);
            for k in 0..n {
                if k != pivot && (gens[k].x_bits() >> q) & 1 == 1 {
                    gens[k] = gens[k].multiply(&gens[pivot]).expect("same n");
                }
            }
            pivot += 1;
        }
    }
    pivot
}

/// Row-reduce so that the X block is exactly the identity.
fn gauss_jordan_x(gens: &mut [Pauli], n: usize) -> Result<()> {
    for q in 0..n {
        let r = (q..n)
            .find(|&r| (gens[r].x_bits() >> q) & 1 == 1)
            .ok_or_else(|| Error::Compilation("X block is singular".into()))?;
        gens.swap(q, r);
        for k in 0..n {
            if k != q && (gens[k].x_bits() >> q) & 1 == 1 {
                gens[k] = gens[k].multiply(&gens[q]).expect("same n");
            }
        }
    }
    for (i, g) in gens.iter().enumerate() {
        if g.x_bits() != 1 << i {
            return Err(Error::Compilation("X block reduction failed".into()));
        }
    }
    Ok(())
}

/// Conditional compilation: a circuit mapping |0…0⟩ to `target` exactly,
/// using vocabulary gates and respecting `conn`.
pub fn compile_state_prep(target: &StabilizerState, conn: &Connectivity) -> Result<CompiledCircuit> {
    if conn.n() != target.n() {
        return Err(Error::dim("connectivity qubit count mismatch"));
    }
    let mut ops = reduce_to_zero(target)?;
    peephole(&mut ops);
    let mut circuit = Circuit::new(target.n());
    for op in ops.iter().rev() {
        op.inverse().emit(conn, &mut circuit)?;
    }
    // Verification is mandatory: replay onto |0…0⟩.
    let mut check = StabilizerState::zero(target.n());
    check.apply_circuit(&circuit)?;
    if !check.same_state(target) {
        return Err(Error::Compilation("state-prep verification failed".into()));
    }
    Ok(CompiledCircuit::from_circuit(circuit))
}

/// Measurement preparation: a circuit mapping `current` to the computational
/// basis state |target_bits⟩ with certainty.
pub fn compile_measurement_prep(
    current: &StabilizerState,
    target_bits: u64,
    conn: &Connectivity,
) -> Result<CompiledCircuit> {
    let n = current.n();
    if conn.n() != n {
        return Err(Error::dim("connectivity qubit count mismatch"));
    }
    let mut ops = reduce_to_zero(current)?;
    peephole(&mut ops);
    let mut circuit = Circuit::new(n);
    for op in &ops {
        op.emit(conn, &mut circuit)?;
    }
    for q in 0..n {
        if (target_bits >> q) & 1 == 1 {
            circuit.push_gate(Gate::one(GateName::X, q));
        }
    }
    let mut check = current.clone();
    check.apply_circuit(&circuit)?;
    if check.outcome_probability(target_bits) != 1.0 {
        return Err(Error::Compilation("measurement-prep verification failed".into()));
    }
    Ok(CompiledCircuit::from_circuit(circuit))
}

/// Unconditional compilation: a circuit whose net Clifford equals `c`
/// exactly (global phase ignored), via symplectic Gaussian elimination.
pub fn compile_unitary(c: &Clifford, conn: &Connectivity) -> Result<CompiledCircuit> {
    let n = c.n();
    if conn.n() != n {
        return Err(Error::dim("connectivity qubit count mismatch"));
    }
    let mut w = c.clone();
    // Reduction ops t_k with W ← t_k ∘ W; the circuit is t_m†, …, t_1†.
    let mut ops: Vec<Op> = Vec::new();
    let mut apply = |w: &mut Clifford, ops: &mut Vec<Op>, op: Op| {
        let t = op.clifford(n);
        *w = t.compose(w).expect("same n");
        ops.push(op);
    };

    for i in 0..n {
        // Sweep the X_i image A to ±X_i using ops on qubits ≥ i.
        sweep_to_x(&mut w, &mut ops, i, true, &mut apply)?;
        // B anticommutes with ±X_i; rotate, sweep, rotate back.
        if !is_plus_minus(&w, i, false) {
            apply(&mut w, &mut ops, Op::H(i));
            sweep_to_x(&mut w, &mut ops, i, false, &mut apply)?;
            apply(&mut w, &mut ops, Op::H(i));
        }
        // Signs: Z_i flips the X image, X_i flips the Z image.
        if w.x_image(i).sign().expect("Hermitian") < 0 {
            apply(&mut w, &mut ops, Op::Z(i));
        }
        if w.z_image(i).sign().expect("Hermitian") < 0 {
            apply(&mut w, &mut ops, Op::X(i));
        }
    }
    if w != Clifford::identity(n) {
        return Err(Error::Compilation("unitary reduction did not reach identity".into()));
    }
    peephole(&mut ops);
    let mut circuit = Circuit::new(n);
    for op in ops.iter().rev() {
        op.inverse().emit(conn, &mut circuit)?;
    }
    let net = Clifford::net_clifford(&circuit)?;
    if &net != c {
        return Err(Error::Compilation("unitary compilation verification failed".into()));
    }
    Ok(CompiledCircuit::from_circuit(circuit))
}

fn is_plus_minus(w: &Clifford, i: usize, x_image: bool) -> bool {
    let p = if x_image { w.x_image(i) } else { w.z_image(i) };
    let want_x = if x_image { 1u64 << i } else { 0 };
    let want_z = if x_image { 0 } else { 1u64 << i };
    p.x_bits() == want_x && p.z_bits() == want_z
}

/// Reduce the image of X_i (x_image = true) or Z_i (false, used after an
/// H(i) rotation, so the working image carries an x-bit at i) to ±X_i.
fn sweep_to_x(
    w: &mut Clifford,
    ops: &mut Vec<Op>,
    i: usize,
    x_image: bool,
    apply: &mut impl FnMut(&mut Clifford, &mut Vec<Op>, Op),
) -> Result<()> {
    let n = w.n();
    let get = |w: &Clifford| -> Pauli {
        if x_image {
            *w.x_image(i)
        } else {
            *w.z_image(i)
        }
    };
    // Clear Y factors (both bits) with S.
    let a = get(w);
    for q in i..n {
        if (a.x_bits() >> q) & 1 == 1 && (a.z_bits() >> q) & 1 == 1 {
            apply(w, ops, Op::S(q));
        }
    }
    // Turn remaining pure-Z factors into X with H — except at qubit i when
    // sweeping the Z image, where H(i) must not be used (it would disturb
    // the already-fixed Z_i structure); there the x-bit is already set.
    let a = get(w);
    for q in i..n {
        let z_only = (a.z_bits() >> q) & 1 == 1 && (a.x_bits() >> q) & 1 == 0;
        if z_only {
            if !x_image && q == i {
                return Err(Error::Compilation("unexpected Z-only factor at pivot".into()));
            }
            apply(w, ops, Op::H(q));
        }
    }
    // Ensure an x-bit at i (swap in the lowest support qubit if needed).
    let a = get(w);
    debug_assert_eq!(a.z_bits(), 0);
    if (a.x_bits() >> i) & 1 == 0 {
        let j = (a.x_bits() >> i).trailing_zeros() as usize + i;
        debug_assert!(j < n);
        apply(w, ops, Op::Swap(i, j));
    }
    // Fan in the remaining X factors.
    let a = get(w);
    for q in (i + 1)..n {
        if (a.x_bits() >> q) & 1 == 1 {
            apply(w, ops, Op::Cnot(i, q));
        }
    }
    let a = get(w);
    if a.x_bits() != 1 << i || a.z_bits() != 0 {
        return Err(Error::Compilation("image sweep failed".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn bits(s: &str) -> u64 {
        // qubit 0 is the leftmost character
        s.chars()
            .enumerate()
            .map(|(i, c)| if c == '1' { 1u64 << i } else { 0 })
            .sum()
    }

    #[test]
    fn basic_states() {
        let mut s = StabilizerState::zero(1);
        assert_eq!(s.outcome_probability(0), 1.0);
        assert_eq!(s.outcome_probability(1), 0.0);
        s.apply_layer(&Layer::new(vec![Gate::one(GateName::H, 0)])).unwrap();
        assert_eq!(s.generators()[0], Pauli::parse("X").unwrap());
        assert_eq!(s.outcome_probability(0), 0.5);
        assert_eq!(s.outcome_probability(1), 0.5);
    }

    #[test]
    fn bell_state() {
        let mut s = StabilizerState::zero(2);
        s.apply_layer(&Layer::new(vec![Gate::one(GateName::H, 0)])).unwrap();
        s.apply_layer(&Layer::new(vec![Gate::cnot(0, 1)])).unwrap();
        let xs = Pauli::parse("XX").unwrap();
        let zs = Pauli::parse("ZZ").unwrap();
        assert_eq!(s.group_sign(&xs), Some(1));
        assert_eq!(s.group_sign(&zs), Some(1));
        assert_eq!(s.outcome_probability(bits("00")), 0.5);
        assert_eq!(s.outcome_probability(bits("01")), 0.0);
        assert_eq!(s.outcome_probability(bits("10")), 0.0);
        assert_eq!(s.outcome_probability(bits("11")), 0.5);
    }

    #[test]
    fn from_generators_validation() {
        let n = 2;
        // X I and Z I anticommute
        assert!(StabilizerState::from_generators(
            n,
            vec![Pauli::parse("XI").unwrap(), Pauli::parse("ZI").unwrap()]
        )
        .is_err());
        // dependent set
        assert!(StabilizerState::from_generators(
            n,
            vec![Pauli::parse("ZI").unwrap(), Pauli::parse("ZI").unwrap()]
        )
        .is_err());
        // valid Bell generators
        assert!(StabilizerState::from_generators(
            n,
            vec![Pauli::parse("XX").unwrap(), Pauli::parse("ZZ").unwrap()]
        )
        .is_ok());
    }

    #[test]
    fn state_prep_trivial_cases() {
        let conn = Connectivity::all_to_all(3);
        let zero = StabilizerState::zero(3);
        let cc = compile_state_prep(&zero, &conn).unwrap();
        assert_eq!(cc.twoq_count, 0);
        assert_eq!(cc.circuit.depth(), 0, "already |0…0⟩");

        // |+⟩^n: n Hadamards, no two-qubit gates.
        let mut plus = StabilizerState::zero(3);
        for q in 0..3 {
            plus.apply_layer(&Layer::new(vec![Gate::one(GateName::H, q)])).unwrap();
        }
        let cc = compile_state_prep(&plus, &conn).unwrap();
        assert_eq!(cc.twoq_count, 0);
        let mut check = StabilizerState::zero(3);
        check.apply_circuit(&cc.circuit).unwrap();
        assert!(check.same_state(&plus));
    }

    #[test]
    fn state_prep_roundtrip_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for n in [1, 2, 3, 5, 8] {
            let conn = Connectivity::all_to_all(n);
            for _ in 0..if n <= 3 { 60 } else { 25 } {
                let target = StabilizerState::random(n, &mut rng);
                let cc = compile_state_prep(&target, &conn).unwrap();
                let mut check = StabilizerState::zero(n);
                check.apply_circuit(&cc.circuit).unwrap();
                assert!(check.same_state(&target));
            }
        }
    }

    #[test]
    fn state_prep_respects_linear_connectivity() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let n = 5;
        let conn = Connectivity::linear(n);
        for _ in 0..20 {
            let target = StabilizerState::random(n, &mut rng);
            let cc = compile_state_prep(&target, &conn).unwrap();
            for layer in &cc.circuit.layers {
                for g in &layer.gates {
                    if g.qubits.len() == 2 {
                        assert!(conn.has_edge(g.qubits[0], g.qubits[1]));
                    }
                }
            }
            let mut check = StabilizerState::zero(n);
            check.apply_circuit(&cc.circuit).unwrap();
            assert!(check.same_state(&target));
        }
    }

    #[test]
    fn measurement_prep_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        for n in [1, 2, 4] {
            let conn = Connectivity::all_to_all(n);
            for _ in 0..40 {
                let current = StabilizerState::random(n, &mut rng);
                let target: u64 = rng.gen::<u64>() & crate::pauli::mask(n);
                let cc = compile_measurement_prep(&current, target, &conn).unwrap();
                let mut check = current.clone();
                check.apply_circuit(&cc.circuit).unwrap();
                assert_eq!(check.outcome_probability(target), 1.0);
            }
        }
    }

    #[test]
    fn measurement_prep_trivial() {
        let conn = Connectivity::all_to_all(2);
        let zero = StabilizerState::zero(2);
        let cc = compile_measurement_prep(&zero, 0, &conn).unwrap();
        assert_eq!(cc.circuit.depth(), 0);
        let mut plus = StabilizerState::zero(1);
        plus.apply_layer(&Layer::new(vec![Gate::one(GateName::H, 0)])).unwrap();
        let cc = compile_measurement_prep(&plus, 0, &Connectivity::all_to_all(1)).unwrap();
        assert_eq!(cc.circuit.depth(), 1);
        assert_eq!(cc.circuit.layers[0].gates[0].name, GateName::H);
    }

    #[test]
    fn unitary_compile_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let conn1 = Connectivity::all_to_all(1);
        let id = compile_unitary(&Clifford::identity(1), &conn1).unwrap();
        assert_eq!(id.circuit.depth(), 0);
        let h = Clifford::from_gate(1, &Gate::one(GateName::H, 0)).unwrap();
        let hc = compile_unitary(&h, &conn1).unwrap();
        assert_eq!(Clifford::net_clifford(&hc.circuit).unwrap(), h);

        for n in [2, 3, 5] {
            let conn = Connectivity::all_to_all(n);
            for _ in 0..25 {
                let c = Clifford::uniform_random(n, &mut rng);
                let cc = compile_unitary(&c, &conn).unwrap();
                assert_eq!(Clifford::net_clifford(&cc.circuit).unwrap(), c);
            }
        }
        // Restricted connectivity.
        let conn = Connectivity::linear(4);
        for _ in 0..10 {
            let c = Clifford::uniform_random(4, &mut rng);
            let cc = compile_unitary(&c, &conn).unwrap();
            assert_eq!(Clifford::net_clifford(&cc.circuit).unwrap(), c);
            for layer in &cc.circuit.layers {
                for g in &layer.gates {
                    if g.qubits.len() == 2 {
                        assert!(conn.has_edge(g.qubits[0], g.qubits[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn eigenstate_fraction_matches_one_over_d_plus_one() {
        // A random stabilizer state is an eigenstate of a fixed non-identity
        // Pauli with probability 1/(2^n + 1).
        let mut rng = ChaCha12Rng::seed_from_u64(66);
        for n in [2usize, 3] {
            let p = Pauli::single(n, 0, 'Z').unwrap();
            let trials = 40_000;
            let hits = (0..trials)
                .filter(|_| StabilizerState::random(n, &mut rng).is_eigenstate(&p))
                .count();
            let expect = 1.0 / ((1 << n) as f64 + 1.0);
            let sigma = (trials as f64 * expect * (1.0 - expect)).sqrt();
            assert!(
                (hits as f64 - trials as f64 * expect).abs() < 3.5 * sigma,
                "n={n}: hits {hits} vs {}",
                trials as f64 * expect
            );
        }
    }

    #[test]
    fn compiled_twoq_growth_is_quadratic() {
        // O(n²) two-qubit gates for the unconditional compiler on all-to-all
        // connectivity: fit c·n² over n ≤ 12 and check the residual trend.
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let mut ns = Vec::new();
        let mut counts = Vec::new();
        for n in (4..=12).step_by(2) {
            let conn = Connectivity::all_to_all(n);
            let mut total = 0usize;
            let reps = 12;
            for _ in 0..reps {
                let c = Clifford::uniform_random(n, &mut rng);
                total += compile_unitary(&c, &conn).unwrap().twoq_count;
            }
            ns.push(n as f64);
            counts.push(total as f64 / reps as f64);
        }
        // least-squares c for counts ≈ c n²
        let num: f64 = ns.iter().zip(&counts).map(|(n, c)| n * n * c).sum();
        let den: f64 = ns.iter().map(|n| n.powi(4)).sum();
        let cfit = num / den;
        for (n, c) in ns.iter().zip(&counts) {
            assert!(
                *c <= 3.0 * cfit * n * n + 10.0,
                "n={n}: {c} far above quadratic fit {cfit}·n²"
            );
        }
    }
}

