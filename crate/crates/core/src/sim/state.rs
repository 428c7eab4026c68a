//! Backend-agnostic state handle used by the code and protocol layers.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use super::dense::DenseState;
use super::sparse::SparseVector;
use super::tableau::Tableau;
use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::gate::{GateKind, GateOp};
use crate::pauli::PauliOperator;
use crate::{css::linear_circuit, linalg};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Tableau,
    Sparse,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tableau" | "stabilizer" => Ok(Backend::Tableau),
            "sparse" => Ok(Backend::Sparse),
            _ => Err(Error::InvalidArgument(format!("unknown backend {s:?}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Tableau => "tableau",
            Backend::Sparse => "sparse",
        })
    }
}

/// A pure state on either backend. Wires are slot ids: discarded wires
/// return to a pool in `|0⟩` and are reused by [`QuantumState::allocate`].
#[derive(Clone, Debug)]
pub enum QuantumState {
    Tableau(Tableau),
    Sparse(SparseVector),
}

impl QuantumState {
    pub fn new(backend: Backend, field: PrimeField, m: usize) -> Self {
        match backend {
            Backend::Tableau => QuantumState::Tableau(Tableau::new(field, m)),
            Backend::Sparse => QuantumState::Sparse(SparseVector::new(field, m)),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            QuantumState::Tableau(_) => Backend::Tableau,
            QuantumState::Sparse(_) => Backend::Sparse,
        }
    }

    pub fn field(&self) -> &PrimeField {
        match self {
            QuantumState::Tableau(t) => t.field(),
            QuantumState::Sparse(s) => s.field(),
        }
    }

    /// Length of Pauli operators accepted by [`QuantumState::apply_pauli`].
    pub fn num_qupits(&self) -> usize {
        match self {
            QuantumState::Tableau(t) => t.num_qupits(),
            QuantumState::Sparse(s) => s.num_qupits(),
        }
    }

    pub fn is_active(&self, wire: usize) -> bool {
        match self {
            QuantumState::Tableau(t) => t.is_active(wire),
            QuantumState::Sparse(s) => s.is_active(wire),
        }
    }

    pub fn allocate(&mut self, k: usize) -> Vec<usize> {
        match self {
            QuantumState::Tableau(t) => t.allocate(k),
            QuantumState::Sparse(s) => s.allocate(k),
        }
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        match self {
            QuantumState::Tableau(t) => t.apply(gate),
            QuantumState::Sparse(s) => s.apply(gate),
        }
    }

    pub fn apply_all(&mut self, gates: &[GateOp]) -> Result<()> {
        match self {
            QuantumState::Tableau(t) => t.apply_all(gates),
            QuantumState::Sparse(s) => gates.iter().try_for_each(|g| s.apply(g)),
        }
    }

    /// Applies the basis permutation `|x⟩ ↦ |M x⟩` on `wires` for an
    /// invertible `M`.
    pub fn apply_linear(&mut self, wires: &[usize], m: &linalg::Matrix) -> Result<()> {
        match self {
            QuantumState::Tableau(t) => t.apply_linear(wires, m),
            QuantumState::Sparse(s) => {
                let f = *s.field();
                linear_circuit(&f, m, wires)?.iter().try_for_each(|g| s.apply(g))
            }
        }
    }

    /// Applies gates that act on pairwise distinct wires. On the tableau a
    /// batch of Toffolis goes through the affine-support method.
    pub fn apply_layer(&mut self, gates: &[GateOp]) -> Result<()> {
        match self {
            QuantumState::Tableau(t) if gates.iter().any(|g| g.kind() == GateKind::Toffoli) => {
                let (toff, rest): (Vec<GateOp>, Vec<GateOp>) =
                    gates.iter().partition(|g| g.kind() == GateKind::Toffoli);
                t.apply_all(&rest)?;
                t.apply_basis_permutation(&toff)
            }
            _ => self.apply_all(gates),
        }
    }

    pub fn apply_pauli(&mut self, op: &PauliOperator) -> Result<()> {
        match self {
            QuantumState::Tableau(t) => t.apply_pauli(op),
            QuantumState::Sparse(s) => s.apply_pauli(op),
        }
    }

    pub fn measure(&mut self, wire: usize, rng: &mut dyn RngCore) -> Result<Fe> {
        match self {
            QuantumState::Tableau(t) => t.measure(wire, rng),
            QuantumState::Sparse(s) => s.measure(wire, rng),
        }
    }

    pub fn measure_fourier(&mut self, wire: usize, rng: &mut dyn RngCore) -> Result<Fe> {
        match self {
            QuantumState::Tableau(t) => t.measure_fourier(wire, rng),
            QuantumState::Sparse(s) => s.measure_fourier(wire, rng),
        }
    }

    pub fn discard(&mut self, wire: usize, rng: &mut dyn RngCore) -> Result<Fe> {
        match self {
            QuantumState::Tableau(t) => t.discard(wire, rng),
            QuantumState::Sparse(s) => s.discard(wire, rng),
        }
    }

    /// True if `op` stabilizes the state (eigenvalue 1).
    pub fn stabilizes(&self, op: &PauliOperator) -> Result<bool> {
        match self {
            QuantumState::Tableau(t) => {
                if op.len() != t.num_qupits() {
                    return Err(Error::InvalidArgument("Pauli length mismatch".into()));
                }
                Ok(t.stabilizes(op))
            }
            QuantumState::Sparse(s) => Ok((s.expectation(op)? - 1.0).norm() < 1e-9),
        }
    }

    /// Pure state of `wires`, assuming they are unentangled with the rest.
    pub fn pure_reduced(&self, wires: &[usize]) -> Result<DenseState> {
        match self {
            QuantumState::Tableau(t) => t.pure_reduced(wires),
            QuantumState::Sparse(s) => s.conditional_state(wires),
        }
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        match self {
            QuantumState::Tableau(t) => t.to_dense(),
            QuantumState::Sparse(s) => s.to_dense(),
        }
    }
}

/// Runs `circuit` from the basis state `input` on the dense oracle and on
/// every other backend that supports it, returning the largest amplitude
/// deviation (after aligning global phase).
pub fn dense_oracle_compare(field: PrimeField, circuit: &[GateOp], input: &[Fe]) -> Result<f64> {
    let mut dense = DenseState::basis(field, input)?;
    dense.apply_all(circuit)?;
    let mut worst: f64 = 0.0;
    let mut backends = vec![Backend::Sparse];
    if circuit.iter().all(|g| g.kind().is_clifford()) {
        backends.push(Backend::Tableau);
    }
    for b in backends {
        let mut s = QuantumState::new(b, field, input.len());
        for (wire, &c) in input.iter().enumerate() {
            if c != 0 {
                s.apply(&GateOp::Shift { wire, c })?;
            }
        }
        s.apply_all(circuit)?;
        worst = worst.max(s.to_dense()?.distance_up_to_phase(&dense));
    }
    Ok(worst)
}
