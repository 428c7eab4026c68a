use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};

/// Gate kinds of the qupit gate set, without operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Shift,
    Sum,
    ScalarMul,
    PhaseShift,
    Fourier,
    FourierInverse,
    Toffoli,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Sum => 2,
            GateKind::Toffoli => 3,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        self != GateKind::Toffoli
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Shift => "shift",
            GateKind::Sum => "sum",
            GateKind::ScalarMul => "scalar_mul",
            GateKind::PhaseShift => "phase_shift",
            GateKind::Fourier => "fourier",
            GateKind::FourierInverse => "fourier_inverse",
            GateKind::Toffoli => "toffoli",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "shift" => GateKind::Shift,
            "sum" => GateKind::Sum,
            "scalar_mul" => GateKind::ScalarMul,
            "phase_shift" => GateKind::PhaseShift,
            "fourier" => GateKind::Fourier,
            "fourier_inverse" => GateKind::FourierInverse,
            "toffoli" => GateKind::Toffoli,
            _ => return None,
        })
    }
}

/// A gate with its wires.
///
/// * `Shift`: `|a⟩ ↦ |a + c⟩`
/// * `Sum`: `|a, b⟩ ↦ |a, a + b⟩`
/// * `ScalarMul`: `|a⟩ ↦ |c a⟩`, `c ≠ 0`
/// * `PhaseShift`: `|a⟩ ↦ ω^{c a} |a⟩`
/// * `Fourier`: `|a⟩ ↦ p^{-1/2} Σ_b ω^{r a b} |b⟩`, `r ≠ 0`
/// * `Toffoli`: `|a, b, c⟩ ↦ |a, b, c + a b⟩`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    Shift { wire: usize, c: Fe },
    Sum { control: usize, target: usize },
    ScalarMul { wire: usize, c: Fe },
    PhaseShift { wire: usize, c: Fe },
    Fourier { wire: usize, r: Fe },
    FourierInverse { wire: usize, r: Fe },
    Toffoli { a: usize, b: usize, target: usize },
}

impl GateOp {
    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::Shift { .. } => GateKind::Shift,
            GateOp::Sum { .. } => GateKind::Sum,
            GateOp::ScalarMul { .. } => GateKind::ScalarMul,
            GateOp::PhaseShift { .. } => GateKind::PhaseShift,
            GateOp::Fourier { .. } => GateKind::Fourier,
            GateOp::FourierInverse { .. } => GateKind::FourierInverse,
            GateOp::Toffoli { .. } => GateKind::Toffoli,
        }
    }

    pub fn wires(&self) -> Vec<usize> {
        match *self {
            GateOp::Shift { wire, .. }
            | GateOp::ScalarMul { wire, .. }
            | GateOp::PhaseShift { wire, .. }
            | GateOp::Fourier { wire, .. }
            | GateOp::FourierInverse { wire, .. } => vec![wire],
            GateOp::Sum { control, target } => vec![control, target],
            GateOp::Toffoli { a, b, target } => vec![a, b, target],
        }
    }

    pub fn validate(&self, f: &PrimeField) -> Result<()> {
        let w = self.wires();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[i] == w[j] {
                    return Err(Error::InvalidArgument(format!("{self}: repeated wire")));
                }
            }
        }
        match *self {
            GateOp::ScalarMul { c, .. } if c % f.p() == 0 => {
                Err(Error::InvalidArgument(format!("{self}: zero scalar")))
            }
            GateOp::Fourier { r, .. } | GateOp::FourierInverse { r, .. } if r % f.p() == 0 => Err(
                Error::InvalidArgument(format!("{self}: zero Fourier scalar")),
            ),
            _ => Ok(()),
        }
    }

    /// Gates implementing the inverse unitary. Toffoli's inverse is its
    /// `(p-1)`-th power.
    pub fn inverse(&self, f: &PrimeField) -> Vec<GateOp> {
        match *self {
            GateOp::Shift { wire, c } => vec![GateOp::Shift { wire, c: f.neg(c) }],
            GateOp::Sum { control, target } => controlled_add(f, control, target, f.neg(1)),
            GateOp::ScalarMul { wire, c } => {
                vec![GateOp::ScalarMul {
                    wire,
                    c: f.inv(c).expect("validated scalar"),
                }]
            }
            GateOp::PhaseShift { wire, c } => vec![GateOp::PhaseShift { wire, c: f.neg(c) }],
            GateOp::Fourier { wire, r } => vec![GateOp::FourierInverse { wire, r }],
            GateOp::FourierInverse { wire, r } => vec![GateOp::Fourier { wire, r }],
            GateOp::Toffoli { .. } => vec![*self; f.p() as usize - 1],
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateOp::Shift { wire, c } => write!(fm, "shift({c}) q{wire}"),
            GateOp::Sum { control, target } => write!(fm, "sum q{control} q{target}"),
            GateOp::ScalarMul { wire, c } => write!(fm, "scalar_mul({c}) q{wire}"),
            GateOp::PhaseShift { wire, c } => write!(fm, "phase_shift({c}) q{wire}"),
            GateOp::Fourier { wire, r } => write!(fm, "fourier({r}) q{wire}"),
            GateOp::FourierInverse { wire, r } => write!(fm, "fourier_inverse({r}) q{wire}"),
            GateOp::Toffoli { a, b, target } => write!(fm, "toffoli q{a} q{b} q{target}"),
        }
    }
}

/// `|x, y⟩ ↦ |x, y + b x⟩` as `S_b`, `SUM`, `S_{1/b}` on the control.
pub fn controlled_add(f: &PrimeField, control: usize, target: usize, b: Fe) -> Vec<GateOp> {
    let b = b % f.p();
    match b {
        0 => vec![],
        1 => vec![GateOp::Sum { control, target }],
        _ => vec![
            GateOp::ScalarMul {
                wire: control,
                c: b,
            },
            GateOp::Sum { control, target },
            GateOp::ScalarMul {
                wire: control,
                c: f.inv(b).unwrap(),
            },
        ],
    }
}
