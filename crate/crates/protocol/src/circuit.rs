//! Logical circuits for the multiparty computation, with a line-based text
//! format:
//!
//! ```text
//! qss-circuit 1
//! wires 3
//! input 0 1        # logical wire 0 is player 1's input
//! input 1 2
//! ancilla 2        # logical wire 2 starts as a proved |0⟩
//! toffoli 0 1 2
//! shift 2 5
//! output 2 3       # player 3 receives wire 2
//! ```
//!
//! Gate records are `shift w c`, `sum a b`, `scalar_mul w c`,
//! `phase_shift w c`, `fourier w [r]`, `fourier_inverse w [r]` and
//! `toffoli a b t`. Blank lines and `#` comments are ignored. Declarations
//! may appear anywhere; gates run in file order.

use std::fmt::Write as _;

use qss_core::gate::{GateKind, GateOp};
use qss_core::{Fe, PrimeField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::PlayerId;

pub const HEADER: &str = "qss-circuit 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireRole {
    Input(PlayerId),
    Ancilla,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalCircuit {
    pub num_wires: usize,
    /// How each wire starts; every wire is declared exactly once.
    pub roles: Vec<WireRole>,
    pub gates: Vec<GateOp>,
    /// `(wire, receiver)`; wires without an output are discarded.
    pub outputs: Vec<(usize, PlayerId)>,
}

impl LogicalCircuit {
    /// Circuit over `roles.len()` wires with every wire output to `receivers`.
    pub fn new(roles: Vec<WireRole>, gates: Vec<GateOp>, outputs: Vec<(usize, PlayerId)>) -> Result<Self> {
        let c = Self { num_wires: roles.len(), roles, gates, outputs };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCircuit(m));
        if self.roles.len() != self.num_wires {
            return bad(format!("{} wires but {} declarations", self.num_wires, self.roles.len()));
        }
        for g in &self.gates {
            let w = g.wires();
            if let Some(&x) = w.iter().find(|&&x| x >= self.num_wires) {
                return bad(format!("{g}: wire {x} out of range"));
            }
            if w.iter().enumerate().any(|(i, a)| w[i + 1..].contains(a)) {
                return bad(format!("{g}: repeated wire"));
            }
        }
        for (i, &(w, _)) in self.outputs.iter().enumerate() {
            if w >= self.num_wires {
                return bad(format!("output wire {w} out of range"));
            }
            if self.outputs[..i].iter().any(|&(v, _)| v == w) {
                return bad(format!("wire {w} output twice"));
            }
        }
        Ok(())
    }

    /// Checks scalars and player ids against a network.
    pub fn validate(&self, field: &PrimeField, n: usize) -> Result<()> {
        self.check()?;
        for g in &self.gates {
            g.validate(field).map_err(|e| Error::InvalidCircuit(e.to_string()))?;
        }
        let players = self
            .roles
            .iter()
            .filter_map(|r| match r {
                WireRole::Input(p) => Some(*p),
                WireRole::Ancilla => None,
            })
            .chain(self.outputs.iter().map(|&(_, p)| p));
        for p in players {
            if PlayerId::new(p.index(), n).is_err() {
                return Err(Error::InvalidCircuit(format!("{p} is not among {n} players")));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> Vec<(usize, PlayerId)> {
        self.roles
            .iter()
            .enumerate()
            .filter_map(|(w, r)| match r {
                WireRole::Input(p) => Some((w, *p)),
                WireRole::Ancilla => None,
            })
            .collect()
    }

    pub fn ancillas(&self) -> Vec<usize> {
        (0..self.num_wires).filter(|&w| self.roles[w] == WireRole::Ancilla).collect()
    }

    pub fn has_toffoli(&self) -> bool {
        self.gates.iter().any(|g| g.kind() == GateKind::Toffoli)
    }

    /// Classical action on basis inputs (one value per wire, ancillas 0),
    /// or `None` if the circuit contains a Fourier gate.
    pub fn evaluate_classical(&self, field: &PrimeField, values: &[Fe]) -> Option<Vec<Fe>> {
        let f = field;
        let mut v = values.to_vec();
        for g in &self.gates {
            match *g {
                GateOp::Shift { wire, c } => v[wire] = f.add(v[wire], c % f.p()),
                GateOp::Sum { control, target } => v[target] = f.add(v[target], v[control]),
                GateOp::ScalarMul { wire, c } => v[wire] = f.mul(v[wire], c % f.p()),
                GateOp::PhaseShift { .. } => {}
                GateOp::Toffoli { a, b, target } => v[target] = f.add(v[target], f.mul(v[a], v[b])),
                GateOp::Fourier { .. } | GateOp::FourierInverse { .. } => return None,
            }
        }
        Some(v)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == HEADER => {}
            Some((i, l)) => return Err(err(i, format!("expected `{HEADER}`, found `{l}`"))),
            None => return Err(err(0, "empty circuit".into())),
        }
        let mut num_wires = None;
        let mut roles: Vec<Option<WireRole>> = Vec::new();
        let mut gates = Vec::new();
        let mut outputs = Vec::new();
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let num = |k: usize| -> Result<usize> {
                tok.get(k)
                    .ok_or_else(|| err(ln, format!("`{}` needs more operands", tok[0])))?
                    .parse::<usize>()
                    .map_err(|e| err(ln, format!("operand {k}: {e}")))
            };
            let arity = |want: std::ops::RangeInclusive<usize>| {
                if want.contains(&(tok.len() - 1)) {
                    Ok(())
                } else {
                    Err(err(ln, format!("`{}` takes {:?} operands", tok[0], want)))
                }
            };
            let wire = |k: usize| -> Result<usize> {
                let w = num(k)?;
                match num_wires {
                    Some(m) if w < m => Ok(w),
                    Some(m) => Err(err(ln, format!("wire {w} out of range (wires {m})"))),
                    None => Err(err(ln, "`wires` must come before use".into())),
                }
            };
            let player = |k: usize| -> Result<PlayerId> {
                let i = num(k)?;
                if i == 0 {
                    return Err(err(ln, "players are numbered from 1".into()));
                }
                Ok(PlayerId::at(i - 1))
            };
            let mut declare = |w: usize, role: WireRole| -> Result<()> {
                if roles[w].replace(role).is_some() {
                    return Err(err(ln, format!("wire {w} declared twice")));
                }
                Ok(())
            };
            match tok[0] {
                "wires" => {
                    arity(1..=1)?;
                    if num_wires.is_some() {
                        return Err(err(ln, "`wires` given twice".into()));
                    }
                    let m = num(1)?;
                    num_wires = Some(m);
                    roles = vec![None; m];
                }
                "input" => {
                    arity(2..=2)?;
                    let (w, p) = (wire(1)?, player(2)?);
                    declare(w, WireRole::Input(p))?;
                }
                "ancilla" => {
                    arity(1..=1)?;
                    let w = wire(1)?;
                    declare(w, WireRole::Ancilla)?;
                }
                "output" => {
                    arity(2..=2)?;
                    outputs.push((wire(1)?, player(2)?));
                }
                name => {
                    let kind = GateKind::from_name(name)
                        .ok_or_else(|| err(ln, format!("unknown record `{name}`")))?;
                    let scalar = |k: usize| -> Result<Fe> { Ok(num(k)? as Fe) };
                    let g = match kind {
                        GateKind::Shift | GateKind::ScalarMul | GateKind::PhaseShift => {
                            arity(2..=2)?;
                            let (w, c) = (wire(1)?, scalar(2)?);
                            match kind {
                                GateKind::Shift => GateOp::Shift { wire: w, c },
                                GateKind::ScalarMul => GateOp::ScalarMul { wire: w, c },
                                _ => GateOp::PhaseShift { wire: w, c },
                            }
                        }
                        GateKind::Fourier | GateKind::FourierInverse => {
                            arity(1..=2)?;
                            let w = wire(1)?;
                            let r = if tok.len() == 3 { scalar(2)? } else { 1 };
                            if kind == GateKind::Fourier {
                                GateOp::Fourier { wire: w, r }
                            } else {
                                GateOp::FourierInverse { wire: w, r }
                            }
                        }
                        GateKind::Sum => {
                            arity(2..=2)?;
                            GateOp::Sum { control: wire(1)?, target: wire(2)? }
                        }
                        GateKind::Toffoli => {
                            arity(3..=3)?;
                            GateOp::Toffoli { a: wire(1)?, b: wire(2)?, target: wire(3)? }
                        }
                    };
                    gates.push(g);
                }
            }
        }
        let num_wires = num_wires.ok_or_else(|| err(0, "missing `wires` declaration".into()))?;
        let roles = roles
            .into_iter()
            .enumerate()
            .map(|(w, r)| r.ok_or_else(|| Error::InvalidCircuit(format!("wire {w} is neither input nor ancilla"))))
            .collect::<Result<Vec<_>>>()?;
        let c = Self { num_wires, roles, gates, outputs };
        c.check()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{HEADER}\nwires {}\n", self.num_wires);
        for (w, r) in self.roles.iter().enumerate() {
            match r {
                WireRole::Input(p) => writeln!(s, "input {w} {}", p.index()),
                WireRole::Ancilla => writeln!(s, "ancilla {w}"),
            }
            .unwrap();
        }
        for g in &self.gates {
            let kind = g.kind().name();
            match *g {
                GateOp::Shift { wire, c } | GateOp::ScalarMul { wire, c } | GateOp::PhaseShift { wire, c } => {
                    writeln!(s, "{kind} {wire} {c}")
                }
                GateOp::Fourier { wire, r } | GateOp::FourierInverse { wire, r } => {
                    writeln!(s, "{kind} {wire} {r}")
                }
                GateOp::Sum { control, target } => writeln!(s, "{kind} {control} {target}"),
                GateOp::Toffoli { a, b, target } => writeln!(s, "{kind} {a} {b} {target}"),
            }
            .unwrap();
        }
        for (w, p) in &self.outputs {
            writeln!(s, "output {w} {}", p.index()).unwrap();
        }
        s
    }
}
