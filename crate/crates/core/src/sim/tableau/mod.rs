//! Stabilizer tableau over `Z_p` with destabilizer bookkeeping.
//!
//! The state is kept as a tensor product of independent blocks. Each block
//! is a dense tableau over its own columns in which row pair `(d_j, s_j)`
//! satisfies `λ(d_i, s_k) = δ_ik` and the stabilizers commute. Gates
//! merge the blocks they touch; a discarded wire is split off its block
//! and its slot is handed out again by [`Tableau::allocate`].

mod permute;

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::dense::{omega_pow, DenseState};
use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::gate::{GateKind, GateOp};
use crate::linalg;
use crate::pauli::PauliOperator;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Row {
    pub x: Vec<u8>,
    pub z: Vec<u8>,
    pub phase: Fe,
}

impl Row {
    pub fn zero(cols: usize) -> Self {
        Self {
            x: vec![0; cols],
            z: vec![0; cols],
            phase: 0,
        }
    }

    fn to_pauli(&self) -> PauliOperator {
        PauliOperator {
            x: self.x.iter().map(|&v| v as Fe).collect(),
            z: self.z.iter().map(|&v| v as Fe).collect(),
            phase: self.phase,
        }
    }

    fn from_pauli(op: &PauliOperator) -> Self {
        Self {
            x: op.x.iter().map(|&v| v as u8).collect(),
            z: op.z.iter().map(|&v| v as u8).collect(),
            phase: op.phase,
        }
    }

    fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&v| v == 0)
    }
}

pub(crate) fn dot8(f: &PrimeField, a: &[u8], b: &[u8]) -> Fe {
    let s: u64 = a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum();
    (s % f.p() as u64) as Fe
}

/// `λ(a, b)` on symplectic parts.
pub(crate) fn lambda(f: &PrimeField, a: &Row, b: &Row) -> Fe {
    f.sub(dot8(f, &a.z, &b.x), dot8(f, &a.x, &b.z))
}

/// `t ← t · s^e`.
pub(crate) fn mul_pow(f: &PrimeField, t: &mut Row, s: &Row, e: Fe) {
    let e = e % f.p();
    if e == 0 {
        return;
    }
    let p = f.p() as u64;
    let tri = ((e as u64 * (e as u64 - 1) / 2) % p) as Fe;
    let s_pow_phase = f.add(f.mul(e, s.phase), f.mul(dot8(f, &s.x, &s.z), tri));
    let cross = f.mul(dot8(f, &t.z, &s.x), e);
    t.phase = f.add(f.add(t.phase, s_pow_phase), cross);
    let table = scale_table(f, e);
    axpy(f.p(), &mut t.x, &s.x, &table);
    axpy(f.p(), &mut t.z, &s.z, &table);
}

/// `v ↦ e v mod p` for every residue.
fn scale_table(f: &PrimeField, e: Fe) -> [u8; 256] {
    let mut table = [0u8; 256];
    for v in 0..f.p() {
        table[v as usize] = f.mul(e, v) as u8;
    }
    table
}

/// `t ← t + table[s]` entrywise mod `p`.
fn axpy(p: Fe, t: &mut [u8], s: &[u8], table: &[u8; 256]) {
    let p = p as u16;
    for (tv, &sv) in t.iter_mut().zip(s) {
        let v = *tv as u16 + table[sv as usize] as u16;
        *tv = if v >= p { (v - p) as u8 } else { v as u8 };
    }
}

/// `rows[t] ← rows[t] · rows[s]^e`.
pub(crate) fn mul_rows(f: &PrimeField, rows: &mut [Row], t: usize, s: usize, e: Fe) {
    debug_assert_ne!(t, s);
    if t < s {
        let (a, b) = rows.split_at_mut(s);
        mul_pow(f, &mut a[t], &b[0], e);
    } else {
        let (a, b) = rows.split_at_mut(t);
        mul_pow(f, &mut b[0], &a[s], e);
    }
}

/// `row ← g row g⁻¹` for a Clifford gate.
fn conjugate_row(f: &PrimeField, gate: &GateOp, r: &mut Row) {
    match *gate {
        GateOp::Shift { wire: j, c } => {
            r.phase = f.sub(r.phase, f.mul(c % f.p(), r.z[j] as Fe));
        }
        GateOp::PhaseShift { wire: j, c } => {
            r.phase = f.add(r.phase, f.mul(c % f.p(), r.x[j] as Fe));
        }
        GateOp::ScalarMul { wire: j, c } => {
            let ci = f.inv(c % f.p()).expect("validated scalar");
            r.x[j] = f.mul(r.x[j] as Fe, c % f.p()) as u8;
            r.z[j] = f.mul(r.z[j] as Fe, ci) as u8;
        }
        GateOp::Sum { control, target } => {
            r.x[target] = f.add(r.x[target] as Fe, r.x[control] as Fe) as u8;
            r.z[control] = f.sub(r.z[control] as Fe, r.z[target] as Fe) as u8;
        }
        GateOp::Fourier { wire, r: k } => {
            // F_k = F S_k
            if k % f.p() != 1 {
                conjugate_row(f, &GateOp::ScalarMul { wire, c: k }, r);
            }
            let (x, z) = (r.x[wire] as Fe, r.z[wire] as Fe);
            r.x[wire] = f.neg(z) as u8;
            r.z[wire] = x as u8;
            r.phase = f.sub(r.phase, f.mul(x, z));
        }
        GateOp::FourierInverse { wire, r: k } => {
            let (x, z) = (r.x[wire] as Fe, r.z[wire] as Fe);
            r.x[wire] = z as u8;
            r.z[wire] = f.neg(x) as u8;
            r.phase = f.sub(r.phase, f.mul(x, z));
            if k % f.p() != 1 {
                let ki = f.inv(k % f.p()).expect("validated scalar");
                conjugate_row(f, &GateOp::ScalarMul { wire, c: ki }, r);
            }
        }
        GateOp::Toffoli { .. } => unreachable!("Toffoli is not Clifford"),
    }
}

/// `g P g⁻¹` for a Clifford gate `g`, using the tableau update rules.
pub fn conjugate_pauli(f: &PrimeField, gate: &GateOp, op: &PauliOperator) -> Result<PauliOperator> {
    gate.validate(f)?;
    if !gate.kind().is_clifford() {
        return Err(Error::UnsupportedGate(gate.to_string()));
    }
    if gate.wires().iter().any(|&w| w >= op.len()) {
        return Err(Error::InvalidArgument(
            "gate wire outside the operator".into(),
        ));
    }
    let mut r = Row::from_pauli(op);
    conjugate_row(f, gate, &mut r);
    Ok(r.to_pauli())
}

/// One tensor factor of the state: a dense tableau over `wires.len()`
/// local columns, column `j` standing for global wire `wires[j]`.
#[derive(Clone, Debug)]
pub(crate) struct Block {
    field: PrimeField,
    cols: usize,
    destab: Vec<Row>,
    stab: Vec<Row>,
    wires: Vec<usize>,
}

impl Block {
    fn zero(field: PrimeField, wire: usize) -> Self {
        let mut d = Row::zero(1);
        d.x[0] = field.neg(1) as u8;
        let mut s = Row::zero(1);
        s.z[0] = 1;
        Self {
            field,
            cols: 1,
            destab: vec![d],
            stab: vec![s],
            wires: vec![wire],
        }
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire < self.cols {
            Ok(())
        } else {
            Err(Error::NoSuchWire(wire))
        }
    }

    /// Appends `other`'s columns after this block's.
    fn absorb(&mut self, other: Block) {
        let (a, b) = (self.cols, other.cols);
        for r in self.destab.iter_mut().chain(self.stab.iter_mut()) {
            r.x.resize(a + b, 0);
            r.z.resize(a + b, 0);
        }
        let widen = |r: Row| {
            let mut x = vec![0; a];
            x.extend_from_slice(&r.x);
            let mut z = vec![0; a];
            z.extend_from_slice(&r.z);
            Row {
                x,
                z,
                phase: r.phase,
            }
        };
        self.destab.extend(other.destab.into_iter().map(widen));
        self.stab.extend(other.stab.into_iter().map(widen));
        self.wires.extend(other.wires);
        self.cols = a + b;
    }

    /// Same state with columns reordered: new column `k` is old `order[k]`.
    fn permuted(&self, order: &[usize]) -> Block {
        let perm = |r: &Row| Row {
            x: order.iter().map(|&j| r.x[j]).collect(),
            z: order.iter().map(|&j| r.z[j]).collect(),
            phase: r.phase,
        };
        Block {
            field: self.field,
            cols: self.cols,
            destab: self.destab.iter().map(perm).collect(),
            stab: self.stab.iter().map(perm).collect(),
            wires: order.iter().map(|&j| self.wires[j]).collect(),
        }
    }

    fn conjugate_all(&mut self, gates: &[GateOp]) {
        let f = self.field;
        for r in self.destab.iter_mut().chain(self.stab.iter_mut()) {
            for g in gates {
                conjugate_row(&f, g, r);
            }
        }
    }

    fn conjugate(&mut self, gate: &GateOp) {
        let f = self.field;
        for r in self.destab.iter_mut().chain(self.stab.iter_mut()) {
            conjugate_row(&f, gate, r);
        }
    }

    fn measure<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Fe {
        let f = self.field;
        let Some(r) = (0..self.cols).find(|&i| self.stab[i].x[wire] != 0) else {
            let mut acc = Row::zero(self.cols);
            for i in 0..self.cols {
                let a = f.neg(self.destab[i].x[wire] as Fe);
                mul_pow(&f, &mut acc, &self.stab[i], a);
            }
            debug_assert!(acc.x.iter().all(|&v| v == 0));
            return f.neg(acc.phase);
        };
        let br_inv = f.inv(self.stab[r].x[wire] as Fe).unwrap();
        for i in 0..self.cols {
            let bi = self.stab[i].x[wire] as Fe;
            if i != r && bi != 0 {
                mul_rows(&f, &mut self.stab, i, r, f.neg(f.mul(bi, br_inv)));
            }
        }
        let sr = self.stab[r].clone();
        for i in 0..self.cols {
            let g = self.destab[i].x[wire] as Fe;
            if i != r && g != 0 {
                mul_pow(&f, &mut self.destab[i], &sr, f.neg(f.mul(g, br_inv)));
            }
        }
        let mut dr = Row::zero(self.cols);
        mul_pow(&f, &mut dr, &sr, f.neg(br_inv));
        self.destab[r] = dr;
        let outcome = rng.gen_range(0..f.p());
        let mut s = Row::zero(self.cols);
        s.z[wire] = 1;
        s.phase = f.neg(outcome);
        self.stab[r] = s;
        outcome
    }

    /// Removes a column whose wire is in a computational basis state. The
    /// last column moves into its place.
    fn split_off(&mut self, wire: usize) {
        let f = self.field;
        let r = (0..self.cols)
            .find(|&i| self.stab[i].z[wire] != 0)
            .expect("a measured wire has a Z stabilizer");
        let inv = f.inv(self.stab[r].z[wire] as Fe).unwrap();
        // row r and its destabilizer are dropped, so only the other
        // stabilizers need updating; a bare `Z` pivot only moves phases
        let pivot = &self.stab[r];
        let bare = pivot.x.iter().all(|&v| v == 0)
            && pivot.z.iter().enumerate().all(|(j, &v)| j == wire || v == 0);
        let pivot_phase = pivot.phase;
        for i in 0..self.cols {
            let c = self.stab[i].z[wire] as Fe;
            if i != r && c != 0 {
                let e = f.neg(f.mul(c, inv));
                if bare {
                    let s = &mut self.stab[i];
                    s.phase = f.add(s.phase, f.mul(e, pivot_phase));
                    s.z[wire] = 0;
                } else {
                    mul_rows(&f, &mut self.stab, i, r, e);
                }
            }
        }
        self.stab.swap_remove(r);
        self.destab.swap_remove(r);
        for row in self.destab.iter_mut().chain(self.stab.iter_mut()) {
            row.x.swap_remove(wire);
            row.z.swap_remove(wire);
        }
        self.wires.swap_remove(wire);
        self.cols -= 1;
    }

    /// Eigenvalue exponent of a local Pauli, if it commutes with the group.
    fn eigenphase(&self, pr: &Row) -> Option<Fe> {
        let f = self.field;
        let supp: Vec<usize> = (0..self.cols).filter(|&j| pr.x[j] != 0 || pr.z[j] != 0).collect();
        // λ(pr, row) restricted to the support of `pr`
        let lam = |row: &Row| {
            let (mut zx, mut xz) = (0u64, 0u64);
            for &j in &supp {
                zx += pr.z[j] as u64 * row.x[j] as u64;
                xz += pr.x[j] as u64 * row.z[j] as u64;
            }
            let p = f.p() as u64;
            f.sub((zx % p) as Fe, (xz % p) as Fe)
        };
        if self.stab.iter().any(|s| lam(s) != 0) {
            return None;
        }
        let mut acc = Row::zero(self.cols);
        for i in 0..self.cols {
            let e = f.neg(lam(&self.destab[i]));
            if e != 0 {
                mul_pow(&f, &mut acc, &self.stab[i], e);
            }
        }
        debug_assert!(acc.x == pr.x && acc.z == pr.z);
        Some(f.sub(pr.phase, acc.phase))
    }

    fn reduced_generators(&self, wires: &[usize]) -> Vec<PauliOperator> {
        let f = self.field;
        let inside: BTreeSet<usize> = wires.iter().copied().collect();
        let mut rows = self.stab.clone();
        let mut rank = 0;
        // eliminate on the outside columns; leftover rows live on `wires`
        for j in (0..self.cols).filter(|j| !inside.contains(j)) {
            for part in 0..2 {
                let get = |r: &Row| if part == 0 { r.x[j] } else { r.z[j] } as Fe;
                let Some(piv) = (rank..rows.len()).find(|&i| get(&rows[i]) != 0) else {
                    continue;
                };
                rows.swap(rank, piv);
                let inv = f.inv(get(&rows[rank])).unwrap();
                for i in rank + 1..rows.len() {
                    let v = get(&rows[i]);
                    if v != 0 {
                        mul_rows(&f, &mut rows, i, rank, f.neg(f.mul(v, inv)));
                    }
                }
                rank += 1;
            }
        }
        rows[rank..]
            .iter()
            .map(|r| PauliOperator {
                x: wires.iter().map(|&w| r.x[w] as Fe).collect(),
                z: wires.iter().map(|&w| r.z[w] as Fe).collect(),
                phase: r.phase,
            })
            .collect()
    }

    fn pure_reduced(&self, wires: &[usize]) -> Result<DenseState> {
        let gens = self.reduced_generators(wires);
        if gens.len() != wires.len() {
            return Err(Error::InvalidArgument(
                "subsystem is entangled with the rest".into(),
            ));
        }
        // any string in the support works as a starting point
        let mut probe = self.clone();
        let mut rng = rand::rngs::StdRng::seed_from_u64(0);
        let digits: Vec<Fe> = wires.iter().map(|&w| probe.measure(w, &mut rng)).collect();
        let mut psi = DenseState::basis(self.field, &digits)?;
        for g in &gens {
            let mut acc = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
            let mut term = psi.clone();
            for _ in 0..self.field.p() {
                for (a, b) in acc.iter_mut().zip(term.amplitudes()) {
                    *a += b;
                }
                term.apply_pauli(g)?;
            }
            psi = DenseState::from_amplitudes(self.field, wires.len(), acc)?;
        }
        let norm = psi.norm_sqr().sqrt();
        let amps = psi.amplitudes().iter().map(|a| a / norm).collect();
        DenseState::from_amplitudes(self.field, wires.len(), amps)
    }

    fn check_invariants(&self) -> Result<()> {
        let f = self.field;
        if self.stab.len() != self.cols
            || self.destab.len() != self.cols
            || self.wires.len() != self.cols
        {
            return Err(Error::NotStabilizer);
        }
        for i in 0..self.cols {
            for k in 0..self.cols {
                let want = Fe::from(i == k);
                if lambda(&f, &self.destab[i], &self.stab[k]) != want {
                    return Err(Error::NotStabilizer);
                }
                if k > i && lambda(&f, &self.stab[i], &self.stab[k]) != 0 {
                    return Err(Error::NotStabilizer);
                }
            }
            if self.stab[i].is_identity() {
                return Err(Error::NotStabilizer);
            }
        }
        Ok(())
    }

    fn to_dense(&self) -> Result<DenseState> {
        let form = permute::AffineForm::of(self)?;
        let f = self.field;
        let p = f.p();
        let dim = DenseState::new(f, self.cols)?.amplitudes().len();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let d = form.dim();
        let norm = (p as f64).powi(d as i32).sqrt().recip();
        let probe = DenseState::basis(f, &vec![0; self.cols])?;
        let mut u = vec![0; d];
        loop {
            let x = form.point(&u);
            amps[probe.index(&x)] = omega_pow(p, form.phase(&u) as u64) * norm;
            let mut k = 0;
            while k < d {
                u[k] = (u[k] + 1) % p;
                if u[k] != 0 {
                    break;
                }
                k += 1;
            }
            if k == d {
                break;
            }
        }
        DenseState::from_amplitudes(f, self.cols, amps)
    }
}

/// `v[cols] ← A v[cols]` with `A` given by columns.
fn map_columns(p: Fe, v: &mut [u8], cols: &[usize], a_cols: &[Vec<u32>], acc: &mut [u32]) {
    let mut any = false;
    for (j, &c) in cols.iter().enumerate() {
        let x = v[c] as u32;
        if x == 0 {
            continue;
        }
        if !any {
            acc.fill(0);
            any = true;
        }
        for (a, &m) in acc.iter_mut().zip(&a_cols[j]) {
            *a += m * x;
        }
    }
    if any {
        for (&c, &a) in cols.iter().zip(acc.iter()) {
            v[c] = (a % p) as u8;
        }
    }
}

fn relabel(gate: &GateOp, local: impl Fn(usize) -> usize) -> GateOp {
    match *gate {
        GateOp::Shift { wire, c } => GateOp::Shift {
            wire: local(wire),
            c,
        },
        GateOp::Sum { control, target } => GateOp::Sum {
            control: local(control),
            target: local(target),
        },
        GateOp::ScalarMul { wire, c } => GateOp::ScalarMul {
            wire: local(wire),
            c,
        },
        GateOp::PhaseShift { wire, c } => GateOp::PhaseShift {
            wire: local(wire),
            c,
        },
        GateOp::Fourier { wire, r } => GateOp::Fourier {
            wire: local(wire),
            r,
        },
        GateOp::FourierInverse { wire, r } => GateOp::FourierInverse {
            wire: local(wire),
            r,
        },
        GateOp::Toffoli { a, b, target } => GateOp::Toffoli {
            a: local(a),
            b: local(b),
            target: local(target),
        },
    }
}

/// Stabilizer state over a growing set of wire slots.
#[derive(Clone, Debug)]
pub struct Tableau {
    field: PrimeField,
    /// `(block, column)` of every active slot.
    slots: Vec<Option<(usize, usize)>>,
    blocks: Vec<Option<Block>>,
    spare_blocks: Vec<usize>,
    free: BTreeSet<usize>,
}

impl Tableau {
    /// `m` qupits in `|0⟩`, wires `0..m`.
    pub fn new(field: PrimeField, m: usize) -> Self {
        let mut t = Self {
            field,
            slots: Vec::new(),
            blocks: Vec::new(),
            spare_blocks: Vec::new(),
            free: BTreeSet::new(),
        };
        for w in 0..m {
            t.slots.push(None);
            t.activate(w);
        }
        t
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// Number of slots, active or free.
    pub fn num_qupits(&self) -> usize {
        self.slots.len()
    }

    pub fn is_active(&self, wire: usize) -> bool {
        self.slots.get(wire).is_some_and(Option::is_some)
    }

    pub fn active_wires(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&w| self.is_active(w))
            .collect()
    }

    /// Number of independent blocks the state is split into.
    pub fn num_blocks(&self) -> usize {
        self.blocks.iter().flatten().count()
    }

    fn activate(&mut self, wire: usize) {
        let b = Block::zero(self.field, wire);
        let id = match self.spare_blocks.pop() {
            Some(id) => {
                self.blocks[id] = Some(b);
                id
            }
            None => {
                self.blocks.push(Some(b));
                self.blocks.len() - 1
            }
        };
        self.slots[wire] = Some((id, 0));
    }

    /// Hands out `k` wires in `|0⟩`, reusing discarded slots lowest first.
    pub fn allocate(&mut self, k: usize) -> Vec<usize> {
        (0..k)
            .map(|_| {
                let w = self.free.pop_first().unwrap_or_else(|| {
                    self.slots.push(None);
                    self.slots.len() - 1
                });
                self.activate(w);
                w
            })
            .collect()
    }

    fn locate(&self, wire: usize) -> Result<(usize, usize)> {
        self.slots
            .get(wire)
            .copied()
            .flatten()
            .ok_or(Error::NoSuchWire(wire))
    }

    fn block(&self, id: usize) -> &Block {
        self.blocks[id].as_ref().expect("live block")
    }

    fn block_mut(&mut self, id: usize) -> &mut Block {
        self.blocks[id].as_mut().expect("live block")
    }

    fn take_block(&mut self, id: usize) -> Block {
        self.spare_blocks.push(id);
        self.blocks[id].take().expect("live block")
    }

    fn install(&mut self, id: usize, block: Block) {
        for (j, &w) in block.wires.iter().enumerate() {
            self.slots[w] = Some((id, j));
        }
        if let Some(pos) = self.spare_blocks.iter().position(|&s| s == id) {
            self.spare_blocks.swap_remove(pos);
        }
        self.blocks[id] = Some(block);
    }

    /// Merges the blocks holding `wires` into one and returns its id.
    fn merge_for(&mut self, wires: &[usize]) -> Result<usize> {
        let mut ids: Vec<usize> = wires
            .iter()
            .map(|&w| self.locate(w).map(|l| l.0))
            .collect::<Result<_>>()?;
        ids.sort_unstable();
        ids.dedup();
        if ids.len() == 1 {
            return Ok(ids[0]);
        }
        let &keep = ids.iter().max_by_key(|&&id| self.block(id).cols).unwrap();
        let mut base = self.take_block(keep);
        for &id in ids.iter().filter(|&&id| id != keep) {
            let other = self.take_block(id);
            base.absorb(other);
        }
        self.install(keep, base);
        Ok(keep)
    }

    /// A standalone copy of every block touching `wires`, reordered so that
    /// `wires` come first in the given order. Free slots count as `|0⟩`.
    fn gather(&self, wires: &[usize]) -> Block {
        let mut ids: Vec<usize> = wires
            .iter()
            .filter_map(|&w| self.slots[w].map(|l| l.0))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let mut parts = ids.iter().map(|&id| self.block(id).clone());
        let mut all = parts
            .next()
            .unwrap_or_else(|| Block::zero(self.field, wires[0]));
        for b in parts {
            all.absorb(b);
        }
        for &w in wires {
            if !all.wires.contains(&w) {
                all.absorb(Block::zero(self.field, w));
            }
        }
        let col: HashMap<usize, usize> =
            all.wires.iter().enumerate().map(|(j, &w)| (w, j)).collect();
        let mut order: Vec<usize> = wires.iter().map(|w| col[w]).collect();
        let chosen: BTreeSet<usize> = order.iter().copied().collect();
        order.extend((0..all.cols).filter(|j| !chosen.contains(j)));
        all.permuted(&order)
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(&self.field)?;
        let wires = gate.wires();
        for &w in &wires {
            self.locate(w)?;
        }
        if gate.kind() == GateKind::Toffoli {
            return Err(Error::UnsupportedGate(format!(
                "{gate} on a stabilizer tableau; use apply_basis_permutation"
            )));
        }
        let id = self.merge_for(&wires)?;
        let local = relabel(gate, |w| self.slots[w].unwrap().1);
        self.block_mut(id).conjugate(&local);
        Ok(())
    }

    /// Applies Clifford gates in order. Blocks are merged once up front and
    /// each block's rows are conjugated by all of its gates in one pass.
    pub fn apply_all(&mut self, gates: &[GateOp]) -> Result<()> {
        for g in gates {
            g.validate(&self.field)?;
            for w in g.wires() {
                self.locate(w)?;
            }
            if g.kind() == GateKind::Toffoli {
                return Err(Error::UnsupportedGate(format!(
                    "{g} on a stabilizer tableau; use apply_basis_permutation"
                )));
            }
        }
        for g in gates {
            self.merge_for(&g.wires())?;
        }
        let mut groups: Vec<(usize, Vec<GateOp>)> = Vec::new();
        for g in gates {
            let id = self.slots[g.wires()[0]].unwrap().0;
            let local = relabel(g, |w| self.slots[w].unwrap().1);
            match groups.iter_mut().find(|(b, _)| *b == id) {
                Some((_, list)) => list.push(local),
                None => groups.push((id, vec![local])),
            }
        }
        for (id, list) in groups {
            self.block_mut(id).conjugate_all(&list);
        }
        Ok(())
    }

    /// Applies the basis permutation `|x⟩ ↦ |M x⟩` on `wires`.
    pub fn apply_linear(&mut self, wires: &[usize], m: &linalg::Matrix) -> Result<()> {
        let k = wires.len();
        if m.len() != k || m.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("matrix shape does not match wires".into()));
        }
        for (i, &w) in wires.iter().enumerate() {
            self.locate(w)?;
            if wires[..i].contains(&w) {
                return Err(Error::InvalidArgument(format!("wire {w} repeated")));
            }
        }
        let f = self.field;
        let inv = linalg::inverse(&f, m)
            .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))?;
        // x ↦ M x and z ↦ M⁻ᵀ z, stored by column for the sparse update
        let x_cols: Vec<Vec<u32>> = (0..k).map(|j| (0..k).map(|i| m[i][j] % f.p()).collect()).collect();
        let z_cols: Vec<Vec<u32>> = (0..k).map(|j| inv[j].clone()).collect();
        let id = self.merge_for(wires)?;
        let cols: Vec<usize> = wires.iter().map(|&w| self.slots[w].unwrap().1).collect();
        let block = self.block_mut(id);
        let mut acc = vec![0u32; k];
        for r in block.destab.iter_mut().chain(block.stab.iter_mut()) {
            map_columns(f.p(), &mut r.x, &cols, &x_cols, &mut acc);
            map_columns(f.p(), &mut r.z, &cols, &z_cols, &mut acc);
        }
        Ok(())
    }

    /// Conjugates the state by a Pauli operator of length `num_qupits()`.
    pub fn apply_pauli(&mut self, op: &PauliOperator) -> Result<()> {
        if op.len() != self.slots.len() {
            return Err(Error::InvalidArgument("Pauli length mismatch".into()));
        }
        let f = self.field;
        for (id, pr) in self.split_pauli(op)? {
            for s in self.block_mut(id).stab.iter_mut() {
                s.phase = f.add(s.phase, lambda(&f, &pr, s));
            }
        }
        Ok(())
    }

    /// Restrictions of `op` (without its phase) to the blocks it touches.
    fn split_pauli(&self, op: &PauliOperator) -> Result<Vec<(usize, Row)>> {
        let mut parts: Vec<(usize, Row)> = Vec::new();
        for w in op.support() {
            let (id, j) = self.locate(w)?;
            let k = match parts.iter().position(|(b, _)| *b == id) {
                Some(k) => k,
                None => {
                    parts.push((id, Row::zero(self.block(id).cols)));
                    parts.len() - 1
                }
            };
            parts[k].1.x[j] = (op.x[w] % self.field.p()) as u8;
            parts[k].1.z[j] = (op.z[w] % self.field.p()) as u8;
        }
        Ok(parts)
    }

    /// Computational-basis measurement of one wire.
    pub fn measure<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        let (id, j) = self.locate(wire)?;
        Ok(self.block_mut(id).measure(j, rng))
    }

    pub fn measure_fourier<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        self.apply(&GateOp::Fourier { wire, r: 1 })?;
        self.measure(wire, rng)
    }

    /// Measures `wire`, splits it off and returns the slot to the pool.
    pub fn discard<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        let o = self.measure(wire, rng)?;
        let (id, j) = self.locate(wire)?;
        self.slots[wire] = None;
        self.free.insert(wire);
        if self.block(id).cols == 1 {
            self.take_block(id);
            return Ok(o);
        }
        let block = self.block_mut(id);
        block.split_off(j);
        if let Some(&moved) = block.wires.get(j) {
            self.slots[moved] = Some((id, j));
        }
        Ok(o)
    }

    /// If `op` commutes with the stabilizer group, the eigenvalue exponent
    /// `c` with `op |ψ⟩ = ω^c |ψ⟩`; otherwise `None`. Free slots are `|0⟩`.
    pub fn eigenphase(&self, op: &PauliOperator) -> Option<Fe> {
        if op.len() != self.slots.len() {
            return None;
        }
        let f = self.field;
        let mut total = op.phase % f.p();
        let mut live = op.clone();
        for w in op.support() {
            if !self.is_active(w) {
                if !op.x[w].is_multiple_of(f.p()) {
                    return None;
                }
                live.x[w] = 0;
                live.z[w] = 0;
            }
        }
        for (id, pr) in self.split_pauli(&live).ok()? {
            total = f.add(total, self.block(id).eigenphase(&pr)?);
        }
        Some(total)
    }

    /// True if `op` (with its phase) lies in the stabilizer group.
    pub fn stabilizes(&self, op: &PauliOperator) -> bool {
        self.eigenphase(op) == Some(0)
    }

    /// One generator per slot, blocks in order, then `Z` on free slots.
    pub fn stabilizer_generators(&self) -> Vec<PauliOperator> {
        let m = self.slots.len();
        let mut out = Vec::with_capacity(m);
        for b in self.blocks.iter().flatten() {
            for r in &b.stab {
                let mut op = PauliOperator::identity(m);
                op.phase = r.phase;
                for (j, &w) in b.wires.iter().enumerate() {
                    op.x[w] = r.x[j] as Fe;
                    op.z[w] = r.z[j] as Fe;
                }
                out.push(op);
            }
        }
        for &w in &self.free {
            let mut op = PauliOperator::identity(m);
            op.z[w] = 1;
            out.push(op);
        }
        out
    }

    /// Generators of the stabilizer subgroup supported on `wires`, restricted
    /// to those wires (in the given order). Together they describe the
    /// reduced state on `wires`.
    pub fn reduced_generators(&self, wires: &[usize]) -> Vec<PauliOperator> {
        if wires.is_empty() {
            return Vec::new();
        }
        let local: Vec<usize> = (0..wires.len()).collect();
        self.gather(wires).reduced_generators(&local)
    }

    /// True iff the reduced state of `self` on `wires` equals that of
    /// `other` on `other_wires` (matched in order). Stabilizer reduced
    /// states are fixed by the subgroup supported on the subsystem, so this
    /// is exact: equal states are at trace distance 0.
    pub fn same_reduced_state(
        &self,
        wires: &[usize],
        other: &Tableau,
        other_wires: &[usize],
    ) -> bool {
        fn embedded(op: &PauliOperator, m: usize, wires: &[usize]) -> PauliOperator {
            let mut full = PauliOperator::identity(m);
            full.phase = op.phase;
            for (k, &w) in wires.iter().enumerate() {
                full.x[w] = op.x[k];
                full.z[w] = op.z[k];
            }
            full
        }
        if wires.len() != other_wires.len() {
            return false;
        }
        let covered = |a: &Tableau, wa: &[usize], b: &Tableau, wb: &[usize]| {
            a.reduced_generators(wa)
                .iter()
                .all(|g| b.stabilizes(&embedded(g, b.num_qupits(), wb)))
        };
        covered(self, wires, other, other_wires) && covered(other, other_wires, self, wires)
    }

    /// Dense vector of the reduced state on `wires`, which must be pure.
    pub fn pure_reduced(&self, wires: &[usize]) -> Result<DenseState> {
        for &w in wires {
            self.locate(w)?;
        }
        let local: Vec<usize> = (0..wires.len()).collect();
        self.gather(wires).pure_reduced(&local)
    }

    /// Checks the pairing relations and the slot bookkeeping; used by tests.
    pub fn check_invariants(&self) -> Result<()> {
        for (id, b) in self.blocks.iter().enumerate() {
            let Some(b) = b else { continue };
            b.check_invariants()?;
            for (j, &w) in b.wires.iter().enumerate() {
                if self.slots[w] != Some((id, j)) {
                    return Err(Error::InvalidArgument(format!("slot {w} out of sync")));
                }
            }
        }
        Ok(())
    }

    /// Amplitudes of the state over all slots (free slots sit in `|0⟩`).
    pub fn to_dense(&self) -> Result<DenseState> {
        let all: Vec<usize> = (0..self.slots.len()).collect();
        if all.is_empty() {
            return DenseState::new(self.field, 0);
        }
        DenseState::new(self.field, all.len())?;
        self.gather(&all).to_dense()
    }

    /// Applies a batch of Toffolis on pairwise distinct wires.
    ///
    /// Fails with [`Error::NotStabilizer`] when the result is not a
    /// stabilizer state; the tableau is left unchanged in that case.
    pub fn apply_basis_permutation(&mut self, gates: &[GateOp]) -> Result<()> {
        let mut wires = Vec::new();
        for g in gates {
            if g.kind() != GateKind::Toffoli {
                return Err(Error::UnsupportedGate(format!("{g} in a Toffoli batch")));
            }
            for w in g.wires() {
                self.locate(w)?;
                if wires.contains(&w) {
                    return Err(Error::InvalidArgument(format!(
                        "wire {w} reused in Toffoli batch"
                    )));
                }
                wires.push(w);
            }
        }
        if wires.is_empty() {
            return Ok(());
        }
        let mut merged = self.gather(&wires);
        let local: Vec<GateOp> = gates
            .iter()
            .map(|g| relabel(g, |w| merged.wires.iter().position(|&x| x == w).unwrap()))
            .collect();
        merged.apply_basis_permutation(&local)?;
        let mut ids: Vec<usize> = wires.iter().map(|&w| self.slots[w].unwrap().0).collect();
        ids.sort_unstable();
        ids.dedup();
        for &id in &ids {
            self.take_block(id);
        }
        self.install(ids[0], merged);
        Ok(())
    }
}
