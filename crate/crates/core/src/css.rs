//! Quantum Reed-Solomon (CSS) codes on simulated qupits.
//!
//! `𝒞^δ` encodes `|a⟩` as the uniform superposition of `V^δ` codewords
//! whose polynomial has `q(0) = a`. Its Z-type checks are `Z^h` for `h` in
//! the dual of `V^δ` and its X-type checks are `X^g` for `g ∈ V_0^δ`.
//! Block position `i` holds `q(i + 1)`.

use std::collections::BTreeSet;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::gate::{controlled_add, GateKind, GateOp};
use crate::linalg::{self, Matrix};
use crate::pauli::PauliOperator;
use crate::poly::lagrange_weights;
use crate::rs::{ReedSolomonCode, Variant};
use crate::sim::state::QuantumState;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    v: ReedSolomonCode,
}

/// A logical qupit held on `wires` (position `i` holds `q(i + 1)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    pub wires: Vec<usize>,
    pub code: CssCode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub logical: usize,
    /// Identified error `X^x Z^z` over block positions (phase 0).
    pub error: PauliOperator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalMeasurement {
    pub value: Fe,
    /// Per-wire outcomes, as they would be broadcast.
    pub word: Vec<Fe>,
    pub error_positions: Vec<usize>,
}

impl CssCode {
    pub fn new(field: PrimeField, n: usize, delta: usize) -> Result<Self> {
        if delta == 0 {
            return Err(Error::InvalidArgument("degree must be positive".into()));
        }
        Ok(Self {
            v: ReedSolomonCode::new(field, n, delta, Variant::V)?,
        })
    }

    pub fn field(&self) -> &PrimeField {
        self.v.field()
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    pub fn delta(&self) -> usize {
        self.v.delta()
    }

    pub fn dual_degree(&self) -> usize {
        self.v.dual_degree()
    }

    /// `𝒞^{δ'}` with `δ' = n - δ - 1`, the code a transversal Fourier maps to.
    pub fn dual(&self) -> Result<Self> {
        Self::new(*self.field(), self.n(), self.dual_degree())
    }

    /// Number of arbitrary single-wire errors `decode_d` identifies.
    pub fn t(&self) -> usize {
        self.v.correction_radius().min(self.delta() / 2)
    }

    /// `V^δ`, the computational-basis code.
    pub fn v_code(&self) -> &ReedSolomonCode {
        &self.v
    }

    /// `W^{δ'}`, the Fourier-basis code before rescaling.
    pub fn w_code(&self) -> ReedSolomonCode {
        ReedSolomonCode::new(*self.field(), self.n(), self.dual_degree(), Variant::W)
            .expect("dual degree is valid")
    }

    pub fn scaling(&self) -> &[Fe] {
        self.v.dual_scaling()
    }

    /// Rows `h` with `Z^h` stabilizing the code (basis of `V^⊥ = W_0^{δ'}`).
    pub fn z_checks(&self) -> Matrix {
        self.v.parity_check()
    }

    /// Rows `g` with `X^g` stabilizing the code (basis of `V_0^δ`).
    pub fn x_checks(&self) -> Matrix {
        self.v.with_variant(Variant::V0).generator()
    }

    /// Vandermonde matrix `M_ij = (i+1)^j` mapping the coefficient register
    /// `(s, r_1..r_δ, 0..0)` to the codeword.
    pub fn encoding_matrix(&self) -> Matrix {
        let f = self.field();
        (1..=self.n() as Fe)
            .map(|x| (0..self.n()).map(|j| f.pow(x, j as u64)).collect())
            .collect()
    }

    fn check_block(&self, state: &QuantumState, block: &EncodedBlock) -> Result<()> {
        if block.wires.len() != self.n() {
            return Err(Error::CodeMismatch(format!(
                "block has {} wires, code length is {}",
                block.wires.len(),
                self.n()
            )));
        }
        for &w in &block.wires {
            if !state.is_active(w) {
                return Err(Error::NoSuchWire(w));
            }
        }
        Ok(())
    }

    /// Encodes the logical qupit on `input`; randomness registers are
    /// prepared as uniform superpositions. `input` becomes position 0.
    pub fn encode(&self, state: &mut QuantumState, input: usize) -> Result<EncodedBlock> {
        if !state.is_active(input) {
            return Err(Error::NoSuchWire(input));
        }
        let mut wires = vec![input];
        wires.extend(state.allocate(self.n() - 1));
        for &w in &wires[1..=self.delta()] {
            state.apply(&GateOp::Fourier { wire: w, r: 1 })?;
        }
        state.apply_linear(&wires, &self.encoding_matrix())?;
        Ok(EncodedBlock {
            wires,
            code: self.clone(),
        })
    }

    /// Encodes the basis state `|value⟩` on fresh wires.
    pub fn encode_value(&self, state: &mut QuantumState, value: Fe) -> Result<EncodedBlock> {
        let w = state.allocate(1)[0];
        if !value.is_multiple_of(self.field().p()) {
            state.apply(&GateOp::Shift { wire: w, c: value })?;
        }
        self.encode(state, w)
    }

    /// Encodes `Σ_a |a⟩` on fresh wires.
    pub fn encode_uniform(&self, state: &mut QuantumState) -> Result<EncodedBlock> {
        let w = state.allocate(1)[0];
        state.apply(&GateOp::Fourier { wire: w, r: 1 })?;
        self.encode(state, w)
    }

    /// Full stabilizer generators of the block, as operators on the whole state.
    pub fn stabilizers(&self, block: &EncodedBlock, m: usize) -> Vec<PauliOperator> {
        let mut out = Vec::new();
        for h in self.z_checks() {
            out.push(on_block(m, &block.wires, None, Some(&h)));
        }
        for g in self.x_checks() {
            out.push(on_block(m, &block.wires, Some(&g), None));
        }
        out
    }

    /// Logical `X^c` and `Z^c` as block operators: `X^{c·1}` and `Z^{c·d}`.
    pub fn logical_x(&self, block: &EncodedBlock, m: usize, c: Fe) -> PauliOperator {
        on_block(
            m,
            &block.wires,
            Some(&vec![c % self.field().p(); self.n()]),
            None,
        )
    }

    pub fn logical_z(&self, block: &EncodedBlock, m: usize, c: Fe) -> PauliOperator {
        let f = self.field();
        let z: Vec<Fe> = self
            .scaling()
            .iter()
            .map(|&d| f.mul(d, c % f.p()))
            .collect();
        on_block(m, &block.wires, None, Some(&z))
    }

    /// Measures the X- and Z-type syndromes with ancilla circuits.
    /// Returns `(H e_x, -G_0 e_z)` for an error `X^{e_x} Z^{e_z}`.
    pub fn measure_syndromes(
        &self,
        state: &mut QuantumState,
        block: &EncodedBlock,
        rng: &mut dyn RngCore,
    ) -> Result<(Vec<Fe>, Vec<Fe>)> {
        self.check_block(state, block)?;
        let f = *self.field();
        let mut sx = Vec::new();
        for h in self.z_checks() {
            let anc = state.allocate(1)[0];
            for (i, &w) in block.wires.iter().enumerate() {
                state.apply_all(&controlled_add(&f, w, anc, h[i]))?;
            }
            sx.push(state.discard(anc, rng)?);
        }
        let mut sz = Vec::new();
        for g in self.x_checks() {
            let anc = state.allocate(1)[0];
            state.apply(&GateOp::Fourier { wire: anc, r: 1 })?;
            for (i, &w) in block.wires.iter().enumerate() {
                state.apply_all(&controlled_add(&f, anc, w, g[i]))?;
            }
            state.apply(&GateOp::FourierInverse { wire: anc, r: 1 })?;
            sz.push(state.discard(anc, rng)?);
        }
        Ok((sx, sz))
    }

    /// Identifies a Pauli error of weight at most the correction radius
    /// from its syndromes.
    pub fn identify_error(&self, sx: &[Fe], sz: &[Fe]) -> Result<PauliOperator> {
        let f = *self.field();
        let n = self.n();
        let ex = match linalg::solve(&f, &self.z_checks(), sx, n) {
            Some(w0) => error_part(&w0, &self.v.decode(&w0)?.codeword, &f),
            None => return Err(Error::DecodeFailure),
        };
        let minus: Vec<Fe> = sz.iter().map(|&s| f.neg(s)).collect();
        let ez = match linalg::solve(&f, &self.x_checks(), &minus, n) {
            Some(w0) => error_part(&w0, &self.w_code().decode(&w0)?.codeword, &f),
            None => return Err(Error::DecodeFailure),
        };
        Ok(PauliOperator {
            x: ex,
            z: ez,
            phase: 0,
        })
    }

    /// Decodes with error identification: syndromes in both bases, Pauli
    /// correction, inverse encoder. The logical qupit ends on position 0;
    /// the other block wires are released.
    pub fn decode_d(
        &self,
        state: &mut QuantumState,
        block: EncodedBlock,
        rng: &mut dyn RngCore,
    ) -> Result<DecodeOutcome> {
        let (sx, sz) = self.measure_syndromes(state, &block, rng)?;
        let error = self.identify_error(&sx, &sz)?;
        let f = *self.field();
        let m = state.num_qupits();
        let neg = |v: &[Fe]| v.iter().map(|&e| f.neg(e)).collect::<Vec<_>>();
        state.apply_pauli(&on_block(m, &block.wires, Some(&neg(&error.x)), None))?;
        state.apply_pauli(&on_block(m, &block.wires, None, Some(&neg(&error.z))))?;
        self.unencode(state, &block, rng)?;
        Ok(DecodeOutcome {
            logical: block.wires[0],
            error,
        })
    }

    /// Inverse encoder; releases the randomness and padding registers.
    fn unencode(
        &self,
        state: &mut QuantumState,
        block: &EncodedBlock,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        let f = *self.field();
        let inv = linalg::inverse(&f, &self.encoding_matrix()).expect("Vandermonde is invertible");
        state.apply_linear(&block.wires, &inv)?;
        for &w in &block.wires[1..=self.delta()] {
            state.apply(&GateOp::FourierInverse { wire: w, r: 1 })?;
            state.discard(w, rng)?;
        }
        for &w in &block.wires[self.delta() + 1..] {
            state.discard(w, rng)?;
        }
        Ok(())
    }

    /// Erasure recovery ignoring the positions in `b`: interpolates from
    /// `n - δ` positions outside `b`. Returns the wire holding the logical
    /// qupit; all other block wires are released.
    pub fn ideal_recover(
        &self,
        state: &mut QuantumState,
        block: EncodedBlock,
        b: &BTreeSet<usize>,
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        self.check_block(state, &block)?;
        let (keep, rest) = self.recovery_split(b)?;
        let kept: Vec<(usize, usize)> = keep.iter().map(|&i| (i, block.wires[i])).collect();
        let out = self.recover_subset(state, &kept, rng)?;
        for &i in &rest {
            state.discard(block.wires[i], rng)?;
        }
        Ok(out)
    }

    /// Erasure recovery from exactly `n - δ` `(position, wire)` pairs. Only
    /// these wires are touched: the first becomes the logical output and the
    /// others are discarded.
    pub fn recover_subset(
        &self,
        state: &mut QuantumState,
        kept: &[(usize, usize)],
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        let n = self.n();
        let keep: Vec<usize> = kept.iter().map(|&(i, _)| i).collect();
        let distinct: BTreeSet<usize> = keep.iter().copied().collect();
        if keep.len() != n - self.delta()
            || distinct.len() != keep.len()
            || keep.iter().any(|&i| i >= n)
        {
            return Err(Error::InvalidArgument(format!(
                "recovery needs {} distinct positions below {n}",
                n - self.delta()
            )));
        }
        let rest: Vec<usize> = (0..n).filter(|i| !distinct.contains(i)).collect();
        let wires: Vec<usize> = kept.iter().map(|&(_, w)| w).collect();
        let u = self.recovery_matrix(&keep, &rest)?;
        state.apply_linear(&wires, &u)?;
        for &w in &wires[1..] {
            state.discard(w, rng)?;
        }
        Ok(wires[0])
    }

    /// `(T, K)`: the first `n - δ` positions outside `b`, and the others.
    fn recovery_split(&self, b: &BTreeSet<usize>) -> Result<(Vec<usize>, Vec<usize>)> {
        let need = self.n() - self.delta();
        let keep: Vec<usize> = (0..self.n())
            .filter(|i| !b.contains(i))
            .take(need)
            .collect();
        if keep.len() < need {
            return Err(Error::InvalidArgument(format!(
                "cannot recover with {} positions excluded",
                b.len()
            )));
        }
        let rest = (0..self.n()).filter(|i| !keep.contains(i)).collect();
        Ok((keep, rest))
    }

    /// Linear map on the kept positions taking `q(T)` to
    /// `(q(0), q(K), 0, …, 0)`.
    fn recovery_matrix(&self, keep: &[usize], rest: &[usize]) -> Result<Matrix> {
        let f = *self.field();
        let mut points: Vec<Fe> = vec![0];
        points.extend(rest.iter().map(|&i| i as Fe + 1));
        let mut g: Matrix = keep
            .iter()
            .map(|&i| lagrange_weights(&f, &points, i as Fe + 1))
            .collect();
        // complete the δ + 1 interpolation columns to an invertible matrix
        let mut cols = points.len();
        for e in 0..keep.len() {
            if cols == keep.len() {
                break;
            }
            let mut trial = g.clone();
            for (r, row) in trial.iter_mut().enumerate() {
                row.push(Fe::from(r == e));
            }
            if linalg::rank(&f, &trial) == cols + 1 {
                g = trial;
                cols += 1;
            }
        }
        linalg::inverse(&f, &g).ok_or(Error::DecodeFailure)
    }

    /// Applies a transversal gate. `blocks` holds one block, or
    /// `[control, target]` for `Sum`. Fourier and its inverse retag the
    /// block to the dual-degree code.
    pub fn transversal_apply(
        state: &mut QuantumState,
        kind: GateKind,
        scalar: Fe,
        blocks: &mut [EncodedBlock],
    ) -> Result<()> {
        for blk in blocks.iter() {
            blk.code.check_block(state, blk)?;
        }
        let (per_position, code) = Self::transversal_gates(kind, scalar, blocks)?;
        for gates in &per_position {
            state.apply_all(gates)?;
        }
        blocks[0].code = code;
        Ok(())
    }

    /// The local gates of a transversal gate, one list per block position,
    /// and the code of `blocks[0]` afterwards.
    pub fn transversal_gates(
        kind: GateKind,
        scalar: Fe,
        blocks: &[EncodedBlock],
    ) -> Result<(Vec<Vec<GateOp>>, CssCode)> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidArgument("no blocks".into()));
        };
        let code = first.code.clone();
        let f = *code.field();
        if blocks.len() != kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} blocks",
                kind.name(),
                kind.arity()
            )));
        }
        let c = scalar % f.p();
        let wires = &first.wires;
        let d = code.scaling();
        let r = if c == 0 { 1 } else { c };
        let mut out = Vec::with_capacity(wires.len());
        let mut next = code.clone();
        match kind {
            GateKind::Shift => {
                out.extend(wires.iter().map(|&w| vec![GateOp::Shift { wire: w, c }]))
            }
            GateKind::ScalarMul => out.extend(
                wires
                    .iter()
                    .map(|&w| vec![GateOp::ScalarMul { wire: w, c }]),
            ),
            GateKind::PhaseShift => {
                // Z̄^c = ⊗ Z^{c d_i}
                out.extend(wires.iter().zip(d).map(|(&w, &di)| {
                    vec![GateOp::PhaseShift {
                        wire: w,
                        c: f.mul(c, di),
                    }]
                }))
            }
            GateKind::Sum => {
                let target = &blocks[1];
                if target.code.n() != code.n() || target.code.delta() < code.delta() {
                    return Err(Error::CodeMismatch(format!(
                        "sum from degree {} into degree {}",
                        code.delta(),
                        target.code.delta()
                    )));
                }
                out.extend(wires.iter().zip(&target.wires).map(|(&cw, &tw)| {
                    vec![GateOp::Sum {
                        control: cw,
                        target: tw,
                    }]
                }));
            }
            GateKind::Fourier => {
                for (&w, &di) in wires.iter().zip(d) {
                    let mut g = Vec::with_capacity(3);
                    if r != 1 {
                        g.push(GateOp::ScalarMul { wire: w, c: r });
                    }
                    g.push(GateOp::Fourier { wire: w, r: 1 });
                    g.push(GateOp::ScalarMul {
                        wire: w,
                        c: f.inv(di).unwrap(),
                    });
                    out.push(g);
                }
                next = code.dual()?;
            }
            GateKind::FourierInverse => {
                for (&w, &di) in wires.iter().zip(d) {
                    let mut g = vec![
                        GateOp::ScalarMul { wire: w, c: di },
                        GateOp::FourierInverse { wire: w, r: 1 },
                    ];
                    if r != 1 {
                        g.push(GateOp::ScalarMul {
                            wire: w,
                            c: f.inv(r).unwrap(),
                        });
                    }
                    out.push(g);
                }
                next = code.dual()?;
            }
            GateKind::Toffoli => {
                return Err(Error::UnsupportedGate(
                    "toffoli is not transversal on one code".into(),
                ))
            }
        }
        Ok((out, next))
    }

    /// Per-wire Toffoli `(a_i, b_i, target_i)`. Needs `a`, `b` in `𝒞^δ`
    /// and `target` in a code of degree at least `2δ`.
    pub fn transversal_toffoli(
        state: &mut QuantumState,
        a: &EncodedBlock,
        b: &EncodedBlock,
        target: &EncodedBlock,
    ) -> Result<()> {
        let n = a.code.n();
        if b.code != a.code || target.code.n() != n || target.code.delta() < 2 * a.code.delta() {
            return Err(Error::CodeMismatch(
                "toffoli needs target degree >= 2δ".into(),
            ));
        }
        for blk in [a, b, target] {
            blk.code.check_block(state, blk)?;
        }
        let layer: Vec<GateOp> = (0..n)
            .map(|i| GateOp::Toffoli {
                a: a.wires[i],
                b: b.wires[i],
                target: target.wires[i],
            })
            .collect();
        state.apply_layer(&layer)
    }

    /// Measures every wire, decodes the word in `V^δ` and returns `q(0)`.
    /// The block wires are released.
    pub fn logical_measure(
        state: &mut QuantumState,
        block: EncodedBlock,
        rng: &mut dyn RngCore,
    ) -> Result<LogicalMeasurement> {
        block.code.check_block(state, &block)?;
        let word: Vec<Fe> = block
            .wires
            .iter()
            .map(|&w| state.discard(w, rng))
            .collect::<Result<_>>()?;
        let dec = block.code.v_code().decode(&word)?;
        Ok(LogicalMeasurement {
            value: dec.secret,
            word,
            error_positions: dec.error_positions,
        })
    }

    /// Moves a `𝒞^{δ'}` block into the `𝒞^δ` block `ancilla`, which must
    /// hold an honest encoding of `Σ_a |a⟩`: SUM ancilla → block, measure
    /// the block to `c`, then apply `X^c S_{-1}` to the ancilla.
    pub fn degree_reduce(
        state: &mut QuantumState,
        block: EncodedBlock,
        ancilla: EncodedBlock,
        rng: &mut dyn RngCore,
    ) -> Result<(EncodedBlock, LogicalMeasurement)> {
        let mut pair = [ancilla, block];
        Self::transversal_apply(state, GateKind::Sum, 0, &mut pair)?;
        let [mut ancilla, block] = pair;
        let m = Self::logical_measure(state, block, rng)?;
        let f = *ancilla.code.field();
        Self::transversal_apply(
            state,
            GateKind::ScalarMul,
            f.neg(1),
            std::slice::from_mut(&mut ancilla),
        )?;
        Self::transversal_apply(
            state,
            GateKind::Shift,
            m.value,
            std::slice::from_mut(&mut ancilla),
        )?;
        Ok((ancilla, m))
    }

    /// Whether the block state lies in `𝒞_B`: every check operator supported
    /// outside `b` (block positions) stabilizes it.
    pub fn cb_member(
        &self,
        state: &QuantumState,
        block: &EncodedBlock,
        b: &BTreeSet<usize>,
    ) -> Result<bool> {
        self.check_block(state, block)?;
        let m = state.num_qupits();
        let f = *self.field();
        for h in restrict_outside(&f, &self.z_checks(), b) {
            if !state.stabilizes(&on_block(m, &block.wires, None, Some(&h)))? {
                return Ok(false);
            }
        }
        for g in restrict_outside(&f, &self.x_checks(), b) {
            if !state.stabilizes(&on_block(m, &block.wires, Some(&g), None))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn error_part(word: &[Fe], codeword: &[Fe], f: &PrimeField) -> Vec<Fe> {
    word.iter()
        .zip(codeword)
        .map(|(&w, &c)| f.sub(w, c))
        .collect()
}

/// `X^x Z^z` placed on `wires` of an `m`-qupit register.
pub fn on_block(m: usize, wires: &[usize], x: Option<&[Fe]>, z: Option<&[Fe]>) -> PauliOperator {
    let mut op = PauliOperator::identity(m);
    for (i, &w) in wires.iter().enumerate() {
        if let Some(x) = x {
            op.x[w] = x[i];
        }
        if let Some(z) = z {
            op.z[w] = z[i];
        }
    }
    op
}

/// Basis of the vectors in the row span of `rows` that vanish on `b`.
pub fn restrict_outside(f: &PrimeField, rows: &Matrix, b: &BTreeSet<usize>) -> Matrix {
    if b.is_empty() {
        return rows.clone();
    }
    let constraint: Matrix = b
        .iter()
        .map(|&j| rows.iter().map(|r| r[j]).collect())
        .collect();
    linalg::nullspace(f, &constraint, rows.len())
        .into_iter()
        .map(|y| {
            let n = rows[0].len();
            (0..n)
                .map(|i| {
                    rows.iter()
                        .zip(&y)
                        .fold(0, |acc, (r, &yk)| f.add(acc, f.mul(yk, r[i])))
                })
                .collect()
        })
        .collect()
}

/// Reversible circuit of `Sum`/`ScalarMul` gates implementing
/// `|x⟩ ↦ |M x⟩` on `wires` for invertible `M`.
pub fn linear_circuit(f: &PrimeField, m: &Matrix, wires: &[usize]) -> Result<Vec<GateOp>> {
    let k = wires.len();
    if m.len() != k || m.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidArgument(
            "matrix shape does not match wires".into(),
        ));
    }
    enum Op {
        Add { target: usize, source: usize, b: Fe },
        Scale { row: usize, c: Fe },
    }
    let mut a = m.clone();
    let mut ops = Vec::new();
    for c in 0..k {
        let piv = (c..k)
            .find(|&r| a[r][c] != 0)
            .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))?;
        if piv != c {
            for j in 0..k {
                a[c][j] = f.add(a[c][j], a[piv][j]);
            }
            ops.push(Op::Add {
                target: c,
                source: piv,
                b: 1,
            });
        }
        let s = f.inv(a[c][c]).unwrap();
        if s != 1 {
            for v in a[c].iter_mut() {
                *v = f.mul(*v, s);
            }
            ops.push(Op::Scale { row: c, c: s });
        }
        for r in 0..k {
            let v = a[r][c];
            if r != c && v != 0 {
                for j in 0..k {
                    a[r][j] = f.sub(a[r][j], f.mul(v, a[c][j]));
                }
                ops.push(Op::Add {
                    target: r,
                    source: c,
                    b: f.neg(v),
                });
            }
        }
    }
    // E_k ⋯ E_1 M = I, so M = E_1⁻¹ ⋯ E_k⁻¹: emit inverses in reverse
    let mut gates = Vec::new();
    for op in ops.iter().rev() {
        match *op {
            Op::Add { target, source, b } => {
                gates.extend(controlled_add(f, wires[source], wires[target], f.neg(b)))
            }
            Op::Scale { row, c } => gates.push(GateOp::ScalarMul {
                wire: wires[row],
                c: f.inv(c).unwrap(),
            }),
        }
    }
    Ok(gates)
}
