//! Dense state vector over `p^m` amplitudes. Used as a reference oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::gate::GateOp;
use crate::pauli::PauliOperator;

pub const DENSE_LIMIT: u128 = 20_000_000;

#[derive(Clone, Debug)]
pub struct DenseState {
    field: PrimeField,
    m: usize,
    amps: Vec<Complex64>,
}

pub fn omega_pow(p: u32, e: u64) -> Complex64 {
    let e = e % p as u64;
    Complex64::from_polar(1.0, 2.0 * PI * e as f64 / p as f64)
}

fn dimension(p: u32, m: usize) -> Result<usize> {
    let dim = (p as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if dim > DENSE_LIMIT {
        return Err(Error::OracleTooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    Ok(dim as usize)
}

impl DenseState {
    /// `|0…0⟩` on `m` qupits.
    pub fn new(field: PrimeField, m: usize) -> Result<Self> {
        Self::basis(field, &vec![0; m])
    }

    pub fn basis(field: PrimeField, digits: &[Fe]) -> Result<Self> {
        let dim = dimension(field.p(), digits.len())?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let s = Self {
            field,
            m: digits.len(),
            amps: Vec::new(),
        };
        amps[s.index(digits)] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, ..s })
    }

    pub fn from_amplitudes(field: PrimeField, m: usize, amps: Vec<Complex64>) -> Result<Self> {
        let dim = dimension(field.p(), m)?;
        if amps.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "expected {dim} amplitudes, got {}",
                amps.len()
            )));
        }
        Ok(Self { field, m, amps })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn num_qupits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn index(&self, digits: &[Fe]) -> usize {
        let p = self.field.p() as usize;
        digits.iter().rev().fold(0, |acc, &d| acc * p + d as usize)
    }

    pub fn digits(&self, mut idx: usize) -> Vec<Fe> {
        let p = self.field.p() as usize;
        (0..self.m)
            .map(|_| {
                let d = (idx % p) as Fe;
                idx /= p;
                d
            })
            .collect()
    }

    fn stride(&self, wire: usize) -> usize {
        (self.field.p() as usize).pow(wire as u32)
    }

    fn digit(&self, idx: usize, wire: usize) -> Fe {
        ((idx / self.stride(wire)) % self.field.p() as usize) as Fe
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.m {
            Err(Error::NoSuchWire(wire))
        } else {
            Ok(())
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a basis permutation with per-basis phases `x ↦ ω^{phase(x)} |perm(x)⟩`.
    fn permute(&mut self, map: impl Fn(&mut Vec<Fe>) -> u64) {
        let p = self.field.p();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let mut d = self.digits(idx);
            let ph = map(&mut d);
            out[self.index(&d)] += a * omega_pow(p, ph);
        }
        self.amps = out;
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(&self.field)?;
        for w in gate.wires() {
            self.check_wire(w)?;
        }
        let f = self.field;
        match *gate {
            GateOp::Shift { wire, c } => self.permute(|d| {
                d[wire] = f.add(d[wire], c % f.p());
                0
            }),
            GateOp::Sum { control, target } => self.permute(|d| {
                d[target] = f.add(d[target], d[control]);
                0
            }),
            GateOp::ScalarMul { wire, c } => self.permute(|d| {
                d[wire] = f.mul(d[wire], c % f.p());
                0
            }),
            GateOp::PhaseShift { wire, c } => self.permute(|d| f.mul(c % f.p(), d[wire]) as u64),
            GateOp::Toffoli { a, b, target } => self.permute(|d| {
                d[target] = f.add(d[target], f.mul(d[a], d[b]));
                0
            }),
            GateOp::Fourier { wire, r } => self.fourier(wire, r % f.p()),
            GateOp::FourierInverse { wire, r } => self.fourier(wire, f.neg(r % f.p())),
        }
        Ok(())
    }

    /// `|a⟩ ↦ p^{-1/2} Σ_b ω^{r a b} |b⟩`; `F_r^{-1} = F_{-r}`.
    fn fourier(&mut self, wire: usize, r: Fe) {
        let p = self.field.p();
        let stride = self.stride(wire);
        let scale = 1.0 / (p as f64).sqrt();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let a = self.digit(idx, wire);
            let base = idx - a as usize * stride;
            for b in 0..p {
                let ph = self.field.mul(self.field.mul(r, a), b) as u64;
                out[base + b as usize * stride] += amp * omega_pow(p, ph) * scale;
            }
        }
        self.amps = out;
    }

    pub fn apply_all(&mut self, gates: &[GateOp]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(g))
    }

    pub fn apply_pauli(&mut self, op: &PauliOperator) -> Result<()> {
        if op.len() != self.m {
            return Err(Error::InvalidArgument("Pauli length mismatch".into()));
        }
        let f = self.field;
        // ω^c X^x Z^z |d⟩ = ω^{c + z·d} |d + x⟩
        self.permute(|d| {
            let ph = f.add(op.phase, f.dot(&op.z, d));
            for (di, &xi) in d.iter_mut().zip(&op.x) {
                *di = f.add(*di, xi);
            }
            ph as u64
        });
        Ok(())
    }

    /// Born distribution of one wire.
    pub fn wire_distribution(&self, wire: usize) -> Result<Vec<f64>> {
        self.check_wire(wire)?;
        let mut probs = vec![0.0; self.field.p() as usize];
        for (idx, a) in self.amps.iter().enumerate() {
            probs[self.digit(idx, wire) as usize] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Born distribution over full basis strings, indexed like the amplitudes.
    pub fn distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        let probs = self.wire_distribution(wire)?;
        let outcome = sample(&probs, rng);
        let keep = probs[outcome as usize].sqrt();
        for idx in 0..self.amps.len() {
            if self.digit(idx, wire) == outcome {
                self.amps[idx] /= keep;
            } else {
                self.amps[idx] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Projects `wire` onto `|outcome⟩` and renormalizes; returns the Born
    /// probability of that outcome.
    pub fn project(&mut self, wire: usize, outcome: Fe) -> Result<f64> {
        let prob = self.wire_distribution(wire)?[outcome as usize];
        if prob <= 0.0 {
            return Ok(0.0);
        }
        let keep = prob.sqrt();
        for idx in 0..self.amps.len() {
            if self.digit(idx, wire) == outcome {
                self.amps[idx] /= keep;
            } else {
                self.amps[idx] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(prob)
    }

    /// Largest amplitude difference after aligning global phases.
    pub fn distance_up_to_phase(&self, other: &DenseState) -> f64 {
        let ip = self.inner(other);
        let rot = if ip.norm() > 0.0 {
            ip.conj() / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b * rot).norm())
            .fold(0.0, f64::max)
    }

    /// Trace distance between two normalized pure states. Computed from the
    /// phase-aligned Euclidean distance `d` as `d √(1 − d²/4)`, which stays
    /// accurate near zero where `√(1 − F)` loses all precision.
    pub fn trace_distance(&self, other: &DenseState) -> f64 {
        let ip = self.inner(other);
        let rot = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let d2: f64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * rot - b).norm_sqr())
            .sum();
        (d2 * (1.0 - d2 / 4.0)).max(0.0).sqrt()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Tensor product `self ⊗ other` with `other`'s wires appended.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        let m = self.m + other.m;
        dimension(self.field.p(), m)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState {
            field: self.field,
            m,
            amps,
        })
    }
}

/// Draws an index from a (not necessarily normalized) distribution.
pub fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Fe {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &q) in probs.iter().enumerate() {
        if q <= 0.0 {
            continue;
        }
        if u < q {
            return i as Fe;
        }
        u -= q;
    }
    probs.iter().rposition(|&q| q > 0.0).unwrap_or(0) as Fe
}

/// Dense `p × p` matrix of a single-qupit gate, `m[row][col] = ⟨row|G|col⟩`.
pub fn single_qupit_matrix(field: PrimeField, gate: &GateOp) -> Result<Vec<Vec<Complex64>>> {
    let p = field.p() as usize;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); p]; p];
    for col in 0..p {
        let mut s = DenseState::basis(field, &[col as Fe])?;
        s.apply(gate)?;
        for (row, a) in s.amps.iter().enumerate() {
            m[row][col] = *a;
        }
    }
    Ok(m)
}
