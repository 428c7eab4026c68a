//! Sparse amplitude map keyed by basis strings.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::Rng;

use super::dense::{omega_pow, sample, DenseState};
use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::gate::GateOp;
use crate::pauli::PauliOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseConfig {
    /// Amplitudes with modulus below this are dropped after each gate.
    pub prune_threshold: f64,
    /// Largest number of stored terms a Fourier gate may produce.
    pub support_cap: usize,
}

impl Default for SparseConfig {
    fn default() -> Self {
        Self {
            prune_threshold: 1e-12,
            support_cap: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SparseVector {
    field: PrimeField,
    m: usize,
    config: SparseConfig,
    amps: BTreeMap<Vec<u8>, Complex64>,
    free: BTreeSet<usize>,
}

impl SparseVector {
    pub fn new(field: PrimeField, m: usize) -> Self {
        Self::basis(field, &vec![0; m])
    }

    pub fn basis(field: PrimeField, digits: &[Fe]) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(
            digits.iter().map(|&d| d as u8).collect(),
            Complex64::new(1.0, 0.0),
        );
        Self {
            field,
            m: digits.len(),
            config: SparseConfig::default(),
            amps,
            free: BTreeSet::new(),
        }
    }

    pub fn with_config(mut self, config: SparseConfig) -> Self {
        self.config = config;
        self
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn num_qupits(&self) -> usize {
        self.m
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &Complex64)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, digits: &[Fe]) -> Complex64 {
        let key: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
        self.amps.get(&key).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Hands out `k` wires in `|0⟩`, reusing discarded positions lowest
    /// first and appending the rest.
    pub fn allocate(&mut self, k: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            match self.free.pop_first() {
                Some(w) => out.push(w),
                None => break,
            }
        }
        let extra = k - out.len();
        if extra > 0 {
            let old = std::mem::take(&mut self.amps);
            self.amps = old
                .into_iter()
                .map(|(mut key, a)| {
                    key.extend(std::iter::repeat_n(0, extra));
                    (key, a)
                })
                .collect();
            out.extend(self.m..self.m + extra);
            self.m += extra;
        }
        out
    }

    pub fn is_active(&self, wire: usize) -> bool {
        wire < self.m && !self.free.contains(&wire)
    }

    /// Measures `wire`, resets it to `|0⟩` and returns the position to the pool.
    pub fn discard<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        let o = self.measure(wire, rng)?;
        if o != 0 {
            self.apply(&GateOp::Shift {
                wire,
                c: self.field.neg(o),
            })?;
        }
        self.free.insert(wire);
        Ok(o)
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if !self.is_active(wire) {
            Err(Error::NoSuchWire(wire))
        } else {
            Ok(())
        }
    }

    fn prune(&mut self) {
        let t = self.config.prune_threshold;
        self.amps.retain(|_, a| a.norm() >= t);
    }

    fn permute(&mut self, map: impl Fn(&mut Vec<u8>) -> u64) {
        let p = self.field.p();
        let old = std::mem::take(&mut self.amps);
        for (mut key, a) in old {
            let ph = map(&mut key);
            *self.amps.entry(key).or_default() += a * omega_pow(p, ph);
        }
        self.prune();
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(&self.field)?;
        for w in gate.wires() {
            self.check_wire(w)?;
        }
        let f = self.field;
        let g = |v: u8| v as Fe;
        match *gate {
            GateOp::Shift { wire, c } => self.permute(|k| {
                k[wire] = f.add(g(k[wire]), c % f.p()) as u8;
                0
            }),
            GateOp::Sum { control, target } => self.permute(|k| {
                k[target] = f.add(g(k[target]), g(k[control])) as u8;
                0
            }),
            GateOp::ScalarMul { wire, c } => self.permute(|k| {
                k[wire] = f.mul(g(k[wire]), c % f.p()) as u8;
                0
            }),
            GateOp::PhaseShift { wire, c } => self.permute(|k| f.mul(c % f.p(), g(k[wire])) as u64),
            GateOp::Toffoli { a, b, target } => self.permute(|k| {
                k[target] = f.add(g(k[target]), f.mul(g(k[a]), g(k[b]))) as u8;
                0
            }),
            GateOp::Fourier { wire, r } => self.fourier(wire, r % f.p())?,
            GateOp::FourierInverse { wire, r } => self.fourier(wire, f.neg(r % f.p()))?,
        }
        Ok(())
    }

    fn fourier(&mut self, wire: usize, r: Fe) -> Result<()> {
        let p = self.field.p();
        let cap = self.config.support_cap;
        // merged support is p × (distinct keys with `wire` cleared)
        if self.amps.len().saturating_mul(p as usize) > cap {
            let rest: BTreeSet<Vec<u8>> = self
                .amps
                .keys()
                .map(|k| {
                    let mut k = k.clone();
                    k[wire] = 0;
                    k
                })
                .collect();
            if rest.len() * p as usize > cap {
                return Err(Error::SupportOverflow { cap });
            }
        }
        let scale = 1.0 / (p as f64).sqrt();
        let old = std::mem::take(&mut self.amps);
        for (key, amp) in old {
            let a = key[wire] as Fe;
            for b in 0..p {
                let mut k = key.clone();
                k[wire] = b as u8;
                let ph = self.field.mul(self.field.mul(r, a), b) as u64;
                *self.amps.entry(k).or_default() += amp * omega_pow(p, ph) * scale;
            }
        }
        self.prune();
        Ok(())
    }

    pub fn apply_pauli(&mut self, op: &PauliOperator) -> Result<()> {
        if op.len() != self.m {
            return Err(Error::InvalidArgument("Pauli length mismatch".into()));
        }
        let f = self.field;
        self.permute(|k| {
            let digits: Vec<Fe> = k.iter().map(|&v| v as Fe).collect();
            let ph = f.add(op.phase, f.dot(&op.z, &digits));
            for (kv, &xi) in k.iter_mut().zip(&op.x) {
                *kv = f.add(*kv as Fe, xi) as u8;
            }
            ph as u64
        });
        Ok(())
    }

    pub fn wire_distribution(&self, wire: usize) -> Result<Vec<f64>> {
        self.check_wire(wire)?;
        let mut probs = vec![0.0; self.field.p() as usize];
        for (k, a) in &self.amps {
            probs[k[wire] as usize] += a.norm_sqr();
        }
        Ok(probs)
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        let probs = self.wire_distribution(wire)?;
        let outcome = sample(&probs, rng);
        let keep = probs[outcome as usize].sqrt();
        self.amps.retain(|k, _| k[wire] as Fe == outcome);
        for a in self.amps.values_mut() {
            *a /= keep;
        }
        Ok(outcome)
    }

    pub fn measure_fourier<R: Rng + ?Sized>(&mut self, wire: usize, rng: &mut R) -> Result<Fe> {
        self.apply(&GateOp::Fourier { wire, r: 1 })?;
        self.measure(wire, rng)
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, op: &PauliOperator) -> Result<Complex64> {
        if op.len() != self.m {
            return Err(Error::InvalidArgument("Pauli length mismatch".into()));
        }
        let f = self.field;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.amps {
            let digits: Vec<Fe> = k.iter().map(|&v| v as Fe).collect();
            let ph = f.add(op.phase, f.dot(&op.z, &digits));
            let y: Vec<u8> = digits
                .iter()
                .zip(&op.x)
                .map(|(&d, &x)| f.add(d, x) as u8)
                .collect();
            if let Some(b) = self.amps.get(&y) {
                acc += b.conj() * a * omega_pow(f.p(), ph as u64);
            }
        }
        Ok(acc)
    }

    /// State of `wires` conditioned on the most likely basis string of the
    /// other wires; equals the reduced state when `wires` is unentangled
    /// with the rest.
    pub fn conditional_state(&self, wires: &[usize]) -> Result<DenseState> {
        for &w in wires {
            self.check_wire(w)?;
        }
        let (top, _) = self
            .amps
            .iter()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .ok_or(Error::InvalidArgument("empty state".into()))?;
        let inside: BTreeSet<usize> = wires.iter().copied().collect();
        let mut out = DenseState::new(self.field, wires.len())?;
        let mut amps = vec![Complex64::new(0.0, 0.0); out.amplitudes().len()];
        for (k, a) in &self.amps {
            if (0..self.m).any(|j| !inside.contains(&j) && k[j] != top[j]) {
                continue;
            }
            let digits: Vec<Fe> = wires.iter().map(|&w| k[w] as Fe).collect();
            amps[out.index(&digits)] = *a;
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        out = DenseState::from_amplitudes(self.field, wires.len(), amps)?;
        Ok(out)
    }

    pub fn inner(&self, other: &SparseVector) -> Complex64 {
        self.amps
            .iter()
            .filter_map(|(k, a)| other.amps.get(k).map(|b| a.conj() * b))
            .sum()
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        let mut d = DenseState::new(self.field, self.m)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); d.amplitudes().len()];
        for (k, a) in &self.amps {
            let digits: Vec<Fe> = k.iter().map(|&v| v as Fe).collect();
            amps[d.index(&digits)] = *a;
        }
        d = DenseState::from_amplitudes(self.field, self.m, amps)?;
        Ok(d)
    }

    pub fn from_dense(dense: &DenseState) -> Self {
        let mut amps = BTreeMap::new();
        for (idx, a) in dense.amplitudes().iter().enumerate() {
            if a.norm() >= SparseConfig::default().prune_threshold {
                amps.insert(dense.digits(idx).iter().map(|&d| d as u8).collect(), *a);
            }
        }
        Self {
            field: *dense.field(),
            m: dense.num_qupits(),
            config: SparseConfig::default(),
            amps,
            free: BTreeSet::new(),
        }
    }
}
