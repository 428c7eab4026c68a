//! Generalized Pauli operators `ω^c X^{x_1} Z^{z_1} ⊗ … ⊗ X^{x_m} Z^{z_m}`.

use crate::field::{Fe, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    pub x: Vec<Fe>,
    pub z: Vec<Fe>,
    /// Exponent of `ω = exp(2πi/p)`.
    pub phase: Fe,
}

impl PauliOperator {
    pub fn identity(m: usize) -> Self {
        Self {
            x: vec![0; m],
            z: vec![0; m],
            phase: 0,
        }
    }

    /// `X^a Z^b` on wire `wire` of an `m`-qupit register.
    pub fn single(m: usize, wire: usize, a: Fe, b: Fe) -> Self {
        let mut op = Self::identity(m);
        op.x[wire] = a;
        op.z[wire] = b;
        op
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .filter(|(&a, &b)| a != 0 || b != 0)
            .count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.x[i] != 0 || self.z[i] != 0)
            .collect()
    }

    /// `self · other`, using `(X^a Z^b)(X^c Z^d) = ω^{bc} X^{a+c} Z^{b+d}`.
    pub fn compose(&self, f: &PrimeField, other: &Self) -> Self {
        let phase = f.add(f.add(self.phase, other.phase), f.dot(&self.z, &other.x));
        Self {
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
            z: self
                .z
                .iter()
                .zip(&other.z)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
            phase,
        }
    }

    pub fn pow(&self, f: &PrimeField, e: u64) -> Self {
        let e_f = (e % f.p() as u64) as Fe;
        // (X^a Z^b)^e = ω^{(a·b) e(e-1)/2} X^{ea} Z^{eb}
        let tri = ((e * e.saturating_sub(1) / 2) % f.p() as u64) as Fe;
        let phase = f.add(f.mul(self.phase, e_f), f.mul(f.dot(&self.x, &self.z), tri));
        Self {
            x: self.x.iter().map(|&a| f.mul(a, e_f)).collect(),
            z: self.z.iter().map(|&b| f.mul(b, e_f)).collect(),
            phase,
        }
    }

    pub fn inverse(&self, f: &PrimeField) -> Self {
        self.pow(f, (f.p() - 1) as u64)
    }

    /// Symplectic form `λ` with `P Q = ω^{λ(P,Q)} Q P`.
    pub fn commutation(&self, f: &PrimeField, other: &Self) -> Fe {
        f.sub(f.dot(&self.z, &other.x), f.dot(&self.x, &other.z))
    }

    pub fn commutes_with(&self, f: &PrimeField, other: &Self) -> bool {
        self.commutation(f, other) == 0
    }

    /// True if equal up to the global phase.
    pub fn same_up_to_phase(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_single(p: u32) -> Vec<PauliOperator> {
        let mut v = Vec::new();
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    v.push(PauliOperator {
                        x: vec![a],
                        z: vec![b],
                        phase: c,
                    });
                }
            }
        }
        v
    }

    #[test]
    fn composition_is_associative_and_order_p() {
        let f = PrimeField::new(7).unwrap();
        let ops = all_single(7);
        let sample: Vec<_> = ops.iter().step_by(17).collect();
        for a in &sample {
            for b in &sample {
                for c in &sample {
                    let l = a.compose(&f, b).compose(&f, c);
                    let r = a.compose(&f, &b.compose(&f, c));
                    assert_eq!(l, r);
                }
            }
        }
        for a in &ops {
            let mut acc = PauliOperator::identity(1);
            for _ in 0..7 {
                acc = acc.compose(&f, a);
            }
            assert_eq!(acc, PauliOperator::identity(1), "{a:?}");
            assert_eq!(a.pow(&f, 7), PauliOperator::identity(1));
            assert_eq!(a.compose(&f, &a.inverse(&f)), PauliOperator::identity(1));
        }
    }

    #[test]
    fn commutation_matches_products() {
        let f = PrimeField::new(7).unwrap();
        let ops = all_single(7);
        for a in ops.iter().step_by(7) {
            for b in ops.iter().step_by(7) {
                let ab = a.compose(&f, b);
                let mut ba = b.compose(&f, a);
                ba.phase = f.add(ba.phase, a.commutation(&f, b));
                assert_eq!(ab, ba);
            }
        }
        let zx = PauliOperator::single(1, 0, 0, 1).compose(&f, &PauliOperator::single(1, 0, 1, 0));
        assert_eq!(
            zx,
            PauliOperator {
                x: vec![1],
                z: vec![1],
                phase: 1
            }
        );
    }

    #[test]
    fn weight_counts_nontrivial_factors() {
        let mut p = PauliOperator::identity(4);
        p.x[1] = 2;
        p.z[3] = 1;
        assert_eq!(p.weight(), 2);
        assert_eq!(p.support(), vec![1, 3]);
    }
}
