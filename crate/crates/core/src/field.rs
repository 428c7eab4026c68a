//! Arithmetic in `Z_p` for a small odd prime `p`.
//!
//! Elements are plain `u32` values kept as canonical residues `0..p`.

use crate::error::{Error, Result};

/// The prime field `Z_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

/// Field elements are canonical residues.
pub type Fe = u32;

impl PrimeField {
    /// Builds `Z_p`. The simulators store residues in a byte, so `p < 256`.
    pub fn new(p: u32) -> Result<Self> {
        if !(3..=251).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidArgument(format!(
                "modulus {p} must be an odd prime below 256"
            )));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> Fe {
        v.rem_euclid(self.p as i64) as Fe
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        (a * b) % self.p
    }

    pub fn pow(&self, mut base: Fe, mut exp: u64) -> Fe {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, (self.p - 2) as u64))
        }
    }

    /// Division `a / b`; panics on `b = 0`, callers check first.
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b).expect("division by zero in Z_p"))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        0..self.p
    }

    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        let acc = a
            .iter()
            .zip(b)
            .fold(0u64, |acc, (&x, &y)| acc + (x as u64) * (y as u64));
        (acc % self.p as u64) as Fe
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
