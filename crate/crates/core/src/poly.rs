use crate::field::{Fe, PrimeField};

/// Univariate polynomial over `Z_p`, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, f: &PrimeField, x: Fe) -> Fe {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn mul(&self, f: &PrimeField, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(out)
    }

    /// The unique polynomial of degree `< points.len()` through the given points.
    pub fn interpolate(f: &PrimeField, xs: &[Fe], ys: &[Fe]) -> Poly {
        assert_eq!(xs.len(), ys.len());
        let mut acc = vec![0; xs.len()];
        for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
            let mut basis = Poly::new(vec![1]);
            let mut denom = 1;
            for (j, &xj) in xs.iter().enumerate() {
                if i != j {
                    basis = basis.mul(f, &Poly::new(vec![f.neg(xj), 1]));
                    denom = f.mul(denom, f.sub(xi, xj));
                }
            }
            let scale = f.div(yi, denom);
            for (k, &c) in basis.coeffs.iter().enumerate() {
                acc[k] = f.add(acc[k], f.mul(c, scale));
            }
        }
        Poly::new(acc)
    }
}

/// Lagrange weights `w_i` with `h(target) = Σ w_i h(xs[i])` for every `h` of
/// degree `< xs.len()`.
pub fn lagrange_weights(f: &PrimeField, xs: &[Fe], target: Fe) -> Vec<Fe> {
    xs.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut num = 1;
            let mut den = 1;
            for (j, &xj) in xs.iter().enumerate() {
                if i != j {
                    num = f.mul(num, f.sub(target, xj));
                    den = f.mul(den, f.sub(xi, xj));
                }
            }
            f.div(num, den)
        })
        .collect()
}
