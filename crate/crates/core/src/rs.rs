//! Classical Reed-Solomon codes over `Z_p` evaluated at the points `1..=n`,
//! their rescaled duals, decoding, and neighborhood tests.
//!
//! Positions are 0-based in this API: position `i` holds `q(i + 1)`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::linalg::{self, Matrix};
use crate::poly::{lagrange_weights, Poly};

/// Which member of the code family a [`ReedSolomonCode`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Evaluations of polynomials of degree at most `delta`.
    V,
    /// `V` restricted to polynomials vanishing at 0.
    V0,
    /// `V` rescaled coordinatewise by the dual constants.
    W,
    /// `V0` rescaled coordinatewise by the dual constants.
    W0,
}

impl Variant {
    fn zero_constrained(self) -> bool {
        matches!(self, Variant::V0 | Variant::W0)
    }

    fn scaled(self) -> bool {
        matches!(self, Variant::W | Variant::W0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReedSolomonCode {
    field: PrimeField,
    n: usize,
    delta: usize,
    variant: Variant,
    d: Vec<Fe>,
}

/// Output of [`ReedSolomonCode::decode`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    /// `q(0)` of the nearest codeword's polynomial (after unscaling for `W`).
    pub secret: Fe,
    pub codeword: Vec<Fe>,
    /// Support of the minimum-weight error, ascending.
    pub error_positions: Vec<usize>,
    /// `word - codeword` on `error_positions`.
    pub error_values: Vec<Fe>,
}

/// Per-property outcome of [`two_good_check`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwoGoodReport {
    pub apparent_cheaters_are_real: bool,
    pub branches_consistent: bool,
    pub root_consistent: bool,
    /// Interpolated value of each branch outside `B` (property 2).
    pub branch_values: Vec<Option<Fe>>,
    pub failures: Vec<String>,
}

impl TwoGoodReport {
    pub fn holds(&self) -> bool {
        self.apparent_cheaters_are_real && self.branches_consistent && self.root_consistent
    }
}

/// Scaling constants `d_1..d_n` such that `{(d_i w_i) : w ∈ V_0^{δ'}}` is the
/// dual of `V^δ`. They are the Lagrange weights of the points `1..=n` at 0,
/// so they depend only on `n`; `delta` is validated for the caller.
pub fn dual_constants(field: &PrimeField, n: usize, delta: usize) -> Result<Vec<Fe>> {
    if n == 0 || n as u32 >= field.p() {
        return Err(Error::InvalidArgument(format!(
            "need 0 < n < p, got n={n}, p={}",
            field.p()
        )));
    }
    if delta >= n {
        return Err(Error::InvalidArgument(format!(
            "need delta < n, got {delta} >= {n}"
        )));
    }
    let xs: Vec<Fe> = (1..=n as Fe).collect();
    Ok(lagrange_weights(field, &xs, 0))
}

impl ReedSolomonCode {
    pub fn new(field: PrimeField, n: usize, delta: usize, variant: Variant) -> Result<Self> {
        let d = dual_constants(&field, n, delta)?;
        Ok(Self {
            field,
            n,
            delta,
            variant,
            d,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dual_scaling(&self) -> &[Fe] {
        &self.d
    }

    /// `δ' = n - δ - 1`.
    pub fn dual_degree(&self) -> usize {
        self.n - self.delta - 1
    }

    /// Same evaluation points and degree bound, other variant.
    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }

    pub fn dimension(&self) -> usize {
        if self.variant.zero_constrained() {
            self.delta
        } else {
            self.delta + 1
        }
    }

    /// Largest error weight `decode` is guaranteed to correct.
    pub fn correction_radius(&self) -> usize {
        (self.n - self.delta - 1) / 2
    }

    fn scale(&self, word: &[Fe]) -> Vec<Fe> {
        if self.variant.scaled() {
            word.iter()
                .zip(&self.d)
                .map(|(&w, &d)| self.field.mul(w, d))
                .collect()
        } else {
            word.to_vec()
        }
    }

    fn unscale(&self, word: &[Fe]) -> Vec<Fe> {
        if self.variant.scaled() {
            word.iter()
                .zip(&self.d)
                .map(|(&w, &d)| self.field.div(w, d))
                .collect()
        } else {
            word.to_vec()
        }
    }

    fn check_len(&self, word: &[Fe]) -> Result<()> {
        if word.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "word has length {}, code length is {}",
                word.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Encodes `secret` with the polynomial `secret + Σ r_k x^k`.
    pub fn encode(&self, secret: Fe, randomness: &[Fe]) -> Result<Vec<Fe>> {
        if randomness.len() != self.delta {
            return Err(Error::InvalidArgument(format!(
                "expected {} random coefficients, got {}",
                self.delta,
                randomness.len()
            )));
        }
        if self.variant.zero_constrained() && secret != 0 {
            return Err(Error::InvalidArgument(
                "zero-constrained code cannot encode a nonzero secret".into(),
            ));
        }
        let mut coeffs = vec![secret];
        coeffs.extend_from_slice(randomness);
        let q = Poly::new(coeffs);
        let word: Vec<Fe> = (1..=self.n as Fe).map(|x| q.eval(&self.field, x)).collect();
        Ok(self.scale(&word))
    }

    /// Generator matrix; rows span the code.
    pub fn generator(&self) -> Matrix {
        let start = usize::from(self.variant.zero_constrained());
        (start..=self.delta)
            .map(|k| {
                let row: Vec<Fe> = (1..=self.n as Fe)
                    .map(|x| self.field.pow(x, k as u64))
                    .collect();
                self.scale(&row)
            })
            .collect()
    }

    /// Parity-check matrix; rows span the dual code.
    pub fn parity_check(&self) -> Matrix {
        linalg::nullspace(&self.field, &self.generator(), self.n)
    }

    /// Polynomial of degree `<= delta` through `(pos + 1, value)` pairs (and
    /// through `(0, 0)` for zero-constrained variants), if one exists. When
    /// the points underdetermine it, some fitting polynomial is returned.
    fn fit(&self, positions: &[usize], unscaled: &[Fe]) -> Option<Poly> {
        let f = &self.field;
        let mut xs: Vec<Fe> = Vec::new();
        let mut ys: Vec<Fe> = Vec::new();
        if self.variant.zero_constrained() {
            xs.push(0);
            ys.push(0);
        }
        for &i in positions {
            xs.push(i as Fe + 1);
            ys.push(unscaled[i]);
        }
        let basis = self.delta + 1;
        if xs.len() <= basis {
            // pad with zero values at unused points to pin down one solution
            let mut px = xs.clone();
            let mut py = ys.clone();
            let mut extra = (1..f.p()).filter(|x| !xs.contains(x));
            while px.len() < basis {
                let x = extra.next()?;
                px.push(x);
                py.push(0);
            }
            return Some(Poly::interpolate(f, &px, &py));
        }
        let q = Poly::interpolate(f, &xs[..basis], &ys[..basis]);
        xs[basis..]
            .iter()
            .zip(&ys[basis..])
            .all(|(&x, &y)| q.eval(f, x) == y)
            .then_some(q)
    }

    fn codeword_of(&self, q: &Poly) -> Vec<Fe> {
        let word: Vec<Fe> = (1..=self.n as Fe).map(|x| q.eval(&self.field, x)).collect();
        self.scale(&word)
    }

    pub fn contains(&self, word: &[Fe]) -> bool {
        word.len() == self.n && self.in_neighborhood(word, &BTreeSet::new())
    }

    /// Nearest-codeword decoding by trying every error support up to the
    /// correction radius.
    pub fn decode(&self, word: &[Fe]) -> Result<Decoded> {
        self.decode_with_erasures(word, &BTreeSet::new())
    }

    /// Like [`decode`](Self::decode) but ignoring the positions in `erased`;
    /// the radius shrinks to `(n - |erased| - delta - 1) / 2`. Erased positions
    /// never appear in the reported error support.
    pub fn decode_with_erasures(&self, word: &[Fe], erased: &BTreeSet<usize>) -> Result<Decoded> {
        self.check_len(word)?;
        let live: Vec<usize> = (0..self.n).filter(|i| !erased.contains(i)).collect();
        let slack = live.len() as isize - self.delta as isize - 1;
        if slack < 0 {
            return Err(Error::DecodeFailure);
        }
        let radius = (slack / 2) as usize;
        let unscaled = self.unscale(word);
        for weight in 0..=radius {
            let mut found = None;
            for_each_subset(&live, weight, &mut |support| {
                let keep: Vec<usize> = live
                    .iter()
                    .copied()
                    .filter(|i| !support.contains(i))
                    .collect();
                match self.fit(&keep, &unscaled) {
                    Some(q) => {
                        found = Some((support.to_vec(), q));
                        false
                    }
                    None => true,
                }
            });
            if let Some((support, q)) = found {
                let codeword = self.codeword_of(&q);
                let error_values = support
                    .iter()
                    .map(|&i| self.field.sub(word[i], codeword[i]))
                    .collect();
                return Ok(Decoded {
                    secret: q.eval(&self.field, 0),
                    codeword,
                    error_positions: support,
                    error_values,
                });
            }
        }
        Err(Error::DecodeFailure)
    }

    /// Lagrange interpolation of `q(0)` from the given positions only.
    ///
    /// With more than `delta + 1` positions the restriction is checked for
    /// consistency; with exactly `delta + 1` the inputs are trusted.
    pub fn erasure_interpolate(&self, word: &[Fe], positions: &BTreeSet<usize>) -> Result<Fe> {
        self.check_len(word)?;
        if positions.len() < self.delta + 1 || positions.iter().any(|&i| i >= self.n) {
            return Err(Error::InvalidArgument(format!(
                "need at least {} in-range positions",
                self.delta + 1
            )));
        }
        let pos: Vec<usize> = positions.iter().copied().collect();
        let unscaled = self.unscale(word);
        let q = if self.variant.zero_constrained() {
            self.fit(&pos, &unscaled).ok_or(Error::InconsistentShares)?
        } else {
            let f = &self.field;
            let xs: Vec<Fe> = pos.iter().map(|&i| i as Fe + 1).collect();
            let ys: Vec<Fe> = pos.iter().map(|&i| unscaled[i]).collect();
            let b = self.delta + 1;
            let q = Poly::interpolate(f, &xs[..b], &ys[..b]);
            if xs[b..]
                .iter()
                .zip(&ys[b..])
                .any(|(&x, &y)| q.eval(f, x) != y)
            {
                return Err(Error::InconsistentShares);
            }
            q
        };
        Ok(q.eval(&self.field, 0))
    }

    /// True iff some codeword differs from `word` only inside `b`.
    pub fn in_neighborhood(&self, word: &[Fe], b: &BTreeSet<usize>) -> bool {
        if word.len() != self.n {
            return false;
        }
        let keep: Vec<usize> = (0..self.n).filter(|i| !b.contains(i)).collect();
        self.fit(&keep, &self.unscale(word)).is_some()
    }
}

/// Calls `visit` on every `k`-subset of `items` (ascending order) until it
/// returns `false`.
pub fn for_each_subset(items: &[usize], k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            let go = rec(items, k, i + 1, cur, visit);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), visit);
}

/// Checks the three consistency properties of an `n × n` share tree, where
/// `tree[i][j]` is leaf `j` of branch `i` (held by player `j`).
pub fn two_good_check(
    tree: &[Vec<Fe>],
    code: &ReedSolomonCode,
    b: &BTreeSet<usize>,
    b_sets: &[BTreeSet<usize>],
    cheaters: &BTreeSet<usize>,
) -> TwoGoodReport {
    let n = code.n();
    let mut report = TwoGoodReport {
        apparent_cheaters_are_real: true,
        branches_consistent: true,
        root_consistent: true,
        branch_values: vec![None; n],
        failures: Vec::new(),
    };
    for i in (0..n).filter(|i| !cheaters.contains(i)) {
        if !b_sets[i].is_subset(cheaters) {
            report.apparent_cheaters_are_real = false;
            report
                .failures
                .push(format!("property 1: B_{i} names an honest player"));
        }
    }
    for i in (0..n).filter(|i| !b.contains(i)) {
        let ignore: BTreeSet<usize> = b_sets[i].union(cheaters).copied().collect();
        if !code.in_neighborhood(&tree[i], &ignore) {
            report.branches_consistent = false;
            report.failures.push(format!(
                "property 2: branch {i} honest leaves are inconsistent"
            ));
            continue;
        }
        let honest: BTreeSet<usize> = (0..n).filter(|j| !ignore.contains(j)).collect();
        let keep: Vec<usize> = honest.iter().copied().collect();
        report.branch_values[i] = code
            .fit(&keep, &code.unscale(&tree[i]))
            .map(|q| q.eval(code.field(), 0));
    }
    if report.branches_consistent {
        let root_code = code.with_variant(match code.variant() {
            Variant::W | Variant::W0 => Variant::W,
            _ => Variant::V,
        });
        let word: Vec<Fe> = report
            .branch_values
            .iter()
            .map(|v| v.unwrap_or(0))
            .collect();
        if !root_code.in_neighborhood(&word, b) {
            report.root_consistent = false;
            report
                .failures
                .push("property 3: branch values are not in V_B".to_string());
        }
    } else {
        report.root_consistent = false;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn code(p: u32, n: usize, delta: usize) -> ReedSolomonCode {
        ReedSolomonCode::new(PrimeField::new(p).unwrap(), n, delta, Variant::V).unwrap()
    }

    #[test]
    fn encode_examples() {
        let c = code(7, 5, 2);
        assert_eq!(c.encode(3, &[1, 2]).unwrap(), vec![6, 6, 3, 4, 2]);
        assert_eq!(c.encode(0, &[0, 0]).unwrap(), vec![0; 5]);
        assert_eq!(c.encode(3, &[0, 0]).unwrap(), vec![3; 5]);
        let v0 = c.with_variant(Variant::V0);
        assert!(matches!(
            v0.encode(3, &[1, 2]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(c.encode(3, &[1]).is_err());
    }

    #[test]
    fn decode_examples() {
        let c = code(7, 5, 2);
        let d = c.decode(&[6, 0, 3, 4, 2]).unwrap();
        assert_eq!(d.secret, 3);
        assert_eq!(d.error_positions, vec![1]);
        assert_eq!(d.error_values, vec![1]);
        let clean = c.decode(&[3; 5]).unwrap();
        assert_eq!(clean.secret, 3);
        assert!(clean.error_positions.is_empty());
        // distance 2 from every codeword (brute force over all 343 polynomials)
        assert_eq!(c.decode(&[1, 2, 0, 0, 0]), Err(Error::DecodeFailure));
    }

    #[test]
    fn interpolation_examples() {
        let c = code(7, 5, 2);
        assert_eq!(
            c.erasure_interpolate(&[6, 6, 3, 4, 2], &set(&[0, 1, 2]))
                .unwrap(),
            3
        );
        assert_eq!(c.erasure_interpolate(&[5; 5], &set(&[1, 3, 4])).unwrap(), 5);
        let corrupted = c
            .erasure_interpolate(&[6, 6, 2, 4, 2], &set(&[0, 2, 3]))
            .unwrap();
        assert_ne!(corrupted, 3);
        assert_eq!(
            c.erasure_interpolate(&[6, 6, 2, 4, 2], &set(&[0, 1, 2, 3])),
            Err(Error::InconsistentShares)
        );
        assert!(c
            .erasure_interpolate(&[6, 6, 3, 4, 2], &set(&[0, 1]))
            .is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let c = code(7, 5, 2);
        let word = vec![3, 0, 3, 3, 3];
        assert!(c.in_neighborhood(&word, &set(&[1])));
        assert!(!c.in_neighborhood(&word, &set(&[3])));
        assert!(!c.in_neighborhood(&word, &set(&[])));
        assert!(c.in_neighborhood(&[3; 5], &set(&[])));
    }

    #[test]
    fn dual_constants_nonzero_and_validated() {
        let f = PrimeField::new(7).unwrap();
        assert!(dual_constants(&f, 5, 2).unwrap().iter().all(|&d| d != 0));
        assert!(dual_constants(&f, 7, 2).is_err());
        assert!(dual_constants(&f, 5, 5).is_err());
    }

    #[test]
    fn two_good_examples() {
        let c = code(7, 5, 2);
        let f = *c.field();
        let root = c.encode(3, &[1, 2]).unwrap();
        let mut tree: Vec<Vec<Fe>> = root
            .iter()
            .enumerate()
            .map(|(i, &a)| c.encode(a, &[i as Fe, 1]).unwrap())
            .collect();
        let empty = vec![BTreeSet::new(); 5];
        let none = BTreeSet::new();
        assert!(two_good_check(&tree, &c, &none, &empty, &none).holds());

        // cheater 3 garbles every leaf it holds
        let cheaters = set(&[3]);
        let mut garbled = tree.clone();
        for branch in garbled.iter_mut() {
            branch[3] = f.add(branch[3], 5);
        }
        assert!(two_good_check(&garbled, &c, &none, &empty, &cheaters).holds());

        // branch 0 re-shared with a wrong value
        tree[0] = c.encode(f.add(root[0], 1), &[0, 1]).unwrap();
        let r = two_good_check(&tree, &c, &none, &empty, &cheaters);
        assert!(r.apparent_cheaters_are_real && r.branches_consistent);
        assert!(!r.root_consistent);
        assert!(r.failures.iter().any(|m| m.contains("property 3")));

        // honest player named as apparent cheater
        let mut sets = empty.clone();
        sets[2].insert(1);
        let r = two_good_check(&garbled, &c, &none, &sets, &cheaters);
        assert!(!r.apparent_cheaters_are_real);
    }
}
