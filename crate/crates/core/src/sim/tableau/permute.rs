//! Affine-support form of a stabilizer state and classical basis
//! permutations (batches of Toffolis) that keep the state stabilizer.
//!
//! A stabilizer state is `Σ_u ω^{φ(u)} |x0 + Σ u_k a_k⟩` with `φ` quadratic.
//! A batch of Toffolis maps the support through a degree-2 map; when the
//! image is again an affine space and the phase stays quadratic, the
//! tableau is rebuilt from the new affine form.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{dot8, mul_pow, mul_rows, Block, Row};
use crate::error::{Error, Result};
use crate::field::{Fe, PrimeField};
use crate::gate::GateOp;
use crate::linalg;

const PHASE_CHECKS: usize = 12;

pub(crate) struct AffineForm {
    field: PrimeField,
    x0: Vec<Fe>,
    dirs: Vec<Vec<Fe>>,
    pivots: Vec<usize>,
    lin: Vec<Fe>,
    /// Upper triangle: `quad[j][k]` multiplies `u_j u_k` for `j ≤ k`.
    quad: Vec<Vec<Fe>>,
}

impl AffineForm {
    pub fn of(t: &Block) -> Result<Self> {
        let f = t.field;
        let cols = t.cols;
        let mut rows = t.stab.clone();
        let mut pivots = Vec::new();
        for j in 0..cols {
            let r = pivots.len();
            let Some(piv) = (r..rows.len()).find(|&i| rows[i].x[j] != 0) else {
                continue;
            };
            rows.swap(r, piv);
            let inv = f.inv(rows[r].x[j] as Fe).unwrap();
            if inv != 1 {
                let mut n = Row::zero(cols);
                mul_pow(&f, &mut n, &rows[r], inv);
                rows[r] = n;
            }
            for i in 0..rows.len() {
                let v = rows[i].x[j] as Fe;
                if i != r && v != 0 {
                    mul_rows(&f, &mut rows, i, r, f.neg(v));
                }
            }
            pivots.push(j);
        }
        let d = pivots.len();
        let zmat: linalg::Matrix = rows[d..]
            .iter()
            .map(|r| r.z.iter().map(|&v| v as Fe).collect())
            .collect();
        let rhs: Vec<Fe> = rows[d..].iter().map(|r| f.neg(r.phase)).collect();
        let mut x0 = linalg::solve(&f, &zmat, &rhs, cols).ok_or(Error::NotStabilizer)?;
        let dirs: Vec<Vec<Fe>> = rows[..d]
            .iter()
            .map(|r| r.x.iter().map(|&v| v as Fe).collect())
            .collect();
        for (k, &pk) in pivots.iter().enumerate() {
            let c = x0[pk];
            if c != 0 {
                for (xv, &av) in x0.iter_mut().zip(&dirs[k]) {
                    *xv = f.sub(*xv, f.mul(c, av));
                }
            }
        }
        let half = f.inv(2).unwrap();
        let x0_8: Vec<u8> = x0.iter().map(|&v| v as u8).collect();
        let mut lin = Vec::with_capacity(d);
        let mut quad = vec![vec![0; d]; d];
        for k in 0..d {
            let g = &rows[k];
            let ba = dot8(&f, &g.z, &g.x);
            lin.push(f.sub(f.add(g.phase, dot8(&f, &g.z, &x0_8)), f.mul(half, ba)));
            quad[k][k] = f.mul(half, ba);
            for j in 0..k {
                quad[j][k] = dot8(&f, &g.z, &rows[j].x);
            }
        }
        Ok(Self {
            field: f,
            x0,
            dirs,
            pivots,
            lin,
            quad,
        })
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn point(&self, u: &[Fe]) -> Vec<Fe> {
        let f = &self.field;
        let mut x = self.x0.clone();
        for (k, &uk) in u.iter().enumerate() {
            if uk != 0 {
                for (xv, &av) in x.iter_mut().zip(&self.dirs[k]) {
                    *xv = f.add(*xv, f.mul(uk, av));
                }
            }
        }
        x
    }

    /// Support coordinates of a basis string, if it lies in the support.
    fn coords(&self, x: &[Fe]) -> Option<Vec<Fe>> {
        let u: Vec<Fe> = self.pivots.iter().map(|&pk| x[pk]).collect();
        (self.point(&u) == x).then_some(u)
    }

    pub fn phase(&self, u: &[Fe]) -> Fe {
        let f = &self.field;
        let nz: Vec<usize> = (0..u.len()).filter(|&k| u[k] != 0).collect();
        let mut acc = 0;
        for (a, &j) in nz.iter().enumerate() {
            acc = f.add(acc, f.mul(self.lin[j], u[j]));
            for &k in &nz[a..] {
                acc = f.add(acc, f.mul(self.quad[j][k], f.mul(u[j], u[k])));
            }
        }
        acc
    }
}

struct Toffolis(Vec<(usize, usize, usize)>);

impl Toffolis {
    fn forward(&self, f: &PrimeField, x: &mut [Fe]) {
        for &(a, b, t) in &self.0 {
            x[t] = f.add(x[t], f.mul(x[a], x[b]));
        }
    }

    fn backward(&self, f: &PrimeField, x: &mut [Fe]) {
        for &(a, b, t) in &self.0 {
            x[t] = f.sub(x[t], f.mul(x[a], x[b]));
        }
    }
}

/// Echelon basis with normalized pivots, grown one vector at a time.
struct Echelon {
    rows: Vec<(usize, Vec<Fe>)>,
}

impl Echelon {
    fn insert(&mut self, f: &PrimeField, mut v: Vec<Fe>) {
        for (pc, row) in &self.rows {
            let c = v[*pc];
            if c != 0 {
                for (vv, &rv) in v.iter_mut().zip(row) {
                    *vv = f.sub(*vv, f.mul(c, rv));
                }
            }
        }
        if let Some(pc) = v.iter().position(|&c| c != 0) {
            let inv = f.inv(v[pc]).unwrap();
            for vv in v.iter_mut() {
                *vv = f.mul(*vv, inv);
            }
            self.rows.push((pc, v));
        }
    }

    /// Clears every pivot column outside its own row.
    fn reduce(&mut self, f: &PrimeField) {
        self.rows.sort_by_key(|r| r.0);
        for i in 0..self.rows.len() {
            let (pc, row) = self.rows[i].clone();
            for (k, other) in self.rows.iter_mut().enumerate() {
                let c = other.1[pc];
                if k != i && c != 0 {
                    for (ov, &rv) in other.1.iter_mut().zip(&row) {
                        *ov = f.sub(*ov, f.mul(c, rv));
                    }
                }
            }
        }
    }
}

impl Block {
    /// Applies a batch of Toffolis on pairwise distinct wires.
    ///
    /// Fails with [`Error::NotStabilizer`] when the result is not a
    /// stabilizer state; the tableau is left unchanged in that case.
    pub(crate) fn apply_basis_permutation(&mut self, gates: &[GateOp]) -> Result<()> {
        let f = self.field;
        let cols = self.cols;
        let mut seen = std::collections::BTreeSet::new();
        let mut batch = Vec::new();
        for g in gates {
            let GateOp::Toffoli { a, b, target } = *g else {
                return Err(Error::UnsupportedGate(format!("{g} in a Toffoli batch")));
            };
            for w in [a, b, target] {
                self.check_wire(w)?;
                if !seen.insert(w) {
                    return Err(Error::InvalidArgument(format!(
                        "wire {w} reused in Toffoli batch"
                    )));
                }
            }
            batch.push((a, b, target));
        }
        let pi = Toffolis(batch);
        let form = AffineForm::of(self)?;
        let d = form.dim();

        let mut y0 = form.x0.clone();
        pi.forward(&f, &mut y0);
        // hull of the image: linear terms L_k, squares Q_kk, cross terms Q_jk
        let mut hull = Echelon { rows: Vec::new() };
        let touches: Vec<usize> = (0..d)
            .filter(|&k| {
                pi.0.iter()
                    .any(|&(a, b, _)| form.dirs[k][a] != 0 || form.dirs[k][b] != 0)
            })
            .collect();
        for k in 0..d {
            let ak = &form.dirs[k];
            let mut l = ak.clone();
            let mut q = vec![0; cols];
            for &(a, b, t) in &pi.0 {
                let lin = f.add(f.mul(form.x0[a], ak[b]), f.mul(form.x0[b], ak[a]));
                l[t] = f.add(l[t], lin);
                q[t] = f.mul(ak[a], ak[b]);
            }
            hull.insert(&f, l);
            hull.insert(&f, q);
            if hull.rows.len() > d {
                return Err(Error::NotStabilizer);
            }
        }
        for (i, &j) in touches.iter().enumerate() {
            for &k in &touches[i + 1..] {
                let (aj, ak) = (&form.dirs[j], &form.dirs[k]);
                let mut q = vec![0; cols];
                for &(a, b, t) in &pi.0 {
                    q[t] = f.add(f.mul(aj[a], ak[b]), f.mul(ak[a], aj[b]));
                }
                hull.insert(&f, q);
                if hull.rows.len() > d {
                    return Err(Error::NotStabilizer);
                }
            }
        }
        if hull.rows.len() != d {
            return Err(Error::NotStabilizer);
        }
        hull.reduce(&f);
        let qpiv: Vec<usize> = hull.rows.iter().map(|r| r.0).collect();
        let basis: Vec<Vec<Fe>> = hull.rows.into_iter().map(|r| r.1).collect();

        let phase_at = |v: &[Fe]| -> Result<Fe> {
            let mut y = y0.clone();
            for (i, &vi) in v.iter().enumerate() {
                if vi != 0 {
                    for (yv, &bv) in y.iter_mut().zip(&basis[i]) {
                        *yv = f.add(*yv, f.mul(vi, bv));
                    }
                }
            }
            pi.backward(&f, &mut y);
            let u = form.coords(&y).ok_or(Error::NotStabilizer)?;
            Ok(form.phase(&u))
        };
        let unit = |idx: &[(usize, Fe)]| {
            let mut v = vec![0; d];
            for &(i, c) in idx {
                v[i] = f.add(v[i], c);
            }
            v
        };
        let c0 = phase_at(&vec![0; d])?;
        let mut single = Vec::with_capacity(d);
        let mut lin = Vec::with_capacity(d);
        let mut q = vec![vec![0; d]; d];
        let half = f.inv(2).unwrap();
        for i in 0..d {
            let p1 = phase_at(&unit(&[(i, 1)]))?;
            let p2 = phase_at(&unit(&[(i, 2)]))?;
            q[i][i] = f.mul(half, f.add(f.sub(p2, f.mul(2, p1)), c0));
            lin.push(f.sub(f.sub(p1, c0), q[i][i]));
            single.push(p1);
        }
        for i in 0..d {
            for j in i + 1..d {
                let pij = phase_at(&unit(&[(i, 1), (j, 1)]))?;
                let v = f.add(f.sub(f.sub(pij, single[i]), single[j]), c0);
                q[i][j] = v;
                q[j][i] = v;
            }
        }
        let fitted = |v: &[Fe]| {
            let mut acc = c0;
            for i in 0..d {
                acc = f.add(acc, f.mul(lin[i], v[i]));
                acc = f.add(acc, f.mul(q[i][i], f.mul(v[i], v[i])));
                for j in i + 1..d {
                    acc = f.add(acc, f.mul(q[i][j], f.mul(v[i], v[j])));
                }
            }
            acc
        };
        let mut rng = StdRng::seed_from_u64(0x5eed_7aff);
        for _ in 0..PHASE_CHECKS {
            let v: Vec<Fe> = (0..d).map(|_| rng.gen_range(0..f.p())).collect();
            if phase_at(&v)? != fitted(&v) {
                return Err(Error::NotStabilizer);
            }
        }

        let y0_8: Vec<u8> = y0.iter().map(|&v| v as u8).collect();
        let mut stab = Vec::with_capacity(cols);
        let mut destab = Vec::with_capacity(cols);
        for i in 0..d {
            let mut s = Row::zero(cols);
            for (sv, &bv) in s.x.iter_mut().zip(&basis[i]) {
                *sv = bv as u8;
            }
            for j in 0..d {
                let m = if i == j { f.mul(2, q[i][i]) } else { q[i][j] };
                s.z[qpiv[j]] = m as u8;
            }
            s.phase = f.sub(f.add(lin[i], q[i][i]), dot8(&f, &s.z, &y0_8));
            stab.push(s);
            let mut dz = Row::zero(cols);
            dz.z[qpiv[i]] = 1;
            destab.push(dz);
        }
        let minus_one = f.neg(1) as u8;
        for fc in (0..cols).filter(|c| !qpiv.contains(c)) {
            let mut s = Row::zero(cols);
            s.z[fc] = 1;
            for (i, &pc) in qpiv.iter().enumerate() {
                s.z[pc] = f.neg(basis[i][fc]) as u8;
            }
            s.phase = f.neg(dot8(&f, &s.z, &y0_8));
            stab.push(s);
            let mut dx = Row::zero(cols);
            dx.x[fc] = minus_one;
            destab.push(dx);
        }
        self.stab = stab;
        self.destab = destab;
        Ok(())
    }
}
