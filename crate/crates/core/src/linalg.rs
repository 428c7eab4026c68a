//! Dense linear algebra over `Z_p` on row-major `Vec<Vec<Fe>>` matrices.

use crate::field::{Fe, PrimeField};

pub type Matrix = Vec<Vec<Fe>>;

/// In-place reduced row echelon form. Returns the pivot column of each
/// nonzero row, in order.
pub fn rref(f: &PrimeField, m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(sel) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, sel);
        let inv = f.inv(m[r][c]).unwrap();
        for v in m[r].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = m[r].clone();
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let factor = m[i][c];
                for (v, &pv) in m[i].iter_mut().zip(&pivot_row) {
                    *v = f.sub(*v, f.mul(factor, pv));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(f: &PrimeField, m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(f, &mut m).len()
}

pub fn inverse(f: &PrimeField, m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    let piv = rref(f, &mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(f: &PrimeField, m: &Matrix, cols: usize) -> Matrix {
    let mut r = m.clone();
    let piv = rref(f, &mut r);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0; cols];
            v[fc] = 1;
            for (row, &pc) in piv.iter().enumerate() {
                v[pc] = f.neg(r[row][fc]);
            }
            v
        })
        .collect()
}

/// Some solution of `m x = b`, or `None` if inconsistent.
pub fn solve(f: &PrimeField, m: &Matrix, b: &[Fe], cols: usize) -> Option<Vec<Fe>> {
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let piv = rref(f, &mut aug);
    if piv.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![0; cols];
    for (row, &pc) in piv.iter().enumerate() {
        x[pc] = aug[row][cols];
    }
    Some(x)
}

pub fn mat_vec(f: &PrimeField, m: &Matrix, v: &[Fe]) -> Vec<Fe> {
    m.iter().map(|row| f.dot(row, v)).collect()
}

pub fn mat_mul(f: &PrimeField, a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| (0..inner).fold(0, |acc, k| f.add(acc, f.mul(row[k], b[k][c]))))
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let f = PrimeField::new(7).unwrap();
        let m = vec![vec![1, 2, 3], vec![0, 1, 4], vec![5, 6, 0]];
        let inv = inverse(&f, &m).unwrap();
        assert_eq!(mat_mul(&f, &m, &inv), identity(3));
        assert!(inverse(&f, &vec![vec![1, 2], vec![2, 4]]).is_none());
    }

    #[test]
    fn nullspace_is_annihilated() {
        let f = PrimeField::new(11).unwrap();
        let m = vec![vec![1, 2, 3, 4], vec![2, 4, 6, 9]];
        let ns = nullspace(&f, &m, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&f, &m, v).iter().all(|&x| x == 0));
        }
        let x = solve(&f, &m, &[1, 3], 4).unwrap();
        assert_eq!(mat_vec(&f, &m, &x), vec![1, 3]);
    }
}
