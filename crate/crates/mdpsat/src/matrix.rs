//! Dense rational matrices and an exact sparse linear solver.

use crate::rat::Rat;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("singular linear system")]
pub struct SingularMatrix;

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, k: &Rat) -> Self {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| (0..self.rows).filter(|&i| !v[i].is_zero()).map(|i| &v[i] * self.get(i, j)).sum())
            .collect()
    }

    /// Maximal absolute row sum.
    pub fn inf_norm(&self) -> Rat {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<Rat>())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn inverse(&self) -> Result<Self, SingularMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero()).ok_or(SingularMatrix)?;
            if p != c {
                a.swap_rows(p, c);
                inv.swap_rows(p, c);
            }
            let piv = a.get(c, c).recip();
            a.scale_row(c, &piv);
            inv.scale_row(c, &piv);
            for r in 0..n {
                if r != c && !a.get(r, c).is_zero() {
                    let f = a.get(r, c).clone();
                    a.axpy_row(r, c, &f);
                    inv.axpy_row(r, c, &f);
                }
            }
        }
        Ok(inv)
    }

    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>, SingularMatrix> {
        assert_eq!(self.rows, self.cols);
        let rows = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, x)| (j, x.clone()))
                    .collect()
            })
            .collect();
        solve_sparse(rows, b.to_vec())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
    fn scale_row(&mut self, r: usize, k: &Rat) {
        for j in 0..self.cols {
            let v = self.get(r, j) * k;
            self.set(r, j, v);
        }
    }
    /// row[r] -= f * row[src]
    fn axpy_row(&mut self, r: usize, src: usize, f: &Rat) {
        for j in 0..self.cols {
            if !self.get(src, j).is_zero() {
                let v = self.get(r, j) - f * self.get(src, j);
                self.set(r, j, v);
            }
        }
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i).to_vec())).finish()
    }
}

impl<'a> Mul<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;
    fn mul(self, o: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, o.rows);
        let mut m = RatMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = m.get(i, j) + a * b;
                        m.set(i, j, v);
                    }
                }
            }
        }
        m
    }
}

impl<'a> Add<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;
    fn add(self, o: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;
    fn sub(self, o: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for a square system given as sparse rows `(column, coefficient)`.
/// Duplicate column entries within a row are summed.
pub fn solve_sparse(rows: Vec<Vec<(usize, Rat)>>, rhs: Vec<Rat>) -> Result<Vec<Rat>, SingularMatrix> {
    let cols = solve_sparse_multi(rows, rhs.into_iter().map(|x| vec![x]).collect())?;
    Ok(cols.into_iter().map(|mut v| v.pop().unwrap()).collect())
}

/// Like [`solve_sparse`] with several right-hand sides; `rhs[i]` is row `i` of the RHS block.
pub fn solve_sparse_multi(
    rows: Vec<Vec<(usize, Rat)>>,
    rhs: Vec<Vec<Rat>>,
) -> Result<Vec<Vec<Rat>>, SingularMatrix> {
    let n = rows.len();
    assert_eq!(rhs.len(), n);
    let m = rhs.first().map_or(0, |r| r.len());
    let mut a: Vec<BTreeMap<usize, Rat>> = Vec::with_capacity(n);
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, row) in rows.into_iter().enumerate() {
        let mut r = BTreeMap::new();
        for (j, v) in row {
            assert!(j < n, "column out of range");
            *r.entry(j).or_insert_with(Rat::zero) += v;
        }
        r.retain(|_, v: &mut Rat| !v.is_zero());
        for &j in r.keys() {
            col_rows[j].insert(i);
        }
        a.push(r);
    }
    let mut b = rhs;
    let mut pivoted = vec![false; n];
    let mut pivot_row = vec![usize::MAX; n];

    for c in 0..n {
        let r = col_rows[c]
            .iter()
            .copied()
            .filter(|&r| !pivoted[r])
            .min_by_key(|&r| (a[r].len(), r))
            .ok_or(SingularMatrix)?;
        pivoted[r] = true;
        pivot_row[c] = r;
        let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&x| !pivoted[x]).collect();
        if targets.is_empty() {
            continue;
        }
        let prow: Vec<(usize, Rat)> = a[r].iter().map(|(j, v)| (*j, v.clone())).collect();
        let pval = a[r][&c].clone();
        let prhs = b[r].clone();
        for t in targets {
            let f = &a[t][&c] / &pval;
            for (j, v) in &prow {
                let entry = a[t].entry(*j).or_insert_with(Rat::zero);
                *entry -= &f * v;
                if entry.is_zero() {
                    a[t].remove(j);
                    col_rows[*j].remove(&t);
                } else {
                    col_rows[*j].insert(t);
                }
            }
            for (x, y) in b[t].iter_mut().zip(&prhs) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }

    let mut x: Vec<Option<Vec<Rat>>> = vec![None; n];
    for c in (0..n).rev() {
        let r = pivot_row[c];
        let mut acc = b[r].clone();
        for (j, v) in &a[r] {
            if *j == c {
                continue;
            }
            let xj = x[*j].as_ref().expect("back substitution order");
            for (s, xv) in acc.iter_mut().zip(xj) {
                if !xv.is_zero() {
                    *s -= v * xv;
                }
            }
        }
        let d = &a[r][&c];
        x[c] = Some(acc.into_iter().map(|s| s / d).collect());
    }
    let out: Vec<Vec<Rat>> = x.into_iter().map(|v| v.unwrap()).collect();
    debug_assert!(out.iter().all(|v| v.len() == m));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn inverse_of_two_by_two() {
        let m = RatMatrix::from_rows(vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(1, 1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, RatMatrix::identity(2));
        assert_eq!(inv.get(0, 1), &r(-1, 1));
    }

    #[test]
    fn singular_detected() {
        let m = RatMatrix::from_rows(vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]]);
        assert_eq!(m.inverse(), Err(SingularMatrix));
        assert_eq!(m.solve(&[r(1, 1), r(1, 1)]), Err(SingularMatrix));
    }

    #[test]
    fn sparse_needs_row_reordering() {
        // x1 = 3 ; x0 + x1 = 5
        let rows = vec![vec![(1, r(1, 1))], vec![(0, r(1, 1)), (1, r(1, 1))]];
        assert_eq!(solve_sparse(rows, vec![r(3, 1), r(5, 1)]).unwrap(), vec![r(2, 1), r(3, 1)]);
    }

    #[test]
    fn inf_norm_uses_absolute_values() {
        let m = RatMatrix::from_rows(vec![vec![r(1, 2), r(-1, 3)], vec![r(0, 1), r(1, 4)]]);
        assert_eq!(m.inf_norm(), r(5, 6));
    }

    fn small() -> impl Strategy<Value = Rat> {
        (-6i64..7, 1i64..5).prop_map(|(n, d)| Rat::new(n, d))
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(vals in proptest::collection::vec(small(), 16)) {
            let m = RatMatrix::from_rows(vals.chunks(4).map(|c| c.to_vec()).collect());
            if let Ok(inv) = m.inverse() {
                prop_assert_eq!(&m * &inv, RatMatrix::identity(4));
                prop_assert_eq!(&inv * &m, RatMatrix::identity(4));
            }
        }

        #[test]
        fn sparse_agrees_with_dense(vals in proptest::collection::vec(small(), 25), b in proptest::collection::vec(small(), 5)) {
            let m = RatMatrix::from_rows(vals.chunks(5).map(|c| c.to_vec()).collect());
            match m.inverse() {
                Ok(inv) => prop_assert_eq!(m.solve(&b).unwrap(), inv.mul_vec(&b)),
                Err(_) => prop_assert!(m.solve(&b).is_err()),
            }
        }
    }
}
