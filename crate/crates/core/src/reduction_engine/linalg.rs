//! Dense matrices over the rational-function field with deterministic Gauss-Jordan.

use crate::symbolic_ring::{Labels, ScalarExpr};
use crate::Error;

#[derive(Clone, Debug)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<ScalarExpr>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ScalarExpr::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ScalarExpr::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ScalarExpr>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ScalarExpr) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[ScalarExpr] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows);
        let mut r = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut s = ScalarExpr::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        s = s.add(&a.mul(b));
                    }
                }
                r.set(i, j, s);
            }
        }
        r
    }

    pub fn transpose(&self) -> Matrix {
        let mut r = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                r.set(j, i, self.get(i, j).clone());
            }
        }
        r
    }

    pub fn equals(&self, o: &Matrix) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.data.iter().zip(&o.data).all(|(a, b)| a.equals(b))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j).equals(&self.get(j, i).neg())))
    }

    /// Reduced row echelon form in place; returns pivot columns. Pivots are the first
    /// nonzero entry scanning rows top to bottom.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else { continue };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("nonzero pivot");
            for j in c..self.cols {
                let v = self.get(r, j);
                if !v.is_zero() {
                    let v = v.mul(&inv);
                    self.set(r, j, v);
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let b = self.get(r, j);
                    if !b.is_zero() {
                        let v = self.get(i, j).sub(&f.mul(b));
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right null space; each vector has a single free entry equal to 1.
    pub fn nullspace(&self) -> Vec<Vec<ScalarExpr>> {
        let mut m = self.clone();
        let piv = m.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !piv.contains(c)) {
            let mut v = vec![ScalarExpr::zero(); self.cols];
            v[free] = ScalarExpr::one();
            for (r, &pc) in piv.iter().enumerate() {
                v[pc] = m.get(r, free).neg();
            }
            out.push(v);
        }
        out
    }

    /// Inverse by Gauss-Jordan on `[A | I]`; a singular matrix yields a null vector.
    pub fn inverse(&self) -> Result<Matrix, Vec<ScalarExpr>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, ScalarExpr::one());
        }
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return Err(self.nullspace().into_iter().next().unwrap_or_default());
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }

    pub fn to_text(&self, labels: &Labels) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|e| e.to_text(labels)).collect();
            s.push_str(&format!("[{}]\n", cells.join(", ")));
        }
        s
    }
}

pub(crate) fn vector_text(v: &[ScalarExpr], labels: &Labels) -> String {
    format!("({})", v.iter().map(|e| e.to_text(labels)).collect::<Vec<_>>().join(", "))
}

/// Solve `A x = b` for one solution, free variables set to zero.
pub fn solve_linear(a: &Matrix, b: &[ScalarExpr]) -> Result<Option<Vec<ScalarExpr>>, Error> {
    if b.len() != a.rows {
        return Err(Error::Invalid("right-hand side length mismatch".into()));
    }
    let mut aug = Matrix::zeros(a.rows, a.cols + 1);
    for (i, bi) in b.iter().enumerate() {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, a.cols, bi.clone());
    }
    let piv = aug.rref();
    if piv.last() == Some(&a.cols) {
        return Ok(None);
    }
    let mut x = vec![ScalarExpr::zero(); a.cols];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = aug.get(r, a.cols).clone();
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic_ring::ex;

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_rows(vec![vec![ex("0"), ex("G[2,0]")], vec![ex("-G[2,0]"), ex("hbar")]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).equals(&Matrix::identity(2)));
    }

    #[test]
    fn singular_gives_null_vector() {
        let m = Matrix::from_rows(vec![vec![ex("p"), ex("2*p")], vec![ex("1"), ex("2")]]);
        let v = m.inverse().unwrap_err();
        assert!(v[0].add(&v[1].mul(&ex("2"))).is_zero());
        assert_eq!(m.rank(), 1);
    }
}
