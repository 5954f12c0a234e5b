//! Exact integer linear algebra over arbitrary-precision integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

impl From<IntMatrix> for MatrixRepr {
    fn from(m: IntMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            entries: (0..m.rows)
                .map(|i| m.row(i).iter().map(|x| x.to_string()).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for IntMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let rows = r
            .entries
            .into_iter()
            .map(|row| {
                row.iter()
                    .map(|s| s.parse::<BigInt>().map_err(|e| Error::Parse(e.to_string())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = IntMatrix::from_rows(rows)?;
        if m.rows != r.rows || m.cols != r.cols {
            return Err(Error::Parse("matrix shape does not match entries".into()));
        }
        Ok(m)
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("matrix needs at least one row and one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0);
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt>>(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("ragged matrix rows"));
        }
        Self::new(r, c, rows.into_iter().flatten().map(Into::into).collect())
    }

    /// Convenience constructor for literals in tests and examples.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("well-formed literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::domain(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * &rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::domain(format!(
                "vector of length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::domain("determinant of a non-square matrix"));
        }
        let n = self.rows;
        let mut m: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        Ok(sign * &m[n - 1][n - 1])
    }

    fn minor_matrix(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let data = (0..self.rows)
            .filter(|&i| i != skip_row)
            .flat_map(|i| {
                (0..self.cols)
                    .filter(move |&j| j != skip_col)
                    .map(move |j| self[(i, j)].clone())
            })
            .collect();
        IntMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Classical adjugate (transpose of the cofactor matrix).
    pub fn adjugate(&self) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::domain("adjugate of a non-square matrix"));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(IntMatrix::identity(1));
        }
        let mut adj = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = self.minor_matrix(i, j).determinant()?;
                adj[(j, i)] = if (i + j) % 2 == 0 { d } else { -d };
            }
        }
        Ok(adj)
    }

    /// Exact inverse of a unimodular matrix: `adj(M) · det(M)`.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let det = self.determinant()?;
        if det.abs() != BigInt::one() {
            return Err(Error::domain(format!("matrix is not unimodular (det = {det})")));
        }
        let mut inv = self.adjugate()?;
        for x in inv.data.iter_mut() {
            *x *= &det;
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor · row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * factor;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += factor · col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * factor;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Nonnegative gcd of the entries; the all-zero vector has gcd 0.
pub fn vec_gcd(x: &[BigInt]) -> Result<BigInt> {
    if x.is_empty() {
        return Err(Error::domain("gcd of an empty vector"));
    }
    Ok(x.iter().fold(BigInt::zero(), |g, v| g.gcd(v)))
}

/// `U·A·V = D` with `U`, `V` unimodular and `D` in Smith normal form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfDecomposition {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    #[serde(with = "crate::serde_big::int_vec")]
    pub invariant_factors: Vec<BigInt>,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// The last nonzero invariant factor, if the matrix is nonzero.
    pub fn last_factor(&self) -> Option<&BigInt> {
        self.invariant_factors.last()
    }
}

/// Smith normal form by gcd-driven row and column reduction.
///
/// Pivots are chosen by minimal nonzero absolute value, ties broken by the
/// lowest `(row, col)`, so the output is a deterministic function of `a`.
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let (s, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(s);
    let mut v = IntMatrix::identity(n);
    let mut rank = 0;

    for t in 0..s.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..s {
                for j in t..n {
                    let x = &d[(i, j)];
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..s {
                let q = &d[(i, t)] / &pivot;
                if !q.is_zero() {
                    let neg = -q;
                    d.add_row(i, t, &neg);
                    u.add_row(i, t, &neg);
                }
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = &d[(t, j)] / &pivot;
                if !q.is_zero() {
                    let neg = -q;
                    d.add_col(j, t, &neg);
                    v.add_col(j, t, &neg);
                }
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // pivot must divide the rest of the submatrix
            let offender = (t + 1..s)
                .find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_zero() {
            break;
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        rank = t + 1;
    }

    let invariant_factors = (0..rank).map(|i| d[(i, i)].clone()).collect();
    SnfDecomposition {
        d,
        u,
        v,
        invariant_factors,
    }
}

pub fn rank(a: &IntMatrix) -> usize {
    smith_normal_form(a).rank()
}

/// A lattice basis of `{x ∈ ℤⁿ : A·x = 0}` together with the box constant
/// `c = max_k Σ_j |v_jk|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NullSpace {
    vectors: Vec<Vec<BigInt>>,
    /// `None` when the null space is trivial.
    pub c: Option<BigInt>,
}

impl NullSpace {
    fn from_vectors(vectors: Vec<Vec<BigInt>>) -> Self {
        let c = vectors.first().map(|first| {
            (0..first.len())
                .map(|k| vectors.iter().map(|v| v[k].abs()).sum::<BigInt>())
                .max()
                .unwrap_or_default()
        });
        NullSpace { vectors, c }
    }

    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Null-space lattice basis from the trailing columns of `V` in the SNF.
pub fn nullspace_basis(a: &IntMatrix) -> NullSpace {
    nullspace_from_snf(&smith_normal_form(a))
}

pub fn nullspace_from_snf(snf: &SnfDecomposition) -> NullSpace {
    let m = snf.rank();
    let n = snf.v.cols();
    NullSpace::from_vectors((m..n).map(|j| snf.v.column(j)).collect())
}

/// `Σ |a_i|`, the box constant for the standard null-space basis of a
/// single primitive hyperplane.
pub fn hyperplane_constant(a: &[BigInt]) -> BigInt {
    a.iter().map(|x| x.abs()).sum()
}

pub fn is_unimodular(m: &IntMatrix) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::domain("unimodularity needs a square matrix"));
    }
    Ok(m.determinant()?.abs().is_one())
}
