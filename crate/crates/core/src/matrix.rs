//! Dense complex square matrices.
//!
//! Every algebra element in this crate is a `Matrix`: a row-major `n x n`
//! array of `Complex64` with finite entries. Rectangular intermediates live
//! only inside the factorizations in [`crate::linalg`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub type Complex = num_complex::Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct Matrix {
    n: usize,
    data: Vec<Complex>,
}

/// On-disk layout: `{"n": 2, "data": [[[re, im], [re, im]], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    data: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixFile> for Matrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.data.len() != file.n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} rows, found {}",
                file.n,
                file.data.len()
            )));
        }
        let mut data = Vec::with_capacity(file.n * file.n);
        for (i, row) in file.data.iter().enumerate() {
            if row.len() != file.n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    file.n
                )));
            }
            data.extend(row.iter().map(|[re, im]| Complex::new(*re, *im)));
        }
        Matrix::new(file.n, data)
    }
}

impl From<Matrix> for MatrixFile {
    fn from(m: Matrix) -> Self {
        let data = (0..m.n)
            .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        MatrixFile { n: m.n, data }
    }
}

impl Matrix {
    pub fn new(n: usize, data: Vec<Complex>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("order must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, found {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / n,
                pos % n
            )));
        }
        Ok(Matrix { n, data })
    }

    /// Builds from real rows; panics on ragged input (test and fixture helper).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), n, "ragged rows");
                r.iter().map(|&x| Complex::new(x, 0.0))
            })
            .collect();
        Matrix::new(n, data).expect("finite real rows")
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows must all have length n".into()));
        }
        Matrix::new(n, rows.into_iter().flatten().collect())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        Matrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![ONE; n])
    }

    pub fn diag(d: &[Complex]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &z) in d.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(d: &[f64]) -> Self {
        Self::diag(&d.iter().map(|&x| Complex::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Matrix unit `E_ij` of order `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(i, j)] = ONE;
        m
    }

    /// Nilpotent Jordan block of order `n` (ones on the superdiagonal).
    pub fn jordan_nilpotent(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n.saturating_sub(1) {
            m[(i, i + 1)] = ONE;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn trace(&self) -> Complex {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, c: Complex) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex::new(c, 0.0))
    }

    fn check_same_order(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_order(other)?;
        Ok(self.zip_with(other, |x, y| x + y))
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_order(other)?;
        Ok(self.zip_with(other, |x, y| x - y))
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_order(other)?;
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        }
        Ok(Matrix { n, data: out })
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(Complex, Complex) -> Complex) -> Matrix {
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        }
    }

    /// `self + c * I`.
    pub fn shift(&self, c: Complex) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out[(i, i)] += c;
        }
        out
    }

    /// `a^k` by repeated squaring; `a^0 = I`.
    pub fn power(&self, mut k: u64) -> Result<Matrix> {
        let mut result = Matrix::identity(self.n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
            if !result.is_finite() || !base.is_finite() {
                return Err(Error::OverflowDetected("raising a matrix to a power"));
            }
        }
        Ok(result)
    }

    /// Square sub-block of order `size` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, size: usize) -> Matrix {
        assert!(r0 + size <= self.n && c0 + size <= self.n && size >= 1);
        let mut out = Matrix::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut out = Matrix::zeros(n);
        let mut off = 0;
        for b in blocks {
            out.paste(b, off, off);
            off += b.n;
        }
        out
    }

    /// Writes `src` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, src: &Matrix, r0: usize, c0: usize) {
        for i in 0..src.n {
            for j in 0..src.n {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    /// The `2n x 2n` matrix `[[a11, a12], [a21, a22]]`.
    pub fn from_blocks2(a11: &Matrix, a12: &Matrix, a21: &Matrix, a22: &Matrix) -> Result<Matrix> {
        let n = a11.n;
        for b in [a12, a21, a22] {
            a11.check_same_order(b)?;
        }
        let mut out = Matrix::zeros(2 * n);
        out.paste(a11, 0, 0);
        out.paste(a12, 0, n);
        out.paste(a21, n, 0);
        out.paste(a22, n, n);
        Ok(out)
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<Complex>) -> Result<Matrix> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Matrix::new(n, data)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}

// Operator forms panic on order mismatch; the `try_*` methods return errors.
impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).expect("matrix orders differ")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.try_sub(rhs).expect("matrix orders differ")
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix orders differ")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| {
                    if z.im == 0.0 {
                        format!("{:.4}", z.re)
                    } else {
                        format!("{:.4}{:+.4}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// A letter of a word over the alphabet `{a, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "a",
            Letter::B => "b",
        })
    }
}

/// Ordered product of the letters of `word`; the empty word is the identity.
pub fn word_product(a: &Matrix, b: &Matrix, word: &[Letter]) -> Result<Matrix> {
    a.check_same_order(b)?;
    let mut acc = Matrix::identity(a.order());
    for letter in word {
        let factor = match letter {
            Letter::A => a,
            Letter::B => b,
        };
        acc = &acc * factor;
    }
    if !acc.is_finite() {
        return Err(Error::OverflowDetected("forming a word product"));
    }
    Ok(acc)
}

/// True iff `||a||_F <= tol_res * max(scale, 1)`.
pub fn approx_zero(a: &Matrix, scale: f64, tol: &Tolerances) -> bool {
    a.norm_fro() <= tol.tol_res * scale.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn blocks_of_the_sixth_root_matrix() {
        let one = Matrix::identity(1);
        let m = Matrix::from_blocks2(&one, &one, &one.scale_real(-1.0), &Matrix::zeros(1)).unwrap();
        assert_eq!(m, Matrix::from_real_rows(&[&[1.0, 1.0], &[-1.0, 0.0]]));
    }

    #[test]
    fn zero_blocks_give_zero_matrix() {
        let z = Matrix::zeros(2);
        assert_eq!(Matrix::from_blocks2(&z, &z, &z, &z).unwrap(), Matrix::zeros(4));
    }

    #[test]
    fn matrix_unit_blocks() {
        let m = Matrix::from_blocks2(
            &Matrix::unit(2, 0, 0),
            &Matrix::unit(2, 0, 1),
            &Matrix::unit(2, 1, 0),
            &Matrix::zeros(2),
        )
        .unwrap();
        let expected = Matrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(m, expected);
    }

    #[test]
    fn blocks_reject_mixed_orders() {
        let err = Matrix::from_blocks2(
            &Matrix::zeros(2),
            &Matrix::zeros(2),
            &Matrix::zeros(3),
            &Matrix::zeros(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn word_products() {
        let a = Matrix::jordan_nilpotent(2);
        let b = a.adjoint();
        assert_eq!(word_product(&a, &b, &[]).unwrap(), Matrix::identity(2));
        assert_eq!(
            word_product(&a, &b, &[Letter::A, Letter::B]).unwrap(),
            Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])
        );
        let i = Matrix::identity(2);
        assert_eq!(word_product(&i, &b, &[Letter::A]).unwrap(), i);
        assert!(word_product(&a, &Matrix::zeros(3), &[Letter::A]).is_err());
    }

    #[test]
    fn powers() {
        let m = Matrix::from_real_rows(&[&[1.0, 1.0], &[-1.0, 0.0]]);
        assert!(m.power(6).unwrap().max_abs_diff(&Matrix::identity(2)) <= 1e-12);
        assert_eq!(Matrix::jordan_nilpotent(2).power(2).unwrap(), Matrix::zeros(2));
        assert_eq!(m.power(0).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn power_overflow_is_loud() {
        let big = Matrix::diag_real(&[1e200, 1.0]);
        assert!(matches!(big.power(4), Err(Error::OverflowDetected(_))));
    }

    #[test]
    fn approx_zero_cases() {
        let tol = Tolerances::default();
        assert!(approx_zero(&Matrix::zeros(3), 1e6, &tol));
        assert!(!approx_zero(&Matrix::identity(2), 1.0, &tol));
        let j = Matrix::jordan_nilpotent(2);
        let scale = j.norm_fro().powi(2);
        assert!(approx_zero(&(&j * &j), scale, &tol));
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(Matrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(Matrix::new(0, vec![]).is_err());
    }

    #[test]
    fn json_layout() {
        let m = Matrix::from_rows(vec![vec![c(1.0, 0.0), c(0.5, -2.0)], vec![c(0.0, 0.0), c(-1.0, 0.25)]])
            .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"n":2,"data":[[[1.0,0.0],[0.5,-2.0]],[[0.0,0.0],[-1.0,0.25]]]}"#);
        let back: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_ragged_rows() {
        let bad = r#"{"n":2,"data":[[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(serde_json::from_str::<Matrix>(bad).is_err());
    }
}
