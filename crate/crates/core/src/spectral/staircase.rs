//! Unitary staircase deflation of the zero eigenvalue.
//!
//! Repeatedly splits off the numerical null space of the trailing block:
//!
//! ```text
//!   Q^H a Q = [ N  X ]      N strictly block upper triangular (nilpotent)
//!             [ 0  C ]      C with no numerically zero singular value
//! ```
//!
//! The block sizes `d_1 >= d_2 >= ...` are the dimensions `dim null(a^j) -
//! dim null(a^{j-1})`, so their count is the index of `a` and their sum the
//! algebraic multiplicity of the eigenvalue 0. No powers of `a` are formed.
//! Every neglected entry is bounded by the threshold, which makes the
//! decision a backward-error statement: `a + E` has exactly this structure
//! for some `||E||` of the order of the threshold.

use crate::error::Result;
use crate::linalg::{null_space_split, CMat};
use crate::matrix::Complex;

#[derive(Debug, Clone)]
pub struct CoreNilpotent {
    /// Unitary basis change.
    pub q: CMat,
    /// `Q^H a Q` with every neglected block set to exactly zero.
    pub t: CMat,
    /// Null-space increments, one per deflation step.
    pub steps: Vec<usize>,
}

impl CoreNilpotent {
    pub fn nil_dim(&self) -> usize {
        self.steps.iter().sum()
    }

    pub fn index(&self) -> usize {
        self.steps.len()
    }

    pub fn core_dim(&self) -> usize {
        self.t.nrows() - self.nil_dim()
    }

    pub fn core(&self) -> CMat {
        let z = self.nil_dim();
        let r = self.core_dim();
        self.t.view((z, z), (r, r)).into_owned()
    }

    pub fn nilpotent_block(&self) -> CMat {
        let z = self.nil_dim();
        self.t.view((0, 0), (z, z)).into_owned()
    }

    pub fn coupling(&self) -> CMat {
        let z = self.nil_dim();
        let r = self.core_dim();
        self.t.view((0, z), (z, r)).into_owned()
    }
}

/// Deflates singular values `<= threshold` step by step.
pub fn deflate_zero(a: &CMat, threshold: f64) -> Result<CoreNilpotent> {
    let n = a.nrows();
    let mut q = CMat::identity(n, n);
    let mut w = a.clone();
    let mut offset = 0usize;
    let mut steps = Vec::new();

    while offset < n {
        let (null, range) = null_space_split(&w, threshold)?;
        let d = null.ncols();
        if d == 0 {
            break;
        }
        let m = w.nrows();
        let mut v = CMat::zeros(m, m);
        v.view_mut((0, 0), (m, d)).copy_from(&null);
        v.view_mut((0, d), (m, m - d)).copy_from(&range);

        let trailing = q.columns(offset, m).into_owned() * &v;
        q.columns_mut(offset, m).copy_from(&trailing);

        w = range.adjoint() * &w * &range;
        offset += d;
        steps.push(d);
    }

    let mut t = q.adjoint() * a * &q;
    // Column block j of the nilpotent part may only touch rows of earlier blocks.
    let zero = Complex::new(0.0, 0.0);
    let mut start = 0usize;
    for &d in &steps {
        for col in start..start + d {
            for row in start..n {
                t[(row, col)] = zero;
            }
        }
        start += d;
    }
    Ok(CoreNilpotent { q, t, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn jordan_block_steps() {
        let j = Matrix::jordan_nilpotent(4).to_dmatrix();
        let cn = deflate_zero(&j, 1e-12).unwrap();
        assert_eq!(cn.steps, vec![1, 1, 1, 1]);
        assert_eq!(cn.core_dim(), 0);
    }

    #[test]
    fn invertible_has_no_steps() {
        let a = Matrix::diag_real(&[2.0, -1.0, 0.5]).to_dmatrix();
        let cn = deflate_zero(&a, 1e-12).unwrap();
        assert!(cn.steps.is_empty());
        assert_eq!(cn.core_dim(), 3);
    }

    #[test]
    fn reconstructs_input() {
        let a = Matrix::from_real_rows(&[
            &[1.0, 2.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0],
        ])
        .to_dmatrix();
        let cn = deflate_zero(&a, 1e-12).unwrap();
        assert_eq!(cn.nil_dim(), 2);
        let back = &cn.q * &cn.t * cn.q.adjoint();
        assert!((back - a).norm() < 1e-12);
    }
}
