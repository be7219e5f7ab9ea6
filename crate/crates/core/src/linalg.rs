//! Thin wrappers over nalgebra's SVD and LU for the handful of rectangular
//! and factorization steps the crate needs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{Complex, Matrix};

pub type CMat = DMatrix<Complex>;

/// Singular value decomposition with values sorted in descending order.
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns (not the adjoint).
    pub v: CMat,
}

/// One-sided (Hestenes) Jacobi SVD. Slower than bidiagonalisation but
/// accurate on the tiny singular values the rank decisions hinge on, where
/// nalgebra's complex SVD was observed to return inconsistent factors.
pub fn svd(m: &CMat) -> Result<Svd> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            u: CMat::zeros(r, 0),
            sigma: Vec::new(),
            v: CMat::zeros(c, 0),
        });
    }
    let mut w = m.clone();
    let mut v = CMat::identity(c, c);
    // Columns below rounding level of the whole matrix are left alone; their
    // directions carry no information and would stall convergence.
    let negligible = (f64::EPSILON * m.norm()).powi(2);
    let orth_tol = (r as f64).sqrt() * f64::EPSILON;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= orth_tol * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, p, q, phase, cs, sn);
                rotate(&mut v, p, q, phase, cs, sn);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { iterations: MAX_SWEEPS });
    }
    let norms: Vec<f64> = (0..c).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().take(k).map(|&i| norms[i]).collect();
    let v = CMat::from_fn(c, k, |i, j| v[(i, order[j])]);

    // Columns for nonzero values, then an orthonormal completion.
    let mut u = CMat::zeros(r, k);
    let mut filled = 0;
    for (j, &s) in sigma.iter().enumerate() {
        if s > f64::MIN_POSITIVE * 1e10 {
            u.set_column(j, &(w.column(order[j]) / Complex::new(s, 0.0)));
            filled = j + 1;
        }
    }
    let mut e = 0;
    while filled < k && e < r {
        let mut x = CMat::zeros(r, 1);
        x[(e, 0)] = Complex::new(1.0, 0.0);
        e += 1;
        for _ in 0..2 {
            for j in 0..filled {
                let proj = u.column(j).dotc(&x.column(0));
                x -= u.column(j) * proj;
            }
        }
        let nx = x.norm();
        if nx > 0.5 {
            u.set_column(filled, &(x.column(0) / Complex::new(nx, 0.0)));
            filled += 1;
        }
    }
    Ok(Svd { u, sigma, v })
}

const MAX_SWEEPS: usize = 80;

/// Columns `p, q` of `m` become `c x_p - s x'_q` and `s x_p + c x'_q`, with
/// `x'_q = conj(phase) x_q`.
fn rotate(m: &mut CMat, p: usize, q: usize, phase: Complex, c: f64, s: f64) {
    let ph = phase.conj();
    for i in 0..m.nrows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)] * ph;
        m[(i, p)] = xp * c - xq * s;
        m[(i, q)] = xp * s + xq * c;
    }
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    Ok(svd(m)?.sigma)
}

pub fn spectral_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Splits the columns of `V` into a basis of the numerical null space of a
/// square matrix (singular values `<= threshold`) and its orthogonal complement.
pub fn null_space_split(m: &CMat, threshold: f64) -> Result<(CMat, CMat)> {
    let n = m.ncols();
    let s = svd(m)?;
    let rank = s.sigma.iter().filter(|&&x| x > threshold).count();
    // A square input yields a full set of right singular vectors.
    debug_assert_eq!(s.v.ncols(), n);
    let range = s.v.columns(0, rank).into_owned();
    let null = s.v.columns(rank, n - rank).into_owned();
    Ok((null, range))
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericAmbiguity("matrix expected invertible is singular".into()))
}

pub fn condition_number(m: &CMat) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        _ => Ok(f64::INFINITY),
    }
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Moore-Penrose inverse from the SVD; singular values at or below
/// `rel_tol * sigma_max` are treated as zero.
pub fn pinv_dm(m: &CMat, rel_tol: f64) -> Result<CMat> {
    let s = svd(m)?;
    let (r, c) = m.shape();
    let cutoff = rel_tol * s.sigma.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(c, r);
    for (k, &sv) in s.sigma.iter().enumerate() {
        if sv > cutoff && sv > 0.0 {
            let vk = s.v.column(k);
            let uk = s.u.column(k);
            out += (vk * uk.adjoint()) * Complex::new(1.0 / sv, 0.0);
        }
    }
    Ok(out)
}

/// Moore-Penrose inverse of the best rank-`rank` approximation of `m`.
pub fn pinv_rank(m: &CMat, rank: usize) -> Result<CMat> {
    let s = svd(m)?;
    let (r, c) = m.shape();
    let mut out = CMat::zeros(c, r);
    for (k, &sv) in s.sigma.iter().enumerate().take(rank) {
        if sv > 0.0 {
            out += (s.v.column(k) * s.u.column(k).adjoint()) * Complex::new(1.0 / sv, 0.0);
        }
    }
    Ok(out)
}

pub fn to_matrix(m: &CMat) -> Result<Matrix> {
    Matrix::from_dmatrix(m)
}
