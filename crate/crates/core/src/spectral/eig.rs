//! Eigenvalues of a dense complex matrix: closed form up to order 2,
//! otherwise Hessenberg reduction followed by single-shift QR sweeps
//! (Wilkinson shift, Givens bulge chase, exceptional shifts on stagnation).

use nalgebra::linalg::Hessenberg;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::matrix::Complex;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![a[(0, 0)]]),
        2 => Ok(eig2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]).to_vec()),
        _ => {
            let h = Hessenberg::new(a.clone()).h();
            hessenberg_qr(h)
        }
    }
}

/// Roots of `x^2 - (p + s) x + (p s - q r)`, the larger root taken first and
/// the smaller recovered from the determinant to avoid cancellation.
fn eig2(p: Complex, q: Complex, r: Complex, s: Complex) -> [Complex; 2] {
    let half_tr = (p + s) * 0.5;
    let half_diff = (p - s) * 0.5;
    let disc = (half_diff * half_diff + q * r).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let (big, small) = if l1.norm() >= l2.norm() { (l1, l2) } else { (l2, l1) };
    let det = p * s - q * r;
    if big.norm() > 0.0 && small.norm() < 1e-3 * big.norm() {
        [big, det / big]
    } else {
        [big, small]
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens(x: Complex, y: Complex) -> (f64, Complex) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson_shift(a: Complex, b: Complex, c: Complex, d: Complex) -> Complex {
    let [l1, l2] = eig2(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg_qr(mut h: CMat) -> Result<Vec<Complex>> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut eig = vec![Complex::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * n;

    loop {
        // Locate the start of the active unreduced block.
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if sub <= eps * s || sub <= f64::MIN_POSITIVE {
                h[(l, l - 1)] = Complex::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }

        if l == hi {
            eig[hi] = h[(hi, hi)];
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter = 0;
            continue;
        }
        if l + 1 == hi {
            let [l1, l2] = eig2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            eig[l] = l1;
            eig[hi] = l2;
            if l == 0 {
                break;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }

        total += 1;
        iter += 1;
        if total > budget {
            return Err(Error::ConvergenceFailure { iterations: total });
        }

        let mu = if iter % 11 == 0 {
            // Exceptional shift to break cycling.
            let t = h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm();
            h[(hi, hi)] + Complex::new(0.75 * t, 0.4 * t)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            let (c, s) = givens(x, y);
            let col_start = if k > l { k - 1 } else { l };
            for j in col_start..=hi {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = t1 * c + s * t2;
                h[(k + 1, j)] = -s.conj() * t1 + t2 * c;
            }
            let row_end = (k + 2).min(hi);
            for i in l..=row_end {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = t1 * c + t2 * s.conj();
                h[(i, k + 1)] = -t1 * s + t2 * c;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(eig)
}
