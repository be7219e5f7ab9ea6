//! Spectra, spectral radius, numeric rank, index and quasinilpotency.
//!
//! The zero eigenvalue is never read off the QR iteration: it is deflated
//! first by [`staircase::deflate_zero`], whose decision is backward stable
//! even for large nilpotent Jordan blocks (whose computed eigenvalues would
//! scatter on a circle of radius `eps^(1/m)`). The QR iteration then only
//! sees the invertible core. Core eigenvalues that land near the same root of
//! unity are averaged, which recovers defective unity eigenvalues to roughly
//! working accuracy.

pub mod eig;
pub mod staircase;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::matrix::{Complex, Matrix};
use crate::tolerances::Tolerances;

pub use staircase::CoreNilpotent;

/// Eigenvalues with algebraic multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex>,
}

impl Spectrum {
    pub fn radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex {
        self.eigenvalues.iter().sum()
    }

    pub fn product(&self) -> Complex {
        self.eigenvalues.iter().product()
    }

    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn sorted(&self) -> Vec<Complex> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }
}

/// Everything the classifiers need from one pass over `a`.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub order: usize,
    pub norm: f64,
    /// `max(||a||_F, caller scale)`.
    pub scale: f64,
    pub threshold: f64,
    pub split: CoreNilpotent,
    /// Refined eigenvalues of the invertible core.
    pub core_eigenvalues: Vec<Complex>,
    /// Smallest singular value of the core (infinite for an empty core).
    pub core_sigma_min: f64,
}

/// Largest modulus ratio inside a ring of split zeros.
const RING_SPREAD: f64 = 2.0;
/// Backward error, in machine epsilons times scale, allowed for rounding.
const ROUNDING_ULPS: f64 = 1e4;

impl Analysis {
    pub fn spectrum(&self) -> Spectrum {
        let mut eigenvalues = vec![Complex::new(0.0, 0.0); self.split.nil_dim()];
        eigenvalues.extend_from_slice(&self.core_eigenvalues);
        Spectrum { eigenvalues }
    }

    pub fn index(&self) -> usize {
        self.split.index()
    }

    pub fn core_radius(&self) -> f64 {
        self.core_eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Radius to which a Jordan-like cluster of `j` zeros in the core can
    /// split under a perturbation of size `delta`.
    fn split_radius(&self, j: usize, delta: f64) -> f64 {
        let c = linalg::fro(&self.split.core()).max(delta);
        let j = j as f64;
        delta.powf(1.0 / j) * c.powf(1.0 - 1.0 / j)
    }

    /// Whether the `j` smallest core eigenvalues could be a split cluster of
    /// zeros, for some `j` (or only `j = core_dim` when `all` is set). Needs
    /// the core within `tol_eig * scale` of singular to begin with.
    fn hides_zeros(&self, all: bool, tol: &Tolerances) -> bool {
        let delta = tol.tol_eig * self.scale.max(1.0);
        if self.core_sigma_min > delta {
            return false;
        }
        let moduli = self.sorted_moduli();
        let m = moduli.len();
        let range = if all { m..=m } else { 1..=m };
        range.into_iter().any(|j| moduli[j - 1] <= self.split_radius(j, delta))
    }

    fn rounding_delta(&self) -> f64 {
        ROUNDING_ULPS * f64::EPSILON * self.scale.max(1.0)
    }

    fn sorted_moduli(&self) -> Vec<f64> {
        let mut moduli: Vec<f64> = self.core_eigenvalues.iter().map(|z| z.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        moduli
    }

    /// Whether the whole core looks like one Jordan block of zeros split by
    /// rounding alone: a ring of near-equal moduli inside the radius reached
    /// by a perturbation of `ROUNDING_ULPS` machine epsilons. Traces of `C`
    /// and `C^2` must also vanish to `tol_eig`, which rules out rings of
    /// genuinely nonzero eigenvalues.
    pub fn core_is_rounding_ring(&self, tol: &Tolerances) -> bool {
        let moduli = self.sorted_moduli();
        let m = moduli.len();
        if m < 2 || moduli[m - 1] > RING_SPREAD * moduli[0] {
            return false;
        }
        if moduli[m - 1] > self.split_radius(m, self.rounding_delta()) {
            return false;
        }
        self.traces_vanish(tol.tol_eig * self.scale.max(1.0))
    }

    /// `tr C` and `tr C^2` within what a perturbation of size `delta` can
    /// leave behind when every eigenvalue of `C` is zero.
    fn traces_vanish(&self, delta: f64) -> bool {
        let core = self.split.core();
        let bound = core.nrows() as f64 * delta;
        let c = linalg::fro(&core).max(1.0);
        core.trace().norm() <= bound && (&core * &core).trace().norm() <= 2.0 * bound * c
    }

    /// The staircase may have stopped short: some core eigenvalues could be
    /// zeros split by rounding. Since `sigma_min <= |lambda|` this covers
    /// every tiny undeflated eigenvalue as well as non-normal cores.
    pub fn core_ambiguous(&self, tol: &Tolerances) -> bool {
        self.hides_zeros(false, tol)
    }

    /// As [`Analysis::core_ambiguous`], for the whole core at once, which
    /// must also have (near) vanishing traces.
    pub fn core_possibly_nilpotent(&self, tol: &Tolerances) -> bool {
        !self.core_eigenvalues.is_empty()
            && self.hides_zeros(true, tol)
            && self.traces_vanish(tol.tol_eig * self.scale.max(1.0))
    }
}

/// Core-nilpotent split plus refined core eigenvalues. Null-space decisions
/// use the cutoff `tol_rank * max(sigma_max(a), scale)`.
pub fn analyze(a: &Matrix, scale: f64, tol: &Tolerances) -> Result<Analysis> {
    let dm = a.to_dmatrix();
    let sigma_max = linalg::spectral_norm(&dm)?;
    let threshold = tol.tol_rank * sigma_max.max(scale);
    let split = staircase::deflate_zero(&dm, threshold)?;
    let raw = eig::eigenvalues(&split.core())?;
    let core_eigenvalues = average_unity_clusters(&raw, tol);
    let core_sigma_min = linalg::singular_values(&split.core())?
        .last()
        .copied()
        .unwrap_or(f64::INFINITY);
    Ok(Analysis {
        order: a.order(),
        norm: a.norm_fro(),
        scale: a.norm_fro().max(scale),
        threshold,
        split,
        core_eigenvalues,
        core_sigma_min,
    })
}

pub fn spectrum(a: &Matrix, tol: &Tolerances) -> Result<Spectrum> {
    Ok(analyze(a, 0.0, tol)?.spectrum())
}

pub fn spectral_radius(a: &Matrix, tol: &Tolerances) -> Result<f64> {
    Ok(spectrum(a, tol)?.radius())
}

pub fn is_quasinilpotent(a: &Matrix, tol: &Tolerances) -> Result<bool> {
    is_quasinilpotent_at_scale(a, 0.0, tol)
}

/// Quasinilpotency of an element whose natural size is `scale` (for a
/// difference such as `a - a^{n+1}`, the sum of the norms of the terms), so
/// that cancellation noise is not mistaken for a nonzero eigenvalue.
///
/// The spectral test decides; the normalized power test
/// `||(a / s)^n|| <= tol_res` must agree with it wherever it can see the
/// eigenvalue at all, i.e. unless `(rho / s)^n` is itself below `tol_res`.
/// When the two disagree and the whole core could be a cluster of zeros
/// split by rounding, the answer is ambiguous.
pub fn is_quasinilpotent_at_scale(a: &Matrix, scale: f64, tol: &Tolerances) -> Result<bool> {
    let analysis = analyze(a, scale, tol)?;
    let n = a.order();
    let s = scale.max(analysis.norm).max(1.0);
    let rho = analysis.core_radius();
    let spectral = rho <= tol.tol_eig * s;
    let normalized = a.scale_real(1.0 / s).power(n as u64)?;
    let power = normalized.norm_fro() <= tol.tol_res;

    if spectral == power {
        return Ok(spectral);
    }
    if !spectral && (analysis.core_possibly_nilpotent(tol) || analysis.core_is_rounding_ring(tol)) {
        return Err(Error::NumericAmbiguity(format!(
            "core is within {:.3e} of singular; remaining zero eigenvalues cannot be resolved",
            analysis.core_sigma_min
        )));
    }
    let visible = (rho / s).powi(n as i32) > tol.tol_res;
    if !spectral && !visible {
        return Ok(false);
    }
    Err(Error::NumericAmbiguity(format!(
        "spectral test (radius {rho:.3e}, cutoff {:.3e}) and power test (||(a/s)^n|| = {:.3e}) disagree",
        tol.tol_eig * s,
        normalized.norm_fro()
    )))
}

/// Number of singular values above `tol_rank * sigma_max`.
pub fn numeric_rank(a: &Matrix, tol: &Tolerances) -> Result<usize> {
    numeric_rank_at_scale(a, 0.0, tol)
}

/// As [`numeric_rank`] with the cutoff `tol_rank * max(sigma_max, scale)`,
/// for derived elements such as powers whose own norm may be pure rounding.
pub fn numeric_rank_at_scale(a: &Matrix, scale: f64, tol: &Tolerances) -> Result<usize> {
    let s = linalg::singular_values(&a.to_dmatrix())?;
    let Some(&top) = s.first() else { return Ok(0) };
    let cutoff = tol.tol_rank * top.max(scale);
    if cutoff == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > cutoff).count())
}

/// Smallest `k` with `rank(a^k) = rank(a^{k+1})`, read off the staircase.
pub fn index(a: &Matrix, tol: &Tolerances) -> Result<usize> {
    let dm = a.to_dmatrix();
    let threshold = tol.tol_rank * linalg::spectral_norm(&dm)?;
    Ok(staircase::deflate_zero(&dm, threshold)?.index())
}

/// Smallest order `q <= n_max_unity` of a root of unity within `tol_unity`
/// of `lambda`.
pub fn unity_order(lambda: Complex, tol: &Tolerances) -> Option<u32> {
    nearest_root(lambda, tol.tol_unity, tol.n_max_unity).map(|(_, q)| q)
}

/// `(p, q)` with `gcd(p, q) = 1` for the lowest-order root `e^{2 pi i p/q}`
/// within `radius` of `z`.
pub fn nearest_root(z: Complex, radius: f64, q_max: u32) -> Option<(u32, u32)> {
    if (z.norm() - 1.0).abs() > radius {
        return None;
    }
    let turns = (z.arg() / TAU).rem_euclid(1.0);
    for q in 1..=q_max {
        let qf = f64::from(q);
        let p = ((turns * qf).round() as u32) % q;
        let root = Complex::from_polar(1.0, TAU * f64::from(p) / qf);
        if (z - root).norm() <= radius {
            let g = gcd(u64::from(p), u64::from(q)) as u32;
            return Some((p / g, q / g));
        }
    }
    None
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple, `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

fn average_unity_clusters(raw: &[Complex], tol: &Tolerances) -> Vec<Complex> {
    let mut groups: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (i, &z) in raw.iter().enumerate() {
        if let Some(key) = nearest_root(z, tol.tol_cluster, tol.n_max_unity) {
            groups.entry(key).or_default().push(i);
        }
    }
    let mut out = raw.to_vec();
    for members in groups.values().filter(|m| m.len() > 1) {
        let mean = members.iter().map(|&i| raw[i]).sum::<Complex>() / members.len() as f64;
        for &i in members {
            out[i] = mean;
        }
    }
    out
}

/// Algebraic multiplicity of `mu` as an eigenvalue of `a`, from the
/// staircase on `a - mu I` (cutoff relative to `max(||a||_2, |mu|)`).
pub fn algebraic_multiplicity(a: &Matrix, mu: Complex, tol: &Tolerances) -> Result<usize> {
    let shifted: CMat = a.shift(-mu).to_dmatrix();
    let scale = linalg::spectral_norm(&a.to_dmatrix())?.max(mu.norm());
    let split = staircase::deflate_zero(&shifted, tol.tol_rank * scale)?;
    Ok(split.nil_dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: Complex, b: Complex, eps: f64) -> bool {
        (a - b).norm() <= eps
    }

    #[test]
    fn spectrum_of_sixth_root_matrix() {
        let m = Matrix::from_real_rows(&[&[1.0, 1.0], &[-1.0, 0.0]]);
        let s = spectrum(&m, &tol()).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let mut got = s.sorted();
        got.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!(close(got[0], Complex::new(0.5, -h), 1e-12));
        assert!(close(got[1], Complex::new(0.5, h), 1e-12));
    }

    #[test]
    fn spectrum_of_nilpotent_and_golden() {
        let j = Matrix::jordan_nilpotent(2);
        assert_eq!(spectrum(&j, &tol()).unwrap().eigenvalues, vec![Complex::new(0.0, 0.0); 2]);
        let g = Matrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let s = spectrum(&g, &tol()).unwrap().sorted();
        let r5 = 5f64.sqrt();
        assert!(close(s[0], Complex::new((1.0 - r5) / 2.0, 0.0), 1e-12));
        assert!(close(s[1], Complex::new((1.0 + r5) / 2.0, 0.0), 1e-12));
    }

    #[test]
    fn radii() {
        assert!((spectral_radius(&Matrix::identity(3), &tol()).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(spectral_radius(&Matrix::jordan_nilpotent(3), &tol()).unwrap(), 0.0);
        assert!((spectral_radius(&Matrix::diag_real(&[2.0, 0.0]), &tol()).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quasinilpotency() {
        assert!(is_quasinilpotent(&Matrix::jordan_nilpotent(2), &tol()).unwrap());
        assert!(!is_quasinilpotent(&Matrix::identity(2), &tol()).unwrap());
        // N = [[2c, c], [c^2, c]] with c = J2.
        let c = Matrix::jordan_nilpotent(2);
        let n = Matrix::from_blocks2(&c.scale_real(2.0), &c, &(&c * &c), &c).unwrap();
        assert!(is_quasinilpotent(&n, &tol()).unwrap());
    }

    #[test]
    fn large_jordan_block_is_nilpotent() {
        // A 12x12 nilpotent Jordan block conjugated by a non-unitary similarity:
        // QR alone scatters its eigenvalues on a circle of radius ~1e-1.
        let n = 12;
        let j = Matrix::jordan_nilpotent(n);
        let mut s = Matrix::identity(n);
        for i in 0..n {
            for k in i + 1..n {
                s[(i, k)] = Complex::new(0.3 / (1.0 + (k - i) as f64), 0.1);
            }
        }
        let s_inv = linalg::to_matrix(&linalg::inverse(&s.to_dmatrix()).unwrap()).unwrap();
        let a = &(&s * &j) * &s_inv;
        assert!(is_quasinilpotent(&a, &tol()).unwrap());
        assert_eq!(index(&a, &tol()).unwrap(), n);
    }

    #[test]
    fn ranks() {
        assert_eq!(numeric_rank(&Matrix::identity(3), &tol()).unwrap(), 3);
        assert_eq!(numeric_rank(&Matrix::jordan_nilpotent(3), &tol()).unwrap(), 2);
        assert_eq!(numeric_rank(&Matrix::zeros(3), &tol()).unwrap(), 0);
    }

    #[test]
    fn indices() {
        assert_eq!(index(&Matrix::diag_real(&[2.0, -3.0]), &tol()).unwrap(), 0);
        assert_eq!(index(&Matrix::jordan_nilpotent(3), &tol()).unwrap(), 3);
        assert_eq!(index(&Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]), &tol()).unwrap(), 1);
        assert_eq!(index(&Matrix::zeros(2), &tol()).unwrap(), 1);
    }

    #[test]
    fn unity_orders() {
        let h = 3f64.sqrt() / 2.0;
        assert_eq!(unity_order(Complex::new(0.5, h), &tol()), Some(6));
        assert_eq!(unity_order(Complex::new(1.0, 0.0), &tol()), Some(1));
        assert_eq!(unity_order(Complex::new(2.0, 0.0), &tol()), None);
        assert_eq!(unity_order(Complex::new(-1.0, 1e-9), &tol()), Some(2));
        assert_eq!(unity_order(Complex::new(0.0, 0.0), &tol()), None);
    }

    #[test]
    fn defective_unity_eigenvalue_is_recovered() {
        // Jordan block of size 4 at e^{2 pi i / 5}.
        let w = Complex::from_polar(1.0, TAU / 5.0);
        let mut t = Matrix::jordan_nilpotent(4).shift(w);
        t[(0, 2)] = Complex::new(0.4, -0.2);
        let mut s = Matrix::identity(4);
        s[(3, 0)] = Complex::new(0.7, 0.0);
        s[(1, 2)] = Complex::new(-0.5, 0.3);
        let s_inv = linalg::to_matrix(&linalg::inverse(&s.to_dmatrix()).unwrap()).unwrap();
        let a = &(&s * &t) * &s_inv;
        let spec = spectrum(&a, &tol()).unwrap();
        for z in spec.eigenvalues {
            assert_eq!(unity_order(z, &tol()), Some(5), "{z}");
        }
    }

    #[test]
    fn multiplicity_by_staircase() {
        let a = Matrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        assert_eq!(algebraic_multiplicity(&a, Complex::new(1.0, 0.0), &tol()).unwrap(), 2);
        assert_eq!(algebraic_multiplicity(&a, Complex::new(2.0, 0.0), &tol()).unwrap(), 1);
        assert_eq!(algebraic_multiplicity(&a, Complex::new(3.0, 0.0), &tol()).unwrap(), 0);
    }

    #[test]
    fn lcm_and_gcd() {
        assert_eq!(lcm(4, 6), Some(12));
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(u64::MAX, 2), None);
    }
}
