//! Drazin, group, gs-Drazin, g-Hirano and g-pi-Hirano inverses, and the
//! one-pass classifier.
//!
//! All classes share one inverse value: in `M_n(C)` each of them, when it
//! exists, is the Drazin inverse. What differs is the membership test, which
//! is a condition on the nonzero eigenvalues:
//!
//! ```text
//!   gs-Drazin   spectrum in {0, 1}
//!   g-Hirano    spectrum in {0, 1, -1}
//!   g-pi-Hirano spectrum in {0} and roots of unity
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::matrix::{Complex, Matrix};
use crate::spectral::{self, Analysis, Spectrum};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseKind {
    Drazin,
    Group,
    GPiHirano,
    GsDrazin,
    GHirano,
}

/// Defining-equation residuals, each divided by its natural scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `||xax - x|| / max(1, ||x||^2 ||a||)`
    pub xax_minus_x: f64,
    /// `||ax - xa|| / max(1, 2 ||a|| ||x||)`
    pub ax_minus_xa: f64,
    /// Spectral radius of the class-defining element over its scale.
    pub qnil_margin: f64,
}

impl Residuals {
    pub fn worst(&self) -> f64 {
        self.xax_minus_x.max(self.ax_minus_xa).max(self.qnil_margin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseWitness {
    pub x: Matrix,
    pub kind: InverseKind,
    pub witness_n: Option<u64>,
    pub drazin_index: usize,
    pub residuals: Residuals,
    /// `(1 + ||Z||)^2` for the coupling `Z` of the spectral projector.
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub spectrum: Spectrum,
    pub drazin_index: usize,
    pub invertible: bool,
    pub group_invertible: bool,
    pub g_drazin: bool,
    pub gs_drazin: bool,
    pub g_hirano: bool,
    pub g_pi_hirano: bool,
    pub quasinilpotent: bool,
    pub gpih_witness_n: Option<u64>,
    /// Set when the witness lcm exceeds `n_oracle * n_max_unity`; the
    /// membership flag still stands but no power check was made.
    pub witness_overflow: bool,
}

/// Classification of an already analysed element.
pub fn classify_analysis(an: &Analysis, tol: &Tolerances) -> Result<ClassificationReport> {
    if an.core_ambiguous(tol) {
        return Err(Error::NumericAmbiguity(format!(
            "undeflated core is within {:.3e} of singular (smallest eigenvalue modulus {:.3e})",
            an.core_sigma_min,
            an.core_eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
        )));
    }
    let orders: Vec<Option<u32>> = an.core_eigenvalues.iter().map(|&z| spectral::unity_order(z, tol)).collect();

    let g_pi_hirano = orders.iter().all(Option::is_some);
    let g_hirano = orders.iter().all(|o| matches!(o, Some(1 | 2)));
    let gs_drazin = orders.iter().all(|o| *o == Some(1));
    let mut witness = None;
    let mut overflow = false;
    if g_pi_hirano {
        let mut l = 1u64;
        for q in orders.iter().flatten() {
            l = spectral::lcm(l, u64::from(*q)).unwrap_or(u64::MAX);
        }
        overflow = l > u64::from(tol.n_oracle) * u64::from(tol.n_max_unity);
        witness = Some(l);
    }

    let index = an.index();
    Ok(ClassificationReport {
        spectrum: an.spectrum(),
        drazin_index: index,
        invertible: an.split.nil_dim() == 0,
        group_invertible: index <= 1,
        g_drazin: true,
        gs_drazin,
        g_hirano,
        g_pi_hirano,
        quasinilpotent: an.core_eigenvalues.is_empty(),
        gpih_witness_n: witness,
        witness_overflow: overflow,
    })
}

pub fn classify(a: &Matrix, tol: &Tolerances) -> Result<ClassificationReport> {
    classify_at_scale(a, 0.0, tol)
}

/// Classification of an element whose natural size is `scale`, e.g. the
/// product of the factor norms for `ab`.
pub fn classify_at_scale(a: &Matrix, scale: f64, tol: &Tolerances) -> Result<ClassificationReport> {
    classify_analysis(&spectral::analyze(a, scale, tol)?, tol)
}

/// Drazin inverse from the unitary core-nilpotent split
/// `Q^H a Q = [[N, X], [0, C]]`:
///
/// ```text
///   a^D = Q [[0, Y], [0, C^-1]] Q^H,   Y = sum_{j < k} N^j X C^-(j+2)
/// ```
pub fn drazin(a: &Matrix, tol: &Tolerances) -> Result<InverseWitness> {
    drazin_at_scale(a, 0.0, tol)
}

/// Drazin inverse of a derived element whose natural size is `scale`.
pub fn drazin_at_scale(a: &Matrix, scale: f64, tol: &Tolerances) -> Result<InverseWitness> {
    let an = spectral::analyze(a, scale, tol)?;
    drazin_from(a, &an, tol)
}

fn drazin_from(a: &Matrix, an: &Analysis, tol: &Tolerances) -> Result<InverseWitness> {
    let n = a.order();
    let split = &an.split;
    let z = split.nil_dim();
    let r = split.core_dim();
    let k = split.index();

    let mut xt = CMat::zeros(n, n);
    let mut estimate = 1.0;
    if r > 0 {
        let c_inv = linalg::inverse(&split.core())?;
        xt.view_mut((z, z), (r, r)).copy_from(&c_inv);
        if z > 0 {
            let nil = split.nilpotent_block();
            let coupling = split.coupling();
            // term_j = N^j X C^-(j+2)
            let mut term = &coupling * &c_inv * &c_inv;
            let mut y = term.clone();
            for _ in 1..k {
                term = &nil * term * &c_inv;
                y += &term;
            }
            let zc = &y * split.core();
            estimate = (1.0 + linalg::fro(&zc)).powi(2);
            xt.view_mut((0, z), (z, r)).copy_from(&y);
        }
    }
    if estimate > tol.cond_max {
        return Err(Error::IllConditioned {
            estimate,
            bound: tol.cond_max,
        });
    }
    let x = linalg::to_matrix(&(&split.q * xt * split.q.adjoint()))?;

    // a - a^2 x
    let a2x = &(a * a) * &x;
    let residuals = residuals_for(a, &x, &(a - &a2x), a.norm_fro() + a2x.norm_fro(), tol)?;
    Ok(InverseWitness {
        x,
        kind: InverseKind::Drazin,
        witness_n: None,
        drazin_index: k,
        residuals,
        condition_estimate: estimate,
    })
}

/// Residuals of `x` as an inverse of `a` whose class-defining element is
/// `defining` (natural size `scale`); errors if that element is not nilpotent.
fn residuals_for(a: &Matrix, x: &Matrix, defining: &Matrix, scale: f64, tol: &Tolerances) -> Result<Residuals> {
    let na = a.norm_fro();
    let nx = x.norm_fro();
    let xax = &(x * a) * x;
    let comm = &(a * x) - &(x * a);
    if !spectral::is_quasinilpotent_at_scale(defining, scale, tol)? {
        return Err(Error::NumericAmbiguity(
            "class-defining element of the computed inverse is not nilpotent".into(),
        ));
    }
    let an = spectral::analyze(defining, scale, tol)?;
    Ok(Residuals {
        xax_minus_x: (&xax - x).norm_fro() / (nx * nx * na).max(1.0),
        ax_minus_xa: comm.norm_fro() / (2.0 * na * nx).max(1.0),
        qnil_margin: an.core_radius() / scale.max(1.0),
    })
}

/// Group inverse: the Drazin inverse when the index is at most 1.
pub fn group(a: &Matrix, tol: &Tolerances) -> Result<Option<InverseWitness>> {
    let an = spectral::analyze(a, 0.0, tol)?;
    if an.index() > 1 {
        return Ok(None);
    }
    let mut w = drazin_from(a, &an, tol)?;
    w.kind = InverseKind::Group;
    Ok(Some(w))
}

/// g-pi-Hirano inverse with witness exponent `n = lcm` of the unity orders;
/// `a - a^{n+2} x` is checked to be nilpotent before returning.
pub fn g_pi_hirano(a: &Matrix, tol: &Tolerances) -> Result<Option<InverseWitness>> {
    let an = spectral::analyze(a, 0.0, tol)?;
    let report = classify_analysis(&an, tol)?;
    if !report.g_pi_hirano {
        return Ok(None);
    }
    let n = report.gpih_witness_n.unwrap_or(1);
    if report.witness_overflow {
        return Err(Error::WitnessOverflow {
            lcm: n,
            limit: u64::from(tol.n_oracle) * u64::from(tol.n_max_unity),
        });
    }
    let mut w = drazin_from(a, &an, tol)?;
    let p = a.power(n + 2)?;
    let px = &p * &w.x;
    w.residuals = residuals_for(a, &w.x, &(a - &px), a.norm_fro() + px.norm_fro(), tol)?;
    w.kind = InverseKind::GPiHirano;
    w.witness_n = Some(n);
    Ok(Some(w))
}

/// gs-Drazin inverse; exists iff `a - a^2` is nilpotent. Checked: `a - ax`.
pub fn gs_drazin(a: &Matrix, tol: &Tolerances) -> Result<Option<InverseWitness>> {
    let an = spectral::analyze(a, 0.0, tol)?;
    if !classify_analysis(&an, tol)?.gs_drazin {
        return Ok(None);
    }
    let mut w = drazin_from(a, &an, tol)?;
    let ax = a * &w.x;
    w.residuals = residuals_for(a, &w.x, &(a - &ax), a.norm_fro() + ax.norm_fro(), tol)?;
    w.kind = InverseKind::GsDrazin;
    Ok(Some(w))
}

/// g-Hirano inverse; exists iff `a - a^3` is nilpotent. Checked: `a^2 - ax`.
pub fn g_hirano(a: &Matrix, tol: &Tolerances) -> Result<Option<InverseWitness>> {
    let an = spectral::analyze(a, 0.0, tol)?;
    if !classify_analysis(&an, tol)?.g_hirano {
        return Ok(None);
    }
    let mut w = drazin_from(a, &an, tol)?;
    let a2 = a * a;
    let ax = a * &w.x;
    w.residuals = residuals_for(a, &w.x, &(&a2 - &ax), a2.norm_fro() + ax.norm_fro(), tol)?;
    w.kind = InverseKind::GHirano;
    Ok(Some(w))
}

pub fn invert(a: &Matrix, kind: InverseKind, tol: &Tolerances) -> Result<Option<InverseWitness>> {
    match kind {
        InverseKind::Drazin => drazin(a, tol).map(Some),
        InverseKind::Group => group(a, tol),
        InverseKind::GPiHirano => g_pi_hirano(a, tol),
        InverseKind::GsDrazin => gs_drazin(a, tol),
        InverseKind::GHirano => g_hirano(a, tol),
    }
}

/// Moore-Penrose inverse with relative cutoff `tol_rank`.
pub fn pinv(a: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    linalg::to_matrix(&linalg::pinv_dm(&a.to_dmatrix(), tol.tol_rank)?)
}

/// Independent Drazin oracle `a^k (a^{2k+1})^+ a^k` with `k = index(a)`.
///
/// The pseudoinverse is truncated at the core dimension: a relative cutoff
/// cannot separate the rounding left in `a^{2k+1}` by the nilpotent part
/// from genuinely small singular values of the core.
pub fn drazin_pinv_formula(a: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let an = spectral::analyze(a, 0.0, tol)?;
    let k = an.index() as u64;
    let ak = a.power(k)?;
    let mid = linalg::pinv_rank(&a.power(2 * k + 1)?.to_dmatrix(), an.split.core_dim())?;
    Ok(&(&ak * &linalg::to_matrix(&mid)?) * &ak)
}

/// Smallest `n` in `1..=n_oracle` with `a - a^{n+1}` nilpotent.
pub fn g_pi_hirano_oracle(a: &Matrix, tol: &Tolerances) -> Result<Option<u32>> {
    let na = a.norm_fro();
    let mut p = a.clone();
    for n in 1..=tol.n_oracle {
        p = &p * a;
        if !p.is_finite() {
            return Err(Error::OverflowDetected("powering in the g-pi-Hirano oracle"));
        }
        if spectral::is_quasinilpotent_at_scale(&(a - &p), na + p.norm_fro(), tol)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// `1 + a^gpiH b` style helper: `I + x b`.
pub fn identity_plus(x: &Matrix, b: &Matrix) -> Matrix {
    (x * b).shift(Complex::new(1.0, 0.0))
}
