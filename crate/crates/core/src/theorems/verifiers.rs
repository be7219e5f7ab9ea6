//! One verifier per result family. Each checks its own precondition, then
//! asserts every leg whose hypotheses the instance satisfies; legs whose
//! hypotheses fail are recorded as not applicable.

use super::Outcome;
use crate::conditions::{check_word_condition, WordPattern, EXACT_ZERO};
use crate::error::{Error, Result};
use crate::ginverse::{self, classify_at_scale, drazin, drazin_at_scale, drazin_pinv_formula, g_pi_hirano, g_pi_hirano_oracle};
use crate::matrix::{Complex, Matrix};
use crate::spectral::{self, is_quasinilpotent_at_scale};
use crate::tolerances::Tolerances;

fn qnil(m: &Matrix, scale: f64, tol: &Tolerances) -> Result<bool> {
    is_quasinilpotent_at_scale(m, scale, tol)
}

fn gpih(m: &Matrix, scale: f64, tol: &Tolerances) -> Result<bool> {
    Ok(classify_at_scale(m, scale, tol)?.g_pi_hirano)
}

fn iff(p: bool, q: bool) -> bool {
    p == q
}

fn one() -> Complex {
    Complex::new(1.0, 0.0)
}

/// Commuting pair: a (or b) nilpotent gives ab nilpotent; both nilpotent
/// gives a + b nilpotent.
pub fn verify_commuting_qnil(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let (na, nb) = (a.norm_fro(), b.norm_fro());
    let comm = &(a * b) - &(b * a);
    if comm.norm_fro() > tol.tol_res * (2.0 * na * nb).max(1.0) {
        return Err(Error::PreconditionViolated("a and b do not commute".into()));
    }
    let mut out = Outcome::default();
    let (qa, qb) = (qnil(a, 0.0, tol)?, qnil(b, 0.0, tol)?);
    if qa || qb {
        out.leg("commuting: nilpotent factor gives nilpotent product", qnil(&(a * b), na * nb, tol)?);
    } else {
        out.not_applicable("commuting product");
    }
    if qa && qb {
        out.leg("commuting: nilpotent summands give nilpotent sum", qnil(&(a + b), na + nb, tol)?);
    } else {
        out.not_applicable("commuting sum");
    }
    Ok(out)
}

/// `ab = 0` with a, b nilpotent gives a + b nilpotent.
pub fn verify_zero_product_qnil(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let (na, nb) = (a.norm_fro(), b.norm_fro());
    if (a * b).norm_fro() > tol.tol_res * (na * nb).max(1.0) {
        return Err(Error::PreconditionViolated("ab is not zero".into()));
    }
    let mut out = Outcome::default();
    if qnil(a, 0.0, tol)? && qnil(b, 0.0, tol)? {
        out.leg("zero product: nilpotent summands give nilpotent sum", qnil(&(a + b), na + nb, tol)?);
    } else {
        out.not_applicable("zero product sum");
    }
    Ok(out)
}

/// `a` nilpotent iff `a^k` nilpotent (k = 2, 3); gs-Drazin iff `a - a^2`
/// nilpotent; g-Hirano iff `a - a^3` nilpotent.
pub fn verify_power_and_gs(a: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let mut out = Outcome::default();
    let na = a.norm_fro();
    let q = qnil(a, 0.0, tol)?;
    for k in [2u64, 3] {
        let ak = a.power(k)?;
        out.leg(
            &format!("nilpotency preserved by power {k}"),
            iff(q, qnil(&ak, na.powi(k as i32), tol)?),
        );
    }
    let r = ginverse::classify(a, tol)?;
    let a2 = a * a;
    let a3 = &a2 * a;
    out.leg(
        "gs-Drazin iff a - a^2 nilpotent",
        iff(r.gs_drazin, qnil(&(a - &a2), na + a2.norm_fro(), tol)?),
    );
    out.leg(
        "g-Hirano iff a - a^3 nilpotent",
        iff(r.g_hirano, qnil(&(a - &a3), na + a3.norm_fro(), tol)?),
    );
    out.leg("gs-Drazin implies g-Hirano", !r.gs_drazin || r.g_hirano);
    out.leg("g-Hirano implies g-pi-Hirano", !r.g_hirano || r.g_pi_hirano);
    out.leg("nilpotent implies g-pi-Hirano", !r.quasinilpotent || r.g_pi_hirano);
    Ok(out)
}

/// Spectral classifier, brute-force oracle and (optionally) the pairwise
/// `a^m - a^n` search agree; witness identities hold; membership passes to
/// powers.
pub fn verify_existence_equivalences(a: &Matrix, pairwise: bool, tol: &Tolerances) -> Result<Outcome> {
    let mut out = Outcome::default();
    let r = ginverse::classify(a, tol)?;
    let oracle = g_pi_hirano_oracle(a, tol)?;
    let reachable = r.gpih_witness_n.is_none_or(|w| w <= u64::from(tol.n_oracle));
    if reachable {
        out.leg_with("classifier agrees with the power oracle", iff(r.g_pi_hirano, oracle.is_some()), || {
            format!("classifier {:?}, oracle {:?}", r.gpih_witness_n, oracle)
        });
        if let (Some(w), Some(n)) = (r.gpih_witness_n, oracle) {
            out.leg_with("smallest oracle exponent equals the witness lcm", w == u64::from(n), || {
                format!("witness {w}, oracle {n}")
            });
        }
    } else {
        out.not_applicable("witness beyond oracle range");
    }

    if pairwise {
        if r.gpih_witness_n.is_none_or(|w| w < u64::from(tol.n_oracle)) {
            let found = pairwise_search(a, tol)?;
            out.leg_with("pairwise a^m - a^n search agrees", iff(r.g_pi_hirano, found.is_some()), || {
                format!("classifier {:?}, pair {:?}", r.gpih_witness_n, found)
            });
            if let (Some(w), Some((m, n))) = (r.gpih_witness_n, found) {
                out.leg("pair gap is a multiple of the witness", (n - m) as u64 % w == 0);
            }
        } else {
            out.not_applicable("pairwise search range");
        }
    }

    if r.g_pi_hirano && !r.witness_overflow {
        let w = g_pi_hirano(a, tol)?.ok_or_else(|| Error::NumericAmbiguity("classifier and inverse disagree".into()))?;
        out.residual(w.residuals.worst());
        out.leg_with("defining identities of the inverse", w.residuals.worst() <= tol.tol_res, || {
            format!("{:?}", w.residuals)
        });
        let n = w.witness_n.unwrap_or(1);
        let an = a.power(n)?;
        let ax = a * &w.x;
        out.leg(
            "a^n - ax nilpotent at the witness",
            qnil(&(&an - &ax), an.norm_fro() + ax.norm_fro(), tol)?,
        );
    } else if !r.g_pi_hirano {
        out.not_applicable("inverse identities");
    }

    let na = a.norm_fro();
    for k in [2u64, 3] {
        let ak = a.power(k)?;
        out.leg(
            &format!("membership passes to power {k}"),
            iff(r.g_pi_hirano, gpih(&ak, na.powi(k as i32), tol)?),
        );
    }
    Ok(out)
}

/// First `(m, n)`, `1 <= m < n <= n_oracle`, with `a^m - a^n` nilpotent,
/// scanning by gap `n - m`.
pub fn pairwise_search(a: &Matrix, tol: &Tolerances) -> Result<Option<(usize, usize)>> {
    let top = tol.n_oracle as usize;
    let mut powers = Vec::with_capacity(top + 1);
    powers.push(Matrix::identity(a.order()));
    for i in 1..=top {
        let next = &powers[i - 1] * a;
        if !next.is_finite() {
            return Err(Error::OverflowDetected("powering in the pairwise search"));
        }
        powers.push(next);
    }
    let norms: Vec<f64> = powers.iter().map(Matrix::norm_fro).collect();
    for gap in 1..top {
        for m in 1..=top - gap {
            let n = m + gap;
            if qnil(&(&powers[m] - &powers[n]), norms[m] + norms[n], tol)? {
                return Ok(Some((m, n)));
            }
        }
    }
    Ok(None)
}

/// Under a k-star pattern: nilpotency and g-pi-Hirano membership of the pair
/// are each equivalent to that of the sum.
pub fn verify_additive_kstar(a: &Matrix, b: &Matrix, k: usize, pattern: WordPattern, tol: &Tolerances) -> Result<Outcome> {
    if !pattern.is_star() {
        return Err(Error::InvalidArgument(format!("{pattern} is not a k-star pattern")));
    }
    let pre = check_word_condition(a, b, k, pattern, tol)?;
    if !pre.holds {
        return Err(Error::PreconditionViolated(format!(
            "{pattern} condition fails at k = {k} (residual {:.3e})",
            pre.worst_residual
        )));
    }
    let mut out = Outcome::default();
    out.residual(pre.worst_residual);
    let s = a + b;
    let scale = a.norm_fro() + b.norm_fro();
    let (qa, qb, qs) = (qnil(a, 0.0, tol)?, qnil(b, 0.0, tol)?, qnil(&s, scale, tol)?);
    out.leg_with("pair nilpotent iff sum nilpotent", iff(qa && qb, qs), || {
        format!("a {qa}, b {qb}, a+b {qs}")
    });
    let (ga, gb, gs) = (gpih(a, 0.0, tol)?, gpih(b, 0.0, tol)?, gpih(&s, scale, tol)?);
    out.leg_with("pair g-pi-Hirano iff sum g-pi-Hirano", iff(ga && gb, gs), || {
        format!("a {ga}, b {gb}, a+b {gs}")
    });
    Ok(out)
}

/// `ab = ba = 0`. Drazin membership of the pair and of the sum is automatic
/// in finite dimension, so the substance is `(a+b)^D = a^D + b^D` and the
/// decomposition `a = x1 + x2` with `x1 = a^2 (a+b)^D`, `x2` nilpotent.
pub fn verify_drazin_additive(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let (na, nb) = (a.norm_fro(), b.norm_fro());
    let bound = EXACT_ZERO * (na * nb).max(1.0);
    if (a * b).norm_fro() > bound || (b * a).norm_fro() > bound {
        return Err(Error::PreconditionViolated("ab and ba are not both zero".into()));
    }
    let mut out = Outcome::default();
    let s = a + b;
    let wa = drazin(a, tol)?;
    let wb = drazin(b, tol)?;
    let ws = drazin(&s, tol)?;
    out.leg("membership (every matrix is Drazin invertible)", true);

    let sum = &wa.x + &wb.x;
    let scale = (wa.x.norm_fro() + wb.x.norm_fro()).max(1.0);
    let r = (&ws.x - &sum).norm_fro() / scale;
    out.residual(r);
    out.leg_with("(a+b)^D = a^D + b^D", r <= tol.tol_res, || format!("residual {r:.3e}"));

    let a2 = a * a;
    let x1 = &a2 * &ws.x;
    let x2 = a - &x1;
    out.leg(
        "x2 = a - a^2 (a+b)^D nilpotent",
        qnil(&x2, na + x1.norm_fro(), tol)?,
    );
    let x1d = drazin_at_scale(&x1, na * na * ws.x.norm_fro(), tol)?;
    let formula = &(a * &ws.x) * &ws.x;
    let r1 = (&x1d.x - &formula).norm_fro() / x1d.x.norm_fro().max(1.0);
    out.residual(r1);
    out.leg_with("x1^D = a ((a+b)^D)^2", r1 <= tol.tol_res, || format!("residual {r1:.3e}"));
    Ok(out)
}

/// `x = [[a, c], [0, b]]`, `y = [[b, 0], [c, a]]`: nilpotency and
/// g-pi-Hirano membership of `x` and `y` are those of the pair.
pub fn verify_block_triangular(a: &Matrix, b: &Matrix, c_off: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let z = Matrix::zeros(a.order());
    let x = Matrix::from_blocks2(a, c_off, &z, b)?;
    let y = Matrix::from_blocks2(b, &z, c_off, a)?;
    let (qa, qb) = (qnil(a, 0.0, tol)?, qnil(b, 0.0, tol)?);
    let (ga, gb) = (gpih(a, 0.0, tol)?, gpih(b, 0.0, tol)?);
    let mut out = Outcome::default();
    for (name, m) in [("upper", &x), ("lower", &y)] {
        out.leg(&format!("{name} triangular nilpotent iff both diagonal blocks"), iff(qa && qb, qnil(m, 0.0, tol)?));
        out.leg(
            &format!("{name} triangular g-pi-Hirano iff both diagonal blocks"),
            iff(ga && gb, gpih(m, 0.0, tol)?),
        );
    }
    Ok(out)
}

/// Under a k-ast pattern: product and sum properties, and the equivalence
/// `I + a^gpiH b` g-pi-Hirano iff `a + b` g-pi-Hirano when both are members.
pub fn verify_k_ast_properties(a: &Matrix, b: &Matrix, k: usize, pattern: WordPattern, tol: &Tolerances) -> Result<Outcome> {
    if pattern.is_star() {
        return Err(Error::InvalidArgument(format!("{pattern} is not a k-ast pattern")));
    }
    let pre = check_word_condition(a, b, k, pattern, tol)?;
    if !pre.holds {
        return Err(Error::PreconditionViolated(format!(
            "{pattern} condition fails at k = {k} (residual {:.3e})",
            pre.worst_residual
        )));
    }
    let mut out = Outcome::default();
    out.residual(pre.worst_residual);
    let (na, nb) = (a.norm_fro(), b.norm_fro());
    let ab = a * b;
    let s = a + b;
    let (qa, qb) = (qnil(a, 0.0, tol)?, qnil(b, 0.0, tol)?);
    let (ga, gb) = (gpih(a, 0.0, tol)?, gpih(b, 0.0, tol)?);
    let gs = gpih(&s, na + nb, tol)?;

    if pattern == WordPattern::AstLeft {
        if qa || qb {
            out.leg("nilpotent factor gives nilpotent product", qnil(&ab, na * nb, tol)?);
        } else {
            out.not_applicable("product nilpotency");
        }
        if qa {
            out.leg("with a nilpotent: b nilpotent iff a + b nilpotent", iff(qb, qnil(&s, na + nb, tol)?));
        } else {
            out.not_applicable("sum nilpotency");
        }
        if ga && gb {
            out.leg("members give a member product", gpih(&ab, na * nb, tol)?);
        } else {
            out.not_applicable("product membership");
        }
        if qa && gb {
            out.leg("nilpotent plus member is a member", gs);
        } else {
            out.not_applicable("sum membership");
        }
    }

    if ga {
        let x = g_pi_hirano(a, tol)?.ok_or_else(|| Error::NumericAmbiguity("classifier and inverse disagree".into()))?.x;
        let unit = ginverse::identity_plus(&x, b);
        let gu = gpih(&unit, 1.0 + x.norm_fro() * nb, tol)?;
        if gb {
            out.leg_with("I + a^gpiH b member iff a + b member", iff(gu, gs), || {
                format!("I + xb {gu}, a+b {gs}")
            });
        } else {
            out.leg("a + b member implies I + a^gpiH b member", !gs || gu);
        }
    } else {
        out.not_applicable("unit perturbation");
    }
    Ok(out)
}

/// `M = [[a, b], [c, 0]]`: under the k-star condition on `(a, bc)` or on
/// `(bc, a)`, M is g-pi-Hirano iff `a` and `bc` are; `bc` and `cb` share
/// membership; for `a = b = I`, `c` nilpotent iff M is g-Hirano.
pub fn verify_anti_triangular(a: &Matrix, b: &Matrix, c: &Matrix, k: usize, tol: &Tolerances) -> Result<Outcome> {
    let z = Matrix::zeros(a.order());
    let m = Matrix::from_blocks2(a, b, c, &z)?;
    let bc = b.try_mul(c)?;
    let cb = c * b;
    let nbc = b.norm_fro() * c.norm_fro();
    let mut out = Outcome::default();

    let left = check_word_condition(a, &bc, k, WordPattern::StarLeft, tol)?;
    let right = check_word_condition(&bc, a, k, WordPattern::StarLeft, tol)?;
    if left.holds || right.holds {
        let ga = gpih(a, 0.0, tol)?;
        let gbc = gpih(&bc, nbc, tol)?;
        let gm = gpih(&m, 0.0, tol)?;
        out.leg_with("a and bc members iff M member", iff(ga && gbc, gm), || {
            format!("a {ga}, bc {gbc}, M {gm}")
        });
    } else {
        out.not_applicable("k-star precondition");
    }

    out.leg(
        "bc member iff cb member",
        iff(gpih(&bc, nbc, tol)?, gpih(&cb, nbc, tol)?),
    );

    let id = Matrix::identity(a.order());
    if *a == id && *b == id {
        out.merge(verify_unit_anti_triangular(c, tol)?);
    }
    Ok(out)
}

/// `M = [[I, I], [c, 0]]`: c nilpotent iff M g-Hirano, and `M - M^3` equals
/// `-[[2c, c], [c^2, c]]`.
pub fn verify_unit_anti_triangular(c: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let n = c.order();
    let id = Matrix::identity(n);
    let m = Matrix::from_blocks2(&id, &id, c, &Matrix::zeros(n))?;
    let mut out = Outcome::default();
    let qc = qnil(c, 0.0, tol)?;
    let r = ginverse::classify(&m, tol)?;
    out.leg_with("c nilpotent iff M g-Hirano", iff(qc, r.g_hirano), || {
        format!("c nilpotent {qc}, M g-Hirano {}", r.g_hirano)
    });
    if qc {
        out.leg("c nilpotent gives M g-pi-Hirano", r.g_pi_hirano);
    }
    let m3 = &(&m * &m) * &m;
    let n_direct = &m - &m3;
    let c2 = c * c;
    let n_formula = Matrix::from_blocks2(&c.scale_real(2.0), c, &c2, c)?.scale(-one());
    let resid = (&n_direct - &n_formula).norm_fro() / (m.norm_fro() + m3.norm_fro()).max(1.0);
    out.residual(resid);
    out.leg("M - M^3 = -[[2c, c], [c^2, c]]", resid <= tol.tol_res);
    Ok(out)
}

/// `ab` and `ba` are g-pi-Hirano together.
pub fn verify_product_swap(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let s = a.norm_fro() * b.norm_fro();
    let gab = gpih(&(a * b), s, tol)?;
    let gba = gpih(&(b * a), s, tol)?;
    let mut out = Outcome::default();
    out.leg_with("ab member iff ba member", iff(gab, gba), || format!("ab {gab}, ba {gba}"));
    Ok(out)
}

/// Drazin inverse: defining identities, agreement with the Moore-Penrose
/// formula, index, group inverse existence and `a^j - a^{j+1} x` nilpotent.
pub fn verify_drazin_engine(a: &Matrix, tol: &Tolerances) -> Result<Outcome> {
    let mut out = Outcome::default();
    let w = drazin(a, tol)?;
    out.residual(w.residuals.worst());
    out.leg_with("defining identities", w.residuals.worst() <= tol.tol_res, || format!("{:?}", w.residuals));

    let oracle = drazin_pinv_formula(a, tol)?;
    let d = (&w.x - &oracle).norm_fro() / w.x.norm_fro().max(1.0);
    out.residual(d * 1e-2);
    out.leg_with("agrees with a^k (a^(2k+1))^+ a^k", d <= 1e-6, || format!("difference {d:.3e}"));

    out.leg("index matches", w.drazin_index == spectral::index(a, tol)?);
    out.leg(
        "group inverse exists iff index <= 1",
        iff(ginverse::group(a, tol)?.is_some(), w.drazin_index <= 1),
    );
    for j in 1..=3u64 {
        let aj = a.power(j)?;
        let t = &(&aj * a) * &w.x;
        out.leg(
            &format!("a^{j} - a^{} x nilpotent", j + 1),
            qnil(&(&aj - &t), aj.norm_fro() + t.norm_fro(), tol)?,
        );
    }
    Ok(out)
}

/// A word condition at `k` implies the same condition at `k + 1`.
pub fn verify_word_monotonicity(a: &Matrix, b: &Matrix, k: usize, pattern: WordPattern, tol: &Tolerances) -> Result<Outcome> {
    let mut out = Outcome::default();
    let now = check_word_condition(a, b, k, pattern, tol)?;
    if now.holds {
        let next = check_word_condition(a, b, k + 1, pattern, tol)?;
        out.residual(next.worst_residual);
        out.leg_with(&format!("{pattern} at k implies k + 1"), next.holds, || {
            format!("k = {k}, residual at k + 1 {:.3e}", next.worst_residual)
        });
    } else {
        out.not_applicable("condition fails at k");
    }
    Ok(out)
}
