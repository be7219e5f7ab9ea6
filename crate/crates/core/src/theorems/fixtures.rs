//! Fixed instances with known answers, positive and negative, for each
//! membership class and for the anti-triangular k-star precondition.

use super::{inputs_digest, report_from, summarise, verifiers, Outcome, SuiteConfig, SuiteReport, TrialStatus};
use crate::conditions::{check_word_condition, WordPattern};
use crate::error::Result;
use crate::ginverse::{classify, drazin, g_hirano, g_pi_hirano, g_pi_hirano_oracle, identity_plus};
use crate::matrix::{Complex, Matrix};
use crate::spectral::spectrum;
use crate::tolerances::Tolerances;

type Fixture = fn(&Tolerances, &mut Vec<Matrix>) -> Result<Outcome>;

const FIXTURES: [(&str, Fixture); 9] = [
    ("fixture-sixth-root-anti-triangular", sixth_root),
    ("fixture-golden-anti-triangular", golden),
    ("fixture-scalar-sum", scalar_sum),
    ("fixture-anti-triangular-acb-zero", acb_zero),
    ("fixture-anti-triangular-cab-zero", cab_zero),
    ("fixture-disjoint-anti-triangular", disjoint),
    ("fixture-idempotent-unit-anti-triangular", idempotent_unit),
    ("fixture-drazin-block", drazin_block),
    ("fixture-reflection", reflection),
];

fn anti(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    Matrix::from_blocks2(a, b, c, &Matrix::zeros(a.order()))
}

fn k_star_fails(a: &Matrix, d: &Matrix, tol: &Tolerances) -> Result<bool> {
    for k in 1..=3 {
        if check_word_condition(a, d, k, WordPattern::StarLeft, tol)?.holds
            || check_word_condition(d, a, k, WordPattern::StarLeft, tol)?.holds
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `M = [[1, 1], [-1, 0]]`: eigenvalues are primitive sixth roots.
fn sixth_root(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let m = Matrix::from_real_rows(&[&[1.0, 1.0], &[-1.0, 0.0]]);
    inputs.push(m.clone());
    let mut out = Outcome::default();
    out.leg("M^6 = I", (&m.power(6)? - &Matrix::identity(2)).max_abs() <= 1e-12);
    let w = g_pi_hirano(&m, tol)?;
    let expected = Matrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 1.0]]);
    out.leg(
        "g-pi-Hirano inverse is the ordinary inverse",
        w.as_ref().is_some_and(|w| w.x.max_abs_diff(&expected) <= 1e-10),
    );
    out.leg("witness is 6", w.as_ref().and_then(|w| w.witness_n) == Some(6));
    out.leg("oracle exponent is 6", g_pi_hirano_oracle(&m, tol)? == Some(6));
    out.leg("not g-Hirano", g_hirano(&m, tol)?.is_none());
    let r = classify(&m, tol)?;
    out.leg("invertible but not gs-Drazin", r.invertible && !r.gs_drazin);
    Ok(out)
}

/// `M = [[1, 1], [1, 0]]`: the golden ratio leaves the unit circle.
fn golden(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let m = Matrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.0]]);
    inputs.push(m.clone());
    let mut out = Outcome::default();
    let r = classify(&m, tol)?;
    out.leg("not g-pi-Hirano", !r.g_pi_hirano && !r.g_hirano);
    out.leg("oracle finds no exponent", g_pi_hirano_oracle(&m, tol)?.is_none());
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    out.leg(
        "spectrum contains the golden ratio",
        r.spectrum.eigenvalues.iter().any(|z| (z - Complex::new(phi, 0.0)).norm() <= 1e-10),
    );
    let one = Matrix::identity(1);
    out.leg("scalar blocks are members", classify(&one, tol)?.g_pi_hirano);
    Ok(out)
}

/// `a = 0`, `b = 2`: `I + a^gpiH b = 1` is a member while `a + b = 2` is
/// not, so the equivalence needs `b` to be a member.
fn scalar_sum(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let a = Matrix::from_real_rows(&[&[0.0]]);
    let b = Matrix::from_real_rows(&[&[2.0]]);
    inputs.extend([a.clone(), b.clone()]);
    let mut out = Outcome::default();
    let x = g_pi_hirano(&a, tol)?.map(|w| w.x);
    out.leg("a^gpiH = 0", x.as_ref().is_some_and(|x| x.max_abs() == 0.0));
    let x = x.unwrap_or_else(|| Matrix::zeros(1));
    out.leg("I + a^gpiH b is a member", classify(&identity_plus(&x, &b), tol)?.g_pi_hirano);
    out.leg("a + b is not a member", !classify(&(&a + &b), tol)?.g_pi_hirano);
    out.leg("b is not a member", !classify(&b, tol)?.g_pi_hirano);
    out.merge(verifiers::verify_k_ast_properties(&a, &b, 1, WordPattern::AstLeft, tol)?);
    Ok(out)
}

/// `a = E11`, `b = E12`, `c = E21`: `acb = 0`, yet M is not a member; the
/// k-star precondition fails on both sides.
fn acb_zero(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let (a, b, c) = (Matrix::unit(2, 0, 0), Matrix::unit(2, 0, 1), Matrix::unit(2, 1, 0));
    inputs.extend([a.clone(), b.clone(), c.clone()]);
    counterexample(&a, &b, &c, (&(&a * &c) * &b).max_abs() == 0.0, "acb = 0", tol)
}

/// `a = [[0, 1], [1, 0]]`, `b = c = E11`: `cab = 0`, eigenvalues of M are
/// `+-sqrt 2` and 0.
fn cab_zero(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let a = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let (b, c) = (Matrix::unit(2, 0, 0), Matrix::unit(2, 0, 0));
    inputs.extend([a.clone(), b.clone(), c.clone()]);
    counterexample(&a, &b, &c, (&(&c * &a) * &b).max_abs() == 0.0, "cab = 0", tol)
}

fn counterexample(a: &Matrix, b: &Matrix, c: &Matrix, product_zero: bool, name: &str, tol: &Tolerances) -> Result<Outcome> {
    let bc = b * c;
    let m = anti(a, b, c)?;
    let mut out = Outcome::default();
    out.leg(name, product_zero);
    out.leg("a and bc are members", classify(a, tol)?.g_pi_hirano && classify(&bc, tol)?.g_pi_hirano);
    out.leg("M is not a member", !classify(&m, tol)?.g_pi_hirano);
    out.leg("k-star precondition fails", k_star_fails(a, &bc, tol)?);
    let radius = spectrum(&m, tol)?.radius();
    out.leg("M has an eigenvalue off the unit circle", (radius - 1.0).abs() > 0.1);
    Ok(out)
}

/// `a = E11`, `b = c = E22`: `a bc = 0`, so the precondition holds and M is
/// a member.
fn disjoint(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let (a, b, c) = (Matrix::unit(2, 0, 0), Matrix::unit(2, 1, 1), Matrix::unit(2, 1, 1));
    inputs.extend([a.clone(), b.clone(), c.clone()]);
    let mut out = Outcome::default();
    out.leg("k-star precondition holds", !k_star_fails(&a, &(&b * &c), tol)?);
    out.leg("M is a member", classify(&anti(&a, &b, &c)?, tol)?.g_pi_hirano);
    out.merge(verifiers::verify_anti_triangular(&a, &b, &c, 1, tol)?);
    Ok(out)
}

/// `a = b = 1`, `c = 0`: M is idempotent, hence g-Hirano.
fn idempotent_unit(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let c = Matrix::zeros(1);
    inputs.push(c.clone());
    let mut out = Outcome::default();
    let r = classify(&anti(&Matrix::identity(1), &Matrix::identity(1), &c)?, tol)?;
    out.leg("M is g-Hirano", r.g_hirano);
    out.leg("M is gs-Drazin", r.gs_drazin);
    out.merge(verifiers::verify_unit_anti_triangular(&c, tol)?);
    Ok(out)
}

/// `diag(2, J_2)`: Drazin inverse `diag(1/2, 0, 0)`, index 2, no group
/// inverse, not g-pi-Hirano.
fn drazin_block(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let a = Matrix::block_diag(&[&Matrix::from_real_rows(&[&[2.0]]), &Matrix::jordan_nilpotent(2)]);
    inputs.push(a.clone());
    let mut out = Outcome::default();
    let w = drazin(&a, tol)?;
    out.leg("Drazin inverse is diag(1/2, 0, 0)", w.x.max_abs_diff(&Matrix::diag_real(&[0.5, 0.0, 0.0])) <= 1e-10);
    out.leg("index 2", w.drazin_index == 2);
    let r = classify(&a, tol)?;
    out.leg("no group inverse", !r.group_invertible);
    out.leg("not g-pi-Hirano", !r.g_pi_hirano);
    Ok(out)
}

/// `diag(1, -1)`: g-Hirano but not gs-Drazin.
fn reflection(tol: &Tolerances, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let a = Matrix::diag_real(&[1.0, -1.0]);
    inputs.push(a.clone());
    let mut out = Outcome::default();
    let r = classify(&a, tol)?;
    out.leg("g-Hirano", r.g_hirano);
    out.leg("not gs-Drazin", !r.gs_drazin);
    out.leg("witness 2", r.gpih_witness_n == Some(2));
    Ok(out)
}

/// Runs every fixture once; each appears as its own one-trial entry.
pub fn run_fixtures(tol: &Tolerances) -> Result<SuiteReport> {
    tol.validate()?;
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (id, f) in FIXTURES {
        let mut inputs = Vec::new();
        let result = f(tol, &mut inputs);
        let refs: Vec<&Matrix> = inputs.iter().collect();
        let report = report_from(id, 0, 0, inputs_digest(&refs), result);
        summaries.push(summarise(id, std::slice::from_ref(&report), None));
        if report.status != TrialStatus::Holds {
            failures.push(report);
        }
    }
    let cfg = SuiteConfig {
        trials: 1,
        ..SuiteConfig::default()
    };
    Ok(SuiteReport::assemble(&cfg, tol, summaries, failures))
}
