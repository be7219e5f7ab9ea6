//! Instance generation for each theorem id. Every draw comes from the trial
//! RNG alone, so `(id, seed, config)` determines the trial.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::verifiers::*;
use super::{inputs_digest, report_from, Outcome, SuiteConfig, TrialReport};
use crate::conditions::*;
use crate::error::Result;
use crate::matrix::{Complex, Matrix};
use crate::tolerances::Tolerances;

/// Largest witness lcm a pool may produce: the pairwise search needs
/// `n = m + lcm <= 32`.
const POOL_MAX_LCM: u64 = 30;

pub(super) fn run_trial(id: &str, trial: usize, seed: u64, cfg: &SuiteConfig, tol: &Tolerances) -> TrialReport {
    run_trial_with_inputs(id, trial, seed, cfg, tol).0
}

pub(super) fn run_trial_with_inputs(
    id: &str,
    trial: usize,
    seed: u64,
    cfg: &SuiteConfig,
    tol: &Tolerances,
) -> (TrialReport, Vec<Matrix>) {
    let mut rng = trial_rng(seed);
    let mut inputs: Vec<Matrix> = Vec::new();
    let result = dispatch(id, seed, cfg, tol, &mut rng, &mut inputs);
    let refs: Vec<&Matrix> = inputs.iter().collect();
    let report = report_from(id, trial, seed, inputs_digest(&refs), result);
    (report, inputs)
}

fn dispatch(
    id: &str,
    seed: u64,
    cfg: &SuiteConfig,
    tol: &Tolerances,
    rng: &mut TrialRng,
    inputs: &mut Vec<Matrix>,
) -> Result<Outcome> {
    match id {
        "qnil-lemmas" => qnil_lemmas(cfg, tol, rng, inputs),
        "existence-equivalences" => {
            let n = size(cfg, 1, 6, rng);
            let a = gen_from_recipe(n, &pool(rng), rng)?;
            inputs.push(a.clone());
            // Every fifth seed also runs the pairwise search.
            verify_existence_equivalences(&a, seed % 5 == 0, tol)
        }
        "additive-kstar" => additive_kstar(cfg, tol, rng, inputs),
        "drazin-additive" => {
            let n = size(cfg, 2, 8, rng);
            let (a, b) = gen_ab_ba_zero(n, &pool(rng), &pool(rng), rng)?;
            inputs.extend([a.clone(), b.clone()]);
            verify_drazin_additive(&a, &b, tol)
        }
        "block-triangular" => {
            let n = size(cfg, 1, 4, rng);
            let a = gen_from_recipe(n, &pool(rng), rng)?;
            let b = gen_from_recipe(n, &pool(rng), rng)?;
            let c = if rng.random_bool(0.2) { Matrix::zeros(n) } else { ginibre(n, rng) };
            inputs.extend([a.clone(), b.clone(), c.clone()]);
            verify_block_triangular(&a, &b, &c, tol)
        }
        "kast-properties" => kast_properties(cfg, tol, rng, inputs),
        "anti-triangular" => anti_triangular(cfg, tol, rng, inputs),
        "product-swap" => {
            let n = size(cfg, 2, 6, rng);
            let (a, b) = gen_product_pair(n, &pool(rng), rng)?;
            inputs.extend([a.clone(), b.clone()]);
            verify_product_swap(&a, &b, tol)
        }
        "unit-anti-triangular" => {
            let n = size(cfg, 1, 5, rng);
            let c = if rng.random_bool(0.5) {
                gen_from_recipe(n, &PoolRecipe::zero(), rng)?
            } else {
                one_nonzero(n, rng)?
            };
            inputs.push(c.clone());
            verify_unit_anti_triangular(&c, tol)
        }
        "drazin-engine" => {
            let n = size(cfg, 1, 8, rng);
            let a = gen_from_recipe(n, &PoolRecipe::mixed().with_max_zeros(3).with_max_lcm(POOL_MAX_LCM), rng)?;
            inputs.push(a.clone());
            verify_drazin_engine(&a, tol)
        }
        "word-monotonicity" => word_monotonicity(cfg, tol, rng, inputs),
        _ => unreachable!("ids are checked before dispatch"),
    }
}

/// Size from the configured list within `[lo, hi]`, else the nearest bound.
fn size(cfg: &SuiteConfig, lo: usize, hi: usize, rng: &mut TrialRng) -> usize {
    let fit: Vec<usize> = cfg.sizes.iter().copied().filter(|n| (lo..=hi).contains(n)).collect();
    match fit.choose(rng) {
        Some(&n) => n,
        None => cfg.sizes[0].clamp(lo, hi),
    }
}

fn k_in(cfg: &SuiteConfig, rng: &mut TrialRng) -> usize {
    rng.random_range(1..=cfg.k_max)
}

/// Pools mostly inside the class, sometimes outside, so both sides of every
/// equivalence are exercised.
fn pool(rng: &mut TrialRng) -> PoolRecipe {
    let r = match rng.random_range(0..10) {
        0..=1 => PoolRecipe::zero(),
        2..=5 => PoolRecipe::gpih(),
        6..=8 => PoolRecipe::mixed(),
        _ => PoolRecipe::arbitrary(),
    };
    r.with_max_lcm(POOL_MAX_LCM)
}

/// Nilpotent except for one eigenvalue off `{0, 1, -1}`.
fn one_nonzero(n: usize, rng: &mut TrialRng) -> Result<Matrix> {
    let lambda = loop {
        let z = if rng.random_bool(0.5) {
            sample_arbitrary(rng)
        } else {
            // Roots of unity other than +-1.
            let q = *[3u32, 4, 5, 6, 8].choose(rng).expect("nonempty");
            unity_root(1, q)
        };
        if (z - Complex::new(1.0, 0.0)).norm() > 0.05 && (z + Complex::new(1.0, 0.0)).norm() > 0.05 {
            break z;
        }
    };
    let mut eig = vec![Complex::new(0.0, 0.0); n];
    eig[0] = lambda;
    gen_planted_spectrum(&SpectrumSpec::new(eig), rng)
}

fn qnil_lemmas(cfg: &SuiteConfig, tol: &Tolerances, rng: &mut TrialRng, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let n = size(cfg, 2, 8, rng);
    let mut out = Outcome::default();

    // Commuting pairs: polynomials without constant term in a nilpotent,
    // then one summand shifted off nilpotency.
    let nil = gen_from_recipe(n, &PoolRecipe::zero(), rng)?;
    let p: Vec<Complex> = (0..3).map(|i| if i == 0 { Complex::new(0.0, 0.0) } else { complex_normal(rng) }).collect();
    let q: Vec<Complex> = (0..3).map(|i| if i == 0 { Complex::new(0.0, 0.0) } else { complex_normal(rng) }).collect();
    let a = poly_eval(&p, &nil);
    let b = poly_eval(&q, &nil);
    let b_shift = b.shift(sample_arbitrary(rng));
    inputs.extend([nil, a.clone(), b.clone(), b_shift.clone()]);
    out.merge(verify_commuting_qnil(&a, &b, tol)?);
    out.merge(verify_commuting_qnil(&a, &b_shift, tol)?);

    let (za, zb) = gen_ab_zero_planted(n, &PoolRecipe::zero(), &PoolRecipe::zero(), rng)?;
    inputs.extend([za.clone(), zb.clone()]);
    out.merge(verify_zero_product_qnil(&za, &zb, tol)?);

    let m = gen_from_recipe(n, &pool(rng), rng)?;
    let g = gen_from_recipe(n, &PoolRecipe::gpih().with_orders(&[1, 2]), rng)?;
    inputs.extend([m.clone(), g.clone()]);
    out.merge(verify_power_and_gs(&m, tol)?);
    out.merge(verify_power_and_gs(&g, tol)?);
    Ok(out)
}

fn additive_kstar(cfg: &SuiteConfig, tol: &Tolerances, rng: &mut TrialRng, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let k = k_in(cfg, rng);
    let (a, b) = match rng.random_range(0..3) {
        0 => gen_ab_zero(size(cfg, 2, 8, rng), rng)?,
        1 => gen_ab_zero_planted(size(cfg, 2, 8, rng), &pool(rng), &pool(rng), rng)?,
        _ => gen_k_star(k, 8.max(k + 4), &pool(rng), &pool(rng), rng)?,
    };
    // Mirror half the pairs into the right-hand pattern.
    let (a, b, pattern) = if rng.random_bool(0.5) {
        (a, b, WordPattern::StarLeft)
    } else {
        (b.transpose(), a.transpose(), WordPattern::StarRight)
    };
    inputs.extend([a.clone(), b.clone()]);
    verify_additive_kstar(&a, &b, k, pattern, tol)
}

fn kast_properties(cfg: &SuiteConfig, tol: &Tolerances, rng: &mut TrialRng, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let k = k_in(cfg, rng);
    let commuting = rng.random_bool(0.4);
    // Products of the two spectra must stay recognisable roots of unity, so
    // both pools draw orders dividing one base.
    let base = *[6u32, 8, 10, 12, 30].choose(rng).expect("nonempty");
    let orders: Vec<u32> = (1..=base).filter(|d| base % d == 0).collect();
    let (ra, rb) = match rng.random_range(0..4) {
        0 => (PoolRecipe::zero(), PoolRecipe::gpih()),
        1 => (PoolRecipe::gpih(), PoolRecipe::gpih()),
        2 => (PoolRecipe::zero(), PoolRecipe::zero()),
        _ => (pool(rng), pool(rng)),
    };
    let (ra, rb) = (ra.with_orders(&orders), rb.with_orders(&orders));
    let n = if commuting { size(cfg, 1, 6, rng) } else { size(cfg, k + 1, k + 4, rng) };
    let (a, b) = gen_k_ast(k, n, commuting, &ra, &rb, rng)?;
    let (a, b, pattern) = if rng.random_bool(0.5) {
        (a, b, WordPattern::AstLeft)
    } else {
        (a.transpose(), b.transpose(), WordPattern::AstRight)
    };
    inputs.extend([a.clone(), b.clone()]);
    verify_k_ast_properties(&a, &b, k, pattern, tol)
}

fn anti_triangular(cfg: &SuiteConfig, tol: &Tolerances, rng: &mut TrialRng, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let k = k_in(cfg, rng);
    let (a, b, c) = match rng.random_range(0..5) {
        // k-star on (a, bc).
        0 | 1 => {
            let (a, d) = gen_k_star(k, k + 4, &pool(rng), &pool(rng), rng)?;
            let (b, c) = factor_product(&d, rng)?;
            (a, b, c)
        }
        // abc = 0.
        2 => {
            let (a, d) = gen_ab_zero_planted(size(cfg, 2, 4, rng), &pool(rng), &pool(rng), rng)?;
            let (b, c) = factor_product(&d, rng)?;
            (a, b, c)
        }
        // bca = 0.
        3 => {
            let (d, a) = gen_ab_zero_planted(size(cfg, 2, 4, rng), &pool(rng), &pool(rng), rng)?;
            let (b, c) = factor_product(&d, rng)?;
            (a, b, c)
        }
        // Unit blocks.
        _ => {
            let n = size(cfg, 1, 4, rng);
            let c = if rng.random_bool(0.5) {
                gen_from_recipe(n, &PoolRecipe::zero(), rng)?
            } else {
                one_nonzero(n, rng)?
            };
            (Matrix::identity(n), Matrix::identity(n), c)
        }
    };
    inputs.extend([a.clone(), b.clone(), c.clone()]);
    verify_anti_triangular(&a, &b, &c, k, tol)
}

fn word_monotonicity(cfg: &SuiteConfig, tol: &Tolerances, rng: &mut TrialRng, inputs: &mut Vec<Matrix>) -> Result<Outcome> {
    let k = k_in(cfg, rng);
    let mut out = Outcome::default();
    let (a, b) = gen_k_star(k, k + 4, &pool(rng), &pool(rng), rng)?;
    let (c, d) = gen_k_ast(k, k + 2, false, &pool(rng), &pool(rng), rng)?;
    inputs.extend([a.clone(), b.clone(), c.clone(), d.clone()]);
    for j in 1..=k {
        out.merge(verify_word_monotonicity(&a, &b, j, WordPattern::StarLeft, tol)?);
        out.merge(verify_word_monotonicity(&b.transpose(), &a.transpose(), j, WordPattern::StarRight, tol)?);
    }
    for j in 1..=k {
        out.merge(verify_word_monotonicity(&c, &d, j, WordPattern::AstLeft, tol)?);
        out.merge(verify_word_monotonicity(&c.transpose(), &d.transpose(), j, WordPattern::AstRight, tol)?);
    }
    Ok(out)
}
