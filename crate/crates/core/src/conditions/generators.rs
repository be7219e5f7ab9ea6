//! Structured random instances. Every generator plants the structure its
//! consumer needs, then checks it numerically before returning; a contract
//! that cannot be met after a bounded number of draws is an error.

use std::f64::consts::TAU;

use nalgebra::linalg::QR;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::words::{check_word_condition, WordPattern};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::matrix::{Complex, Matrix};
use crate::spectral::{self, lcm};
use crate::tolerances::Tolerances;

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Default acceptance bound for similarity condition numbers.
pub const DEFAULT_COND_BOUND: f64 = 1e4;
/// Condition numbers are drawn log-uniformly up to this value.
const TYPICAL_COND: f64 = 8.0;
const MAX_ATTEMPTS: usize = 50;
/// Relative size of `ab` accepted as an exact zero product.
pub const EXACT_ZERO: f64 = 1e-12;
/// Minimum distance between distinct planted eigenvalues.
const MIN_SEPARATION: f64 = 0.04;
/// Largest multiplicity of a planted nonzero eigenvalue.
const MAX_REPEAT: usize = 3;

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_block<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng) * scale)
}

/// Entries i.i.d. complex normal with variance `1/n`.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    to_matrix(&random_block(n, n, 1.0 / (n as f64).sqrt(), rng))
}

/// Haar-distributed unitary matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = QR::new(random_block(n, n, 1.0, rng));
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

fn to_matrix(m: &CMat) -> Matrix {
    Matrix::from_dmatrix(m).expect("generated entries are finite")
}

/// `S` together with its exact inverse.
#[derive(Debug, Clone)]
pub struct Similarity {
    pub s: Matrix,
    pub s_inv: Matrix,
    pub condition: f64,
}

impl Similarity {
    pub fn conjugate(&self, t: &Matrix) -> Matrix {
        &(&self.s * t) * &self.s_inv
    }
}

/// `S = U diag(d) V^H` with log-uniform `d` and `cond(S) <= min(bound, 8)`.
pub fn random_similarity<R: Rng + ?Sized>(n: usize, bound: f64, rng: &mut R) -> Result<Similarity> {
    if !(bound >= 1.0) {
        return Err(Error::InvalidArgument(format!("conditioning bound {bound} is below 1")));
    }
    let target = bound.min(TYPICAL_COND);
    let kappa = (rng.random::<f64>() * target.ln()).exp();
    let d: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            i if i + 1 == n => kappa,
            _ => (rng.random::<f64>() * kappa.ln()).exp(),
        })
        .collect();
    let u = random_unitary(n, rng);
    let v = random_unitary(n, rng);
    let dm = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|&x| Complex::new(x, 0.0))));
    let dinv = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|&x| Complex::new(1.0 / x, 0.0))));
    let s = &u * dm * v.adjoint();
    let s_inv = &v * dinv * u.adjoint();
    let condition = linalg::condition_number(&s)?;
    if condition > bound {
        return Err(Error::ConditioningRejected {
            estimate: condition,
            bound,
        });
    }
    Ok(Similarity {
        s: to_matrix(&s),
        s_inv: to_matrix(&s_inv),
        condition,
    })
}

pub fn unity_root(p: u32, q: u32) -> Complex {
    Complex::from_polar(1.0, TAU * f64::from(p) / f64::from(q))
}

/// Eigenvalue classes a pool can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenClass {
    Zero,
    Unity,
    Arbitrary,
}

/// Recipe for an eigenvalue pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecipe {
    /// Relative weights of zero, roots of unity and arbitrary values.
    pub weights: [f64; 3],
    /// Orders of the roots of unity drawn.
    pub orders: Vec<u32>,
    /// Upper bound on the lcm of the drawn orders.
    pub max_lcm: Option<u64>,
    /// Upper bound on the number of zeros (caps the index).
    pub max_zeros: Option<usize>,
    /// Probability of repeating an earlier nonzero value.
    pub repeat: f64,
}

impl PoolRecipe {
    pub fn new(zero: f64, unity: f64, arbitrary: f64) -> Self {
        PoolRecipe {
            weights: [zero, unity, arbitrary],
            orders: (1..=12).collect(),
            max_lcm: None,
            max_zeros: None,
            repeat: 0.3,
        }
    }

    pub fn zero() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn unity() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    /// Zero and roots of unity only: every draw is g-pi-Hirano.
    pub fn gpih() -> Self {
        Self::new(1.0, 2.0, 0.0)
    }

    pub fn mixed() -> Self {
        Self::new(1.0, 2.0, 1.0)
    }

    pub fn arbitrary() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn with_orders(mut self, orders: &[u32]) -> Self {
        self.orders = orders.to_vec();
        self
    }

    pub fn with_max_lcm(mut self, l: u64) -> Self {
        self.max_lcm = Some(l);
        self
    }

    pub fn with_max_zeros(mut self, z: usize) -> Self {
        self.max_zeros = Some(z);
        self
    }
}

/// Nonzero value off the annulus `0.9 < |z| < 1.15`, so that powers separate
/// it from the unit circle quickly.
pub fn sample_arbitrary<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let r = if rng.random_bool(0.5) {
        rng.random_range(0.75..0.9)
    } else {
        rng.random_range(1.15..2.0)
    };
    if rng.random_bool(0.25) {
        return Complex::new(if rng.random_bool(0.5) { r } else { -r }, 0.0);
    }
    Complex::from_polar(r, rng.random_range(0.0..TAU))
}

pub fn sample_pool<R: Rng + ?Sized>(size: usize, recipe: &PoolRecipe, rng: &mut R) -> Result<Vec<Complex>> {
    let total: f64 = recipe.weights.iter().sum();
    if !(total > 0.0) || recipe.weights.iter().any(|w| *w < 0.0) {
        return Err(Error::InvalidArgument("pool weights must be nonnegative with a positive sum".into()));
    }
    if recipe.weights[1] > 0.0 && recipe.orders.is_empty() {
        return Err(Error::InvalidArgument("unity draws need at least one order".into()));
    }
    let mut pool: Vec<Complex> = Vec::with_capacity(size);
    let mut current_lcm = 1u64;
    let mut zeros = 0usize;
    for _ in 0..size {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let repeatable: Vec<Complex> = distinct(&pool)
                .into_iter()
                .filter(|&(z, c)| z != Complex::new(0.0, 0.0) && c < MAX_REPEAT)
                .map(|(z, _)| z)
                .collect();
            if !repeatable.is_empty() && rng.random_bool(recipe.repeat) {
                pool.push(*repeatable.choose(rng).expect("nonempty"));
                placed = true;
                break;
            }
            let u: f64 = rng.random::<f64>() * total;
            let class = if u < recipe.weights[0] {
                EigenClass::Zero
            } else if u < recipe.weights[0] + recipe.weights[1] {
                EigenClass::Unity
            } else {
                EigenClass::Arbitrary
            };
            let z = match class {
                EigenClass::Zero => {
                    if recipe.max_zeros.is_some_and(|m| zeros >= m) {
                        continue;
                    }
                    zeros += 1;
                    Complex::new(0.0, 0.0)
                }
                EigenClass::Unity => {
                    let q = *recipe.orders.choose(rng).expect("nonempty");
                    let l = lcm(current_lcm, u64::from(q)).unwrap_or(u64::MAX);
                    if recipe.max_lcm.is_some_and(|m| l > m) {
                        continue;
                    }
                    current_lcm = l;
                    unity_root(rng.random_range(0..q), q)
                }
                EigenClass::Arbitrary => {
                    let z = sample_arbitrary(rng);
                    if pool.iter().any(|&w| (w - z).norm() < MIN_SEPARATION) {
                        continue;
                    }
                    z
                }
            };
            if z != Complex::new(0.0, 0.0) && pool.iter().filter(|&&w| w == z).count() >= MAX_REPEAT {
                continue;
            }
            pool.push(z);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::GeneratorFailure("could not extend the eigenvalue pool under its constraints".into()));
        }
    }
    Ok(pool)
}

/// Distinct values with their counts, in order of first appearance.
pub fn distinct(pool: &[Complex]) -> Vec<(Complex, usize)> {
    let mut out: Vec<(Complex, usize)> = Vec::new();
    for &z in pool {
        match out.iter_mut().find(|(w, _)| *w == z) {
            Some((_, c)) => *c += 1,
            None => out.push((z, 1)),
        }
    }
    out
}

/// Planted eigenvalues and a bound on the similarity used to hide them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub eigenvalues: Vec<Complex>,
    pub cond_bound: f64,
}

impl SpectrumSpec {
    pub fn new(eigenvalues: Vec<Complex>) -> Self {
        SpectrumSpec {
            eigenvalues,
            cond_bound: DEFAULT_COND_BOUND,
        }
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("spectrum spec needs at least one eigenvalue".into()));
        }
        if !(self.cond_bound >= 1.0) {
            return Err(Error::InvalidArgument("conditioning bound must be at least 1".into()));
        }
        if self.eigenvalues.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("planted eigenvalues must be finite".into()));
        }
        Ok(())
    }
}

/// Upper triangular with the given diagonal; strictly upper entries are
/// random, each dropped with small probability so that Jordan structures vary.
/// Kept entries have modulus in `[0.25, 1]`: a tiny coupling makes the
/// Jordan structure unresolvable in double precision.
pub fn planted_triangular<R: Rng + ?Sized>(diag: &[Complex], rng: &mut R) -> CMat {
    let n = diag.len();
    let mut t = CMat::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = diag[i];
        for j in i + 1..n {
            if !rng.random_bool(0.15) {
                let r = rng.random_range(0.25..=1.0);
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                t[(i, j)] = Complex::from_polar(r, theta);
            }
        }
    }
    t
}

/// Random strictly upper triangular block.
pub fn strictly_upper<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    planted_triangular(&vec![Complex::new(0.0, 0.0); n], rng)
}

/// True iff every planted value appears in `a` with its multiplicity.
pub fn spectrum_matches(a: &Matrix, planted: &[Complex], tol: &Tolerances) -> Result<bool> {
    for (mu, count) in distinct(planted) {
        if spectral::algebraic_multiplicity(a, mu, tol)? != count {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn gen_planted_spectrum<R: Rng + ?Sized>(spec: &SpectrumSpec, rng: &mut R) -> Result<Matrix> {
    spec.validate()?;
    let tol = Tolerances::default();
    let n = spec.size();
    for _ in 0..MAX_ATTEMPTS {
        let t = to_matrix(&planted_triangular(&spec.eigenvalues, rng));
        let sim = match random_similarity(n, spec.cond_bound, rng) {
            Ok(s) => s,
            Err(Error::ConditioningRejected { .. }) => continue,
            Err(e) => return Err(e),
        };
        let a = sim.conjugate(&t);
        if spectrum_matches(&a, &spec.eigenvalues, &tol)? {
            return Ok(a);
        }
    }
    Err(Error::GeneratorFailure("planted spectrum not recovered".into()))
}

/// Draws a pool from `recipe` and plants it.
pub fn gen_from_recipe<R: Rng + ?Sized>(n: usize, recipe: &PoolRecipe, rng: &mut R) -> Result<Matrix> {
    let pool = sample_pool(n, recipe, rng)?;
    gen_planted_spectrum(&SpectrumSpec::new(pool), rng)
}

fn is_exact_zero_product(a: &Matrix, b: &Matrix) -> bool {
    (a * b).norm_fro() <= EXACT_ZERO * a.norm_fro() * b.norm_fro()
}

fn similarity<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Similarity> {
    for _ in 0..MAX_ATTEMPTS {
        match random_similarity(n, DEFAULT_COND_BOUND, rng) {
            Err(Error::ConditioningRejected { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::GeneratorFailure("no acceptable similarity".into()))
}

/// `b` random of deficient rank, `a = c (I - b b^+)` with `c` random.
pub fn gen_ab_zero<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Matrix, Matrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument("gen_ab_zero needs n >= 2".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let r = rng.random_range(1..n);
        let b = random_block(n, r, 1.0, rng) * random_block(r, n, 1.0, rng).scale(1.0 / (r as f64).sqrt());
        let c = random_block(n, n, 1.0 / (n as f64).sqrt(), rng);
        let p = CMat::identity(n, n) - &b * linalg::pinv_dm(&b, 1e-12)?;
        let (a, b) = (to_matrix(&(c * p)), to_matrix(&b));
        if a.norm_fro() > 1e-8 && is_exact_zero_product(&a, &b) {
            return Ok((a, b));
        }
    }
    Err(Error::GeneratorFailure("no nondegenerate pair with ab = 0".into()))
}

/// `a = S [[A1, 0], [A21, 0]] S^-1`, `b = S [[0, 0], [B21, B2]] S^-1` with
/// planted spectra on `A1` and `B2`; `ab = 0` exactly in exact arithmetic.
pub fn gen_ab_zero_planted<R: Rng + ?Sized>(
    n: usize,
    recipe_a: &PoolRecipe,
    recipe_b: &PoolRecipe,
    rng: &mut R,
) -> Result<(Matrix, Matrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument("gen_ab_zero_planted needs n >= 2".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let p = rng.random_range(1..n);
        let q = n - p;
        let a1 = planted_triangular(&sample_pool(p, recipe_a, rng)?, rng);
        let b2 = planted_triangular(&sample_pool(q, recipe_b, rng)?, rng);
        let mut ta = CMat::zeros(n, n);
        let mut tb = CMat::zeros(n, n);
        ta.view_mut((0, 0), (p, p)).copy_from(&a1);
        tb.view_mut((p, p), (q, q)).copy_from(&b2);
        if !rng.random_bool(0.1) {
            ta.view_mut((p, 0), (q, p)).copy_from(&random_block(q, p, 0.5, rng));
        }
        if !rng.random_bool(0.1) {
            tb.view_mut((p, 0), (q, p)).copy_from(&random_block(q, p, 0.5, rng));
        }
        let sim = similarity(n, rng)?;
        let a = sim.conjugate(&to_matrix(&ta));
        let b = sim.conjugate(&to_matrix(&tb));
        if is_exact_zero_product(&a, &b) {
            return Ok((a, b));
        }
    }
    Err(Error::GeneratorFailure("planted ab = 0 pair lost to rounding".into()))
}

/// `a = S diag(A1, 0) S^-1`, `b = S diag(0, B2) S^-1`, so `ab = ba = 0`.
pub fn gen_ab_ba_zero<R: Rng + ?Sized>(
    n: usize,
    recipe_a: &PoolRecipe,
    recipe_b: &PoolRecipe,
    rng: &mut R,
) -> Result<(Matrix, Matrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument("gen_ab_ba_zero needs n >= 2".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let p = rng.random_range(1..n);
        let q = n - p;
        let mut ta = CMat::zeros(n, n);
        let mut tb = CMat::zeros(n, n);
        ta.view_mut((0, 0), (p, p)).copy_from(&planted_triangular(&sample_pool(p, recipe_a, rng)?, rng));
        tb.view_mut((p, p), (q, q)).copy_from(&planted_triangular(&sample_pool(q, recipe_b, rng)?, rng));
        let sim = similarity(n, rng)?;
        let a = sim.conjugate(&to_matrix(&ta));
        let b = sim.conjugate(&to_matrix(&tb));
        if is_exact_zero_product(&a, &b) && is_exact_zero_product(&b, &a) {
            return Ok((a, b));
        }
    }
    Err(Error::GeneratorFailure("planted ab = ba = 0 pair lost to rounding".into()))
}

/// Pair satisfying the k-star condition with `ab` generically nonzero:
/// `a = S diag(D_a, 0, U_a) S^-1`, `b = S diag(0, D_b, U_b) S^-1`, the `U`
/// strictly upper of order `k + 2`. Total order is at most `max_order`.
pub fn gen_k_star<R: Rng + ?Sized>(
    k: usize,
    max_order: usize,
    recipe_a: &PoolRecipe,
    recipe_b: &PoolRecipe,
    rng: &mut R,
) -> Result<(Matrix, Matrix)> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("gen_k_star needs 1 <= k <= 4, got {k}")));
    }
    let m = k + 2;
    if max_order < m + 2 {
        return Err(Error::InvalidArgument(format!("gen_k_star with k = {k} needs order at least {}", m + 2)));
    }
    let tol = Tolerances::default();
    let room = max_order - m;
    for _ in 0..MAX_ATTEMPTS {
        let p = rng.random_range(1..room);
        let q = rng.random_range(1..=room - p);
        let n = p + q + m;
        let mut ta = CMat::zeros(n, n);
        let mut tb = CMat::zeros(n, n);
        ta.view_mut((0, 0), (p, p)).copy_from(&planted_triangular(&sample_pool(p, recipe_a, rng)?, rng));
        tb.view_mut((p, p), (q, q)).copy_from(&planted_triangular(&sample_pool(q, recipe_b, rng)?, rng));
        ta.view_mut((p + q, p + q), (m, m)).copy_from(&strictly_upper(m, rng));
        tb.view_mut((p + q, p + q), (m, m)).copy_from(&strictly_upper(m, rng));
        let sim = similarity(n, rng)?;
        let a = sim.conjugate(&to_matrix(&ta));
        let b = sim.conjugate(&to_matrix(&tb));
        if check_word_condition(&a, &b, k, WordPattern::StarLeft, &tol)?.holds {
            return Ok((a, b));
        }
    }
    Err(Error::GeneratorFailure("planted k-star pair failed its check".into()))
}

/// Horner evaluation of `sum_i coeffs[i] m^i`.
pub fn poly_eval(coeffs: &[Complex], m: &Matrix) -> Matrix {
    let n = m.order();
    let mut acc = Matrix::zeros(n);
    for &c in coeffs.iter().rev() {
        acc = (&acc * m).shift(c);
    }
    acc
}

fn random_poly<R: Rng + ?Sized>(degree: usize, constant: bool, rng: &mut R) -> Vec<Complex> {
    let mut c: Vec<Complex> = (0..=degree).map(|_| complex_normal(rng) * 0.7).collect();
    if !constant {
        c[0] = Complex::new(0.0, 0.0);
    }
    c
}

/// Which family of commuting pairs `gen_k_ast` draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutingFamily {
    /// `p(m), q(m)` for random polynomials.
    Polynomial,
    /// Rotated powers `w1 m^i, w2 m^j` of a unity-spectrum `m`.
    Monomial,
    /// `g (m^L - I)` (nilpotent) and `w m^j` (g-pi-Hirano).
    NilpotentPlusUnity,
}

/// Pair satisfying the k-ast condition `w ab = w ba`.
///
/// Commuting pairs are polynomials in one planted matrix of order `n`.
/// Noncommuting pairs are
/// `a = S [[A, X], [0, A']] S^-1`, `b = S [[B, Y], [0, B']] S^-1` with
/// `A, B` strictly upper of order `k` and commuting `A', B'` built as
/// `alpha I + p(N)`, `beta I + q(N)` on diagonal blocks.
pub fn gen_k_ast<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    commuting: bool,
    recipe_a: &PoolRecipe,
    recipe_b: &PoolRecipe,
    rng: &mut R,
) -> Result<(Matrix, Matrix)> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("gen_k_ast needs 1 <= k <= 4, got {k}")));
    }
    let tol = Tolerances::default();
    for _ in 0..MAX_ATTEMPTS {
        let (a, b) = if commuting {
            let family = *[
                CommutingFamily::Polynomial,
                CommutingFamily::Monomial,
                CommutingFamily::NilpotentPlusUnity,
            ]
            .choose(rng)
            .expect("nonempty");
            gen_commuting(n, family, rng)?
        } else {
            gen_triangular_ast(k, n, recipe_a, recipe_b, rng)?
        };
        // Cancellation can leave a factor that is pure rounding noise.
        let degenerate = a.norm_fro() < 1e-6 || b.norm_fro() < 1e-6;
        if !degenerate && check_word_condition(&a, &b, k, WordPattern::AstLeft, &tol)?.holds {
            return Ok((a, b));
        }
    }
    Err(Error::GeneratorFailure("planted k-ast pair failed its check".into()))
}

const SMALL_ORDERS: [u32; 5] = [1, 2, 3, 4, 6];

pub fn gen_commuting<R: Rng + ?Sized>(n: usize, family: CommutingFamily, rng: &mut R) -> Result<(Matrix, Matrix)> {
    match family {
        CommutingFamily::Polynomial => {
            let m = gen_from_recipe(n, &PoolRecipe::mixed(), rng)?;
            let p = random_poly(rng.random_range(1..=3), rng.random_bool(0.5), rng);
            let q = random_poly(rng.random_range(1..=3), rng.random_bool(0.5), rng);
            Ok((poly_eval(&p, &m), poly_eval(&q, &m)))
        }
        CommutingFamily::Monomial => {
            let m = gen_from_recipe(n, &PoolRecipe::gpih().with_orders(&SMALL_ORDERS), rng)?;
            let a = m.power(rng.random_range(1..=3))?.scale(rotation(rng));
            let b = m.power(rng.random_range(1..=3))?.scale(rotation(rng));
            Ok((a, b))
        }
        CommutingFamily::NilpotentPlusUnity => {
            // Per block: N strictly upper and w I + p(N), so the blocks commute.
            let mut ta = CMat::zeros(n, n);
            let mut tb = CMat::zeros(n, n);
            let mut start = 0;
            while start < n {
                let s = rng.random_range(1..=(n - start).min(3));
                let nil = to_matrix(&strictly_upper(s, rng));
                let w = rotation(rng);
                let pb = poly_eval(&random_poly(2, false, rng), &nil).shift(w);
                ta.view_mut((start, start), (s, s)).copy_from(&nil.to_dmatrix());
                tb.view_mut((start, start), (s, s)).copy_from(&pb.to_dmatrix());
                start += s;
            }
            let sim = similarity(n, rng)?;
            Ok((sim.conjugate(&to_matrix(&ta)), sim.conjugate(&to_matrix(&tb))))
        }
    }
}

fn rotation<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let q = *SMALL_ORDERS.choose(rng).expect("nonempty");
    unity_root(rng.random_range(0..q), q)
}

fn gen_triangular_ast<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    recipe_a: &PoolRecipe,
    recipe_b: &PoolRecipe,
    rng: &mut R,
) -> Result<(Matrix, Matrix)> {
    if n <= k {
        return Err(Error::InvalidArgument(format!("noncommuting k-ast pair needs order > k = {k}")));
    }
    let r = n - k;
    let mut ta = CMat::zeros(n, n);
    let mut tb = CMat::zeros(n, n);
    ta.view_mut((0, 0), (k, k)).copy_from(&strictly_upper(k, rng));
    tb.view_mut((0, 0), (k, k)).copy_from(&strictly_upper(k, rng));
    ta.view_mut((0, k), (k, r)).copy_from(&random_block(k, r, 0.5, rng));
    tb.view_mut((0, k), (k, r)).copy_from(&random_block(k, r, 0.5, rng));

    // Commuting trailing blocks, one eigenvalue per diagonal block.
    let mut start = k;
    while start < n {
        let s = rng.random_range(1..=(n - start).min(3));
        let alpha = sample_pool(1, recipe_a, rng)?[0];
        let beta = sample_pool(1, recipe_b, rng)?[0];
        let nil = to_matrix(&strictly_upper(s, rng));
        let pa = poly_eval(&random_poly(2, false, rng), &nil).shift(alpha);
        let pb = poly_eval(&random_poly(2, false, rng), &nil).shift(beta);
        ta.view_mut((start, start), (s, s)).copy_from(&pa.to_dmatrix());
        tb.view_mut((start, start), (s, s)).copy_from(&pb.to_dmatrix());
        start += s;
    }
    let sim = similarity(n, rng)?;
    Ok((sim.conjugate(&to_matrix(&ta)), sim.conjugate(&to_matrix(&tb))))
}

/// Pair `(a, b)` whose products `ab`, `ba` share a planted nonzero spectrum:
/// `a = G1 [[A1, A12], [0, N]] G2`, `b = G2^-1 [[A1^-1 T, B12], [0, 0]] G1^-1`.
pub fn gen_product_pair<R: Rng + ?Sized>(n: usize, recipe: &PoolRecipe, rng: &mut R) -> Result<(Matrix, Matrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument("gen_product_pair needs n >= 2".into()));
    }
    let r = rng.random_range(1..=n - 1);
    let z = n - r;
    let t = planted_triangular(&sample_pool(r, recipe, rng)?, rng);
    let a1 = similarity(r, rng)?;
    let a1_dm = a1.s.to_dmatrix();
    let b1 = a1.s_inv.to_dmatrix() * t;
    let mut ta = CMat::zeros(n, n);
    let mut tb = CMat::zeros(n, n);
    ta.view_mut((0, 0), (r, r)).copy_from(&a1_dm);
    ta.view_mut((0, r), (r, z)).copy_from(&random_block(r, z, 0.5, rng));
    ta.view_mut((r, r), (z, z)).copy_from(&strictly_upper(z, rng));
    tb.view_mut((0, 0), (r, r)).copy_from(&b1);
    tb.view_mut((0, r), (r, z)).copy_from(&random_block(r, z, 0.5, rng));
    let g1 = similarity(n, rng)?;
    let g2 = similarity(n, rng)?;
    let a = &(&g1.s * &to_matrix(&ta)) * &g2.s;
    let b = &(&g2.s_inv * &to_matrix(&tb)) * &g1.s_inv;
    Ok((a, b))
}

/// Factors `d = b c` with `b` a random well-conditioned matrix.
pub fn factor_product<R: Rng + ?Sized>(d: &Matrix, rng: &mut R) -> Result<(Matrix, Matrix)> {
    let g = similarity(d.order(), rng)?;
    let c = &g.s_inv * d;
    Ok((g.s, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ginverse::{classify, classify_at_scale};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn similarity_respects_bound() {
        let mut rng = trial_rng(1);
        for n in 1..=8 {
            let s = random_similarity(n, 1e4, &mut rng).unwrap();
            assert!(s.condition <= 8.0 + 1e-9);
            let prod = &s.s * &s.s_inv;
            assert!(prod.max_abs_diff(&Matrix::identity(n)) < 1e-13);
        }
        assert!(random_similarity(3, 0.5, &mut rng).is_err());
    }

    #[test]
    fn planted_spectra() {
        let mut rng = trial_rng(2);
        let zero = gen_planted_spectrum(&SpectrumSpec::new(vec![Complex::new(0.0, 0.0); 2]), &mut rng).unwrap();
        assert!(spectral::is_quasinilpotent(&zero, &tol()).unwrap());

        let h = 3f64.sqrt() / 2.0;
        let six = SpectrumSpec::new(vec![Complex::new(0.5, h), Complex::new(0.5, -h)]);
        let a = gen_planted_spectrum(&six, &mut rng).unwrap();
        let r = classify(&a, &tol()).unwrap();
        assert!(r.g_pi_hirano);
        assert_eq!(r.gpih_witness_n, Some(6));

        let two = gen_planted_spectrum(&SpectrumSpec::new(vec![Complex::new(2.0, 0.0)]), &mut rng).unwrap();
        assert!(!classify(&two, &tol()).unwrap().g_pi_hirano);
    }

    #[test]
    fn pools_honour_constraints() {
        let mut rng = trial_rng(3);
        for _ in 0..50 {
            let recipe = PoolRecipe::mixed().with_max_lcm(30).with_max_zeros(2);
            let pool = sample_pool(8, &recipe, &mut rng).unwrap();
            assert!(pool.iter().filter(|z| z.norm() == 0.0).count() <= 2);
            let mut l = 1;
            for z in &pool {
                if let Some(q) = spectral::unity_order(*z, &tol()) {
                    l = lcm(l, u64::from(q)).unwrap();
                }
            }
            assert!(l <= 30);
            for (_, c) in distinct(&pool).iter().filter(|(z, _)| z.norm() > 0.0) {
                assert!(*c <= MAX_REPEAT);
            }
        }
    }

    #[test]
    fn zero_product_generators() {
        let mut rng = trial_rng(4);
        for n in 2..=6 {
            let (a, b) = gen_ab_zero(n, &mut rng).unwrap();
            assert!(is_exact_zero_product(&a, &b));
            let (a, b) = gen_ab_zero_planted(n, &PoolRecipe::mixed(), &PoolRecipe::mixed(), &mut rng).unwrap();
            assert!(is_exact_zero_product(&a, &b));
            let (a, b) = gen_ab_ba_zero(n, &PoolRecipe::mixed(), &PoolRecipe::mixed(), &mut rng).unwrap();
            assert!(is_exact_zero_product(&a, &b) && is_exact_zero_product(&b, &a));
        }
    }

    #[test]
    fn disjoint_diagonal_pair() {
        let a = Matrix::diag_real(&[2.0, 0.0]);
        let b = Matrix::diag_real(&[0.0, 3.0]);
        assert!(is_exact_zero_product(&a, &b) && is_exact_zero_product(&b, &a));
        assert!(check_word_condition(&a, &b, 1, WordPattern::StarLeft, &tol()).unwrap().holds);
    }

    #[test]
    fn k_star_pairs_have_nonzero_product() {
        let mut rng = trial_rng(5);
        for k in 1..=4 {
            let (a, b) = gen_k_star(k, 8, &PoolRecipe::mixed(), &PoolRecipe::mixed(), &mut rng).unwrap();
            assert!(check_word_condition(&a, &b, k, WordPattern::StarLeft, &tol()).unwrap().holds);
            assert!((&a * &b).norm_fro() > 1e-6);
        }
    }

    #[test]
    fn k_ast_pairs() {
        let mut rng = trial_rng(6);
        for k in 1..=3 {
            let (a, b) = gen_k_ast(k, 6, false, &PoolRecipe::zero(), &PoolRecipe::unity(), &mut rng).unwrap();
            assert!(check_word_condition(&a, &b, k, WordPattern::AstLeft, &tol()).unwrap().holds);
            assert!((&(&a * &b) - &(&b * &a)).norm_fro() > 1e-6);
            assert!(spectral::is_quasinilpotent(&a, &tol()).unwrap());
            assert!(classify(&b, &tol()).unwrap().g_pi_hirano);
            let (a, b) = gen_k_ast(k, 5, true, &PoolRecipe::mixed(), &PoolRecipe::mixed(), &mut rng).unwrap();
            assert!(check_word_condition(&a, &b, 1, WordPattern::AstLeft, &tol()).unwrap().holds);
        }
    }

    #[test]
    fn commuting_polynomials_of_a_nilpotent() {
        let m = Matrix::jordan_nilpotent(2);
        let a = poly_eval(&[Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)], &m);
        let b = poly_eval(&[Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)], &m);
        assert_eq!(a, m);
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn product_pairs_share_nonzero_spectrum() {
        let mut rng = trial_rng(7);
        for n in 2..=6 {
            let (a, b) = gen_product_pair(n, &PoolRecipe::gpih(), &mut rng).unwrap();
            let s = a.norm_fro() * b.norm_fro();
            assert!(classify_at_scale(&(&a * &b), s, &tol()).unwrap().g_pi_hirano);
            assert!(classify_at_scale(&(&b * &a), s, &tol()).unwrap().g_pi_hirano);
        }
    }
}
