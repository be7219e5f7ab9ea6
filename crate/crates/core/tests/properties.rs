use proptest::prelude::*;

use ginv::conditions::{
    check_word_condition, gen_from_recipe, gen_k_ast, gen_k_star, ginibre, poly_eval, trial_rng, PoolRecipe, WordPattern,
};
use ginv::ginverse::{classify, drazin};
use ginv::matrix::{word_product, Complex, Letter, Matrix};
use ginv::spectral::{index, is_quasinilpotent, numeric_rank_at_scale, spectrum};
use ginv::tolerances::Tolerances;

fn close(x: &Matrix, y: &Matrix, scale: f64, tol: &Tolerances) -> bool {
    (x - y).norm_fro() <= tol.tol_res * scale.max(1.0)
}

fn letters() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop_oneof![Just(Letter::A), Just(Letter::B)], 0..5)
}

/// Greedy nearest matching of two multisets.
fn multisets_match(mut x: Vec<Complex>, y: &[Complex], eps: f64) -> bool {
    if x.len() != y.len() {
        return false;
    }
    for z in y {
        let Some((i, d)) = x.iter().enumerate().map(|(i, w)| (i, (w - z).norm())).min_by(|a, b| a.1.total_cmp(&b.1)) else {
            return false;
        };
        if d > eps {
            return false;
        }
        x.swap_remove(i);
    }
    true
}

fn recipe(pick: u8) -> PoolRecipe {
    match pick % 4 {
        0 => PoolRecipe::zero(),
        1 => PoolRecipe::gpih(),
        2 => PoolRecipe::mixed(),
        _ => PoolRecipe::arbitrary(),
    }
    .with_max_lcm(30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_associate_and_distribute(seed in any::<u64>(), n in 1usize..7) {
        let tol = Tolerances::default();
        let mut rng = trial_rng(seed);
        let (a, b, c) = (ginibre(n, &mut rng), ginibre(n, &mut rng), ginibre(n, &mut rng));
        let s = a.norm_fro() * b.norm_fro() * c.norm_fro();
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), s, &tol));
        let t = a.norm_fro() * (b.norm_fro() + c.norm_fro());
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), t, &tol));
    }

    #[test]
    fn word_products_concatenate(seed in any::<u64>(), n in 1usize..6, w1 in letters(), w2 in letters()) {
        let tol = Tolerances::default();
        let mut rng = trial_rng(seed);
        let (a, b) = (ginibre(n, &mut rng), ginibre(n, &mut rng));
        let joined: Vec<Letter> = w1.iter().chain(&w2).copied().collect();
        let whole = word_product(&a, &b, &joined).unwrap();
        let split = &word_product(&a, &b, &w1).unwrap() * &word_product(&a, &b, &w2).unwrap();
        let scale = a.norm_fro().max(b.norm_fro()).max(1.0).powi(joined.len() as i32);
        prop_assert!(close(&whole, &split, scale, &tol));
    }

    #[test]
    fn powers_add_exponents(seed in any::<u64>(), n in 1usize..6, j in 0u64..5, k in 0u64..5) {
        let tol = Tolerances::default();
        let a = ginibre(n, &mut trial_rng(seed));
        let lhs = a.power(j + k).unwrap();
        let rhs = &a.power(j).unwrap() * &a.power(k).unwrap();
        prop_assert!(close(&lhs, &rhs, a.norm_fro().max(1.0).powi((j + k) as i32), &tol));
    }

    #[test]
    fn spectrum_maps_under_polynomials(seed in any::<u64>(), n in 1usize..6) {
        let tol = Tolerances::default();
        let mut rng = trial_rng(seed);
        let mut r = PoolRecipe::arbitrary();
        r.repeat = 0.0;
        let a = gen_from_recipe(n, &r, &mut rng).unwrap();
        let coeffs: Vec<Complex> = (0..4).map(|i| Complex::new(1.0 / (i + 1) as f64, 0.5 - i as f64 * 0.25)).collect();
        let pa = poly_eval(&coeffs, &a);
        let eval = |z: Complex| coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, c| acc * z + c);
        let mapped: Vec<Complex> = spectrum(&a, &tol).unwrap().eigenvalues.into_iter().map(eval).collect();
        let direct = spectrum(&pa, &tol).unwrap().eigenvalues;
        // Eigenvector conditioning of the planted similarity is at most 1e4.
        let eps = 1e4 * tol.tol_eig * pa.norm_fro().max(1.0);
        prop_assert!(multisets_match(mapped, &direct, eps));
    }

    #[test]
    fn nilpotency_survives_powers(seed in any::<u64>(), n in 1usize..7, pick in any::<u8>()) {
        let tol = Tolerances::default();
        let a = gen_from_recipe(n, &recipe(pick), &mut trial_rng(seed)).unwrap();
        let q = is_quasinilpotent(&a, &tol).unwrap();
        let na = a.norm_fro();
        for k in [2u64, 3] {
            let ak = a.power(k).unwrap();
            prop_assert_eq!(q, ginv::spectral::is_quasinilpotent_at_scale(&ak, na.powi(k as i32), &tol).unwrap());
        }
    }

    #[test]
    fn index_is_bounded_and_rank_decreases(seed in any::<u64>(), n in 1usize..7, pick in any::<u8>()) {
        let tol = Tolerances::default();
        let a = gen_from_recipe(n, &recipe(pick), &mut trial_rng(seed)).unwrap();
        prop_assert!(index(&a, &tol).unwrap() <= n);
        let mut last = n;
        for k in 1..=n as u64 + 1 {
            let scale = a.norm_fro().powi(k as i32);
            let r = numeric_rank_at_scale(&a.power(k).unwrap(), scale, &tol).unwrap();
            prop_assert!(r <= last, "rank rose from {} to {} at power {}", last, r, k);
            last = r;
        }
    }

    #[test]
    fn classes_nest_and_pass_to_powers(seed in any::<u64>(), n in 1usize..7, pick in any::<u8>()) {
        let tol = Tolerances::default();
        let a = gen_from_recipe(n, &recipe(pick), &mut trial_rng(seed)).unwrap();
        let r = classify(&a, &tol).unwrap();
        prop_assert!(!r.gs_drazin || r.g_hirano);
        prop_assert!(!r.g_hirano || r.g_pi_hirano);
        let na = a.norm_fro();
        for k in [2u64, 3] {
            let rk = ginv::ginverse::classify_at_scale(&a.power(k).unwrap(), na.powi(k as i32), &tol).unwrap();
            prop_assert_eq!(r.g_pi_hirano, rk.g_pi_hirano);
        }
    }

    #[test]
    fn drazin_residuals_are_small(seed in any::<u64>(), n in 1usize..9) {
        let tol = Tolerances::default();
        let r = PoolRecipe::mixed().with_max_zeros(3).with_max_lcm(30);
        let a = gen_from_recipe(n, &r, &mut trial_rng(seed)).unwrap();
        let w = drazin(&a, &tol).unwrap();
        prop_assert!(w.residuals.worst() <= tol.tol_res, "{:?}", w.residuals);
        prop_assert!(w.drazin_index <= 3);
    }

    #[test]
    fn word_conditions_are_monotone(seed in any::<u64>(), k in 1usize..4, pa in any::<u8>(), pb in any::<u8>()) {
        let tol = Tolerances::default();
        let mut rng = trial_rng(seed);
        let (a, b) = gen_k_star(k, k + 4, &recipe(pa), &recipe(pb), &mut rng).unwrap();
        for j in k..=4 {
            prop_assert!(check_word_condition(&a, &b, j, WordPattern::StarLeft, &tol).unwrap().holds);
        }
        let (c, d) = gen_k_ast(k, k + 3, false, &recipe(pa), &recipe(pb), &mut rng).unwrap();
        for j in k..=4 {
            prop_assert!(check_word_condition(&c, &d, j, WordPattern::AstLeft, &tol).unwrap().holds);
        }
    }
}
