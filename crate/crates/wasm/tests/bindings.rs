use ginv_wasm::{classify, drazin, explore_anti_triangular};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn sixth_roots_lie_on_the_unit_circle() {
    let v = parse(&classify(r#"{"n": 2, "data": [[[1, 0], [1, 0]], [[-1, 0], [0, 0]]]}"#));
    assert_eq!(v["report"]["g_pi_hirano"], Value::Bool(true));
    assert_eq!(v["report"]["gpih_witness_n"], 6);
    for e in v["eigenvalues"].as_array().unwrap() {
        assert!((e["modulus"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(e["unity_order"], 6);
    }
}

#[test]
fn bad_input_returns_an_error_object() {
    let v = parse(&classify("[1, 2]"));
    assert!(v["error"].as_str().unwrap().contains("matrix JSON"));
    assert!(parse(&drazin(r#"{"n": 2, "data": [[[1, 0]]]}"#))["error"].is_string());
}

#[test]
fn explorer_tracks_the_closed_form() {
    for (c, g_hirano, gpih) in [(0.0, true, true), (-1.0, false, true), (1.0, false, false), (2.0, false, false)] {
        let v = parse(&explore_anti_triangular(c, 0.0));
        assert_eq!(v["report"]["g_hirano"], Value::Bool(g_hirano), "c = {c}");
        assert_eq!(v["report"]["g_pi_hirano"], Value::Bool(gpih), "c = {c}");
        let mut closed: Vec<f64> = v["closed_form"].as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect();
        let mut computed: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|z| z["re"].as_f64().unwrap()).collect();
        closed.sort_by(f64::total_cmp);
        computed.sort_by(f64::total_cmp);
        for (p, q) in closed.iter().zip(&computed) {
            assert!((p - q).abs() < 1e-9, "c = {c}: {closed:?} vs {computed:?}");
        }
    }
}

#[test]
fn complex_parameter_is_accepted() {
    let v = parse(&explore_anti_triangular(0.3, -0.7));
    assert_eq!(v["matrix"]["data"][1][0], serde_json::json!([0.3, -0.7]));
    assert_eq!(v["report"]["g_pi_hirano"], Value::Bool(false));
}

#[test]
fn drazin_of_a_block_matrix() {
    let v = parse(&drazin(r#"{"n": 3, "data": [[[2, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]], [[0, 0], [0, 0], [0, 0]]]}"#));
    assert_eq!(v["index"], 2);
    assert_eq!(v["group_invertible"], Value::Bool(false));
    assert!((v["x"]["data"][0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["worst_residual"].as_f64().unwrap() < 1e-12);
}
