//! Browser bindings for the demo page. Every entry point takes and returns
//! JSON strings; failures come back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use ginv::ginverse::{self, ClassificationReport};
use ginv::matrix::{Complex, Matrix};
use ginv::spectral::unity_order;
use ginv::tolerances::Tolerances;

#[derive(Serialize)]
struct Eigenvalue {
    re: f64,
    im: f64,
    modulus: f64,
    /// Order as a root of unity, if it is one.
    unity_order: Option<u32>,
}

#[derive(Serialize)]
struct Classified {
    matrix: Matrix,
    eigenvalues: Vec<Eigenvalue>,
    report: ClassificationReport,
}

#[derive(Serialize)]
struct Explored {
    #[serde(flatten)]
    classified: Classified,
    /// Roots of `mu^2 - mu - c`, the eigenvalues of `[[1, 1], [c, 0]]`.
    closed_form: [[f64; 2]; 2],
}

#[derive(Serialize)]
struct Drazin {
    x: Matrix,
    index: usize,
    group_invertible: bool,
    worst_residual: f64,
    condition_estimate: f64,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    let value = match r {
        Ok(v) => serde_json::to_value(v).map_err(|e| e.to_string()),
        Err(e) => Err(e),
    };
    match value {
        Ok(v) => v.to_string(),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

fn parse(matrix_json: &str) -> Result<Matrix, String> {
    serde_json::from_str(matrix_json).map_err(|e| format!("matrix JSON: {e}"))
}

fn classified(m: Matrix, tol: &Tolerances) -> Result<Classified, String> {
    let report = ginverse::classify(&m, tol).map_err(|e| e.to_string())?;
    let eigenvalues = report
        .spectrum
        .eigenvalues
        .iter()
        .map(|z| Eigenvalue {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
            unity_order: unity_order(*z, tol),
        })
        .collect();
    Ok(Classified { matrix: m, eigenvalues, report })
}

/// Spectrum and class memberships of a matrix given as
/// `{"n": 2, "data": [[[re, im], ...], ...]}`.
#[wasm_bindgen]
pub fn classify(matrix_json: &str) -> String {
    let tol = Tolerances::default();
    to_json(parse(matrix_json).and_then(|m| classified(m, &tol)))
}

/// Classifies `M = [[1, 1], [c, 0]]` for a complex scalar `c`. M is
/// g-Hirano exactly when `c = 0`.
#[wasm_bindgen]
pub fn explore_anti_triangular(c_re: f64, c_im: f64) -> String {
    let tol = Tolerances::default();
    let c = Complex::new(c_re, c_im);
    let one = Complex::new(1.0, 0.0);
    let result = Matrix::from_rows(vec![vec![one, one], vec![c, Complex::new(0.0, 0.0)]])
        .map_err(|e| e.to_string())
        .and_then(|m| classified(m, &tol))
        .map(|classified| {
            let root = (one + c * 4.0).sqrt();
            let (p, q) = ((one + root) / 2.0, (one - root) / 2.0);
            Explored { classified, closed_form: [[p.re, p.im], [q.re, q.im]] }
        });
    to_json(result)
}

/// Drazin inverse with its index and worst defining-equation residual.
#[wasm_bindgen]
pub fn drazin(matrix_json: &str) -> String {
    let tol = Tolerances::default();
    let result = parse(matrix_json).and_then(|a| {
        let w = ginverse::drazin(&a, &tol).map_err(|e| e.to_string())?;
        Ok(Drazin {
            group_invertible: w.drazin_index <= 1,
            index: w.drazin_index,
            worst_residual: w.residuals.worst(),
            condition_estimate: w.condition_estimate,
            x: w.x,
        })
    });
    to_json(result)
}
