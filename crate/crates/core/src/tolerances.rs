use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every numeric threshold used to turn an exact algebraic condition into a
/// floating-point decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank and null-space decisions.
    pub tol_rank: f64,
    /// Eigenvalue accuracy target, relative to `max(1, ||a||)`.
    pub tol_eig: f64,
    /// Relative residual cutoff for identity checks.
    pub tol_res: f64,
    /// Distance at which an eigenvalue counts as a root of unity.
    pub tol_unity: f64,
    /// Largest root-of-unity order searched.
    pub n_max_unity: u32,
    /// Largest exponent tried by the brute-force searches.
    pub n_oracle: u32,
    /// Radius used to group computed eigenvalues around a candidate root of
    /// unity before averaging (defective eigenvalues scatter on a small circle).
    pub tol_cluster: f64,
    /// Largest accepted condition estimate of the core-nilpotent similarity.
    pub cond_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_rank: 1e-10,
            tol_eig: 1e-8,
            tol_res: 1e-8,
            tol_unity: 1e-6,
            n_max_unity: 64,
            n_oracle: 32,
            tol_cluster: 1e-2,
            cond_max: 1e10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_rank", self.tol_rank),
            ("tol_eig", self.tol_eig),
            ("tol_res", self.tol_res),
            ("tol_unity", self.tol_unity),
            ("tol_cluster", self.tol_cluster),
            ("cond_max", self.cond_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerances(format!("{name} must be a positive number, got {v}")));
            }
        }
        if self.n_max_unity < 1 {
            return Err(Error::InvalidTolerances("n_max_unity must be at least 1".into()));
        }
        if self.n_oracle < 1 {
            return Err(Error::InvalidTolerances("n_oracle must be at least 1".into()));
        }
        let gap = min_unity_gap(self.n_max_unity);
        if self.tol_unity >= gap / 2.0 {
            return Err(Error::InvalidTolerances(format!(
                "tol_unity {} must stay below half the smallest gap {gap:.3e} between roots of unity of order <= {}",
                self.tol_unity, self.n_max_unity
            )));
        }
        Ok(())
    }
}

/// Smallest distance between two distinct roots of unity of order at most `q_max`.
pub fn min_unity_gap(q_max: u32) -> f64 {
    if q_max <= 1 {
        return 2.0;
    }
    // Closest distinct angles p/q and p'/q' differ by 1/(q (q - 1)) of a turn.
    let q = f64::from(q_max);
    2.0 * (std::f64::consts::PI / (q * (q - 1.0))).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive_and_coarse_unity() {
        let mut t = Tolerances::default();
        t.tol_res = 0.0;
        assert!(t.validate().is_err());
        let mut t = Tolerances::default();
        t.tol_unity = 1e-3;
        assert!(t.validate().is_err());
        let mut t = Tolerances::default();
        t.n_oracle = 0;
        assert!(t.validate().is_err());
    }

    #[test]
    fn gap_matches_brute_force() {
        let q_max = 9u32;
        let mut best = f64::INFINITY;
        for q in 1..=q_max {
            for p in 0..q {
                for q2 in 1..=q_max {
                    for p2 in 0..q2 {
                        let d = (f64::from(p) / f64::from(q) - f64::from(p2) / f64::from(q2)).abs();
                        if d > 1e-12 {
                            let chord = 2.0 * (std::f64::consts::PI * d).sin().abs();
                            best = best.min(chord);
                        }
                    }
                }
            }
        }
        assert!((best - min_unity_gap(q_max)).abs() < 1e-12);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let t: Tolerances = serde_json::from_str(r#"{"tol_res": 1e-6}"#).unwrap();
        assert_eq!(t.tol_res, 1e-6);
        assert_eq!(t.n_oracle, 32);
    }
}
