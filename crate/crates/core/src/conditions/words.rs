use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Letter, Matrix};
use crate::tolerances::Tolerances;

/// Largest word length enumerated (`2^k` words).
pub const MAX_WORD_LENGTH: usize = 12;

/// The four word conditions on a pair `(a, b)`, each over all words `w` of
/// length `k` in `{a, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordPattern {
    /// `ab w = 0`
    StarLeft,
    /// `w ab = 0`
    StarRight,
    /// `w ab = w ba`
    AstLeft,
    /// `ab w = ba w`
    AstRight,
}

impl WordPattern {
    pub const ALL: [WordPattern; 4] = [
        WordPattern::StarLeft,
        WordPattern::StarRight,
        WordPattern::AstLeft,
        WordPattern::AstRight,
    ];

    pub fn is_star(self) -> bool {
        matches!(self, WordPattern::StarLeft | WordPattern::StarRight)
    }

    /// CLI spelling.
    pub fn name(self) -> &'static str {
        match self {
            WordPattern::StarLeft => "kstar",
            WordPattern::StarRight => "kstar-r",
            WordPattern::AstLeft => "kast",
            WordPattern::AstRight => "kast-r",
        }
    }

    fn word_on_right(self) -> bool {
        matches!(self, WordPattern::StarLeft | WordPattern::AstRight)
    }
}

impl fmt::Display for WordPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WordPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WordPattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown word pattern '{s}' (expected kstar, kstar-r, kast or kast-r)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub pattern: WordPattern,
    pub holds: bool,
    pub k: usize,
    /// Largest residual over all words, relative to the product of the
    /// factor norms.
    pub worst_residual: f64,
    pub worst_word: Vec<Letter>,
}

/// Checks the pattern for every one of the `2^k` words, sharing prefixes.
pub fn check_word_condition(
    a: &Matrix,
    b: &Matrix,
    k: usize,
    pattern: WordPattern,
    tol: &Tolerances,
) -> Result<ConditionReport> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            expected: a.order(),
            found: b.order(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("word length k must be at least 1".into()));
    }
    if k > MAX_WORD_LENGTH {
        return Err(Error::KTooLarge {
            k,
            max: MAX_WORD_LENGTH,
        });
    }
    let na = a.norm_fro();
    let nb = b.norm_fro();
    let ab = a * b;
    let (base, scale) = if pattern.is_star() {
        (ab, na * nb)
    } else {
        (&ab - &(b * a), 2.0 * na * nb)
    };
    let mut search = Search {
        a,
        b,
        na,
        nb,
        right: pattern.word_on_right(),
        word: Vec::with_capacity(k),
        worst: -1.0,
        worst_word: Vec::new(),
    };
    search.visit(&base, scale, k);
    if !search.worst.is_finite() {
        return Err(Error::OverflowDetected("evaluating a word condition"));
    }
    Ok(ConditionReport {
        pattern,
        holds: search.worst <= tol.tol_res,
        k,
        worst_residual: search.worst,
        worst_word: search.worst_word,
    })
}

struct Search<'m> {
    a: &'m Matrix,
    b: &'m Matrix,
    na: f64,
    nb: f64,
    right: bool,
    word: Vec<Letter>,
    worst: f64,
    worst_word: Vec<Letter>,
}

impl Search<'_> {
    fn visit(&mut self, m: &Matrix, scale: f64, depth: usize) {
        if depth == 0 {
            let r = m.norm_fro() / scale.max(1.0);
            if r > self.worst || r.is_nan() {
                self.worst = if r.is_nan() { f64::INFINITY } else { r };
                self.worst_word = self.word.clone();
                if !self.right {
                    // Left multiplication grows the word from its last letter.
                    self.worst_word.reverse();
                }
            }
            return;
        }
        for letter in [Letter::A, Letter::B] {
            let (f, nf) = match letter {
                Letter::A => (self.a, self.na),
                Letter::B => (self.b, self.nb),
            };
            let next = if self.right { m * f } else { f * m };
            self.word.push(letter);
            self.visit(&next, scale * nf, depth - 1);
            self.word.pop();
        }
    }
}
