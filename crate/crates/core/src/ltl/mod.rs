//! LTL formulas over a small explicit alphabet.
//!
//! Letters are bit-sets over the ordered atom list, so `2^|atoms|` letters
//! are enumerated explicitly everywhere downstream.

mod formula;
mod lasso;
mod parser;
mod progress;

pub use formula::{Alphabet, Formula, Letter, Ltl, MAX_ATOMS};
pub use lasso::LassoWord;
pub use parser::{parse, parse_inferring_alphabet};
pub use progress::{normalize, progress};

use crate::automata::{self, Limits};
use crate::error::Result;

impl Formula {
    /// Negation normal form. `G` becomes `false R _`, `F` becomes `true U _`,
    /// and negations sit only on atoms.
    pub fn to_nnf(&self) -> Formula {
        nnf(self, false)
    }
}

fn nnf(f: &Formula, negated: bool) -> Formula {
    use Formula::*;
    let b = |x: &Formula, n: bool| Box::new(nnf(x, n));
    match (f, negated) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(i), false) => Atom(*i),
        (Atom(i), true) => Not(Box::new(Atom(*i))),
        (Not(x), n) => nnf(x, !n),
        (And(x, y), false) | (Or(x, y), true) => And(b(x, negated), b(y, negated)),
        (Or(x, y), false) | (And(x, y), true) => Or(b(x, negated), b(y, negated)),
        (Next(x), n) => Next(b(x, n)),
        (Always(x), false) | (Eventually(x), true) => Release(Box::new(False), b(x, negated)),
        (Eventually(x), false) | (Always(x), true) => Until(Box::new(True), b(x, negated)),
        (Until(x, y), false) | (Release(x, y), true) => Until(b(x, negated), b(y, negated)),
        (Release(x, y), false) | (Until(x, y), true) => Release(b(x, negated), b(y, negated)),
    }
}

impl Ltl {
    pub fn to_nnf(&self) -> Ltl {
        Ltl::new(self.alphabet.clone(), self.root.to_nnf())
    }

    /// Exact verdict of `self` on an ultimately periodic word, decided by
    /// running the formula's Rabin automaton around the lasso.
    pub fn evaluate_lasso(&self, word: &LassoWord) -> Result<bool> {
        let dra = automata::ltl_to_dra(self, &Limits::default())?;
        Ok(dra.accepts_lasso(word))
    }
}

/// Free-function form of [`Ltl::evaluate_lasso`].
pub fn evaluate_lasso(f: &Ltl, word: &LassoWord) -> Result<bool> {
    f.evaluate_lasso(word)
}

/// Free-function form of [`Ltl::to_nnf`].
pub fn to_nnf(f: &Ltl) -> Ltl {
    f.to_nnf()
}
