use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Upper bound on the number of atomic propositions.
pub const MAX_ATOMS: usize = 8;

/// Ordered list of atom names. Atom `i` is bit `i` of a [`Letter`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Arc<Vec<String>>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_ATOMS {
            return Err(Error::AlphabetTooLarge(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateAtom(n.clone()));
            }
        }
        Ok(Alphabet {
            names: Arc::new(names),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Number of letters, `2^len`.
    pub fn num_letters(&self) -> usize {
        1 << self.names.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.num_letters() as u32).map(Letter)
    }

    /// Letter holding exactly the named atoms.
    pub fn letter<S: AsRef<str>>(&self, atoms: &[S]) -> Result<Letter> {
        let mut bits = 0;
        for a in atoms {
            let i = self
                .index_of(a.as_ref())
                .ok_or_else(|| Error::UnknownAtom(a.as_ref().to_string()))?;
            bits |= 1 << i;
        }
        Ok(Letter(bits))
    }

    pub fn letter_atoms(&self, l: Letter) -> Vec<&str> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| l.contains(*i))
            .map(|(_, n)| n.as_str())
            .collect()
    }

    pub fn format_letter(&self, l: Letter) -> String {
        format!("{{{}}}", self.letter_atoms(l).join(","))
    }
}

/// Set of atoms true at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Letter(pub u32);

impl Letter {
    pub const EMPTY: Letter = Letter(0);

    pub fn from_bits(bits: u32) -> Self {
        Letter(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }
}

/// LTL syntax tree. Atoms refer to positions in an [`Alphabet`].
///
/// `Release` is produced only by [`Formula::to_nnf`]; the parser never emits it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn next(self) -> Formula {
        Formula::Next(Box::new(self))
    }

    pub fn always(self) -> Formula {
        Formula::Always(Box::new(self))
    }

    pub fn eventually(self) -> Formula {
        Formula::Eventually(Box::new(self))
    }

    pub fn until(self, other: Formula) -> Formula {
        Formula::Until(Box::new(self), Box::new(other))
    }

    pub fn release(self, other: Formula) -> Formula {
        Formula::Release(Box::new(self), Box::new(other))
    }

    /// Operator nesting depth; constants and atoms have depth 0.
    pub fn depth(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Atom(_) => 0,
            Not(x) | Next(x) | Always(x) | Eventually(x) => 1 + x.depth(),
            And(x, y) | Or(x, y) | Until(x, y) | Release(x, y) => 1 + x.depth().max(y.depth()),
        }
    }

    pub fn max_atom(&self) -> Option<usize> {
        use Formula::*;
        match self {
            True | False => None,
            Atom(i) => Some(*i),
            Not(x) | Next(x) | Always(x) | Eventually(x) => x.max_atom(),
            And(x, y) | Or(x, y) | Until(x, y) | Release(x, y) => x.max_atom().max(y.max_atom()),
        }
    }

    /// True when negations appear only directly above atoms and no `F`/`G`
    /// sugar remains.
    pub fn is_nnf(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Atom(_) => true,
            Not(x) => matches!(**x, Atom(_)),
            Always(_) | Eventually(_) => false,
            Next(x) => x.is_nnf(),
            And(x, y) | Or(x, y) | Until(x, y) | Release(x, y) => x.is_nnf() && y.is_nnf(),
        }
    }

    pub(crate) fn fmt_with(&self, names: &[String], out: &mut String) {
        use Formula::*;
        let bin = |out: &mut String, x: &Formula, op: &str, y: &Formula| {
            out.push('(');
            x.fmt_with(names, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            y.fmt_with(names, out);
            out.push(')');
        };
        let un = |out: &mut String, op: &str, x: &Formula| {
            out.push_str(op);
            x.fmt_with(names, out);
        };
        match self {
            True => out.push_str("true"),
            False => out.push_str("false"),
            Atom(i) => match names.get(*i) {
                Some(n) => out.push_str(n),
                None => out.push_str(&format!("p{i}")),
            },
            Not(x) => un(out, "!", x),
            Next(x) => un(out, "X ", x),
            Always(x) => un(out, "G ", x),
            Eventually(x) => un(out, "F ", x),
            And(x, y) => bin(out, x, "&", y),
            Or(x, y) => bin(out, x, "|", y),
            Until(x, y) => bin(out, x, "U", y),
            Release(x, y) => bin(out, x, "R", y),
        }
    }
}

/// A formula together with the alphabet its atoms index into.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ltl {
    pub alphabet: Alphabet,
    pub root: Formula,
}

impl Ltl {
    pub fn new(alphabet: Alphabet, root: Formula) -> Self {
        debug_assert!(root.max_atom().is_none_or(|i| i < alphabet.len()));
        Ltl { alphabet, root }
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.num_letters()
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.root.fmt_with(self.alphabet.names(), &mut s);
        f.write_str(&s)
    }
}
