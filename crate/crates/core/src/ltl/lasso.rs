use super::formula::{Alphabet, Letter};
use crate::error::{Error, Result};

/// The ultimately periodic word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    prefix: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidWitness("lasso cycle must be nonempty".into()));
        }
        Ok(LassoWord { prefix, cycle })
    }

    pub fn prefix(&self) -> &[Letter] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    /// Letter at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// `l · self`.
    pub fn prepend(&self, l: Letter) -> LassoWord {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(l);
        prefix.extend_from_slice(&self.prefix);
        LassoWord {
            prefix,
            cycle: self.cycle.clone(),
        }
    }

    /// The first `n` letters.
    pub fn take(&self, n: usize) -> Vec<Letter> {
        (0..n).map(|i| self.at(i)).collect()
    }

    /// Builds `a · b^i · c · d^ω`.
    pub fn concat(a: &[Letter], b: &[Letter], i: usize, c: &[Letter], d: &[Letter]) -> Result<Self> {
        let mut prefix = a.to_vec();
        for _ in 0..i {
            prefix.extend_from_slice(b);
        }
        prefix.extend_from_slice(c);
        LassoWord::new(prefix, d.to_vec())
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        let f = |ls: &[Letter]| {
            ls.iter()
                .map(|l| alphabet.format_letter(*l))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("[{}] ([{}])^w", f(&self.prefix), f(&self.cycle))
    }
}
