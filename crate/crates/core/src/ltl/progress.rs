//! Formula progression with syntactic canonicalization.
//!
//! Conjunctions and disjunctions are flattened, constant-folded, sorted and
//! deduplicated, then rebuilt right-nested. Two progressions that agree up to
//! associativity, commutativity and idempotence therefore compare equal.

use super::formula::{Formula, Letter};

fn collect(f: Formula, conj: bool, out: &mut Vec<Formula>) {
    match (f, conj) {
        (Formula::And(x, y), true) | (Formula::Or(x, y), false) => {
            collect(*x, conj, out);
            collect(*y, conj, out);
        }
        (f, _) => out.push(f),
    }
}

fn junction(items: Vec<Formula>, conj: bool) -> Formula {
    let (unit, zero) = if conj {
        (Formula::True, Formula::False)
    } else {
        (Formula::False, Formula::True)
    };
    let mut flat = Vec::with_capacity(items.len());
    for f in items {
        collect(f, conj, &mut flat);
    }
    if flat.contains(&zero) {
        return zero;
    }
    flat.retain(|f| *f != unit);
    flat.sort();
    flat.dedup();
    let mut it = flat.into_iter().rev();
    let Some(mut acc) = it.next() else {
        return unit;
    };
    for f in it {
        acc = if conj { f.and(acc) } else { f.or(acc) };
    }
    acc
}

fn mk_and(items: Vec<Formula>) -> Formula {
    junction(items, true)
}

fn mk_or(items: Vec<Formula>) -> Formula {
    junction(items, false)
}

/// Canonical form of an NNF formula: every `&`/`|` spine is normalized
/// bottom-up. Input that is not in NNF is converted first.
pub fn normalize(f: &Formula) -> Formula {
    if f.is_nnf() {
        canon(f)
    } else {
        canon(&f.to_nnf())
    }
}

fn canon(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        True | False | Atom(_) => f.clone(),
        Not(x) => Not(Box::new(canon(x))),
        And(x, y) => mk_and(vec![canon(x), canon(y)]),
        Or(x, y) => mk_or(vec![canon(x), canon(y)]),
        Next(x) => Next(Box::new(canon(x))),
        Always(x) => Always(Box::new(canon(x))),
        Eventually(x) => Eventually(Box::new(canon(x))),
        Until(x, y) => Until(Box::new(canon(x)), Box::new(canon(y))),
        Release(x, y) => Release(Box::new(canon(x)), Box::new(canon(y))),
    }
}

/// Residual obligation after reading `l`: for every infinite word `w`,
/// `l·w ⊨ f` iff `w ⊨ progress(f, l)`. The result is normalized.
pub fn progress(f: &Formula, l: Letter) -> Formula {
    let f = normalize(f);
    step(&f, l)
}

/// Progression of an already normalized formula.
pub(crate) fn step(f: &Formula, l: Letter) -> Formula {
    use Formula::*;
    let konst = |b: bool| if b { True } else { False };
    match f {
        True => True,
        False => False,
        Atom(i) => konst(l.contains(*i)),
        Not(x) => match &**x {
            Atom(i) => konst(!l.contains(*i)),
            other => match step(other, l) {
                True => False,
                False => True,
                g => normalize(&g.not()),
            },
        },
        And(x, y) => mk_and(vec![step(x, l), step(y, l)]),
        Or(x, y) => mk_or(vec![step(x, l), step(y, l)]),
        Next(x) => (**x).clone(),
        Eventually(x) => mk_or(vec![step(x, l), f.clone()]),
        Always(x) => mk_and(vec![step(x, l), f.clone()]),
        Until(x, y) => mk_or(vec![step(y, l), mk_and(vec![step(x, l), f.clone()])]),
        Release(x, y) => mk_and(vec![step(y, l), mk_or(vec![step(x, l), f.clone()])]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse, Alphabet};

    #[test]
    fn progress_examples() {
        let al = Alphabet::new(["a"]).unwrap();
        let f = parse("a & X a", &al).unwrap().root;
        assert_eq!(progress(&f, Letter(1)), Formula::Atom(0));
        assert_eq!(progress(&f, Letter(0)), Formula::False);
        let fa = parse("F a", &al).unwrap().root;
        assert_eq!(progress(&fa, Letter(0)), normalize(&fa));
        assert_eq!(progress(&fa, Letter(1)), Formula::True);
    }

    #[test]
    fn canonical_junctions() {
        let al = Alphabet::new(["a", "b"]).unwrap();
        let x = normalize(&parse("(b & a) & (a & true)", &al).unwrap().root);
        let y = normalize(&parse("a & b", &al).unwrap().root);
        assert_eq!(x, y);
        let z = normalize(&parse("b | (false | b)", &al).unwrap().root);
        assert_eq!(z, Formula::Atom(1));
    }
}
