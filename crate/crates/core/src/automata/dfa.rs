//! Progression DFAs for finitary formulas.

use std::collections::{HashMap, VecDeque};

use super::classify::classify_dra;
use super::{ltl_to_dra, ltl_to_nba, Limits};
use crate::error::{Error, Result};
use crate::ltl::{normalize, Formula, Letter, Ltl};

/// Finite-word automaton whose states are progression formulas. The only
/// cycles are the sink self-loops.
#[derive(Debug, Clone)]
pub struct Dfa {
    pub num_letters: usize,
    pub states: Vec<Formula>,
    /// `trans[state * num_letters + letter]`.
    pub trans: Vec<usize>,
    pub initial: usize,
    pub accepting: Vec<usize>,
    pub rejecting: Vec<usize>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn next(&self, state: usize, l: Letter) -> usize {
        self.trans[state * self.num_letters + l.index()]
    }

    pub fn run(&self, word: &[Letter]) -> usize {
        word.iter().fold(self.initial, |s, &l| self.next(s, l))
    }

    pub fn is_accepting_sink(&self, state: usize) -> bool {
        self.accepting.contains(&state)
    }

    pub fn is_sink(&self, state: usize) -> bool {
        self.accepting.contains(&state) || self.rejecting.contains(&state)
    }

    /// Verdict after reading `prefix`, if it is already decided.
    pub fn verdict(&self, prefix: &[Letter]) -> Option<bool> {
        let s = self.run(prefix);
        if self.accepting.contains(&s) {
            Some(true)
        } else if self.rejecting.contains(&s) {
            Some(false)
        } else {
            None
        }
    }
}

fn is_unsat(ltl: &Ltl, f: &Formula, limits: &Limits) -> Result<bool> {
    let g = Ltl::new(ltl.alphabet.clone(), f.clone());
    Ok(ltl_to_nba(&g.to_nnf(), limits)?.is_empty())
}

/// Folds progression states that are semantically constant into the sinks.
fn fold_constant(ltl: &Ltl, f: Formula, limits: &Limits) -> Result<Formula> {
    if matches!(f, Formula::True | Formula::False) {
        return Ok(f);
    }
    if is_unsat(ltl, &f, limits)? {
        return Ok(Formula::False);
    }
    if is_unsat(ltl, &f.clone().not(), limits)? {
        return Ok(Formula::True);
    }
    Ok(f)
}

/// Builds the progression DFA without checking the precondition; fails with
/// `NotFinitary` if a cycle outside the sinks shows up.
pub(crate) fn progression_dfa(f: &Ltl, limits: &Limits) -> Result<(Dfa, usize)> {
    let num_letters = f.num_letters();
    let init = fold_constant(f, normalize(&f.root), limits)?;
    let mut ids: HashMap<Formula, usize> = HashMap::from([(init.clone(), 0)]);
    let mut states = vec![init];
    let mut trans = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        trans.resize((id + 1) * num_letters, usize::MAX);
        let cur = states[id].clone();
        for l in 0..num_letters {
            let succ = fold_constant(f, crate::ltl::progress(&cur, Letter(l as u32)), limits)?;
            let sid = match ids.get(&succ) {
                Some(&s) => s,
                None => {
                    if states.len() >= limits.dfa_states {
                        return Err(Error::AutomatonTooLarge {
                            what: "DFA",
                            cap: limits.dfa_states,
                        });
                    }
                    let s = states.len();
                    ids.insert(succ.clone(), s);
                    states.push(succ);
                    queue.push_back(s);
                    s
                }
            };
            trans[id * num_letters + l] = sid;
        }
    }
    let pick = |c: &Formula| states.iter().position(|s| s == c).into_iter().collect();
    let dfa = Dfa {
        num_letters,
        accepting: pick(&Formula::True),
        rejecting: pick(&Formula::False),
        initial: 0,
        trans,
        states,
    };
    let horizon = longest_path_to_sink(&dfa).ok_or(Error::NotFinitary)?;
    Ok((dfa, horizon))
}

/// Depth-first longest path on the DAG obtained by dropping sink loops.
/// `None` if a non-sink back edge exists.
fn longest_path_to_sink(d: &Dfa) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done(usize),
    }
    let n = d.num_states();
    let mut mark = vec![Mark::New; n];
    // Explicit stack of (state, next letter to try).
    let mut stack = vec![(d.initial, 0usize)];
    mark[d.initial] = Mark::Open;
    while let Some(&(s, li)) = stack.last() {
        if d.is_sink(s) {
            mark[s] = Mark::Done(0);
            stack.pop();
            continue;
        }
        if li < d.num_letters {
            let t = d.trans[s * d.num_letters + li];
            stack.last_mut().unwrap().1 += 1;
            match mark[t] {
                Mark::Open => return None,
                Mark::New => {
                    mark[t] = Mark::Open;
                    stack.push((t, 0));
                }
                Mark::Done(_) => {}
            }
        } else {
            let best = (0..d.num_letters)
                .map(|l| match mark[d.trans[s * d.num_letters + l]] {
                    Mark::Done(h) => h + 1,
                    _ => unreachable!(),
                })
                .max()
                .unwrap_or(0);
            mark[s] = Mark::Done(best);
            stack.pop();
        }
    }
    match mark[d.initial] {
        Mark::Done(h) => Some(h),
        _ => None,
    }
}

/// DFA and horizon of a finitary formula.
pub fn build_dfa_finitary(f: &Ltl, limits: &Limits) -> Result<(Dfa, usize)> {
    let (g, s) = classify_dra(&ltl_to_dra(f, limits)?);
    if !(g && s) {
        return Err(Error::NotFinitary);
    }
    progression_dfa(f, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse, Alphabet, LassoWord};

    fn build(text: &str) -> Result<(Dfa, usize)> {
        let al = Alphabet::new(["a", "b"]).unwrap();
        build_dfa_finitary(&parse(text, &al).unwrap(), &Limits::default())
    }

    #[test]
    fn two_step_conjunction() {
        let al = Alphabet::new(["a"]).unwrap();
        let f = parse("a & X a", &al).unwrap();
        let (d, h) = build_dfa_finitary(&f, &Limits::default()).unwrap();
        assert_eq!(d.num_states(), 4);
        assert_eq!(h, 2);
        for bits in 0..4u32 {
            let prefix = [Letter(bits & 1), Letter(bits >> 1)];
            let w = LassoWord::new(prefix.to_vec(), vec![Letter(0)]).unwrap();
            assert_eq!(d.verdict(&prefix), Some(f.evaluate_lasso(&w).unwrap()));
        }
    }

    #[test]
    fn constant_true() {
        let (d, h) = build("true").unwrap();
        assert_eq!((d.num_states(), h), (1, 0));
        assert_eq!(d.accepting, vec![0]);
        assert!(d.rejecting.is_empty());
    }

    #[test]
    fn non_finitary_rejected() {
        assert!(matches!(build("F a"), Err(Error::NotFinitary)));
        assert!(matches!(build("G a"), Err(Error::NotFinitary)));
    }

    #[test]
    fn trivial_until_folds() {
        let (d, h) = build("a U false").unwrap();
        assert_eq!(h, 0);
        assert_eq!(d.rejecting, vec![0]);
        let (_, h) = build("X (b | !b) & a").unwrap();
        assert_eq!(h, 1);
    }
}
