//! Uncommittable words of non-finitary formulas.
//!
//! An accepting witness is a word `u·v^ω` in the language from which a
//! bounded detour `u·v^i·x·y^ω` leaves it for every `i`; a rejecting
//! witness is the mirror image. Both are read off cycles of the Rabin
//! automaton.

use crate::automata::{classify, ltl_to_dra, CycleStructure, Dra, Limits};
use crate::error::{Error, Result};
use crate::graph;
use crate::ltl::{Alphabet, LassoWord, Letter, Ltl};

/// Repetition counts validated by [`Witness::check`].
pub const CHECKED_REPETITIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    UncommittableAccepting,
    UncommittableRejecting,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub kind: WitnessKind,
    /// Path to the first cycle.
    pub prefix: Vec<Letter>,
    pub first_cycle: Vec<Letter>,
    /// Path from the first cycle to the second.
    pub bridge: Vec<Letter>,
    pub second_cycle: Vec<Letter>,
}

impl Witness {
    /// `prefix · first_cycle^ω`.
    pub fn staying(&self) -> LassoWord {
        LassoWord::new(self.prefix.clone(), self.first_cycle.clone()).expect("nonempty cycle")
    }

    /// `prefix · first_cycle^i · bridge · second_cycle^ω`.
    pub fn leaving(&self, i: usize) -> LassoWord {
        LassoWord::concat(&self.prefix, &self.first_cycle, i, &self.bridge, &self.second_cycle)
            .expect("nonempty cycle")
    }

    /// Verifies the defining property for `i` in `0..=CHECKED_REPETITIONS`.
    pub fn check(&self, f: &Ltl) -> Result<()> {
        if self.first_cycle.is_empty() || self.second_cycle.is_empty() {
            return Err(Error::InvalidWitness("cycles must be nonempty".into()));
        }
        let stays = self.kind == WitnessKind::UncommittableAccepting;
        if f.evaluate_lasso(&self.staying())? != stays {
            return Err(Error::InvalidWitness("wrong verdict on the staying word".into()));
        }
        for i in 0..=CHECKED_REPETITIONS {
            if f.evaluate_lasso(&self.leaving(i))? == stays {
                return Err(Error::InvalidWitness(format!(
                    "wrong verdict on the leaving word with {i} repetitions"
                )));
            }
        }
        Ok(())
    }

    pub fn display(&self, alphabet: &Alphabet) -> String {
        let word = |w: &[Letter]| {
            let parts: Vec<String> = w.iter().map(|&l| alphabet.format_letter(l)).collect();
            format!("[{}]", parts.join(","))
        };
        format!(
            "{:?}\nw_a = {}\nw_b = {}\nw_c = {}\nw_d = {}",
            self.kind,
            word(&self.prefix),
            word(&self.first_cycle),
            word(&self.bridge),
            word(&self.second_cycle)
        )
    }
}

struct Search<'a> {
    dra: &'a Dra,
    cs: CycleStructure,
    /// Breadth-first discovery rank from the initial state.
    rank: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(dra: &'a Dra) -> Self {
        let n = dra.num_states();
        let mut rank = vec![usize::MAX; n];
        let mut order = vec![dra.initial];
        rank[dra.initial] = 0;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for &t in dra.successors(s) {
                if rank[t] == usize::MAX {
                    rank[t] = order.len();
                    order.push(t);
                }
            }
        }
        Search {
            dra,
            cs: CycleStructure::new(dra),
            rank,
        }
    }

    fn edges(&self) -> impl Fn(usize) -> Vec<(Letter, usize)> + '_ {
        |s| {
            self.dra
                .successors(s)
                .iter()
                .enumerate()
                .map(|(l, &t)| (Letter(l as u32), t))
                .collect()
        }
    }

    fn path(&self, from: usize, goal: impl Fn(usize) -> bool) -> Option<(Vec<Letter>, usize)> {
        graph::bfs_path(self.dra.num_states(), self.edges(), from, |_| true, goal, false)
    }

    fn cycle_within(&self, s: usize, members: &[usize]) -> Vec<Letter> {
        graph::bfs_path(
            self.dra.num_states(),
            self.edges(),
            s,
            |t| members.binary_search(&t).is_ok(),
            |t| t == s,
            true,
        )
        .expect("state lies on a cycle of its component")
        .0
    }

    /// Accepting anchors: `inf` states of accepting components, each paired
    /// with its component so the shortest cycle through it stays accepting.
    fn accepting_anchor(&self, s: usize) -> Option<&[usize]> {
        self.cs
            .accepting_components
            .iter()
            .find(|(i, comp)| self.dra.pairs[*i].inf[s] && comp.binary_search(&s).is_ok())
            .map(|(_, comp)| comp.as_slice())
    }

    fn rejecting_component(&self, s: usize) -> Option<&[usize]> {
        self.cs
            .rejecting_components
            .iter()
            .find(|comp| comp.binary_search(&s).is_ok())
            .map(|c| c.as_slice())
    }

    /// Rejecting cycle through `r`: the shortest one if it is rejecting,
    /// otherwise a tour of the whole rejecting component.
    fn rejecting_cycle(&self, r: usize) -> Vec<Letter> {
        let comp = self.rejecting_component(r).expect("r is on a rejecting cycle");
        let cycle = self.cycle_within(r, comp);
        if !self.dra.is_accepting_set(&self.visited(r, &cycle)) {
            return cycle;
        }
        let mut tour = Vec::new();
        let mut cur = r;
        for &t in comp.iter().filter(|&&t| t != r).chain(std::iter::once(&r)) {
            let (seg, _) = graph::bfs_path(
                self.dra.num_states(),
                self.edges(),
                cur,
                |x| comp.binary_search(&x).is_ok(),
                |x| x == t,
                t == cur,
            )
            .expect("component is strongly connected");
            tour.extend(seg);
            cur = t;
        }
        debug_assert!(!self.dra.is_accepting_set(&self.visited(r, &tour)));
        tour
    }

    fn visited(&self, from: usize, word: &[Letter]) -> Vec<usize> {
        let mut states = vec![from];
        let mut s = from;
        for &l in word {
            s = self.dra.next(s, l);
            states.push(s);
        }
        states.sort_unstable();
        states.dedup();
        states
    }

    fn first_by_rank(&self, pred: impl Fn(usize) -> bool) -> Option<usize> {
        (0..self.dra.num_states())
            .filter(|&s| self.rank[s] != usize::MAX && pred(s))
            .min_by_key(|&s| self.rank[s])
    }

    fn accepting_witness(&self) -> Option<Witness> {
        let s = self.first_by_rank(|s| {
            self.accepting_anchor(s).is_some() && self.cs.reaches_rejecting_cycle[s]
        })?;
        let (prefix, _) = self.path(self.dra.initial, |t| t == s)?;
        let first_cycle = self.cycle_within(s, self.accepting_anchor(s)?);
        let (bridge, r) = self.path(s, |t| self.cs.on_rejecting_cycle[t])?;
        Some(Witness {
            kind: WitnessKind::UncommittableAccepting,
            prefix,
            first_cycle,
            bridge,
            second_cycle: self.rejecting_cycle(r),
        })
    }

    fn rejecting_witness(&self) -> Option<Witness> {
        let s = self.first_by_rank(|s| {
            self.cs.on_rejecting_cycle[s] && self.cs.reaches_accepting_cycle[s]
        })?;
        let (prefix, _) = self.path(self.dra.initial, |t| t == s)?;
        let first_cycle = self.rejecting_cycle(s);
        let (bridge, t) = self.path(s, |t| self.accepting_anchor(t).is_some())?;
        Some(Witness {
            kind: WitnessKind::UncommittableRejecting,
            prefix,
            first_cycle,
            bridge,
            second_cycle: self.cycle_within(t, self.accepting_anchor(t)?),
        })
    }
}

/// Uncommittable witness of a non-finitary formula. Formulas outside
/// guarantee yield accepting witnesses; the rest (outside safety) yield
/// rejecting ones. Every returned witness has passed [`Witness::check`].
pub fn find_uncommittable(f: &Ltl, limits: &Limits) -> Result<Witness> {
    let report = classify(f, limits)?;
    if report.in_finitary {
        return Err(Error::FinitaryFormula);
    }
    let dra = ltl_to_dra(f, limits)?;
    let search = Search::new(&dra);
    let w = if !report.in_guarantee {
        search.accepting_witness()
    } else {
        search.rejecting_witness()
    }
    .ok_or_else(|| Error::InvalidWitness("no qualifying cycle pair".into()))?;
    w.check(f)?;
    Ok(w)
}
