//! Guarantee/safety classification from the cycle structure of a Rabin
//! automaton.
//!
//! A cycle is accepting when some pair `(fin, inf)` has the cycle disjoint
//! from `fin` and touching `inf`; otherwise it is rejecting. A formula is in
//! guarantee iff no state on an accepting cycle reaches a rejecting cycle,
//! and in safety iff no state on a rejecting cycle reaches an accepting one.

use super::dfa::progression_dfa;
use super::dra::{Dra, RabinPair};
use super::{ltl_to_dra, Limits};
use crate::error::Result;
use crate::graph;
use crate::ltl::Ltl;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassReport {
    pub in_guarantee: bool,
    pub in_safety: bool,
    pub in_finitary: bool,
    /// Prefix length that decides the formula; present iff finitary.
    pub horizon: Option<usize>,
}

/// Which states sit on accepting/rejecting cycles, plus the components
/// witnessing them.
#[derive(Debug, Clone)]
pub struct CycleStructure {
    pub on_accepting_cycle: Vec<bool>,
    pub on_rejecting_cycle: Vec<bool>,
    pub reaches_accepting_cycle: Vec<bool>,
    pub reaches_rejecting_cycle: Vec<bool>,
    /// `(pair index, component)`: strongly connected sets avoiding the
    /// pair's `fin` states and touching its `inf` states.
    pub accepting_components: Vec<(usize, Vec<usize>)>,
    /// Strongly connected sets whose full tour is rejecting.
    pub rejecting_components: Vec<Vec<usize>>,
}

impl CycleStructure {
    pub fn new(dra: &Dra) -> Self {
        let n = dra.num_states();
        let adj = dra.adjacency();
        let mut on_acc = vec![false; n];
        let mut accepting_components = Vec::new();
        for (i, pair) in dra.pairs.iter().enumerate() {
            let keep: Vec<bool> = pair.fin.iter().map(|f| !f).collect();
            for comp in graph::sccs(&adj, &keep) {
                if graph::is_nontrivial(&comp, &adj) && comp.iter().any(|&s| pair.inf[s]) {
                    for &s in &comp {
                        on_acc[s] = true;
                    }
                    accepting_components.push((i, comp));
                }
            }
        }
        let mut rejecting_components = Vec::new();
        rejecting_sets(dra, &adj, vec![true; n], &mut rejecting_components);
        let mut on_rej = vec![false; n];
        for comp in &rejecting_components {
            for &s in comp {
                on_rej[s] = true;
            }
        }
        CycleStructure {
            reaches_accepting_cycle: graph::backward_reach(&adj, &on_acc),
            reaches_rejecting_cycle: graph::backward_reach(&adj, &on_rej),
            on_accepting_cycle: on_acc,
            on_rejecting_cycle: on_rej,
            accepting_components,
            rejecting_components,
        }
    }

    pub fn in_guarantee(&self) -> bool {
        !(0..self.on_accepting_cycle.len())
            .any(|s| self.on_accepting_cycle[s] && self.reaches_rejecting_cycle[s])
    }

    pub fn in_safety(&self) -> bool {
        !(0..self.on_rejecting_cycle.len())
            .any(|s| self.on_rejecting_cycle[s] && self.reaches_accepting_cycle[s])
    }
}

/// Emptiness-style decomposition for the complement (Streett) condition:
/// an SCC is a rejecting set unless some pair sees `inf` without `fin`
/// inside it; then that pair's `inf` states are cut away and the rest is
/// decomposed again.
fn rejecting_sets(dra: &Dra, adj: &[Vec<usize>], keep: Vec<bool>, out: &mut Vec<Vec<usize>>) {
    for comp in graph::sccs(adj, &keep) {
        if !graph::is_nontrivial(&comp, adj) {
            continue;
        }
        let bad: Vec<usize> = dra
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| comp.iter().any(|&s| p.inf[s]) && comp.iter().all(|&s| !p.fin[s]))
            .map(|(i, _)| i)
            .collect();
        if bad.is_empty() {
            out.push(comp);
            continue;
        }
        let mut sub = vec![false; keep.len()];
        for &s in &comp {
            sub[s] = bad.iter().all(|&i| !dra.pairs[i].inf[s]);
        }
        rejecting_sets(dra, adj, sub, out);
    }
}

/// Merges all states with universal language into one accepting sink and
/// all states with empty language into one rejecting sink. Both properties
/// are closed under successors, so the remaining states keep their runs.
pub(crate) fn collapse_sinks(dra: Dra) -> Dra {
    let cs = CycleStructure::new(&dra);
    let n = dra.num_states();
    let universal: Vec<usize> = (0..n).filter(|&s| !cs.reaches_rejecting_cycle[s]).collect();
    let empty: Vec<usize> = (0..n).filter(|&s| !cs.reaches_accepting_cycle[s]).collect();
    let is_sink = |class: &[usize]| match class {
        [] => true,
        [s] => dra.successors(*s).iter().all(|t| t == s),
        _ => false,
    };
    if is_sink(&universal) && is_sink(&empty) {
        return dra;
    }
    let rep: Vec<usize> = (0..n)
        .map(|s| {
            if !cs.reaches_rejecting_cycle[s] {
                universal[0]
            } else if !cs.reaches_accepting_cycle[s] {
                empty[0]
            } else {
                s
            }
        })
        .collect();
    let mut id = vec![usize::MAX; n];
    let mut kept = Vec::new();
    for s in 0..n {
        if rep[s] == s {
            id[s] = kept.len();
            kept.push(s);
        }
    }
    let k = dra.num_letters;
    let mut trans = Vec::with_capacity(kept.len() * k);
    for &s in &kept {
        let sink = rep[s] != s || universal.first() == Some(&s) || empty.first() == Some(&s);
        for &t in dra.successors(s) {
            trans.push(if sink { id[s] } else { id[rep[t]] });
        }
    }
    let pairs = dra
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut fin = Vec::with_capacity(kept.len());
            let mut inf = Vec::with_capacity(kept.len());
            for &s in &kept {
                let accept_all = universal.first() == Some(&s);
                let reject_all = empty.first() == Some(&s);
                fin.push(!accept_all && !reject_all && p.fin[s]);
                inf.push(if accept_all { i == 0 } else { !reject_all && p.inf[s] });
            }
            RabinPair { fin, inf }
        })
        .collect();
    let names = kept
        .iter()
        .map(|&s| {
            if universal.first() == Some(&s) {
                "accept-all".to_string()
            } else if empty.first() == Some(&s) {
                "reject-all".to_string()
            } else {
                dra.names[s].clone()
            }
        })
        .collect();
    Dra {
        num_letters: k,
        trans,
        initial: id[rep[dra.initial]],
        pairs,
        names,
    }
}

/// Classification of an already built Rabin automaton (no horizon).
pub fn classify_dra(dra: &Dra) -> (bool, bool) {
    let cs = CycleStructure::new(dra);
    (cs.in_guarantee(), cs.in_safety())
}

/// Classifies `f` into guarantee, safety and finitary; for finitary formulas
/// the horizon comes from the progression DFA.
pub fn classify(f: &Ltl, limits: &Limits) -> Result<ClassReport> {
    let dra = ltl_to_dra(f, limits)?;
    let (in_guarantee, in_safety) = classify_dra(&dra);
    let in_finitary = in_guarantee && in_safety;
    let horizon = if in_finitary {
        Some(progression_dfa(f, limits)?.1)
    } else {
        None
    };
    let report = ClassReport {
        in_guarantee,
        in_safety,
        in_finitary,
        horizon,
    };
    assert_eq!(report.in_finitary, report.in_guarantee && report.in_safety);
    Ok(report)
}
