//! Automata for LTL: tableau Büchi automata, Safra-determinized Rabin
//! automata, progression DFAs for finitary formulas, and the
//! guarantee/safety classification read off the Rabin automaton's cycles.

mod bits;
mod classify;
mod dfa;
mod dra;
mod nba;

pub use classify::{classify, classify_dra, ClassReport, CycleStructure};
pub use dfa::{build_dfa_finitary, Dfa};
pub use dra::{nba_to_dra, Dra, RabinPair};
pub use nba::{ltl_to_nba, Nba};

use std::fmt::Write;

use crate::error::Result;
use crate::ltl::Ltl;

/// State caps for every construction. Exceeding one is an error, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub nba_states: usize,
    pub dra_states: usize,
    pub dfa_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            nba_states: 4096,
            dra_states: 4096,
            dfa_states: 4096,
        }
    }
}

/// NNF, tableau, then Safra; states of universal or empty language are
/// merged into two sinks.
pub fn ltl_to_dra(f: &Ltl, limits: &Limits) -> Result<Dra> {
    let nba = ltl_to_nba(&f.to_nnf(), limits)?;
    Ok(classify::collapse_sinks(nba_to_dra(&nba, limits)?))
}

fn join(states: impl Iterator<Item = usize>) -> String {
    states.map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Text dump: header lines, then one `src<TAB>letter-bitmask<TAB>dst` line
/// per transition.
pub fn dump_nba(n: &Nba) -> String {
    let mut out = String::new();
    writeln!(out, "nba\t{}\t{}", n.num_states(), n.num_letters).unwrap();
    writeln!(out, "initial\t{}", join(n.initial.iter().copied())).unwrap();
    let acc = (0..n.num_states()).filter(|&s| n.accepting[s]);
    writeln!(out, "accepting\t{}", join(acc)).unwrap();
    for (s, row) in n.trans.iter().enumerate() {
        for (l, succ) in row.iter().enumerate() {
            for t in succ {
                writeln!(out, "{s}\t{l:b}\t{t}").unwrap();
            }
        }
    }
    out
}

pub fn dump_dra(d: &Dra) -> String {
    let mut out = String::new();
    writeln!(out, "dra\t{}\t{}", d.num_states(), d.num_letters).unwrap();
    writeln!(out, "initial\t{}", d.initial).unwrap();
    for (i, p) in d.pairs.iter().enumerate() {
        let fin = (0..p.fin.len()).filter(|&s| p.fin[s]);
        let inf = (0..p.inf.len()).filter(|&s| p.inf[s]);
        writeln!(out, "pair\t{i}\tfin\t{}\tinf\t{}", join(fin), join(inf)).unwrap();
    }
    for s in 0..d.num_states() {
        for (l, t) in d.successors(s).iter().enumerate() {
            writeln!(out, "{s}\t{l:b}\t{t}").unwrap();
        }
    }
    out
}

pub fn dump_dfa(d: &Dfa) -> String {
    let mut out = String::new();
    writeln!(out, "dfa\t{}\t{}", d.num_states(), d.num_letters).unwrap();
    writeln!(out, "initial\t{}", d.initial).unwrap();
    writeln!(out, "accepting\t{}", join(d.accepting.iter().copied())).unwrap();
    writeln!(out, "rejecting\t{}", join(d.rejecting.iter().copied())).unwrap();
    for s in 0..d.num_states() {
        for l in 0..d.num_letters {
            writeln!(out, "{s}\t{l:b}\t{}", d.trans[s * d.num_letters + l]).unwrap();
        }
    }
    out
}
