//! Tableau construction of a Büchi automaton from an NNF formula.
//!
//! Tableau nodes are sets of obligations. Expanding a node yields covers:
//! literal constraints for the current letter, obligations for the next
//! step, and the set of `U` formulas whose fulfilment was postponed. A
//! transition is accepting for an until-formula when that formula was not
//! postponed. The resulting generalized condition is folded into a single
//! Büchi set with a round-robin counter.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::Limits;
use crate::error::{Error, Result};
use crate::graph;
use crate::ltl::{Formula, LassoWord, Letter, Ltl};

/// Nondeterministic Büchi automaton with explicit letters.
#[derive(Debug, Clone)]
pub struct Nba {
    pub num_letters: usize,
    /// `trans[state][letter]`: successor states, sorted.
    pub trans: Vec<Vec<Vec<usize>>>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
    /// Human-readable description of each state.
    pub names: Vec<String>,
}

#[derive(Clone, Default)]
struct Cover {
    pos: u32,
    neg: u32,
    next: BTreeSet<Formula>,
    pending: u64,
}

fn collect_untils(f: &Formula, out: &mut Vec<Formula>) {
    use Formula::*;
    match f {
        True | False | Atom(_) => {}
        Not(x) | Next(x) | Always(x) | Eventually(x) => collect_untils(x, out),
        And(x, y) | Or(x, y) | Release(x, y) => {
            collect_untils(x, out);
            collect_untils(y, out);
        }
        Until(x, y) => {
            if !out.contains(f) {
                out.push(f.clone());
            }
            collect_untils(x, out);
            collect_untils(y, out);
        }
    }
}

fn expand(
    mut todo: Vec<Formula>,
    mut processed: BTreeSet<Formula>,
    mut cover: Cover,
    untils: &HashMap<Formula, usize>,
    out: &mut Vec<Cover>,
) {
    use Formula::*;
    while let Some(f) = todo.pop() {
        if !processed.insert(f.clone()) {
            continue;
        }
        match &f {
            True => {}
            False => return,
            Atom(i) => {
                cover.pos |= 1 << i;
                if cover.neg & cover.pos != 0 {
                    return;
                }
            }
            Not(x) => match **x {
                Atom(i) => {
                    cover.neg |= 1 << i;
                    if cover.neg & cover.pos != 0 {
                        return;
                    }
                }
                _ => unreachable!("formula is not in negation normal form"),
            },
            And(x, y) => {
                todo.push((**x).clone());
                todo.push((**y).clone());
            }
            Or(x, y) => {
                let mut left = todo.clone();
                left.push((**x).clone());
                expand(left, processed.clone(), cover.clone(), untils, out);
                todo.push((**y).clone());
            }
            Next(x) => {
                cover.next.insert((**x).clone());
            }
            Until(x, y) => {
                let mut now = todo.clone();
                now.push((**y).clone());
                expand(now, processed.clone(), cover.clone(), untils, out);
                todo.push((**x).clone());
                cover.next.insert(f.clone());
                cover.pending |= 1 << untils[&f];
            }
            Release(x, y) => {
                let mut now = todo.clone();
                now.push((**x).clone());
                now.push((**y).clone());
                expand(now, processed.clone(), cover.clone(), untils, out);
                todo.push((**y).clone());
                cover.next.insert(f.clone());
            }
            Always(_) | Eventually(_) => unreachable!("formula is not in negation normal form"),
        }
    }
    out.push(cover);
}

type Node = Vec<Formula>;

/// Builds a Büchi automaton accepting exactly the words satisfying `f`.
/// Non-NNF input is normalized first.
pub fn ltl_to_nba(f: &Ltl, limits: &Limits) -> Result<Nba> {
    let root = if f.root.is_nnf() {
        f.root.clone()
    } else {
        f.root.to_nnf()
    };
    let num_letters = f.num_letters();
    let mut until_list = Vec::new();
    collect_untils(&root, &mut until_list);
    if until_list.len() > 63 {
        return Err(Error::AutomatonTooLarge {
            what: "until-obligation count",
            cap: 63,
        });
    }
    let k = until_list.len();
    let untils: HashMap<Formula, usize> = until_list
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, u)| (u, i))
        .collect();
    let all_acc: u64 = if k == 0 { 0 } else { (1u64 << k) - 1 };

    // Generalized edges per tableau node: (letter, successor node, accepting mask).
    let mut node_ids: HashMap<Node, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_edges: Vec<Option<Vec<(usize, usize, u64)>>> = Vec::new();
    let mut intern = |n: Node, nodes: &mut Vec<Node>, edges: &mut Vec<Option<_>>| -> usize {
        *node_ids.entry(n.clone()).or_insert_with(|| {
            nodes.push(n);
            edges.push(None);
            nodes.len() - 1
        })
    };
    let init_node = intern(vec![root], &mut nodes, &mut node_edges);

    // Degeneralized states (node, counter).
    let mut state_ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut states: Vec<(usize, usize)> = Vec::new();
    let mut trans: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut queue = VecDeque::new();
    state_ids.insert((init_node, 0), 0);
    states.push((init_node, 0));
    trans.push(vec![Vec::new(); num_letters]);
    queue.push_back(0usize);

    while let Some(sid) = queue.pop_front() {
        let (node, counter) = states[sid];
        if node_edges[node].is_none() {
            let mut covers = Vec::new();
            expand(
                nodes[node].clone(),
                BTreeSet::new(),
                Cover::default(),
                &untils,
                &mut covers,
            );
            let mut edges = Vec::new();
            for c in covers {
                let succ = intern(c.next.into_iter().collect(), &mut nodes, &mut node_edges);
                let acc = all_acc & !c.pending;
                for l in 0..num_letters as u32 {
                    if l & c.pos == c.pos && l & c.neg == 0 {
                        edges.push((l as usize, succ, acc));
                    }
                }
            }
            edges.sort_unstable();
            edges.dedup();
            node_edges[node] = Some(edges);
        }
        let edges = node_edges[node].clone().unwrap();
        for (letter, succ, acc) in edges {
            let mut j = if counter == k { 0 } else { counter };
            while j < k && acc >> j & 1 == 1 {
                j += 1;
            }
            let key = (succ, j);
            let tid = match state_ids.get(&key) {
                Some(&t) => t,
                None => {
                    if states.len() >= limits.nba_states {
                        return Err(Error::AutomatonTooLarge {
                            what: "Büchi automaton",
                            cap: limits.nba_states,
                        });
                    }
                    let t = states.len();
                    state_ids.insert(key, t);
                    states.push(key);
                    trans.push(vec![Vec::new(); num_letters]);
                    queue.push_back(t);
                    t
                }
            };
            trans[sid][letter].push(tid);
        }
    }
    for row in &mut trans {
        for succ in row.iter_mut() {
            succ.sort_unstable();
            succ.dedup();
        }
    }
    let accepting: Vec<bool> = states.iter().map(|&(_, c)| c == k).collect();
    let names: Vec<String> = states
        .iter()
        .map(|&(n, c)| {
            let parts: Vec<String> = nodes[n]
                .iter()
                .map(|g| Ltl::new(f.alphabet.clone(), g.clone()).to_string())
                .collect();
            format!("{{{}}}#{c}", parts.join(", "))
        })
        .collect();
    Ok(Nba {
        num_letters,
        trans,
        initial: vec![0],
        accepting,
        names,
    }
    .trimmed())
}

impl Nba {
    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.trans
            .iter()
            .map(|row| {
                let mut v: Vec<usize> = row.iter().flatten().copied().collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }

    /// States lying on a cycle through an accepting state.
    fn accepting_cycle_states(&self) -> Vec<bool> {
        let adj = self.adjacency();
        let mut on = vec![false; adj.len()];
        for comp in graph::sccs(&adj, &vec![true; adj.len()]) {
            if graph::is_nontrivial(&comp, &adj) && comp.iter().any(|&s| self.accepting[s]) {
                for s in comp {
                    on[s] = true;
                }
            }
        }
        on
    }

    /// Drops states that are unreachable or cannot reach an accepting cycle.
    fn trimmed(self) -> Nba {
        let adj = self.adjacency();
        let reach = graph::forward_reach(&adj, &self.initial);
        let live = graph::backward_reach(&adj, &self.accepting_cycle_states());
        let keep: Vec<bool> = (0..adj.len()).map(|s| reach[s] && live[s]).collect();
        let mut remap = vec![usize::MAX; adj.len()];
        let mut next = 0;
        for s in 0..adj.len() {
            if keep[s] {
                remap[s] = next;
                next += 1;
            }
        }
        if next == 0 {
            return Nba {
                num_letters: self.num_letters,
                trans: vec![vec![Vec::new(); self.num_letters]],
                initial: vec![0],
                accepting: vec![false],
                names: vec!["{false}".into()],
            };
        }
        let mut trans = Vec::with_capacity(next);
        let mut accepting = Vec::with_capacity(next);
        let mut names = Vec::with_capacity(next);
        for s in 0..adj.len() {
            if !keep[s] {
                continue;
            }
            trans.push(
                self.trans[s]
                    .iter()
                    .map(|succ| {
                        succ.iter()
                            .filter(|&&t| keep[t])
                            .map(|&t| remap[t])
                            .collect()
                    })
                    .collect(),
            );
            accepting.push(self.accepting[s]);
            names.push(self.names[s].clone());
        }
        let initial = self
            .initial
            .iter()
            .filter(|&&s| keep[s])
            .map(|&s| remap[s])
            .collect();
        Nba {
            num_letters: self.num_letters,
            trans,
            initial,
            accepting,
            names,
        }
    }

    /// Whether the accepted language is empty.
    pub fn is_empty(&self) -> bool {
        !self.accepting.iter().any(|&a| a)
    }

    /// Lasso membership by search in the product of the automaton with the
    /// lasso's position graph.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let (u, v) = (w.prefix().len(), w.cycle().len());
        let len = u + v;
        let n = self.num_states();
        let id = |q: usize, pos: usize| q * len + pos;
        let step = |pos: usize| if pos + 1 < len { pos + 1 } else { u };
        let mut adj = vec![Vec::new(); n * len];
        for q in 0..n {
            for pos in 0..len {
                let l: Letter = w.at(pos);
                let np = step(pos);
                for &t in &self.trans[q][l.index()] {
                    adj[id(q, pos)].push(id(t, np));
                }
            }
        }
        let starts: Vec<usize> = self.initial.iter().map(|&q| id(q, 0)).collect();
        let reach = graph::forward_reach(&adj, &starts);
        graph::sccs(&adj, &reach).iter().any(|comp| {
            graph::is_nontrivial(comp, &adj) && comp.iter().any(|&x| self.accepting[x / len])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse, Alphabet};

    fn nba(text: &str) -> Nba {
        let al = Alphabet::new(["a"]).unwrap();
        ltl_to_nba(&parse(text, &al).unwrap().to_nnf(), &Limits::default()).unwrap()
    }

    #[test]
    fn eventually_has_two_states() {
        let n = nba("F a");
        assert_eq!(n.num_states(), 2);
        let pending = n.initial[0];
        let sink = 1 - pending;
        assert!(!n.accepting[pending] && n.accepting[sink]);
        assert_eq!(n.trans[pending][0], vec![pending]);
        assert_eq!(n.trans[pending][1], vec![0, 1]);
        assert_eq!(n.trans[sink][0], vec![sink]);
        assert_eq!(n.trans[sink][1], vec![sink]);
    }

    #[test]
    fn always_is_single_accepting_loop() {
        let n = nba("G a");
        assert_eq!(n.num_states(), 1);
        assert!(n.accepting[0]);
        assert!(n.trans[0][0].is_empty());
        assert_eq!(n.trans[0][1], vec![0]);
    }

    #[test]
    fn contradiction_is_empty() {
        assert!(nba("a & !a").is_empty());
        assert!(nba("G a & F !a").is_empty());
        assert!(!nba("G F a").is_empty());
    }

    #[test]
    fn state_cap_is_enforced() {
        let al = Alphabet::new(["a", "b"]).unwrap();
        let f = parse("G F a & G F b & F G (a | b)", &al).unwrap();
        let tiny = Limits {
            nba_states: 2,
            ..Limits::default()
        };
        assert!(matches!(
            ltl_to_nba(&f, &tiny),
            Err(Error::AutomatonTooLarge { .. })
        ));
    }
}
