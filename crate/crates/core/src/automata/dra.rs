//! Safra determinization of Büchi automata into Rabin automata.

use std::collections::{HashMap, VecDeque};

use super::bits::StateSet;
use super::nba::Nba;
use super::Limits;
use crate::error::{Error, Result};
use crate::ltl::{LassoWord, Letter};

/// One Rabin pair: visit `fin` finitely often and `inf` infinitely often.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RabinPair {
    pub fin: Vec<bool>,
    pub inf: Vec<bool>,
}

impl RabinPair {
    /// Whether a cycle visiting exactly `states` satisfies this pair.
    pub fn accepts_set(&self, states: impl IntoIterator<Item = usize> + Clone) -> bool {
        states.clone().into_iter().all(|s| !self.fin[s]) && states.into_iter().any(|s| self.inf[s])
    }
}

/// Deterministic Rabin automaton with a total transition function.
#[derive(Debug, Clone)]
pub struct Dra {
    pub num_letters: usize,
    /// `trans[state * num_letters + letter]`.
    pub trans: Vec<usize>,
    pub initial: usize,
    pub pairs: Vec<RabinPair>,
    pub names: Vec<String>,
}

impl Dra {
    pub fn num_states(&self) -> usize {
        self.trans.len() / self.num_letters
    }

    pub fn next(&self, state: usize, l: Letter) -> usize {
        self.trans[state * self.num_letters + l.index()]
    }

    pub fn successors(&self, state: usize) -> &[usize] {
        &self.trans[state * self.num_letters..(state + 1) * self.num_letters]
    }

    /// Deduplicated successor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.num_states())
            .map(|s| {
                let mut v = self.successors(s).to_vec();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }

    /// Whether a cycle whose visited states are `states` is accepting.
    pub fn is_accepting_set(&self, states: &[usize]) -> bool {
        self.pairs.iter().any(|p| p.accepts_set(states.iter().copied()))
    }

    pub fn run(&self, word: &[Letter]) -> usize {
        word.iter().fold(self.initial, |s, &l| self.next(s, l))
    }

    /// Runs along `u` and then around `v` until a (state, offset) pair
    /// repeats, and checks the Rabin condition on the repeating states.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let mut state = self.run(w.prefix());
        let v = w.cycle();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut trace = Vec::new();
        let mut pos = 0;
        loop {
            if let Some(&start) = seen.get(&(state, pos)) {
                let mut cycle: Vec<usize> = trace[start..].to_vec();
                cycle.sort_unstable();
                cycle.dedup();
                return self.is_accepting_set(&cycle);
            }
            seen.insert((state, pos), trace.len());
            trace.push(state);
            state = self.next(state, v[pos]);
            pos = (pos + 1) % v.len();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SafraNode {
    name: u16,
    label: StateSet,
    marked: bool,
    children: Vec<SafraNode>,
}

impl SafraNode {
    fn names(&self, out: &mut Vec<u16>) {
        out.push(self.name);
        for c in &self.children {
            c.names(out);
        }
    }

    fn unmark(&mut self) {
        self.marked = false;
        for c in &mut self.children {
            c.unmark();
        }
    }

    fn spawn(&mut self, accepting: &StateSet, used: &mut Vec<u16>) {
        let existing = self.children.len();
        for c in &mut self.children[..existing] {
            c.spawn(accepting, used);
        }
        let acc = self.label.intersection(accepting);
        if !acc.is_empty() {
            let name = (1..).find(|n| !used.contains(n)).unwrap();
            used.push(name);
            self.children.push(SafraNode {
                name,
                label: acc,
                marked: false,
                children: Vec::new(),
            });
        }
    }

    fn apply(&mut self, nba: &Nba, letter: usize) {
        let mut next = StateSet::new(nba.num_states());
        for q in self.label.iter() {
            for &t in &nba.trans[q][letter] {
                next.insert(t);
            }
        }
        self.label = next;
        for c in &mut self.children {
            c.apply(nba, letter);
        }
    }

    fn remove_states(&mut self, states: &StateSet) {
        self.label.subtract(states);
        for c in &mut self.children {
            c.remove_states(states);
        }
    }

    fn horizontal_merge(&mut self) {
        if self.children.is_empty() {
            return;
        }
        let mut seen = self.label.empty_like();
        for c in &mut self.children {
            c.remove_states(&seen);
            seen.union_with(&c.label);
            c.horizontal_merge();
        }
    }

    fn prune_empty(&mut self) {
        self.children.retain(|c| !c.label.is_empty());
        for c in &mut self.children {
            c.prune_empty();
        }
    }

    fn vertical_merge(&mut self) {
        if self.children.is_empty() {
            return;
        }
        let mut union = self.label.empty_like();
        for c in &self.children {
            union.union_with(&c.label);
        }
        if union == self.label {
            self.children.clear();
            self.marked = true;
        } else {
            for c in &mut self.children {
                c.vertical_merge();
            }
        }
    }

    fn contains_name(&self, name: u16) -> Option<bool> {
        if self.name == name {
            return Some(self.marked);
        }
        self.children.iter().find_map(|c| c.contains_name(name))
    }

    fn describe(&self, out: &mut String) {
        out.push_str(&self.name.to_string());
        out.push('{');
        let parts: Vec<String> = self.label.iter().map(|q| q.to_string()).collect();
        out.push_str(&parts.join(","));
        out.push('}');
        if self.marked {
            out.push('!');
        }
        if !self.children.is_empty() {
            out.push('(');
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                c.describe(out);
            }
            out.push(')');
        }
    }
}

type Tree = Option<SafraNode>;

fn safra_step(tree: &Tree, nba: &Nba, accepting: &StateSet, letter: usize) -> Tree {
    let mut root = tree.clone()?;
    root.unmark();
    let mut used = Vec::new();
    root.names(&mut used);
    root.spawn(accepting, &mut used);
    root.apply(nba, letter);
    root.horizontal_merge();
    if root.label.is_empty() {
        return None;
    }
    root.prune_empty();
    root.vertical_merge();
    Some(root)
}

/// Determinizes `nba` with Safra trees. Pair `i` corresponds to node name
/// `i`: `fin` holds the trees without that name, `inf` the trees where it is
/// marked. Pairs whose `inf` set is empty are dropped, as are duplicates.
pub fn nba_to_dra(nba: &Nba, limits: &Limits) -> Result<Dra> {
    let n = nba.num_states();
    let num_letters = nba.num_letters;
    let mut accepting = StateSet::new(n);
    for (q, &a) in nba.accepting.iter().enumerate() {
        if a {
            accepting.insert(q);
        }
    }
    let mut init_label = StateSet::new(n);
    for &q in &nba.initial {
        init_label.insert(q);
    }
    let init: Tree = if nba.is_empty() {
        None
    } else {
        Some(SafraNode {
            name: 1,
            label: init_label,
            marked: false,
            children: Vec::new(),
        })
    };
    let mut ids: HashMap<Tree, usize> = HashMap::new();
    let mut trees: Vec<Tree> = vec![init.clone()];
    ids.insert(init, 0);
    let mut trans: Vec<usize> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let tree = trees[id].clone();
        if trans.len() < (id + 1) * num_letters {
            trans.resize((id + 1) * num_letters, usize::MAX);
        }
        for l in 0..num_letters {
            let succ = safra_step(&tree, nba, &accepting, l);
            let sid = match ids.get(&succ) {
                Some(&s) => s,
                None => {
                    if trees.len() >= limits.dra_states {
                        return Err(Error::AutomatonTooLarge {
                            what: "Rabin automaton",
                            cap: limits.dra_states,
                        });
                    }
                    let s = trees.len();
                    ids.insert(succ.clone(), s);
                    trees.push(succ);
                    queue.push_back(s);
                    s
                }
            };
            trans[id * num_letters + l] = sid;
        }
    }
    trans.resize(trees.len() * num_letters, usize::MAX);
    debug_assert!(trans.iter().all(|&t| t != usize::MAX));

    let max_name = trees
        .iter()
        .flatten()
        .map(|t| {
            let mut v = Vec::new();
            t.names(&mut v);
            v.into_iter().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let mut pairs: Vec<RabinPair> = Vec::new();
    for name in 1..=max_name {
        let status: Vec<Option<bool>> = trees
            .iter()
            .map(|t| t.as_ref().and_then(|t| t.contains_name(name)))
            .collect();
        let pair = RabinPair {
            fin: status.iter().map(|s| s.is_none()).collect(),
            inf: status.iter().map(|s| *s == Some(true)).collect(),
        };
        if pair.inf.iter().any(|&b| b) && !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    let names = trees
        .iter()
        .map(|t| match t {
            None => "<empty>".to_string(),
            Some(node) => {
                let mut s = String::new();
                node.describe(&mut s);
                s
            }
        })
        .collect();
    Ok(Dra {
        num_letters,
        trans,
        initial: 0,
        pairs,
        names,
    })
}
