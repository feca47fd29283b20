//! Finite MDPs, state labelings, finite-memory policies and the Markov
//! chains they induce.

mod io;

pub use io::{
    load_model, load_policy, model_to_json, policy_to_json, ModelFile, PolicyFile, TransitionRow,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::ltl::{Alphabet, Letter};

/// Row-sum tolerance for constructed distributions.
pub const ROW_TOLERANCE: f64 = 1e-12;

fn check_row(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidModel(format!("{what}: negative or non-finite probability")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(Error::InvalidModel(format!("{what}: row sums to {sum}")));
    }
    Ok(())
}

/// A finite MDP with total, explicitly listed transition distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
    pub initial: usize,
    /// `trans[s * num_actions + a]` lists `(next, probability)`.
    trans: Vec<Vec<(usize, f64)>>,
}

impl Mdp {
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        initial: usize,
        trans: Vec<Vec<(usize, f64)>>,
    ) -> Result<Mdp> {
        let (n, na) = (state_names.len(), action_names.len());
        if n == 0 || na == 0 {
            return Err(Error::InvalidModel("no states or no actions".into()));
        }
        if initial >= n {
            return Err(Error::InvalidModel("initial state out of range".into()));
        }
        if trans.len() != n * na {
            return Err(Error::InvalidModel("transition table is not total".into()));
        }
        for (i, row) in trans.iter().enumerate() {
            let what = format!("state {} action {}", state_names[i / na], action_names[i % na]);
            if row.iter().any(|&(t, _)| t >= n) {
                return Err(Error::InvalidModel(format!("{what}: successor out of range")));
            }
            let probs: Vec<f64> = row.iter().map(|&(_, p)| p).collect();
            check_row(&probs, &what)?;
        }
        Ok(Mdp {
            state_names,
            action_names,
            initial,
            trans,
        })
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn dist(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.trans[s * self.num_actions() + a]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_names.iter().position(|n| n == name)
    }

    /// Same model with the listed action columns permuted: action `a` of the
    /// result behaves like action `perm[a]` of `self`.
    pub fn permute_actions(&self, perm: &[usize]) -> Mdp {
        let na = self.num_actions();
        let trans = (0..self.num_states())
            .flat_map(|s| perm.iter().map(move |&a| (s, a)))
            .map(|(s, a)| self.trans[s * na + a].clone())
            .collect();
        Mdp {
            trans,
            ..self.clone()
        }
    }
}

/// Letter of every MDP state over a fixed alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub alphabet: Alphabet,
    pub letters: Vec<Letter>,
}

impl Labeling {
    pub fn new(alphabet: Alphabet, letters: Vec<Letter>) -> Result<Labeling> {
        let max = alphabet.num_letters() as u32;
        if letters.iter().any(|l| l.bits() >= max) {
            return Err(Error::AlphabetMismatch("letter outside the alphabet".into()));
        }
        Ok(Labeling { alphabet, letters })
    }

    pub fn label(&self, s: usize) -> Letter {
        self.letters[s]
    }

    /// Same labeling over `target`, matching atoms by name. Atoms missing
    /// from `self` are false everywhere.
    pub fn reindex(&self, target: &Alphabet) -> Labeling {
        let map: Vec<Option<usize>> = self
            .alphabet
            .names()
            .iter()
            .map(|n| target.index_of(n))
            .collect();
        let letters = self
            .letters
            .iter()
            .map(|l| {
                let bits = map
                    .iter()
                    .enumerate()
                    .filter(|(i, t)| l.contains(*i) && t.is_some())
                    .fold(0u32, |acc, (_, t)| acc | 1 << t.unwrap());
                Letter(bits)
            })
            .collect();
        Labeling {
            alphabet: target.clone(),
            letters,
        }
    }
}

/// For every letter over `from`, the letter over `to` with the same atoms
/// set (atoms absent from `from` are false).
pub fn translate_letters(from: &Alphabet, to: &Alphabet) -> Vec<Letter> {
    let all = Labeling {
        alphabet: from.clone(),
        letters: from.letters().collect(),
    };
    all.reindex(to).letters
}

/// Deterministic letter transducer used as policy memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    pub num_letters: usize,
    /// `update[m * num_letters + letter]`.
    pub update: Vec<usize>,
    pub initial: usize,
}

impl Memory {
    pub fn new(num_letters: usize, update: Vec<usize>, initial: usize) -> Result<Memory> {
        let n = update.len() / num_letters.max(1);
        if num_letters == 0 || update.len() != n * num_letters || n == 0 {
            return Err(Error::InvalidPolicy("memory update table is not total".into()));
        }
        if initial >= n || update.iter().any(|&m| m >= n) {
            return Err(Error::InvalidPolicy("memory state out of range".into()));
        }
        Ok(Memory {
            num_letters,
            update,
            initial,
        })
    }

    /// Single-state memory.
    pub fn trivial(num_letters: usize) -> Memory {
        Memory {
            num_letters,
            update: vec![0; num_letters],
            initial: 0,
        }
    }

    pub fn num_states(&self) -> usize {
        self.update.len() / self.num_letters
    }

    pub fn next(&self, m: usize, l: Letter) -> usize {
        self.update[m * self.num_letters + l.index()]
    }
}

/// Policy with automaton memory: the memory reads the label of each state
/// as it is left, and `(state, memory)` selects an action distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMemoryPolicy {
    pub memory: Memory,
    pub num_states: usize,
    pub num_actions: usize,
    /// `decision[(s * |M| + m) * num_actions + a]`.
    decision: Vec<f64>,
}

impl FiniteMemoryPolicy {
    pub fn new(
        memory: Memory,
        num_states: usize,
        num_actions: usize,
        decision: Vec<f64>,
    ) -> Result<Self> {
        if decision.len() != num_states * memory.num_states() * num_actions {
            return Err(Error::InvalidPolicy("decision table has the wrong size".into()));
        }
        for row in decision.chunks(num_actions) {
            check_row(row, "policy").map_err(|e| Error::InvalidPolicy(e.to_string()))?;
        }
        Ok(FiniteMemoryPolicy {
            memory,
            num_states,
            num_actions,
            decision,
        })
    }

    /// Memoryless policy from one action distribution per state.
    pub fn memoryless(num_letters: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let na = rows.first().map_or(0, |r| r.len());
        FiniteMemoryPolicy::new(Memory::trivial(num_letters), rows.len(), na, rows.concat())
    }

    /// Memoryless policy that always plays `action`.
    pub fn constant(num_letters: usize, num_states: usize, num_actions: usize, action: usize) -> Self {
        let mut row = vec![0.0; num_actions];
        row[action] = 1.0;
        FiniteMemoryPolicy::memoryless(num_letters, &vec![row; num_states]).expect("valid row")
    }

    pub fn uniform(num_letters: usize, num_states: usize, num_actions: usize) -> Self {
        let row = vec![1.0 / num_actions as f64; num_actions];
        FiniteMemoryPolicy::memoryless(num_letters, &vec![row; num_states]).expect("valid row")
    }

    pub fn action_dist(&self, s: usize, m: usize) -> &[f64] {
        let i = (s * self.memory.num_states() + m) * self.num_actions;
        &self.decision[i..i + self.num_actions]
    }

    /// Inverse-CDF draw from the action distribution.
    pub fn sample_action<R: Rng + ?Sized>(&self, s: usize, m: usize, rng: &mut R) -> usize {
        let dist = self.action_dist(s, m);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, &p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    fn check_against(&self, mdp: &Mdp, lab: &Labeling) -> Result<()> {
        if self.memory.num_letters != lab.alphabet.num_letters() {
            return Err(Error::AlphabetMismatch(format!(
                "policy memory reads {} letters, labeling produces {}",
                self.memory.num_letters,
                lab.alphabet.num_letters()
            )));
        }
        if self.num_states != mdp.num_states() || self.num_actions != mdp.num_actions() {
            return Err(Error::InvalidPolicy("policy does not match the model's size".into()));
        }
        if lab.letters.len() != mdp.num_states() {
            return Err(Error::AlphabetMismatch("labeling does not cover every state".into()));
        }
        Ok(())
    }
}

/// Finite Markov chain. Induced chains index `(s, m)` as `s * memory_size + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc {
    pub trans: Vec<Vec<(usize, f64)>>,
    pub initial: usize,
    pub memory_size: usize,
}

impl Dtmc {
    pub fn num_states(&self) -> usize {
        self.trans.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionSample {
    pub state: usize,
    pub action: usize,
    pub next: usize,
}

/// Inverse-CDF draw of a successor of `(s, a)` in stored order.
pub fn sample_step<R: Rng + ?Sized>(mdp: &Mdp, s: usize, a: usize, rng: &mut R) -> Result<usize> {
    if s >= mdp.num_states() || a >= mdp.num_actions() {
        return Err(Error::UnknownStateOrAction);
    }
    let dist = mdp.dist(s, a);
    if let [(t, _)] = dist {
        return Ok(*t);
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(t, p) in dist {
        acc += p;
        if u < acc {
            return Ok(t);
        }
    }
    Ok(dist.iter().rev().find(|(_, p)| *p > 0.0).map_or(dist[0].0, |&(t, _)| t))
}

/// Markov chain of `pol` on `mdp` over all `(s, m)` pairs.
pub fn induce_dtmc(mdp: &Mdp, pol: &FiniteMemoryPolicy, lab: &Labeling) -> Result<Dtmc> {
    pol.check_against(mdp, lab)?;
    let k = pol.memory.num_states();
    let mut trans = Vec::with_capacity(mdp.num_states() * k);
    for s in 0..mdp.num_states() {
        for m in 0..k {
            let m2 = pol.memory.next(m, lab.label(s));
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (a, &pa) in pol.action_dist(s, m).iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                for &(t, p) in mdp.dist(s, a) {
                    let idx = t * k + m2;
                    match row.iter_mut().find(|(j, _)| *j == idx) {
                        Some(e) => e.1 += pa * p,
                        None => row.push((idx, pa * p)),
                    }
                }
            }
            row.sort_by_key(|&(j, _)| j);
            trans.push(row);
        }
    }
    Ok(Dtmc {
        trans,
        initial: mdp.initial * k + pol.memory.initial,
        memory_size: k,
    })
}

/// Rollout of `steps` transitions from the initial state.
pub fn simulate_episode<R: Rng + ?Sized>(
    mdp: &Mdp,
    pol: &FiniteMemoryPolicy,
    lab: &Labeling,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<TransitionSample>> {
    pol.check_against(mdp, lab)?;
    let (mut s, mut m) = (mdp.initial, pol.memory.initial);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let a = pol.sample_action(s, m, rng);
        let next = sample_step(mdp, s, a, rng)?;
        out.push(TransitionSample {
            state: s,
            action: a,
            next,
        });
        m = pol.memory.next(m, lab.label(s));
        s = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain() -> (Mdp, Labeling) {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let mdp = Mdp::new(
            names(&["x", "y", "z"]),
            names(&["go"]),
            0,
            vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(2, 1.0)]],
        )
        .unwrap();
        let al = Alphabet::new(["z"]).unwrap();
        let lab = Labeling::new(al, vec![Letter(0), Letter(0), Letter(1)]).unwrap();
        (mdp, lab)
    }

    #[test]
    fn rows_must_sum_to_one() {
        let r = Mdp::new(vec!["s".into()], vec!["a".into()], 0, vec![vec![(0, 0.9)]]);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn deterministic_step_ignores_rng() {
        let (mdp, _) = chain();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(sample_step(&mdp, 0, 0, &mut rng).unwrap(), 1);
        }
        assert_eq!(sample_step(&mdp, 0, 1, &mut rng), Err(Error::UnknownStateOrAction));
    }

    #[test]
    fn episode_follows_the_chain() {
        let (mdp, lab) = chain();
        let pol = FiniteMemoryPolicy::constant(2, 3, 1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_episode(&mdp, &pol, &lab, 0, &mut rng).unwrap().is_empty());
        let trace = simulate_episode(&mdp, &pol, &lab, 3, &mut rng).unwrap();
        let next: Vec<usize> = trace.iter().map(|t| t.next).collect();
        assert_eq!(next, vec![1, 2, 2]);
    }

    #[test]
    fn induced_chain_uses_departing_label() {
        let (mdp, lab) = chain();
        // Memory flips to 1 once a `z` state is left.
        let memory = Memory::new(2, vec![0, 1, 1, 1], 0).unwrap();
        let pol = FiniteMemoryPolicy::new(memory, 3, 1, vec![1.0; 6]).unwrap();
        let d = induce_dtmc(&mdp, &pol, &lab).unwrap();
        assert_eq!(d.num_states(), 6);
        assert_eq!(d.trans[0], vec![(2, 1.0)]);
        assert_eq!(d.trans[2 * 2], vec![(2 * 2 + 1, 1.0)]);
        let bad = FiniteMemoryPolicy::constant(4, 3, 1, 0);
        assert!(matches!(induce_dtmc(&mdp, &bad, &lab), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn reindex_matches_names() {
        let al = Alphabet::new(["p", "q"]).unwrap();
        let lab = Labeling::new(al, vec![Letter(0b01), Letter(0b10), Letter(0b11)]).unwrap();
        let target = Alphabet::new(["q", "r"]).unwrap();
        let re = lab.reindex(&target);
        assert_eq!(re.letters, vec![Letter(0), Letter(0b01), Letter(0b01)]);
    }
}
