//! Reward schemes: products of an MDP with a single-pair Rabin automaton,
//! annotated with per-transition rewards and discounts.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::automata::{ltl_to_dra, Dra, Limits};
use crate::error::{Error, Result};
use crate::ltl::Ltl;
use crate::mdp::{translate_letters, FiniteMemoryPolicy, Labeling, Mdp, Memory, ModelFile, TransitionRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    RewardOnAcc,
    MultiDiscount,
    ZetaReach,
    ZetaAcc,
    ZetaDiscount,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::RewardOnAcc,
        Scheme::MultiDiscount,
        Scheme::ZetaReach,
        Scheme::ZetaAcc,
        Scheme::ZetaDiscount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RewardOnAcc => "reward-on-acc",
            Scheme::MultiDiscount => "multi-discount",
            Scheme::ZetaReach => "zeta-reach",
            Scheme::ZetaAcc => "zeta-acc",
            Scheme::ZetaDiscount => "zeta-discount",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub gamma: f64,
    pub gamma_b: f64,
    pub zeta: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            gamma: 0.99,
            gamma_b: 0.999,
            zeta: 0.99,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(self.gamma) || !open(self.zeta) || !(self.gamma_b > self.gamma && self.gamma_b < 1.0) {
            return Err(Error::InvalidConfig(format!("scheme parameters out of range: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub next: usize,
    pub prob: f64,
    pub reward: f64,
    pub discount: f64,
}

/// Product MDP with rewards. Sink states map to `None` in `back`.
#[derive(Debug, Clone)]
pub struct ProductMdp {
    pub scheme: Scheme,
    pub num_actions: usize,
    /// `trans[x * num_actions + a]`.
    pub trans: Vec<Vec<Edge>>,
    pub initial: usize,
    pub episodic: bool,
    /// Environment and automaton state of each product state.
    pub back: Vec<Option<(usize, usize)>>,
    pub dra: Dra,
    num_env_states: usize,
    memory: Memory,
    names: Vec<String>,
    env_labels: Vec<Option<usize>>,
    labeling: Labeling,
    action_names: Vec<String>,
}

impl ProductMdp {
    pub fn num_states(&self) -> usize {
        self.back.len()
    }

    pub fn edges(&self, x: usize, a: usize) -> &[Edge] {
        &self.trans[x * self.num_actions + a]
    }

    pub fn is_sink(&self, x: usize) -> bool {
        self.back[x].is_none()
    }

    /// Inverse-CDF draw of one edge of `(x, a)`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, a: usize, rng: &mut R) -> Edge {
        let edges = self.edges(x, a);
        if let [e] = edges {
            return *e;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for e in edges {
            acc += e.prob;
            if u < acc {
                return *e;
            }
        }
        *edges.iter().rev().find(|e| e.prob > 0.0).unwrap_or(&edges[0])
    }

    /// Reads a product strategy back as a policy on the environment with
    /// the automaton as memory. Pairs never reached play action 0.
    pub fn to_policy(&self, rows: &[Vec<f64>]) -> FiniteMemoryPolicy {
        let k = self.memory.num_states();
        let na = self.num_actions;
        let mut decision = vec![0.0; self.num_env_states * k * na];
        for s in 0..self.num_env_states {
            for q in 0..k {
                decision[(s * k + q) * na] = 1.0;
            }
        }
        for (x, b) in self.back.iter().enumerate() {
            if let Some((s, q)) = *b {
                decision[(s * k + q) * na..(s * k + q + 1) * na].copy_from_slice(&rows[x]);
            }
        }
        FiniteMemoryPolicy::new(self.memory.clone(), self.num_env_states, na, decision)
            .expect("product rows are distributions")
    }

    /// Model file with `reward` and `discount` on every transition.
    pub fn to_model_file(&self) -> ModelFile {
        let mut transitions = Vec::new();
        for x in 0..self.num_states() {
            for a in 0..self.num_actions {
                for e in self.edges(x, a) {
                    transitions.push(TransitionRow {
                        src: self.names[x].clone(),
                        action: self.action_names[a].clone(),
                        dst: self.names[e.next].clone(),
                        prob: e.prob,
                        reward: Some(e.reward),
                        discount: Some(e.discount),
                    });
                }
            }
        }
        let labels = (0..self.num_states())
            .filter_map(|x| {
                let s = self.env_labels[x]?;
                let atoms = self.labeling.alphabet.letter_atoms(self.labeling.label(s));
                (!atoms.is_empty())
                    .then(|| (self.names[x].clone(), atoms.into_iter().map(String::from).collect()))
            })
            .collect();
        ModelFile {
            atoms: Some(self.labeling.alphabet.names().to_vec()),
            states: self.names.clone(),
            actions: self.action_names.clone(),
            initial: self.names[self.initial].clone(),
            transitions,
            labels,
        }
    }
}

/// Builds the product for `scheme`. A transition is accepting when it
/// enters an automaton state in the pair's `inf` set and outside its `fin`
/// set.
pub fn build_product(
    scheme: Scheme,
    mdp: &Mdp,
    lab: &Labeling,
    f: &Ltl,
    params: &SchemeParams,
) -> Result<ProductMdp> {
    params.validate()?;
    let dra = ltl_to_dra(f, &Limits::default())?;
    if dra.pairs.len() != 1 {
        return Err(Error::MultiplePairsUnsupported(dra.pairs.len()));
    }
    let pair = dra.pairs[0].clone();
    let flab = lab.reindex(&f.alphabet);
    let na = mdp.num_actions();
    let start = (mdp.initial, dra.initial);
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([(start, 0)]);
    let mut pairs = vec![start];
    let mut raw: Vec<Vec<Vec<(usize, f64, bool)>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let (s, q) = pairs[x];
        let q2 = dra.next(q, flab.label(s));
        let accepting = pair.inf[q2] && !pair.fin[q2];
        let mut rows = Vec::with_capacity(na);
        for a in 0..na {
            let row = mdp
                .dist(s, a)
                .iter()
                .map(|&(t, p)| {
                    let len = pairs.len();
                    let id = *index.entry((t, q2)).or_insert(len);
                    if id == len {
                        pairs.push((t, q2));
                        queue.push_back(id);
                    }
                    (id, p, accepting)
                })
                .collect();
            rows.push(row);
        }
        raw.push(rows);
    }
    let n = pairs.len();
    let sink = n;
    let has_sink = matches!(scheme, Scheme::ZetaReach | Scheme::ZetaAcc);
    let SchemeParams { gamma, gamma_b, zeta } = *params;
    let mut trans = Vec::with_capacity((n + 1) * na);
    for rows in raw {
        for row in rows {
            let mut out = Vec::new();
            for (y, p, acc) in row {
                let edge = |next, prob, reward, discount| Edge {
                    next,
                    prob,
                    reward,
                    discount,
                };
                match (scheme, acc) {
                    (Scheme::RewardOnAcc, _) => out.push(edge(y, p, if acc { 1.0 } else { 0.0 }, gamma)),
                    (Scheme::MultiDiscount, true) => out.push(edge(y, p, 1.0 - gamma_b, gamma_b)),
                    (Scheme::MultiDiscount, false) => out.push(edge(y, p, 0.0, gamma)),
                    (Scheme::ZetaReach, true) => {
                        out.push(edge(y, p * zeta, 0.0, 1.0));
                        out.push(edge(sink, p * (1.0 - zeta), 1.0, 1.0));
                    }
                    (Scheme::ZetaAcc, true) => {
                        out.push(edge(y, p * zeta, 1.0 - zeta, 1.0));
                        out.push(edge(sink, p * (1.0 - zeta), 1.0 - zeta, 1.0));
                    }
                    (Scheme::ZetaDiscount, true) => out.push(edge(y, p, 1.0 - zeta, zeta)),
                    (_, false) => out.push(edge(y, p, 0.0, 1.0)),
                }
            }
            trans.push(out);
        }
    }
    let mut back: Vec<Option<(usize, usize)>> = pairs.iter().map(|&b| Some(b)).collect();
    let mut names: Vec<String> = pairs
        .iter()
        .map(|&(s, q)| format!("{}|{q}", mdp.state_names[s]))
        .collect();
    let mut env_labels: Vec<Option<usize>> = pairs.iter().map(|&(s, _)| Some(s)).collect();
    if has_sink {
        for _ in 0..na {
            trans.push(vec![Edge {
                next: sink,
                prob: 1.0,
                reward: 0.0,
                discount: 1.0,
            }]);
        }
        back.push(None);
        names.push(if scheme == Scheme::ZetaReach { "goal-sink" } else { "stop-sink" }.into());
        env_labels.push(None);
    }
    let translated = translate_letters(&lab.alphabet, &f.alphabet);
    let update = (0..dra.num_states())
        .flat_map(|q| translated.iter().map(move |&l| (q, l)))
        .map(|(q, l)| dra.next(q, l))
        .collect();
    let memory = Memory::new(lab.alphabet.num_letters(), update, dra.initial)?;
    Ok(ProductMdp {
        scheme,
        num_actions: na,
        trans,
        initial: 0,
        episodic: has_sink,
        back,
        dra,
        num_env_states: mdp.num_states(),
        memory,
        names,
        env_labels,
        labeling: lab.clone(),
        action_names: mdp.action_names.clone(),
    })
}

/// Optimal discounted values of the product by Gauss-Seidel value iteration.
pub fn solve_product(prod: &ProductMdp, tolerance: f64) -> Vec<f64> {
    let n = prod.num_states();
    let mut v = vec![0.0; n];
    loop {
        let mut delta: f64 = 0.0;
        for x in 0..n {
            let best = (0..prod.num_actions)
                .map(|a| q_value(prod, x, a, &v))
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[x]).abs());
            v[x] = best;
        }
        if delta < tolerance {
            return v;
        }
    }
}

pub fn q_value(prod: &ProductMdp, x: usize, a: usize, v: &[f64]) -> f64 {
    prod.edges(x, a)
        .iter()
        .map(|e| e.prob * (e.reward + e.discount * v[e.next]))
        .sum()
}

/// Deterministic greedy rows for `v`, ties to the lowest action id.
pub fn greedy_rows(prod: &ProductMdp, v: &[f64]) -> Vec<Vec<f64>> {
    (0..prod.num_states())
        .map(|x| {
            let q: Vec<f64> = (0..prod.num_actions).map(|a| q_value(prod, x, a, v)).collect();
            let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let a = q.iter().position(|&y| y == best).unwrap_or(0);
            let mut row = vec![0.0; prod.num_actions];
            row[a] = 1.0;
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::simple_pair;
    use crate::probcheck::{optimal_value, policy_value};

    fn product(scheme: Scheme, p: f64) -> (ProductMdp, crate::family::CounterexamplePair) {
        let pair = simple_pair(p).unwrap();
        let prod = build_product(scheme, &pair.m1, &pair.labeling, &pair.reach, &SchemeParams::default())
            .unwrap();
        (prod, pair)
    }

    #[test]
    fn multi_discount_annotations() {
        let (prod, _) = product(Scheme::MultiDiscount, 0.1);
        assert_eq!(prod.num_states(), 4);
        for x in 0..prod.num_states() {
            for a in 0..2 {
                for e in prod.edges(x, a) {
                    let acc = e.reward > 0.0;
                    assert!(!acc || ((e.reward - 0.001).abs() < 1e-15 && e.discount == 0.999));
                    assert!(acc || (e.reward == 0.0 && e.discount == 0.99));
                }
            }
        }
    }

    #[test]
    fn zeta_reach_has_one_goal_sink() {
        let (prod, _) = product(Scheme::ZetaReach, 0.1);
        assert_eq!(prod.back.iter().filter(|b| b.is_none()).count(), 1);
        let sink = prod.num_states() - 1;
        let entries = (0..sink)
            .flat_map(|x| (0..2).map(move |a| (x, a)))
            .filter(|&(x, a)| prod.edges(x, a).iter().any(|e| e.next == sink))
            .count();
        assert!(entries > 0);
        for x in 0..sink {
            for a in 0..2 {
                for e in prod.edges(x, a) {
                    assert_eq!(e.reward, if e.next == sink { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn reward_on_acc_marks_entries_into_the_accepting_region() {
        let (prod, _) = product(Scheme::RewardOnAcc, 0.5);
        let pair = &prod.dra.pairs[0];
        for x in 0..prod.num_states() {
            let (s, q) = prod.back[x].unwrap();
            let next_q = prod.dra.next(q, prod.labeling.label(s));
            for a in 0..2 {
                for e in prod.edges(x, a) {
                    let acc = pair.inf[next_q] && !pair.fin[next_q];
                    assert_eq!(e.reward, if acc { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn greedy_optimum_reads_back_to_optimal_policy() {
        for scheme in Scheme::ALL {
            for p in [0.5, 0.1] {
                let (prod, pair) = product(scheme, p);
                let v = solve_product(&prod, 1e-10);
                let pol = prod.to_policy(&greedy_rows(&prod, &v));
                let got = policy_value(&pair.m1, &pair.labeling, &pair.reach, &pol).unwrap().value;
                let best = optimal_value(&pair.m1, &pair.labeling, &pair.reach).unwrap().value;
                assert!((got - best).abs() <= 1e-6, "{scheme} p={p}: {got} vs {best}");
            }
        }
    }

    #[test]
    fn multiple_pairs_rejected() {
        let pair = simple_pair(0.5).unwrap();
        let al = pair.labeling.alphabet.clone();
        let f = crate::ltl::parse("F G h | G F !h", &al).unwrap();
        match build_product(Scheme::RewardOnAcc, &pair.m1, &pair.labeling, &f, &SchemeParams::default()) {
            Err(Error::MultiplePairsUnsupported(k)) => assert!(k > 1),
            Ok(p) => assert_eq!(p.dra.pairs.len(), 1),
            Err(e) => panic!("{e}"),
        }
    }
}
