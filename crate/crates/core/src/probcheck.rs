//! Exact satisfaction probabilities of LTL formulas on MDPs.
//!
//! Chains are solved by direct elimination over the states that can reach
//! an accepting bottom component. MDP optima combine accepting end
//! components with value iteration, then refine the extracted policy by
//! exact evaluation until it is stable.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::automata::{ltl_to_dra, Dra, Limits};
use crate::error::Result;
use crate::graph;
use crate::ltl::Ltl;
use crate::mdp::{induce_dtmc, translate_letters, FiniteMemoryPolicy, Labeling, Mdp, Memory};

/// Stopping threshold for value iteration.
pub const VI_TOLERANCE: f64 = 1e-10;
/// Actions within this distance of the best count as greedy ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueResult {
    pub value: f64,
    pub policy: Option<FiniteMemoryPolicy>,
}

type Chain = Vec<Vec<(usize, f64)>>;

fn support(rows: &Chain) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|r| r.iter().filter(|x| x.1 > 0.0).map(|x| x.0).collect())
        .collect()
}

/// Probability, from every chain state, of ending in a bottom component
/// that satisfies some Rabin pair. `dra_state[x]` is the automaton
/// component of chain state `x`.
fn accepting_reach(chain: &Chain, dra_state: &[usize], dra: &Dra) -> Vec<f64> {
    let n = chain.len();
    let adj = support(chain);
    let comps = graph::sccs(&adj, &vec![true; n]);
    let mut comp_of = vec![0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &x in comp {
            comp_of[x] = c;
        }
    }
    let mut good = vec![false; n];
    for (c, comp) in comps.iter().enumerate() {
        let bottom = comp.iter().all(|&x| adj[x].iter().all(|&y| comp_of[y] == c));
        let autos = comp.iter().map(|&x| dra_state[x]);
        if bottom && dra.pairs.iter().any(|p| p.accepts_set(autos.clone())) {
            for &x in comp {
                good[x] = true;
            }
        }
    }
    let can = graph::backward_reach(&adj, &good);
    let unknown: Vec<usize> = (0..n).filter(|&x| can[x] && !good[x]).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in unknown.iter().enumerate() {
        pos[x] = i;
    }
    let m = unknown.len();
    let mut values: Vec<f64> = good.iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
    if m == 0 {
        return values;
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (i, &x) in unknown.iter().enumerate() {
        for &(y, p) in &chain[x] {
            if good[y] {
                b[i] += p;
            } else if pos[y] != usize::MAX {
                a[(i, pos[y])] -= p;
            }
        }
    }
    let sol = a.lu().solve(&b).expect("every unknown state reaches the target");
    for (i, &x) in unknown.iter().enumerate() {
        values[x] = sol[i].clamp(0.0, 1.0);
    }
    values
}

/// Value of `pol` for `f`. The policy's memory reads `lab`'s letters; the
/// automaton reads them translated to `f`'s alphabet by atom name.
pub fn policy_value(
    mdp: &Mdp,
    lab: &Labeling,
    f: &Ltl,
    pol: &FiniteMemoryPolicy,
) -> Result<ValueResult> {
    let dtmc = induce_dtmc(mdp, pol, lab)?;
    let flab = lab.reindex(&f.alphabet);
    let dra = ltl_to_dra(f, &Limits::default())?;
    let k = dtmc.memory_size;
    let start = (dtmc.initial, dra.initial);
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([(start, 0)]);
    let mut states = vec![start];
    let mut chain: Chain = Vec::new();
    let mut head = 0;
    while head < states.len() {
        let (i, q) = states[head];
        head += 1;
        let q2 = dra.next(q, flab.label(i / k));
        let row = dtmc.trans[i]
            .iter()
            .map(|&(j, p)| {
                let len = states.len();
                let id = *index.entry((j, q2)).or_insert(len);
                if id == len {
                    states.push((j, q2));
                }
                (id, p)
            })
            .collect();
        chain.push(row);
    }
    let dra_state: Vec<usize> = states.iter().map(|&(_, q)| q).collect();
    let values = accepting_reach(&chain, &dra_state, &dra);
    Ok(ValueResult {
        value: values[0],
        policy: None,
    })
}

/// MDP × DRA over the reachable pairs.
struct Product {
    states: Vec<(usize, usize)>,
    /// `trans[x][a]`.
    trans: Vec<Vec<Vec<(usize, f64)>>>,
}

impl Product {
    fn new(mdp: &Mdp, flab: &Labeling, dra: &Dra) -> Product {
        let start = (mdp.initial, dra.initial);
        let mut index: HashMap<(usize, usize), usize> = HashMap::from([(start, 0)]);
        let mut states = vec![start];
        let mut trans = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let (s, q) = states[x];
            let q2 = dra.next(q, flab.label(s));
            let mut rows = Vec::with_capacity(mdp.num_actions());
            for a in 0..mdp.num_actions() {
                let row = mdp
                    .dist(s, a)
                    .iter()
                    .map(|&(t, p)| {
                        let len = states.len();
                        let id = *index.entry((t, q2)).or_insert(len);
                        if id == len {
                            states.push((t, q2));
                            queue.push_back(id);
                        }
                        (id, p)
                    })
                    .collect();
                rows.push(row);
            }
            trans.push(rows);
        }
        Product { states, trans }
    }

    fn len(&self) -> usize {
        self.states.len()
    }

    fn q_value(&self, x: usize, a: usize, v: &[f64]) -> f64 {
        self.trans[x][a].iter().map(|&(y, p)| p * v[y]).sum()
    }
}

/// Maximal end components inside `allowed`, each with the actions that
/// stay inside it.
fn mecs(prod: &Product, allowed: &[bool]) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
    let n = prod.len();
    let mut alive = allowed.to_vec();
    let mut acts: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            if !alive[x] {
                return Vec::new();
            }
            (0..prod.trans[x].len())
                .filter(|&a| prod.trans[x][a].iter().all(|&(y, p)| p == 0.0 || allowed[y]))
                .collect()
        })
        .collect();
    let comps = loop {
        for x in 0..n {
            if acts[x].is_empty() {
                alive[x] = false;
            }
        }
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                let mut v: Vec<usize> = acts[x]
                    .iter()
                    .flat_map(|&a| prod.trans[x][a].iter().filter(|e| e.1 > 0.0).map(|e| e.0))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let comps = graph::sccs(&adj, &alive);
        let mut comp_of = vec![usize::MAX; n];
        for (c, comp) in comps.iter().enumerate() {
            for &x in comp {
                comp_of[x] = c;
            }
        }
        let mut changed = false;
        for x in 0..n {
            if !alive[x] {
                continue;
            }
            let before = acts[x].len();
            acts[x].retain(|&a| {
                prod.trans[x][a]
                    .iter()
                    .all(|&(y, p)| p == 0.0 || comp_of[y] == comp_of[x])
            });
            changed |= acts[x].len() != before;
        }
        if !changed {
            break comps;
        }
    };
    comps
        .into_iter()
        .filter(|comp| comp.iter().all(|&x| !acts[x].is_empty()))
        .map(|comp| {
            let a = comp.iter().map(|&x| acts[x].clone()).collect();
            (comp, a)
        })
        .collect()
}

/// Memoryless randomized strategy on the product.
type Strategy = Vec<Vec<(usize, f64)>>;

struct Solver<'a> {
    prod: &'a Product,
    dra: &'a Dra,
    target: Vec<bool>,
    /// For target states: the actions of their end component.
    internal: Vec<Vec<usize>>,
    can_reach: Vec<bool>,
}

impl Solver<'_> {
    fn value_iteration(&self) -> Vec<f64> {
        let n = self.prod.len();
        let mut v: Vec<f64> = self.target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        loop {
            let mut delta: f64 = 0.0;
            for x in 0..n {
                if self.target[x] || !self.can_reach[x] {
                    continue;
                }
                let best = (0..self.prod.trans[x].len())
                    .map(|a| self.prod.q_value(x, a, &v))
                    .fold(0.0, f64::max);
                delta = delta.max((best - v[x]).abs());
                v[x] = best;
            }
            if delta < VI_TOLERANCE {
                return v;
            }
        }
    }

    /// Greedy strategy: near-best actions, ties broken toward the target by
    /// attractor rank and then by lowest action id; uniform over internal
    /// actions inside accepting end components.
    fn extract(&self, v: &[f64]) -> Strategy {
        let n = self.prod.len();
        let na = |x: usize| self.prod.trans[x].len();
        let near: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                let q: Vec<f64> = (0..na(x)).map(|a| self.prod.q_value(x, a, v)).collect();
                let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (0..na(x)).filter(|&a| q[a] >= best - TIE_TOLERANCE).collect()
            })
            .collect();
        let mut ranked = self.target.clone();
        let mut choice: Vec<Option<usize>> = vec![None; n];
        loop {
            let snapshot = ranked.clone();
            for x in 0..n {
                if ranked[x] || !self.can_reach[x] || v[x] <= 0.0 {
                    continue;
                }
                let step = near[x].iter().copied().find(|&a| {
                    self.prod.trans[x][a].iter().any(|&(y, p)| p > 0.0 && snapshot[y])
                });
                if let Some(a) = step {
                    ranked[x] = true;
                    choice[x] = Some(a);
                }
            }
            if ranked == snapshot {
                break;
            }
        }
        (0..n)
            .map(|x| {
                if self.target[x] {
                    let acts = &self.internal[x];
                    let p = 1.0 / acts.len() as f64;
                    acts.iter().map(|&a| (a, p)).collect()
                } else {
                    let a = choice[x].unwrap_or(near[x][0]);
                    vec![(a, 1.0)]
                }
            })
            .collect()
    }

    fn evaluate(&self, sigma: &Strategy) -> Vec<f64> {
        let chain: Chain = (0..self.prod.len())
            .map(|x| {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for &(a, pa) in &sigma[x] {
                    for &(y, p) in &self.prod.trans[x][a] {
                        match row.iter_mut().find(|e| e.0 == y) {
                            Some(e) => e.1 += pa * p,
                            None => row.push((y, pa * p)),
                        }
                    }
                }
                row
            })
            .collect();
        let dra_state: Vec<usize> = self.prod.states.iter().map(|&(_, q)| q).collect();
        accepting_reach(&chain, &dra_state, self.dra)
    }
}

/// Optimal satisfaction probability of `f` on `mdp`, with a certified
/// finite-memory policy whose memory is the formula's Rabin automaton.
pub fn optimal_value(mdp: &Mdp, lab: &Labeling, f: &Ltl) -> Result<ValueResult> {
    let flab = lab.reindex(&f.alphabet);
    let dra = ltl_to_dra(f, &Limits::default())?;
    let prod = Product::new(mdp, &flab, &dra);
    let n = prod.len();
    let mut target = vec![false; n];
    let mut internal: Vec<Vec<usize>> = vec![Vec::new(); n];
    for pair in &dra.pairs {
        let allowed: Vec<bool> = prod.states.iter().map(|&(_, q)| !pair.fin[q]).collect();
        for (comp, acts) in mecs(&prod, &allowed) {
            if !comp.iter().any(|&x| pair.inf[prod.states[x].1]) {
                continue;
            }
            for (&x, a) in comp.iter().zip(acts) {
                if !target[x] {
                    target[x] = true;
                    internal[x] = a;
                }
            }
        }
    }
    let adj: Vec<Vec<usize>> = prod
        .trans
        .iter()
        .map(|rows| rows.iter().flatten().filter(|e| e.1 > 0.0).map(|e| e.0).collect())
        .collect();
    let can_reach = graph::backward_reach(&adj, &target);
    let solver = Solver {
        prod: &prod,
        dra: &dra,
        target,
        internal,
        can_reach,
    };
    let mut values = solver.value_iteration();
    let mut sigma = solver.extract(&values);
    for _ in 0..100 {
        values = solver.evaluate(&sigma);
        let next = solver.extract(&values);
        if next == sigma {
            break;
        }
        sigma = next;
    }
    let policy = certified_policy(mdp, lab, f, &dra, &prod, &sigma);
    Ok(ValueResult {
        value: values[0],
        policy: Some(policy),
    })
}

fn certified_policy(
    mdp: &Mdp,
    lab: &Labeling,
    f: &Ltl,
    dra: &Dra,
    prod: &Product,
    sigma: &Strategy,
) -> FiniteMemoryPolicy {
    let nl = lab.alphabet.num_letters();
    let translated = translate_letters(&lab.alphabet, &f.alphabet);
    let k = dra.num_states();
    let update = (0..k)
        .flat_map(|q| translated.iter().map(move |&l| (q, l)))
        .map(|(q, l)| dra.next(q, l))
        .collect();
    let memory = Memory::new(nl, update, dra.initial).expect("automaton is total");
    let na = mdp.num_actions();
    let mut decision = vec![0.0; mdp.num_states() * k * na];
    for s in 0..mdp.num_states() {
        for q in 0..k {
            decision[(s * k + q) * na] = 1.0;
        }
    }
    for (x, &(s, q)) in prod.states.iter().enumerate() {
        let row = &mut decision[(s * k + q) * na..(s * k + q + 1) * na];
        row.fill(0.0);
        for &(a, p) in &sigma[x] {
            row[a] += p;
        }
    }
    FiniteMemoryPolicy::new(memory, mdp.num_states(), na, decision).expect("rows sum to one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse, Alphabet, Letter};

    /// g --a1--> h with prob p, else g; g --a2--> q with prob p, else g.
    fn two_way(p: f64) -> (Mdp, Labeling) {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let mdp = Mdp::new(
            names(&["g", "h", "q"]),
            names(&["a1", "a2"]),
            0,
            vec![
                vec![(1, p), (0, 1.0 - p)],
                vec![(2, p), (0, 1.0 - p)],
                vec![(1, 1.0)],
                vec![(1, 1.0)],
                vec![(2, 1.0)],
                vec![(2, 1.0)],
            ],
        )
        .unwrap();
        let lab = Labeling::new(
            Alphabet::new(["h"]).unwrap(),
            vec![Letter(0), Letter(1), Letter(0)],
        )
        .unwrap();
        (mdp, lab)
    }

    fn formula(text: &str) -> Ltl {
        parse(text, &Alphabet::new(["h"]).unwrap()).unwrap()
    }

    #[test]
    fn chain_values() {
        let (mdp, lab) = two_way(0.1);
        let f = formula("F h");
        let always_a1 = FiniteMemoryPolicy::constant(2, 3, 2, 0);
        assert!((policy_value(&mdp, &lab, &f, &always_a1).unwrap().value - 1.0).abs() < 1e-12);
        let uniform = FiniteMemoryPolicy::uniform(2, 3, 2);
        assert!((policy_value(&mdp, &lab, &f, &uniform).unwrap().value - 0.5).abs() < 1e-12);
        let never = formula("false");
        assert_eq!(policy_value(&mdp, &lab, &never, &uniform).unwrap().value, 0.0);
    }

    #[test]
    fn optimum_and_certificate() {
        for p in [0.5, 0.1, 1e-3] {
            let (mdp, lab) = two_way(p);
            let f = formula("F h");
            let r = optimal_value(&mdp, &lab, &f).unwrap();
            assert!((r.value - 1.0).abs() <= 1e-10, "p={p}: {}", r.value);
            let pol = r.policy.unwrap();
            let m0 = pol.memory.initial;
            assert_eq!(pol.action_dist(0, m0), &[1.0, 0.0]);
            let v = policy_value(&mdp, &lab, &f, &pol).unwrap().value;
            assert!((v - r.value).abs() <= 1e-8);
        }
    }

    #[test]
    fn trivial_objectives() {
        let (mdp, lab) = two_way(0.3);
        assert!((optimal_value(&mdp, &lab, &formula("true")).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(optimal_value(&mdp, &lab, &formula("false")).unwrap().value, 0.0);
        let r = optimal_value(&mdp, &lab, &formula("G !h")).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn formula_atoms_missing_from_model_are_false() {
        let (mdp, lab) = two_way(0.3);
        let f = parse("F goal", &Alphabet::new(["goal"]).unwrap()).unwrap();
        assert_eq!(optimal_value(&mdp, &lab, &f).unwrap().value, 0.0);
    }
}
