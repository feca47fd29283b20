#![allow(dead_code)]

use ltl_workbench::ltl::{Formula, LassoWord, Letter};
use rand::Rng;

/// Direct fixpoint evaluation of `f` at position 0 of the lasso, sharing no
/// code with the automata.
pub fn holds(f: &Formula, w: &LassoWord) -> bool {
    let len = w.prefix().len() + w.cycle().len();
    let letters: Vec<Letter> = (0..len).map(|i| w.at(i)).collect();
    let next: Vec<usize> = (0..len)
        .map(|i| if i + 1 < len { i + 1 } else { w.prefix().len() })
        .collect();
    eval(f, &letters, &next)[0]
}

fn fixpoint(start: bool, len: usize, rule: impl Fn(usize, &[bool]) -> bool) -> Vec<bool> {
    let mut v = vec![start; len];
    for _ in 0..=2 * len {
        let nv: Vec<bool> = (0..len).map(|i| rule(i, &v)).collect();
        if nv == v {
            break;
        }
        v = nv;
    }
    v
}

fn eval(f: &Formula, letters: &[Letter], next: &[usize]) -> Vec<bool> {
    use Formula::*;
    let len = letters.len();
    match f {
        True => vec![true; len],
        False => vec![false; len],
        Atom(a) => letters.iter().map(|l| l.contains(*a)).collect(),
        Not(x) => eval(x, letters, next).into_iter().map(|b| !b).collect(),
        And(x, y) => {
            let (x, y) = (eval(x, letters, next), eval(y, letters, next));
            (0..len).map(|i| x[i] && y[i]).collect()
        }
        Or(x, y) => {
            let (x, y) = (eval(x, letters, next), eval(y, letters, next));
            (0..len).map(|i| x[i] || y[i]).collect()
        }
        Next(x) => {
            let x = eval(x, letters, next);
            (0..len).map(|i| x[next[i]]).collect()
        }
        Eventually(x) => {
            let x = eval(x, letters, next);
            fixpoint(false, len, |i, v| x[i] || v[next[i]])
        }
        Always(x) => {
            let x = eval(x, letters, next);
            fixpoint(true, len, |i, v| x[i] && v[next[i]])
        }
        Until(x, y) => {
            let (x, y) = (eval(x, letters, next), eval(y, letters, next));
            fixpoint(false, len, |i, v| y[i] || (x[i] && v[next[i]]))
        }
        Release(x, y) => {
            let (x, y) = (eval(x, letters, next), eval(y, letters, next));
            fixpoint(true, len, |i, v| y[i] && (x[i] || v[next[i]]))
        }
    }
}

/// Random formula over `atoms` atoms with depth at most `depth`.
pub fn random_formula(rng: &mut impl Rng, atoms: usize, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..atoms + 2) {
            0 => Formula::True,
            1 => Formula::False,
            k => Formula::Atom(k - 2),
        };
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, depth - 1);
    match rng.random_range(0..8) {
        0 => sub(rng).not(),
        1 => sub(rng).next(),
        2 => sub(rng).eventually(),
        3 => sub(rng).always(),
        4 => sub(rng).and(sub(rng)),
        5 => sub(rng).or(sub(rng)),
        6 => sub(rng).until(sub(rng)),
        _ => sub(rng).release(sub(rng)),
    }
}

/// Random lasso with `|u| <= 4` and `1 <= |v| <= 4`.
pub fn random_lasso(rng: &mut impl Rng, num_letters: usize) -> LassoWord {
    let u_len = rng.random_range(0..=4);
    let v_len = rng.random_range(1..=4);
    let mut word = |n: usize| -> Vec<Letter> {
        (0..n).map(|_| Letter(rng.random_range(0..num_letters as u32))).collect()
    };
    let (u, v) = (word(u_len), word(v_len));
    LassoWord::new(u, v).unwrap()
}

pub fn lasso(u: &[u32], v: &[u32]) -> LassoWord {
    LassoWord::new(
        u.iter().map(|&b| Letter(b)).collect(),
        v.iter().map(|&b| Letter(b)).collect(),
    )
    .unwrap()
}

use ltl_workbench::ltl::Alphabet;
use ltl_workbench::mdp::{FiniteMemoryPolicy, Labeling, Mdp, Memory};

/// Random MDP whose rows each have between one and three successors.
pub fn random_mdp(rng: &mut impl Rng, states: usize, actions: usize) -> Mdp {
    let mut trans = Vec::new();
    for _ in 0..states * actions {
        let k = rng.random_range(1..=3.min(states));
        let mut targets: Vec<usize> = (0..states).collect();
        for i in 0..k {
            let j = rng.random_range(i..states);
            targets.swap(i, j);
        }
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        trans.push(targets[..k].iter().zip(&weights).map(|(&t, &w)| (t, w / total)).collect());
    }
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    Mdp::new(names("s", states), names("a", actions), 0, trans).unwrap()
}

pub fn random_labeling(rng: &mut impl Rng, alphabet: &Alphabet, states: usize) -> Labeling {
    let letters = (0..states)
        .map(|_| Letter(rng.random_range(0..alphabet.num_letters() as u32)))
        .collect();
    Labeling::new(alphabet.clone(), letters).unwrap()
}

/// Random policy with up to `max_memory` memory states and random,
/// sometimes deterministic, action distributions.
pub fn random_policy(
    rng: &mut impl Rng,
    mdp: &Mdp,
    num_letters: usize,
    max_memory: usize,
) -> FiniteMemoryPolicy {
    let k = rng.random_range(1..=max_memory);
    let update = (0..k * num_letters).map(|_| rng.random_range(0..k)).collect();
    let memory = Memory::new(num_letters, update, 0).unwrap();
    let na = mdp.num_actions();
    let mut decision = Vec::new();
    for _ in 0..mdp.num_states() * k {
        if rng.random_bool(0.5) {
            let a = rng.random_range(0..na);
            decision.extend((0..na).map(|b| if a == b { 1.0 } else { 0.0 }));
        } else {
            let w: Vec<f64> = (0..na).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
            let t: f64 = w.iter().sum();
            decision.extend(w.iter().map(|x| x / t));
        }
    }
    FiniteMemoryPolicy::new(memory, mdp.num_states(), na, decision).unwrap()
}
