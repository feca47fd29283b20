//! Environment generators: the two-state-choice pair, the parameterized
//! counterexample family, its instantiation from an uncommittable witness,
//! and the sticky gridworld.

use crate::error::{Error, Result};
use crate::ltl::{parse, Alphabet, Letter, Ltl};
use crate::mdp::{Labeling, Mdp};
use crate::witness::{Witness, WitnessKind};

/// Chain lengths of a counterexample pair: grey states `g_0..g_{l-1}` with
/// the last one looping back to `g_k`, an h-chain `h_0..h_{v-1}` looping
/// back to `h_u`, and a q-chain `q_0..q_{n-1}` looping back to `q_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub k: usize,
    pub l: usize,
    pub u: usize,
    pub v: usize,
    pub m: usize,
    pub n: usize,
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        let ok = |start: usize, len: usize| start < len;
        if !ok(self.k, self.l) || !ok(self.u, self.v) || !ok(self.m, self.n) {
            return Err(Error::InvalidShape(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.l + self.v + self.n
    }

    pub fn grey(&self, i: usize) -> usize {
        i
    }

    pub fn h(&self, i: usize) -> usize {
        self.l + i
    }

    pub fn q(&self, i: usize) -> usize {
        self.l + self.v + i
    }

    pub fn decision_state(&self) -> usize {
        self.l - 1
    }
}

/// Two MDPs over one state space that differ only in which action at the
/// decision state leads to `h_0`.
#[derive(Debug, Clone)]
pub struct CounterexamplePair {
    pub m1: Mdp,
    pub m2: Mdp,
    /// Labeling for `target`; equal to `reach_labeling` when there is none.
    pub labeling: Labeling,
    pub target: Option<Ltl>,
    /// Single-atom labeling marking `h_0`.
    pub reach_labeling: Labeling,
    /// `F h0` over `reach_labeling`'s alphabet.
    pub reach: Ltl,
    pub p: f64,
    pub shape: Shape,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidP(p))
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `(g, a1)` reaches `h` with probability `p` and `(g, a2)` reaches `q`
/// with probability `p` in the first MDP; the second swaps the actions.
pub fn simple_pair(p: f64) -> Result<CounterexamplePair> {
    check_p(p)?;
    let (g, h, q) = (0, 1, 2);
    let m1 = Mdp::new(
        names(&["g", "h", "q"]),
        names(&["a1", "a2"]),
        g,
        vec![
            vec![(h, p), (g, 1.0 - p)],
            vec![(q, p), (g, 1.0 - p)],
            vec![(h, 1.0)],
            vec![(h, 1.0)],
            vec![(q, 1.0)],
            vec![(q, 1.0)],
        ],
    )?;
    let m2 = m1.permute_actions(&[1, 0]);
    let alphabet = Alphabet::new(["h"])?;
    let labeling = Labeling::new(alphabet.clone(), vec![Letter(0), Letter(1), Letter(0)])?;
    Ok(CounterexamplePair {
        m1,
        m2,
        labeling: labeling.clone(),
        target: None,
        reach_labeling: labeling,
        reach: parse("F h", &alphabet)?,
        p,
        shape: Shape {
            k: 0,
            l: 1,
            u: 0,
            v: 1,
            m: 0,
            n: 1,
        },
    })
}

/// The counterexample family for `shape` with only the reach labeling.
pub fn counterexample_pair(shape: Shape, p: f64) -> Result<CounterexamplePair> {
    shape.validate()?;
    check_p(p)?;
    let mut state_names = Vec::with_capacity(shape.num_states());
    state_names.extend((0..shape.l).map(|i| format!("g{i}")));
    state_names.extend((0..shape.v).map(|i| format!("h{i}")));
    state_names.extend((0..shape.n).map(|i| format!("q{i}")));
    let step = |to: usize| vec![vec![(to, 1.0)], vec![(to, 1.0)]];
    let mut trans = Vec::new();
    for i in 0..shape.l - 1 {
        trans.extend(step(shape.grey(i + 1)));
    }
    let back = shape.grey(shape.k);
    trans.push(vec![(shape.h(0), p), (back, 1.0 - p)]);
    trans.push(vec![(shape.q(0), p), (back, 1.0 - p)]);
    for i in 0..shape.v {
        trans.extend(step(if i + 1 < shape.v { shape.h(i + 1) } else { shape.h(shape.u) }));
    }
    for i in 0..shape.n {
        trans.extend(step(if i + 1 < shape.n { shape.q(i + 1) } else { shape.q(shape.m) }));
    }
    let m1 = Mdp::new(state_names, names(&["a1", "a2"]), 0, trans)?;
    let m2 = m1.permute_actions(&[1, 0]);
    let alphabet = Alphabet::new(["h0"])?;
    let mut letters = vec![Letter(0); shape.num_states()];
    letters[shape.h(0)] = Letter(1);
    let reach_labeling = Labeling::new(alphabet.clone(), letters)?;
    Ok(CounterexamplePair {
        m1,
        m2,
        labeling: reach_labeling.clone(),
        target: None,
        reach_labeling,
        reach: parse("F h0", &alphabet)?,
        p,
        shape,
    })
}

/// Counterexample pair for `f` whose labels spell the witness words, so
/// that every policy satisfies `f` exactly as often as it reaches `h_0`.
pub fn instantiate_from_witness(wit: &Witness, f: &Ltl, p: f64) -> Result<CounterexamplePair> {
    wit.check(f)?;
    check_p(p)?;
    let (a, b, c, d) = (&wit.prefix, &wit.first_cycle, &wit.bridge, &wit.second_cycle);
    let grey: Vec<Letter> = a.iter().chain(b).copied().collect();
    let detour: Vec<Letter> = c.iter().chain(d).copied().collect();
    let (shape, h_word, q_word) = match wit.kind {
        WitnessKind::UncommittableAccepting => (
            Shape {
                k: a.len(),
                l: a.len() + b.len(),
                u: 0,
                v: b.len(),
                m: c.len(),
                n: c.len() + d.len(),
            },
            b.clone(),
            detour,
        ),
        WitnessKind::UncommittableRejecting => (
            Shape {
                k: a.len(),
                l: a.len() + b.len(),
                u: c.len(),
                v: c.len() + d.len(),
                m: 0,
                n: b.len(),
            },
            detour,
            b.clone(),
        ),
    };
    let mut pair = counterexample_pair(shape, p)?;
    let letters: Vec<Letter> = grey.into_iter().chain(h_word).chain(q_word).collect();
    pair.labeling = Labeling::new(f.alphabet.clone(), letters)?;
    pair.target = Some(f.clone());
    Ok(pair)
}

pub const GRID_SIZE: usize = 5;
pub const GRID_START: (usize, usize) = (0, 0);
pub const GRID_GOAL: (usize, usize) = (4, 4);
pub const GRID_TRAPS: [(usize, usize); 4] = [(0, 4), (2, 0), (2, 3), (3, 3)];

pub fn grid_index(x: usize, y: usize) -> usize {
    x + GRID_SIZE * y
}

/// Sticky 5×5 gridworld: from a non-trap cell the chosen move happens with
/// probability `1 - p` and the agent stays with probability `p`; moves off
/// the grid stay put; traps are absorbing. Labeled `goal` at the goal cell,
/// with objective `F goal`.
pub fn gridworld(p: f64) -> Result<(Mdp, Labeling, Ltl)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidP(p));
    }
    let moves: [(&str, i64, i64); 4] = [("up", 0, 1), ("down", 0, -1), ("left", -1, 0), ("right", 1, 0)];
    let mut state_names = Vec::new();
    let mut trans = Vec::new();
    for y in 0..GRID_SIZE {
        for x in 0..GRID_SIZE {
            state_names.push(format!("c{x}_{y}"));
        }
    }
    for y in 0..GRID_SIZE {
        for x in 0..GRID_SIZE {
            let here = grid_index(x, y);
            let trap = GRID_TRAPS.contains(&(x, y));
            for &(_, dx, dy) in &moves {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                let inside = (0..GRID_SIZE as i64).contains(&nx) && (0..GRID_SIZE as i64).contains(&ny);
                let row = if trap || !inside {
                    vec![(here, 1.0)]
                } else if p == 0.0 {
                    vec![(grid_index(nx as usize, ny as usize), 1.0)]
                } else {
                    vec![(grid_index(nx as usize, ny as usize), 1.0 - p), (here, p)]
                };
                trans.push(row);
            }
        }
    }
    let actions = moves.iter().map(|m| m.0.to_string()).collect();
    let mdp = Mdp::new(state_names, actions, grid_index(GRID_START.0, GRID_START.1), trans)?;
    let alphabet = Alphabet::new(["goal"])?;
    let mut letters = vec![Letter(0); GRID_SIZE * GRID_SIZE];
    letters[grid_index(GRID_GOAL.0, GRID_GOAL.1)] = Letter(1);
    let lab = Labeling::new(alphabet.clone(), letters)?;
    Ok((mdp, lab, parse("F goal", &alphabet)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcheck::optimal_value;

    #[test]
    fn simple_pair_edges() {
        let pair = simple_pair(0.1).unwrap();
        assert_eq!(pair.m1.dist(0, 0), &[(1, 0.1), (0, 0.9)]);
        assert_eq!(pair.m2.dist(0, 1), &[(1, 0.1), (0, 0.9)]);
        assert_eq!(simple_pair(0.0).unwrap_err(), Error::InvalidP(0.0));
        assert!(simple_pair(1.0).is_err());
    }

    #[test]
    fn minimal_shape() {
        let shape = Shape {
            k: 0,
            l: 1,
            u: 0,
            v: 1,
            m: 1,
            n: 2,
        };
        let pair = counterexample_pair(shape, 0.5).unwrap();
        assert_eq!(pair.m1.num_states(), 4);
        assert_eq!(shape.decision_state(), 0);
        let bad = Shape { k: 1, ..shape };
        assert!(matches!(counterexample_pair(bad, 0.5), Err(Error::InvalidShape(_))));
        assert!(matches!(counterexample_pair(shape, 1.5), Err(Error::InvalidP(_))));
    }

    #[test]
    fn pairs_differ_only_at_the_decision_state() {
        let shape = Shape {
            k: 1,
            l: 3,
            u: 1,
            v: 3,
            m: 0,
            n: 2,
        };
        let pair = counterexample_pair(shape, 0.2).unwrap();
        for s in 0..shape.num_states() {
            let same = (0..2).all(|a| pair.m1.dist(s, a) == pair.m2.dist(s, a));
            assert_eq!(same, s != shape.decision_state(), "state {s}");
        }
    }

    #[test]
    fn every_run_reaches_a_branch() {
        let shape = Shape {
            k: 1,
            l: 3,
            u: 0,
            v: 2,
            m: 1,
            n: 3,
        };
        let pair = counterexample_pair(shape, 0.3).unwrap();
        let al = Alphabet::new(["h0", "q0"]).unwrap();
        let mut letters = vec![Letter(0); shape.num_states()];
        letters[shape.h(0)] = Letter(1);
        letters[shape.q(0)] = Letter(2);
        let lab = Labeling::new(al.clone(), letters).unwrap();
        let f = parse("F h0 | F q0", &al).unwrap();
        let v = optimal_value(&pair.m1, &lab, &f).unwrap().value;
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gridworld_layout() {
        let (mdp, lab, _) = gridworld(0.0).unwrap();
        assert_eq!(mdp.num_states(), 25);
        let up = mdp.action_index("up").unwrap();
        assert_eq!(mdp.dist(grid_index(0, 0), up), &[(grid_index(0, 1), 1.0)]);
        let left = mdp.action_index("left").unwrap();
        assert_eq!(mdp.dist(0, left), &[(0, 1.0)]);
        let trap = grid_index(2, 0);
        assert!((0..4).all(|a| mdp.dist(trap, a) == [(trap, 1.0)]));
        assert_eq!(lab.letters.iter().filter(|l| l.bits() == 1).count(), 1);
        assert!(gridworld(1.0).is_err());
        assert!(gridworld(-0.1).is_err());
    }
}
